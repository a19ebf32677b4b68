#include "jbc/cgraph.hpp"

#include "jbc/heapprops.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace jbc {

std::vector<int> CGraph::out_edges(int node) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i].from == node) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> CGraph::in_edges(int node) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i].to == node) out.push_back(static_cast<int>(i));
  return out;
}

Assumption parse_assumption(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("assumption wants KIND:NAMES, got '" + text + "'");
  std::string kind = text.substr(0, colon);
  std::string names = text.substr(colon + 1);
  Assumption a;
  if (kind == "acyclic") a.kind = Assumption::Kind::Acyclic;
  else if (kind == "unshared") a.kind = Assumption::Kind::Unshared;
  else throw std::runtime_error("unknown assumption kind '" + kind + "'");
  std::size_t pos = 0;
  while (pos <= names.size()) {
    auto comma = names.find(',', pos);
    std::string n = names.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (n.empty()) throw std::runtime_error("empty name in assumption '" + text + "'");
    a.roots.push_back(n);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (a.roots.empty()) throw std::runtime_error("assumption '" + text + "' names nothing");
  if (a.kind == Assumption::Kind::Acyclic && a.roots.size() != 1)
    throw std::runtime_error("acyclic takes a single name");
  return a;
}

namespace {

int slot_of_name(const Method& m, const std::string& name) {
  if (name == "this") return 0;
  for (std::size_t i = 0; i < m.params.size(); ++i)
    if (m.params[i].name == name) return static_cast<int>(i) + 1;
  return -1;
}

std::set<std::uint32_t> abs_reach(const AbstractState& s, std::uint32_t from) {
  std::set<std::uint32_t> seen{from};
  std::deque<std::uint32_t> work{from};
  while (!work.empty()) {
    std::uint32_t a = work.front();
    work.pop_front();
    auto it = s.heap.find(a);
    if (it == s.heap.end()) continue;
    for (const auto& v : it->second.fields)
      if (const Addr* p = std::get_if<Addr>(&v))
        if (seen.insert(p->id).second) work.push_back(p->id);
  }
  return seen;
}

} // namespace

AbstractState initial_abstract_state(AnalysisContext& ctx, const std::string& cls,
                                     const std::string& method,
                                     const std::vector<Assumption>& assumptions,
                                     bool this_nonnull) {
  const Program& p = *ctx.prog;
  auto mr = p.resolve_method(cls, method);
  if (!mr) throw std::runtime_error("no method " + cls + "." + method);
  const Method& m = *mr->method;

  AbstractState s;
  s.kind = AbstractState::Kind::Triple;
  AbsFrame f;
  f.cls = mr->cls->name;
  f.method = method;
  f.pc = 0;

  auto fresh_cv = [&](const std::string& c) {
    std::uint32_t a = s.fresh_addr();
    s.heap.emplace(a, AbsObject{false, c, {}});
    return AbsValue(Addr{a});
  };

  if (this_nonnull) {
    std::uint32_t a = s.fresh_addr();
    AbsObject obj;
    obj.is_instance = true;
    obj.cls = cls;
    for (const auto& slot : p.field_table(cls)) {
      if (slot.type == "int") obj.fields.push_back(s.fresh_int_var());
      else if (slot.type == "bool") obj.fields.push_back(s.fresh_bool_var());
      else if (slot.type == "unit") obj.fields.push_back(Unit{});
      else obj.fields.push_back(fresh_cv(slot.type));
    }
    s.heap.emplace(a, std::move(obj));
    f.regs.push_back(Addr{a});
  } else {
    f.regs.push_back(fresh_cv(cls));
  }
  for (const auto& par : m.params) {
    if (par.type == "int") f.regs.push_back(s.fresh_int_var());
    else if (par.type == "bool") f.regs.push_back(s.fresh_bool_var());
    else if (par.type == "unit") f.regs.push_back(Unit{});
    else f.regs.push_back(fresh_cv(par.type));
  }
  for (int i = 0; i < m.max_vars; ++i) f.regs.push_back(Unit{});
  s.frames.push_back(std::move(f));

  std::uint32_t next_bit = 0;
  for (const auto& [i, j] : ctx.disjoint_regions) next_bit = std::max({next_bit, i + 1, j + 1});

  for (const auto& asmp : assumptions) {
    std::vector<std::uint32_t> root_addrs;
    for (const auto& name : asmp.roots) {
      int slot = slot_of_name(m, name);
      if (slot < 0) throw std::runtime_error("assumption names unknown parameter '" + name + "'");
      const AbsValue& v = s.frames[0].regs[slot];
      if (const Addr* a = std::get_if<Addr>(&v)) root_addrs.push_back(a->id);
      else if (asmp.kind == Assumption::Kind::Acyclic)
        throw std::runtime_error("acyclic assumption on non-reference '" + name + "'");
      else
        root_addrs.push_back(0); // unshared over a non-reference: empty region
    }
    if (asmp.kind == Assumption::Kind::Acyclic) {
      for (std::uint32_t a : abs_reach(s, root_addrs[0])) s.flags.insert(a);
    } else {
      std::vector<std::uint32_t> bits;
      for (std::uint32_t root : root_addrs) {
        std::uint32_t bit = next_bit++;
        if (bit >= 32) throw std::runtime_error("too many unshared regions");
        bits.push_back(bit);
        if (root == 0) continue;
        for (std::uint32_t a : abs_reach(s, root)) s.tags[a] |= (1u << bit);
      }
      for (std::size_t i = 0; i < bits.size(); ++i)
        for (std::size_t j = i + 1; j < bits.size(); ++j)
          ctx.disjoint_regions.emplace_back(bits[i], bits[j]);
    }
  }
  return reduce(ctx, s);
}

std::string check_assumptions(const Program& p, const JvmState& s0,
                              const std::vector<Assumption>& assumptions) {
  if (s0.frames.empty()) return "no entry frame";
  auto mr = p.resolve_method(s0.frames[0].cls, s0.frames[0].method);
  if (!mr) return "entry method not found";
  const Method& m = *mr->method;

  auto reach = [&](std::uint32_t from) {
    std::set<std::uint32_t> seen{from};
    std::deque<std::uint32_t> work{from};
    while (!work.empty()) {
      std::uint32_t a = work.front();
      work.pop_front();
      auto it = s0.heap.find(a);
      if (it == s0.heap.end()) continue;
      for (const auto& v : it->second.fields)
        if (const Addr* x = std::get_if<Addr>(&v))
          if (seen.insert(x->id).second) work.push_back(x->id);
    }
    return seen;
  };

  for (const auto& asmp : assumptions) {
    std::vector<std::pair<std::string, std::optional<std::uint32_t>>> roots;
    for (const auto& name : asmp.roots) {
      int slot = slot_of_name(m, name);
      if (slot < 0) return "assumption names unknown parameter '" + name + "'";
      const Value& v = s0.frames[0].regs[slot];
      if (const Addr* a = std::get_if<Addr>(&v)) roots.emplace_back(name, a->id);
      else roots.emplace_back(name, std::nullopt);
    }
    if (asmp.kind == Assumption::Kind::Acyclic) {
      if (!roots[0].second) continue; // null reference: trivially acyclic
      auto seen = reach(*roots[0].second);
      for (std::uint32_t a : seen) {
        auto it = s0.heap.find(a);
        if (it == s0.heap.end()) continue;
        for (const auto& v : it->second.fields)
          if (const Addr* x = std::get_if<Addr>(&v))
            if (reach(x->id).count(a))
              return "argument '" + roots[0].first + "' is not acyclic";
      }
    } else {
      for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
          if (!roots[i].second || !roots[j].second) continue;
          auto ri = reach(*roots[i].second);
          for (std::uint32_t a : reach(*roots[j].second))
            if (ri.count(a))
              return "arguments '" + roots[i].first + "' and '" + roots[j].first +
                     "' share structure";
        }
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// graph construction

namespace {

struct Succ {
  AbstractState st;
  EdgeKind kind = EdgeKind::Eval;
  std::optional<Term> constraint;
  std::optional<std::uint32_t> putfield_addr;
};

struct PathEnt {
  int node = 0;
  std::vector<Succ> pending;
  std::size_t next = 0;
};

std::vector<std::tuple<std::string, std::string, int, std::size_t, std::size_t>> locvec(
    const AbstractState& s) {
  std::vector<std::tuple<std::string, std::string, int, std::size_t, std::size_t>> out;
  if (s.kind != AbstractState::Kind::Triple) return out;
  for (const auto& f : s.frames)
    out.emplace_back(f.cls, f.method, f.pc, f.stack.size(), f.regs.size());
  return out;
}

struct Builder {
  const AnalysisContext& ctx;
  BuildLimits limits;

  std::vector<CNode> nodes;
  std::vector<char> dead;
  std::vector<CEdge> edges;
  std::vector<PathEnt> path;
  int live = 0;
  bool hit_limit = false;
  std::string limit_kind;

  bool limit(const std::string& kind) {
    hit_limit = true;
    limit_kind = kind;
    return false;
  }

  int add_node(AbstractState st, bool widened) {
    nodes.push_back({std::move(st), widened});
    dead.push_back(0);
    ++live;
    return static_cast<int>(nodes.size()) - 1;
  }

  void add_edge(int from, int to, EdgeKind kind, std::optional<Term> c = std::nullopt,
                std::optional<std::uint32_t> pf = std::nullopt) {
    edges.push_back({from, to, kind, std::move(c), std::move(pf)});
  }

  std::vector<Succ> successors(const AbstractState& s) {
    std::vector<Succ> out;
    if (s.kind != AbstractState::Kind::Triple) return out;
    if (is_abs_halt_state(*ctx.prog, s)) return out;
    if (auto r = needs_refinement(ctx, s)) {
      for (auto& st : apply_refinement(ctx, s, *r))
        out.push_back({std::move(st), EdgeKind::Refine, std::nullopt, std::nullopt});
      return out;
    }
    SymStep ss = symbolic_step(ctx, s);
    out.push_back({std::move(ss.next), EdgeKind::Eval, std::move(ss.constraint),
                   ss.putfield_addr});
    return out;
  }

  bool push_entry(int node) {
    if (static_cast<long long>(path.size()) + 1 > limits.max_depth) return limit("depth");
    path.push_back({node, successors(nodes[node].state), 0});
    return true;
  }

  bool expandable(const AbstractState& s) {
    return s.kind == AbstractState::Kind::Triple && !is_abs_halt_state(*ctx.prog, s);
  }

  void strip_and_gc(int w) {
    for (auto it = edges.begin(); it != edges.end();)
      it = (it->from == w) ? edges.erase(it) : std::next(it);
    // mark from the entry over the remaining edges
    std::vector<char> mark(nodes.size(), 0);
    std::deque<int> work{0};
    mark[0] = 1;
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& e : edges)
        if (mark[e.from] && !mark[e.to]) {
          mark[e.to] = 1;
          grew = true;
        }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!dead[i] && !mark[i]) {
        dead[i] = 1;
        --live;
      }
    }
    for (auto it = edges.begin(); it != edges.end();)
      it = (dead[it->from] || dead[it->to]) ? edges.erase(it) : std::next(it);
  }

  // pops path entries above w's entry; returns w's position
  std::size_t unwind_to(int w) {
    std::size_t pos = path.size();
    for (std::size_t i = 0; i < path.size(); ++i)
      if (path[i].node == w) pos = i;
    path.resize(pos + 1);
    return pos;
  }

  bool handle(int parent, Succ sc) {
    if (sc.kind == EdgeKind::Refine) {
      for (std::size_t x = 0; x < nodes.size(); ++x) {
        if (dead[x]) continue;
        if (equivalent(ctx, sc.st, nodes[x].state)) {
          add_edge(parent, static_cast<int>(x), EdgeKind::Refine);
          return true;
        }
      }
      if (live >= limits.max_nodes) return limit("nodes");
      int id = add_node(std::move(sc.st), false);
      add_edge(parent, id, EdgeKind::Refine);
      return push_entry(id);
    }

    // evaluation successor: reuse a covering node when one exists
    auto lv = locvec(sc.st);
    for (std::size_t x = 0; x < nodes.size(); ++x) {
      if (dead[x]) continue;
      if (nodes[x].state.kind != sc.st.kind) continue;
      if (locvec(nodes[x].state) != lv) continue;
      if (instance_of(ctx, sc.st, nodes[x].state)) {
        if (live >= limits.max_nodes) return limit("nodes");
        int id = add_node(std::move(sc.st), false);
        add_edge(parent, id, EdgeKind::Eval, std::move(sc.constraint), sc.putfield_addr);
        add_edge(id, static_cast<int>(x), EdgeKind::Instance);
        return true;
      }
    }

    // widen against the deepest ancestor at the same location
    if (sc.st.kind == AbstractState::Kind::Triple)
      for (auto it = path.rbegin(); it != path.rend(); ++it) {
        int w = it->node;
        if (locvec(nodes[w].state) != lv) continue;
        AbstractState j = join_states(ctx, nodes[w].state, sc.st);
        if (!nodes[w].widened) {
          strip_and_gc(w);
          if (live >= limits.max_nodes) return limit("nodes");
          int jid = add_node(std::move(j), true);
          add_edge(w, jid, EdgeKind::Instance);
          std::size_t pos = unwind_to(w);
          path[pos].next = path[pos].pending.size(); // w is done
          return push_entry(jid);
        }
        nodes[w].state = std::move(j);
        strip_and_gc(w);
        std::size_t pos = unwind_to(w);
        path[pos].pending = successors(nodes[w].state);
        path[pos].next = 0;
        return true;
      }

    if (live >= limits.max_nodes) return limit("nodes");
    int id = add_node(std::move(sc.st), false);
    bool expand = expandable(nodes[id].state);
    add_edge(parent, id, EdgeKind::Eval, std::move(sc.constraint), sc.putfield_addr);
    if (!expand) return true;
    return push_entry(id);
  }

  bool run(AbstractState init) {
    int entry = add_node(std::move(init), false);
    if (expandable(nodes[entry].state)) {
      if (!push_entry(entry)) return false;
    }
    while (!path.empty()) {
      PathEnt& top = path.back();
      if (top.next >= top.pending.size()) {
        path.pop_back();
        continue;
      }
      int parent = top.node;
      Succ sc = std::move(top.pending[top.next]);
      top.next += 1;
      if (!handle(parent, std::move(sc))) return false;
    }
    return true;
  }

  CGraph compact() {
    CGraph g;
    std::vector<int> remap(nodes.size(), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (dead[i]) continue;
      remap[i] = static_cast<int>(g.nodes.size());
      g.nodes.push_back(std::move(nodes[i]));
    }
    for (auto& e : edges) {
      CEdge ne = e;
      ne.from = remap[e.from];
      ne.to = remap[e.to];
      g.edges.push_back(std::move(ne));
    }
    g.entry = remap[0];
    return g;
  }
};

} // namespace

BuildResult build_graph(const AnalysisContext& ctx, const AbstractState& init,
                        const BuildLimits& limits) {
  Builder b{ctx, limits, {}, {}, {}, {}, 0, false, ""};
  b.run(init);
  BuildResult out{b.compact(), b.hit_limit, b.limit_kind};
  return out;
}

// ---------------------------------------------------------------------------
// concrete replay

TraceResult trace_concrete(const AnalysisContext& ctx, const CGraph& g, const RunResult& run) {
  TraceResult out;
  if (run.trace.empty()) {
    out.error = "run has no trace";
    return out;
  }
  if (!gamma_member(ctx, run.trace[0], g.nodes[g.entry].state)) {
    out.error = "entry state does not cover the initial state";
    return out;
  }
  int cur = g.entry;
  std::size_t transitions = run.trace.size() - 1;
  bool failed_tail = !run.halted && run.reason != FailReason::FuelExhausted;
  std::size_t total = transitions + (failed_tail ? 1 : 0);

  for (std::size_t i = 0; i < total; ++i) {
    std::vector<int> hops;
    bool crossed = false;
    while (!crossed) {
      auto outs = g.out_edges(cur);
      if (outs.size() == 1 && g.edges[outs[0]].kind == EdgeKind::Instance) {
        hops.push_back(outs[0]);
        cur = g.edges[outs[0]].to;
        continue;
      }
      bool all_refine = !outs.empty();
      for (int e : outs)
        if (g.edges[e].kind != EdgeKind::Refine) all_refine = false;
      if (all_refine) {
        std::vector<int> cands;
        for (int e : outs)
          if (gamma_member(ctx, run.trace[std::min(i, transitions)], g.nodes[g.edges[e].to].state))
            cands.push_back(e);
        if (cands.size() != 1) {
          out.error = "refinement at node " + std::to_string(cur) + " has " +
                      std::to_string(cands.size()) + " matching branches at step " +
                      std::to_string(i);
          return out;
        }
        hops.push_back(cands[0]);
        cur = g.edges[cands[0]].to;
        continue;
      }
      if (outs.size() == 1 && g.edges[outs[0]].kind == EdgeKind::Eval) {
        const CEdge& e = g.edges[outs[0]];
        const AbstractState& target = g.nodes[e.to].state;
        bool ok;
        if (i < transitions) {
          ok = gamma_member(ctx, run.trace[i + 1], target);
        } else {
          ok = target.kind == AbstractState::Kind::Failed && target.fail_reason == run.reason;
        }
        if (!ok) {
          out.error = "evaluation edge from node " + std::to_string(cur) +
                      " does not cover step " + std::to_string(i);
          return out;
        }
        hops.push_back(outs[0]);
        cur = e.to;
        crossed = true;
        continue;
      }
      out.error = "stuck at node " + std::to_string(cur) + " on step " + std::to_string(i);
      return out;
    }
    out.step_edges.push_back(std::move(hops));
  }
  out.ok = true;
  return out;
}

std::string export_dot(const CGraph& g) {
  std::ostringstream out;
  out << "digraph computation {\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const AbstractState& s = g.nodes[i].state;
    std::string label = "f_" + std::to_string(i);
    switch (s.kind) {
      case AbstractState::Kind::Triple:
        if (!s.frames.empty()) {
          const AbsFrame& f = s.frames.back();
          label += "\\n" + f.cls + "." + f.method + ":" + std::to_string(f.pc);
        }
        break;
      case AbstractState::Kind::Failed:
        label += std::string("\\n") + fail_reason_name(s.fail_reason);
        break;
      case AbstractState::Kind::Top: label += "\\ntop"; break;
      case AbstractState::Kind::Bot: label += "\\nbot"; break;
    }
    out << "  n" << i << " [label=\"" << label << "\""
        << (g.nodes[i].widened ? ", peripheries=2" : "") << "];\n";
  }
  for (const auto& e : g.edges) {
    const char* style = e.kind == EdgeKind::Eval ? "solid"
                        : e.kind == EdgeKind::Refine ? "dashed"
                                                     : "dotted";
    out << "  n" << e.from << " -> n" << e.to << " [style=" << style;
    if (e.constraint) out << ", label=\"" << render_constraint(*e.constraint) << "\"";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string dump_graph(const CGraph& g) {
  std::ostringstream out;
  out << g.nodes.size() << " node(s), " << g.edges.size() << " edge(s), entry f_" << g.entry
      << "\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    out << "--- f_" << i << (g.nodes[i].widened ? " (widened)" : "") << "\n";
    out << render_abstract_state(g.nodes[i].state);
  }
  for (const auto& e : g.edges) {
    const char* kind = e.kind == EdgeKind::Eval ? "eval"
                       : e.kind == EdgeKind::Refine ? "refine"
                                                    : "instance";
    out << "f_" << e.from << " -" << kind << "-> f_" << e.to;
    if (e.constraint) out << " [" << render_constraint(*e.constraint) << "]";
    if (e.putfield_addr) out << " (writes o" << *e.putfield_addr << ")";
    out << "\n";
  }
  return out.str();
}

} // namespace jbc
