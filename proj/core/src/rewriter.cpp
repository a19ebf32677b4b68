#include "jbc/rewriter.hpp"

#include "jbc/ctrs.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace jbc {

namespace {

Sort sort_of_term(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var: return t.sort;
    case Term::Kind::IntLit: return Sort::Int;
    case Term::Kind::BoolLit: return Sort::Bool;
    case Term::Kind::App:
      if (t.name == "+" || t.name == "-") return Sort::Int;
      if (is_theory_op(t.name)) return Sort::Bool;
      return Sort::Univ;
  }
  return Sort::Univ;
}

} // namespace

bool match_extend(const Term& pattern, const Term& subject, Binding& b) {
  if (pattern.kind == Term::Kind::Var) {
    if (sort_of_term(subject) != pattern.sort) return false;
    auto it = b.find(pattern.name);
    if (it != b.end()) return it->second == subject;
    b.emplace(pattern.name, subject);
    return true;
  }
  if (pattern.kind != subject.kind) return false;
  switch (pattern.kind) {
    case Term::Kind::IntLit: return pattern.z == subject.z;
    case Term::Kind::BoolLit: return pattern.b == subject.b;
    case Term::Kind::App: {
      if (pattern.name != subject.name || pattern.args.size() != subject.args.size())
        return false;
      for (std::size_t i = 0; i < pattern.args.size(); ++i)
        if (!match_extend(pattern.args[i], subject.args[i], b)) return false;
      return true;
    }
    default: return false;
  }
}

std::optional<Binding> match_term(const Term& pattern, const Term& subject) {
  Binding b;
  if (!match_extend(pattern, subject, b)) return std::nullopt;
  return b;
}

Term apply_binding(const Term& t, const Binding& b) {
  if (t.kind == Term::Kind::Var) {
    auto it = b.find(t.name);
    return it != b.end() ? it->second : t;
  }
  if (t.kind != Term::Kind::App) return t;
  Term out = t;
  for (auto& a : out.args) a = apply_binding(a, b);
  return out;
}

namespace {

// normalizes a ground theory term to a literal; non-theory apps stay as data
Term eval_ground(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var: throw std::runtime_error("constraint variable left unbound");
    case Term::Kind::IntLit:
    case Term::Kind::BoolLit: return t;
    case Term::Kind::App: break;
  }
  if (!is_theory_op(t.name)) return t;
  std::vector<Term> vals;
  for (const auto& a : t.args) vals.push_back(eval_ground(a));
  auto want_int = [&](const Term& v) {
    if (v.kind != Term::Kind::IntLit)
      throw std::runtime_error("constraint expects an integer");
    return v.z;
  };
  auto want_bool = [&](const Term& v) {
    if (v.kind != Term::Kind::BoolLit)
      throw std::runtime_error("constraint expects a boolean");
    return v.b;
  };
  if (t.name == "+") return Term::int_lit(want_int(vals[0]) + want_int(vals[1]));
  if (t.name == "-") return Term::int_lit(want_int(vals[0]) - want_int(vals[1]));
  if (t.name == ">=") return Term::bool_lit(want_int(vals[0]) >= want_int(vals[1]));
  if (t.name == "=") return Term::bool_lit(vals[0] == vals[1]);
  if (t.name == "!=") return Term::bool_lit(!(vals[0] == vals[1]));
  if (t.name == "/\\") return Term::bool_lit(want_bool(vals[0]) && want_bool(vals[1]));
  if (t.name == "\\/") return Term::bool_lit(want_bool(vals[0]) || want_bool(vals[1]));
  if (t.name == "not") return Term::bool_lit(!want_bool(vals[0]));
  throw std::runtime_error("unknown theory operator " + t.name);
}

} // namespace

bool eval_constraint(const Term& t) {
  Term v = eval_ground(t);
  return v.kind == Term::Kind::BoolLit && v.b;
}

std::optional<std::size_t> verify_step(const Ctrs& c, const Term& from, const Term& to) {
  for (std::size_t i = 0; i < c.rules.size(); ++i) {
    const CtrsRule& r = c.rules[i];
    Binding b;
    if (!match_extend(r.lhs, from, b)) continue;
    if (!match_extend(r.rhs, to, b)) continue;
    Term cons = apply_binding(r.constraint, b);
    if (!is_ground(cons)) continue;
    try {
      if (eval_constraint(cons)) return i;
    } catch (const std::runtime_error&) {
      continue;
    }
  }
  return std::nullopt;
}

SimReport simulate_run(const AnalysisContext& ctx, const CGraph& g, const Ctrs& c,
                       const RunResult& run) {
  SimReport rep;
  TraceResult tr = trace_concrete(ctx, g, run);
  if (!tr.ok) {
    rep.error = tr.error;
    return rep;
  }
  rep.m = run.steps;

  auto node_sym = [](int i) { return "f_" + std::to_string(i); };
  auto ground_args = [&](const JvmState& s) { return tst(ctx, lift_concrete(s)); };

  Term cur = Term::app(node_sym(g.entry), ground_args(run.trace[0]));
  std::size_t transitions = run.trace.size() - 1;

  for (std::size_t i = 0; i < tr.step_edges.size(); ++i) {
    int count = 0;
    for (int ei : tr.step_edges[i]) {
      const CEdge& e = g.edges[ei];
      Term next;
      if (e.kind == EdgeKind::Eval) {
        const AbstractState& tgt = g.nodes[e.to].state;
        if (tgt.kind == AbstractState::Kind::Failed)
          next = Term::app("f_fail", {});
        else if (i < transitions)
          next = Term::app(node_sym(e.to), ground_args(run.trace[i + 1]));
        else
          next = Term::app("f_fail", {});
      } else {
        next = Term::app(node_sym(e.to), cur.args);
      }
      auto rule = verify_step(c, cur, next);
      if (!rule) {
        rep.error = "no rule rewrites " + render_term(cur) + " to " + render_term(next) +
                    " (step " + std::to_string(i) + ")";
        return rep;
      }
      std::ostringstream line;
      line << render_term(cur) << " -> " << render_term(next) << "  ; rule " << *rule;
      rep.lines.push_back(line.str());
      cur = std::move(next);
      ++count;
    }
    rep.counts.push_back(count);
    rep.L += count;
    rep.K = std::max(rep.K, count);
  }
  rep.ok = true;
  return rep;
}

Pool default_pool(const Ctrs& c) {
  Pool p;
  for (int z = -2; z <= 2; ++z) p.ints.push_back(Term::int_lit(z));
  p.bools.push_back(Term::bool_lit(true));
  p.bools.push_back(Term::bool_lit(false));

  std::vector<Term> by_depth = {Term::null_sym()};
  p.univs = by_depth;
  for (int depth = 1; depth <= 2; ++depth) {
    std::vector<Term> next;
    for (const auto& sym : c.sig) {
      if (sym.defined || sym.name == "null") continue;
      std::vector<std::size_t> idx(sym.arity, 0);
      std::vector<Term> args(sym.arity, Term::null_sym());
      // every argument ranges over shallower universe terms plus scalars
      std::vector<Term> choices = by_depth;
      for (const auto& z : p.ints) choices.push_back(z);
      for (const auto& b : p.bools) choices.push_back(b);
      if (sym.arity == 0) continue;
      bool done = false;
      while (!done) {
        for (int i = 0; i < sym.arity; ++i) args[i] = choices[idx[i]];
        next.push_back(Term::app(sym.name, args));
        int i = sym.arity - 1;
        while (i >= 0 && ++idx[i] == choices.size()) idx[i--] = 0;
        if (i < 0) done = true;
      }
    }
    for (auto& t : next) p.univs.push_back(t);
    by_depth.insert(by_depth.end(), next.begin(), next.end());
  }
  return p;
}

namespace {

struct DeriveEngine {
  const Ctrs& c;
  const Pool& pool;
  long long fuel;
  std::uint64_t budget;
  DeriveReport rep;

  const std::vector<Term>& pool_for(Sort s) const {
    switch (s) {
      case Sort::Int: return pool.ints;
      case Sort::Bool: return pool.bools;
      case Sort::Univ: return pool.univs;
    }
    return pool.univs;
  }

  void instantiate(const std::vector<std::pair<std::string, Sort>>& free, std::size_t k,
                   Binding& b, const CtrsRule& r, std::vector<Term>& out) {
    if (k == free.size()) {
      Term cons = apply_binding(r.constraint, b);
      try {
        if (eval_constraint(cons)) out.push_back(apply_binding(r.rhs, b));
      } catch (const std::runtime_error&) {
      }
      return;
    }
    for (const Term& cand : pool_for(free[k].second)) {
      b[free[k].first] = cand;
      instantiate(free, k + 1, b, r, out);
    }
    b.erase(free[k].first);
  }

  std::vector<Term> successors(const Term& t) {
    std::vector<Term> out;
    for (const auto& r : c.rules) {
      Binding b;
      if (!match_extend(r.lhs, t, b)) continue;
      std::set<std::pair<std::string, Sort>> vars;
      collect_vars(r.rhs, vars);
      collect_vars(r.constraint, vars);
      std::vector<std::pair<std::string, Sort>> free;
      for (const auto& v : vars)
        if (!b.count(v.first)) free.push_back(v);
      instantiate(free, 0, b, r, out);
    }
    return out;
  }

  void dfs(const Term& t, long long depth) {
    rep.longest = std::max(rep.longest, depth);
    if (depth >= fuel) {
      rep.exhausted = true;
      return;
    }
    if (rep.visited >= budget) {
      rep.exhausted = true;
      return;
    }
    ++rep.visited;
    auto succ = successors(t);
    rep.max_branching = std::max(rep.max_branching, static_cast<int>(succ.size()));
    for (const auto& s : succ) dfs(s, depth + 1);
  }
};

} // namespace

DeriveReport derive(const Ctrs& c, const Term& start, long long fuel, const Pool& pool,
                    std::uint64_t visit_budget) {
  DeriveEngine eng{c, pool, fuel, visit_budget, {}};
  eng.dfs(start, 0);
  return eng.rep;
}

} // namespace jbc
