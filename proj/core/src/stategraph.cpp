#include "jbc/stategraph.hpp"

#include <map>
#include <sstream>

namespace jbc {

namespace {

struct Builder {
  const Program& p;
  const AbstractState& s;
  StateGraph g;
  std::map<std::uint32_t, int> addr_node;

  int value_node(const AbsValue& v) {
    if (const Addr* a = std::get_if<Addr>(&v)) return addr_node_for(a->id);
    SGNode n;
    if (std::holds_alternative<Unit>(v)) n.label = "unit";
    else if (std::holds_alternative<Null>(v)) n.label = "null";
    else if (const bool* b = std::get_if<bool>(&v)) n.label = *b ? "true" : "false";
    else if (const Int* z = std::get_if<Int>(&v)) {
      n.label = z->str();
      n.weight = *z >= 0 ? *z : Int(-*z);
    } else if (const IntVar* iv = std::get_if<IntVar>(&v)) n.label = "i" + std::to_string(iv->id);
    else n.label = "b" + std::to_string(std::get<BoolVar>(v).id);
    g.nodes.push_back(std::move(n));
    return static_cast<int>(g.nodes.size()) - 1;
  }

  int addr_node_for(std::uint32_t a) {
    auto it = addr_node.find(a);
    if (it != addr_node.end()) return it->second;
    const AbsObject& obj = s.heap.at(a);
    SGNode n;
    n.label = obj.is_instance ? obj.cls : obj.cls + "?";
    int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back(std::move(n));
    addr_node[a] = id;
    if (obj.is_instance) {
      auto table = p.field_table(obj.cls);
      for (std::size_t i = 0; i < obj.fields.size(); ++i) {
        int child = value_node(obj.fields[i]);
        g.nodes[id].succ.push_back(child);
        g.nodes[id].edge_labels.push_back(i < table.size() ? table[i].owner + "." + table[i].name
                                                           : "?");
      }
    }
    return id;
  }
};

// Weighted simple-path sum from node v; nodes on the current path are not
// revisited.
Int path_sum(const StateGraph& g, int v, std::vector<char>& onpath) {
  Int total = g.nodes[v].weight;
  onpath[v] = 1;
  for (int w : g.nodes[v].succ)
    if (!onpath[w]) total += path_sum(g, w, onpath);
  onpath[v] = 0;
  return total;
}

} // namespace

StateGraph build_state_graph(const Program& p, const AbstractState& s) {
  Builder b{p, s, {}, {}};
  int slot = 0;
  for_each_root(s, [&](const AbsValue& v) {
    SGNode idx;
    idx.label = "slot" + std::to_string(slot++);
    idx.weight = 0;
    int id = static_cast<int>(b.g.nodes.size());
    b.g.nodes.push_back(std::move(idx));
    b.g.roots.push_back(id);
    int child = b.value_node(v);
    b.g.nodes[id].succ.push_back(child);
    b.g.nodes[id].edge_labels.push_back("");
  });
  return b.g;
}

Int graph_size(const StateGraph& g) {
  Int total = 1; // the state node itself
  std::vector<char> onpath(g.nodes.size(), 0);
  for (int r : g.roots) total += path_sum(g, r, onpath);
  return total;
}

Int abs_size(const Program& p, const AbstractState& s) {
  if (s.kind != AbstractState::Kind::Triple) return 1;
  return graph_size(build_state_graph(p, s));
}

Int state_size(const Program& p, const JvmState& s) {
  return abs_size(p, lift_concrete(s));
}

std::string render_state_graph(const StateGraph& g) {
  std::ostringstream out;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    out << "n" << i << " [" << g.nodes[i].label << ", w=" << g.nodes[i].weight.str() << "]";
    for (std::size_t j = 0; j < g.nodes[i].succ.size(); ++j) {
      out << (j ? ", " : " -> ") << "n" << g.nodes[i].succ[j];
      if (!g.nodes[i].edge_labels[j].empty()) out << "(" << g.nodes[i].edge_labels[j] << ")";
    }
    out << "\n";
  }
  return out.str();
}

} // namespace jbc
