#pragma once

#include "jbc/absstate.hpp"
#include "jbc/program.hpp"

#include <string>
#include <vector>

namespace jbc {

// Term-graph view of a state. Heap objects appear once per address; every
// other value gets a node per occurrence. Roots are index nodes naming the
// frame slots.
struct SGNode {
  std::string label;
  Int weight = 1; // |z| for integer nodes, 1 otherwise, 0 for index nodes
  std::vector<int> succ;
  std::vector<std::string> edge_labels;
};

struct StateGraph {
  std::vector<SGNode> nodes;
  std::vector<int> roots;
};

StateGraph build_state_graph(const Program& p, const AbstractState& s);

// Sum over all roots of the weights along every simple path from the root,
// plus one for the state itself.
Int graph_size(const StateGraph& g);

Int abs_size(const Program& p, const AbstractState& s);

std::string render_state_graph(const StateGraph& g);

} // namespace jbc
