#pragma once

#include "jbc/absdomain.hpp"
#include "jbc/symexec.hpp"
#include "jbc/term.hpp"
#include "jbc/vm.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace jbc {

enum class EdgeKind { Eval, Refine, Instance };

struct CEdge {
  int from = 0;
  int to = 0;
  EdgeKind kind = EdgeKind::Eval;
  std::optional<Term> constraint;
  std::optional<std::uint32_t> putfield_addr;
};

struct CNode {
  AbstractState state;
  bool widened = false;
};

struct CGraph {
  std::vector<CNode> nodes;
  std::vector<CEdge> edges;
  int entry = 0;

  std::vector<int> out_edges(int node) const;
  std::vector<int> in_edges(int node) const;
};

struct Assumption {
  enum class Kind { Acyclic, Unshared } kind = Kind::Acyclic;
  std::vector<std::string> roots; // "this" or parameter names
};

// "acyclic:this" or "unshared:this,ys".
Assumption parse_assumption(const std::string& text);

// Entry state of cls.method: the receiver is a fresh instance when
// this_nonnull is set and a class variable otherwise, class parameters are
// class variables, int and bool parameters are variables, locals are unit.
// Assumptions mark flags and regions (recorded in ctx), then the state is
// reduced.
AbstractState initial_abstract_state(AnalysisContext& ctx, const std::string& cls,
                                     const std::string& method,
                                     const std::vector<Assumption>& assumptions,
                                     bool this_nonnull);

// Checks concrete entry arguments against the assumptions: acyclic roots
// must not reach a heap cycle, unshared roots must have pairwise disjoint
// reachable sets. Returns an error message, or empty when fine.
std::string check_assumptions(const Program& p, const JvmState& s0,
                              const std::vector<Assumption>& assumptions);

struct BuildLimits {
  int max_nodes = 10000;
  long long max_depth = 100000;
};

struct BuildResult {
  CGraph graph;
  bool hit_limit = false;
  std::string limit_kind;
};

BuildResult build_graph(const AnalysisContext& ctx, const AbstractState& init,
                        const BuildLimits& limits = {});

// Replays a concrete run through the graph. For step i the walk takes any
// pending instance hops, resolves refinement fans by membership of the
// current concrete state, then crosses the one evaluation edge, whose target
// must describe the next concrete state.
struct TraceResult {
  bool ok = false;
  std::string error;
  std::vector<std::vector<int>> step_edges; // edge indices grouped per concrete step
};

TraceResult trace_concrete(const AnalysisContext& ctx, const CGraph& g, const RunResult& run);

std::string export_dot(const CGraph& g);
std::string dump_graph(const CGraph& g);

} // namespace jbc
