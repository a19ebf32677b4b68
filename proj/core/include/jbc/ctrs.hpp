#pragma once

#include "jbc/absdomain.hpp"
#include "jbc/cgraph.hpp"
#include "jbc/term.hpp"

#include <string>
#include <vector>

namespace jbc {

struct CtrsRule {
  Term lhs;
  Term rhs;
  Term constraint; // BoolLit(true) when absent
};

struct CtrsSym {
  std::string name;
  int arity = 0;
  bool defined = false; // defined symbols head rules; the rest construct data
};

struct Ctrs {
  std::vector<CtrsSym> sig;
  std::vector<CtrsRule> rules;
  std::vector<std::string> comments; // emitted as leading ';' lines
};

// Translation of one state into the argument tuple of its node symbol:
// stacks of all frames starting from the active one (bottom to top each),
// then registers in the same frame order. Integer and boolean variables
// become sorted variables, class variables become universe variables named
// after their address, known objects become constructor terms (shared
// acyclic objects duplicate), and addresses that may lie on a heap cycle
// become fresh variables per occurrence.
std::vector<Term> tst(const AnalysisContext& ctx, const AbstractState& s);

// Rule for one edge. Instance edges rewrite the source tuple to the target
// symbol; refinement edges use the refined tuple on both sides; evaluation
// edges carry the step constraint, and heap writes freshen the variables of
// class variables that may reach the written address.
CtrsRule corr_rule(const AnalysisContext& ctx, const CGraph& g, int edge_idx);

// One rule per edge, in edge order. Node symbols are f_<i> over compacted
// node indices; edges into failed and into top states rewrite to f_fail()
// and f_top().
Ctrs emit_ctrs(const AnalysisContext& ctx, const CGraph& g);

std::string render_ctrs(const Ctrs& c);

struct CtrsParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Ctrs parse_ctrs(const std::string& text);

} // namespace jbc
