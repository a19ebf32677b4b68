#pragma once

#include "jbc/cgraph.hpp"
#include "jbc/ctrs.hpp"
#include "jbc/term.hpp"
#include "jbc/vm.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace jbc {

using Binding = std::map<std::string, Term>;

// Syntactic matching, sorted and non-linear: int variables take integer
// literals, bool variables take boolean literals, universe variables take
// constructor terms. Repeated variables must match equal subjects.
std::optional<Binding> match_term(const Term& pattern, const Term& subject);
bool match_extend(const Term& pattern, const Term& subject, Binding& binding);

Term apply_binding(const Term& t, const Binding& binding);

// Evaluates a ground constraint instance.
bool eval_constraint(const Term& c);

// Is `from -> to` one root rewrite step? Rule variables missing from the
// left-hand side are bound by matching the right-hand side against `to`.
// Returns the rule index.
std::optional<std::size_t> verify_step(const Ctrs& ctrs, const Term& from, const Term& to);

struct SimReport {
  bool ok = false;
  std::string error;
  std::uint64_t m = 0;          // concrete steps
  long long L = 0;              // total rewrite steps
  int K = 0;                    // max rewrite steps backing one concrete step
  std::vector<int> counts;      // rewrite steps per concrete step
  std::vector<std::string> lines; // one rendered row per concrete step
};

// Replays a concrete run against the graph and checks that the induced term
// sequence rewrites step by step under the system.
SimReport simulate_run(const AnalysisContext& ctx, const CGraph& g, const Ctrs& ctrs,
                       const RunResult& run);

// Ground instantiation candidates for rule variables not bound by matching.
struct Pool {
  std::vector<Term> ints;
  std::vector<Term> bools;
  std::vector<Term> univs;
};

// Small integers, both booleans, and constructor terms over the system's
// constructors up to depth two.
Pool default_pool(const Ctrs& ctrs);

struct DeriveReport {
  long long longest = 0;
  bool exhausted = false; // some branch was cut by fuel
  int max_branching = 0;
  std::uint64_t visited = 0;
};

// Depth-first exploration of root rewriting from `start`, instantiating
// unbound rule variables from the pool, cutting every branch at `fuel` steps.
DeriveReport derive(const Ctrs& ctrs, const Term& start, long long fuel, const Pool& pool,
                    std::uint64_t visit_budget = 2000000);

} // namespace jbc
