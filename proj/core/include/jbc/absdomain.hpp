#pragma once

#include "jbc/absstate.hpp"
#include "jbc/program.hpp"
#include "jbc/vm.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace jbc {

// Program plus the analysis-wide record of which region bits were declared
// pairwise disjoint by unsharing assumptions.
struct AnalysisContext {
  const Program* prog = nullptr;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> disjoint_regions;
};

// Witness that one state specializes another: where each of the abstraction's
// addresses lands (an address, or the literal a class variable collapsed to),
// and what each abstract variable is bound to. Bindings are consistent across
// occurrences.
struct Morphism {
  std::map<std::uint32_t, AbsValue> addr_image;        // abstraction addr -> Addr/Null/Unit
  std::map<std::uint32_t, AbsValue> int_var_binding;   // IntVar id -> Int or IntVar
  std::map<std::uint32_t, AbsValue> bool_var_binding;  // BoolVar id -> bool or BoolVar
};

// Embeds a concrete state: same shape, every address pair annotated.
AbstractState beta(const JvmState& s);

// Does abs describe inst? Returns the witness when it does.
std::optional<Morphism> instance_of(const AnalysisContext& ctx, const AbstractState& inst,
                                    const AbstractState& abs);

bool equivalent(const AnalysisContext& ctx, const AbstractState& a, const AbstractState& b);

bool gamma_member(const AnalysisContext& ctx, const JvmState& c, const AbstractState& t);

// Least upper bound, reduced. States whose frame shapes disagree join to Top.
AbstractState join_states(const AnalysisContext& ctx, const AbstractState& s,
                          const AbstractState& t);

// Merges addresses p and q into one object if some state could have them
// equal: the witness state, or nullopt if aliasing is impossible. With
// use_flags set, merges that close a heap cycle through a flagged address
// also fail.
std::optional<AbstractState> unify_merge(const AnalysisContext& ctx, const AbstractState& s,
                                         std::uint32_t p, std::uint32_t q, bool use_flags);

// Annotates every address pair that cannot alias (by disjoint regions or
// because merging fails), to a fixpoint. Flags are not consulted.
AbstractState reduce(const AnalysisContext& ctx, AbstractState s);

} // namespace jbc
