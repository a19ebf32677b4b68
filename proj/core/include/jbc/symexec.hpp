#pragma once

#include "jbc/absdomain.hpp"
#include "jbc/absstate.hpp"
#include "jbc/term.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace jbc {

// A state needs refining when the next instruction inspects a value the
// state leaves open: a branch on a boolean variable, a field access or call
// on a class variable, or a heap write or address comparison whose operands
// might alias.
struct Refinement {
  enum class Kind { Boolean, ClassInstance, Unshare } kind = Kind::Boolean;
  std::uint32_t addr = 0;     // ClassInstance
  std::uint32_t a = 0, b = 0; // Unshare
};

std::optional<Refinement> needs_refinement(const AnalysisContext& ctx, const AbstractState& s);

// Substitutes the boolean variable on top of the stack globally: true case
// first, then false.
std::vector<AbstractState> refine_boolean(const AbstractState& s);

// One successor per subclass of a's class bound, in declaration order, each
// an instance with fresh field values; the null case comes last. Each
// successor is reduced.
std::vector<AbstractState> refine_class_instance(const AnalysisContext& ctx,
                                                 const AbstractState& s, std::uint32_t a);

struct UnshareResult {
  AbstractState annotated;
  std::optional<AbstractState> merged; // absent when merging fails
};

UnshareResult refine_unshare(const AnalysisContext& ctx, const AbstractState& s, std::uint32_t a,
                             std::uint32_t b);

// Dispatch on the refinement kind; annotated case precedes merged.
std::vector<AbstractState> apply_refinement(const AnalysisContext& ctx, const AbstractState& s,
                                            const Refinement& r);

struct SymStep {
  enum class Kind { Step, Halt, Fail } kind = Kind::Step;
  AbstractState next; // Halt: the halt pseudo-state; Fail: a failed state
  std::optional<Term> constraint;
  std::optional<std::uint32_t> putfield_addr; // receiver of a heap write
};

// One abstract transition. The state must not need refinement.
SymStep symbolic_step(const AnalysisContext& ctx, const AbstractState& s);

} // namespace jbc
