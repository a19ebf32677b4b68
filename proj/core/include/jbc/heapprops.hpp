#pragma once

#include "jbc/absdomain.hpp"
#include "jbc/absstate.hpp"
#include "jbc/program.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace jbc {

// Class-level reachability: which classes can sit in fields reachable from an
// object whose dynamic class is a subclass of the given one.
class TypeReachability {
public:
  explicit TypeReachability(const Program& p);

  // Some type reachable from cls (in one or more field steps, or cls itself
  // after at least one step) relates to bcls by subtyping in either direction.
  bool can_contain(const std::string& cls, const std::string& bcls) const;

  // cls can reach a type comparable to cls itself: a class-level cycle.
  bool on_cycle(const std::string& cls) const;

private:
  const Program& prog_;
  std::map<std::string, std::set<std::string>> reach_; // one or more steps
};

// a and b lie in regions declared disjoint.
bool tag_disjoint(const AnalysisContext& ctx, const AbstractState& s, std::uint32_t a,
                  std::uint32_t b);

// Some state described by s has a and b equal.
bool may_alias(const AnalysisContext& ctx, const AbstractState& s, std::uint32_t a,
               std::uint32_t b);

// Some state described by s has a path from a to b.
bool may_reach(const AnalysisContext& ctx, const AbstractState& s, std::uint32_t a,
               std::uint32_t b);

// Some state described by s has a heap cycle through a.
bool maybe_cyclic(const AnalysisContext& ctx, const AbstractState& s, std::uint32_t a);

} // namespace jbc
