#include "jbc/heapprops.hpp"

#include <deque>

namespace jbc {

TypeReachability::TypeReachability(const Program& p) : prog_(p) {
  // one field step from any subclass of c, then close transitively
  auto step = [&](const std::string& c) {
    std::set<std::string> out;
    for (const auto& sub : p.subclasses_of(c))
      for (const auto& slot : p.field_table(sub))
        if (p.is_class_type(slot.type) && slot.type != "Object") out.insert(slot.type);
    return out;
  };
  std::vector<std::string> names;
  for (const auto& c : p.classes) names.push_back(c.name);
  for (const auto& n : names) reach_[n] = step(n);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& n : names) {
      std::set<std::string> add;
      for (const auto& m : reach_[n])
        for (const auto& x : reach_[m])
          if (!reach_[n].count(x)) add.insert(x);
      if (!add.empty()) {
        reach_[n].insert(add.begin(), add.end());
        changed = true;
      }
    }
  }
}

bool TypeReachability::can_contain(const std::string& cls, const std::string& bcls) const {
  auto it = reach_.find(cls);
  if (it == reach_.end()) return false;
  for (const auto& t : it->second)
    if (prog_.is_subclass(t, bcls) || prog_.is_subclass(bcls, t)) return true;
  return false;
}

bool TypeReachability::on_cycle(const std::string& cls) const {
  auto it = reach_.find(cls);
  if (it == reach_.end()) return false;
  for (const auto& t : it->second)
    if (prog_.is_subclass(t, cls) || prog_.is_subclass(cls, t)) return true;
  return false;
}

bool tag_disjoint(const AnalysisContext& ctx, const AbstractState& s, std::uint32_t a,
                  std::uint32_t b) {
  auto ta = s.tags.find(a);
  auto tb = s.tags.find(b);
  if (ta == s.tags.end() || tb == s.tags.end()) return false;
  for (auto [i, j] : ctx.disjoint_regions) {
    std::uint32_t bi = 1u << i, bj = 1u << j;
    if (((ta->second & bi) && (tb->second & bj)) || ((ta->second & bj) && (tb->second & bi)))
      return true;
  }
  return false;
}

bool may_alias(const AnalysisContext& ctx, const AbstractState& s, std::uint32_t a,
               std::uint32_t b) {
  if (a == b) return true;
  if (s.annotated(a, b)) return false;
  return unify_merge(ctx, s, a, b, true).has_value();
}

namespace {

// addresses reachable from a through instance fields, including a
std::set<std::uint32_t> structural_reach(const AbstractState& s, std::uint32_t a) {
  std::set<std::uint32_t> seen{a};
  std::deque<std::uint32_t> work{a};
  while (!work.empty()) {
    std::uint32_t x = work.front();
    work.pop_front();
    auto it = s.heap.find(x);
    if (it == s.heap.end()) continue;
    for (const auto& v : it->second.fields)
      if (const Addr* p = std::get_if<Addr>(&v))
        if (seen.insert(p->id).second) work.push_back(p->id);
  }
  return seen;
}

} // namespace

bool may_reach(const AnalysisContext& ctx, const AbstractState& s, std::uint32_t a,
               std::uint32_t b) {
  auto reach = structural_reach(s, a);
  if (reach.count(b)) return true;
  TypeReachability tr(*ctx.prog);
  for (std::uint32_t c : reach) {
    const AbsObject& co = s.heap.at(c);
    if (co.is_instance) continue;
    // the region behind a class variable: the target may sit inside it
    if (may_alias(ctx, s, c, b)) return true;
    if (!tr.can_contain(co.cls, s.heap.at(b).cls)) continue;
    if (tag_disjoint(ctx, s, c, b)) continue;
    // a route into c's region ending at b would close a cycle through b
    // when b already reaches c; acyclicity marks rule that out
    if (structural_reach(s, b).count(c) && (s.flags.count(b) || s.flags.count(c))) continue;
    return true;
  }
  return false;
}

bool maybe_cyclic(const AnalysisContext& ctx, const AbstractState& s, std::uint32_t a) {
  auto reach = structural_reach(s, a);
  for (std::uint32_t x : reach) {
    auto it = s.heap.find(x);
    if (it == s.heap.end() || !it->second.is_instance) continue;
    for (const auto& v : it->second.fields)
      if (const Addr* p = std::get_if<Addr>(&v))
        if (reach.count(p->id) && structural_reach(s, p->id).count(x)) return true;
  }
  if (s.flags.count(a)) return false; // covered by an acyclicity assumption
  TypeReachability tr(*ctx.prog);
  for (std::uint32_t c : reach) {
    const AbsObject& co = s.heap.at(c);
    if (!co.is_instance && tr.on_cycle(co.cls)) return true;
  }
  return false;
}

} // namespace jbc
