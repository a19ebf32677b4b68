#include "jbc/absdomain.hpp"

#include "jbc/heapprops.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <set>

namespace jbc {

AbstractState beta(const JvmState& c) {
  AbstractState s = lift_concrete(c);
  auto addrs = s.live_addrs();
  for (std::size_t i = 0; i < addrs.size(); ++i)
    for (std::size_t j = i + 1; j < addrs.size(); ++j) s.annotate(addrs[i], addrs[j]);
  return s;
}

namespace {

bool frames_compatible(const AbstractState& a, const AbstractState& b) {
  if (a.frames.size() != b.frames.size()) return false;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    const AbsFrame& x = a.frames[i];
    const AbsFrame& y = b.frames[i];
    if (x.cls != y.cls || x.method != y.method || x.pc != y.pc) return false;
    if (x.stack.size() != y.stack.size() || x.regs.size() != y.regs.size()) return false;
  }
  return true;
}

std::vector<std::pair<AbsValue, AbsValue>> paired_roots(const AbstractState& a,
                                                        const AbstractState& b) {
  std::vector<AbsValue> ra, rb;
  for_each_root(a, [&](const AbsValue& v) { ra.push_back(v); });
  for_each_root(b, [&](const AbsValue& v) { rb.push_back(v); });
  std::vector<std::pair<AbsValue, AbsValue>> out;
  for (std::size_t i = 0; i < ra.size(); ++i) out.emplace_back(ra[i], rb[i]);
  return out;
}

} // namespace

std::optional<Morphism> instance_of(const AnalysisContext& ctx, const AbstractState& inst,
                                    const AbstractState& abs) {
  const Program& p = *ctx.prog;
  if (abs.kind == AbstractState::Kind::Top) return Morphism{};
  if (inst.kind == AbstractState::Kind::Bot) return Morphism{};
  if (inst.kind == AbstractState::Kind::Top || abs.kind == AbstractState::Kind::Bot)
    return std::nullopt;
  if (inst.kind == AbstractState::Kind::Failed || abs.kind == AbstractState::Kind::Failed) {
    if (inst.kind == abs.kind && inst.fail_reason == abs.fail_reason) return Morphism{};
    return std::nullopt;
  }
  if (!frames_compatible(inst, abs)) return std::nullopt;

  Morphism m;
  std::deque<std::pair<AbsValue, AbsValue>> work; // (abs side, inst side)

  auto set_image = [&](std::uint32_t a, const AbsValue& img) -> bool {
    auto it = m.addr_image.find(a);
    if (it != m.addr_image.end()) return it->second == img;
    m.addr_image.emplace(a, img);
    return true;
  };
  auto bind = [&](std::map<std::uint32_t, AbsValue>& table, std::uint32_t id,
                  const AbsValue& v) -> bool {
    auto it = table.find(id);
    if (it != table.end()) return it->second == v;
    table.emplace(id, v);
    return true;
  };

  // One requirement: the inst value v must specialize the abs value w.
  std::function<bool(const AbsValue&, const AbsValue&)> relate =
      [&](const AbsValue& w, const AbsValue& v) -> bool {
    if (const Addr* aw = std::get_if<Addr>(&w)) {
      const AbsObject& wo = abs.heap.at(aw->id);
      if (wo.is_instance) {
        const Addr* av = std::get_if<Addr>(&v);
        if (!av) return false;
        const AbsObject& vo = inst.heap.at(av->id);
        if (!vo.is_instance || vo.cls != wo.cls) return false;
        auto it = m.addr_image.find(aw->id);
        if (it != m.addr_image.end()) return it->second == v;
        m.addr_image.emplace(aw->id, v);
        for (std::size_t i = 0; i < wo.fields.size(); ++i)
          work.emplace_back(wo.fields[i], vo.fields[i]);
        return true;
      }
      // class variable: any object of a subclass, or the literals it erases
      if (const Addr* av = std::get_if<Addr>(&v)) {
        const AbsObject& vo = inst.heap.at(av->id);
        if (!p.is_subclass(vo.cls, wo.cls)) return false;
        return set_image(aw->id, v);
      }
      if (std::holds_alternative<Null>(v) || std::holds_alternative<Unit>(v))
        return set_image(aw->id, v);
      return false;
    }
    if (const IntVar* iw = std::get_if<IntVar>(&w)) {
      if (!std::holds_alternative<Int>(v) && !std::holds_alternative<IntVar>(v)) return false;
      return bind(m.int_var_binding, iw->id, v);
    }
    if (const BoolVar* bw = std::get_if<BoolVar>(&w)) {
      if (!std::holds_alternative<bool>(v) && !std::holds_alternative<BoolVar>(v)) return false;
      return bind(m.bool_var_binding, bw->id, v);
    }
    if (std::holds_alternative<Null>(w))
      return std::holds_alternative<Null>(v) || std::holds_alternative<Unit>(v);
    return v == w;
  };

  for (auto& [vi, va] : paired_roots(inst, abs)) work.emplace_back(va, vi);
  while (!work.empty()) {
    auto [w, v] = work.front();
    work.pop_front();
    if (!relate(w, v)) return std::nullopt;
  }

  // every annotated pair must land on distinct, equally annotated addresses;
  // pairs touching an erased literal hold vacuously
  for (const auto& [a, b] : abs.iu) {
    auto ia = m.addr_image.find(a);
    auto ib = m.addr_image.find(b);
    if (ia == m.addr_image.end() || ib == m.addr_image.end()) continue; // unreachable pair
    const Addr* xa = std::get_if<Addr>(&ia->second);
    const Addr* xb = std::get_if<Addr>(&ib->second);
    if (!xa || !xb) continue;
    if (xa->id == xb->id) return std::nullopt;
    if (!inst.annotated(xa->id, xb->id)) return std::nullopt;
  }
  return m;
}

bool equivalent(const AnalysisContext& ctx, const AbstractState& a, const AbstractState& b) {
  return instance_of(ctx, a, b).has_value() && instance_of(ctx, b, a).has_value();
}

bool gamma_member(const AnalysisContext& ctx, const JvmState& c, const AbstractState& t) {
  if (t.kind == AbstractState::Kind::Top) return true;
  if (t.kind != AbstractState::Kind::Triple) return false;
  return instance_of(ctx, beta(c), t).has_value();
}

// ---------------------------------------------------------------------------
// join

namespace {

struct Clash {};        // incompatible values with no common abstraction
struct RootClash {};    // ... at a root slot: the join is Top
struct Demote {
  std::pair<AbsValue, AbsValue> pair; // enclosing object pair to retry as class variable
};

struct Joiner {
  const AnalysisContext& ctx;
  const AbstractState& s;
  const AbstractState& t;
  const std::set<std::pair<AbsValue, AbsValue>>& demoted;

  AbstractState r;
  std::map<std::pair<AbsValue, AbsValue>, AbsValue> memo;
  // result addr -> source addr pair, for annotation transfer
  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> addr_pairs;

  static bool int_like(const AbsValue& v) {
    return std::holds_alternative<Int>(v) || std::holds_alternative<IntVar>(v);
  }
  static bool bool_like(const AbsValue& v) {
    return std::holds_alternative<bool>(v) || std::holds_alternative<BoolVar>(v);
  }
  static bool null_or_unit(const AbsValue& v) {
    return std::holds_alternative<Null>(v) || std::holds_alternative<Unit>(v);
  }

  std::uint32_t cls_tags(const AbstractState& st, std::uint32_t a) {
    auto it = st.tags.find(a);
    return it == st.tags.end() ? 0u : it->second;
  }

  AbsValue merge(const AbsValue& sv, const AbsValue& tv, bool at_root) {
    auto key = std::make_pair(sv, tv);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    const Addr* sa = std::get_if<Addr>(&sv);
    const Addr* ta = std::get_if<Addr>(&tv);
    if (sa && ta) return merge_addrs(*sa, *ta, key);

    AbsValue out;
    if (sv == tv) {
      out = sv;
    } else if (int_like(sv) && int_like(tv)) {
      out = r.fresh_int_var();
    } else if (bool_like(sv) && bool_like(tv)) {
      out = r.fresh_bool_var();
    } else if (null_or_unit(sv) && null_or_unit(tv)) {
      out = Null{};
    } else if (null_or_unit(sv) && int_like(tv)) {
      if (std::holds_alternative<Null>(sv)) throw_clash(at_root);
      out = r.fresh_int_var();
    } else if (null_or_unit(tv) && int_like(sv)) {
      if (std::holds_alternative<Null>(tv)) throw_clash(at_root);
      out = r.fresh_int_var();
    } else if (null_or_unit(sv) && bool_like(tv)) {
      if (std::holds_alternative<Null>(sv)) throw_clash(at_root);
      out = r.fresh_bool_var();
    } else if (null_or_unit(tv) && bool_like(sv)) {
      if (std::holds_alternative<Null>(tv)) throw_clash(at_root);
      out = r.fresh_bool_var();
    } else if (null_or_unit(sv) && ta) {
      out = lift_one_side(t, *ta, key);
    } else if (null_or_unit(tv) && sa) {
      out = lift_one_side(s, *sa, key);
    } else {
      throw_clash(at_root);
    }
    memo.emplace(key, out);
    return out;
  }

  [[noreturn]] void throw_clash(bool at_root) {
    if (at_root) throw RootClash{};
    throw Clash{};
  }

  // null or unit against an address: a class variable of the address's class
  AbsValue lift_one_side(const AbstractState& side, Addr a,
                         const std::pair<AbsValue, AbsValue>& key) {
    const AbsObject& obj = side.heap.at(a.id);
    std::uint32_t ra = r.fresh_addr();
    r.heap.emplace(ra, AbsObject{false, obj.cls, {}});
    std::uint32_t tg = cls_tags(side, a.id); // the literal side constrains nothing
    if (tg) r.tags[ra] = tg;
    if (side.flags.count(a.id)) r.flags.insert(ra);
    AbsValue out = Addr{ra};
    memo.emplace(key, out);
    return out;
  }

  AbsValue merge_addrs(Addr sa, Addr ta, const std::pair<AbsValue, AbsValue>& key) {
    const AbsObject& so = s.heap.at(sa.id);
    const AbsObject& to = t.heap.at(ta.id);
    std::uint32_t ra = r.fresh_addr();
    AbsValue out = Addr{ra};
    addr_pairs.emplace_back(sa.id, ta.id, ra);

    std::uint32_t tg = cls_tags(s, sa.id) & cls_tags(t, ta.id);
    if (tg) r.tags[ra] = tg;
    if (s.flags.count(sa.id) && t.flags.count(ta.id)) r.flags.insert(ra);

    bool as_instance = so.is_instance && to.is_instance && so.cls == to.cls &&
                       !demoted.count(key);
    if (!as_instance) {
      r.heap.emplace(ra, AbsObject{false, ctx.prog->lub_class(so.cls, to.cls), {}});
      memo.emplace(key, out);
      return out;
    }
    r.heap.emplace(ra, AbsObject{true, so.cls, {}});
    memo.emplace(key, out); // before the fields: cycles must close on ra
    std::vector<AbsValue> fields;
    for (std::size_t i = 0; i < so.fields.size(); ++i) {
      try {
        fields.push_back(merge(so.fields[i], to.fields[i], false));
      } catch (const Clash&) {
        throw Demote{key}; // retry with this object pair as a class variable
      }
    }
    r.heap.at(ra).fields = std::move(fields);
    return out;
  }

  AbstractState build() {
    r = AbstractState{};
    r.kind = AbstractState::Kind::Triple;
    // kept variables retain their ids; fresh ones must not collide
    r.next_var = std::max(s.next_var, t.next_var);
    memo.clear();
    addr_pairs.clear();
    for (const auto& f : s.frames) {
      AbsFrame rf;
      rf.cls = f.cls;
      rf.method = f.method;
      rf.pc = f.pc;
      rf.stack.resize(f.stack.size());
      rf.regs.resize(f.regs.size());
      r.frames.push_back(std::move(rf));
    }
    // discovery order: root slots in translation order, then fields depth
    // first inside merge_addrs
    std::vector<std::pair<AbsValue, AbsValue>> roots = paired_roots(s, t);
    std::vector<AbsValue> merged;
    merged.reserve(roots.size());
    for (auto& [sv, tv] : roots) merged.push_back(merge(sv, tv, true));
    std::size_t k = 0;
    for_each_root_slot(r, [&](AbsValue& slot) { slot = merged[k++]; });

    for (std::size_t i = 0; i < addr_pairs.size(); ++i)
      for (std::size_t j = i + 1; j < addr_pairs.size(); ++j) {
        auto [s1, t1, r1] = addr_pairs[i];
        auto [s2, t2, r2] = addr_pairs[j];
        if (s1 != s2 && t1 != t2 && s.annotated(s1, s2) && t.annotated(t1, t2))
          r.annotate(r1, r2);
      }
    return r;
  }
};

} // namespace

AbstractState join_states(const AnalysisContext& ctx, const AbstractState& s,
                          const AbstractState& t) {
  using K = AbstractState::Kind;
  if (s.kind == K::Bot) return t;
  if (t.kind == K::Bot) return s;
  if (s.kind == K::Top || t.kind == K::Top) return AbstractState::top();
  if (s.kind == K::Failed || t.kind == K::Failed) {
    if (s.kind == K::Failed && t.kind == K::Failed && s.fail_reason == t.fail_reason) return s;
    return AbstractState::top();
  }
  if (!frames_compatible(s, t)) return AbstractState::top();

  std::set<std::pair<AbsValue, AbsValue>> demoted;
  while (true) {
    Joiner j{ctx, s, t, demoted, {}, {}, {}};
    try {
      return reduce(ctx, j.build());
    } catch (const RootClash&) {
      return AbstractState::top();
    } catch (const Demote& d) {
      demoted.insert(d.pair);
    }
  }
}

// ---------------------------------------------------------------------------
// unify_merge

namespace {

struct UnifyFail {};

struct Unifier {
  const AnalysisContext& ctx;
  const AbstractState& s;

  std::map<std::uint32_t, std::uint32_t> parent;
  std::map<std::uint32_t, AbsObject> content;
  std::map<std::uint32_t, char> special; // 'n' null, 'u' unit
  std::map<std::uint32_t, AbsValue> var_subst;
  std::deque<std::pair<std::uint32_t, std::uint32_t>> queue;

  std::uint32_t find(std::uint32_t a) {
    auto it = parent.find(a);
    if (it == parent.end() || it->second == a) return a;
    std::uint32_t r = find(it->second);
    it->second = r;
    return r;
  }

  AbsValue resolve(AbsValue v) {
    for (int guard = 0; guard < 1000; ++guard) {
      if (const Addr* a = std::get_if<Addr>(&v)) {
        std::uint32_t r = find(a->id);
        auto sp = special.find(r);
        if (sp != special.end()) return sp->second == 'n' ? AbsValue(Null{}) : AbsValue(Unit{});
        return Addr{r};
      }
      if (const IntVar* iv = std::get_if<IntVar>(&v)) {
        auto it = var_subst.find(iv->id);
        if (it == var_subst.end()) return v;
        v = it->second;
        continue;
      }
      if (const BoolVar* bv = std::get_if<BoolVar>(&v)) {
        auto it = var_subst.find(bv->id);
        if (it == var_subst.end()) return v;
        v = it->second;
        continue;
      }
      return v;
    }
    throw UnifyFail{}; // substitution cycle; cannot happen with fresh ids
  }

  AbsValue merge_value(const AbsValue& x0, const AbsValue& y0) {
    AbsValue x = resolve(x0);
    AbsValue y = resolve(y0);
    if (x == y) return x;

    const Addr* xa = std::get_if<Addr>(&x);
    const Addr* ya = std::get_if<Addr>(&y);
    if (xa && ya) {
      queue.emplace_back(xa->id, ya->id);
      return Addr{std::min(find(xa->id), find(ya->id))};
    }
    // address against a literal the class variable could erase to
    if (xa || ya) {
      std::uint32_t a = find(xa ? xa->id : ya->id);
      const AbsValue& other = xa ? y : x;
      if (std::holds_alternative<Null>(other)) {
        if (content.at(a).is_instance) throw UnifyFail{};
        special[a] = 'n';
        return Null{};
      }
      if (std::holds_alternative<Unit>(other)) {
        if (content.at(a).is_instance) throw UnifyFail{};
        special[a] = 'u';
        return Unit{};
      }
      throw UnifyFail{};
    }

    const IntVar* xi = std::get_if<IntVar>(&x);
    const IntVar* yi = std::get_if<IntVar>(&y);
    const BoolVar* xb = std::get_if<BoolVar>(&x);
    const BoolVar* yb = std::get_if<BoolVar>(&y);

    if (std::holds_alternative<Int>(x) && yi) {
      var_subst[yi->id] = x;
      return x;
    }
    if (std::holds_alternative<Int>(y) && xi) {
      var_subst[xi->id] = y;
      return y;
    }
    if (xi && yi) {
      var_subst[yi->id] = x;
      return x;
    }
    if (std::holds_alternative<bool>(x) && yb) {
      var_subst[yb->id] = x;
      return x;
    }
    if (std::holds_alternative<bool>(y) && xb) {
      var_subst[xb->id] = y;
      return y;
    }
    if (xb && yb) {
      var_subst[yb->id] = x;
      return x;
    }
    // unit swallows null and unbound variables
    bool xnu = std::holds_alternative<Null>(x) || std::holds_alternative<Unit>(x);
    bool ynu = std::holds_alternative<Null>(y) || std::holds_alternative<Unit>(y);
    if (xnu && ynu) return Unit{};
    if (xnu && (yi || yb)) {
      var_subst[yi ? yi->id : yb->id] = Unit{};
      return Unit{};
    }
    if (ynu && (xi || xb)) {
      var_subst[xi ? xi->id : xb->id] = Unit{};
      return Unit{};
    }
    if ((xi && yb) || (xb && yi)) {
      var_subst[xi ? xi->id : xb->id] = Unit{};
      var_subst[yi ? yi->id : yb->id] = Unit{};
      return Unit{};
    }
    throw UnifyFail{};
  }

  void process(std::uint32_t p0, std::uint32_t q0) {
    std::uint32_t a = find(p0), b = find(q0);
    if (a == b) return;
    char sa = special.count(a) ? special.at(a) : 0;
    char sb = special.count(b) ? special.at(b) : 0;
    const AbsObject& ca = content.at(a);
    const AbsObject& cb = content.at(b);

    AbsObject merged;
    char msp = 0;
    if (sa || sb) {
      if (sa && sb) {
        msp = (sa == 'u' || sb == 'u') ? 'u' : 'n';
      } else {
        const AbsObject& other = sa ? cb : ca;
        if (other.is_instance) throw UnifyFail{};
        msp = sa ? sa : sb;
      }
      merged = AbsObject{false, ctx.prog->lub_class(ca.cls, cb.cls), {}};
    } else if (!ca.is_instance && !cb.is_instance) {
      if (ctx.prog->is_subclass(ca.cls, cb.cls)) merged = ca;
      else if (ctx.prog->is_subclass(cb.cls, ca.cls)) merged = cb;
      else {
        // incomparable bounds: only the erased null inhabits both
        merged = AbsObject{false, ctx.prog->lub_class(ca.cls, cb.cls), {}};
        msp = 'n';
      }
    } else if (!ca.is_instance || !cb.is_instance) {
      const AbsObject& cv = ca.is_instance ? cb : ca;
      const AbsObject& in = ca.is_instance ? ca : cb;
      if (!ctx.prog->is_subclass(in.cls, cv.cls)) throw UnifyFail{};
      merged = in;
    } else {
      if (ca.cls != cb.cls) throw UnifyFail{};
      merged = AbsObject{true, ca.cls, {}};
      for (std::size_t i = 0; i < ca.fields.size(); ++i)
        merged.fields.push_back(merge_value(ca.fields[i], cb.fields[i]));
    }

    std::uint32_t rep = std::min(a, b);
    std::uint32_t dead = std::max(a, b);
    parent[dead] = rep;
    parent[rep] = rep;
    content[rep] = std::move(merged);
    content.erase(dead);
    special.erase(a);
    special.erase(b);
    if (msp) special[rep] = msp;
  }

  std::optional<AbstractState> run(std::uint32_t p, std::uint32_t q, bool use_flags) {
    for (const auto& [a, obj] : s.heap) {
      parent[a] = a;
      content[a] = obj;
    }
    try {
      queue.emplace_back(p, q);
      while (!queue.empty()) {
        auto [a, b] = queue.front();
        queue.pop_front();
        process(a, b);
      }

      AbstractState out;
      out.kind = AbstractState::Kind::Triple;
      out.next_addr = s.next_addr;
      out.next_var = s.next_var;

      auto rewrite = [&](const AbsValue& v) { return resolve(v); };

      for (const auto& f : s.frames) {
        AbsFrame rf;
        rf.cls = f.cls;
        rf.method = f.method;
        rf.pc = f.pc;
        for (const auto& v : f.stack) rf.stack.push_back(rewrite(v));
        for (const auto& v : f.regs) rf.regs.push_back(rewrite(v));
        out.frames.push_back(std::move(rf));
      }
      for (const auto& [a, obj] : content) {
        if (special.count(a)) continue;
        AbsObject ro = obj;
        for (auto& v : ro.fields) v = rewrite(v);
        out.heap.emplace(a, std::move(ro));
      }
      for (const auto& [x, y] : s.iu) {
        if (special.count(find(x)) || special.count(find(y))) continue;
        std::uint32_t rx = find(x), ry = find(y);
        if (rx == ry) return std::nullopt; // asserted distinct, merged equal
        out.iu.insert({std::min(rx, ry), std::max(rx, ry)});
      }
      for (const auto& [a, tg] : s.tags) {
        std::uint32_t ra = find(a);
        if (special.count(ra) || !out.heap.count(ra)) continue;
        out.tags[ra] |= tg;
      }
      for (std::uint32_t a : s.flags) {
        std::uint32_t ra = find(a);
        if (!special.count(ra) && out.heap.count(ra)) out.flags.insert(ra);
      }
      out.prune_unreachable();

      if (use_flags) {
        // reject results that close a structural cycle through a flag
        for (std::uint32_t fa : out.flags)
          if (on_cycle(out, fa)) return std::nullopt;
      }
      return out;
    } catch (const UnifyFail&) {
      return std::nullopt;
    }
  }

  static bool on_cycle(const AbstractState& st, std::uint32_t from) {
    std::set<std::uint32_t> seen;
    std::deque<std::uint32_t> work{from};
    bool first = true;
    while (!work.empty()) {
      std::uint32_t a = work.front();
      work.pop_front();
      auto it = st.heap.find(a);
      if (it == st.heap.end()) continue;
      for (const auto& v : it->second.fields) {
        if (const Addr* x = std::get_if<Addr>(&v)) {
          if (x->id == from) return true;
          if (seen.insert(x->id).second) work.push_back(x->id);
        }
      }
      (void)first;
      first = false;
    }
    return false;
  }
};

} // namespace

std::optional<AbstractState> unify_merge(const AnalysisContext& ctx, const AbstractState& s,
                                         std::uint32_t p, std::uint32_t q, bool use_flags) {
  if (s.kind != AbstractState::Kind::Triple) return std::nullopt;
  if (!s.heap.count(p) || !s.heap.count(q)) return std::nullopt;
  if (p == q) return s;
  Unifier u{ctx, s, {}, {}, {}, {}, {}};
  return u.run(p, q, use_flags);
}

AbstractState reduce(const AnalysisContext& ctx, AbstractState s) {
  if (s.kind != AbstractState::Kind::Triple) return s;
  bool changed = true;
  while (changed) {
    changed = false;
    auto addrs = s.live_addrs();
    for (std::size_t i = 0; i < addrs.size(); ++i)
      for (std::size_t j = i + 1; j < addrs.size(); ++j) {
        std::uint32_t a = addrs[i], b = addrs[j];
        if (s.annotated(a, b)) continue;
        if (tag_disjoint(ctx, s, a, b) || !unify_merge(ctx, s, a, b, false)) {
          s.annotate(a, b);
          changed = true;
        }
      }
  }
  return s;
}

} // namespace jbc
