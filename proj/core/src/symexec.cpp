#include "jbc/symexec.hpp"

#include "jbc/heapprops.hpp"

#include <cassert>
#include <stdexcept>

namespace jbc {

namespace {

const Instruction& current_instruction(const Program& p, const AbstractState& s) {
  const AbsFrame& f = s.frames.back();
  auto mr = p.resolve_method(f.cls, f.method);
  if (!mr) throw std::logic_error("no method " + f.cls + "." + f.method);
  return mr->method->body.at(f.pc);
}

bool is_class_var(const AbstractState& s, const AbsValue& v) {
  const Addr* a = std::get_if<Addr>(&v);
  return a && !s.heap.at(a->id).is_instance;
}

} // namespace

std::optional<Refinement> needs_refinement(const AnalysisContext& ctx, const AbstractState& s) {
  if (s.kind != AbstractState::Kind::Triple) return std::nullopt;
  if (is_abs_halt_state(*ctx.prog, s)) return std::nullopt;
  const AbsFrame& f = s.frames.back();
  const Instruction& ins = current_instruction(*ctx.prog, s);
  auto top_at = [&](std::size_t back) { return f.stack[f.stack.size() - 1 - back]; };

  switch (ins.op) {
    case Op::IfFalse:
      if (std::holds_alternative<BoolVar>(top_at(0)))
        return Refinement{Refinement::Kind::Boolean, 0, 0, 0};
      return std::nullopt;
    case Op::Getfield:
    case Op::Checkcast:
      if (is_class_var(s, top_at(0)))
        return Refinement{Refinement::Kind::ClassInstance, std::get<Addr>(top_at(0)).id, 0, 0};
      return std::nullopt;
    case Op::Invoke: {
      const AbsValue& recv = top_at(ins.n);
      if (is_class_var(s, recv))
        return Refinement{Refinement::Kind::ClassInstance, std::get<Addr>(recv).id, 0, 0};
      return std::nullopt;
    }
    case Op::Putfield: {
      const AbsValue& recv = top_at(1);
      const Addr* a = std::get_if<Addr>(&recv);
      if (!a) return std::nullopt;
      if (!s.heap.at(a->id).is_instance)
        return Refinement{Refinement::Kind::ClassInstance, a->id, 0, 0};
      // a heap write must not silently update an aliased object
      for (std::uint32_t b : s.live_addrs()) {
        if (b == a->id || s.annotated(a->id, b)) continue;
        if (may_alias(ctx, s, a->id, b))
          return Refinement{Refinement::Kind::Unshare, 0, a->id, b};
      }
      return std::nullopt;
    }
    case Op::CmpEq:
    case Op::CmpNeq: {
      const AbsValue& v1 = top_at(0);
      const AbsValue& v2 = top_at(1);
      const Addr* a1 = std::get_if<Addr>(&v1);
      const Addr* a2 = std::get_if<Addr>(&v2);
      if (a1 && a2) {
        if (a1->id != a2->id && !s.annotated(a1->id, a2->id) &&
            may_alias(ctx, s, a1->id, a2->id))
          return Refinement{Refinement::Kind::Unshare, 0, a2->id, a1->id};
        return std::nullopt;
      }
      if (a1 && !s.heap.at(a1->id).is_instance && std::holds_alternative<Null>(v2))
        return Refinement{Refinement::Kind::ClassInstance, a1->id, 0, 0};
      if (a2 && !s.heap.at(a2->id).is_instance && std::holds_alternative<Null>(v1))
        return Refinement{Refinement::Kind::ClassInstance, a2->id, 0, 0};
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

std::vector<AbstractState> refine_boolean(const AbstractState& s) {
  const AbsFrame& f = s.frames.back();
  const BoolVar bv = std::get<BoolVar>(f.stack.back());
  std::vector<AbstractState> out;
  for (bool val : {true, false}) {
    AbstractState t = s;
    auto sub = [&](AbsValue& v) {
      if (const BoolVar* b = std::get_if<BoolVar>(&v))
        if (b->id == bv.id) v = val;
    };
    for_each_root_slot(t, sub);
    for (auto& [_, obj] : t.heap)
      for (auto& v : obj.fields) sub(v);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<AbstractState> refine_class_instance(const AnalysisContext& ctx,
                                                 const AbstractState& s, std::uint32_t a) {
  const Program& p = *ctx.prog;
  const AbsObject& obj = s.heap.at(a);
  assert(!obj.is_instance);
  std::vector<AbstractState> out;
  for (const auto& d : p.subclasses_of(obj.cls)) {
    AbstractState t = s;
    AbsObject inst;
    inst.is_instance = true;
    inst.cls = d;
    for (const auto& slot : p.field_table(d)) {
      if (slot.type == "int") {
        inst.fields.push_back(t.fresh_int_var());
      } else if (slot.type == "bool") {
        inst.fields.push_back(t.fresh_bool_var());
      } else if (slot.type == "unit") {
        inst.fields.push_back(Unit{});
      } else {
        std::uint32_t fa = t.fresh_addr();
        t.heap.emplace(fa, AbsObject{false, slot.type, {}});
        // fresh structure sits inside the refined object's region
        if (auto it = t.tags.find(a); it != t.tags.end()) t.tags[fa] = it->second;
        if (t.flags.count(a)) t.flags.insert(fa);
        inst.fields.push_back(Addr{fa});
      }
    }
    t.heap.at(a) = std::move(inst);
    out.push_back(reduce(ctx, std::move(t)));
  }
  // the null case: the class variable erased to nothing
  AbstractState t = s;
  t.substitute_addr(a, Null{});
  t.prune_unreachable();
  out.push_back(reduce(ctx, std::move(t)));
  return out;
}

UnshareResult refine_unshare(const AnalysisContext& ctx, const AbstractState& s, std::uint32_t a,
                             std::uint32_t b) {
  UnshareResult out{s, std::nullopt};
  out.annotated.annotate(a, b);
  out.annotated = reduce(ctx, std::move(out.annotated));
  if (auto merged = unify_merge(ctx, s, a, b, false))
    out.merged = reduce(ctx, std::move(*merged));
  return out;
}

std::vector<AbstractState> apply_refinement(const AnalysisContext& ctx, const AbstractState& s,
                                            const Refinement& r) {
  switch (r.kind) {
    case Refinement::Kind::Boolean: return refine_boolean(s);
    case Refinement::Kind::ClassInstance: return refine_class_instance(ctx, s, r.addr);
    case Refinement::Kind::Unshare: {
      UnshareResult u = refine_unshare(ctx, s, r.a, r.b);
      std::vector<AbstractState> out{std::move(u.annotated)};
      if (u.merged) out.push_back(std::move(*u.merged));
      return out;
    }
  }
  return {};
}

namespace {

Term tval_scalar(const AbsValue& v) {
  if (std::holds_alternative<Unit>(v) || std::holds_alternative<Null>(v))
    return Term::null_sym();
  if (const bool* b = std::get_if<bool>(&v)) return Term::bool_lit(*b);
  if (const Int* z = std::get_if<Int>(&v)) return Term::int_lit(*z);
  if (const IntVar* i = std::get_if<IntVar>(&v))
    return Term::var("i" + std::to_string(i->id), Sort::Int);
  if (const BoolVar* b = std::get_if<BoolVar>(&v))
    return Term::var("b" + std::to_string(b->id), Sort::Bool);
  throw std::logic_error("address in a scalar constraint");
}

Term define_bool(const Term& var, const Term& phi) {
  Term pos = Term::app("/\\", {phi, Term::app("=", {var, Term::bool_lit(true)})});
  Term neg = Term::app("/\\", {Term::app("not", {phi}),
                               Term::app("=", {var, Term::bool_lit(false)})});
  return Term::app("\\/", {pos, neg});
}

} // namespace

SymStep symbolic_step(const AnalysisContext& ctx, const AbstractState& s) {
  const Program& p = *ctx.prog;
  assert(!needs_refinement(ctx, s));
  AbstractState t = s;
  AbsFrame& f = t.frames.back();
  auto mr = p.resolve_method(f.cls, f.method);
  const Method& m = *mr->method;
  const Instruction& ins = m.body.at(f.pc);

  SymStep out;
  out.kind = SymStep::Kind::Step;

  auto pop = [&]() {
    AbsValue v = f.stack.back();
    f.stack.pop_back();
    return v;
  };
  auto lift = [](const Value& v) {
    return std::visit([](auto x) { return AbsValue(x); }, v);
  };

  switch (ins.op) {
    case Op::Load:
      f.stack.push_back(f.regs[ins.n]);
      f.pc += 1;
      break;
    case Op::Store:
      f.regs[ins.n] = pop();
      f.pc += 1;
      break;
    case Op::Push:
      f.stack.push_back(lift(ins.lit));
      f.pc += 1;
      break;
    case Op::Pop:
      pop();
      f.pc += 1;
      break;
    case Op::IAdd:
    case Op::ISub: {
      AbsValue v1 = pop();
      AbsValue v2 = pop();
      const Int* z1 = std::get_if<Int>(&v1);
      const Int* z2 = std::get_if<Int>(&v2);
      if (z1 && z2) {
        f.stack.push_back(ins.op == Op::IAdd ? Int(*z2 + *z1) : Int(*z2 - *z1));
      } else {
        AbsValue rv = t.fresh_int_var();
        f.stack.push_back(rv);
        const char* op = ins.op == Op::IAdd ? "+" : "-";
        out.constraint = Term::app(
            "=", {Term::app(op, {tval_scalar(v2), tval_scalar(v1)}), tval_scalar(rv)});
      }
      f.pc += 1;
      break;
    }
    case Op::CmpGeq: {
      AbsValue v1 = pop();
      AbsValue v2 = pop();
      const Int* z1 = std::get_if<Int>(&v1);
      const Int* z2 = std::get_if<Int>(&v2);
      if (z1 && z2) {
        f.stack.push_back(*z2 >= *z1);
      } else {
        AbsValue rv = t.fresh_bool_var();
        f.stack.push_back(rv);
        out.constraint =
            define_bool(tval_scalar(rv), Term::app(">=", {tval_scalar(v2), tval_scalar(v1)}));
      }
      f.pc += 1;
      break;
    }
    case Op::CmpEq:
    case Op::CmpNeq: {
      AbsValue v1 = pop();
      AbsValue v2 = pop();
      bool neq = ins.op == Op::CmpNeq;
      const Addr* a1 = std::get_if<Addr>(&v1);
      const Addr* a2 = std::get_if<Addr>(&v2);
      auto push_known = [&](bool eq) { f.stack.push_back(neq ? !eq : eq); };
      if (a1 && a2) {
        // refinement left only settled pairs behind
        push_known(a1->id == a2->id);
      } else if (a1 || a2) {
        const AbsValue& other = a1 ? v2 : v1;
        const Addr* a = a1 ? a1 : a2;
        if (std::holds_alternative<Null>(other) || std::holds_alternative<Unit>(other)) {
          // instances are never null; class variables were refined away
          (void)a;
          push_known(false);
        } else {
          throw std::logic_error("address compared with a non-reference");
        }
      } else if (std::holds_alternative<Int>(v1) && std::holds_alternative<Int>(v2)) {
        push_known(std::get<Int>(v2) == std::get<Int>(v1));
      } else if (std::holds_alternative<bool>(v1) && std::holds_alternative<bool>(v2)) {
        push_known(std::get<bool>(v2) == std::get<bool>(v1));
      } else if ((std::holds_alternative<Null>(v1) || std::holds_alternative<Unit>(v1)) &&
                 (std::holds_alternative<Null>(v2) || std::holds_alternative<Unit>(v2))) {
        push_known(v1 == v2);
      } else {
        AbsValue rv = t.fresh_bool_var();
        f.stack.push_back(rv);
        const char* op = neq ? "!=" : "=";
        out.constraint =
            define_bool(tval_scalar(rv), Term::app(op, {tval_scalar(v2), tval_scalar(v1)}));
      }
      f.pc += 1;
      break;
    }
    case Op::And:
    case Op::Or: {
      AbsValue v1 = pop();
      AbsValue v2 = pop();
      const bool* b1 = std::get_if<bool>(&v1);
      const bool* b2 = std::get_if<bool>(&v2);
      if (b1 && b2) {
        f.stack.push_back(ins.op == Op::And ? (*b2 && *b1) : (*b2 || *b1));
      } else {
        AbsValue rv = t.fresh_bool_var();
        f.stack.push_back(rv);
        const char* op = ins.op == Op::And ? "/\\" : "\\/";
        Term phi = Term::app(op, {Term::app("=", {tval_scalar(v2), Term::bool_lit(true)}),
                                  Term::app("=", {tval_scalar(v1), Term::bool_lit(true)})});
        out.constraint = define_bool(tval_scalar(rv), phi);
      }
      f.pc += 1;
      break;
    }
    case Op::Not: {
      AbsValue v = pop();
      if (const bool* b = std::get_if<bool>(&v)) {
        f.stack.push_back(!*b);
      } else {
        AbsValue rv = t.fresh_bool_var();
        f.stack.push_back(rv);
        out.constraint = define_bool(
            tval_scalar(rv), Term::app("=", {tval_scalar(v), Term::bool_lit(false)}));
      }
      f.pc += 1;
      break;
    }
    case Op::Goto:
      f.pc += ins.n;
      break;
    case Op::IfFalse: {
      AbsValue v = pop();
      bool b = std::get<bool>(v); // refinement settled it
      f.pc += b ? 1 : ins.n;
      break;
    }
    case Op::New: {
      AbsObject obj;
      obj.is_instance = true;
      obj.cls = ins.name;
      for (const auto& slot : p.field_table(ins.name))
        obj.fields.push_back(std::visit([](auto x) { return AbsValue(x); },
                                        default_field_value(p, slot.type)));
      std::uint32_t a = t.fresh_addr();
      // fresh allocations are distinct from everything already live
      for (std::uint32_t b : t.live_addrs()) t.annotate(a, b);
      t.heap.emplace(a, std::move(obj));
      f.stack.push_back(Addr{a});
      f.pc += 1;
      break;
    }
    case Op::Getfield: {
      AbsValue r = pop();
      if (std::holds_alternative<Null>(r)) {
        out.kind = SymStep::Kind::Fail;
        out.next = AbstractState::failed(FailReason::NullDeref);
        return out;
      }
      Addr a = std::get<Addr>(r);
      const AbsObject& obj = t.heap.at(a.id);
      auto owner = p.field_owner(ins.cls, ins.name);
      auto idx = p.field_index(obj.cls, *owner, ins.name);
      f.stack.push_back(obj.fields.at(*idx));
      f.pc += 1;
      break;
    }
    case Op::Putfield: {
      AbsValue v = pop();
      AbsValue r = pop();
      if (std::holds_alternative<Null>(r)) {
        out.kind = SymStep::Kind::Fail;
        out.next = AbstractState::failed(FailReason::NullDeref);
        return out;
      }
      Addr a = std::get<Addr>(r);
      AbsObject& obj = t.heap.at(a.id);
      auto owner = p.field_owner(ins.cls, ins.name);
      auto idx = p.field_index(obj.cls, *owner, ins.name);
      obj.fields.at(*idx) = v;
      out.putfield_addr = a.id;
      f.pc += 1;
      break;
    }
    case Op::Checkcast: {
      const AbsValue& r = f.stack.back();
      bool ok = false;
      if (std::holds_alternative<Null>(r)) ok = true;
      else if (const Addr* a = std::get_if<Addr>(&r))
        ok = p.is_subclass(t.heap.at(a->id).cls, ins.name);
      if (!ok) {
        out.kind = SymStep::Kind::Fail;
        out.next = AbstractState::failed(FailReason::CastError);
        return out;
      }
      f.pc += 1;
      break;
    }
    case Op::Invoke: {
      int n = ins.n;
      AbsValue rv = f.stack[f.stack.size() - 1 - n];
      if (std::holds_alternative<Null>(rv)) {
        out.kind = SymStep::Kind::Fail;
        out.next = AbstractState::failed(FailReason::NullDeref);
        return out;
      }
      Addr a = std::get<Addr>(rv);
      const std::string& dyn = t.heap.at(a.id).cls; // an instance after refinement
      auto callee_ref = p.resolve_method(dyn, ins.name);
      if (!callee_ref) throw std::logic_error("unresolved call " + dyn + "." + ins.name);
      AbsFrame callee;
      callee.cls = callee_ref->cls->name;
      callee.method = ins.name;
      callee.pc = 0;
      callee.regs.push_back(rv);
      for (int i = 0; i < n; ++i) callee.regs.push_back(f.stack[f.stack.size() - n + i]);
      for (int i = 0; i < callee_ref->method->max_vars; ++i) callee.regs.push_back(Unit{});
      t.frames.push_back(std::move(callee));
      break;
    }
    case Op::Return: {
      AbsValue rv = pop();
      if (t.frames.size() == 1) {
        f.pc = static_cast<int>(m.body.size());
        f.stack.clear();
        f.stack.push_back(rv);
        f.regs.clear();
        t.prune_unreachable();
        out.kind = SymStep::Kind::Halt;
        out.next = std::move(t);
        return out;
      }
      std::size_t nparams = m.params.size();
      t.frames.pop_back();
      AbsFrame& caller = t.frames.back();
      for (std::size_t i = 0; i < nparams + 1; ++i) caller.stack.pop_back();
      caller.stack.push_back(rv);
      caller.pc += 1;
      break;
    }
  }

  t.prune_unreachable();
  out.next = std::move(t);
  return out;
}

} // namespace jbc
