#include "jbc/vm.hpp"

#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

namespace jbc {

const char* fail_reason_name(FailReason r) {
  switch (r) {
    case FailReason::NullDeref: return "nullDeref";
    case FailReason::CastError: return "castError";
    case FailReason::FuelExhausted: return "fuelExhausted";
  }
  return "?";
}

void prune_heap(JvmState& s) {
  std::set<std::uint32_t> live;
  std::deque<std::uint32_t> work;
  auto root = [&](const Value& v) {
    if (const Addr* a = std::get_if<Addr>(&v))
      if (live.insert(a->id).second) work.push_back(a->id);
  };
  for (const auto& f : s.frames) {
    for (const auto& v : f.stack) root(v);
    for (const auto& v : f.regs) root(v);
  }
  while (!work.empty()) {
    std::uint32_t a = work.front();
    work.pop_front();
    auto it = s.heap.find(a);
    if (it == s.heap.end()) continue;
    for (const auto& v : it->second.fields) root(v);
  }
  for (auto it = s.heap.begin(); it != s.heap.end();)
    it = live.count(it->first) ? std::next(it) : s.heap.erase(it);
}

JvmState initial_state(const Program& p, const std::string& cls, const std::string& method,
                       const std::vector<Value>& args, std::map<std::uint32_t, HeapObj> heap,
                       std::uint32_t next_addr) {
  auto mr = p.resolve_method(cls, method);
  if (!mr) throw std::runtime_error("no method " + cls + "." + method);
  if (args.size() != mr->method->params.size() + 1)
    throw std::runtime_error(cls + "." + method + " takes " +
                             std::to_string(mr->method->params.size()) + " argument(s)");
  JvmState s;
  s.heap = std::move(heap);
  s.next_addr = next_addr;
  Frame f;
  f.cls = mr->cls->name;
  f.method = method;
  f.pc = 0;
  f.regs = args;
  for (int i = 0; i < mr->method->max_vars; ++i) f.regs.push_back(Unit{});
  s.frames.push_back(std::move(f));
  prune_heap(s);
  return s;
}

bool is_halt_state(const Program& p, const JvmState& s) {
  if (s.frames.size() != 1) return false;
  const Frame& f = s.frames[0];
  auto mr = p.resolve_method(f.cls, f.method);
  if (!mr) return false;
  return f.pc == static_cast<int>(mr->method->body.size()) && f.stack.size() == 1 &&
         f.regs.empty();
}

namespace {

const Method& method_of(const Program& p, const Frame& f) {
  auto mr = p.resolve_method(f.cls, f.method);
  if (!mr) throw std::runtime_error("no method " + f.cls + "." + f.method);
  return *mr->method;
}

StepResult fail(const JvmState& s, FailReason r) {
  StepResult out;
  out.kind = StepResult::Kind::Failed;
  out.state = s;
  out.reason = r;
  return out;
}

} // namespace

StepResult step(const Program& p, const JvmState& s) {
  JvmState t = s;
  Frame& f = t.frames.back();
  const Method& m = method_of(p, f);
  if (f.pc < 0 || f.pc >= static_cast<int>(m.body.size()))
    throw std::logic_error("pc out of range");
  const Instruction& ins = m.body[f.pc];

  auto pop = [&]() {
    Value v = f.stack.back();
    f.stack.pop_back();
    return v;
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
      f.stack.push_back(ins.lit);
      f.pc += 1;
      break;
    case Op::Pop:
      pop();
      f.pc += 1;
      break;
    case Op::IAdd:
    case Op::ISub: {
      Int v1 = std::get<Int>(pop());
      Int v2 = std::get<Int>(pop());
      f.stack.push_back(ins.op == Op::IAdd ? Int(v2 + v1) : Int(v2 - v1));
      f.pc += 1;
      break;
    }
    case Op::CmpGeq: {
      Int v1 = std::get<Int>(pop());
      Int v2 = std::get<Int>(pop());
      f.stack.push_back(v2 >= v1);
      f.pc += 1;
      break;
    }
    case Op::CmpEq:
    case Op::CmpNeq: {
      Value v1 = pop();
      Value v2 = pop();
      bool eq = v2 == v1;
      f.stack.push_back(ins.op == Op::CmpEq ? eq : !eq);
      f.pc += 1;
      break;
    }
    case Op::And:
    case Op::Or: {
      bool v1 = std::get<bool>(pop());
      bool v2 = std::get<bool>(pop());
      f.stack.push_back(ins.op == Op::And ? (v2 && v1) : (v2 || v1));
      f.pc += 1;
      break;
    }
    case Op::Not: {
      bool v = std::get<bool>(pop());
      f.stack.push_back(!v);
      f.pc += 1;
      break;
    }
    case Op::Goto:
      f.pc += ins.n;
      break;
    case Op::IfFalse: {
      bool v = std::get<bool>(pop());
      f.pc += v ? 1 : ins.n;
      break;
    }
    case Op::New: {
      HeapObj obj;
      obj.cls = ins.name;
      for (const auto& slot : p.field_table(ins.name))
        obj.fields.push_back(default_field_value(p, slot.type));
      std::uint32_t a = t.next_addr++;
      t.heap.emplace(a, std::move(obj));
      f.stack.push_back(Addr{a});
      f.pc += 1;
      break;
    }
    case Op::Getfield: {
      Value r = pop();
      if (std::holds_alternative<Null>(r)) return fail(s, FailReason::NullDeref);
      Addr a = std::get<Addr>(r);
      const HeapObj& obj = t.heap.at(a.id);
      auto owner = p.field_owner(ins.cls, ins.name);
      auto idx = p.field_index(obj.cls, *owner, ins.name);
      f.stack.push_back(obj.fields.at(*idx));
      f.pc += 1;
      break;
    }
    case Op::Putfield: {
      Value v = pop();
      Value r = pop();
      if (std::holds_alternative<Null>(r)) return fail(s, FailReason::NullDeref);
      Addr a = std::get<Addr>(r);
      HeapObj& obj = t.heap.at(a.id);
      auto owner = p.field_owner(ins.cls, ins.name);
      auto idx = p.field_index(obj.cls, *owner, ins.name);
      obj.fields.at(*idx) = v;
      f.pc += 1;
      break;
    }
    case Op::Checkcast: {
      const Value& r = f.stack.back(); // not popped
      if (std::holds_alternative<Null>(r)) {
        f.pc += 1;
        break;
      }
      if (const Addr* a = std::get_if<Addr>(&r)) {
        if (p.is_subclass(t.heap.at(a->id).cls, ins.name)) {
          f.pc += 1;
          break;
        }
      }
      return fail(s, FailReason::CastError);
    }
    case Op::Invoke: {
      int n = ins.n;
      Value rv = f.stack[f.stack.size() - 1 - n];
      if (std::holds_alternative<Null>(rv)) return fail(s, FailReason::NullDeref);
      Addr a = std::get<Addr>(rv);
      const std::string& dyn = t.heap.at(a.id).cls;
      auto mr = p.resolve_method(dyn, ins.name);
      if (!mr) throw std::logic_error("unresolved call " + dyn + "." + ins.name);
      Frame callee;
      callee.cls = mr->cls->name;
      callee.method = ins.name;
      callee.pc = 0;
      callee.regs.push_back(rv);
      for (int i = 0; i < n; ++i) callee.regs.push_back(f.stack[f.stack.size() - n + i]);
      for (int i = 0; i < mr->method->max_vars; ++i) callee.regs.push_back(Unit{});
      // the caller's stack is left untouched until the return
      t.frames.push_back(std::move(callee));
      break;
    }
    case Op::Return: {
      Value rv = pop();
      if (t.frames.size() == 1) {
        // halt: keep the frame as a marker one past the end, result on the stack
        f.pc = static_cast<int>(m.body.size());
        f.stack.clear();
        f.stack.push_back(rv);
        f.regs.clear();
        prune_heap(t);
        StepResult out;
        out.kind = StepResult::Kind::Halted;
        out.state = std::move(t);
        return out;
      }
      std::size_t nparams = m.params.size();
      t.frames.pop_back();
      Frame& caller = t.frames.back();
      for (std::size_t i = 0; i < nparams + 1; ++i) caller.stack.pop_back();
      caller.stack.push_back(rv);
      caller.pc += 1;
      break;
    }
  }

  StepResult out;
  out.kind = StepResult::Kind::Next;
  out.state = std::move(t);
  return out;
}

RunResult run(const Program& p, const JvmState& s0, std::uint64_t fuel, bool keep_trace) {
  RunResult out;
  JvmState cur = s0;
  if (keep_trace) out.trace.push_back(cur);
  for (std::uint64_t i = 0; i < fuel; ++i) {
    StepResult r = step(p, cur);
    if (r.kind == StepResult::Kind::Failed) {
      out.halted = false;
      out.reason = r.reason;
      return out;
    }
    out.steps += 1;
    cur = std::move(r.state);
    if (keep_trace) out.trace.push_back(cur);
    if (r.kind == StepResult::Kind::Halted) {
      out.halted = true;
      out.ret = cur.frames[0].stack[0];
      return out;
    }
  }
  out.halted = false;
  out.reason = FailReason::FuelExhausted;
  return out;
}

std::string render_jvm_state(const JvmState& s) {
  std::ostringstream out;
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    const Frame& f = s.frames[s.frames.size() - 1 - i];
    out << (i == 0 ? "frame " : "      ") << f.cls << "." << f.method << " pc=" << f.pc
        << " stack=[";
    for (std::size_t j = 0; j < f.stack.size(); ++j) {
      if (j) out << ", ";
      out << render_value(f.stack[j]);
    }
    out << "] regs=[";
    for (std::size_t j = 0; j < f.regs.size(); ++j) {
      if (j) out << ", ";
      out << render_value(f.regs[j]);
    }
    out << "]\n";
  }
  out << "heap:";
  if (s.heap.empty()) out << " (empty)";
  out << "\n";
  for (const auto& [a, obj] : s.heap) {
    out << "  #" << a << " = " << obj.cls << "{";
    for (std::size_t j = 0; j < obj.fields.size(); ++j) {
      if (j) out << ", ";
      out << render_value(obj.fields[j]);
    }
    out << "}\n";
  }
  return out.str();
}

} // namespace jbc
