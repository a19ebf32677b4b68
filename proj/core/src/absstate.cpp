#include "jbc/absstate.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace jbc {

AbstractState AbstractState::top() {
  AbstractState s;
  s.kind = Kind::Top;
  return s;
}

AbstractState AbstractState::bot() {
  AbstractState s;
  s.kind = Kind::Bot;
  return s;
}

AbstractState AbstractState::failed(FailReason r) {
  AbstractState s;
  s.kind = Kind::Failed;
  s.fail_reason = r;
  return s;
}

bool AbstractState::annotated(std::uint32_t a, std::uint32_t b) const {
  if (a == b) return false;
  return iu.count({std::min(a, b), std::max(a, b)}) > 0;
}

void AbstractState::annotate(std::uint32_t a, std::uint32_t b) {
  if (a == b) return;
  iu.insert({std::min(a, b), std::max(a, b)});
}

std::vector<std::uint32_t> AbstractState::live_addrs() const {
  std::vector<std::uint32_t> out;
  out.reserve(heap.size());
  for (const auto& [a, _] : heap) out.push_back(a);
  return out;
}

AbsValue AbstractState::fresh_int_var() { return IntVar{next_var++}; }
AbsValue AbstractState::fresh_bool_var() { return BoolVar{next_var++}; }
std::uint32_t AbstractState::fresh_addr() { return next_addr++; }

void AbstractState::substitute_addr(std::uint32_t a, const AbsValue& repl) {
  auto sub = [&](AbsValue& v) {
    if (const Addr* p = std::get_if<Addr>(&v))
      if (p->id == a) v = repl;
  };
  for (auto& f : frames) {
    for (auto& v : f.stack) sub(v);
    for (auto& v : f.regs) sub(v);
  }
  for (auto& [_, obj] : heap)
    for (auto& v : obj.fields) sub(v);
  heap.erase(a);
  for (auto it = iu.begin(); it != iu.end();)
    it = (it->first == a || it->second == a) ? iu.erase(it) : std::next(it);
  tags.erase(a);
  flags.erase(a);
}

void AbstractState::prune_unreachable() {
  std::set<std::uint32_t> live;
  std::deque<std::uint32_t> work;
  auto root = [&](const AbsValue& v) {
    if (const Addr* a = std::get_if<Addr>(&v))
      if (live.insert(a->id).second) work.push_back(a->id);
  };
  for (const auto& f : frames) {
    for (const auto& v : f.stack) root(v);
    for (const auto& v : f.regs) root(v);
  }
  while (!work.empty()) {
    std::uint32_t a = work.front();
    work.pop_front();
    auto it = heap.find(a);
    if (it == heap.end()) continue;
    for (const auto& v : it->second.fields) root(v);
  }
  for (auto it = heap.begin(); it != heap.end();)
    it = live.count(it->first) ? std::next(it) : heap.erase(it);
  for (auto it = iu.begin(); it != iu.end();)
    it = (!live.count(it->first) || !live.count(it->second)) ? iu.erase(it) : std::next(it);
  for (auto it = tags.begin(); it != tags.end();)
    it = !live.count(it->first) ? tags.erase(it) : std::next(it);
  for (auto it = flags.begin(); it != flags.end();)
    it = !live.count(*it) ? flags.erase(it) : std::next(it);
}

void for_each_root(const AbstractState& s, const std::function<void(const AbsValue&)>& fn) {
  for (auto it = s.frames.rbegin(); it != s.frames.rend(); ++it)
    for (const auto& v : it->stack) fn(v);
  for (auto it = s.frames.rbegin(); it != s.frames.rend(); ++it)
    for (const auto& v : it->regs) fn(v);
}

void for_each_root_slot(AbstractState& s, const std::function<void(AbsValue&)>& fn) {
  for (auto it = s.frames.rbegin(); it != s.frames.rend(); ++it)
    for (auto& v : it->stack) fn(v);
  for (auto it = s.frames.rbegin(); it != s.frames.rend(); ++it)
    for (auto& v : it->regs) fn(v);
}

AbstractState lift_concrete(const JvmState& c) {
  AbstractState s;
  s.kind = AbstractState::Kind::Triple;
  for (const auto& f : c.frames) {
    AbsFrame af;
    af.cls = f.cls;
    af.method = f.method;
    af.pc = f.pc;
    for (const auto& v : f.stack) af.stack.push_back(std::visit([](auto x) { return AbsValue(x); }, v));
    for (const auto& v : f.regs) af.regs.push_back(std::visit([](auto x) { return AbsValue(x); }, v));
    s.frames.push_back(std::move(af));
  }
  for (const auto& [a, obj] : c.heap) {
    AbsObject ao;
    ao.is_instance = true;
    ao.cls = obj.cls;
    for (const auto& v : obj.fields)
      ao.fields.push_back(std::visit([](auto x) { return AbsValue(x); }, v));
    s.heap.emplace(a, std::move(ao));
  }
  s.next_addr = c.next_addr;
  s.next_var = 1;
  return s;
}

bool is_abs_halt_state(const Program& p, const AbstractState& s) {
  if (s.kind != AbstractState::Kind::Triple || s.frames.size() != 1) return false;
  const AbsFrame& f = s.frames[0];
  auto mr = p.resolve_method(f.cls, f.method);
  if (!mr) return false;
  return f.pc == static_cast<int>(mr->method->body.size()) && f.stack.size() == 1 &&
         f.regs.empty();
}

std::string render_abs_value(const AbsValue& v) {
  if (std::holds_alternative<Unit>(v)) return "unit";
  if (std::holds_alternative<Null>(v)) return "null";
  if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const Int* z = std::get_if<Int>(&v)) return z->str();
  if (const Addr* a = std::get_if<Addr>(&v)) return "o" + std::to_string(a->id);
  if (const IntVar* i = std::get_if<IntVar>(&v)) return "i" + std::to_string(i->id);
  return "b" + std::to_string(std::get<BoolVar>(v).id);
}

std::string render_abstract_state(const AbstractState& s) {
  switch (s.kind) {
    case AbstractState::Kind::Top: return "TOP\n";
    case AbstractState::Kind::Bot: return "BOT\n";
    case AbstractState::Kind::Failed:
      return std::string("FAILED ") + fail_reason_name(s.fail_reason) + "\n";
    case AbstractState::Kind::Triple: break;
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    const AbsFrame& f = s.frames[s.frames.size() - 1 - i];
    out << (i == 0 ? "frame " : "      ") << f.cls << "." << f.method << " pc=" << f.pc
        << " stack=[";
    for (std::size_t j = 0; j < f.stack.size(); ++j) {
      if (j) out << ", ";
      out << render_abs_value(f.stack[j]);
    }
    out << "] regs=[";
    for (std::size_t j = 0; j < f.regs.size(); ++j) {
      if (j) out << ", ";
      out << render_abs_value(f.regs[j]);
    }
    out << "]\n";
  }
  out << "heap:";
  if (s.heap.empty()) out << " (empty)";
  out << "\n";
  for (const auto& [a, obj] : s.heap) {
    out << "  o" << a << " = ";
    if (!obj.is_instance) {
      out << obj.cls << "?";
    } else {
      out << obj.cls << "{";
      for (std::size_t j = 0; j < obj.fields.size(); ++j) {
        if (j) out << ", ";
        out << render_abs_value(obj.fields[j]);
      }
      out << "}";
    }
    if (auto it = s.tags.find(a); it != s.tags.end() && it->second)
      out << " tags=0x" << std::hex << it->second << std::dec;
    if (s.flags.count(a)) out << " acyclic";
    out << "\n";
  }
  if (!s.iu.empty()) {
    out << "distinct:";
    for (const auto& [a, b] : s.iu) out << " (o" << a << ",o" << b << ")";
    out << "\n";
  }
  return out.str();
}

} // namespace jbc
