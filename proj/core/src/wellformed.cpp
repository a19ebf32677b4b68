#include "jbc/wellformed.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>

namespace jbc {

namespace {

// Static type of a stack or register slot.
struct Ty {
  enum class K { Int, Bool, Unit, NullT, Cls, Uninit, Conflict };
  K k = K::Conflict;
  std::string cls;

  static Ty of(K k) { return Ty{k, ""}; }
  static Ty of_cls(std::string c) { return Ty{K::Cls, std::move(c)}; }

  bool operator==(const Ty& o) const { return k == o.k && cls == o.cls; }

  bool ref_like() const { return k == K::NullT || k == K::Cls; }
};

Ty merge_ty(const Program& p, const Ty& a, const Ty& b) {
  if (a.k == Ty::K::Uninit || b.k == Ty::K::Uninit) return Ty::of(Ty::K::Uninit);
  if (a == b) return a;
  if (a.k == Ty::K::NullT && b.k == Ty::K::Cls) return b;
  if (b.k == Ty::K::NullT && a.k == Ty::K::Cls) return a;
  if (a.k == Ty::K::Cls && b.k == Ty::K::Cls) return Ty::of_cls(p.lub_class(a.cls, b.cls));
  return Ty::of(Ty::K::Conflict);
}

std::string render_ty(const Ty& t) {
  switch (t.k) {
    case Ty::K::Int: return "int";
    case Ty::K::Bool: return "bool";
    case Ty::K::Unit: return "unit";
    case Ty::K::NullT: return "null";
    case Ty::K::Cls: return t.cls;
    case Ty::K::Uninit: return "<uninitialized>";
    case Ty::K::Conflict: return "<conflict>";
  }
  return "?";
}

Ty ty_of_type_name(const std::string& t) {
  if (t == "int") return Ty::of(Ty::K::Int);
  if (t == "bool") return Ty::of(Ty::K::Bool);
  if (t == "unit") return Ty::of(Ty::K::Unit);
  return Ty::of_cls(t);
}

bool assignable(const Program& p, const Ty& v, const std::string& type) {
  if (type == "int") return v.k == Ty::K::Int;
  if (type == "bool") return v.k == Ty::K::Bool;
  if (type == "unit") return v.k == Ty::K::Unit;
  if (v.k == Ty::K::NullT) return true;
  return v.k == Ty::K::Cls && p.is_subclass(v.cls, type);
}

struct Flow {
  std::vector<Ty> stack;
  std::vector<Ty> regs;
  bool operator==(const Flow& o) const { return stack == o.stack && regs == o.regs; }
};

bool valid_type_name(const Program& p, const std::string& t) {
  return t == "int" || t == "bool" || t == "unit" || p.is_class_type(t);
}

class MethodChecker {
public:
  MethodChecker(const Program& p, const ClassDecl& c, const Method& m, std::vector<Diag>& diags)
      : p_(p), c_(c), m_(m), diags_(diags) {}

  void check() {
    Flow entry;
    entry.regs.push_back(Ty::of_cls(c_.name));
    for (const auto& par : m_.params) entry.regs.push_back(ty_of_type_name(par.type));
    for (int i = 0; i < m_.max_vars; ++i) entry.regs.push_back(Ty::of(Ty::K::Uninit));

    in_.assign(m_.body.size(), std::nullopt);
    std::deque<int> work;
    in_[0] = entry;
    work.push_back(0);
    while (!work.empty()) {
      int pc = work.front();
      work.pop_front();
      Flow out = *in_[pc];
      std::vector<std::pair<int, Flow>> succs;
      transfer(pc, out, succs, nullptr);
      for (auto& [spc, sf] : succs) {
        if (spc < 0 || spc >= static_cast<int>(m_.body.size())) continue;
        if (!in_[spc]) {
          in_[spc] = sf;
          work.push_back(spc);
        } else {
          if (in_[spc]->stack.size() != sf.stack.size()) {
            if (height_mismatch_.insert(spc).second)
              diag(spc, "stack height differs between paths");
            continue;
          }
          Flow merged = merge_flow(*in_[spc], sf);
          if (!(merged == *in_[spc])) {
            in_[spc] = merged;
            work.push_back(spc);
          }
        }
      }
    }

    // report with the fixed entry states
    for (int pc = 0; pc < static_cast<int>(m_.body.size()); ++pc) {
      if (!in_[pc]) continue;
      Flow f = *in_[pc];
      std::vector<std::pair<int, Flow>> succs;
      transfer(pc, f, succs, &diags_);
      for (auto& [spc, sf] : succs) {
        if (spc == static_cast<int>(m_.body.size()))
          diag(pc, "control falls off the end");
        else if (spc < 0 || spc > static_cast<int>(m_.body.size()))
          diag(pc, "jump target " + std::to_string(spc) + " out of range");
      }
    }
  }

private:
  const Program& p_;
  const ClassDecl& c_;
  const Method& m_;
  std::vector<Diag>& diags_;
  std::vector<std::optional<Flow>> in_;
  std::set<int> height_mismatch_;

  void diag(int pc, const std::string& msg) { diags_.push_back({c_.name, m_.name, pc, msg}); }

  Flow merge_flow(const Flow& a, const Flow& b) {
    Flow out = a;
    if (a.stack.size() != b.stack.size()) {
      // height mismatch is reported by the second pass; keep the first
      return a;
    }
    for (std::size_t i = 0; i < out.stack.size(); ++i)
      out.stack[i] = merge_ty(p_, a.stack[i], b.stack[i]);
    for (std::size_t i = 0; i < out.regs.size(); ++i)
      out.regs[i] = merge_ty(p_, a.regs[i], b.regs[i]);
    return out;
  }

  // Applies one instruction to f; when report is set, emits diagnostics.
  void transfer(int pc, Flow f, std::vector<std::pair<int, Flow>>& succs,
                std::vector<Diag>* report) {
    const Instruction& ins = m_.body[pc];
    auto say = [&](const std::string& msg) {
      if (report) report->push_back({c_.name, m_.name, pc, msg});
    };
    auto pop = [&]() -> Ty {
      if (f.stack.empty()) {
        say("stack underflow");
        return Ty::of(Ty::K::Conflict);
      }
      Ty t = f.stack.back();
      f.stack.pop_back();
      return t;
    };
    auto push = [&](Ty t) {
      f.stack.push_back(std::move(t));
      if (static_cast<int>(f.stack.size()) > m_.max_stack) say("stack exceeds MaxStack");
    };
    auto want = [&](const Ty& t, Ty::K k, const char* what) {
      if (t.k != k) say(std::string(what) + " operand is " + render_ty(t));
    };
    auto next = [&](int delta) { succs.emplace_back(pc + delta, f); };

    switch (ins.op) {
      case Op::Load:
        if (ins.n < 0 || ins.n >= static_cast<int>(f.regs.size())) {
          say("register " + std::to_string(ins.n) + " out of range");
          push(Ty::of(Ty::K::Conflict));
        } else {
          if (f.regs[ins.n].k == Ty::K::Uninit)
            say("register " + std::to_string(ins.n) + " read before written");
          push(f.regs[ins.n]);
        }
        next(1);
        break;
      case Op::Store: {
        Ty v = pop();
        if (ins.n < 0 || ins.n >= static_cast<int>(f.regs.size()))
          say("register " + std::to_string(ins.n) + " out of range");
        else
          f.regs[ins.n] = v;
        next(1);
        break;
      }
      case Op::Push:
        if (std::holds_alternative<Unit>(ins.lit)) push(Ty::of(Ty::K::Unit));
        else if (std::holds_alternative<Null>(ins.lit)) push(Ty::of(Ty::K::NullT));
        else if (std::holds_alternative<bool>(ins.lit)) push(Ty::of(Ty::K::Bool));
        else push(Ty::of(Ty::K::Int));
        next(1);
        break;
      case Op::Pop:
        pop();
        next(1);
        break;
      case Op::IAdd:
      case Op::ISub: {
        Ty a = pop(), b = pop();
        want(a, Ty::K::Int, "arithmetic");
        want(b, Ty::K::Int, "arithmetic");
        push(Ty::of(Ty::K::Int));
        next(1);
        break;
      }
      case Op::CmpGeq: {
        Ty a = pop(), b = pop();
        want(a, Ty::K::Int, "comparison");
        want(b, Ty::K::Int, "comparison");
        push(Ty::of(Ty::K::Bool));
        next(1);
        break;
      }
      case Op::CmpEq:
      case Op::CmpNeq: {
        Ty a = pop(), b = pop();
        bool ok = (a.k == Ty::K::Int && b.k == Ty::K::Int) ||
                  (a.k == Ty::K::Bool && b.k == Ty::K::Bool) ||
                  (a.k == Ty::K::Unit && b.k == Ty::K::Unit) || (a.ref_like() && b.ref_like());
        if (!ok) say("incomparable operands " + render_ty(b) + " and " + render_ty(a));
        push(Ty::of(Ty::K::Bool));
        next(1);
        break;
      }
      case Op::And:
      case Op::Or: {
        Ty a = pop(), b = pop();
        want(a, Ty::K::Bool, "boolean");
        want(b, Ty::K::Bool, "boolean");
        push(Ty::of(Ty::K::Bool));
        next(1);
        break;
      }
      case Op::Not: {
        Ty a = pop();
        want(a, Ty::K::Bool, "boolean");
        push(Ty::of(Ty::K::Bool));
        next(1);
        break;
      }
      case Op::Goto:
        next(ins.n);
        break;
      case Op::IfFalse: {
        Ty a = pop();
        want(a, Ty::K::Bool, "branch");
        next(1);
        next(ins.n);
        break;
      }
      case Op::New:
        if (!p_.find_class(ins.name)) say("unknown class " + ins.name);
        push(Ty::of_cls(ins.name));
        next(1);
        break;
      case Op::Getfield: {
        Ty r = pop();
        auto owner = p_.field_owner(ins.cls, ins.name);
        if (!p_.find_class(ins.cls)) say("unknown class " + ins.cls);
        else if (!owner) say("no field " + ins.name + " in " + ins.cls);
        if (r.k == Ty::K::Cls && !p_.is_subclass(r.cls, ins.cls))
          say("receiver " + render_ty(r) + " is not a " + ins.cls);
        else if (!r.ref_like())
          say("field read from " + render_ty(r));
        if (owner) {
          const ClassDecl* oc = p_.find_class(*owner);
          for (const auto& fl : oc->fields)
            if (fl.name == ins.name) push(ty_of_type_name(fl.type));
        } else {
          push(Ty::of(Ty::K::Conflict));
        }
        next(1);
        break;
      }
      case Op::Putfield: {
        Ty v = pop();
        Ty r = pop();
        auto owner = p_.field_owner(ins.cls, ins.name);
        if (!p_.find_class(ins.cls)) say("unknown class " + ins.cls);
        else if (!owner) say("no field " + ins.name + " in " + ins.cls);
        if (r.k == Ty::K::Cls && !p_.is_subclass(r.cls, ins.cls))
          say("receiver " + render_ty(r) + " is not a " + ins.cls);
        else if (!r.ref_like())
          say("field write to " + render_ty(r));
        if (owner) {
          const ClassDecl* oc = p_.find_class(*owner);
          for (const auto& fl : oc->fields)
            if (fl.name == ins.name && !assignable(p_, v, fl.type))
              say("cannot store " + render_ty(v) + " into " + fl.type + " field " + ins.name);
        }
        next(1);
        break;
      }
      case Op::Checkcast: {
        if (f.stack.empty()) say("stack underflow");
        else if (!f.stack.back().ref_like()) say("cast of " + render_ty(f.stack.back()));
        if (!p_.find_class(ins.name)) say("unknown class " + ins.name);
        next(1);
        break;
      }
      case Op::Invoke: {
        int n = ins.n;
        if (static_cast<int>(f.stack.size()) < n + 1) {
          say("stack underflow at call");
          f.stack.clear();
          push(Ty::of(Ty::K::Conflict));
          next(1);
          break;
        }
        Ty recv = f.stack[f.stack.size() - 1 - n];
        std::vector<Ty> args(f.stack.end() - n, f.stack.end());
        if (recv.k == Ty::K::Cls) {
          auto mr = p_.resolve_method(recv.cls, ins.name);
          if (!mr) {
            say("no method " + ins.name + " on " + recv.cls);
            for (int i = 0; i < n + 1; ++i) f.stack.pop_back();
            push(Ty::of(Ty::K::Conflict));
          } else if (static_cast<int>(mr->method->params.size()) != n) {
            say("method " + ins.name + " takes " +
                std::to_string(mr->method->params.size()) + " argument(s)");
            for (int i = 0; i < n + 1; ++i) f.stack.pop_back();
            push(Ty::of(Ty::K::Conflict));
          } else {
            for (int i = 0; i < n; ++i)
              if (!assignable(p_, args[i], mr->method->params[i].type))
                say("argument " + std::to_string(i) + " is " + render_ty(args[i]) + ", wants " +
                    mr->method->params[i].type);
            for (int i = 0; i < n + 1; ++i) f.stack.pop_back();
            push(ty_of_type_name(mr->method->ret_type));
          }
        } else {
          if (!recv.ref_like()) say("call on " + render_ty(recv));
          // a statically null receiver always fails at run time
          for (int i = 0; i < n + 1; ++i) f.stack.pop_back();
          push(Ty::of(Ty::K::Conflict));
        }
        next(1);
        break;
      }
      case Op::Return: {
        Ty v = pop();
        if (!assignable(p_, v, m_.ret_type))
          say("returns " + render_ty(v) + ", declared " + m_.ret_type);
        break;
      }
    }
  }
};

// Conservative call edges: any method the name could dispatch to from any
// subclass of the static receiver class.
void check_recursion(const Program& p, std::vector<Diag>& diags) {
  using Node = std::pair<std::string, std::string>;
  std::map<Node, std::set<Node>> out;
  for (const auto& c : p.classes) {
    for (const auto& m : c.methods) {
      Node from{c.name, m.name};
      out[from];
      for (const auto& ins : m.body) {
        if (ins.op != Op::Invoke) continue;
        for (const auto& sub : p.classes) {
          auto mr = p.resolve_method(sub.name, ins.name);
          if (mr && static_cast<int>(mr->method->params.size()) == ins.n)
            out[from].insert({mr->cls->name, mr->method->name});
        }
      }
    }
  }
  std::map<Node, int> mark; // 0 new, 1 on stack, 2 done
  std::function<bool(const Node&)> dfs = [&](const Node& n) -> bool {
    mark[n] = 1;
    for (const auto& s : out[n]) {
      if (mark[s] == 1) return true;
      if (mark[s] == 0 && dfs(s)) return true;
    }
    mark[n] = 2;
    return false;
  };
  for (auto& [n, _] : out)
    if (mark[n] == 0 && dfs(n))
      diags.push_back({n.first, n.second, -1, "recursive call chain"});
}

} // namespace

std::string render_diag(const Diag& d) {
  std::string out = d.cls;
  if (!d.method.empty()) out += "." + d.method;
  if (d.pc >= 0) out += "@" + std::to_string(d.pc);
  return out + ": " + d.msg;
}

std::vector<Diag> check_wellformed(const Program& p) {
  std::vector<Diag> diags;

  for (const auto& c : p.classes) {
    if (c.super != "Object" && !p.find_class(c.super))
      diags.push_back({c.name, "", -1, "unknown superclass " + c.super});
    if (c.name == "Object")
      diags.push_back({c.name, "", -1, "Object cannot be declared"});
    // reject inheritance cycles before any chain walk below
    std::set<std::string> seen{c.name};
    std::string cur = c.super;
    while (cur != "Object" && p.find_class(cur)) {
      if (!seen.insert(cur).second) {
        diags.push_back({c.name, "", -1, "superclass cycle"});
        return diags;
      }
      cur = p.find_class(cur)->super;
    }
  }

  for (const auto& c : p.classes) {
    auto table = p.field_table(c.name);
    for (std::size_t i = 0; i < table.size(); ++i)
      for (std::size_t j = i + 1; j < table.size(); ++j)
        if (table[i].name == table[j].name)
          diags.push_back({c.name, "", -1, "field " + table[i].name + " declared twice"});
    for (const auto& f : c.fields)
      if (!valid_type_name(p, f.type))
        diags.push_back({c.name, "", -1, "unknown field type " + f.type});
    for (std::size_t i = 0; i < c.methods.size(); ++i)
      for (std::size_t j = i + 1; j < c.methods.size(); ++j)
        if (c.methods[i].name == c.methods[j].name)
          diags.push_back({c.name, "", -1, "method " + c.methods[i].name + " declared twice"});
    for (const auto& m : c.methods) {
      if (!valid_type_name(p, m.ret_type))
        diags.push_back({c.name, m.name, -1, "unknown return type " + m.ret_type});
      for (const auto& par : m.params)
        if (!valid_type_name(p, par.type))
          diags.push_back({c.name, m.name, -1, "unknown parameter type " + par.type});
    }
  }
  if (!diags.empty()) return diags;

  for (const auto& c : p.classes)
    for (const auto& m : c.methods) MethodChecker(p, c, m, diags).check();

  check_recursion(p, diags);
  return diags;
}

} // namespace jbc
