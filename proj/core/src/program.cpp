#include "jbc/program.hpp"

#include <algorithm>
#include <cctype>

namespace jbc {

const char* op_name(Op op) {
  switch (op) {
    case Op::Load: return "Load";
    case Op::Store: return "Store";
    case Op::Push: return "Push";
    case Op::Pop: return "Pop";
    case Op::IAdd: return "IAdd";
    case Op::ISub: return "ISub";
    case Op::CmpGeq: return "CmpGeq";
    case Op::CmpEq: return "CmpEq";
    case Op::CmpNeq: return "CmpNeq";
    case Op::And: return "And";
    case Op::Or: return "Or";
    case Op::Not: return "Not";
    case Op::Goto: return "Goto";
    case Op::IfFalse: return "IfFalse";
    case Op::New: return "New";
    case Op::Getfield: return "Getfield";
    case Op::Putfield: return "Putfield";
    case Op::Checkcast: return "Checkcast";
    case Op::Invoke: return "Invoke";
    case Op::Return: return "Return";
  }
  return "?";
}

std::optional<Op> op_from_name(const std::string& name) {
  std::string low;
  low.reserve(name.size());
  for (char c : name) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  static const std::pair<const char*, Op> table[] = {
      {"load", Op::Load},         {"store", Op::Store},       {"push", Op::Push},
      {"pop", Op::Pop},           {"iadd", Op::IAdd},         {"isub", Op::ISub},
      {"cmpgeq", Op::CmpGeq},     {"cmpeq", Op::CmpEq},       {"cmpneq", Op::CmpNeq},
      {"and", Op::And},           {"or", Op::Or},             {"not", Op::Not},
      {"goto", Op::Goto},         {"iffalse", Op::IfFalse},   {"new", Op::New},
      {"getfield", Op::Getfield}, {"putfield", Op::Putfield}, {"checkcast", Op::Checkcast},
      {"invoke", Op::Invoke},     {"return", Op::Return},
  };
  for (const auto& [n, op] : table)
    if (low == n) return op;
  return std::nullopt;
}

std::string render_value(const Value& v) {
  if (std::holds_alternative<Unit>(v)) return "unit";
  if (std::holds_alternative<Null>(v)) return "null";
  if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const Int* z = std::get_if<Int>(&v)) return z->str();
  return "addr#" + std::to_string(std::get<Addr>(v).id);
}

const ClassDecl* Program::find_class(const std::string& name) const {
  for (const auto& c : classes)
    if (c.name == name) return &c;
  return nullptr;
}

bool Program::is_class_type(const std::string& t) const {
  return t == "Object" || find_class(t) != nullptr;
}

bool Program::is_subclass(const std::string& a, const std::string& b) const {
  if (b == "Object") return true;
  std::string cur = a;
  while (cur != "Object") {
    if (cur == b) return true;
    const ClassDecl* c = find_class(cur);
    if (!c) return false;
    cur = c->super;
  }
  return false;
}

std::string Program::lub_class(const std::string& a, const std::string& b) const {
  // chains are short: walk a's chain and take the first ancestor of b
  std::string cur = a;
  while (true) {
    if (is_subclass(b, cur)) return cur;
    if (cur == "Object") return "Object";
    const ClassDecl* c = find_class(cur);
    if (!c) return "Object";
    cur = c->super;
  }
}

std::optional<Program::MethodRef> Program::resolve_method(const std::string& cn,
                                                          const std::string& mn) const {
  std::string cur = cn;
  while (cur != "Object") {
    const ClassDecl* c = find_class(cur);
    if (!c) return std::nullopt;
    for (const auto& m : c->methods)
      if (m.name == mn) return MethodRef{c, &m};
    cur = c->super;
  }
  return std::nullopt;
}

std::vector<FieldSlot> Program::field_table(const std::string& cn) const {
  std::vector<std::string> chain;
  std::string cur = cn;
  while (cur != "Object") {
    const ClassDecl* c = find_class(cur);
    if (!c) break;
    chain.push_back(cur);
    cur = c->super;
  }
  std::reverse(chain.begin(), chain.end());
  std::vector<FieldSlot> out;
  for (const auto& name : chain) {
    const ClassDecl* c = find_class(name);
    for (const auto& f : c->fields) out.push_back({name, f.type, f.name});
  }
  return out;
}

std::optional<std::size_t> Program::field_index(const std::string& cn, const std::string& owner,
                                                const std::string& fname) const {
  auto table = field_table(cn);
  for (std::size_t i = 0; i < table.size(); ++i)
    if (table[i].owner == owner && table[i].name == fname) return i;
  return std::nullopt;
}

std::optional<std::string> Program::field_owner(const std::string& cn,
                                                const std::string& fname) const {
  std::string cur = cn;
  while (cur != "Object") {
    const ClassDecl* c = find_class(cur);
    if (!c) return std::nullopt;
    for (const auto& f : c->fields)
      if (f.name == fname) return cur;
    cur = c->super;
  }
  return std::nullopt;
}

std::vector<std::string> Program::subclasses_of(const std::string& cn) const {
  std::vector<std::string> out;
  for (const auto& c : classes)
    if (is_subclass(c.name, cn)) out.push_back(c.name);
  return out;
}

Value default_field_value(const Program& p, const std::string& type) {
  if (type == "int") return Int(0);
  if (type == "bool") return false;
  if (type == "unit") return Unit{};
  (void)p;
  return Null{};
}

} // namespace jbc
