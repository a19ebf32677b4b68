#include "jbc/term.hpp"

#include <sstream>

namespace jbc {

Term Term::var(std::string name, Sort sort) {
  Term t;
  t.kind = Kind::Var;
  t.sort = sort;
  t.name = std::move(name);
  return t;
}

Term Term::int_lit(Int z) {
  Term t;
  t.kind = Kind::IntLit;
  t.sort = Sort::Int;
  t.z = std::move(z);
  return t;
}

Term Term::bool_lit(bool b) {
  Term t;
  t.kind = Kind::BoolLit;
  t.sort = Sort::Bool;
  t.b = b;
  return t;
}

Term Term::app(std::string name, std::vector<Term> args) {
  Term t;
  t.kind = Kind::App;
  t.sort = Sort::Univ;
  t.name = std::move(name);
  t.args = std::move(args);
  return t;
}

Term Term::null_sym() { return app("null"); }

bool operator==(const Term& a, const Term& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Term::Kind::Var: return a.name == b.name && a.sort == b.sort;
    case Term::Kind::IntLit: return a.z == b.z;
    case Term::Kind::BoolLit: return a.b == b.b;
    case Term::Kind::App: return a.name == b.name && a.args == b.args;
  }
  return false;
}

bool operator<(const Term& a, const Term& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  switch (a.kind) {
    case Term::Kind::Var:
      if (a.name != b.name) return a.name < b.name;
      return a.sort < b.sort;
    case Term::Kind::IntLit: return a.z < b.z;
    case Term::Kind::BoolLit: return a.b < b.b;
    case Term::Kind::App:
      if (a.name != b.name) return a.name < b.name;
      return a.args < b.args;
  }
  return false;
}

Int term_size(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var: return 1;
    case Term::Kind::IntLit: return t.z >= 0 ? t.z : Int(-t.z);
    case Term::Kind::BoolLit: return 1;
    case Term::Kind::App: {
      Int total = 1;
      for (const auto& a : t.args) total += term_size(a);
      return total;
    }
  }
  return 0;
}

void collect_vars(const Term& t, std::set<std::pair<std::string, Sort>>& out) {
  if (t.kind == Term::Kind::Var) {
    out.insert({t.name, t.sort});
    return;
  }
  for (const auto& a : t.args) collect_vars(a, out);
}

bool is_ground(const Term& t) {
  if (t.kind == Term::Kind::Var) return false;
  for (const auto& a : t.args)
    if (!is_ground(a)) return false;
  return true;
}

bool is_theory_op(const std::string& name) {
  return name == "+" || name == "-" || name == "=" || name == "!=" || name == ">=" ||
         name == "/\\" || name == "\\/" || name == "not";
}

std::string render_term(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var: return t.name;
    case Term::Kind::IntLit: return t.z.str();
    case Term::Kind::BoolLit: return t.b ? "true" : "false";
    case Term::Kind::App: {
      if (t.args.empty()) return t.name;
      std::ostringstream out;
      out << t.name << "(";
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) out << ", ";
        out << render_term(t.args[i]);
      }
      out << ")";
      return out.str();
    }
  }
  return "?";
}

namespace {

int prec(const std::string& op) {
  if (op == "\\/") return 1;
  if (op == "/\\") return 2;
  if (op == "=" || op == "!=" || op == ">=") return 3;
  if (op == "+" || op == "-") return 4;
  return 5;
}

std::string render_infix(const Term& t, int outer) {
  if (t.kind != Term::Kind::App || !is_theory_op(t.name)) return render_term(t);
  if (t.name == "not") return "not " + render_infix(t.args[0], prec("not"));
  int p = prec(t.name);
  std::string s =
      render_infix(t.args[0], p) + " " + t.name + " " + render_infix(t.args[1], p + 1);
  if (p < outer) return "(" + s + ")";
  return s;
}

} // namespace

std::string render_constraint(const Term& t) { return render_infix(t, 0); }

} // namespace jbc
