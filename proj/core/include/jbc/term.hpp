#pragma once

#include "jbc/value.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace jbc {

enum class Sort { Int, Bool, Univ };

// First-order terms over three sorts. Constraints are terms too, built from
// the theory operators +, -, =, !=, >=, /\, \/, not. The null object is the
// nullary constructor "null".
struct Term {
  enum class Kind { Var, IntLit, BoolLit, App };
  Kind kind = Kind::App;
  Sort sort = Sort::Univ; // meaningful for Var
  std::string name;       // Var and App
  Int z;                  // IntLit
  bool b = false;         // BoolLit
  std::vector<Term> args; // App

  static Term var(std::string name, Sort sort);
  static Term int_lit(Int z);
  static Term bool_lit(bool b);
  static Term app(std::string name, std::vector<Term> args = {});
  static Term null_sym();

  bool is_null_sym() const { return kind == Kind::App && name == "null" && args.empty(); }

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  friend bool operator<(const Term& a, const Term& b);
};

Int term_size(const Term& t);

// Variables occurring in t, with their sorts.
void collect_vars(const Term& t, std::set<std::pair<std::string, Sort>>& out);
bool is_ground(const Term& t);

// f(x, g(y)) style for plain terms, infix for constraints.
std::string render_term(const Term& t);
std::string render_constraint(const Term& t);

bool is_theory_op(const std::string& name);

} // namespace jbc
