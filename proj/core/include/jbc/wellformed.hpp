#pragma once

#include "jbc/program.hpp"

#include <string>
#include <vector>

namespace jbc {

struct Diag {
  std::string cls;
  std::string method; // empty for class-level problems
  int pc = -1;        // -1 for method- or class-level problems
  std::string msg;
};

std::string render_diag(const Diag& d);

// Static checks: stack heights and operand types per pc, jump targets in
// range, locals written before read, field/method/class references resolve,
// no recursion in the call graph, control never falls off the end.
std::vector<Diag> check_wellformed(const Program& p);

} // namespace jbc
