#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <variant>

namespace jbc {

// Integers are unbounded.
using Int = boost::multiprecision::cpp_int;

struct Unit {
  friend bool operator==(Unit, Unit) { return true; }
  friend bool operator<(Unit, Unit) { return false; }
};

struct Null {
  friend bool operator==(Null, Null) { return true; }
  friend bool operator<(Null, Null) { return false; }
};

struct Addr {
  std::uint32_t id = 0;
  friend bool operator==(Addr a, Addr b) { return a.id == b.id; }
  friend bool operator<(Addr a, Addr b) { return a.id < b.id; }
};

// A concrete run-time value. Push literals never carry an Addr; addresses
// only arise from New and from heap-building argument literals.
using Value = std::variant<Unit, Null, bool, Int, Addr>;

std::string render_value(const Value& v);

} // namespace jbc
