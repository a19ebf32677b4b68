#pragma once

#include "jbc/absstate.hpp"
#include "jbc/parser.hpp"
#include "jbc/program.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jbctest {

inline std::string slurp(const std::string& name) {
  std::ifstream in(std::string(JBC_CORPUS_DIR) + "/" + name, std::ios::binary);
  if (!in) throw std::runtime_error("missing corpus file " + name);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline jbc::Program load(const std::string& name) { return jbc::parse_program(slurp(name)); }

// List{val: base, next: List{val: base+1, ...}} with n cells.
inline std::string list_literal(int n, int base = 1) {
  std::string out = "null";
  for (int i = n - 1; i >= 0; --i)
    out = "List{next: " + out + ", val: " + std::to_string(base + i) + "}";
  return out;
}

inline jbc::AbsValue iv(std::uint32_t id) { return jbc::IntVar{id}; }
inline jbc::AbsValue bv(std::uint32_t id) { return jbc::BoolVar{id}; }
inline jbc::AbsValue ad(std::uint32_t id) { return jbc::Addr{id}; }

// Hand-built abstract states; done() derives the allocation counters.
class StateBuilder {
public:
  StateBuilder& frame(std::string cls, std::string method, int pc,
                      std::vector<jbc::AbsValue> stack, std::vector<jbc::AbsValue> regs) {
    s_.frames.push_back(
        {std::move(cls), std::move(method), pc, std::move(stack), std::move(regs)});
    return *this;
  }
  StateBuilder& inst(std::uint32_t a, std::string cls, std::vector<jbc::AbsValue> fields) {
    s_.heap[a] = jbc::AbsObject{true, std::move(cls), std::move(fields)};
    return *this;
  }
  StateBuilder& cv(std::uint32_t a, std::string cls) {
    s_.heap[a] = jbc::AbsObject{false, std::move(cls), {}};
    return *this;
  }
  StateBuilder& distinct(std::uint32_t a, std::uint32_t b) {
    s_.annotate(a, b);
    return *this;
  }
  StateBuilder& tag(std::uint32_t a, std::uint32_t bits) {
    s_.tags[a] = bits;
    return *this;
  }
  StateBuilder& flag(std::uint32_t a) {
    s_.flags.insert(a);
    return *this;
  }
  jbc::AbstractState done() {
    jbc::AbstractState out = s_;
    std::uint32_t max_addr = 0, max_var = 0;
    for (const auto& [a, obj] : out.heap) {
      max_addr = std::max(max_addr, a);
      for (const auto& f : obj.fields) bump(f, max_addr, max_var);
    }
    for (const auto& fr : out.frames) {
      for (const auto& v : fr.stack) bump(v, max_addr, max_var);
      for (const auto& v : fr.regs) bump(v, max_addr, max_var);
    }
    out.next_addr = max_addr + 1;
    out.next_var = max_var + 1;
    return out;
  }

private:
  static void bump(const jbc::AbsValue& v, std::uint32_t& max_addr, std::uint32_t& max_var) {
    if (auto* a = std::get_if<jbc::Addr>(&v)) max_addr = std::max(max_addr, a->id);
    if (auto* i = std::get_if<jbc::IntVar>(&v)) max_var = std::max(max_var, i->id);
    if (auto* b = std::get_if<jbc::BoolVar>(&v)) max_var = std::max(max_var, b->id);
  }

  jbc::AbstractState s_;
};

} // namespace jbctest
