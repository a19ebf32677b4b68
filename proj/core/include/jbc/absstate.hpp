#pragma once

#include "jbc/program.hpp"
#include "jbc/value.hpp"
#include "jbc/vm.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace jbc {

struct IntVar {
  std::uint32_t id = 0;
  friend bool operator==(IntVar a, IntVar b) { return a.id == b.id; }
  friend bool operator<(IntVar a, IntVar b) { return a.id < b.id; }
};

struct BoolVar {
  std::uint32_t id = 0;
  friend bool operator==(BoolVar a, BoolVar b) { return a.id == b.id; }
  friend bool operator<(BoolVar a, BoolVar b) { return a.id < b.id; }
};

using AbsValue = std::variant<Unit, Null, bool, Int, Addr, IntVar, BoolVar>;

// Heap content: a fully known object, or a class variable standing for any
// object of a subclass of cls (class variables have no field entries).
struct AbsObject {
  bool is_instance = true;
  std::string cls;
  std::vector<AbsValue> fields; // field_table order; empty for class variables
};

struct AbsFrame {
  std::string cls;
  std::string method;
  int pc = 0;
  std::vector<AbsValue> stack;
  std::vector<AbsValue> regs;
};

struct AbstractState {
  enum class Kind { Triple, Top, Bot, Failed };
  Kind kind = Kind::Triple;

  std::vector<AbsFrame> frames;
  std::map<std::uint32_t, AbsObject> heap;

  // Unordered address pairs asserted distinct (first < second).
  std::set<std::pair<std::uint32_t, std::uint32_t>> iu;

  // Region bitmask per address, and acyclicity marks. Both come from
  // user-supplied assumptions and are threaded through the analysis; they
  // never influence the order relation itself.
  std::map<std::uint32_t, std::uint32_t> tags;
  std::set<std::uint32_t> flags;

  std::uint32_t next_addr = 1;
  std::uint32_t next_var = 1;

  FailReason fail_reason = FailReason::NullDeref; // Kind::Failed only

  static AbstractState top();
  static AbstractState bot();
  static AbstractState failed(FailReason r);

  bool annotated(std::uint32_t a, std::uint32_t b) const;
  void annotate(std::uint32_t a, std::uint32_t b);

  std::vector<std::uint32_t> live_addrs() const;

  AbsValue fresh_int_var();
  AbsValue fresh_bool_var();
  std::uint32_t fresh_addr();

  // Replaces every occurrence of address a in frames and fields, and drops
  // a's heap entry, annotations, tags and flag.
  void substitute_addr(std::uint32_t a, const AbsValue& repl);

  // Drops heap entries unreachable from the frames, with their annotations,
  // tags and flags.
  void prune_unreachable();
};

// Root slots in translation order: stacks of all frames starting from the
// active frame, each bottom to top; then registers in the same frame order,
// each by index.
void for_each_root(const AbstractState& s,
                   const std::function<void(const AbsValue&)>& fn);

// Mutable variant, same order.
void for_each_root_slot(AbstractState& s, const std::function<void(AbsValue&)>& fn);

// Same shape, no annotations. The embedding beta in absdomain adds them.
AbstractState lift_concrete(const JvmState& s);

bool is_abs_halt_state(const Program& p, const AbstractState& s);

std::string render_abs_value(const AbsValue& v);
std::string render_abstract_state(const AbstractState& s);

} // namespace jbc
