#pragma once

#include "jbc/program.hpp"
#include "jbc/value.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace jbc {

enum class FailReason { NullDeref, CastError, FuelExhausted };
const char* fail_reason_name(FailReason r);

struct Frame {
  std::string cls;
  std::string method;
  int pc = 0;
  std::vector<Value> stack; // back() is the top
  std::vector<Value> regs;  // 0 = this, then params, then locals
};

struct HeapObj {
  std::string cls;
  std::vector<Value> fields; // field_table order
};

struct JvmState {
  std::vector<Frame> frames; // back() is the active frame
  std::map<std::uint32_t, HeapObj> heap;
  std::uint32_t next_addr = 1;
};

// Drops heap objects not reachable from any frame slot.
void prune_heap(JvmState& s);

// Fresh activation of cls.method; args[0] is the receiver. The heap and the
// address counter are taken as given so argument literals can preallocate.
JvmState initial_state(const Program& p, const std::string& cls, const std::string& method,
                       const std::vector<Value>& args, std::map<std::uint32_t, HeapObj> heap,
                       std::uint32_t next_addr);

struct StepResult {
  enum class Kind { Next, Halted, Failed } kind = Kind::Next;
  JvmState state; // Halted: the halt pseudo-state; Failed: the stuck state
  FailReason reason = FailReason::NullDeref;
};

// One transition. Assumes a wellformed program.
StepResult step(const Program& p, const JvmState& s);

struct RunResult {
  bool halted = false;
  FailReason reason = FailReason::FuelExhausted; // when !halted
  Value ret = Unit{};                            // when halted
  std::uint64_t steps = 0;
  std::vector<JvmState> trace; // s0 .. final state; the halt pseudo-state included
};

RunResult run(const Program& p, const JvmState& s0, std::uint64_t fuel, bool keep_trace = true);

// True when s is the pseudo-state a completed run ends in: one frame whose
// pc sits one past the end of the body and whose stack holds the result.
bool is_halt_state(const Program& p, const JvmState& s);

std::string render_jvm_state(const JvmState& s);

// Total size of the state graph: every root slot contributes the weighted
// node count of its path closure, plus one for the state node itself.
Int state_size(const Program& p, const JvmState& s);

} // namespace jbc
