#include "doctest.h"

#include "../helpers.hpp"

#include "jbc/heapliteral.hpp"
#include "jbc/parser.hpp"
#include "jbc/vm.hpp"
#include "jbc/wellformed.hpp"

using namespace jbc;

namespace {

JvmState entry_state(const Program& p, const std::string& cls, const std::string& method,
                     const std::vector<std::string>& literals) {
  LiteralBuilder builder(p);
  std::vector<Value> args;
  for (const auto& text : literals) args.push_back(builder.parse(text));
  return initial_state(p, cls, method, args, builder.heap(), builder.next_addr());
}

RunResult run_append(const Program& p, int cells) {
  JvmState s0 = entry_state(p, "List", "append", {jbctest::list_literal(cells), "null"});
  return run(p, s0, 100000);
}

Program tiny(const std::string& ret, const std::string& body, int max_stack = 2) {
  std::string text =
      "Class:\n"
      "  Name: T\n"
      "  Classbody:\n"
      "    Superclass: Object\n"
      "    Fields:\n"
      "    Methods:\n"
      "      Method: " + ret + " f\n"
      "        Methodbody:\n"
      "          MaxStack: " + std::to_string(max_stack) + "\n"
      "          MaxVars: 0\n"
      "          Bytecode:\n";
  int pc = 0;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    char label[8];
    std::snprintf(label, sizeof label, "%02d", pc++);
    text += "            " + std::string(label) + ": " + line + "\n";
  }
  Program p = parse_program(text);
  REQUIRE(check_wellformed(p).empty());
  return p;
}

Value run_tiny(const Program& p) {
  RunResult r = run(p, entry_state(p, "T", "f", {"null"}), 1000);
  REQUIRE(r.halted);
  return r.ret;
}

} // namespace

TEST_CASE("append walks the list and halts") {
  Program p = jbctest::load("append.jbc");
  RunResult r = run_append(p, 1);
  CHECK(r.halted);
  CHECK(r.steps == 16);
  CHECK(r.ret == Value{Unit{}});
  REQUIRE(r.trace.size() == 17);
  CHECK(is_halt_state(p, r.trace.back()));
  CHECK(!is_halt_state(p, r.trace.front()));

  // each extra cell costs one loop iteration
  CHECK(run_append(p, 2).steps == 27);
  CHECK(run_append(p, 3).steps == 38);
}

TEST_CASE("append links the argument onto the tail") {
  Program p = jbctest::load("append.jbc");
  JvmState s0 = entry_state(p, "List", "append",
                            {jbctest::list_literal(2), jbctest::list_literal(1, 9)});
  RunResult r = run(p, s0, 1000);
  REQUIRE(r.halted);
  // this(1) -> cell(2) -> ys(3): the tail's next references ys once the write
  // at pc 19 is done; the halt state itself prunes the unreachable heap
  REQUIRE(r.trace.size() >= 2);
  const JvmState& before_halt = r.trace[r.trace.size() - 2];
  auto tail = before_halt.heap.find(2);
  REQUIRE(tail != before_halt.heap.end());
  CHECK(tail->second.fields[0] == Value{Addr{3}});
  CHECK(r.trace.back().heap.empty());
}

TEST_CASE("a null receiver stops the machine") {
  Program p = jbctest::load("append.jbc");
  JvmState s0 = entry_state(p, "List", "append", {"null", "null"});
  RunResult r = run(p, s0, 1000);
  CHECK(!r.halted);
  CHECK(r.reason == FailReason::NullDeref);
  CHECK(r.steps == 5);
  // the stuck state is the one the failing instruction saw
  REQUIRE(r.trace.size() == 6);
  CHECK(r.trace.back().frames.back().pc == 5);
}

TEST_CASE("fuel runs out on the spinning loop") {
  Program p = jbctest::load("loop.jbc");
  RunResult r = run(p, entry_state(p, "Loop", "spin", {"Loop{}"}), 50, false);
  CHECK(!r.halted);
  CHECK(r.reason == FailReason::FuelExhausted);
  CHECK(r.steps == 50);
}

TEST_CASE("binary operators take the left operand from deeper in the stack") {
  CHECK(run_tiny(tiny("int", "Push 7\nPush 3\nISub\nReturn")) == Value{Int(4)});
  CHECK(run_tiny(tiny("int", "Push -2\nPush 5\nIAdd\nReturn")) == Value{Int(3)});
  CHECK(run_tiny(tiny("bool", "Push 3\nPush 7\nCmpGeq\nReturn")) == Value{false});
  CHECK(run_tiny(tiny("bool", "Push 7\nPush 7\nCmpGeq\nReturn")) == Value{true});
  CHECK(run_tiny(tiny("bool", "Push 4\nPush 4\nCmpEq\nReturn")) == Value{true});
  CHECK(run_tiny(tiny("bool", "Push null\nPush null\nCmpNeq\nReturn")) == Value{false});
  CHECK(run_tiny(tiny("bool", "Push true\nPush false\nAnd\nReturn")) == Value{false});
  CHECK(run_tiny(tiny("bool", "Push true\nPush false\nOr\nReturn")) == Value{true});
  CHECK(run_tiny(tiny("bool", "Push false\nNot\nReturn")) == Value{true});
}

TEST_CASE("conditional branches pop the condition") {
  // true falls through, false jumps by the offset
  CHECK(run_tiny(tiny("int", "Push true\nIfFalse 3\nPush 1\nReturn\nPush 2\nReturn")) ==
        Value{Int(1)});
  CHECK(run_tiny(tiny("int", "Push false\nIfFalse 3\nPush 1\nReturn\nPush 2\nReturn")) ==
        Value{Int(2)});
}

TEST_CASE("new objects carry default field values") {
  std::string text =
      "Class:\n"
      "  Name: D\n"
      "  Classbody:\n"
      "    Superclass: Object\n"
      "    Fields:\n"
      "      int i\n"
      "      bool b\n"
      "      D d\n"
      "    Methods:\n"
      "      Method: int geti\n"
      "        Methodbody:\n"
      "          MaxStack: 1\n"
      "          MaxVars: 0\n"
      "          Bytecode:\n"
      "            00: New D\n"
      "            01: Getfield i D\n"
      "            02: Return\n"
      "      Method: D getd\n"
      "        Methodbody:\n"
      "          MaxStack: 1\n"
      "          MaxVars: 0\n"
      "          Bytecode:\n"
      "            00: New D\n"
      "            01: Getfield d D\n"
      "            02: Return\n";
  Program p = parse_program(text);
  REQUIRE(check_wellformed(p).empty());
  RunResult r1 = run(p, entry_state(p, "D", "geti", {"D{}"}), 100);
  REQUIRE(r1.halted);
  CHECK(r1.ret == Value{Int(0)});
  RunResult r2 = run(p, entry_state(p, "D", "getd", {"D{}"}), 100);
  REQUIRE(r2.halted);
  CHECK(r2.ret == Value{Null{}});
}

TEST_CASE("checkcast accepts null and subclasses") {
  std::string text = jbctest::slurp("dispatch.jbc");
  Program p = parse_program(text);
  std::string casts =
      "Class:\n"
      "  Name: X\n"
      "  Classbody:\n"
      "    Superclass: Object\n"
      "    Fields:\n"
      "    Methods:\n"
      "      Method: A up\n"
      "        Methodbody:\n"
      "          MaxStack: 1\n"
      "          MaxVars: 0\n"
      "          Bytecode:\n"
      "            00: New B\n"
      "            01: Checkcast A\n"
      "            02: Return\n"
      "      Method: A down\n"
      "        Methodbody:\n"
      "          MaxStack: 1\n"
      "          MaxVars: 0\n"
      "          Bytecode:\n"
      "            00: New A\n"
      "            01: Checkcast B\n"
      "            02: Return\n"
      "      Method: B nul\n"
      "        Methodbody:\n"
      "          MaxStack: 1\n"
      "          MaxVars: 0\n"
      "          Bytecode:\n"
      "            00: Push null\n"
      "            01: Checkcast B\n"
      "            02: Return\n";
  p = parse_program(text + casts);
  REQUIRE(check_wellformed(p).empty());

  RunResult up = run(p, entry_state(p, "X", "up", {"X{}"}), 100);
  CHECK(up.halted);

  RunResult down = run(p, entry_state(p, "X", "down", {"X{}"}), 100);
  CHECK(!down.halted);
  CHECK(down.reason == FailReason::CastError);
  CHECK(down.steps == 1);

  RunResult nul = run(p, entry_state(p, "X", "nul", {"X{}"}), 100);
  REQUIRE(nul.halted);
  CHECK(nul.ret == Value{Null{}});
}

TEST_CASE("invoke dispatches on the dynamic class") {
  Program p = jbctest::load("dispatch.jbc");
  // A.m returns immediately, B.m loops forever
  RunResult quick = run(p, entry_state(p, "C", "call", {"C{}", "A{}"}), 1000);
  CHECK(quick.halted);
  RunResult spin = run(p, entry_state(p, "C", "call", {"C{}", "B{}"}), 1000, false);
  CHECK(!spin.halted);
  CHECK(spin.reason == FailReason::FuelExhausted);

  // during the inner call two frames are live; the receiver stays parked on
  // the caller stack until the return pops it
  JvmState s = entry_state(p, "C", "call", {"C{}", "A{}"});
  StepResult r1 = step(p, s);             // Load 1
  StepResult r2 = step(p, r1.state);      // Invoke m 0
  REQUIRE(r2.kind == StepResult::Kind::Next);
  REQUIRE(r2.state.frames.size() == 2);
  CHECK(r2.state.frames.back().cls == "A");
  CHECK(r2.state.frames.back().method == "m");
  CHECK(r2.state.frames.back().pc == 0);
  CHECK(r2.state.frames.front().stack.size() == 1);
  CHECK(r2.state.frames.front().pc == 1);
}

TEST_CASE("state size weighs integers by their magnitude") {
  Program p = jbctest::load("append.jbc");

  JvmState s0 = entry_state(p, "List", "append", {"List{next: null, val: 5}", "null"});
  CHECK(state_size(p, s0) == Int(10));

  JvmState lone;
  lone.frames.push_back(Frame{"List", "append", 0, {}, {Null{}}});
  CHECK(state_size(p, lone) == Int(2));

  JvmState shared;
  shared.heap[1] = HeapObj{"List", {Null{}, Int(-1)}};
  shared.next_addr = 2;
  shared.frames.push_back(Frame{"List", "append", 0, {}, {Addr{1}, Addr{1}}});
  CHECK(state_size(p, shared) == Int(7));
}

TEST_CASE("prune drops unreachable heap objects") {
  Program p = jbctest::load("append.jbc");
  JvmState s;
  s.heap[1] = HeapObj{"List", {Null{}, Int(0)}};
  s.heap[2] = HeapObj{"List", {Addr{1}, Int(0)}};
  s.heap[3] = HeapObj{"List", {Null{}, Int(0)}};
  s.next_addr = 4;
  s.frames.push_back(Frame{"List", "append", 0, {}, {Addr{2}}});
  prune_heap(s);
  CHECK(s.heap.count(1) == 1);
  CHECK(s.heap.count(2) == 1);
  CHECK(s.heap.count(3) == 0);
}
