#include "doctest.h"

#include "../helpers.hpp"

#include "jbc/heapliteral.hpp"
#include "jbc/heapprops.hpp"
#include "jbc/vm.hpp"

using namespace jbc;
using jbctest::ad;
using jbctest::iv;
using jbctest::StateBuilder;

namespace {

const char* kOwnerText = R"(Class:
  Name: Base
  Classbody:
    Superclass: Object
    Fields:
    Methods:
Class:
  Name: Deriv
  Classbody:
    Superclass: Base
    Fields:
      Holder h
    Methods:
Class:
  Name: Holder
  Classbody:
    Superclass: Object
    Fields:
      int x
    Methods:
)";

// entry-shaped append state: this is a one-cell list, ys unknown
AbstractState entry_shape() {
  return StateBuilder{}
      .frame("List", "append", 0, {}, {ad(1), ad(3), Unit{}})
      .inst(1, "List", {ad(2), iv(1)})
      .cv(2, "List")
      .cv(3, "List")
      .distinct(1, 3)
      .distinct(2, 3)
      .tag(1, 0x1)
      .tag(2, 0x1)
      .tag(3, 0x2)
      .flag(1)
      .flag(2)
      .done();
}

// loop-exit shape: cur is a last cell, ys still unknown
AbstractState exit_shape() {
  return StateBuilder{}
      .frame("List", "append", 19, {ad(4), ad(3)}, {ad(1), ad(3), ad(4)})
      .inst(1, "List", {ad(2), iv(1)})
      .cv(2, "List")
      .cv(3, "List")
      .inst(4, "List", {Null{}, iv(3)})
      .tag(1, 0x1)
      .tag(2, 0x1)
      .tag(4, 0x1)
      .tag(3, 0x2)
      .flag(1)
      .flag(2)
      .flag(4)
      .done();
}

} // namespace

TEST_CASE("class-level reachability follows field types") {
  SUBCASE("recursive structures sit on class cycles") {
    Program p = jbctest::load("flatten.jbc");
    TypeReachability tr(p);
    CHECK(tr.can_contain("TreeList", "Tree"));
    CHECK(!tr.can_contain("Tree", "TreeList"));
    CHECK(!tr.can_contain("IntList", "Tree"));
    CHECK(tr.can_contain("Tree", "Tree"));
    CHECK(tr.on_cycle("IntList"));
    CHECK(tr.on_cycle("Tree"));
    CHECK(tr.on_cycle("TreeList"));
  }
  SUBCASE("straight-line ownership is not a cycle") {
    Program p = parse_program(kOwnerText);
    TypeReachability tr(p);
    CHECK(tr.can_contain("Deriv", "Holder"));
    CHECK(!tr.can_contain("Holder", "Deriv"));
    CHECK(!tr.on_cycle("Deriv"));
    CHECK(!tr.on_cycle("Holder"));
  }
  SUBCASE("fields declared in subclasses count for the superclass") {
    Program p = parse_program(kOwnerText);
    TypeReachability tr(p);
    CHECK(tr.can_contain("Base", "Holder"));
    CHECK(!tr.on_cycle("Base"));
  }
}

TEST_CASE("region tags separate declared-disjoint addresses") {
  Program p = jbctest::load("append.jbc");
  AnalysisContext ctx{&p, {{0, 1}}};
  AbstractState s = entry_shape();
  CHECK(tag_disjoint(ctx, s, 1, 3));
  CHECK(tag_disjoint(ctx, s, 3, 1));
  CHECK(!tag_disjoint(ctx, s, 1, 2));

  AbstractState untagged = s;
  untagged.tags.erase(3);
  CHECK(!tag_disjoint(ctx, untagged, 1, 3));

  AnalysisContext no_regions{&p, {}};
  CHECK(!tag_disjoint(no_regions, s, 1, 3));
}

TEST_CASE("aliasing respects annotations and acyclicity flags") {
  Program p = jbctest::load("append.jbc");
  AnalysisContext ctx{&p, {}};
  AbstractState s = entry_shape();

  CHECK(may_alias(ctx, s, 1, 1));
  CHECK(!may_alias(ctx, s, 1, 3));
  CHECK(!may_alias(ctx, s, 2, 3));
  // this.next = this would close a cycle through the acyclic chain
  CHECK(!may_alias(ctx, s, 1, 2));

  AbstractState unflagged = s;
  unflagged.flags.clear();
  CHECK(may_alias(ctx, unflagged, 1, 2));

  Program d = jbctest::load("dispatch.jbc");
  AnalysisContext dctx{&d, {}};
  AbstractState mixed = StateBuilder{}
                            .frame("C", "call", 0, {}, {ad(1), ad(2)})
                            .inst(1, "B", {})
                            .cv(2, "C")
                            .done();
  CHECK(!may_alias(dctx, mixed, 1, 2));

  // two open references of incomparable classes can still both be null
  AbstractState open = StateBuilder{}
                           .frame("C", "call", 0, {}, {ad(1), ad(2)})
                           .cv(1, "B")
                           .cv(2, "C")
                           .done();
  CHECK(may_alias(dctx, open, 1, 2));
}

TEST_CASE("reachability combines structure, aliasing, and containment") {
  Program p = jbctest::load("append.jbc");
  AnalysisContext ctx{&p, {{0, 1}}};

  SUBCASE("field paths are reachability") {
    AbstractState s = entry_shape();
    CHECK(may_reach(ctx, s, 1, 2));
    CHECK(may_reach(ctx, s, 1, 1));
    CHECK(!may_reach(ctx, s, 1, 3));
  }
  SUBCASE("an unconstrained region may alias the target") {
    AbstractState s = exit_shape();
    s.annotate(1, 3);
    s.annotate(2, 3);
    s.annotate(3, 4);
    CHECK(may_reach(ctx, s, 2, 4));
    CHECK(may_reach(ctx, s, 1, 4));
    CHECK(!may_reach(ctx, s, 3, 4));
  }
  SUBCASE("a distinct region may still contain the target") {
    AbstractState s = exit_shape();
    s.annotate(1, 3);
    s.annotate(1, 4);
    s.annotate(2, 3);
    s.annotate(2, 4);
    s.annotate(3, 4);
    CHECK(may_reach(ctx, s, 2, 4));
    CHECK(may_reach(ctx, s, 1, 4));
    CHECK(!may_reach(ctx, s, 3, 4));
  }
  SUBCASE("acyclicity rules out routes that would close a cycle") {
    AbstractState tail = StateBuilder{}
                             .frame("List", "append", 0, {}, {ad(1), Null{}, Unit{}})
                             .inst(1, "List", {ad(2), iv(1)})
                             .cv(2, "List")
                             .distinct(1, 2)
                             .flag(1)
                             .flag(2)
                             .done();
    CHECK(!may_reach(ctx, tail, 2, 1));
    AbstractState loose = tail;
    loose.flags.clear();
    CHECK(may_reach(ctx, loose, 2, 1));
  }
}

TEST_CASE("cycle detection distinguishes structure, assumptions, and class cycles") {
  Program p = jbctest::load("append.jbc");
  AnalysisContext ctx{&p, {}};

  SUBCASE("a concrete self-loop is cyclic after embedding") {
    LiteralBuilder builder(p);
    std::vector<Value> args{builder.parse("#1 List{next: @1, val: 0}"), builder.parse("null")};
    JvmState c = initial_state(p, "List", "append", args, builder.heap(), builder.next_addr());
    CHECK(maybe_cyclic(ctx, beta(c), 1));
  }
  SUBCASE("a concrete straight list is not") {
    LiteralBuilder builder(p);
    std::vector<Value> args{builder.parse(jbctest::list_literal(2)), builder.parse("null")};
    JvmState c = initial_state(p, "List", "append", args, builder.heap(), builder.next_addr());
    CHECK(!maybe_cyclic(ctx, beta(c), 1));
  }
  SUBCASE("flags stand in for acyclicity assumptions") {
    AbstractState s = entry_shape();
    CHECK(!maybe_cyclic(ctx, s, 1));
    CHECK(!maybe_cyclic(ctx, s, 2));
    AbstractState unflagged = s;
    unflagged.flags.clear();
    CHECK(maybe_cyclic(ctx, unflagged, 1));
    CHECK(maybe_cyclic(ctx, unflagged, 3));
  }
  SUBCASE("class variables of acyclic classes stay acyclic") {
    Program q = parse_program(kOwnerText);
    AnalysisContext qctx{&q, {}};
    AbstractState s = StateBuilder{}.cv(1, "Deriv").done();
    CHECK(!maybe_cyclic(qctx, s, 1));
  }
}
