#include "doctest.h"

#include "../helpers.hpp"

#include "jbc/ctrs.hpp"
#include "jbc/heapliteral.hpp"
#include "jbc/vm.hpp"

#include <algorithm>

using namespace jbc;
using jbctest::ad;
using jbctest::iv;
using jbctest::StateBuilder;

namespace {

CGraph append_graph(Program& p, AnalysisContext& ctx) {
  p = jbctest::load("append.jbc");
  ctx.prog = &p;
  std::vector<Assumption> assumptions{parse_assumption("acyclic:this"),
                                      parse_assumption("unshared:this,ys")};
  AbstractState init = initial_abstract_state(ctx, "List", "append", assumptions, true);
  return build_graph(ctx, init).graph;
}

int find_edge(const CGraph& g, int from, int to) {
  for (int i = 0; i < static_cast<int>(g.edges.size()); ++i)
    if (g.edges[i].from == from && g.edges[i].to == to) return i;
  REQUIRE(false);
  return -1;
}

std::vector<std::string> rendered(const std::vector<Term>& ts) {
  std::vector<std::string> out;
  for (const auto& t : ts) out.push_back(render_term(t));
  return out;
}

} // namespace

TEST_CASE("states translate to argument tuples") {
  Program p = jbctest::load("append.jbc");
  AnalysisContext ctx{&p, {}};

  SUBCASE("registers follow the stack, shared structure duplicates") {
    AbstractState entry = StateBuilder{}
                              .frame("List", "append", 0, {}, {ad(1), ad(3), Unit{}})
                              .inst(1, "List", {ad(2), iv(1)})
                              .cv(2, "List")
                              .cv(3, "List")
                              .flag(1)
                              .flag(2)
                              .done();
    CHECK(rendered(tst(ctx, entry)) ==
          std::vector<std::string>{"List(l2, i1)", "l3", "null"});

    AbstractState looped = StateBuilder{}
                               .frame("List", "append", 4, {}, {ad(1), ad(3), ad(1)})
                               .inst(1, "List", {ad(2), iv(1)})
                               .cv(2, "List")
                               .cv(3, "List")
                               .flag(1)
                               .flag(2)
                               .done();
    std::vector<Term> ts = tst(ctx, looped);
    REQUIRE(ts.size() == 3);
    CHECK(ts[0] == ts[2]);

    AbstractState mid = StateBuilder{}
                            .frame("List", "append", 7, {ad(5), Null{}}, {ad(1), ad(3), ad(4)})
                            .inst(1, "List", {ad(2), iv(1)})
                            .cv(2, "List")
                            .cv(3, "List")
                            .inst(4, "List", {ad(5), iv(3)})
                            .cv(5, "List")
                            .flag(1)
                            .flag(2)
                            .flag(4)
                            .flag(5)
                            .done();
    CHECK(rendered(tst(ctx, mid)) ==
          std::vector<std::string>{"l5", "null", "List(l2, i1)", "l3", "List(l5, i3)"});
  }
  SUBCASE("possibly cyclic objects become fresh variables per occurrence") {
    LiteralBuilder builder(p);
    std::vector<Value> args{builder.parse("#1 List{next: @1, val: 0}"), builder.parse("@1")};
    JvmState c = initial_state(p, "List", "append", args, builder.heap(), builder.next_addr());
    std::vector<Term> ts = tst(ctx, beta(c));
    REQUIRE(ts.size() == 3);
    CHECK(ts[0].kind == Term::Kind::Var);
    CHECK(ts[0].sort == Sort::Univ);
    CHECK(ts[1].kind == Term::Kind::Var);
    CHECK(ts[0].name != ts[1].name);
    CHECK(render_term(ts[2]) == "null");
  }
}

TEST_CASE("each edge kind yields its characteristic rule") {
  Program p;
  AnalysisContext ctx{nullptr, {}};
  CGraph g = append_graph(p, ctx);

  SUBCASE("evaluation edges relate consecutive tuples") {
    CtrsRule r = corr_rule(ctx, g, find_edge(g, 0, 1));
    CHECK(render_term(r.lhs) == "f_0(List(l2, i1), l3, null)");
    CHECK(render_term(r.rhs) == "f_1(List(l2, i1), List(l2, i1), l3, null)");
    CHECK(r.constraint == Term::bool_lit(true));
  }
  SUBCASE("instance edges only swap the head symbol") {
    CtrsRule r = corr_rule(ctx, g, find_edge(g, 4, 5));
    CHECK(r.lhs.name == "f_4");
    CHECK(r.rhs.name == "f_5");
    CHECK(r.lhs.args == r.rhs.args);
  }
  SUBCASE("refinement edges specialize both sides to the refined tuple") {
    CtrsRule r = corr_rule(ctx, g, find_edge(g, 8, 9));
    CHECK(r.lhs.name == "f_8");
    CHECK(r.rhs.name == "f_9");
    CHECK(r.lhs.args == r.rhs.args);
    CHECK(r.lhs.args == tst(ctx, g.nodes[9].state));
  }
  SUBCASE("heap writes freshen variables that may reach the receiver") {
    CtrsRule r = corr_rule(ctx, g, find_edge(g, 26, 27));
    CHECK(render_term(r.lhs) ==
          "f_26(List(null, i3), l3, List(l2, i1), l3, List(null, i3))");
    CHECK(render_term(r.rhs) == "f_27(List(l5, i1), l3, List(l3, i3))");
  }
}

TEST_CASE("the emitted system is complete and stable") {
  Program p;
  AnalysisContext ctx{nullptr, {}};
  CGraph g = append_graph(p, ctx);
  Ctrs c = emit_ctrs(ctx, g);

  CHECK(c.rules.size() == 40);
  CHECK(std::count_if(c.sig.begin(), c.sig.end(),
                      [](const CtrsSym& s) { return s.defined; }) == 38);
  auto has_sym = [&](const std::string& n, int arity, bool defined) {
    return std::any_of(c.sig.begin(), c.sig.end(), [&](const CtrsSym& s) {
      return s.name == n && s.arity == arity && s.defined == defined;
    });
  };
  CHECK(has_sym("null", 0, false));
  CHECK(has_sym("List", 2, false));
  CHECK(has_sym("f_0", 3, true));
  CHECK(has_sym("f_8", 5, true));

  std::string text = render_ctrs(c);
  CHECK(text == jbctest::slurp("golden/append.ctrs"));

  // comments are read over, everything else survives a round trip
  Ctrs back = parse_ctrs(text);
  std::istringstream in(text);
  std::string line, bare;
  while (std::getline(in, line))
    if (line.empty() || line[0] != ';') bare += line + "\n";
  CHECK(render_ctrs(back) == bare);
  REQUIRE(back.rules.size() == c.rules.size());
  for (std::size_t i = 0; i < c.rules.size(); ++i) {
    CHECK(back.rules[i].lhs == c.rules[i].lhs);
    CHECK(back.rules[i].rhs == c.rules[i].rhs);
    CHECK(back.rules[i].constraint == c.rules[i].constraint);
  }
}

TEST_CASE("system parsing rejects malformed input") {
  auto wrap = [](const std::string& sig, const std::string& rules) {
    return "(SORTS int bool univ)\n(SIG\n" + sig + ")\n(RULES\n" + rules + ")\n";
  };

  CHECK_NOTHROW(parse_ctrs(wrap("  (f 1 defined)\n  (g 1 defined)\n",
                                "  (VAR x:univ)\n  f(x) -> g(x) [true]\n")));
  CHECK_THROWS_AS(parse_ctrs(wrap("  (f 1 defined)\n  (g 1 defined)\n",
                                  "  (VAR x:univ)\n  f(x, x) -> g(x) [true]\n")),
                  CtrsParseError);
  CHECK_THROWS_AS(parse_ctrs(wrap("  (f 1 defined)\n  (f 2 constructor)\n", "")),
                  CtrsParseError);
  CHECK_THROWS_AS(parse_ctrs(wrap("  (c 1 constructor)\n  (g 1 defined)\n",
                                  "  (VAR x:univ)\n  c(x) -> g(x) [true]\n")),
                  CtrsParseError);
  CHECK_THROWS_AS(parse_ctrs(wrap("  (f 1 defined)\n  (g 1 defined)\n",
                                  "  (VAR x:univ)\n  f(x -> g(x) [true]\n")),
                  CtrsParseError);
  CHECK_THROWS_AS(parse_ctrs(wrap("  (f 1 defined)\n",
                                  "  (VAR x:univ)\n  f(x) -> h(x) [true]\n")),
                  CtrsParseError);
  CHECK_THROWS_AS(parse_ctrs(wrap("  (f 1 defined)\n  (g 1 defined)\n",
                                  "  (VAR f:int)\n  f(f) -> g(f) [true]\n")),
                  CtrsParseError);
}

TEST_CASE("constraints round-trip with precedence intact") {
  std::string text =
      "(SORTS int bool univ)\n(SIG\n  (f 1 defined)\n  (g 1 defined)\n)\n(RULES\n"
      "  (VAR x:int y:int b:bool)\n"
      "  f(x) -> g(y) [x + -2 >= y /\\ (b = true \\/ x != 3) /\\ not y = -7]\n)\n";
  Ctrs c = parse_ctrs(text);
  REQUIRE(c.rules.size() == 1);
  const Term& phi = c.rules[0].constraint;
  REQUIRE(phi.name == "/\\");
  CHECK(phi.args[1].name == "not");

  std::string again = render_ctrs(c);
  Ctrs c2 = parse_ctrs(again);
  CHECK(c2.rules[0].constraint == phi);
  CHECK(render_ctrs(c2) == again);
}
