#include "doctest.h"

#include "../helpers.hpp"

#include "jbc/heapliteral.hpp"
#include "jbc/rewriter.hpp"

#include <algorithm>

using namespace jbc;

namespace {

Term uv(const std::string& n) { return Term::var(n, Sort::Univ); }
Term ivar(const std::string& n) { return Term::var(n, Sort::Int); }

Term cell(Term next, int val) {
  return Term::app("List", {std::move(next), Term::int_lit(val)});
}

struct AppendSetup {
  Program p;
  AnalysisContext ctx{nullptr, {}};
  CGraph g;
  Ctrs ctrs;

  explicit AppendSetup(bool with_assumptions = true) {
    p = jbctest::load("append.jbc");
    ctx.prog = &p;
    std::vector<Assumption> assumptions;
    if (with_assumptions) {
      assumptions.push_back(parse_assumption("acyclic:this"));
      assumptions.push_back(parse_assumption("unshared:this,ys"));
    }
    AbstractState init =
        initial_abstract_state(ctx, "List", "append", assumptions, with_assumptions);
    g = build_graph(ctx, init).graph;
    ctrs = emit_ctrs(ctx, g);
  }

  RunResult run_entry(const std::string& xs, const std::string& ys) {
    LiteralBuilder builder(p);
    std::vector<Value> args{builder.parse(xs), builder.parse(ys)};
    return run(p, initial_state(p, "List", "append", args, builder.heap(), builder.next_addr()),
               1000);
  }
};

} // namespace

TEST_CASE("matching is sorted and non-linear") {
  Term one_cell = cell(Term::null_sym(), 1);

  SUBCASE("variables take subjects of their own sort only") {
    CHECK(match_term(uv("x"), one_cell).has_value());
    CHECK(match_term(uv("x"), Term::null_sym()).has_value());
    CHECK(!match_term(uv("x"), Term::int_lit(3)).has_value());
    CHECK(match_term(ivar("i"), Term::int_lit(5)).has_value());
    CHECK(!match_term(ivar("i"), Term::bool_lit(true)).has_value());
    CHECK(!match_term(ivar("i"), one_cell).has_value());
    CHECK(match_term(Term::var("b", Sort::Bool), Term::bool_lit(false)).has_value());
  }
  SUBCASE("repeated variables want equal subjects") {
    Term pat = Term::app("f", {uv("x"), uv("x")});
    CHECK(match_term(pat, Term::app("f", {one_cell, one_cell})).has_value());
    CHECK(!match_term(pat, Term::app("f", {Term::null_sym(), one_cell})).has_value());
  }
  SUBCASE("structure must agree") {
    Term pat = cell(uv("x"), 1);
    auto b = match_term(pat, one_cell);
    REQUIRE(b.has_value());
    CHECK(b->at("x") == Term::null_sym());
    CHECK(!match_term(pat, cell(Term::null_sym(), 2)).has_value());
    CHECK(!match_term(pat, Term::app("Tree", {Term::null_sym(), Term::int_lit(1)}))
               .has_value());
    CHECK(!match_term(pat, uv("l3")).has_value());
    CHECK(match_term(uv("x"), uv("l3")).has_value());
  }
  SUBCASE("bindings substitute and leave strangers alone") {
    Binding b{{"x", Term::null_sym()}, {"i", Term::int_lit(3)}};
    Term t = Term::app("f", {cell(uv("x"), 7), ivar("i"), uv("y")});
    Term out = apply_binding(t, b);
    CHECK(out.args[0] == cell(Term::null_sym(), 7));
    CHECK(out.args[1] == Term::int_lit(3));
    CHECK(out.args[2] == uv("y"));
  }
}

TEST_CASE("ground constraints evaluate over the theory") {
  auto geq = [](Term a, Term b) { return Term::app(">=", {std::move(a), std::move(b)}); };
  Term sum = Term::app("+", {Term::int_lit(3), Term::int_lit(-1)});
  CHECK(eval_constraint(geq(sum, Term::int_lit(2))));
  CHECK(!eval_constraint(geq(Term::int_lit(1), Term::int_lit(2))));

  Term same = Term::app("=", {cell(Term::null_sym(), 1), cell(Term::null_sym(), 1)});
  CHECK(eval_constraint(same));
  CHECK(!eval_constraint(Term::app("!=", {cell(Term::null_sym(), 1), cell(Term::null_sym(), 1)})));

  Term both = Term::app("/\\", {Term::bool_lit(true), Term::bool_lit(false)});
  CHECK(!eval_constraint(both));
  CHECK(eval_constraint(Term::app("\\/", {both, Term::app("not", {both})})));

  CHECK(!eval_constraint(Term::int_lit(3)));
  CHECK_THROWS_AS(eval_constraint(geq(uv("x"), Term::int_lit(0))), std::runtime_error);
  CHECK_THROWS_AS(eval_constraint(geq(Term::bool_lit(true), Term::int_lit(0))),
                  std::runtime_error);
}

TEST_CASE("single steps verify against the emitted system") {
  AppendSetup s;
  Term from = Term::app("f_0", {cell(Term::null_sym(), 1), Term::null_sym(), Term::null_sym()});
  Term to = Term::app("f_1", {cell(Term::null_sym(), 1), cell(Term::null_sym(), 1),
                              Term::null_sym(), Term::null_sym()});
  auto rule = verify_step(s.ctrs, from, to);
  REQUIRE(rule.has_value());
  CHECK(*rule == 0);

  Term wrong = Term::app("f_2", {cell(Term::null_sym(), 1), Term::null_sym(),
                                 cell(Term::null_sym(), 1)});
  CHECK(!verify_step(s.ctrs, from, wrong).has_value());
}

TEST_CASE("concrete runs rewrite step for step") {
  AppendSetup s;

  SUBCASE("short lists") {
    RunResult one = s.run_entry(jbctest::list_literal(1), "null");
    SimReport r = simulate_run(s.ctx, s.g, s.ctrs, one);
    REQUIRE(r.ok);
    CHECK(r.m == 16);
    CHECK(r.L == 19);
    CHECK(r.K == 2);
    REQUIRE(r.counts.size() == 16);
    CHECK(*std::min_element(r.counts.begin(), r.counts.end()) == 1);
    CHECK(r.lines.size() == 19);
    CHECK(r.lines[0].find("f_0(List(null, 1), null, null) -> f_1(") == 0);
    CHECK(r.lines[0].find("; rule 0") != std::string::npos);

    RunResult two = s.run_entry(jbctest::list_literal(2), "List{next: null, val: 9}");
    SimReport r2 = simulate_run(s.ctx, s.g, s.ctrs, two);
    REQUIRE(r2.ok);
    CHECK(r2.m == 27);
    CHECK(r2.L == 33);
    CHECK(r2.K == 3);
  }
  SUBCASE("a failing run ends in the failure symbol") {
    AppendSetup open(false);
    RunResult rr = open.run_entry("null", "null");
    SimReport r = simulate_run(open.ctx, open.g, open.ctrs, rr);
    REQUIRE(r.ok);
    CHECK(r.m == 5);
    CHECK(r.L == 8);
    CHECK(r.K == 2);
    CHECK(r.counts == std::vector<int>{1, 1, 1, 1, 2, 2});
    CHECK(r.lines.back().find("-> f_fail") != std::string::npos);
  }
  SUBCASE("a broken rule is caught") {
    AppendSetup broken;
    for (auto& rule : broken.ctrs.rules) {
      if (rule.lhs.name == "f_4" && rule.rhs.name == "f_5") {
        std::swap(rule.rhs.args[0], rule.rhs.args[1]);
        break;
      }
    }
    RunResult rr = broken.run_entry(jbctest::list_literal(1), "null");
    SimReport r = simulate_run(broken.ctx, broken.g, broken.ctrs, rr);
    CHECK(!r.ok);
    CHECK(r.error.find("no rule rewrites") != std::string::npos);
  }
}

TEST_CASE("default pools cover scalars and shallow structure") {
  AppendSetup s;
  Pool pool = default_pool(s.ctrs);
  CHECK(pool.ints.size() == 5);
  CHECK(std::count(pool.ints.begin(), pool.ints.end(), Term::int_lit(0)) == 1);
  CHECK(pool.bools.size() == 2);
  REQUIRE(!pool.univs.empty());
  CHECK(pool.univs.front() == Term::null_sym());
  CHECK(std::count(pool.univs.begin(), pool.univs.end(), cell(Term::null_sym(), 1)) >= 1);
  CHECK(pool.univs.size() > 64);
}

TEST_CASE("derivation explores ground rewrites") {
  SUBCASE("a straight rule fires once") {
    Ctrs c = parse_ctrs(
        "(SORTS int bool univ)\n(SIG\n  (f 1 defined)\n  (g 1 defined)\n)\n(RULES\n"
        "  (VAR x:univ)\n  f(x) -> g(x) [true]\n)\n");
    DeriveReport r = derive(c, Term::app("f", {Term::null_sym()}), 100, default_pool(c));
    CHECK(r.longest == 1);
    CHECK(!r.exhausted);
    CHECK(r.max_branching == 1);
  }
  SUBCASE("alternatives count as branching") {
    Ctrs c = parse_ctrs(
        "(SORTS int bool univ)\n(SIG\n  (f 1 defined)\n  (g 1 defined)\n  (h 1 defined)\n)\n"
        "(RULES\n  (VAR x:univ)\n  f(x) -> g(x) [true]\n"
        "  (VAR x:univ)\n  f(x) -> h(x) [true]\n)\n");
    DeriveReport r = derive(c, Term::app("f", {Term::null_sym()}), 100, default_pool(c));
    CHECK(r.longest == 1);
    CHECK(r.max_branching == 2);
  }
  SUBCASE("free right-hand variables draw from the pool under the constraint") {
    Ctrs c = parse_ctrs(
        "(SORTS int bool univ)\n(SIG\n  (f 1 defined)\n  (g 1 defined)\n)\n(RULES\n"
        "  (VAR x:univ y:int)\n  f(x) -> g(y) [y >= 1 /\\ 2 >= y]\n)\n");
    DeriveReport r = derive(c, Term::app("f", {Term::null_sym()}), 100, default_pool(c));
    CHECK(r.longest == 1);
    CHECK(r.max_branching == 2);
  }
  SUBCASE("fuel cuts endless loops") {
    Program p = jbctest::load("loop.jbc");
    AnalysisContext ctx{&p, {}};
    AbstractState init = initial_abstract_state(ctx, "Loop", "spin", {}, false);
    CGraph g = build_graph(ctx, init).graph;
    Ctrs c = emit_ctrs(ctx, g);
    DeriveReport r = derive(c, Term::app("f_0", {Term::null_sym()}), 200, default_pool(c));
    CHECK(r.exhausted);
    CHECK(r.longest == 200);
    CHECK(r.max_branching == 1);
  }
}
