#include "doctest.h"

#include "../helpers.hpp"

#include "jbc/cgraph.hpp"
#include "jbc/heapliteral.hpp"

#include <algorithm>
#include <set>
#include <utility>

using namespace jbc;

namespace {

using EdgeSet = std::set<std::pair<int, int>>;

EdgeSet edges_of_kind(const CGraph& g, EdgeKind k) {
  EdgeSet out;
  for (const auto& e : g.edges)
    if (e.kind == k) out.insert({e.from, e.to});
  return out;
}

BuildResult build_corpus(const std::string& file, const std::string& cls,
                         const std::string& method, const std::vector<std::string>& assume,
                         bool this_nonnull, Program& p, const BuildLimits& limits = {}) {
  p = jbctest::load(file);
  std::vector<Assumption> assumptions;
  for (const auto& a : assume) assumptions.push_back(parse_assumption(a));
  AnalysisContext ctx{&p, {}};
  AbstractState init = initial_abstract_state(ctx, cls, method, assumptions, this_nonnull);
  return build_graph(ctx, init, limits);
}

} // namespace

TEST_CASE("assumption strings parse or are rejected") {
  Assumption a = parse_assumption("acyclic:this");
  CHECK(a.kind == Assumption::Kind::Acyclic);
  CHECK(a.roots == std::vector<std::string>{"this"});

  Assumption u = parse_assumption("unshared:this,ys");
  CHECK(u.kind == Assumption::Kind::Unshared);
  CHECK(u.roots == std::vector<std::string>{"this", "ys"});

  CHECK_THROWS_AS(parse_assumption("frozen:this"), std::runtime_error);
  CHECK_THROWS_AS(parse_assumption("acyclic"), std::runtime_error);
  CHECK_THROWS_AS(parse_assumption("acyclic:this,ys"), std::runtime_error);
  CHECK_THROWS_AS(parse_assumption("unshared:this,"), std::runtime_error);
}

TEST_CASE("the entry abstraction reflects the assumptions") {
  Program p = jbctest::load("append.jbc");

  SUBCASE("assumptions mark flags, regions, and distinctness") {
    AnalysisContext ctx{&p, {}};
    std::vector<Assumption> assumptions{parse_assumption("acyclic:this"),
                                        parse_assumption("unshared:this,ys")};
    AbstractState s = initial_abstract_state(ctx, "List", "append", assumptions, true);

    REQUIRE(s.frames.size() == 1);
    CHECK(s.frames[0].pc == 0);
    CHECK(s.frames[0].stack.empty());
    CHECK(s.frames[0].regs ==
          std::vector<AbsValue>{Addr{1}, Addr{3}, Unit{}});
    REQUIRE(s.heap.at(1).is_instance);
    CHECK(s.heap.at(1).fields[0] == AbsValue{Addr{2}});
    CHECK(std::holds_alternative<IntVar>(s.heap.at(1).fields[1]));
    CHECK(!s.heap.at(2).is_instance);
    CHECK(!s.heap.at(3).is_instance);
    CHECK(s.tags.at(1) == 0x1);
    CHECK(s.tags.at(2) == 0x1);
    CHECK(s.tags.at(3) == 0x2);
    CHECK(s.flags == std::set<std::uint32_t>{1, 2});
    CHECK(s.iu == std::set<std::pair<std::uint32_t, std::uint32_t>>{{1, 3}, {2, 3}});
    CHECK(ctx.disjoint_regions ==
          std::vector<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}});
  }
  SUBCASE("without the receiver pin, this stays open") {
    AnalysisContext ctx{&p, {}};
    AbstractState s = initial_abstract_state(ctx, "List", "append", {}, false);
    CHECK(!s.heap.at(1).is_instance);
    CHECK(s.frames[0].regs[0] == AbsValue{Addr{1}});
    CHECK(s.iu.empty());
    CHECK(s.flags.empty());
  }
  SUBCASE("assumptions must name real parameters") {
    AnalysisContext ctx{&p, {}};
    CHECK_THROWS_AS(
        initial_abstract_state(ctx, "List", "append", {parse_assumption("acyclic:zs")}, true),
        std::runtime_error);
  }
}

TEST_CASE("assumption checking vets concrete entry states") {
  Program p = jbctest::load("append.jbc");
  auto entry = [&](const std::string& xs, const std::string& ys) {
    LiteralBuilder builder(p);
    std::vector<Value> args{builder.parse(xs), builder.parse(ys)};
    return initial_state(p, "List", "append", args, builder.heap(), builder.next_addr());
  };
  std::vector<Assumption> assumptions{parse_assumption("acyclic:this"),
                                      parse_assumption("unshared:this,ys")};

  CHECK(check_assumptions(p, entry(jbctest::list_literal(2), "null"), assumptions).empty());
  CHECK(check_assumptions(p, entry("null", "null"), assumptions).empty());
  CHECK(!check_assumptions(p, entry("#1 List{next: @1, val: 0}", "null"), assumptions).empty());
  CHECK(!check_assumptions(
             p, entry("List{next: #2 List{next: null, val: 2}, val: 1}", "@2"), assumptions)
             .empty());
}

TEST_CASE("the list-append graph closes into the textbook shape") {
  Program p;
  BuildResult r = build_corpus("append.jbc", "List", "append",
                               {"acyclic:this", "unshared:this,ys"}, true, p);
  REQUIRE(!r.hit_limit);
  const CGraph& g = r.graph;
  CHECK(g.nodes.size() == 38);
  CHECK(g.edges.size() == 40);
  CHECK(g.entry == 0);

  std::vector<int> widened;
  for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
    if (g.nodes[i].widened) widened.push_back(i);
  CHECK(widened == std::vector<int>{5});
  CHECK(g.nodes[5].state.frames[0].pc == 4);

  CHECK(edges_of_kind(g, EdgeKind::Eval).size() == 30);
  CHECK(edges_of_kind(g, EdgeKind::Refine) ==
        EdgeSet{{8, 9}, {8, 18}, {24, 25}, {24, 34}, {25, 26}, {25, 30}});
  CHECK(edges_of_kind(g, EdgeKind::Instance) ==
        EdgeSet{{4, 5}, {17, 5}, {33, 29}, {37, 29}});

  CHECK(g.out_edges(8).size() == 2);
  CHECK(g.in_edges(5).size() == 2);
}

TEST_CASE("loops and dynamic dispatch still close finitely") {
  Program p;
  BuildResult loop = build_corpus("loop.jbc", "Loop", "spin", {}, false, p);
  REQUIRE(!loop.hit_limit);
  CHECK(loop.graph.nodes.size() == 6);
  CHECK(loop.graph.edges.size() == 6);
  CHECK(edges_of_kind(loop.graph, EdgeKind::Instance) == EdgeSet{{5, 0}});
  CHECK(std::none_of(loop.graph.nodes.begin(), loop.graph.nodes.end(),
                     [](const CNode& n) { return n.widened; }));

  Program d;
  BuildResult main = build_corpus("dispatch.jbc", "C", "main", {}, false, d);
  REQUIRE(!main.hit_limit);
  CHECK(main.graph.nodes.size() == 15);
  CHECK(main.graph.edges.size() == 15);

  BuildResult call = build_corpus("dispatch.jbc", "C", "call", {}, false, d);
  REQUIRE(!call.hit_limit);
  CHECK(call.graph.nodes.size() == 18);
  CHECK(call.graph.edges.size() == 18);
}

TEST_CASE("construction limits cut the search off cleanly") {
  Program p;
  BuildResult nodes = build_corpus("append.jbc", "List", "append",
                                   {"acyclic:this", "unshared:this,ys"}, true, p,
                                   BuildLimits{5, 100000});
  CHECK(nodes.hit_limit);
  CHECK(nodes.limit_kind == "nodes");

  BuildResult depth = build_corpus("append.jbc", "List", "append",
                                   {"acyclic:this", "unshared:this,ys"}, true, p,
                                   BuildLimits{10000, 3});
  CHECK(depth.hit_limit);
  CHECK(depth.limit_kind == "depth");
}

TEST_CASE("concrete runs replay through the graph") {
  Program p = jbctest::load("append.jbc");
  AnalysisContext ctx{&p, {}};
  std::vector<Assumption> assumptions{parse_assumption("acyclic:this"),
                                      parse_assumption("unshared:this,ys")};
  AbstractState init = initial_abstract_state(ctx, "List", "append", assumptions, true);
  CGraph g = build_graph(ctx, init).graph;

  auto entry = [&](const std::string& xs, const std::string& ys) {
    LiteralBuilder builder(p);
    std::vector<Value> args{builder.parse(xs), builder.parse(ys)};
    return initial_state(p, "List", "append", args, builder.heap(), builder.next_addr());
  };

  SUBCASE("a one-cell run crosses sixteen evaluation steps") {
    RunResult rr = run(p, entry(jbctest::list_literal(1), "null"), 1000);
    REQUIRE(rr.halted);
    TraceResult t = trace_concrete(ctx, g, rr);
    REQUIRE(t.ok);
    REQUIRE(t.step_edges.size() == 16);
    std::size_t total = 0;
    for (const auto& grp : t.step_edges) {
      CHECK(!grp.empty());
      total += grp.size();
    }
    CHECK(total == 19);
    // the widening hop rides along with the fifth step
    CHECK(t.step_edges[4].size() == 2);
    CHECK(g.edges[t.step_edges[4][0]].kind == EdgeKind::Instance);
  }
  SUBCASE("a failing run is walked into the failure node") {
    AnalysisContext open_ctx{&p, {}};
    AbstractState open_init = initial_abstract_state(open_ctx, "List", "append", {}, false);
    CGraph open_g = build_graph(open_ctx, open_init).graph;
    RunResult rr = run(p, entry("null", "null"), 1000);
    REQUIRE(!rr.halted);
    TraceResult t = trace_concrete(open_ctx, open_g, rr);
    REQUIRE(t.ok);
    // one group per step, plus a final group for the failing field access
    REQUIRE(t.step_edges.size() == 6);
    int last_edge = t.step_edges.back().back();
    CHECK(open_g.nodes[open_g.edges[last_edge].to].state.kind ==
          AbstractState::Kind::Failed);
  }
  SUBCASE("a run from another program does not fit") {
    Program lp = jbctest::load("loop.jbc");
    JvmState s0 = initial_state(lp, "Loop", "spin", {Value{Null{}}}, {}, 1);
    RunResult rr = run(lp, s0, 10);
    TraceResult t = trace_concrete(ctx, g, rr);
    CHECK(!t.ok);
    CHECK(!t.error.empty());
  }
}

TEST_CASE("exports carry the graph structure") {
  Program p;
  BuildResult r = build_corpus("append.jbc", "List", "append",
                               {"acyclic:this", "unshared:this,ys"}, true, p);
  std::string dot = export_dot(r.graph);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("peripheries=2") != std::string::npos);
  CHECK(dot.find("dashed") != std::string::npos);
  CHECK(dot.find("dotted") != std::string::npos);

  std::string dump = dump_graph(r.graph);
  CHECK(dump.find("38 node(s), 40 edge(s), entry f_0") != std::string::npos);
  CHECK(dump.find("(widened)") != std::string::npos);
  CHECK(dump.find("f_4 -instance-> f_5") != std::string::npos);
  CHECK(dump.find("distinct: (o1,o3) (o2,o3)") != std::string::npos);
}
