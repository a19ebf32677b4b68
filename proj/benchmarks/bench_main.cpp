#include <benchmark/benchmark.h>

#include "jbc/cgraph.hpp"
#include "jbc/ctrs.hpp"
#include "jbc/heapliteral.hpp"
#include "jbc/parser.hpp"
#include "jbc/rewriter.hpp"
#include "jbc/vm.hpp"

#include <fstream>
#include <sstream>

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(JBC_CORPUS_DIR) + "/" + name);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const std::string& append_text() {
  static std::string text = slurp("append.jbc");
  return text;
}

jbc::Value list_of(jbc::LiteralBuilder& b, int cells) {
  std::string lit = "null";
  for (int i = cells; i >= 1; --i)
    lit = "List{val: " + std::to_string(i) + ", next: " + lit + "}";
  return b.parse(lit);
}

void bm_parse(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(jbc::parse_program(append_text()));
}
BENCHMARK(bm_parse);

void bm_run(benchmark::State& state) {
  jbc::Program p = jbc::parse_program(append_text());
  for (auto _ : state) {
    jbc::LiteralBuilder b(p);
    jbc::Value self = list_of(b, static_cast<int>(state.range(0)));
    jbc::Value ys = b.parse("List{val: 9, next: null}");
    jbc::JvmState s0 =
        jbc::initial_state(p, "List", "append", {self, ys}, b.heap(), b.next_addr());
    benchmark::DoNotOptimize(jbc::run(p, s0, 100000));
  }
}
BENCHMARK(bm_run)->Arg(1)->Arg(4)->Arg(16);

void bm_build_graph(benchmark::State& state) {
  jbc::Program p = jbc::parse_program(append_text());
  for (auto _ : state) {
    jbc::AnalysisContext ctx;
    ctx.prog = &p;
    jbc::AbstractState init = jbc::initial_abstract_state(
        ctx, "List", "append",
        {jbc::parse_assumption("acyclic:this"), jbc::parse_assumption("unshared:this,ys")},
        true);
    benchmark::DoNotOptimize(jbc::build_graph(ctx, init, jbc::BuildLimits{}));
  }
}
BENCHMARK(bm_build_graph);

void bm_join(benchmark::State& state) {
  jbc::Program p = jbc::parse_program(append_text());
  jbc::AnalysisContext ctx;
  ctx.prog = &p;
  jbc::AbstractState init = jbc::initial_abstract_state(
      ctx, "List", "append",
      {jbc::parse_assumption("acyclic:this"), jbc::parse_assumption("unshared:this,ys")}, true);
  for (auto _ : state) benchmark::DoNotOptimize(jbc::join_states(ctx, init, init));
}
BENCHMARK(bm_join);

void bm_simulate(benchmark::State& state) {
  jbc::Program p = jbc::parse_program(append_text());
  jbc::AnalysisContext ctx;
  ctx.prog = &p;
  jbc::AbstractState init = jbc::initial_abstract_state(
      ctx, "List", "append",
      {jbc::parse_assumption("acyclic:this"), jbc::parse_assumption("unshared:this,ys")}, true);
  jbc::BuildResult res = jbc::build_graph(ctx, init, jbc::BuildLimits{});
  jbc::Ctrs c = jbc::emit_ctrs(ctx, res.graph);
  for (auto _ : state) {
    jbc::LiteralBuilder b(p);
    jbc::Value self = list_of(b, static_cast<int>(state.range(0)));
    jbc::Value ys = b.parse("List{val: 9, next: null}");
    jbc::JvmState s0 =
        jbc::initial_state(p, "List", "append", {self, ys}, b.heap(), b.next_addr());
    jbc::RunResult r = jbc::run(p, s0, 100000);
    benchmark::DoNotOptimize(jbc::simulate_run(ctx, res.graph, c, r));
  }
}
BENCHMARK(bm_simulate)->Arg(2)->Arg(8);

} // namespace

BENCHMARK_MAIN();
