#include "CLI11.hpp"

#include "jbc/cgraph.hpp"
#include "jbc/ctrs.hpp"
#include "jbc/heapliteral.hpp"
#include "jbc/parser.hpp"
#include "jbc/rewriter.hpp"
#include "jbc/vm.hpp"
#include "jbc/wellformed.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitIo = 1;
constexpr int kExitVerify = 2;
constexpr int kExitLimit = 3;
constexpr int kExitViolation = 4;

struct CmdError {
  int code;
  std::string msg;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CmdError{kExitIo, "cannot read " + path};
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CmdError{kExitIo, "cannot write " + path};
  out << content;
}

jbc::Program load_program(const std::string& path) {
  std::string text = read_file(path);
  jbc::Program p;
  try {
    p = jbc::parse_program(text);
  } catch (const jbc::ParseError& e) {
    throw CmdError{kExitVerify, std::string("parse error: ") + e.what()};
  }
  auto diags = jbc::check_wellformed(p);
  if (!diags.empty()) {
    std::ostringstream msg;
    msg << "program is not well-formed:";
    for (const auto& d : diags) msg << "\n  " << jbc::render_diag(d);
    throw CmdError{kExitVerify, msg.str()};
  }
  return p;
}

std::pair<std::string, std::string> split_entry(const std::string& entry) {
  auto dot = entry.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 >= entry.size())
    throw CmdError{kExitIo, "--entry wants Class.method, got '" + entry + "'"};
  return {entry.substr(0, dot), entry.substr(dot + 1)};
}

std::vector<jbc::Assumption> parse_assumptions(const std::vector<std::string>& raw) {
  std::vector<jbc::Assumption> out;
  for (const auto& a : raw) {
    try {
      out.push_back(jbc::parse_assumption(a));
    } catch (const std::runtime_error& e) {
      throw CmdError{kExitIo, std::string("bad --assume: ") + e.what()};
    }
  }
  return out;
}

jbc::JvmState concrete_initial(const jbc::Program& p, const std::string& cls,
                               const std::string& method,
                               const std::vector<std::string>& arg_texts) {
  jbc::LiteralBuilder builder(p);
  std::vector<jbc::Value> args;
  for (const auto& t : arg_texts) {
    try {
      args.push_back(builder.parse(t));
    } catch (const jbc::LiteralError& e) {
      throw CmdError{kExitVerify, std::string("bad --arg '") + t + "': " + e.what()};
    }
  }
  try {
    return jbc::initial_state(p, cls, method, args, builder.heap(), builder.next_addr());
  } catch (const std::runtime_error& e) {
    throw CmdError{kExitVerify, e.what()};
  }
}

struct GraphBundle {
  jbc::AnalysisContext ctx;
  jbc::AbstractState init;
  jbc::CGraph graph;
};

GraphBundle analyze(const jbc::Program& p, const std::string& cls, const std::string& method,
                    const std::vector<jbc::Assumption>& assumptions, bool this_nonnull) {
  GraphBundle b;
  b.ctx.prog = &p;
  try {
    b.init = jbc::initial_abstract_state(b.ctx, cls, method, assumptions, this_nonnull);
  } catch (const std::runtime_error& e) {
    throw CmdError{kExitVerify, e.what()};
  }
  jbc::BuildResult res = jbc::build_graph(b.ctx, b.init, jbc::BuildLimits{});
  if (res.hit_limit)
    throw CmdError{kExitLimit, "analysis limit reached (" + res.limit_kind + ")"};
  b.graph = std::move(res.graph);
  return b;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"bytecode analysis: concrete runs, computation graphs, constrained rewriting"};
  app.require_subcommand(1);

  std::string file, entry, out_path, dot_path, dump_path, ctrs_path;
  std::vector<std::string> arg_texts, assume_texts;
  long long fuel = 100000;
  bool this_nonnull = false;

  auto add_common = [&](CLI::App* cmd, bool needs_entry) {
    cmd->add_option("file", file, "bytecode file")->required();
    if (needs_entry)
      cmd->add_option("--entry", entry, "entry point, Class.method")->required();
  };

  CLI::App* cmd_parse = app.add_subcommand("parse", "parse, check, and reprint a program");
  add_common(cmd_parse, false);
  cmd_parse->add_option("-o", out_path, "write the canonical form here");

  CLI::App* cmd_run = app.add_subcommand("run", "execute an entry point");
  add_common(cmd_run, true);
  cmd_run->add_option("--arg", arg_texts, "argument literal (this first, then parameters)");
  cmd_run->add_option("--fuel", fuel, "step budget")->check(CLI::PositiveNumber);

  CLI::App* cmd_graph = app.add_subcommand("graph", "build the computation graph");
  add_common(cmd_graph, true);
  cmd_graph->add_option("--assume", assume_texts, "acyclic:NAME or unshared:N1,N2,...");
  cmd_graph->add_flag("--this-nonnull", this_nonnull, "treat the receiver as a known object");
  cmd_graph->add_option("--dot", dot_path, "write a graphviz rendering here");
  cmd_graph->add_option("--dump", dump_path, "write the full node listing here");

  CLI::App* cmd_ctrs = app.add_subcommand("ctrs", "emit the rewrite system of the graph");
  add_common(cmd_ctrs, true);
  cmd_ctrs->add_option("--assume", assume_texts, "acyclic:NAME or unshared:N1,N2,...");
  cmd_ctrs->add_flag("--this-nonnull", this_nonnull, "treat the receiver as a known object");
  cmd_ctrs->add_option("-o", out_path, "write the system here");

  CLI::App* cmd_sim = app.add_subcommand("simulate", "replay a concrete run through the rules");
  add_common(cmd_sim, true);
  cmd_sim->add_option("--arg", arg_texts, "argument literal (this first, then parameters)");
  cmd_sim->add_option("--assume", assume_texts, "acyclic:NAME or unshared:N1,N2,...");
  cmd_sim->add_option("--fuel", fuel, "step budget")->check(CLI::PositiveNumber);
  cmd_sim->add_flag("--this-nonnull", this_nonnull, "treat the receiver as a known object");
  cmd_sim->add_option("--ctrs", ctrs_path, "verify against this system instead of a fresh one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitIo;
  }

  try {
    if (app.got_subcommand(cmd_parse)) {
      jbc::Program p = load_program(file);
      std::string text = jbc::render_program(p);
      if (!out_path.empty()) write_file(out_path, text);
      else std::cout << text;
      int methods = 0;
      for (const auto& c : p.classes) methods += static_cast<int>(c.methods.size());
      std::cerr << p.classes.size() << " class(es), " << methods << " method(s)\n";
      return 0;
    }

    auto [cls, method] = split_entry(entry);

    if (app.got_subcommand(cmd_run)) {
      jbc::Program p = load_program(file);
      jbc::JvmState s0 = concrete_initial(p, cls, method, arg_texts);
      jbc::RunResult r = jbc::run(p, s0, fuel);
      std::cout << "m = " << r.steps << "\n";
      if (r.halted)
        std::cout << "outcome: halted with " << jbc::render_value(r.ret) << "\n";
      else
        std::cout << "outcome: failed (" << jbc::fail_reason_name(r.reason) << ")\n";
      std::cout << "final state:\n" << jbc::render_jvm_state(r.trace.back());
      return 0;
    }

    if (app.got_subcommand(cmd_graph)) {
      jbc::Program p = load_program(file);
      auto assumptions = parse_assumptions(assume_texts);
      GraphBundle b = analyze(p, cls, method, assumptions, this_nonnull);
      std::cout << "nodes = " << b.graph.nodes.size() << "\n";
      std::cout << "edges = " << b.graph.edges.size() << "\n";
      std::cout << "entry = f_" << b.graph.entry << "\n";
      if (!dot_path.empty()) write_file(dot_path, jbc::export_dot(b.graph));
      if (!dump_path.empty()) write_file(dump_path, jbc::dump_graph(b.graph));
      return 0;
    }

    if (app.got_subcommand(cmd_ctrs)) {
      jbc::Program p = load_program(file);
      auto assumptions = parse_assumptions(assume_texts);
      GraphBundle b = analyze(p, cls, method, assumptions, this_nonnull);
      jbc::Ctrs c = jbc::emit_ctrs(b.ctx, b.graph);
      std::string text = jbc::render_ctrs(c);
      if (!out_path.empty()) write_file(out_path, text);
      else std::cout << text;
      std::cerr << c.rules.size() << " rule(s) over " << b.graph.nodes.size() << " node(s)\n";
      return 0;
    }

    if (app.got_subcommand(cmd_sim)) {
      jbc::Program p = load_program(file);
      auto assumptions = parse_assumptions(assume_texts);
      jbc::JvmState s0 = concrete_initial(p, cls, method, arg_texts);
      std::string bad = jbc::check_assumptions(p, s0, assumptions);
      if (!bad.empty()) throw CmdError{kExitVerify, "arguments violate assumptions: " + bad};
      GraphBundle b = analyze(p, cls, method, assumptions, this_nonnull);
      jbc::Ctrs c;
      if (!ctrs_path.empty()) {
        try {
          c = jbc::parse_ctrs(read_file(ctrs_path));
        } catch (const jbc::CtrsParseError& e) {
          throw CmdError{kExitVerify, std::string("bad --ctrs file: ") + e.what()};
        }
      } else {
        c = jbc::emit_ctrs(b.ctx, b.graph);
      }
      jbc::RunResult r = jbc::run(p, s0, fuel);
      jbc::SimReport rep = jbc::simulate_run(b.ctx, b.graph, c, r);
      if (!rep.ok) throw CmdError{kExitViolation, "simulation failed: " + rep.error};
      for (const auto& line : rep.lines) std::cout << line << "\n";
      std::cout << "m = " << rep.m << "\n";
      std::cout << "L = " << rep.L << "\n";
      std::cout << "K = " << rep.K << "\n";
      std::cout << "counts =";
      for (int k : rep.counts) std::cout << " " << k;
      std::cout << "\n";
      return 0;
    }
  } catch (const CmdError& e) {
    std::cerr << "error: " << e.msg << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitIo;
}
