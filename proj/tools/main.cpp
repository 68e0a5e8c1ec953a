#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vc/analysis.hpp"
#include "vc/bench.hpp"
#include "vc/circuit.hpp"
#include "vc/costmodel.hpp"
#include "vc/interp.hpp"
#include "vc/kernels.hpp"
#include "vc/parser.hpp"
#include "vc/pipeliner.hpp"
#include "vc/sim.hpp"
#include "vc/transforms.hpp"

namespace {

using nlohmann::json;

struct Options {
  std::string kernel;
  std::string ir_file;
  std::string config;
  std::string latency_file;
  std::string trace_path;
  std::string json_path;
  long n = 0;
  int unroll_factor = 1;
  int depth = 8;
  unsigned seed = 0;
  bool reassociate = false;
  bool pipeline = false;
  bool aggressive = false;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--kernel", o.kernel,
                  "built-in kernel: dotp, fft, matmul, stream");
  sub->add_option("--ir-file", o.ir_file, "kernel-IR source file");
  sub->add_option("--n", o.n, "problem size (default: per-kernel scale)");
  sub->add_option("--config", o.config,
                  "plain | pipelined | unrolled | both (overrides flags)");
  sub->add_option("--unroll-factor", o.unroll_factor, "static unroll factor");
  sub->add_flag("--reassociate", o.reassociate,
                "regroup unrolled accumulations into a balanced tree");
  sub->add_flag("--pipeline", o.pipeline, "apply dynamic loop pipelining");
  sub->add_option("--depth", o.depth, "pipeline depth M (default 8)");
  sub->add_flag("--aggressive", o.aggressive,
                "matmul only: use the 4x4 tiled variant");
  sub->add_option("--latency-file", o.latency_file, "latency config file");
  sub->add_option("--seed", o.seed, "input seed (default 0)");
}

struct Diagnostics : std::runtime_error {
  using std::runtime_error::runtime_error;
};

vc::Program load_program(const Options& o) {
  if (!o.ir_file.empty()) {
    std::ifstream f(o.ir_file);
    if (!f) throw Diagnostics("cannot read " + o.ir_file);
    std::stringstream ss;
    ss << f.rdbuf();
    vc::ParseResult pr = vc::parse_program(ss.str());
    for (const auto& d : pr.diags) std::cerr << to_json_line(d) << '\n';
    if (!pr.ok()) throw Diagnostics("parse failed: " + o.ir_file);
    return pr.program;
  }
  if (o.kernel.empty()) throw Diagnostics("need --kernel or --ir-file");
  long n = o.n > 0 ? o.n : vc::default_scale(o.kernel);
  return vc::make_kernel(o.kernel, n, o.aggressive);
}

// One named transform/pipeline setting.
struct Config {
  std::string name;
  int unroll = 1;
  bool reassociate = false;
  bool pipeline = false;
};

Config resolve_config(const Options& o) {
  if (o.config.empty() || o.config == "custom") {
    std::string name = o.config.empty() ? std::string() : o.config;
    if (name.empty()) {
      if (o.unroll_factor > 1 && o.pipeline)
        name = "both";
      else if (o.unroll_factor > 1)
        name = "unrolled";
      else if (o.pipeline)
        name = "pipelined";
      else
        name = "plain";
    }
    return {name, o.unroll_factor, o.reassociate, o.pipeline};
  }
  int f = o.unroll_factor > 1 ? o.unroll_factor : 4;
  bool re = o.reassociate || o.unroll_factor <= 1;
  if (o.config == "plain") return {"plain", 1, false, false};
  if (o.config == "pipelined") return {"pipelined", 1, false, true};
  if (o.config == "unrolled") return {"unrolled", f, re, false};
  if (o.config == "both" || o.config == "pipelined+unrolled")
    return {"both", f, re, true};
  throw Diagnostics("unknown config: " + o.config);
}

struct Built {
  vc::Program program;  // transformed, predicated
  vc::VirtualCircuit circuit;
};

Built build(const vc::Program& base, const Config& c, int depth,
            bool aggressive_is_unroll) {
  vc::Program p = vc::predicate(base);
  if (c.unroll > 1 && !aggressive_is_unroll)
    p = vc::unroll(p, c.unroll, c.reassociate);
  vc::VirtualCircuit circ = vc::build_circuit(p);
  if (c.pipeline) circ = vc::pipeline_loop(circ, depth);
  return {std::move(p), std::move(circ)};
}

struct RunRow {
  std::string config;
  long cycles = 0;
  double speedup = 1.0;
  long luts = 0;
  long ffs = 0;
  bool equivalent = false;
};

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Diagnostics("cannot write " + path);
  f << text;
}

void emit_json(const std::string& path, const std::string& kernel,
               const std::vector<RunRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"kernel", kernel},
                   {"config", r.config},
                   {"cycles", r.cycles},
                   {"speedup", r.speedup},
                   {"luts_proxy", r.luts},
                   {"ffs_proxy", r.ffs},
                   {"equivalent", r.equivalent}});
  write_text(path, arr.dump(2) + "\n");
}

void print_table(const std::vector<RunRow>& rows) {
  std::printf("%-20s %10s %8s %10s %10s %6s\n", "config", "cycles", "speedup",
              "luts", "ffs", "equiv");
  for (const auto& r : rows)
    std::printf("%-20s %10ld %8.2f %10ld %10ld %6s\n", r.config.c_str(),
                r.cycles, r.speedup, r.luts, r.ffs,
                r.equivalent ? "yes" : "NO");
}

RunRow run_one(const vc::Program& base, const Config& c, const Options& o,
               const vc::LatencyConfig& lat, const vc::RunInputs& in,
               bool aggressive_is_unroll, std::string* trace_out) {
  Built b = build(base, c, o.depth, aggressive_is_unroll);
  bool audit = b.circuit.pipelined;
  vc::SimResult sr =
      vc::simulate(b.circuit, lat, in, 100000000L,
                   audit || trace_out ? 4000000 : 1, audit);
  if (audit) {
    auto viol = vc::audit_rules(b.circuit, sr);
    for (const auto& v : viol) std::cerr << "rule violation: " << v << '\n';
    if (!viol.empty())
      throw Diagnostics("pipelining-rule audit failed for " + c.name);
  }
  if (trace_out) *trace_out = vc::format_trace(b.circuit, sr);
  vc::RunOutputs oracle = vc::run_functional(b.program, in);
  vc::ResourceReport rr = vc::estimate_resources(b.circuit);
  RunRow row;
  row.config = c.name;
  row.cycles = sr.total_cycles;
  row.luts = rr.luts_proxy;
  row.ffs = rr.ffs_proxy;
  row.equivalent = sr.outputs == oracle;
  return row;
}

int cmd_run(const Options& o) {
  vc::Program base = load_program(o);
  Config c = resolve_config(o);
  vc::LatencyConfig lat = o.latency_file.empty()
                              ? vc::LatencyConfig::defaults()
                              : vc::load_latency_file(o.latency_file);
  vc::RunInputs in = vc::make_inputs(base, o.seed);
  std::string trace;
  RunRow row = run_one(base, c, o, lat, in, false,
                       o.trace_path.empty() ? nullptr : &trace);
  if (!o.trace_path.empty()) write_text(o.trace_path, trace);
  std::string kernel = o.kernel.empty() ? base.name : o.kernel;
  std::printf("kernel: %s\nconfig: %s\ncycles: %ld\nequivalent: %s\n",
              kernel.c_str(), row.config.c_str(), row.cycles,
              row.equivalent ? "yes" : "NO");
  if (!o.json_path.empty()) emit_json(o.json_path, kernel, {row});
  return row.equivalent ? 0 : 1;
}

int cmd_compare(const Options& o) {
  vc::Program base = load_program(o);
  vc::LatencyConfig lat = o.latency_file.empty()
                              ? vc::LatencyConfig::defaults()
                              : vc::load_latency_file(o.latency_file);
  vc::RunInputs in = vc::make_inputs(base, o.seed);
  int f = o.unroll_factor > 1 ? o.unroll_factor : 4;
  bool re = o.reassociate || o.unroll_factor <= 1;

  // matmul --aggressive substitutes the tiled program for static unrolling
  vc::Program unrolled_base = base;
  bool agg = o.aggressive && o.kernel == "matmul";
  if (agg) {
    long n = o.n > 0 ? o.n : vc::default_scale(o.kernel);
    unrolled_base = vc::make_kernel(o.kernel, n, true);
  }
  vc::RunInputs agg_in = agg ? vc::make_inputs(unrolled_base, o.seed) : in;

  std::vector<RunRow> rows;
  rows.push_back(run_one(base, {"plain", 1, false, false}, o, lat, in, false,
                         nullptr));
  rows.push_back(run_one(base, {"pipelined", 1, false, true}, o, lat, in,
                         false, nullptr));
  rows.push_back(run_one(unrolled_base, {"unrolled", agg ? 1 : f, re, false},
                         o, lat, agg_in, agg, nullptr));
  rows.push_back(run_one(unrolled_base, {"pipelined+unrolled", agg ? 1 : f,
                                         re, true},
                         o, lat, agg_in, agg, nullptr));
  for (auto& r : rows)
    r.speedup = static_cast<double>(rows[0].cycles) / r.cycles;
  print_table(rows);
  std::string kernel = o.kernel.empty() ? base.name : o.kernel;
  if (!o.json_path.empty()) emit_json(o.json_path, kernel, rows);
  for (const auto& r : rows)
    if (!r.equivalent) return 1;
  return 0;
}

int cmd_check(const Options& o, long state_cap) {
  vc::Program base = load_program(o);
  Config c = resolve_config(o);
  Built b = build(base, c, o.depth, false);
  vc::LivenessReport rep = vc::check_liveness_safeness(b.circuit, state_cap);
  std::printf("%s (%ld states explored)\n", rep.verdict().c_str(),
              rep.states_explored);
  return rep.conclusive && rep.deadlock_free && rep.exit_reachable ? 0 : 1;
}

int cmd_dump(const Options& o, const std::string& out, bool dot) {
  vc::Program base = load_program(o);
  Config c = resolve_config(o);
  Built b = build(base, c, o.depth, false);
  std::string text =
      dot ? vc::export_dot(b.circuit) : vc::dump_circuit(b.circuit);
  if (out.empty())
    std::cout << text;
  else
    write_text(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"virtual-circuit loop-kernel compiler and simulator"};
  app.require_subcommand(1);
  Options o;
  long state_cap = 1000000;
  std::string dump_out;
  bool dump_dot = false;

  CLI::App* run = app.add_subcommand("run", "simulate one configuration");
  add_common(run, o);
  run->add_option("--trace", o.trace_path, "write event trace to file");
  run->add_option("--json", o.json_path, "write JSON report ('-' = stdout)");

  CLI::App* cmp =
      app.add_subcommand("compare", "run all four configurations");
  add_common(cmp, o);
  cmp->add_option("--json", o.json_path, "write JSON report ('-' = stdout)");

  CLI::App* chk =
      app.add_subcommand("check", "liveness/boundedness analysis");
  add_common(chk, o);
  chk->add_option("--state-cap", state_cap, "exploration state cap");

  CLI::App* dmp = app.add_subcommand("dump", "serialize the circuit");
  add_common(dmp, o);
  dmp->add_option("--out", dump_out, "output file (default stdout)");
  dmp->add_flag("--dot", dump_dot, "GraphViz format");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(o);
    if (cmp->parsed()) return cmd_compare(o);
    if (chk->parsed()) return cmd_check(o, state_cap);
    return cmd_dump(o, dump_out, dump_dot);
  } catch (const vc::SimFault& e) {
    std::cerr << "simulation fault: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
