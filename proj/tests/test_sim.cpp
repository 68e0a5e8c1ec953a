#include <doctest.h>

#include <vector>

#include "vc/bench.hpp"
#include "vc/circuit.hpp"
#include "vc/interp.hpp"
#include "vc/kernels.hpp"
#include "vc/sim.hpp"
#include "vc/transforms.hpp"

using namespace vc;

namespace {

std::vector<long> phase_cycles(const VirtualCircuit& vc, const SimResult& r,
                               int trans) {
  std::vector<long> out;
  (void)vc;
  for (const auto& e : r.trace)
    if (e.trans == trans) out.push_back(e.cycle);
  return out;
}

}  // namespace

TEST_CASE("latency config parsing") {
  LatencyConfig lat = parse_latency_config(
      "# comment\n"
      "fadd.compute=6\n"
      "int.sample=2\n"
      "mem.latency=5\n"
      "mem.a.ports=3\n");
  CHECK(lat.op("fadd").compute == 6);
  CHECK(lat.op("int").sample == 2);
  CHECK(lat.op("fmul").compute == 4);  // untouched default
  CHECK(lat.space("zzz").latency == 5);
  CHECK(lat.space("a").ports == 3);
  CHECK(lat.space("a").latency == 5);  // override inherits base latency
  CHECK_THROWS(parse_latency_config("fadd.compute=banana\n"));
}

TEST_CASE("dotp over all-ones inputs equals the vector length") {
  Program p = predicate(gen_dotp(64));
  VirtualCircuit vc = build_circuit(p);
  RunInputs in;
  in.space_contents["a"] = std::vector<uint32_t>(64, Value::from_f32(1).bits);
  in.space_contents["b"] = std::vector<uint32_t>(64, Value::from_f32(1).bits);
  SimResult r = simulate(vc, LatencyConfig::defaults(), in);
  CHECK(r.outputs.values.at("dotP").as_f32() == 64.0f);
}

TEST_CASE("simulation matches the reference interpreter on every kernel") {
  for (const auto& name : kernel_names()) {
    CAPTURE(name);
    Program base = make_kernel(name, name == "dotp" ? 32 : 8);
    RunInputs in = make_inputs(base, 11);
    Program p = predicate(base);
    SimResult r = simulate(build_circuit(p), LatencyConfig::defaults(), in);
    CHECK(r.outputs == run_functional(p, in));
  }
}

TEST_CASE("handshake phases observe sr <= sa <= cr <= ca per instance") {
  Program p = predicate(gen_dotp(16));
  VirtualCircuit vc = build_circuit(p);
  RunInputs in = make_inputs(p, 3);
  SimResult r = simulate(vc, LatencyConfig::defaults(), in);
  REQUIRE(r.trace_complete);
  int prod = vc.dp.node_of.at("prod");
  auto sr = phase_cycles(vc, r, vc.node_trans[prod][0]);
  auto sa = phase_cycles(vc, r, vc.node_trans[prod][1]);
  auto cr = phase_cycles(vc, r, vc.node_trans[prod][2]);
  auto ca = phase_cycles(vc, r, vc.node_trans[prod][3]);
  REQUIRE(sr.size() == 16);
  REQUIRE(sa.size() == 16);
  REQUIRE(cr.size() == 16);
  REQUIRE(ca.size() == 16);
  for (size_t k = 0; k < sr.size(); k++) {
    CHECK(sr[k] <= sa[k]);
    CHECK(sa[k] <= cr[k]);
    CHECK(cr[k] <= ca[k]);
    // compute phase takes the configured fmul latency
    CHECK(ca[k] - cr[k] >= 4);
  }
}

TEST_CASE("first trace event is the entry fork at cycle zero") {
  Program p = predicate(gen_dotp(8));
  SimResult r =
      simulate(build_circuit(p), LatencyConfig::defaults(), make_inputs(p, 0));
  REQUIRE(!r.trace.empty());
  CHECK(r.trace.front().cycle == 0);
}

TEST_CASE("identical runs are byte-identical") {
  Program p = predicate(make_kernel("stream", 12));
  VirtualCircuit vc = build_circuit(p);
  RunInputs in = make_inputs(p, 9);
  SimResult a = simulate(vc, LatencyConfig::defaults(), in);
  SimResult b = simulate(vc, LatencyConfig::defaults(), in);
  CHECK(a.total_cycles == b.total_cycles);
  CHECK(a.outputs == b.outputs);
  CHECK(format_trace(vc, a) == format_trace(vc, b));
}

TEST_CASE("exhausting the cycle limit raises a simulation fault") {
  Program p = predicate(gen_dotp(64));
  VirtualCircuit vc = build_circuit(p);
  CHECK_THROWS_AS(
      simulate(vc, LatencyConfig::defaults(), make_inputs(p, 0), 10),
      SimFault);
}

TEST_CASE("memory latency shifts plain cycle count, structure unchanged") {
  Program p = predicate(gen_dotp(16));
  VirtualCircuit vc = build_circuit(p);
  RunInputs in = make_inputs(p, 5);
  LatencyConfig slow = LatencyConfig::defaults();
  slow.mem_default.latency = 6;
  SimResult fast = simulate(vc, LatencyConfig::defaults(), in);
  SimResult lag = simulate(vc, slow, in);
  CHECK(lag.total_cycles > fast.total_cycles);
  CHECK(lag.outputs == fast.outputs);
}
