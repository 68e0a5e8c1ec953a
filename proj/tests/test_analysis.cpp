#include <doctest.h>

#include <algorithm>

#include "vc/analysis.hpp"
#include "vc/bench.hpp"
#include "vc/circuit.hpp"
#include "vc/kernels.hpp"
#include "vc/pipeliner.hpp"
#include "vc/transforms.hpp"

using namespace vc;

TEST_CASE("plain circuits are 1-bounded and live") {
  for (const auto& name : kernel_names()) {
    CAPTURE(name);
    VirtualCircuit vc =
        build_circuit(predicate(make_kernel(name, name == "matmul" ? 4 : 8)));
    LivenessReport rep = check_liveness_safeness(vc);
    CHECK(rep.conclusive);
    CHECK(rep.deadlock_free);
    CHECK(rep.exit_reachable);
    CHECK(rep.bounded_by(1));
    CHECK(rep.verdict() == "1-bounded, live");
  }
}

TEST_CASE("pipelined circuits are depth-bounded and live") {
  for (int m : {2, 8}) {
    CAPTURE(m);
    VirtualCircuit piped =
        pipeline_loop(build_circuit(predicate(gen_dotp(8))), m);
    LivenessReport rep = check_liveness_safeness(piped);
    CHECK(rep.conclusive);
    CHECK(rep.deadlock_free);
    CHECK(rep.exit_reachable);
    CHECK(rep.bounded_by(m));
  }
}

TEST_CASE("severing an acknowledge arc is reported as deadlock") {
  VirtualCircuit vc = build_circuit(predicate(gen_dotp(8)));
  // disconnect the multiply's sample-ack from everything it enables
  int prod = vc.dp.node_of.at("prod");
  Transition& sa = vc.cn.transitions[vc.node_trans[prod][1]];
  sa.out.clear();
  LivenessReport rep = check_liveness_safeness(vc);
  CHECK(!rep.deadlock_free);
  CHECK(rep.verdict().find("deadlock found") != std::string::npos);
  CHECK(!rep.deadlock_marking.empty());
}

TEST_CASE("tiny state cap yields an inconclusive verdict") {
  VirtualCircuit piped =
      pipeline_loop(build_circuit(predicate(gen_dotp(8))), 8);
  LivenessReport rep = check_liveness_safeness(piped, 5);
  CHECK(!rep.conclusive);
  CHECK(rep.verdict().find("inconclusive") == 0);
}
