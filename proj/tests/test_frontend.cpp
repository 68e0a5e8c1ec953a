#include <cmath>
#include <random>

#include "doctest.h"
#include "vc/interp.hpp"
#include "vc/kernels.hpp"
#include "vc/parser.hpp"
#include "vc/transforms.hpp"

using namespace vc;

namespace {

std::vector<uint32_t> random_f32_bits(size_t n, uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(-4.0f, 4.0f);
  std::vector<uint32_t> out;
  out.reserve(n);
  for (size_t i = 0; i < n; i++) out.push_back(Value::from_f32(dist(rng)).bits);
  return out;
}

float bits_to_f32(uint32_t b) { return Value{ScalarKind::F32, b}.as_f32(); }

}  // namespace

TEST_CASE("dotp kernel round-trips through print and parse") {
  Program p = gen_dotp(64);
  CHECK(validate(p).empty());
  std::string text = print_program(p);
  ParseResult r = parse_program(text);
  REQUIRE(r.ok());
  CHECK(print_program(r.program) == text);
  CHECK(r.program.spaces.size() == 2);
  CHECK(r.program.body.trip_bound == 64);
}

TEST_CASE("all kernels round-trip through print and parse") {
  std::vector<Program> progs;
  progs.push_back(gen_dotp(64));
  progs.push_back(gen_fft_stage(64));
  progs.push_back(gen_matmul(16, false));
  progs.push_back(gen_matmul(16, true));
  progs.push_back(gen_stream({0, 1, 2, 3}, {1, 2, 3, 4}, {5, 6, 7, 8}));
  for (const auto& p : progs) {
    std::string text = print_program(p);
    ParseResult r = parse_program(text);
    REQUIRE_MESSAGE(r.ok(), p.name);
    CHECK(print_program(r.program) == text);
  }
}

TEST_CASE("zero-trip loop with empty-effect body parses") {
  const char* src =
      "program degenerate\n"
      "loop trip 0\n"
      " pre\n"
      "  f = const i32 0\n"
      " body\n"
      "  block b0\n"
      "   end\n"
      " latch f\n"
      "endloop\n";
  ParseResult r = parse_program(src);
  REQUIRE(r.ok());
  CHECK(r.program.body.trip_bound == 0);
}

TEST_CASE("undeclared memory space is rejected") {
  const char* src =
      "program bad\n"
      "loop trip 1\n"
      " pre\n"
      "  c0 = const i32 0\n"
      " body\n"
      "  block b0\n"
      "   v = load q c0\n"
      "   end\n"
      " latch c0\n"
      "endloop\n";
  ParseResult r = parse_program(src);
  CHECK(!r.ok());
  bool found = false;
  for (const auto& d : r.diags)
    if (d.message.find("unresolved memory space") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("duplicate SSA definition is rejected") {
  Program p = gen_dotp(4);
  p.body.blocks[0].insts.push_back(p.body.blocks[0].insts[2]);  // redefine prod
  auto diags = validate(p);
  bool found = false;
  for (const auto& d : diags)
    if (d.message.find("SSA violation") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("multi-block body draws a predication advisory") {
  Program p = gen_stream({0, 1}, {1, 2}, {3, 4});
  auto diags = validate(p);
  bool found = false;
  for (const auto& d : diags) {
    CHECK(d.severity != Severity::Error);
    if (d.message.find("predication required") != std::string::npos)
      found = true;
  }
  CHECK(found);
}

TEST_CASE("interpreter: dot product analytic cases") {
  Program p = gen_dotp(64);
  RunInputs zeros;
  zeros.space_contents["a"] = std::vector<uint32_t>(64, 0);
  zeros.space_contents["b"] = std::vector<uint32_t>(64, 0);
  CHECK(run_functional(p, zeros).values.at("dotP") == Value::from_f32(0.0f));

  RunInputs ones;
  ones.space_contents["a"] =
      std::vector<uint32_t>(64, Value::from_f32(1.0f).bits);
  ones.space_contents["b"] = ones.space_contents["a"];
  CHECK(run_functional(p, ones).values.at("dotP") == Value::from_f32(64.0f));

  Program p1 = gen_dotp(1);
  RunInputs single;
  single.space_contents["a"] = {Value::from_f32(3.0f).bits};
  single.space_contents["b"] = {Value::from_f32(-2.5f).bits};
  CHECK(run_functional(p1, single).values.at("dotP") ==
        Value::from_f32(-7.5f));
}

TEST_CASE("interpreter: matmul matches brute-force triple loop") {
  const long n = 16;
  Program p = gen_matmul(n, false);
  RunInputs in;
  in.space_contents["a"] = random_f32_bits(n * n, 11);
  in.space_contents["b"] = random_f32_bits(n * n, 22);
  auto out = run_functional(p, in);

  // independent oracle
  for (long i = 0; i < n; i++) {
    for (long j = 0; j < n; j++) {
      float v = 0.0f;
      for (long k = 0; k < n; k++) {
        float av = bits_to_f32(in.space_contents["a"][i * n + k]);
        float bv = bits_to_f32(in.space_contents["b"][k * n + j]);
        v += av * bv;
      }
      CHECK(bits_to_f32(out.memory.at("c")[i * n + j]) == v);
    }
  }
}

TEST_CASE("interpreter: stream op codes") {
  {
    auto out = run_functional(gen_stream({0}, {3}, {4}), {});
    REQUIRE(out.streams.at("z_pipe").size() == 1);
    CHECK(bits_to_f32(out.streams.at("z_pipe")[0]) == 12.0f);
  }
  {
    auto out = run_functional(gen_stream({2}, {3}, {2}), {});
    CHECK(bits_to_f32(out.streams.at("z_pipe")[0]) == 5.0f);
  }
  {
    auto out = run_functional(gen_stream({1}, {3}, {2}), {});
    CHECK(bits_to_f32(out.streams.at("z_pipe")[0]) == 5.0f);
  }
  {
    auto out = run_functional(gen_stream({3}, {3}, {2}), {});
    CHECK(bits_to_f32(out.streams.at("z_pipe")[0]) == 25.0f);
  }
  {
    auto out = run_functional(gen_stream({9}, {3}, {2}), {});
    CHECK(bits_to_f32(out.streams.at("z_pipe")[0]) == 0.0f);
  }
}

TEST_CASE("interpreter: fft stage matches butterfly oracle") {
  const long n = 4;
  Program p = gen_fft_stage(n);
  RunInputs in;
  in.space_contents["x"] = random_f32_bits(2 * n, 7);
  auto out = run_functional(p, in);

  // hand-rolled DIF butterflies
  std::vector<float> re(n), im(n);
  for (long i = 0; i < n; i++) {
    re[i] = bits_to_f32(in.space_contents["x"][i]);
    im[i] = bits_to_f32(in.space_contents["x"][n + i]);
  }
  for (long b = 0; b < n / 2; b++) {
    double ang = -2.0 * M_PI * b / n;
    float wr = static_cast<float>(std::cos(ang));
    float wi = static_cast<float>(std::sin(ang));
    float ur = re[b], vr = re[b + n / 2];
    float ui = im[b], vi = im[b + n / 2];
    float dr = ur - vr, di = ui - vi;
    re[b] = ur + vr;
    im[b] = ui + vi;
    re[b + n / 2] = dr * wr - di * wi;
    im[b + n / 2] = dr * wi + di * wr;
  }
  for (long i = 0; i < n; i++) {
    CHECK(bits_to_f32(out.memory.at("x")[i]) == re[i]);
    CHECK(bits_to_f32(out.memory.at("x")[n + i]) == im[i]);
  }
}

TEST_CASE("predication flattens the stream kernel to one block") {
  Program p = gen_stream({0, 1, 2, 3, 4, 0, 3}, {1, 2, 3, 4, 5, 6, 7},
                         {7, 6, 5, 4, 3, 2, 1});
  Program q = predicate(p);
  REQUIRE(q.body.blocks.size() == 1);
  int compares_on_opcode = 0;
  for (const auto& in : q.body.blocks[0].insts)
    if (in.op == Opcode::CmpEq && !in.operands.empty() &&
        in.operands[0] == "opc")
      compares_on_opcode++;
  CHECK(compares_on_opcode == 4);
  CHECK(run_functional(p, {}) == run_functional(q, {}));
}

TEST_CASE("predication preserves semantics over random streams") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 20; trial++) {
    size_t len = 1 + rng() % 12;
    std::vector<uint8_t> ops;
    std::vector<float> xs, ys;
    std::uniform_real_distribution<float> dist(-8.0f, 8.0f);
    for (size_t i = 0; i < len; i++) {
      ops.push_back(static_cast<uint8_t>(rng() % 6));
      xs.push_back(dist(rng));
      ys.push_back(dist(rng));
    }
    Program p = gen_stream(ops, xs, ys);
    Program q = predicate(p);
    CHECK(run_functional(p, {}) == run_functional(q, {}));
  }
}

TEST_CASE("predication leaves single-block bodies unchanged") {
  Program p = gen_dotp(8);
  Program q = predicate(p);
  CHECK(print_program(q) == print_program(p));
}

TEST_CASE("unroll factor 1 is the identity") {
  Program p = gen_dotp(8);
  Program q = unroll(p, 1, false);
  CHECK(print_program(q) == print_program(p));
}

TEST_CASE("unroll by 4 divides the trip count") {
  Program p = gen_dotp(64);
  Program q = unroll(p, 4, false);
  CHECK(q.body.trip_bound == 16);
  int muls = 0, adds_f32 = 0;
  for (const auto& in : q.body.blocks[0].insts) {
    if (in.op == Opcode::Mul && in.kind == ScalarKind::F32) muls++;
    if (in.op == Opcode::Add && in.kind == ScalarKind::F32) adds_f32++;
  }
  CHECK(muls == 4);
  CHECK(adds_f32 == 4);

  RunInputs in;
  in.space_contents["a"] = random_f32_bits(64, 31);
  in.space_contents["b"] = random_f32_bits(64, 32);
  CHECK(run_functional(p, in) == run_functional(q, in));
}

TEST_CASE("unroll with remainder adds an epilogue and stays bit-exact") {
  Program p = gen_dotp(10);
  Program q = unroll(p, 4, false);
  REQUIRE(!q.body.is_innermost());
  int loops = 0;
  for (const auto& item : q.body.seq)
    if (item.loop) loops++;
  CHECK(loops == 2);

  RunInputs in;
  in.space_contents["a"] = random_f32_bits(10, 41);
  in.space_contents["b"] = random_f32_bits(10, 42);
  CHECK(run_functional(p, in) == run_functional(q, in));
}

TEST_CASE("unroll composes: 2 then 2 equals 4 in trip count") {
  Program p = gen_dotp(64);
  Program a = unroll(unroll(p, 2, false), 2, false);
  Program b = unroll(p, 4, false);
  CHECK(a.body.trip_bound == b.body.trip_bound);
  RunInputs in;
  in.space_contents["a"] = random_f32_bits(64, 51);
  in.space_contents["b"] = random_f32_bits(64, 52);
  CHECK(run_functional(a, in) == run_functional(b, in));
}

TEST_CASE("reassociated unroll matches a regrouped oracle within 1e-6") {
  Program p = gen_dotp(64);
  Program q = unroll(p, 4, true);
  RunInputs in;
  in.space_contents["a"] = random_f32_bits(64, 61);
  in.space_contents["b"] = random_f32_bits(64, 62);
  auto out = run_functional(q, in);

  // oracle in the regrouped order: acc += ((t0+t1)+(t2+t3))
  float acc = 0.0f;
  for (int i = 0; i < 64; i += 4) {
    float t[4];
    for (int j = 0; j < 4; j++)
      t[j] = bits_to_f32(in.space_contents["a"][i + j]) *
             bits_to_f32(in.space_contents["b"][i + j]);
    acc += (t[0] + t[1]) + (t[2] + t[3]);
  }
  float got = out.values.at("dotP").as_f32();
  CHECK(got == doctest::Approx(acc).epsilon(1e-6));
}

TEST_CASE("unroll applies to the innermost matmul loop") {
  Program p = gen_matmul(16, false);
  Program q = unroll(p, 4, false);
  RunInputs in;
  in.space_contents["a"] = random_f32_bits(256, 71);
  in.space_contents["b"] = random_f32_bits(256, 72);
  CHECK(run_functional(p, in) == run_functional(q, in));
}

TEST_CASE("aggressive matmul tile matches the plain kernel") {
  Program plain = gen_matmul(16, false);
  Program tile = gen_matmul(16, true);
  RunInputs in;
  in.space_contents["a"] = random_f32_bits(256, 81);
  in.space_contents["b"] = random_f32_bits(256, 82);
  auto po = run_functional(plain, in);
  auto to = run_functional(tile, in);
  // same products in a different summation order: compare with tolerance
  for (size_t i = 0; i < po.memory.at("c").size(); i++) {
    float a = bits_to_f32(po.memory.at("c")[i]);
    float b = bits_to_f32(to.memory.at("c")[i]);
    CHECK(a == doctest::Approx(b).epsilon(1e-5));
  }
}

TEST_CASE("validate is pure: repeated calls return identical diagnostics") {
  Program p = gen_stream({0, 1}, {1, 2}, {3, 4});
  auto d1 = validate(p);
  auto d2 = validate(p);
  REQUIRE(d1.size() == d2.size());
  for (size_t i = 0; i < d1.size(); i++) {
    CHECK(d1[i].message == d2[i].message);
    CHECK(d1[i].line == d2[i].line);
  }
}
