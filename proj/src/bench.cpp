#include "vc/bench.hpp"

#include <random>
#include <stdexcept>

#include "vc/kernels.hpp"

namespace vc {

namespace {

uint32_t random_bits(ScalarKind kind, std::mt19937& rng) {
  switch (kind) {
    case ScalarKind::F32: {
      std::uniform_real_distribution<float> d(-2.0f, 2.0f);
      return Value::from_f32(d(rng)).bits;
    }
    case ScalarKind::I32: {
      std::uniform_int_distribution<int32_t> d(0, 255);
      return Value::from_i32(d(rng)).bits;
    }
    case ScalarKind::U8: {
      std::uniform_int_distribution<int> d(0, 255);
      return Value::from_u8(static_cast<uint8_t>(d(rng))).bits;
    }
  }
  return 0;
}

std::vector<uint32_t> random_block(ScalarKind kind, size_t n,
                                   std::mt19937& rng) {
  std::vector<uint32_t> v(n);
  for (auto& x : v) x = random_bits(kind, rng);
  return v;
}

}  // namespace

const std::vector<std::string>& kernel_names() {
  static const std::vector<std::string> names = {"dotp", "fft", "matmul",
                                                 "stream"};
  return names;
}

long default_scale(const std::string& kernel) {
  if (kernel == "dotp" || kernel == "fft") return 64;
  return 16;
}

Program make_kernel(const std::string& kernel, long n, bool aggressive) {
  if (kernel == "dotp") return gen_dotp(n);
  if (kernel == "fft") return gen_fft_stage(n);
  if (kernel == "matmul") return gen_matmul(n, aggressive);
  if (kernel == "stream") {
    std::mt19937 rng(0);
    std::uniform_real_distribution<float> d(-2.0f, 2.0f);
    std::vector<uint8_t> ops(n);
    std::vector<float> xs(n), ys(n);
    for (long i = 0; i < n; i++) {
      ops[i] = static_cast<uint8_t>(rng() % 4);
      xs[i] = d(rng);
      ys[i] = d(rng);
    }
    return gen_stream(ops, xs, ys);
  }
  throw std::invalid_argument("unknown kernel: " + kernel);
}

RunInputs make_inputs(const Program& p, uint32_t seed) {
  std::mt19937 rng(seed);
  RunInputs in;
  for (const auto& s : p.inputs)
    in.scalars[s.name] = Value{s.kind, random_bits(s.kind, rng)};
  for (const auto& sp : p.spaces)
    if (sp.initial_bits.empty())
      in.space_contents[sp.name] =
          random_block(sp.kind, static_cast<size_t>(sp.length), rng);
  for (const auto& port : p.ports) {
    if (port.dir != PortDir::In) continue;
    size_t len = port.backing_bits.empty() ? 16 : port.backing_bits.size();
    in.stream_data[port.name] = random_block(port.kind, len, rng);
  }
  return in;
}

}  // namespace vc
