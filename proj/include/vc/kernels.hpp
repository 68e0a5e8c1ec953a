#pragma once

#include <cstdint>
#include <vector>

#include "vc/ir.hpp"

namespace vc {

// Multiply-accumulate over two f32 arrays of length n.
Program gen_dotp(long n);

// One radix-2 decimation-in-frequency stage over n points, in place.
// Real parts live at x[0..n), imaginary parts at x[n..2n); both halves
// share one memory space so the stage is bound by that subsystem.
Program gen_fft_stage(long n);

// n x n f32 matrix product, three nested loops. The aggressive form
// computes a 4x4 output tile per (i,j) step with k unrolled by 4
// (16 accumulators); it requires 4 | n.
Program gen_matmul(long n, bool aggressive_unroll);

// Stream processor: three input streams (x, y, op-code) drive a four-way
// branched computation written to an output stream. The loop trip count
// equals the sequence length.
Program gen_stream(const std::vector<uint8_t>& ops,
                   const std::vector<float>& xs, const std::vector<float>& ys);

}  // namespace vc
