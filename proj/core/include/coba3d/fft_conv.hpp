// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>

#include "coba3d/types.hpp"

namespace coba3d {

// Smallest size >= n whose prime factors are all in {2, 3, 5, 7}.
int next_fast_len(int n);

// 2D full linear convolution of complex matrices via the FFT. A workspace
// owns its plans and buffers, so one instance per thread; plan creation is
// serialized internally.
class FftConv2d {
 public:
  // rows/cols bound the larger of the two inputs ever passed to this
  // workspace. Self-convolution of an r x c input yields (2r-1) x (2c-1).
  FftConv2d(int max_rows, int max_cols);
  ~FftConv2d();

  FftConv2d(const FftConv2d&) = delete;
  FftConv2d& operator=(const FftConv2d&) = delete;
  FftConv2d(FftConv2d&&) noexcept;
  FftConv2d& operator=(FftConv2d&&) noexcept;

  // Full convolution a * b, output (ra+rb-1) x (ca+cb-1).
  CMat convolve(const CMat& a, const CMat& b);

  // Full self-convolution a * a, output (2r-1) x (2c-1). Uses a single
  // forward transform.
  CMat self_convolve(const CMat& a);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Reference direct convolution, O(n^2 m^2). Used for cross-checking.
CMat convolve_direct(const CMat& a, const CMat& b);

}  // namespace coba3d
