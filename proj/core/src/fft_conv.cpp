// SPDX-License-Identifier: Apache-2.0
#include "coba3d/fft_conv.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace coba3d {

namespace {
// FFTW's planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

int next_fast_len(int n) {
  if (n <= 1) return 1;
  for (;; ++n) {
    int r = n;
    for (int f : {2, 3, 5, 7}) {
      while (r % f == 0) r /= f;
    }
    if (r == 1) return n;
  }
}

struct FftConv2d::Impl {
  int cap_rows = 0;
  int cap_cols = 0;
  int pad_rows = 0;
  int pad_cols = 0;
  fftw_complex* a = nullptr;
  fftw_complex* b = nullptr;
  fftw_plan fwd_a = nullptr;
  fftw_plan fwd_b = nullptr;
  fftw_plan inv_a = nullptr;

  Impl(int max_rows, int max_cols) : cap_rows(max_rows), cap_cols(max_cols) {
    if (max_rows < 1 || max_cols < 1) throw std::invalid_argument("workspace size must be >= 1");
    pad_rows = next_fast_len(2 * max_rows - 1);
    pad_cols = next_fast_len(2 * max_cols - 1);
    const std::size_t n = static_cast<std::size_t>(pad_rows) * pad_cols;
    a = fftw_alloc_complex(n);
    b = fftw_alloc_complex(n);
    if (!a || !b) {
      release();
      throw std::bad_alloc();
    }
    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW_ESTIMATE keeps planning deterministic and leaves buffers intact.
    fwd_a = fftw_plan_dft_2d(pad_rows, pad_cols, a, a, FFTW_FORWARD, FFTW_ESTIMATE);
    fwd_b = fftw_plan_dft_2d(pad_rows, pad_cols, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_a = fftw_plan_dft_2d(pad_rows, pad_cols, a, a, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_a || !fwd_b || !inv_a) {
      release_plans();
      release();
      throw std::runtime_error("fftw plan creation failed");
    }
  }

  ~Impl() {
    release_plans();
    release();
  }

  void release_plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd_a) fftw_destroy_plan(fwd_a);
    if (fwd_b) fftw_destroy_plan(fwd_b);
    if (inv_a) fftw_destroy_plan(inv_a);
    fwd_a = fwd_b = inv_a = nullptr;
  }

  void release() {
    if (a) fftw_free(a);
    if (b) fftw_free(b);
    a = b = nullptr;
  }

  void load(fftw_complex* dst, const CMat& m) {
    const std::size_t n = static_cast<std::size_t>(pad_rows) * pad_cols;
    std::memset(dst, 0, n * sizeof(fftw_complex));
    for (std::size_t r = 0; r < m.rows(); ++r) {
      std::memcpy(dst + r * static_cast<std::size_t>(pad_cols), m.data() + r * m.cols(),
                  m.cols() * sizeof(fftw_complex));
    }
  }

  CMat finish(std::size_t out_rows, std::size_t out_cols) {
    CMat out(out_rows, out_cols);
    const double scale = 1.0 / (static_cast<double>(pad_rows) * pad_cols);
    for (std::size_t r = 0; r < out_rows; ++r) {
      const fftw_complex* src = a + r * static_cast<std::size_t>(pad_cols);
      for (std::size_t c = 0; c < out_cols; ++c) {
        out(r, c) = cdouble(src[c][0], src[c][1]) * scale;
      }
    }
    return out;
  }

  // The declared capacity is the bound, not the (rounded-up) padded size.
  void check_fits(const CMat& m) const {
    if (m.empty()) throw std::invalid_argument("empty matrix");
    if (m.rows() > static_cast<std::size_t>(cap_rows) ||
        m.cols() > static_cast<std::size_t>(cap_cols)) {
      throw std::invalid_argument("matrix exceeds workspace capacity");
    }
  }
};

FftConv2d::FftConv2d(int max_rows, int max_cols) : impl_(new Impl(max_rows, max_cols)) {}
FftConv2d::~FftConv2d() = default;
FftConv2d::FftConv2d(FftConv2d&&) noexcept = default;
FftConv2d& FftConv2d::operator=(FftConv2d&&) noexcept = default;

CMat FftConv2d::convolve(const CMat& a, const CMat& b) {
  impl_->check_fits(a);
  impl_->check_fits(b);
  const std::size_t out_r = a.rows() + b.rows() - 1;
  const std::size_t out_c = a.cols() + b.cols() - 1;
  impl_->load(impl_->a, a);
  impl_->load(impl_->b, b);
  fftw_execute(impl_->fwd_a);
  fftw_execute(impl_->fwd_b);
  const std::size_t n = static_cast<std::size_t>(impl_->pad_rows) * impl_->pad_cols;
  auto* pa = reinterpret_cast<cdouble*>(impl_->a);
  auto* pb = reinterpret_cast<cdouble*>(impl_->b);
  for (std::size_t i = 0; i < n; ++i) pa[i] *= pb[i];
  fftw_execute(impl_->inv_a);
  return impl_->finish(out_r, out_c);
}

CMat FftConv2d::self_convolve(const CMat& m) {
  impl_->check_fits(m);
  impl_->load(impl_->a, m);
  fftw_execute(impl_->fwd_a);
  const std::size_t n = static_cast<std::size_t>(impl_->pad_rows) * impl_->pad_cols;
  auto* pa = reinterpret_cast<cdouble*>(impl_->a);
  for (std::size_t i = 0; i < n; ++i) pa[i] *= pa[i];
  fftw_execute(impl_->inv_a);
  return impl_->finish(2 * m.rows() - 1, 2 * m.cols() - 1);
}

CMat convolve_direct(const CMat& a, const CMat& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty matrix");
  const std::size_t out_r = a.rows() + b.rows() - 1;
  const std::size_t out_c = a.cols() + b.cols() - 1;
  CMat out(out_r, out_c);
  for (std::size_t ra = 0; ra < a.rows(); ++ra) {
    for (std::size_t ca = 0; ca < a.cols(); ++ca) {
      const cdouble va = a(ra, ca);
      if (va == cdouble{}) continue;
      for (std::size_t rb = 0; rb < b.rows(); ++rb) {
        for (std::size_t cb = 0; cb < b.cols(); ++cb) {
          out(ra + rb, ca + cb) += va * b(rb, cb);
        }
      }
    }
  }
  return out;
}

}  // namespace coba3d
