// SPDX-License-Identifier: Apache-2.0
#include "coba3d/array_geometry.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace coba3d {

namespace {

void check_pitches(double pitch_x, double pitch_y) {
  if (!(pitch_x > 0.0) || !(pitch_y > 0.0)) {
    throw std::invalid_argument("element pitch must be positive");
  }
}

std::array<int, 4> bounds_of(const std::vector<Index2>& positions) {
  int n_min = std::numeric_limits<int>::max(), n_max = std::numeric_limits<int>::min();
  int m_min = n_min, m_max = n_max;
  for (const auto& p : positions) {
    n_min = std::min(n_min, p.n);
    n_max = std::max(n_max, p.n);
    m_min = std::min(m_min, p.m);
    m_max = std::max(m_max, p.m);
  }
  return {n_min, n_max, m_min, m_max};
}

}  // namespace

ElementSet::ElementSet(std::vector<Index2> positions, double pitch_x, double pitch_y)
    : positions_(std::move(positions)), pitch_x_(pitch_x), pitch_y_(pitch_y) {
  check_pitches(pitch_x, pitch_y);
  std::sort(positions_.begin(), positions_.end());
  positions_.erase(std::unique(positions_.begin(), positions_.end()), positions_.end());
}

bool ElementSet::contains(Index2 p) const {
  return std::binary_search(positions_.begin(), positions_.end(), p);
}

bool ElementSet::same_pitch(const ElementSet& other) const {
  return pitch_x_ == other.pitch_x_ && pitch_y_ == other.pitch_y_;
}

std::array<int, 4> ElementSet::bounds() const {
  if (positions_.empty()) throw std::invalid_argument("empty element set");
  return bounds_of(positions_);
}

ApodizationMap::ApodizationMap(std::vector<Index2> support, std::vector<double> values,
                               WeightKind kind)
    : support_(std::move(support)), values_(std::move(values)), kind_(kind) {
  if (support_.size() != values_.size()) {
    throw std::invalid_argument("apodization support/value size mismatch");
  }
  // Sort support and values together.
  std::vector<std::size_t> order(support_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return support_[a] < support_[b]; });
  std::vector<Index2> s(support_.size());
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    s[i] = support_[order[i]];
    v[i] = values_[order[i]];
  }
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] == s[i - 1]) throw std::invalid_argument("duplicate apodization position");
  }
  support_ = std::move(s);
  values_ = std::move(v);
}

ApodizationMap ApodizationMap::uniform(const ElementSet& support, double value, WeightKind kind) {
  return ApodizationMap(support.positions(),
                        std::vector<double>(support.size(), value), kind);
}

double ApodizationMap::value_at(Index2 p) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), p);
  if (it == support_.end() || !(*it == p)) return 0.0;
  return values_[static_cast<std::size_t>(it - support_.begin())];
}

bool ApodizationMap::contains(Index2 p) const {
  return std::binary_search(support_.begin(), support_.end(), p);
}

ElementSet make_upa(int half_extent_x, int half_extent_y, double pitch_x, double pitch_y) {
  if (half_extent_x < 0 || half_extent_y < 0) {
    throw std::invalid_argument("UPA half extents must be non-negative");
  }
  std::vector<Index2> pos;
  pos.reserve(static_cast<std::size_t>(2 * half_extent_x + 1) * (2 * half_extent_y + 1));
  for (int n = -half_extent_x; n <= half_extent_x; ++n) {
    for (int m = -half_extent_y; m <= half_extent_y; ++m) {
      pos.push_back({n, m});
    }
  }
  return ElementSet(std::move(pos), pitch_x, pitch_y);
}

ElementSet sum_coarray(const ElementSet& e) {
  if (e.empty()) throw std::invalid_argument("empty element set");
  const auto& p = e.positions();
  std::vector<Index2> sums;
  sums.reserve(p.size() * p.size());
  for (const auto& a : p) {
    for (const auto& b : p) {
      sums.push_back(a + b);
    }
  }
  return ElementSet(std::move(sums), e.pitch_x(), e.pitch_y());
}

ApodizationMap intrinsic_apodization(const ElementSet& e) {
  if (e.empty()) throw std::invalid_argument("empty element set");
  // Auto-convolution of the dense indicator matrix. The output grid spans
  // twice the index bounding box of E.
  const auto [n_min, n_max, m_min, m_max] = e.bounds();
  const int w = n_max - n_min + 1;
  const int h = m_max - m_min + 1;
  std::vector<std::uint8_t> ind(static_cast<std::size_t>(w) * h, 0);
  for (const auto& p : e.positions()) {
    ind[static_cast<std::size_t>(p.n - n_min) * h + (p.m - m_min)] = 1;
  }
  const int ow = 2 * w - 1;
  const int oh = 2 * h - 1;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(ow) * oh, 0);
  for (int i = 0; i < w; ++i) {
    for (int j = 0; j < h; ++j) {
      if (!ind[static_cast<std::size_t>(i) * h + j]) continue;
      for (int u = 0; u < w; ++u) {
        const std::uint8_t* row = &ind[static_cast<std::size_t>(u) * h];
        std::int64_t* out = &counts[static_cast<std::size_t>(i + u) * oh + j];
        for (int v = 0; v < h; ++v) {
          out[v] += row[v];
        }
      }
    }
  }
  std::vector<Index2> support;
  std::vector<double> values;
  for (int i = 0; i < ow; ++i) {
    for (int j = 0; j < oh; ++j) {
      const std::int64_t c = counts[static_cast<std::size_t>(i) * oh + j];
      if (c > 0) {
        support.push_back({i + 2 * n_min, j + 2 * m_min});
        values.push_back(static_cast<double>(c));
      }
    }
  }
  return ApodizationMap(std::move(support), std::move(values), WeightKind::IntrinsicCount);
}

bool is_sparse_wrt(const ElementSet& t, const ElementSet& e) {
  if (!t.same_pitch(e)) throw std::invalid_argument("pitch mismatch");
  if (t.empty() || e.empty()) return false;
  // T proper subset of E
  if (t.size() >= e.size()) return false;
  for (const auto& p : t.positions()) {
    if (!e.contains(p)) return false;
  }
  // E contained in the sum co-array of T
  const ElementSet st = sum_coarray(t);
  for (const auto& p : e.positions()) {
    if (!st.contains(p)) return false;
  }
  return true;
}

bool is_symmetric(const ElementSet& t) {
  for (const auto& p : t.positions()) {
    if (!t.contains(-p)) return false;
  }
  return true;
}

bool is_full_coarray(const ElementSet& t) {
  if (t.empty()) return false;
  const ElementSet st = sum_coarray(t);
  const auto [n_min, n_max, m_min, m_max] = st.bounds();
  const std::size_t box =
      static_cast<std::size_t>(n_max - n_min + 1) * static_cast<std::size_t>(m_max - m_min + 1);
  return st.size() == box;
}

FractalArray fractal_expand(const ElementSet& generator, int order) {
  if (generator.empty()) throw std::invalid_argument("empty generator array");
  if (order < 0) throw std::invalid_argument("fractal order must be non-negative");

  FractalArray result;
  result.order = order;

  const ElementSet coarray = sum_coarray(generator);
  const auto [n_min, n_max, m_min, m_max] = coarray.bounds();
  // Row/column element counts of the co-array. For ragged (non-full)
  // co-arrays this falls back to the bounding-box side lengths.
  result.scale_base = {n_max - n_min + 1, m_max - m_min + 1};
  result.generator_coarray_full =
      coarray.size() == static_cast<std::size_t>(result.scale_base.n) *
                            static_cast<std::size_t>(result.scale_base.m);
  if (!result.generator_coarray_full) {
    result.warning = "generator sum co-array is not full; expansion proceeds on bounding-box scale";
  }

  double expected = 1.0;
  for (int i = 0; i < order; ++i) expected *= static_cast<double>(generator.size());
  if (expected > 20e6) throw std::invalid_argument("fractal expansion too large");

  std::vector<Index2> current{{0, 0}};
  std::int64_t shift_n = 1, shift_m = 1;
  for (int step = 0; step < order; ++step) {
    std::vector<Index2> next;
    next.reserve(current.size() * generator.size());
    for (const auto& g : generator.positions()) {
      const std::int64_t dn = g.n * shift_n;
      const std::int64_t dm = g.m * shift_m;
      for (const auto& p : current) {
        const std::int64_t n = p.n + dn;
        const std::int64_t m = p.m + dm;
        if (std::llabs(n) > std::numeric_limits<int>::max() ||
            std::llabs(m) > std::numeric_limits<int>::max()) {
          throw std::invalid_argument("fractal expansion index overflow");
        }
        next.push_back({static_cast<int>(n), static_cast<int>(m)});
      }
    }
    current = std::move(next);
    shift_n *= result.scale_base.n;
    shift_m *= result.scale_base.m;
  }

  result.elements = ElementSet(std::move(current), generator.pitch_x(), generator.pitch_y());
  return result;
}

ElementSet make_plus(int half_extent_x, int half_extent_y, double pitch_x, double pitch_y) {
  if (half_extent_x < 0 || half_extent_y < 0) {
    throw std::invalid_argument("half extents must be non-negative");
  }
  std::vector<Index2> pos;
  for (int n = -half_extent_x; n <= half_extent_x; ++n) pos.push_back({n, 0});
  for (int m = -half_extent_y; m <= half_extent_y; ++m) pos.push_back({0, m});
  return ElementSet(std::move(pos), pitch_x, pitch_y);
}

ElementSet make_x(int half_extent_x, int half_extent_y, double pitch_x, double pitch_y) {
  if (half_extent_x < 0 || half_extent_y < 0) {
    throw std::invalid_argument("half extents must be non-negative");
  }
  const int k_max = std::min(half_extent_x, half_extent_y);
  std::vector<Index2> pos;
  for (int k = -k_max; k <= k_max; ++k) {
    pos.push_back({k, k});
    pos.push_back({k, -k});
  }
  return ElementSet(std::move(pos), pitch_x, pitch_y);
}

ElementSet make_box(int half_extent_x, int half_extent_y, double pitch_x, double pitch_y) {
  if (half_extent_x < 1 || half_extent_y < 1) {
    throw std::invalid_argument("box shape needs half extents of at least 1");
  }
  std::vector<Index2> pos;
  for (int m = -half_extent_y; m <= half_extent_y; ++m) {
    pos.push_back({-half_extent_x, m});
    pos.push_back({half_extent_x, m});
  }
  for (int n = -half_extent_x; n <= half_extent_x; ++n) {
    pos.push_back({n, -half_extent_y});
    pos.push_back({n, half_extent_y});
  }
  return ElementSet(std::move(pos), pitch_x, pitch_y);
}

ElementSet make_nested(const NestedParams& params, double pitch_x, double pitch_y) {
  const int N = params.half_extent;
  const int p = params.inner_half_extent;
  const int s = params.outer_stride;
  if (N < 1 || p < 0 || s < 1 || p > N) {
    throw std::invalid_argument("invalid nested array parameters");
  }
  // Contiguity of the 1D sum set needs the stride to stay within the span of
  // the dense segment's self-sums.
  if (s > 2 * p + 1) {
    throw std::invalid_argument("nested outer stride too large for inner segment");
  }
  std::vector<int> axis;
  for (int a = -p; a <= p; ++a) axis.push_back(a);
  for (int o = p + s; o <= N; o += s) {
    axis.push_back(o);
    axis.push_back(-o);
  }
  std::vector<Index2> pos;
  pos.reserve(axis.size() * axis.size());
  for (int a : axis) {
    for (int b : axis) {
      pos.push_back({a, b});
    }
  }
  return ElementSet(std::move(pos), pitch_x, pitch_y);
}

}  // namespace coba3d
