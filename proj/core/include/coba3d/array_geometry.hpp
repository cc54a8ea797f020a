// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "coba3d/types.hpp"

namespace coba3d {

/// A planar transducer array: duplicate-free integer lattice positions plus
/// the physical pitch in meters. Element (n, m) sits at (n*pitch_x, m*pitch_y, 0).
class ElementSet {
 public:
  ElementSet() = default;
  ElementSet(std::vector<Index2> positions, double pitch_x, double pitch_y);

  const std::vector<Index2>& positions() const { return positions_; }
  double pitch_x() const { return pitch_x_; }
  double pitch_y() const { return pitch_y_; }
  std::size_t size() const { return positions_.size(); }
  bool empty() const { return positions_.empty(); }

  bool contains(Index2 p) const;
  bool same_pitch(const ElementSet& other) const;

  /// Index bounding box {n_min, n_max, m_min, m_max}. Requires non-empty.
  std::array<int, 4> bounds() const;

  Vec3 position_of(Index2 p) const {
    return {p.n * pitch_x_, p.m * pitch_y_, 0.0};
  }

  friend bool operator==(const ElementSet& a, const ElementSet& b) = default;

 private:
  std::vector<Index2> positions_;  // sorted, unique
  double pitch_x_ = 0.0;
  double pitch_y_ = 0.0;
};

enum class WeightKind { IntrinsicCount, User, Effective };

/// Real weights indexed by lattice position. Support is sorted and unique.
class ApodizationMap {
 public:
  ApodizationMap() = default;
  ApodizationMap(std::vector<Index2> support, std::vector<double> values, WeightKind kind);

  /// Constant weight over the positions of `support`.
  static ApodizationMap uniform(const ElementSet& support, double value, WeightKind kind);

  const std::vector<Index2>& support() const { return support_; }
  const std::vector<double>& values() const { return values_; }
  WeightKind kind() const { return kind_; }
  std::size_t size() const { return support_.size(); }
  bool empty() const { return support_.empty(); }

  /// Weight at `p`, or 0 if `p` is outside the support.
  double value_at(Index2 p) const;
  bool contains(Index2 p) const;

 private:
  std::vector<Index2> support_;
  std::vector<double> values_;
  WeightKind kind_ = WeightKind::User;
};

/// Uniform planar array over [-N, N] x [-M, M].
ElementSet make_upa(int half_extent_x, int half_extent_y, double pitch_x, double pitch_y);

/// Sum co-array: all pairwise index sums of E. Pitches are inherited.
ElementSet sum_coarray(const ElementSet& e);

/// Ordered-pair multiplicity of each sum co-array position (the discrete
/// auto-convolution of the indicator matrix of E).
ApodizationMap intrinsic_apodization(const ElementSet& e);

/// True iff T is a proper subset of E and E is contained in sum_coarray(T).
bool is_sparse_wrt(const ElementSet& t, const ElementSet& e);

/// True iff T is invariant under 180-degree rotation, (n,m) -> (-n,-m).
bool is_symmetric(const ElementSet& t);

/// True iff sum_coarray(T) fills its index bounding box completely.
bool is_full_coarray(const ElementSet& t);

/// Result of a recursive fractal expansion of a generator array.
struct FractalArray {
  ElementSet elements;
  int order = 0;
  Index2 scale_base;                // per-step shift scale (C_x, C_y)
  bool generator_coarray_full = true;
  std::string warning;              // non-empty when the generator co-array has holes
};

/// Expands `generator` recursively: F_0 = {(0,0)}, F_{r+1} is |T| shifted
/// replicas of F_r with shifts scaled by the co-array row/column counts.
FractalArray fractal_expand(const ElementSet& generator, int order);

/// Central row plus central column of a (2N+1) x (2M+1) aperture.
ElementSet make_plus(int half_extent_x, int half_extent_y, double pitch_x, double pitch_y);

/// Both diagonals of the aperture (limited to the square min(N, M) box).
ElementSet make_x(int half_extent_x, int half_extent_y, double pitch_x, double pitch_y);

/// Perimeter ring of the aperture.
ElementSet make_box(int half_extent_x, int half_extent_y, double pitch_x, double pitch_y);

struct NestedParams {
  int half_extent = 15;       // aperture half extent N (per axis)
  int inner_half_extent = 3;  // dense central segment half extent
  int outer_stride = 4;       // spacing of the outer strided segment
};

/// Nested sparse array: the Cartesian product A x A of a 1D set A made of a
/// dense central segment [-p, p] and outer points +/-(p + k*stride) out to the
/// aperture edge. The sum co-array of the result covers the full aperture UPA.
ElementSet make_nested(const NestedParams& params, double pitch_x, double pitch_y);

}  // namespace coba3d
