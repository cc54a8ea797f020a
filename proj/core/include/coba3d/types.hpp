// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <compare>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace coba3d {

using cdouble = std::complex<double>;

/// Integer lattice index (n, m) of a transducer element or co-array position.
struct Index2 {
  int n = 0;
  int m = 0;

  friend auto operator<=>(const Index2&, const Index2&) = default;

  Index2 operator+(const Index2& o) const { return {n + o.n, m + o.m}; }
  Index2 operator-() const { return {-n, -m}; }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

/// Dense row-major complex matrix. Row index varies over n, column over m.
class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols, cdouble fill = {})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  cdouble& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cdouble& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  cdouble* data() { return data_.data(); }
  const cdouble* data() const { return data_.data(); }
  const std::vector<cdouble>& values() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cdouble> data_;
};

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace coba3d
