// SPDX-License-Identifier: Apache-2.0
#include "coba3d/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace coba3d {

namespace {

struct SliceDims {
  std::size_t n_lateral;
  std::size_t n_depth;
};

std::size_t slice_dir_index(const Volume& vol, const SliceSpec& slice, std::size_t lateral) {
  const std::size_t ny = static_cast<std::size_t>(vol.grid.n_dir_y);
  if (slice.plane == SlicePlane::XZ) {
    return lateral * ny + static_cast<std::size_t>(slice.fixed_index);
  }
  return static_cast<std::size_t>(slice.fixed_index) * ny + lateral;
}

SliceDims slice_dims(const Volume& vol, const SliceSpec& slice) {
  const std::size_t nx = static_cast<std::size_t>(vol.grid.n_dir_x);
  const std::size_t ny = static_cast<std::size_t>(vol.grid.n_dir_y);
  const std::size_t fixed_limit = slice.plane == SlicePlane::XZ ? ny : nx;
  if (slice.fixed_index < 0 || static_cast<std::size_t>(slice.fixed_index) >= fixed_limit) {
    throw std::invalid_argument("slice index out of range");
  }
  return {slice.plane == SlicePlane::XZ ? nx : ny, vol.grid.depths_m.size()};
}

}  // namespace

BModeImage envelope_logcompress(const Volume& vol, double dynamic_range_db,
                                const SliceSpec& slice) {
  validate(vol.grid);
  if (!(dynamic_range_db > 0.0)) throw std::invalid_argument("dynamic range must be positive");
  const SliceDims dims = slice_dims(vol, slice);

  BModeImage img;
  img.n_lateral = dims.n_lateral;
  img.n_depth = dims.n_depth;
  img.dynamic_range_db = dynamic_range_db;
  img.slice = slice;
  img.db.resize(dims.n_lateral * dims.n_depth);

  double peak = 0.0;
  for (std::size_t l = 0; l < dims.n_lateral; ++l) {
    const std::size_t d = slice_dir_index(vol, slice, l);
    for (std::size_t i = 0; i < dims.n_depth; ++i) {
      peak = std::max(peak, std::abs(vol.at(d, i)));
    }
  }
  if (!(peak > 0.0)) throw std::invalid_argument("all-zero volume slice");

  for (std::size_t l = 0; l < dims.n_lateral; ++l) {
    const std::size_t d = slice_dir_index(vol, slice, l);
    for (std::size_t i = 0; i < dims.n_depth; ++i) {
      const double env = std::abs(vol.at(d, i));
      double db = env > 0.0 ? 20.0 * std::log10(env / peak) : -dynamic_range_db;
      img.at(l, i) = std::max(db, -dynamic_range_db);
    }
  }
  return img;
}

std::vector<std::size_t> rasterize_sphere(const ImagingGrid& grid, const Vec3& center,
                                          double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  std::vector<std::size_t> out;
  const double r2 = radius * radius;
  const std::size_t n_dep = grid.depths_m.size();
  for (std::size_t d = 0; d < grid.n_directions(); ++d) {
    for (std::size_t i = 0; i < n_dep; ++i) {
      const Vec3 delta = grid.voxel(d, i) - center;
      if (delta.dot(delta) <= r2) out.push_back(d * n_dep + i);
    }
  }
  return out;
}

double contrast_ratio(const Volume& vol, const std::vector<std::size_t>& cyst_region,
                      const std::vector<std::size_t>& background_region) {
  if (cyst_region.empty() || background_region.empty()) {
    throw std::invalid_argument("contrast regions must be non-empty");
  }
  std::unordered_set<std::size_t> cyst_set(cyst_region.begin(), cyst_region.end());
  for (std::size_t i : background_region) {
    if (cyst_set.count(i)) throw std::invalid_argument("contrast regions overlap");
  }
  auto mean_env = [&](const std::vector<std::size_t>& region) {
    double acc = 0.0;
    for (std::size_t i : region) {
      if (i >= vol.values.size()) throw std::invalid_argument("region index out of range");
      acc += std::abs(vol.values[i]);
    }
    return acc / static_cast<double>(region.size());
  };
  const double mu_cyst = mean_env(cyst_region);
  const double mu_bck = mean_env(background_region);
  if (!(mu_bck > 0.0)) throw std::runtime_error("zero background mean");
  return 20.0 * std::log10(mu_cyst / mu_bck);
}

std::size_t peak_grid_point(const Volume& vol) {
  double best = -1.0;
  std::size_t at = 0;
  for (std::size_t i = 0; i < vol.values.size(); ++i) {
    const double m = std::abs(vol.values[i]);
    if (m > best) {
      best = m;
      at = i;
    }
  }
  if (!(best > 0.0)) throw std::invalid_argument("all-zero volume");
  return at;
}

double fwhm(const Volume& vol, ProfileAxis axis, std::size_t through_point) {
  validate(vol.grid);
  if (through_point >= vol.values.size()) throw std::invalid_argument("grid point out of range");
  const std::size_t n_dep = vol.grid.depths_m.size();
  const std::size_t ny = static_cast<std::size_t>(vol.grid.n_dir_y);
  const std::size_t nx = static_cast<std::size_t>(vol.grid.n_dir_x);
  const std::size_t dir = through_point / n_dep;
  const std::size_t idep = through_point % n_dep;
  const std::size_t ix = dir / ny;
  const std::size_t iy = dir % ny;

  std::vector<double> pos, env;
  std::size_t at = 0;
  switch (axis) {
    case ProfileAxis::LateralX:
      pos.resize(nx);
      env.resize(nx);
      for (std::size_t j = 0; j < nx; ++j) {
        const std::size_t d = j * ny + iy;
        pos[j] = vol.grid.voxel(d, idep).x;
        env[j] = std::abs(vol.at(d, idep));
      }
      at = ix;
      break;
    case ProfileAxis::LateralY:
      pos.resize(ny);
      env.resize(ny);
      for (std::size_t j = 0; j < ny; ++j) {
        const std::size_t d = ix * ny + j;
        pos[j] = vol.grid.voxel(d, idep).y;
        env[j] = std::abs(vol.at(d, idep));
      }
      at = iy;
      break;
    case ProfileAxis::Axial:
      pos.resize(n_dep);
      env.resize(n_dep);
      for (std::size_t j = 0; j < n_dep; ++j) {
        pos[j] = vol.grid.depths_m[j];
        env[j] = std::abs(vol.at(dir, j));
      }
      at = idep;
      break;
  }
  if (env.size() < 2) throw std::runtime_error("profile too short for a width measurement");
  if (!(env[at] > 0.0)) throw std::invalid_argument("profile peak is zero");
  if ((at > 0 && env[at - 1] > env[at]) || (at + 1 < env.size() && env[at + 1] > env[at])) {
    throw std::invalid_argument("through point is not a local maximum along the axis");
  }

  // The profile is piecewise linear after the 10x resampling, so the half
  // crossings can be interpolated directly on the original segments.
  const double half = 0.5 * env[at];
  double left = 0.0, right = 0.0;
  bool found_left = false, found_right = false;
  for (std::size_t j = at; j > 0; --j) {
    if (env[j - 1] <= half) {
      const double f = (env[j] - half) / (env[j] - env[j - 1]);
      left = pos[j] + f * (pos[j - 1] - pos[j]);
      found_left = true;
      break;
    }
  }
  for (std::size_t j = at; j + 1 < env.size(); ++j) {
    if (env[j + 1] <= half) {
      const double f = (env[j] - half) / (env[j] - env[j + 1]);
      right = pos[j] + f * (pos[j + 1] - pos[j]);
      found_right = true;
      break;
    }
  }
  if (!found_left || !found_right) {
    throw std::runtime_error("unresolved: profile never falls below half maximum");
  }
  return std::abs(right - left);
}

}  // namespace coba3d
