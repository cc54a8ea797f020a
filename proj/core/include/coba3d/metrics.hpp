// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "coba3d/beamformers.hpp"
#include "coba3d/types.hpp"

namespace coba3d {

enum class SlicePlane { XZ, YZ };

struct SliceSpec {
  SlicePlane plane = SlicePlane::XZ;
  int fixed_index = 0;  // index along the other fan axis
};

/// Envelope-detected, log-compressed slice. Rows follow the in-plane fan
/// axis, columns the depth axis. Peak is exactly 0 dB; floor is clamped.
struct BModeImage {
  std::size_t n_lateral = 0;
  std::size_t n_depth = 0;
  std::vector<double> db;  // (lateral, depth), depth fastest
  double dynamic_range_db = 60.0;
  SliceSpec slice;

  double& at(std::size_t l, std::size_t d) { return db[l * n_depth + d]; }
  double at(std::size_t l, std::size_t d) const { return db[l * n_depth + d]; }
};

BModeImage envelope_logcompress(const Volume& vol, double dynamic_range_db,
                                const SliceSpec& slice);

/// Grid-point indices (direction * n_depths + depth) of voxels inside the
/// sphere. Empty when the sphere misses the grid.
std::vector<std::size_t> rasterize_sphere(const ImagingGrid& grid, const Vec3& center,
                                          double radius);

/// 20 log10(mean cyst envelope / mean background envelope), pre-compression.
/// Regions must be non-empty and disjoint.
double contrast_ratio(const Volume& vol, const std::vector<std::size_t>& cyst_region,
                      const std::vector<std::size_t>& background_region);

enum class ProfileAxis { LateralX, LateralY, Axial };

/// Grid point with the largest envelope.
std::size_t peak_grid_point(const Volume& vol);

/// Width of the envelope at half its peak along the axis through the given
/// grid point, in meters. The profile is resampled 10x with linear
/// interpolation first. Throws "unresolved" when the profile never drops
/// below half max on either side.
double fwhm(const Volume& vol, ProfileAxis axis, std::size_t through_point);

}  // namespace coba3d
