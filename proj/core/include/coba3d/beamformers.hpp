// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "coba3d/acoustic_sim.hpp"
#include "coba3d/array_geometry.hpp"
#include "coba3d/types.hpp"

namespace coba3d {

/// Steered-ray imaging grid: a direction fan times a depth axis. A voxel is
/// depth * unit(theta, phi) with the physics spherical convention
/// u = (sin t cos p, sin t sin p, cos t). Depths are ranges along the ray
/// (z = c t / 2 for round-trip time t).
struct ImagingGrid {
  std::vector<std::array<double, 2>> directions;  // (theta, phi) radians
  std::vector<double> depths_m;                   // strictly increasing, > 0
  int n_dir_x = 0;  // fan layout: directions.size() == n_dir_x * n_dir_y,
  int n_dir_y = 0;  // x index varying slowest

  std::size_t n_directions() const { return directions.size(); }
  std::size_t n_points() const { return directions.size() * depths_m.size(); }

  Vec3 direction_unit(std::size_t d) const;
  Vec3 voxel(std::size_t d, std::size_t depth_idx) const;

  /// Fan built from steering angles (ax about y, ay about x), matching the
  /// transmit convention, so grid rows line up with steered events.
  static ImagingGrid fan(double ax_min_rad, double ax_max_rad, int nx, double ay_min_rad,
                         double ay_max_rad, int ny, double depth_min_m, double depth_max_m,
                         int n_depths);

  bool operator==(const ImagingGrid&) const = default;
};

void validate(const ImagingGrid& grid);

/// Per-element signals after transmit compounding, sampled on the grid.
struct CompoundField {
  ElementSet rx_array;
  ImagingGrid grid;
  double center_freq = 0.0;
  std::vector<cdouble> y;  // (grid point, element), element fastest

  cdouble& at(std::size_t point, std::size_t element) {
    return y[point * rx_array.size() + element];
  }
  const cdouble& at(std::size_t point, std::size_t element) const {
    return y[point * rx_array.size() + element];
  }
};

enum class BeamformerKind { DAS, COBA3D, SCOBA3D };

std::string to_string(BeamformerKind k);

struct Volume {
  ImagingGrid grid;
  std::vector<cdouble> values;  // (direction, depth), depth fastest
  BeamformerKind beamformer = BeamformerKind::DAS;
  std::string provenance;  // config hash, filled by the driver

  cdouble& at(std::size_t d, std::size_t depth_idx) {
    return values[d * grid.depths_m.size() + depth_idx];
  }
  const cdouble& at(std::size_t d, std::size_t depth_idx) const {
    return values[d * grid.depths_m.size() + depth_idx];
  }
};

/// Transmit compounding: delay-align every event's echo at each grid point
/// (linear interpolation plus carrier rotation exp(+j 2 pi f0 tau)) and sum
/// over events. Focused schemes skip the sum and use the one event whose
/// steering matches the grid direction best. Returns the number of requested
/// samples that fell outside the cube extent via `truncated` when non-null.
CompoundField compound(const IQCube& cube, const ImagingGrid& grid, int workers = 0,
                       std::size_t* truncated = nullptr);

/// Keep only the rows of `t` (t must be a subset of field.rx_array).
CompoundField restrict_field(const CompoundField& field, const ElementSet& t);

/// b(g) = sum of w[n,m] * y[n,m](g). Weight support must lie inside rx_array.
Volume das(const CompoundField& field, const ApodizationMap& weights);

/// r = sqrt(|y|) exp(j angle(y)) elementwise.
CompoundField sqrt_transform(const CompoundField& field);

enum class ConvMethod { Direct, Fourier };

/// Full 2D self-convolution; (2N+1)x(2M+1) input gives (4N+1)x(4M+1) output.
CMat conv2d_self(const CMat& r, ConvMethod method);

/// Effective weights w~ = w / a on the sum co-array of `array`, where a is
/// the intrinsic multiplicity. User support outside the co-array is an error.
ApodizationMap effective_weights(const ApodizationMap& user_weights, const ElementSet& array);

/// Raw weights that cancel the intrinsic apodization (w == 1 on the co-array,
/// i.e. w~ = 1/a). The default weighting everywhere in the driver.
ApodizationMap unity_raw_weights(const ElementSet& array);

/// Convolutional beamforming on a full uniform planar array: square-root
/// transform, per-point 2D self-convolution over the aperture, then a
/// weighted co-array sum with w~ = user_weights / a. Rejects non-UPA arrays.
Volume coba3d(const CompoundField& field, const ApodizationMap& user_weights, int workers = 0);

enum class ScobaPath { Pairwise, ZeroFill };

/// Sparse convolutional beamforming on T = field.rx_array: co-array signals
/// from pairwise products over T (or by zero-filled convolution), summed with
/// w~ = user_weights / a_T over the co-array support only.
Volume scoba3d(const CompoundField& field, const ApodizationMap& user_weights,
               ScobaPath path = ScobaPath::ZeroFill, int workers = 0);

}  // namespace coba3d
