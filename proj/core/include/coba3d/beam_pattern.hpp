// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "coba3d/array_geometry.hpp"
#include "coba3d/types.hpp"

namespace coba3d {

// Far-field narrow-band angular response. theta steers off broadside, phi
// selects the steering plane.
struct AngleGrid {
  std::vector<double> thetas_rad;
  std::vector<double> phis_rad;

  static AngleGrid regular(double theta_min_rad, double theta_max_rad, int n_theta,
                           std::vector<double> phis_rad);
  bool operator==(const AngleGrid&) const = default;
};

struct BeamPattern {
  AngleGrid grid;
  double wavelength = 0.0;
  CMat values;  // rows over theta, cols over phi
};

struct SpatialFreq {
  double sx = 0.0;  // radians per index step along n
  double sy = 0.0;  // radians per index step along m
};

SpatialFreq spatial_frequencies(double theta_rad, double phi_rad, double wavelength,
                                double pitch_x, double pitch_y);

// H(theta, phi) = sum over (n, m) of w[n,m] exp(-j(sx n + sy m)).
BeamPattern receive_beam_pattern(const ApodizationMap& weights, const AngleGrid& grid,
                                 double wavelength, double pitch_x, double pitch_y,
                                 int workers = 0);

// Convolutional-beamforming receive pattern: the DTFT over the sum co-array
// with weights w = w_effective * intrinsic multiplicity. Throws if the
// effective weights stray outside the co-array.
BeamPattern coba_receive_beam_pattern(const ElementSet& array,
                                      const ApodizationMap& effective_weights,
                                      const AngleGrid& grid, double wavelength, double pitch_x,
                                      double pitch_y, int workers = 0);

// Pointwise product of transmit and receive patterns.
BeamPattern two_way_pattern(const BeamPattern& tx, const BeamPattern& rx);

struct PatternMetrics {
  double mainlobe_width_deg = 0.0;   // between first minima around the peak
  double width_3db_deg = 0.0;        // auxiliary -3 dB width
  double peak_sidelobe_db = 0.0;     // re peak; 0 when flat
  bool flat = false;                 // no sidelobe structure (e.g. one element)
  std::string note;
};

// Profiles along theta in the phi slice holding the magnitude peak.
PatternMetrics pattern_metrics(const BeamPattern& bp);

}  // namespace coba3d
