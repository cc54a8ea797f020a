// SPDX-License-Identifier: Apache-2.0
#include "coba3d/beam_pattern.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coba3d/parallel.hpp"

namespace coba3d {

AngleGrid AngleGrid::regular(double theta_min_rad, double theta_max_rad, int n_theta,
                             std::vector<double> phis_rad) {
  if (n_theta < 1 || phis_rad.empty()) throw std::invalid_argument("empty angle grid");
  AngleGrid g;
  g.phis_rad = std::move(phis_rad);
  g.thetas_rad.resize(n_theta);
  if (n_theta == 1) {
    g.thetas_rad[0] = 0.5 * (theta_min_rad + theta_max_rad);
  } else {
    const double step = (theta_max_rad - theta_min_rad) / (n_theta - 1);
    for (int i = 0; i < n_theta; ++i) g.thetas_rad[i] = theta_min_rad + step * i;
  }
  return g;
}

SpatialFreq spatial_frequencies(double theta_rad, double phi_rad, double wavelength,
                                double pitch_x, double pitch_y) {
  if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be positive");
  const double k = 2.0 * kPi / wavelength;
  return {k * pitch_x * std::sin(theta_rad) * std::cos(phi_rad),
          k * pitch_y * std::sin(theta_rad) * std::sin(phi_rad)};
}

BeamPattern receive_beam_pattern(const ApodizationMap& weights, const AngleGrid& grid,
                                 double wavelength, double pitch_x, double pitch_y, int workers) {
  if (weights.empty()) throw std::invalid_argument("empty weights");
  if (grid.thetas_rad.empty() || grid.phis_rad.empty()) {
    throw std::invalid_argument("empty angle grid");
  }
  BeamPattern bp;
  bp.grid = grid;
  bp.wavelength = wavelength;
  bp.values = CMat(grid.thetas_rad.size(), grid.phis_rad.size());
  const auto& support = weights.support();
  const auto& w = weights.values();
  parallel_for(grid.thetas_rad.size(), workers, [&](std::size_t t0, std::size_t t1) {
    for (std::size_t it = t0; it < t1; ++it) {
      for (std::size_t ip = 0; ip < grid.phis_rad.size(); ++ip) {
        const SpatialFreq s = spatial_frequencies(grid.thetas_rad[it], grid.phis_rad[ip],
                                                  wavelength, pitch_x, pitch_y);
        cdouble acc{};
        for (std::size_t i = 0; i < support.size(); ++i) {
          acc += w[i] * std::polar(1.0, -(s.sx * support[i].n + s.sy * support[i].m));
        }
        bp.values(it, ip) = acc;
      }
    }
  });
  return bp;
}

BeamPattern coba_receive_beam_pattern(const ElementSet& array,
                                      const ApodizationMap& effective_weights,
                                      const AngleGrid& grid, double wavelength, double pitch_x,
                                      double pitch_y, int workers) {
  const ApodizationMap intrinsic = intrinsic_apodization(array);
  for (const auto& p : effective_weights.support()) {
    if (!intrinsic.contains(p)) {
      throw std::invalid_argument("effective weight outside the sum co-array");
    }
  }
  // Aperture function of the convolution output: w = w_eff * multiplicity.
  std::vector<double> combined(intrinsic.size());
  for (std::size_t i = 0; i < intrinsic.size(); ++i) {
    combined[i] = effective_weights.value_at(intrinsic.support()[i]) * intrinsic.values()[i];
  }
  ApodizationMap w(intrinsic.support(), std::move(combined), WeightKind::User);
  return receive_beam_pattern(w, grid, wavelength, pitch_x, pitch_y, workers);
}

BeamPattern two_way_pattern(const BeamPattern& tx, const BeamPattern& rx) {
  if (!(tx.grid == rx.grid) || tx.wavelength != rx.wavelength) {
    throw std::invalid_argument("beam pattern grid/wavelength mismatch");
  }
  BeamPattern out = tx;
  for (std::size_t r = 0; r < out.values.rows(); ++r) {
    for (std::size_t c = 0; c < out.values.cols(); ++c) {
      out.values(r, c) *= rx.values(r, c);
    }
  }
  return out;
}

PatternMetrics pattern_metrics(const BeamPattern& bp) {
  const std::size_t nt = bp.values.rows();
  const std::size_t np = bp.values.cols();
  if (nt == 0 || np == 0) throw std::invalid_argument("empty beam pattern");

  std::size_t pt = 0, pp = 0;
  double peak = -1.0;
  double low = 1e300;
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t p = 0; p < np; ++p) {
      const double m = std::abs(bp.values(t, p));
      if (m > peak) {
        peak = m;
        pt = t;
        pp = p;
      }
      low = std::min(low, m);
    }
  }

  PatternMetrics out;
  const double span_deg =
      rad2deg(bp.grid.thetas_rad.back() - bp.grid.thetas_rad.front());
  if (peak <= 0.0 || peak - low <= 1e-12 * peak) {
    out.flat = true;
    out.note = "no sidelobes";
    out.mainlobe_width_deg = std::abs(span_deg);
    out.width_3db_deg = std::abs(span_deg);
    out.peak_sidelobe_db = 0.0;
    return out;
  }

  // Theta profile through the peak's phi slice.
  std::vector<double> prof(nt);
  for (std::size_t t = 0; t < nt; ++t) prof[t] = std::abs(bp.values(t, pp));

  // First local minima bracketing the peak.
  std::size_t left = pt;
  while (left > 0 && prof[left - 1] < prof[left]) --left;
  std::size_t right = pt;
  while (right + 1 < nt && prof[right + 1] < prof[right]) ++right;
  if (left == pt && right == pt && nt > 1) {
    out.note = "peak at grid edge";
  }
  out.mainlobe_width_deg =
      rad2deg(bp.grid.thetas_rad[right] - bp.grid.thetas_rad[left]);

  // -3 dB crossings with linear interpolation on the magnitude profile.
  const double half = peak * std::pow(10.0, -3.0 / 20.0);
  double th_l = bp.grid.thetas_rad.front();
  for (std::size_t t = pt; t > 0; --t) {
    if (prof[t - 1] <= half) {
      const double f = (prof[t] - half) / (prof[t] - prof[t - 1]);
      th_l = bp.grid.thetas_rad[t] +
             f * (bp.grid.thetas_rad[t - 1] - bp.grid.thetas_rad[t]);
      break;
    }
  }
  double th_r = bp.grid.thetas_rad.back();
  for (std::size_t t = pt; t + 1 < nt; ++t) {
    if (prof[t + 1] <= half) {
      const double f = (prof[t] - half) / (prof[t] - prof[t + 1]);
      th_r = bp.grid.thetas_rad[t] +
             f * (bp.grid.thetas_rad[t + 1] - bp.grid.thetas_rad[t]);
      break;
    }
  }
  out.width_3db_deg = rad2deg(th_r - th_l);

  double side = 0.0;
  bool any = false;
  for (std::size_t t = 0; t < nt; ++t) {
    if (t >= left && t <= right) continue;
    side = std::max(side, prof[t]);
    any = true;
  }
  if (!any || side <= 0.0) {
    out.flat = true;
    out.note = out.note.empty() ? "no sidelobes" : out.note;
    out.peak_sidelobe_db = 0.0;
  } else {
    out.peak_sidelobe_db = 20.0 * std::log10(side / peak);
  }
  return out;
}

}  // namespace coba3d
