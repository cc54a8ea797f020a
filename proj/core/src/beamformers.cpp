// SPDX-License-Identifier: Apache-2.0
#include "coba3d/beamformers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "coba3d/fft_conv.hpp"
#include "coba3d/parallel.hpp"

namespace coba3d {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = 0.5 * (lo + hi);
  } else {
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  }
  return v;
}

inline cdouble sqrt_signal(cdouble z) {
  const double m = std::abs(z);
  if (m == 0.0) return {};
  return z / std::sqrt(m);
}

}  // namespace

Vec3 ImagingGrid::direction_unit(std::size_t d) const {
  const double th = directions[d][0];
  const double ph = directions[d][1];
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

Vec3 ImagingGrid::voxel(std::size_t d, std::size_t depth_idx) const {
  return direction_unit(d) * depths_m[depth_idx];
}

ImagingGrid ImagingGrid::fan(double ax_min_rad, double ax_max_rad, int nx, double ay_min_rad,
                             double ay_max_rad, int ny, double depth_min_m, double depth_max_m,
                             int n_depths) {
  if (nx < 1 || ny < 1 || n_depths < 1) throw std::invalid_argument("empty imaging grid");
  ImagingGrid g;
  g.n_dir_x = nx;
  g.n_dir_y = ny;
  const auto axs = linspace(ax_min_rad, ax_max_rad, nx);
  const auto ays = linspace(ay_min_rad, ay_max_rad, ny);
  g.directions.reserve(static_cast<std::size_t>(nx) * ny);
  for (double ax : axs) {
    for (double ay : ays) {
      const Vec3 u = steering_dir({ax, ay});
      const double th = std::acos(std::clamp(u.z, -1.0, 1.0));
      const double ph = th < 1e-15 ? 0.0 : std::atan2(u.y, u.x);
      g.directions.push_back({th, ph});
    }
  }
  g.depths_m = linspace(depth_min_m, depth_max_m, n_depths);
  validate(g);
  return g;
}

void validate(const ImagingGrid& grid) {
  if (grid.directions.empty() || grid.depths_m.empty()) {
    throw std::invalid_argument("empty imaging grid");
  }
  if (static_cast<std::size_t>(grid.n_dir_x) * static_cast<std::size_t>(grid.n_dir_y) !=
      grid.directions.size()) {
    throw std::invalid_argument("imaging grid fan layout mismatch");
  }
  for (const auto& d : grid.directions) {
    if (!(std::abs(d[0]) < kPi / 2)) throw std::invalid_argument("grid theta out of range");
  }
  double prev = 0.0;
  for (double z : grid.depths_m) {
    if (!(z > prev)) throw std::invalid_argument("grid depths must be positive and increasing");
    prev = z;
  }
}

std::string to_string(BeamformerKind k) {
  switch (k) {
    case BeamformerKind::DAS:
      return "das";
    case BeamformerKind::COBA3D:
      return "coba3d";
    case BeamformerKind::SCOBA3D:
      return "scoba3d";
  }
  return "unknown";
}

CompoundField compound(const IQCube& cube, const ImagingGrid& grid, int workers,
                       std::size_t* truncated) {
  validate(grid);
  if (cube.scheme.events.empty()) {
    throw std::invalid_argument("cube carries no transmit scheme; assign one before compounding");
  }
  if (cube.n_elements != cube.rx_array.size() || cube.n_events != cube.scheme.events.size()) {
    throw std::invalid_argument("cube metadata inconsistent");
  }
  if (cube.samples.size() != cube.n_events * cube.n_elements * cube.n_time) {
    throw std::invalid_argument("cube sample count inconsistent");
  }

  const std::size_t n_el = cube.n_elements;
  const std::size_t n_dep = grid.depths_m.size();
  const std::size_t n_time = cube.n_time;
  const double fs = cube.sample_rate;
  const double t0 = cube.start_time;
  const double w0 = 2.0 * kPi * cube.center_freq;
  const double c = cube.sound_speed;
  const bool focused = cube.scheme.mode == TxMode::Focused;

  // Focused transmissions are already beamformed along their steering line,
  // so each grid direction uses only the best-aligned event.
  std::vector<std::size_t> matched(grid.n_directions(), 0);
  if (focused) {
    for (std::size_t d = 0; d < grid.n_directions(); ++d) {
      const Vec3 u = grid.direction_unit(d);
      double best = -2.0;
      for (std::size_t k = 0; k < cube.scheme.events.size(); ++k) {
        const double dot = steering_dir(cube.scheme.events[k]).dot(u);
        if (dot > best) {
          best = dot;
          matched[d] = k;
        }
      }
    }
  }

  CompoundField field;
  field.rx_array = cube.rx_array;
  field.grid = grid;
  field.center_freq = cube.center_freq;
  field.y.assign(grid.n_points() * n_el, cdouble{});

  std::atomic<std::size_t> trunc_total{0};
  parallel_for(grid.n_directions(), workers, [&](std::size_t d0, std::size_t d1) {
    std::size_t local_trunc = 0;
    std::vector<Vec3> voxels(n_dep);
    std::vector<double> rxdel(n_el * n_dep);
    std::vector<cdouble> rxph(n_el * n_dep);
    std::vector<double> txdel(n_dep);
    std::vector<cdouble> txph(n_dep);
    for (std::size_t d = d0; d < d1; ++d) {
      for (std::size_t i = 0; i < n_dep; ++i) voxels[i] = grid.voxel(d, i);
      for (std::size_t e = 0; e < n_el; ++e) {
        const Vec3 ep = cube.rx_array.position_of(cube.rx_array.positions()[e]);
        for (std::size_t i = 0; i < n_dep; ++i) {
          const double del = (voxels[i] - ep).norm() / c;
          rxdel[e * n_dep + i] = del;
          rxph[e * n_dep + i] = std::polar(1.0, w0 * del);
        }
      }
      const std::size_t k_begin = focused ? matched[d] : 0;
      const std::size_t k_end = focused ? matched[d] + 1 : cube.n_events;
      for (std::size_t k = k_begin; k < k_end; ++k) {
        for (std::size_t i = 0; i < n_dep; ++i) {
          txdel[i] = tx_delay(cube.scheme.events[k], cube.scheme, voxels[i], c);
          txph[i] = std::polar(1.0, w0 * txdel[i]);
        }
        for (std::size_t e = 0; e < n_el; ++e) {
          const cdouble* row = &cube.samples[(k * n_el + e) * n_time];
          cdouble* out = &field.y[(d * n_dep) * n_el + e];
          for (std::size_t i = 0; i < n_dep; ++i) {
            const double tau = txdel[i] + rxdel[e * n_dep + i];
            const double x = (tau - t0) * fs;
            if (!(x >= 0.0) || x > static_cast<double>(n_time - 1)) {
              ++local_trunc;
              continue;
            }
            cdouble s;
            if (n_time == 1) {
              s = row[0];
            } else {
              std::size_t ii = static_cast<std::size_t>(x);
              if (ii >= n_time - 1) ii = n_time - 2;
              const double frac = x - static_cast<double>(ii);
              s = row[ii] + frac * (row[ii + 1] - row[ii]);
            }
            out[i * n_el] += s * (txph[i] * rxph[e * n_dep + i]);
          }
        }
      }
    }
    trunc_total += local_trunc;
  });
  if (truncated) *truncated = trunc_total.load();
  return field;
}

CompoundField restrict_field(const CompoundField& field, const ElementSet& t) {
  if (!t.same_pitch(field.rx_array)) throw std::invalid_argument("pitch mismatch");
  const auto& full = field.rx_array.positions();
  std::vector<std::size_t> idx;
  idx.reserve(t.size());
  for (const auto& p : t.positions()) {
    const auto it = std::lower_bound(full.begin(), full.end(), p);
    if (it == full.end() || !(*it == p)) {
      throw std::invalid_argument("subset element missing from the field's receive array");
    }
    idx.push_back(static_cast<std::size_t>(it - full.begin()));
  }
  CompoundField out;
  out.rx_array = t;
  out.grid = field.grid;
  out.center_freq = field.center_freq;
  const std::size_t n_points = field.grid.n_points();
  out.y.resize(n_points * t.size());
  for (std::size_t pt = 0; pt < n_points; ++pt) {
    const cdouble* src = &field.y[pt * full.size()];
    cdouble* dst = &out.y[pt * t.size()];
    for (std::size_t e = 0; e < idx.size(); ++e) dst[e] = src[idx[e]];
  }
  return out;
}

Volume das(const CompoundField& field, const ApodizationMap& weights) {
  for (const auto& p : weights.support()) {
    if (!field.rx_array.contains(p)) {
      throw std::invalid_argument("weight outside the receive array");
    }
  }
  const std::size_t n_el = field.rx_array.size();
  std::vector<double> w(n_el);
  for (std::size_t e = 0; e < n_el; ++e) {
    w[e] = weights.value_at(field.rx_array.positions()[e]);
  }
  Volume vol;
  vol.grid = field.grid;
  vol.beamformer = BeamformerKind::DAS;
  const std::size_t n_points = field.grid.n_points();
  vol.values.resize(n_points);
  for (std::size_t pt = 0; pt < n_points; ++pt) {
    cdouble acc{};
    const cdouble* row = &field.y[pt * n_el];
    for (std::size_t e = 0; e < n_el; ++e) acc += w[e] * row[e];
    vol.values[pt] = acc;
  }
  return vol;
}

CompoundField sqrt_transform(const CompoundField& field) {
  CompoundField out = field;
  for (auto& z : out.y) z = sqrt_signal(z);
  return out;
}

CMat conv2d_self(const CMat& r, ConvMethod method) {
  if (r.empty()) throw std::invalid_argument("empty matrix");
  if (method == ConvMethod::Direct) return convolve_direct(r, r);
  FftConv2d ws(static_cast<int>(r.rows()), static_cast<int>(r.cols()));
  return ws.self_convolve(r);
}

ApodizationMap effective_weights(const ApodizationMap& user_weights, const ElementSet& array) {
  const ApodizationMap a = intrinsic_apodization(array);
  for (const auto& p : user_weights.support()) {
    if (!a.contains(p)) {
      throw std::invalid_argument("co-array hole: weight requested where multiplicity is zero");
    }
  }
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[i] = user_weights.value_at(a.support()[i]) / a.values()[i];
  }
  return ApodizationMap(a.support(), std::move(v), WeightKind::Effective);
}

ApodizationMap unity_raw_weights(const ElementSet& array) {
  return ApodizationMap::uniform(sum_coarray(array), 1.0, WeightKind::User);
}

namespace {

// Shared machinery of coba3d / scoba3d: sqrt-transformed element matrix,
// self-convolution over the aperture bounding box, weighted co-array sum.
struct ConvBeamformContext {
  std::size_t w = 0, h = 0;         // aperture bounding box
  std::vector<std::size_t> emap;    // element -> slot in the w x h matrix
  CMat wmat;                        // effective weights on the conv output grid
};

ConvBeamformContext make_context(const CompoundField& field, const ApodizationMap& user_weights) {
  const ElementSet& arr = field.rx_array;
  if (arr.empty()) throw std::invalid_argument("empty receive array");
  const auto [n0, n1, m0, m1] = arr.bounds();
  ConvBeamformContext ctx;
  ctx.w = static_cast<std::size_t>(n1 - n0 + 1);
  ctx.h = static_cast<std::size_t>(m1 - m0 + 1);
  ctx.emap.resize(arr.size());
  for (std::size_t e = 0; e < arr.size(); ++e) {
    const Index2 p = arr.positions()[e];
    ctx.emap[e] = static_cast<std::size_t>(p.n - n0) * ctx.h + static_cast<std::size_t>(p.m - m0);
  }
  const ApodizationMap weff = effective_weights(user_weights, arr);
  ctx.wmat = CMat(2 * ctx.w - 1, 2 * ctx.h - 1);
  for (std::size_t i = 0; i < weff.size(); ++i) {
    const Index2 p = weff.support()[i];
    ctx.wmat(static_cast<std::size_t>(p.n - 2 * n0), static_cast<std::size_t>(p.m - 2 * m0)) =
        weff.values()[i];
  }
  return ctx;
}

cdouble weighted_sum(const CMat& wmat, const CMat& c) {
  cdouble acc{};
  const std::size_t n = wmat.rows() * wmat.cols();
  const cdouble* wv = wmat.data();
  const cdouble* cv = c.data();
  for (std::size_t i = 0; i < n; ++i) acc += wv[i].real() * cv[i];
  return acc;
}

}  // namespace

Volume coba3d(const CompoundField& field, const ApodizationMap& user_weights, int workers) {
  const ElementSet& arr = field.rx_array;
  const auto [n0, n1, m0, m1] = arr.bounds();
  const std::size_t w = static_cast<std::size_t>(n1 - n0 + 1);
  const std::size_t h = static_cast<std::size_t>(m1 - m0 + 1);
  if (arr.size() != w * h) {
    throw std::invalid_argument(
        "receive array is not a full uniform planar array; use scoba3d for sparse arrays");
  }
  const ConvBeamformContext ctx = make_context(field, user_weights);

  Volume vol;
  vol.grid = field.grid;
  vol.beamformer = BeamformerKind::COBA3D;
  const std::size_t n_points = field.grid.n_points();
  const std::size_t n_el = arr.size();
  vol.values.resize(n_points);
  parallel_for(n_points, workers, [&](std::size_t p0, std::size_t p1) {
    FftConv2d ws(static_cast<int>(ctx.w), static_cast<int>(ctx.h));
    CMat r(ctx.w, ctx.h);
    for (std::size_t pt = p0; pt < p1; ++pt) {
      const cdouble* row = &field.y[pt * n_el];
      for (std::size_t e = 0; e < n_el; ++e) r.data()[ctx.emap[e]] = sqrt_signal(row[e]);
      const CMat c = ws.self_convolve(r);
      vol.values[pt] = weighted_sum(ctx.wmat, c);
    }
  });
  return vol;
}

Volume scoba3d(const CompoundField& field, const ApodizationMap& user_weights, ScobaPath path,
               int workers) {
  const ConvBeamformContext ctx = make_context(field, user_weights);
  const std::size_t n_el = field.rx_array.size();

  Volume vol;
  vol.grid = field.grid;
  vol.beamformer = BeamformerKind::SCOBA3D;
  const std::size_t n_points = field.grid.n_points();
  vol.values.resize(n_points);

  if (path == ScobaPath::ZeroFill) {
    parallel_for(n_points, workers, [&](std::size_t p0, std::size_t p1) {
      FftConv2d ws(static_cast<int>(ctx.w), static_cast<int>(ctx.h));
      CMat r(ctx.w, ctx.h);
      for (std::size_t pt = p0; pt < p1; ++pt) {
        std::fill(r.data(), r.data() + r.rows() * r.cols(), cdouble{});
        const cdouble* row = &field.y[pt * n_el];
        for (std::size_t e = 0; e < n_el; ++e) r.data()[ctx.emap[e]] = sqrt_signal(row[e]);
        const CMat c = ws.self_convolve(r);
        vol.values[pt] = weighted_sum(ctx.wmat, c);
      }
    });
    return vol;
  }

  // Pairwise path: accumulate products of every ordered element pair at the
  // summed co-array slot.
  const std::size_t out_cols = 2 * ctx.h - 1;
  std::vector<std::size_t> rows(n_el), cols(n_el);
  for (std::size_t e = 0; e < n_el; ++e) {
    rows[e] = ctx.emap[e] / ctx.h;
    cols[e] = ctx.emap[e] % ctx.h;
  }
  parallel_for(n_points, workers, [&](std::size_t p0, std::size_t p1) {
    CMat c(2 * ctx.w - 1, out_cols);
    std::vector<cdouble> r(n_el);
    for (std::size_t pt = p0; pt < p1; ++pt) {
      std::fill(c.data(), c.data() + c.rows() * c.cols(), cdouble{});
      const cdouble* row = &field.y[pt * n_el];
      for (std::size_t e = 0; e < n_el; ++e) r[e] = sqrt_signal(row[e]);
      for (std::size_t e1 = 0; e1 < n_el; ++e1) {
        const cdouble v1 = r[e1];
        if (v1 == cdouble{}) continue;
        cdouble* base = c.data() + rows[e1] * out_cols + cols[e1];
        for (std::size_t e2 = 0; e2 < n_el; ++e2) {
          base[rows[e2] * out_cols + cols[e2]] += v1 * r[e2];
        }
      }
      vol.values[pt] = weighted_sum(ctx.wmat, c);
    }
  });
  return vol;
}

}  // namespace coba3d
