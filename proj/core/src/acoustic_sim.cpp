// SPDX-License-Identifier: Apache-2.0
#include "coba3d/acoustic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "coba3d/parallel.hpp"

namespace coba3d {

namespace {

// -6 dB full duration of the envelope equals n_cycles / f0.
double pulse_sigma(double f0, double n_cycles) {
  return 0.5 * n_cycles / f0 / std::sqrt(2.0 * std::log(2.0));
}

void validate_scheme(const TransmitScheme& scheme) {
  if (scheme.events.empty()) throw std::invalid_argument("transmit scheme has no events");
  if (scheme.mode == TxMode::Focused && !(scheme.focal_z_m > 0.0)) {
    throw std::invalid_argument("focused transmission needs focal_z > 0");
  }
  if (scheme.mode == TxMode::Diverging && !(scheme.focal_z_m < 0.0)) {
    throw std::invalid_argument("diverging transmission needs focal_z < 0");
  }
}

}  // namespace

std::vector<TxEvent> make_event_grid(double alpha_min_rad, double alpha_max_rad, int n_alpha,
                                     double beta_min_rad, double beta_max_rad, int n_beta) {
  if (n_alpha < 1 || n_beta < 1) throw std::invalid_argument("event grid counts must be >= 1");
  auto linspace = [](double lo, double hi, int n) {
    std::vector<double> v(n);
    if (n == 1) {
      v[0] = 0.5 * (lo + hi);
    } else {
      for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    }
    return v;
  };
  const auto alphas = linspace(alpha_min_rad, alpha_max_rad, n_alpha);
  const auto betas = linspace(beta_min_rad, beta_max_rad, n_beta);
  std::vector<TxEvent> events;
  events.reserve(static_cast<std::size_t>(n_alpha) * n_beta);
  for (double a : alphas) {
    for (double b : betas) {
      events.push_back({a, b});
    }
  }
  return events;
}

Vec3 steering_dir(const TxEvent& e) {
  // R_y(alpha) * R_x(beta) applied to +z.
  return {std::sin(e.alpha_rad) * std::cos(e.beta_rad), -std::sin(e.beta_rad),
          std::cos(e.alpha_rad) * std::cos(e.beta_rad)};
}

Vec3 focal_point(const TransmitScheme& scheme, const TxEvent& e) {
  return steering_dir(e) * scheme.focal_z_m;
}

double tx_delay(const TxEvent& event, const TransmitScheme& scheme, const Vec3& voxel,
                double sound_speed) {
  const Vec3 f = focal_point(scheme, event);
  if (scheme.mode == TxMode::Diverging) {
    // Spherical wave from the virtual source; t = 0 as it crosses the origin.
    return ((voxel - f).norm() - std::abs(scheme.focal_z_m)) / sound_speed;
  }
  // Focused: wavefront converges on f, then re-diverges. Sign flips across
  // the focal plane so on-axis depth z gives exactly z / c.
  const Vec3 d = voxel - f;
  const double s = d.dot(steering_dir(event)) >= 0.0 ? 1.0 : -1.0;
  return (scheme.focal_z_m + s * d.norm()) / sound_speed;
}

double rx_delay(Index2 element, double pitch_x, double pitch_y, const Vec3& voxel,
                double sound_speed) {
  const Vec3 e{element.n * pitch_x, element.m * pitch_y, 0.0};
  return (voxel - e).norm() / sound_speed;
}

cdouble pulse(double t, double f0, double n_cycles) {
  if (!(f0 > 0.0) || !(n_cycles > 0.0)) {
    throw std::invalid_argument("pulse needs positive f0 and n_cycles");
  }
  const double s = pulse_sigma(f0, n_cycles);
  return {std::exp(-t * t / (2.0 * s * s)), 0.0};
}

IQCube simulate(const Phantom& phantom, const TransmitScheme& scheme, const ElementSet& rx_array,
                const AcqParams& acq, int workers) {
  if (phantom.scatterers.empty()) throw std::invalid_argument("empty phantom");
  for (const auto& s : phantom.scatterers) {
    if (!(s.position.z > 0.0)) throw std::invalid_argument("scatterer not in front of the array");
    if (!std::isfinite(s.amplitude)) throw std::invalid_argument("non-finite amplitude");
  }
  validate_scheme(scheme);
  if (rx_array.empty()) throw std::invalid_argument("empty receive array");
  if (!(acq.sample_rate > 0.0) || !(acq.center_freq > 0.0) || !(acq.n_cycles > 0.0) ||
      !(acq.sound_speed > 0.0)) {
    throw std::invalid_argument("invalid acquisition parameters");
  }
  if (!(acq.t_start >= 0.0) || !(acq.t_max > acq.t_start)) {
    throw std::invalid_argument("invalid sampling window");
  }

  const std::size_t n_sc = phantom.scatterers.size();
  const std::size_t n_el = rx_array.size();
  const std::size_t n_ev = scheme.events.size();
  const double fs = acq.sample_rate;
  const double dt = 1.0 / fs;
  const double c = acq.sound_speed;
  const double w0 = 2.0 * kPi * acq.center_freq;
  const double sigma = pulse_sigma(acq.center_freq, acq.n_cycles);
  const double cut = 8.0 * sigma;  // envelope below 1.3e-14 beyond this
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);

  // Reject windows that cut off a round trip. The bounding-box corners give a
  // cheap upper bound on the receive delay; only near-misses get the exact
  // per-element check.
  const auto [n0, n1, m0, m1] = rx_array.bounds();
  const Vec3 corners[4] = {{n0 * rx_array.pitch_x(), m0 * rx_array.pitch_y(), 0.0},
                           {n0 * rx_array.pitch_x(), m1 * rx_array.pitch_y(), 0.0},
                           {n1 * rx_array.pitch_x(), m0 * rx_array.pitch_y(), 0.0},
                           {n1 * rx_array.pitch_x(), m1 * rx_array.pitch_y(), 0.0}};
  std::vector<std::size_t> truncated;
  for (std::size_t s = 0; s < n_sc; ++s) {
    const Vec3 p = phantom.scatterers[s].position;
    double tx_max = -1e300;
    for (const auto& ev : scheme.events) {
      tx_max = std::max(tx_max, tx_delay(ev, scheme, p, c));
    }
    double rx_bound = 0.0;
    for (const auto& corner : corners) {
      rx_bound = std::max(rx_bound, (p - corner).norm() / c);
    }
    if (tx_max + rx_bound > acq.t_max) {
      double rx_max = 0.0;
      for (const auto& e : rx_array.positions()) {
        rx_max = std::max(rx_max,
                          rx_delay(e, rx_array.pitch_x(), rx_array.pitch_y(), p, c));
      }
      if (tx_max + rx_max > acq.t_max) truncated.push_back(s);
    }
  }
  if (!truncated.empty()) {
    std::ostringstream msg;
    msg << "t_max truncates " << truncated.size() << " scatterer(s); indices:";
    for (std::size_t i = 0; i < truncated.size() && i < 10; ++i) msg << ' ' << truncated[i];
    if (truncated.size() > 10) msg << " ...";
    throw std::invalid_argument(msg.str());
  }

  IQCube cube;
  cube.n_events = n_ev;
  cube.n_elements = n_el;
  cube.n_time = static_cast<std::size_t>(
                    std::floor((acq.t_max - acq.t_start) * fs * (1.0 + 1e-12))) +
                1;
  cube.sample_rate = fs;
  cube.center_freq = acq.center_freq;
  cube.start_time = acq.t_start;
  cube.sound_speed = c;
  cube.rx_array = rx_array;
  cube.scheme = scheme;
  cube.samples.assign(n_ev * n_el * cube.n_time, cdouble{});

  // Receive delays and carrier phasors are event-independent; compute once.
  std::vector<double> rxd(n_el * n_sc);
  std::vector<cdouble> rxp(n_el * n_sc);
  parallel_for(n_el, workers, [&](std::size_t e0, std::size_t e1) {
    for (std::size_t e = e0; e < e1; ++e) {
      const Index2 el = rx_array.positions()[e];
      for (std::size_t s = 0; s < n_sc; ++s) {
        const double d = rx_delay(el, rx_array.pitch_x(), rx_array.pitch_y(),
                                  phantom.scatterers[s].position, c);
        rxd[e * n_sc + s] = d;
        rxp[e * n_sc + s] = std::polar(1.0, -w0 * d);
      }
    }
  });

  const std::size_t n_time = cube.n_time;
  const double t_start = acq.t_start;
  // Gaussian evaluated by recurrence: g[i+1] = g[i]*u[i]*c1, u[i+1] = u[i]*c2.
  const double c1 = std::exp(-inv2s2 * dt * dt);
  const double c2 = c1 * c1;

  parallel_for(n_ev, workers, [&](std::size_t k0, std::size_t k1) {
    std::vector<double> txd(n_sc);
    std::vector<cdouble> txp(n_sc);
    std::vector<double> txr(n_sc);
    for (std::size_t k = k0; k < k1; ++k) {
      const TxEvent ev = scheme.events[k];
      const Vec3 fp = focal_point(scheme, ev);
      for (std::size_t s = 0; s < n_sc; ++s) {
        const Vec3 p = phantom.scatterers[s].position;
        txd[s] = tx_delay(ev, scheme, p, c);
        txp[s] = std::polar(1.0, -w0 * txd[s]);
        txr[s] = (p - fp).norm();
      }
      for (std::size_t e = 0; e < n_el; ++e) {
        cdouble* row = &cube.samples[(k * n_el + e) * n_time];
        for (std::size_t s = 0; s < n_sc; ++s) {
          const double tau = txd[s] + rxd[e * n_sc + s];
          const long long i0 =
              std::max<long long>(0, static_cast<long long>(
                                         std::ceil((tau - cut - t_start) * fs)));
          const long long i1 = std::min<long long>(
              static_cast<long long>(n_time) - 1,
              static_cast<long long>(std::floor((tau + cut - t_start) * fs)));
          if (i0 > i1) continue;
          double amp = phantom.scatterers[s].amplitude;
          if (acq.spreading) {
            amp /= std::max(1e-9, txr[s]) * std::max(1e-9, rxd[e * n_sc + s] * c);
          }
          const cdouble phasor = amp * txp[s] * rxp[e * n_sc + s];
          const double d0 = (t_start + i0 * dt) - tau;
          double g = std::exp(-inv2s2 * d0 * d0);
          double u = std::exp(-2.0 * inv2s2 * dt * d0);
          for (long long i = i0; i <= i1; ++i) {
            row[i] += phasor * g;
            g *= u * c1;
            u *= c2;
          }
        }
      }
    }
  });

  return cube;
}

Phantom make_cyst_phantom(double background_density_per_m3, const Vec3& cyst_center,
                          double cyst_radius, const Box3& box, std::uint64_t seed) {
  if (!(cyst_radius > 0.0)) throw std::invalid_argument("cyst radius must be positive");
  const Vec3 ext = box.max - box.min;
  if (!(ext.x > 0.0) || !(ext.y > 0.0) || !(ext.z > 0.0)) {
    throw std::invalid_argument("degenerate phantom box");
  }
  const double volume = ext.x * ext.y * ext.z;
  const long long count = std::llround(background_density_per_m3 * volume);
  if (count <= 0) throw std::invalid_argument("density yields zero scatterers");

  const double r2 = cyst_radius * cyst_radius;
  auto inside = [&](const Vec3& p) {
    const Vec3 d = p - cyst_center;
    return d.dot(d) < r2;
  };
  bool box_covered = true;
  for (int i = 0; i < 8; ++i) {
    const Vec3 corner{(i & 1) ? box.max.x : box.min.x, (i & 2) ? box.max.y : box.min.y,
                      (i & 4) ? box.max.z : box.min.z};
    if (!inside(corner)) box_covered = false;
  }
  if (box_covered) throw std::invalid_argument("cyst sphere covers the whole phantom box");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.min.x, box.max.x);
  std::uniform_real_distribution<double> uy(box.min.y, box.max.y);
  std::uniform_real_distribution<double> uz(box.min.z, box.max.z);
  std::uniform_real_distribution<double> ua(0.5, 1.5);  // unit mean

  Phantom ph;
  ph.label = "cyst";
  ph.scatterers.reserve(static_cast<std::size_t>(count));
  long long attempts = 0;
  const long long max_attempts = 1000 * count + 1000;
  for (long long i = 0; i < count; ++i) {
    Vec3 p;
    do {
      p = {ux(rng), uy(rng), uz(rng)};
      if (++attempts > max_attempts) {
        throw std::runtime_error("cyst phantom rejection sampling did not converge");
      }
    } while (inside(p));
    ph.scatterers.push_back({p, ua(rng)});
  }
  return ph;
}

}  // namespace coba3d
