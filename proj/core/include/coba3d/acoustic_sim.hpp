// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "coba3d/array_geometry.hpp"
#include "coba3d/types.hpp"

namespace coba3d {

struct Scatterer {
  Vec3 position;         // meters, z > 0
  double amplitude = 1.0;
};

struct Phantom {
  std::vector<Scatterer> scatterers;
  std::string label;
};

/// Axis-aligned box, used to bound phantom media.
struct Box3 {
  Vec3 min;
  Vec3 max;
};

enum class TxMode { Focused, Diverging };

/// One steered transmission. alpha tilts about the y axis, beta about x.
struct TxEvent {
  double alpha_rad = 0.0;
  double beta_rad = 0.0;
};

struct TransmitScheme {
  TxMode mode = TxMode::Diverging;
  std::vector<TxEvent> events;
  double focal_z_m = 0.0;  // > 0 focused; < 0 diverging (virtual source depth)
  ElementSet aperture;     // transmitting elements (informational)
};

/// Regular alpha x beta grid of steering angles, beta varying fastest.
std::vector<TxEvent> make_event_grid(double alpha_min_rad, double alpha_max_rad, int n_alpha,
                                     double beta_min_rad, double beta_max_rad, int n_beta);

/// Steering direction for (alpha, beta): rotation of +z by beta about x, then
/// alpha about y.
Vec3 steering_dir(const TxEvent& e);

/// Focal or virtual-source point: (0, 0, focal_z) rotated like steering_dir.
Vec3 focal_point(const TransmitScheme& scheme, const TxEvent& e);

/// Transmit arrival time at `voxel`, with t = 0 when the wavefront passes the
/// array center. Diverging: (|voxel - p_v| - |focal_z|)/c. Focused:
/// (|p_f| + s*|voxel - p_f|)/c where s flips sign behind the focus.
double tx_delay(const TxEvent& event, const TransmitScheme& scheme, const Vec3& voxel,
                double sound_speed);

/// Exact geometric receive delay |voxel - element| / c.
double rx_delay(Index2 element, double pitch_x, double pitch_y, const Vec3& voxel,
                double sound_speed);

/// Unit-peak Gaussian baseband pulse, -6 dB full duration n_cycles / f0.
cdouble pulse(double t, double f0, double n_cycles);

struct AcqParams {
  double sample_rate = 12e6;    // Hz
  double center_freq = 3e6;     // Hz (f0)
  double n_cycles = 2.0;
  double sound_speed = 1540.0;  // m/s
  double t_start = 0.0;         // seconds, first sample time
  double t_max = 0.0;           // seconds, end of the sampling window
  bool spreading = false;       // apply 1/(r_tx * r_rx) geometric attenuation
};

/// Per-event, per-element complex baseband echoes.
struct IQCube {
  std::size_t n_events = 0;
  std::size_t n_elements = 0;
  std::size_t n_time = 0;
  double sample_rate = 0.0;
  double center_freq = 0.0;
  double start_time = 0.0;
  double sound_speed = 0.0;
  ElementSet rx_array;     // element order = rx_array.positions() order
  TransmitScheme scheme;   // not persisted by the file format
  std::vector<cdouble> samples;  // (event, element, time), time fastest

  cdouble& at(std::size_t event, std::size_t element, std::size_t t) {
    return samples[(event * n_elements + element) * n_time + t];
  }
  const cdouble& at(std::size_t event, std::size_t element, std::size_t t) const {
    return samples[(event * n_elements + element) * n_time + t];
  }
};

/// Forward model: every scatterer echoes into every (event, element) pair with
/// delay tx + rx and carrier phase exp(-j 2 pi f0 tau). Throws when t_max cuts
/// off a scatterer's round trip, listing the offenders.
IQCube simulate(const Phantom& phantom, const TransmitScheme& scheme, const ElementSet& rx_array,
                const AcqParams& acq, int workers = 0);

/// Uniform random scatterers in `box` with an anechoic sphere carved out.
/// Amplitudes are unit-mean. Deterministic for a fixed seed.
Phantom make_cyst_phantom(double background_density_per_m3, const Vec3& cyst_center,
                          double cyst_radius, const Box3& box, std::uint64_t seed);

}  // namespace coba3d
