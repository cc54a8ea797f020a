// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "coba3d/acoustic_sim.hpp"
#include "coba3d/array_geometry.hpp"
#include "coba3d/beamformers.hpp"
#include "coba3d/metrics.hpp"

namespace coba3d {

/// Invalid or inconsistent configuration. The CLI maps this to exit code 1;
/// all other failures map to 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Phantom parameters; scatterers are realized at run time from the seed.
struct PhantomSpec {
  std::string kind;  // "points" or "cyst"
  std::vector<Scatterer> points;
  double density_per_m3 = 0.0;
  Vec3 cyst_center;
  double cyst_radius = 0.0;
  Box3 box;
  bool operator==(const PhantomSpec&) const;
};

struct MetricSpec {
  bool cr_enabled = false;
  Vec3 cyst_center;
  double cyst_radius = 0.0;
  Vec3 background_center;       // disk of the same evaluated radius
  double region_radius_scale = 0.6;
  bool fwhm_enabled = false;
  std::vector<ProfileAxis> fwhm_axes;
  double dynamic_range_db = 60.0;
};

struct BeamformerSpec {
  BeamformerKind method = BeamformerKind::DAS;
  std::string label;
  ElementSet array;        // receive subset this method sees
  bool raw_unity = false;  // keep the intrinsic triangular weighting
  ScobaPath path = ScobaPath::ZeroFill;
};

struct ExperimentConfig {
  std::string label;
  std::uint64_t seed = 1;
  ElementSet tx_array;
  ElementSet rx_array;
  TransmitScheme scheme;
  AcqParams acq;
  PhantomSpec phantom;
  ImagingGrid grid;
  std::vector<BeamformerSpec> beamformers;
  MetricSpec metrics;
  std::string output_dir = "out";
  int workers = 0;
  std::string canonical_json;  // sorted-key dump, hash input
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Materializes the scatterers: listed points as-is, cyst media from the seed.
Phantom realize_phantom(const PhantomSpec& spec, std::uint64_t seed);

/// FNV-1a over the canonical config JSON with output paths removed.
std::string config_hash(const ExperimentConfig& cfg);

struct MetricRow {
  std::string label;
  std::size_t elements = 0;
  bool has_cr = false;
  double cr_db = 0.0;
  bool has_fwhm_x = false;
  double fwhm_x_m = 0.0;
  bool has_fwhm_y = false;
  double fwhm_y_m = 0.0;
  bool has_fwhm_axial = false;
  double fwhm_axial_m = 0.0;
};

struct RunResult {
  std::string config_hash;
  std::size_t n_events = 0;
  std::vector<std::string> artifacts;  // paths written, manifest last
  std::vector<MetricRow> rows;
};

/// simulate -> compound -> beamform each method -> metrics -> renders ->
/// manifest, all under cfg.output_dir. Deterministic for a fixed seed except
/// for the wall times recorded in the manifest.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Runs each config (>= 2, same phantom and grid) and writes a combined CSV
/// with CR/FWHM per method plus ratio columns against the first row.
void compare_experiments(const std::vector<std::string>& config_paths,
                         const std::string& out_csv_path);

}  // namespace coba3d
