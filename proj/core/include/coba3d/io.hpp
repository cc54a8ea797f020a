// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coba3d/acoustic_sim.hpp"
#include "coba3d/array_geometry.hpp"
#include "coba3d/beamformers.hpp"
#include "coba3d/metrics.hpp"

namespace coba3d {

/// JSON descriptor {"pitch_x_m", "pitch_y_m", "positions": [[n,m], ...]}.
void save_array_descriptor(const std::string& path, const ElementSet& array);
ElementSet load_array_descriptor(const std::string& path);

/// "IQC1" binary: little-endian u32 event/element/time counts, f64
/// sample_rate, center_freq, start_time, sound_speed, i32 element index
/// pairs, then complex float32 samples in (event, element, time) order.
/// Pitch and transmit scheme are not part of the format; the loader takes
/// pitches and leaves the scheme for the caller to fill.
void save_iqcube(const std::string& path, const IQCube& cube);
IQCube load_iqcube(const std::string& path, double pitch_x, double pitch_y);

/// "BVL1" binary: u32 n_dir_x, n_dir_y, n_depths, f64 (theta, phi) per
/// direction, f64 depth table, complex float32 values with depth fastest.
void save_volume(const std::string& path, const Volume& vol);
Volume load_volume(const std::string& path);

/// 8-bit binary PGM (P5), row-major.
void save_pgm(const std::string& path, std::size_t rows, std::size_t cols,
              const std::vector<std::uint8_t>& gray);

/// Maps a B-mode image to 8-bit gray: 0 dB -> 255, -dynamic_range -> 0.
std::vector<std::uint8_t> to_gray(const BModeImage& img);

}  // namespace coba3d
