// SPDX-License-Identifier: Apache-2.0
#include "coba3d/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace coba3d {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::runtime_error(msg);
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::binary) {
  std::ofstream f(path, mode);
  require(f.good(), "cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::binary) {
  std::ifstream f(path, mode);
  require(f.good(), "cannot open for reading: " + path);
  return f;
}

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f, const std::string& what) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(f.good(), "truncated file while reading " + what);
  return v;
}

void write_complex_f32(std::ofstream& f, const std::vector<cdouble>& values) {
  // Chunked conversion keeps the float staging buffer small.
  constexpr std::size_t kChunk = 1 << 20;
  std::vector<float> buf;
  buf.reserve(2 * std::min(kChunk, values.size()));
  for (std::size_t i = 0; i < values.size(); i += kChunk) {
    const std::size_t end = std::min(values.size(), i + kChunk);
    buf.clear();
    for (std::size_t j = i; j < end; ++j) {
      buf.push_back(static_cast<float>(values[j].real()));
      buf.push_back(static_cast<float>(values[j].imag()));
    }
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
}

std::vector<cdouble> read_complex_f32(std::ifstream& f, std::size_t count,
                                      const std::string& what) {
  std::vector<cdouble> values(count);
  constexpr std::size_t kChunk = 1 << 20;
  std::vector<float> buf;
  for (std::size_t i = 0; i < count; i += kChunk) {
    const std::size_t end = std::min(count, i + kChunk);
    buf.resize(2 * (end - i));
    f.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
    require(f.good(), "truncated file while reading " + what);
    for (std::size_t j = i; j < end; ++j) {
      values[j] = cdouble(buf[2 * (j - i)], buf[2 * (j - i) + 1]);
    }
  }
  return values;
}

}  // namespace

void save_array_descriptor(const std::string& path, const ElementSet& array) {
  json j;
  j["pitch_x_m"] = array.pitch_x();
  j["pitch_y_m"] = array.pitch_y();
  json pos = json::array();
  for (const auto& p : array.positions()) pos.push_back({p.n, p.m});
  j["positions"] = std::move(pos);
  auto f = open_out(path, std::ios::out);
  f << j.dump(2) << '\n';
  require(f.good(), "write failed: " + path);
}

ElementSet load_array_descriptor(const std::string& path) {
  auto f = open_in(path, std::ios::in);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("bad array descriptor " + path + ": " + e.what());
  }
  try {
    const double px = j.at("pitch_x_m").get<double>();
    const double py = j.at("pitch_y_m").get<double>();
    std::vector<Index2> positions;
    for (const auto& p : j.at("positions")) {
      positions.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    }
    return ElementSet(std::move(positions), px, py);
  } catch (const json::exception& e) {
    throw std::runtime_error("bad array descriptor " + path + ": " + e.what());
  }
}

void save_iqcube(const std::string& path, const IQCube& cube) {
  require(cube.rx_array.size() == cube.n_elements, "cube element table mismatch");
  require(cube.samples.size() == cube.n_events * cube.n_elements * cube.n_time,
          "cube sample count mismatch");
  auto f = open_out(path);
  f.write("IQC1", 4);
  write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(cube.n_events));
  write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(cube.n_elements));
  write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(cube.n_time));
  write_pod<double>(f, cube.sample_rate);
  write_pod<double>(f, cube.center_freq);
  write_pod<double>(f, cube.start_time);
  write_pod<double>(f, cube.sound_speed);
  for (const auto& p : cube.rx_array.positions()) {
    write_pod<std::int32_t>(f, p.n);
    write_pod<std::int32_t>(f, p.m);
  }
  write_complex_f32(f, cube.samples);
  require(f.good(), "write failed: " + path);
}

IQCube load_iqcube(const std::string& path, double pitch_x, double pitch_y) {
  auto f = open_in(path);
  char magic[4];
  f.read(magic, 4);
  require(f.good() && std::memcmp(magic, "IQC1", 4) == 0, "not an IQC1 file: " + path);
  IQCube cube;
  cube.n_events = read_pod<std::uint32_t>(f, "event count");
  cube.n_elements = read_pod<std::uint32_t>(f, "element count");
  cube.n_time = read_pod<std::uint32_t>(f, "time count");
  cube.sample_rate = read_pod<double>(f, "sample rate");
  cube.center_freq = read_pod<double>(f, "center frequency");
  cube.start_time = read_pod<double>(f, "start time");
  cube.sound_speed = read_pod<double>(f, "sound speed");
  std::vector<Index2> positions(cube.n_elements);
  for (auto& p : positions) {
    p.n = read_pod<std::int32_t>(f, "element table");
    p.m = read_pod<std::int32_t>(f, "element table");
  }
  for (std::size_t i = 1; i < positions.size(); ++i) {
    require(positions[i - 1] < positions[i],
            "element table must be sorted and duplicate-free: " + path);
  }
  cube.rx_array = ElementSet(std::move(positions), pitch_x, pitch_y);
  cube.samples = read_complex_f32(f, cube.n_events * cube.n_elements * cube.n_time, "samples");
  return cube;
}

void save_volume(const std::string& path, const Volume& vol) {
  validate(vol.grid);
  require(vol.values.size() == vol.grid.n_points(), "volume size mismatch");
  auto f = open_out(path);
  f.write("BVL1", 4);
  write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(vol.grid.n_dir_x));
  write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(vol.grid.n_dir_y));
  write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(vol.grid.depths_m.size()));
  for (const auto& d : vol.grid.directions) {
    write_pod<double>(f, d[0]);
    write_pod<double>(f, d[1]);
  }
  for (double z : vol.grid.depths_m) write_pod<double>(f, z);
  write_complex_f32(f, vol.values);
  require(f.good(), "write failed: " + path);
}

Volume load_volume(const std::string& path) {
  auto f = open_in(path);
  char magic[4];
  f.read(magic, 4);
  require(f.good() && std::memcmp(magic, "BVL1", 4) == 0, "not a BVL1 file: " + path);
  Volume vol;
  vol.grid.n_dir_x = static_cast<int>(read_pod<std::uint32_t>(f, "fan width"));
  vol.grid.n_dir_y = static_cast<int>(read_pod<std::uint32_t>(f, "fan height"));
  const std::size_t n_dep = read_pod<std::uint32_t>(f, "depth count");
  const std::size_t n_dir =
      static_cast<std::size_t>(vol.grid.n_dir_x) * static_cast<std::size_t>(vol.grid.n_dir_y);
  vol.grid.directions.resize(n_dir);
  for (auto& d : vol.grid.directions) {
    d[0] = read_pod<double>(f, "direction table");
    d[1] = read_pod<double>(f, "direction table");
  }
  vol.grid.depths_m.resize(n_dep);
  for (auto& z : vol.grid.depths_m) z = read_pod<double>(f, "depth table");
  validate(vol.grid);
  vol.values = read_complex_f32(f, n_dir * n_dep, "values");
  return vol;
}

void save_pgm(const std::string& path, std::size_t rows, std::size_t cols,
              const std::vector<std::uint8_t>& gray) {
  require(gray.size() == rows * cols, "pgm size mismatch");
  require(rows > 0 && cols > 0, "empty pgm");
  auto f = open_out(path);
  f << "P5\n" << cols << ' ' << rows << "\n255\n";
  f.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
  require(f.good(), "write failed: " + path);
}

std::vector<std::uint8_t> to_gray(const BModeImage& img) {
  std::vector<std::uint8_t> gray(img.db.size());
  const double dr = img.dynamic_range_db;
  for (std::size_t i = 0; i < img.db.size(); ++i) {
    const double v = (img.db[i] + dr) / dr;  // 0..1
    gray[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  }
  return gray;
}

}  // namespace coba3d
