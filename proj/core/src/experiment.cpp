// SPDX-License-Identifier: Apache-2.0
#include "coba3d/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <utility>

#include "coba3d/io.hpp"
#include "json.hpp"

namespace coba3d {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

double num_at(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) fail(std::string("missing number: ") + key);
  return j.at(key).get<double>();
}

double num_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(std::string("not a number: ") + key);
  return j.at(key).get<double>();
}

int int_or(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) fail(std::string("not an integer: ") + key);
  return j.at(key).get<int>();
}

std::string str_or(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) fail(std::string("not a string: ") + key);
  return j.at(key).get<std::string>();
}

Vec3 vec3_at(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 3) {
    fail(std::string("missing 3-vector: ") + key);
  }
  const auto& a = j.at(key);
  return {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
}

std::pair<double, double> span_at(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 2) {
    fail(std::string("missing 2-element span: ") + key);
  }
  return {j.at(key).at(0).get<double>(), j.at(key).at(1).get<double>()};
}

ElementSet build_array(const json& recipe, double px, double py) {
  if (!recipe.is_object()) fail("array recipe must be an object");
  const std::string kind = str_or(recipe, "kind", "");
  const int hx = int_or(recipe, "half_extent_x", 15);
  const int hy = int_or(recipe, "half_extent_y", 15);
  if (kind == "upa") return make_upa(hx, hy, px, py);
  if (kind == "plus") return make_plus(hx, hy, px, py);
  if (kind == "x") return make_x(hx, hy, px, py);
  if (kind == "box") return make_box(hx, hy, px, py);
  if (kind == "nested") {
    NestedParams p;
    p.half_extent = int_or(recipe, "half_extent", 15);
    p.inner_half_extent = int_or(recipe, "inner_half_extent", 3);
    p.outer_stride = int_or(recipe, "outer_stride", 4);
    return make_nested(p, px, py);
  }
  if (kind == "fractal") {
    if (!recipe.contains("generator")) fail("fractal recipe needs a generator");
    const ElementSet gen = build_array(recipe.at("generator"), px, py);
    const int order = int_or(recipe, "order", 1);
    return fractal_expand(gen, order).elements;
  }
  if (kind == "explicit") {
    if (!recipe.contains("positions") || !recipe.at("positions").is_array()) {
      fail("explicit recipe needs positions");
    }
    std::vector<Index2> pos;
    for (const auto& p : recipe.at("positions")) {
      pos.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    }
    return ElementSet(std::move(pos), px, py);
  }
  fail("unknown array kind: " + kind);
}

ProfileAxis parse_axis(const std::string& s) {
  if (s == "lateral_x") return ProfileAxis::LateralX;
  if (s == "lateral_y") return ProfileAxis::LateralY;
  if (s == "axial") return ProfileAxis::Axial;
  fail("unknown profile axis: " + s);
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      out += '_';
    }
  }
  return out.empty() ? "volume" : out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

bool vec3_eq(const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

}  // namespace

bool PhantomSpec::operator==(const PhantomSpec& o) const {
  if (kind != o.kind || density_per_m3 != o.density_per_m3 || cyst_radius != o.cyst_radius) {
    return false;
  }
  if (!vec3_eq(cyst_center, o.cyst_center) || !vec3_eq(box.min, o.box.min) ||
      !vec3_eq(box.max, o.box.max)) {
    return false;
  }
  if (points.size() != o.points.size()) return false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!vec3_eq(points[i].position, o.points[i].position) ||
        points[i].amplitude != o.points[i].amplitude) {
      return false;
    }
  }
  return true;
}

Phantom realize_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  if (spec.kind == "points") {
    Phantom p;
    p.scatterers = spec.points;
    p.label = "points";
    return p;
  }
  return make_cyst_phantom(spec.density_per_m3, spec.cyst_center, spec.cyst_radius, spec.box,
                           seed);
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("config parse error: ") + e.what());
  }

  ExperimentConfig cfg;
  try {
    cfg.canonical_json = j.dump();
    cfg.label = str_or(j, "label", "experiment");
    cfg.seed = static_cast<std::uint64_t>(num_or(j, "seed", 1));
    cfg.output_dir = str_or(j, "output_dir", "out");
    cfg.workers = int_or(j, "workers", 0);

    if (!j.contains("arrays")) fail("missing arrays");
    const json& arrays = j.at("arrays");
    const double px = num_at(arrays, "pitch_x_m");
    const double py = num_at(arrays, "pitch_y_m");
    if (!(px > 0.0) || !(py > 0.0)) fail("pitches must be positive");
    if (!arrays.contains("rx")) fail("missing arrays.rx");
    cfg.rx_array = build_array(arrays.at("rx"), px, py);
    cfg.tx_array = arrays.contains("tx") ? build_array(arrays.at("tx"), px, py) : cfg.rx_array;

    if (!j.contains("scheme")) fail("missing scheme");
    const json& sch = j.at("scheme");
    const std::string mode = str_or(sch, "mode", "diverging");
    if (mode == "diverging") {
      cfg.scheme.mode = TxMode::Diverging;
    } else if (mode == "focused") {
      cfg.scheme.mode = TxMode::Focused;
    } else {
      fail("unknown scheme mode: " + mode);
    }
    cfg.scheme.focal_z_m = num_at(sch, "focal_z_m");
    if (cfg.scheme.mode == TxMode::Diverging && !(cfg.scheme.focal_z_m < 0.0)) {
      fail("diverging scheme needs focal_z_m < 0");
    }
    if (cfg.scheme.mode == TxMode::Focused && !(cfg.scheme.focal_z_m > 0.0)) {
      fail("focused scheme needs focal_z_m > 0");
    }
    const auto [a_lo, a_hi] = span_at(sch, "alpha_span_deg");
    const auto [b_lo, b_hi] = span_at(sch, "beta_span_deg");
    const int na = int_or(sch, "n_alpha", 1);
    const int nb = int_or(sch, "n_beta", 1);
    if (na < 1 || nb < 1) fail("scheme angle counts must be >= 1");
    cfg.scheme.events = make_event_grid(deg2rad(a_lo), deg2rad(a_hi), na, deg2rad(b_lo),
                                        deg2rad(b_hi), nb);
    cfg.scheme.aperture = cfg.tx_array;

    if (!j.contains("acquisition")) fail("missing acquisition");
    const json& acq = j.at("acquisition");
    cfg.acq.center_freq = num_at(acq, "f0_hz");
    cfg.acq.sample_rate = num_at(acq, "sample_rate_hz");
    cfg.acq.sound_speed = num_at(acq, "sound_speed_mps");
    cfg.acq.n_cycles = num_or(acq, "n_cycles", 2.0);
    cfg.acq.t_start = num_or(acq, "t_start_s", 0.0);
    cfg.acq.t_max = num_at(acq, "t_max_s");
    cfg.acq.spreading = acq.contains("spreading") && acq.at("spreading").get<bool>();
    if (!(cfg.acq.t_max > cfg.acq.t_start)) fail("t_max_s must exceed t_start_s");

    if (!j.contains("phantom")) fail("missing phantom");
    const json& ph = j.at("phantom");
    cfg.phantom.kind = str_or(ph, "kind", "");
    if (cfg.phantom.kind == "points") {
      if (!ph.contains("points") || !ph.at("points").is_array() || ph.at("points").empty()) {
        fail("points phantom needs a non-empty points list");
      }
      for (const auto& p : ph.at("points")) {
        Scatterer s;
        s.position = vec3_at(p, "pos_m");
        s.amplitude = num_or(p, "amp", 1.0);
        cfg.phantom.points.push_back(s);
      }
    } else if (cfg.phantom.kind == "cyst") {
      cfg.phantom.density_per_m3 = num_at(ph, "density_per_m3");
      cfg.phantom.cyst_center = vec3_at(ph, "center_m");
      cfg.phantom.cyst_radius = num_at(ph, "radius_m");
      cfg.phantom.box.min = vec3_at(ph, "box_min_m");
      cfg.phantom.box.max = vec3_at(ph, "box_max_m");
    } else {
      fail("unknown phantom kind: " + cfg.phantom.kind);
    }

    if (!j.contains("grid")) fail("missing grid");
    const json& gr = j.at("grid");
    const auto [gx_lo, gx_hi] = span_at(gr, "alpha_span_deg");
    const auto [gy_lo, gy_hi] = span_at(gr, "beta_span_deg");
    const auto [z_lo, z_hi] = span_at(gr, "depth_span_m");
    const int gnx = int_or(gr, "n_alpha", 1);
    const int gny = int_or(gr, "n_beta", 1);
    const int gnz = int_or(gr, "n_depths", 1);
    cfg.grid = ImagingGrid::fan(deg2rad(gx_lo), deg2rad(gx_hi), gnx, deg2rad(gy_lo),
                                deg2rad(gy_hi), gny, z_lo, z_hi, gnz);

    if (!j.contains("beamformers") || !j.at("beamformers").is_array() ||
        j.at("beamformers").empty()) {
      fail("beamformer list must be non-empty");
    }
    for (const auto& b : j.at("beamformers")) {
      BeamformerSpec spec;
      const std::string method = str_or(b, "method", "");
      if (method == "das") {
        spec.method = BeamformerKind::DAS;
      } else if (method == "coba") {
        spec.method = BeamformerKind::COBA3D;
      } else if (method == "scoba") {
        spec.method = BeamformerKind::SCOBA3D;
      } else {
        fail("unknown beamformer method: " + method);
      }
      if (b.contains("array")) {
        if (b.at("array").is_string()) {
          const std::string name = b.at("array").get<std::string>();
          if (name == "rx") {
            spec.array = cfg.rx_array;
          } else if (name == "tx") {
            spec.array = cfg.tx_array;
          } else {
            fail("unknown array reference: " + name);
          }
        } else {
          spec.array = build_array(b.at("array"), px, py);
        }
      } else {
        spec.array = cfg.rx_array;
      }
      for (const auto& p : spec.array.positions()) {
        if (!cfg.rx_array.contains(p)) {
          fail("beamformer array is not a subset of the receive array");
        }
      }
      spec.raw_unity = b.contains("raw_unity") && b.at("raw_unity").get<bool>();
      const std::string path = str_or(b, "path", "zero_fill");
      if (path == "zero_fill") {
        spec.path = ScobaPath::ZeroFill;
      } else if (path == "pairwise") {
        spec.path = ScobaPath::Pairwise;
      } else {
        fail("unknown scoba path: " + path);
      }
      spec.label = str_or(b, "label", method + "_" + std::to_string(spec.array.size()));
      cfg.beamformers.push_back(std::move(spec));
    }

    if (j.contains("metrics")) {
      const json& m = j.at("metrics");
      cfg.metrics.dynamic_range_db = num_or(m, "dynamic_range_db", 60.0);
      if (m.contains("cr")) {
        const json& cr = m.at("cr");
        cfg.metrics.cr_enabled = true;
        cfg.metrics.cyst_center = vec3_at(cr, "cyst_center_m");
        cfg.metrics.cyst_radius = num_at(cr, "cyst_radius_m");
        cfg.metrics.background_center = vec3_at(cr, "background_center_m");
        cfg.metrics.region_radius_scale = num_or(cr, "region_radius_scale", 0.6);
      }
      if (m.contains("fwhm")) {
        const json& fw = m.at("fwhm");
        cfg.metrics.fwhm_enabled = true;
        if (fw.contains("axes") && fw.at("axes").is_array()) {
          for (const auto& a : fw.at("axes")) {
            cfg.metrics.fwhm_axes.push_back(parse_axis(a.get<std::string>()));
          }
        }
        if (cfg.metrics.fwhm_axes.empty()) {
          cfg.metrics.fwhm_axes.push_back(ProfileAxis::LateralX);
        }
      }
    }
  } catch (const json::exception& e) {
    fail(std::string("config error: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f.good()) fail("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_experiment_config(text);
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = json::parse(cfg.canonical_json);
  j.erase("output_dir");
  const std::uint64_t h = fnv1a64(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  RunResult res;
  res.config_hash = config_hash(cfg);
  res.n_events = cfg.scheme.events.size();

  std::string outdir = cfg.output_dir;
  if (const char* env = std::getenv("COBA3D_OUTPUT_DIR")) {
    if (*env) outdir = env;
  }
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) fail("cannot create output directory: " + outdir);

  std::vector<std::pair<std::string, double>> stage_times;
  std::vector<std::string> stage_outputs;
  auto emit = [&](const std::string& name) {
    std::string p = outdir + "/" + name;
    stage_outputs.push_back(p);
    return p;
  };
  auto run_stage = [&](const std::string& name, auto&& fn) {
    stage_outputs.clear();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      for (const auto& p : stage_outputs) {
        if (fs::exists(p)) fs::rename(p, p + ".partial", ec);
      }
      throw std::runtime_error("stage '" + name + "' failed: " + e.what());
    }
    const auto t1 = std::chrono::steady_clock::now();
    stage_times.emplace_back(name,
                             std::chrono::duration<double, std::milli>(t1 - t0).count());
    for (const auto& p : stage_outputs) res.artifacts.push_back(p);
  };

  run_stage("arrays", [&] {
    save_array_descriptor(emit("rx_array.json"), cfg.rx_array);
    save_array_descriptor(emit("tx_array.json"), cfg.tx_array);
    for (const auto& bf : cfg.beamformers) {
      save_array_descriptor(emit(sanitize(bf.label) + "_array.json"), bf.array);
    }
  });

  Phantom phantom;
  run_stage("phantom", [&] { phantom = realize_phantom(cfg.phantom, cfg.seed); });

  IQCube cube;
  run_stage("simulate", [&] {
    cube = simulate(phantom, cfg.scheme, cfg.rx_array, cfg.acq, cfg.workers);
    save_iqcube(emit("cube.iqc"), cube);
  });

  CompoundField field;
  std::size_t truncated = 0;
  run_stage("compound", [&] { field = compound(cube, cfg.grid, cfg.workers, &truncated); });

  std::vector<Volume> volumes(cfg.beamformers.size());
  for (std::size_t i = 0; i < cfg.beamformers.size(); ++i) {
    const BeamformerSpec& bf = cfg.beamformers[i];
    run_stage("beamform:" + bf.label, [&] {
      const bool subset = !(bf.array == field.rx_array);
      const CompoundField restricted = subset ? restrict_field(field, bf.array) : field;
      const CompoundField& in = subset ? restricted : field;
      switch (bf.method) {
        case BeamformerKind::DAS:
          volumes[i] = das(in, ApodizationMap::uniform(bf.array, 1.0, WeightKind::User));
          break;
        case BeamformerKind::COBA3D: {
          const ApodizationMap user = bf.raw_unity
                                          ? intrinsic_apodization(bf.array)
                                          : unity_raw_weights(bf.array);
          volumes[i] = coba3d(in, user, cfg.workers);
          break;
        }
        case BeamformerKind::SCOBA3D: {
          const ApodizationMap user = bf.raw_unity
                                          ? intrinsic_apodization(bf.array)
                                          : unity_raw_weights(bf.array);
          volumes[i] = scoba3d(in, user, bf.path, cfg.workers);
          break;
        }
      }
      volumes[i].provenance = res.config_hash;
      save_volume(emit(sanitize(bf.label) + ".bvol"), volumes[i]);
    });
  }

  run_stage("metrics", [&] {
    for (std::size_t i = 0; i < cfg.beamformers.size(); ++i) {
      MetricRow row;
      row.label = cfg.beamformers[i].label;
      row.elements = cfg.beamformers[i].array.size();
      if (cfg.metrics.cr_enabled) {
        const double r = cfg.metrics.cyst_radius * cfg.metrics.region_radius_scale;
        const auto cyst = rasterize_sphere(cfg.grid, cfg.metrics.cyst_center, r);
        const auto bck = rasterize_sphere(cfg.grid, cfg.metrics.background_center, r);
        row.cr_db = contrast_ratio(volumes[i], cyst, bck);
        row.has_cr = true;
      }
      if (cfg.metrics.fwhm_enabled) {
        const std::size_t peak = peak_grid_point(volumes[i]);
        for (ProfileAxis ax : cfg.metrics.fwhm_axes) {
          const double w = fwhm(volumes[i], ax, peak);
          switch (ax) {
            case ProfileAxis::LateralX:
              row.fwhm_x_m = w;
              row.has_fwhm_x = true;
              break;
            case ProfileAxis::LateralY:
              row.fwhm_y_m = w;
              row.has_fwhm_y = true;
              break;
            case ProfileAxis::Axial:
              row.fwhm_axial_m = w;
              row.has_fwhm_axial = true;
              break;
          }
        }
      }
      res.rows.push_back(std::move(row));
    }
    std::ofstream csv(emit("metrics.csv"));
    if (!csv.good()) throw std::runtime_error("cannot write metrics.csv");
    csv << "method,elements,CR_dB,FWHM_x_mm,FWHM_y_mm,FWHM_axial_mm\n";
    for (const auto& r : res.rows) {
      csv << r.label << ',' << r.elements << ',';
      if (r.has_cr) csv << fmt(r.cr_db);
      csv << ',';
      if (r.has_fwhm_x) csv << fmt(r.fwhm_x_m * 1e3);
      csv << ',';
      if (r.has_fwhm_y) csv << fmt(r.fwhm_y_m * 1e3);
      csv << ',';
      if (r.has_fwhm_axial) csv << fmt(r.fwhm_axial_m * 1e3);
      csv << '\n';
    }
  });

  run_stage("render", [&] {
    for (std::size_t i = 0; i < cfg.beamformers.size(); ++i) {
      double peak = 0.0;
      for (const auto& v : volumes[i].values) peak = std::max(peak, std::abs(v));
      if (!(peak > 0.0)) continue;  // nothing to show
      SliceSpec slice;
      slice.plane = SlicePlane::XZ;
      slice.fixed_index = cfg.grid.n_dir_y / 2;
      const BModeImage img =
          envelope_logcompress(volumes[i], cfg.metrics.dynamic_range_db, slice);
      save_pgm(emit(sanitize(cfg.beamformers[i].label) + ".pgm"), img.n_lateral, img.n_depth,
               to_gray(img));
    }
  });

  run_stage("manifest", [&] {
    json man;
    man["label"] = cfg.label;
    man["config_hash"] = res.config_hash;
    man["n_events"] = res.n_events;
    man["truncated_samples"] = truncated;
    json stages = json::array();
    for (const auto& [name, ms] : stage_times) {
      stages.push_back({{"name", name}, {"wall_ms", ms}});
    }
    man["stages"] = std::move(stages);
    json arts = json::array();
    for (const auto& a : res.artifacts) arts.push_back(a);
    man["artifacts"] = std::move(arts);
    std::ofstream f(emit("manifest.json"));
    if (!f.good()) throw std::runtime_error("cannot write manifest.json");
    f << man.dump(2) << '\n';
  });

  return res;
}

void compare_experiments(const std::vector<std::string>& config_paths,
                         const std::string& out_csv_path) {
  if (config_paths.size() < 2) fail("compare needs at least two configs");
  std::vector<ExperimentConfig> configs;
  for (const auto& p : config_paths) configs.push_back(load_experiment_config(p));
  for (std::size_t i = 1; i < configs.size(); ++i) {
    if (!(configs[i].phantom == configs[0].phantom)) {
      fail("compare configs must share the phantom");
    }
    if (!(configs[i].grid == configs[0].grid)) fail("compare configs must share the grid");
  }

  std::vector<std::pair<std::string, MetricRow>> rows;
  for (const auto& cfg : configs) {
    const RunResult r = run_experiment(cfg);
    for (const auto& row : r.rows) rows.emplace_back(cfg.label, row);
  }
  if (rows.empty()) fail("no metric rows produced");
  const MetricRow& base = rows.front().second;

  std::ofstream csv(out_csv_path);
  if (!csv.good()) throw std::runtime_error("cannot write " + out_csv_path);
  csv << "config,method,elements,CR_dB,FWHM_x_mm,FWHM_y_mm,FWHM_axial_mm,"
         "CR_rel_dB,FWHM_x_ratio,FWHM_y_ratio,FWHM_axial_ratio\n";
  for (const auto& [label, r] : rows) {
    csv << label << ',' << r.label << ',' << r.elements << ',';
    if (r.has_cr) csv << fmt(r.cr_db);
    csv << ',';
    if (r.has_fwhm_x) csv << fmt(r.fwhm_x_m * 1e3);
    csv << ',';
    if (r.has_fwhm_y) csv << fmt(r.fwhm_y_m * 1e3);
    csv << ',';
    if (r.has_fwhm_axial) csv << fmt(r.fwhm_axial_m * 1e3);
    csv << ',';
    if (r.has_cr && base.has_cr) csv << fmt(r.cr_db - base.cr_db);
    csv << ',';
    if (r.has_fwhm_x && base.has_fwhm_x && base.fwhm_x_m > 0.0) {
      csv << fmt(r.fwhm_x_m / base.fwhm_x_m);
    }
    csv << ',';
    if (r.has_fwhm_y && base.has_fwhm_y && base.fwhm_y_m > 0.0) {
      csv << fmt(r.fwhm_y_m / base.fwhm_y_m);
    }
    csv << ',';
    if (r.has_fwhm_axial && base.has_fwhm_axial && base.fwhm_axial_m > 0.0) {
      csv << fmt(r.fwhm_axial_m / base.fwhm_axial_m);
    }
    csv << '\n';
  }
}

}  // namespace coba3d
