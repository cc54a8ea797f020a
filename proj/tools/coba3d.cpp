// SPDX-License-Identifier: Apache-2.0
// coba3d: command-line driver for the sparse convolutional beamforming
// toolkit. Subcommands hand data between stages through files; see README.
#include <algorithm>
#include <chrono>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coba3d/acoustic_sim.hpp"
#include "coba3d/array_geometry.hpp"
#include "coba3d/beam_pattern.hpp"
#include "coba3d/beamformers.hpp"
#include "coba3d/experiment.hpp"
#include "coba3d/fft_conv.hpp"
#include "coba3d/io.hpp"
#include "coba3d/metrics.hpp"
#include "coba3d/types.hpp"

namespace {

using coba3d::ApodizationMap;
using coba3d::ElementSet;
using coba3d::WeightKind;
using json = nlohmann::json;

ElementSet build_named_array(const std::string& kind, int half_x, int half_y, int inner,
                             int stride, double pitch_x, double pitch_y) {
  if (kind == "upa") return coba3d::make_upa(half_x, half_y, pitch_x, pitch_y);
  if (kind == "plus") return coba3d::make_plus(half_x, half_y, pitch_x, pitch_y);
  if (kind == "x") return coba3d::make_x(half_x, half_y, pitch_x, pitch_y);
  if (kind == "box") return coba3d::make_box(half_x, half_y, pitch_x, pitch_y);
  if (kind == "nested") {
    coba3d::NestedParams p;
    p.half_extent = half_x;
    p.inner_half_extent = inner;
    p.outer_stride = stride;
    return coba3d::make_nested(p, pitch_x, pitch_y);
  }
  throw coba3d::ConfigError("unknown array kind '" + kind + "'");
}

json array_report(const ElementSet& e) {
  const ElementSet co = coba3d::sum_coarray(e);
  const auto b = e.bounds();
  json r;
  r["elements"] = e.size();
  r["bounds"] = {b[0], b[1], b[2], b[3]};
  r["pitch_x_m"] = e.pitch_x();
  r["pitch_y_m"] = e.pitch_y();
  r["coarray_elements"] = co.size();
  r["symmetric"] = coba3d::is_symmetric(e);
  r["full_coarray"] = coba3d::is_full_coarray(e);
  return r;
}

ApodizationMap weights_for(coba3d::BeamformerKind method, const ElementSet& array,
                           bool raw_unity) {
  if (method == coba3d::BeamformerKind::DAS) {
    return ApodizationMap::uniform(array, 1.0, WeightKind::User);
  }
  return raw_unity ? coba3d::intrinsic_apodization(array) : coba3d::unity_raw_weights(array);
}

void write_metric_csv(std::ostream& os, const std::vector<coba3d::MetricRow>& rows) {
  os << "method,elements,CR_dB,FWHM_x_mm,FWHM_y_mm,FWHM_axial_mm\n";
  char buf[64];
  auto cell = [&](bool has, double v, double scale) {
    if (!has) return std::string();
    std::snprintf(buf, sizeof buf, "%.9g", v * scale);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    os << r.label << ',' << r.elements << ',' << cell(r.has_cr, r.cr_db, 1.0) << ','
       << cell(r.has_fwhm_x, r.fwhm_x_m, 1e3) << ',' << cell(r.has_fwhm_y, r.fwhm_y_m, 1e3)
       << ',' << cell(r.has_fwhm_axial, r.fwhm_axial_m, 1e3) << '\n';
  }
}

coba3d::MetricRow measure_volume(const coba3d::Volume& vol, const coba3d::MetricSpec& spec,
                                 const std::string& label, std::size_t elements) {
  coba3d::MetricRow row;
  row.label = label;
  row.elements = elements;
  if (spec.cr_enabled) {
    const double r = spec.cyst_radius * spec.region_radius_scale;
    const auto cyst = coba3d::rasterize_sphere(vol.grid, spec.cyst_center, r);
    const auto bck = coba3d::rasterize_sphere(vol.grid, spec.background_center, r);
    row.cr_db = coba3d::contrast_ratio(vol, cyst, bck);
    row.has_cr = true;
  }
  if (spec.fwhm_enabled) {
    const std::size_t peak = coba3d::peak_grid_point(vol);
    for (coba3d::ProfileAxis ax : spec.fwhm_axes) {
      const double w = coba3d::fwhm(vol, ax, peak);
      switch (ax) {
        case coba3d::ProfileAxis::LateralX:
          row.fwhm_x_m = w;
          row.has_fwhm_x = true;
          break;
        case coba3d::ProfileAxis::LateralY:
          row.fwhm_y_m = w;
          row.has_fwhm_y = true;
          break;
        case coba3d::ProfileAxis::Axial:
          row.fwhm_axial_m = w;
          row.has_fwhm_axial = true;
          break;
      }
    }
  }
  return row;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coba3d: convolutional and sparse convolutional 3D ultrasound beamforming"};
  app.require_subcommand(1);

  // array -------------------------------------------------------------------
  CLI::App* arr = app.add_subcommand("array", "Generate, inspect, expand, or validate arrays");
  arr->require_subcommand(1);

  struct {
    std::string kind = "upa", out;
    int half_x = 15, half_y = 15, inner = 3, stride = 4;
    double pitch_x = 0.0, pitch_y = -1.0;
  } agen;
  CLI::App* arr_gen = arr->add_subcommand("generate", "Write a named array descriptor");
  arr_gen->add_option("--kind", agen.kind, "upa | plus | x | box | nested")->required();
  arr_gen->add_option("--half-x", agen.half_x, "half extent along x (default 15)");
  arr_gen->add_option("--half-y", agen.half_y, "half extent along y (default half-x)");
  arr_gen->add_option("--inner", agen.inner, "nested: dense half extent (default 3)");
  arr_gen->add_option("--stride", agen.stride, "nested: outer stride (default 4)");
  arr_gen->add_option("--pitch-x", agen.pitch_x, "element pitch in meters")->required();
  arr_gen->add_option("--pitch-y", agen.pitch_y, "pitch along y (default pitch-x)");
  arr_gen->add_option("--out", agen.out, "output descriptor path")->required();
  arr_gen->parse_complete_callback([&] {
    if (agen.pitch_y < 0) agen.pitch_y = agen.pitch_x;
    if (!arr_gen->count("--half-y")) agen.half_y = agen.half_x;
    const ElementSet e = build_named_array(agen.kind, agen.half_x, agen.half_y, agen.inner,
                                           agen.stride, agen.pitch_x, agen.pitch_y);
    coba3d::save_array_descriptor(agen.out, e);
    std::cout << agen.kind << ": " << e.size() << " elements -> " << agen.out << "\n";
  });

  struct {
    std::string in;
  } ains;
  CLI::App* arr_ins = arr->add_subcommand("inspect", "Report element/co-array facts as JSON");
  arr_ins->add_option("--in", ains.in, "array descriptor")->required();
  arr_ins->parse_complete_callback([&] {
    std::cout << array_report(coba3d::load_array_descriptor(ains.in)).dump(2) << "\n";
  });

  struct {
    std::string generator, out;
    int order = 1;
  } afrac;
  CLI::App* arr_frac = arr->add_subcommand("fractal", "Expand a generator array recursively");
  arr_frac->add_option("--generator", afrac.generator, "generator descriptor")->required();
  arr_frac->add_option("--order", afrac.order, "expansion order r >= 0")->required();
  arr_frac->add_option("--out", afrac.out, "output descriptor path")->required();
  arr_frac->parse_complete_callback([&] {
    const auto fr =
        coba3d::fractal_expand(coba3d::load_array_descriptor(afrac.generator), afrac.order);
    if (!fr.warning.empty()) std::cerr << "warning: " << fr.warning << "\n";
    coba3d::save_array_descriptor(afrac.out, fr.elements);
    std::cout << "order " << fr.order << ": " << fr.elements.size() << " elements (scale "
              << fr.scale_base.n << "x" << fr.scale_base.m << ") -> " << afrac.out << "\n";
  });

  struct {
    std::string sparse, dense;
  } aval;
  CLI::App* arr_val = arr->add_subcommand("validate", "Check T against E (subset + coverage)");
  arr_val->add_option("--sparse", aval.sparse, "candidate sparse array T")->required();
  arr_val->add_option("--dense", aval.dense, "reference array E")->required();
  arr_val->parse_complete_callback([&] {
    const ElementSet t = coba3d::load_array_descriptor(aval.sparse);
    const ElementSet e = coba3d::load_array_descriptor(aval.dense);
    const ElementSet co = coba3d::sum_coarray(t);
    bool subset = t.same_pitch(e) && t.size() < e.size();
    bool covers = t.same_pitch(e);
    for (const auto& p : t.positions()) subset = subset && e.contains(p);
    for (const auto& p : e.positions()) covers = covers && co.contains(p);
    json r;
    r["proper_subset"] = subset;
    r["coarray_covers_dense"] = covers;
    r["sparse_wrt"] = coba3d::is_sparse_wrt(t, e);
    std::cout << r.dump(2) << "\n";
  });

  // beampattern --------------------------------------------------------------
  struct {
    std::string array, out, pgm, weights = "unity";
    double f0 = 3e6, c = 1540.0, wavelength = 0.0, dynamic_range = 60.0;
    double theta_min = -90.0, theta_max = 90.0;
    int n_theta = 361, workers = 0;
    std::vector<double> phis;
  } bp;
  CLI::App* bpc = app.add_subcommand("beampattern", "Angular response of an array");
  bpc->add_option("--array", bp.array, "array descriptor")->required();
  bpc->add_option("--f0", bp.f0, "carrier frequency Hz (default 3e6)");
  bpc->add_option("--sound-speed", bp.c, "m/s (default 1540)");
  bpc->add_option("--wavelength", bp.wavelength, "overrides f0/sound-speed");
  bpc->add_option("--theta-min", bp.theta_min, "degrees (default -90)");
  bpc->add_option("--theta-max", bp.theta_max, "degrees (default 90)");
  bpc->add_option("--n-theta", bp.n_theta, "theta samples (default 361)");
  bpc->add_option("--phi", bp.phis, "phi plane(s) in degrees, repeatable (default 0)");
  bpc->add_option("--weights", bp.weights, "unity | intrinsic | coba (default unity)");
  bpc->add_option("--workers", bp.workers, "worker threads (default: cores)");
  bpc->add_option("--out", bp.out, "CSV output path")->required();
  bpc->add_option("--pgm", bp.pgm, "optional grayscale |H| image (theta rows, phi cols)");
  bpc->add_option("--dynamic-range", bp.dynamic_range, "image dynamic range dB (default 60)");
  bpc->parse_complete_callback([&] {
    const ElementSet e = coba3d::load_array_descriptor(bp.array);
    if (bp.phis.empty()) bp.phis = {0.0};
    std::vector<double> phis_rad(bp.phis.size());
    std::transform(bp.phis.begin(), bp.phis.end(), phis_rad.begin(), coba3d::deg2rad);
    const auto grid = coba3d::AngleGrid::regular(coba3d::deg2rad(bp.theta_min),
                                                 coba3d::deg2rad(bp.theta_max), bp.n_theta,
                                                 phis_rad);
    const double lam = bp.wavelength > 0 ? bp.wavelength : bp.c / bp.f0;
    coba3d::BeamPattern pat;
    if (bp.weights == "unity") {
      pat = coba3d::receive_beam_pattern(ApodizationMap::uniform(e, 1.0, WeightKind::User),
                                         grid, lam, e.pitch_x(), e.pitch_y(), bp.workers);
    } else if (bp.weights == "intrinsic") {
      pat = coba3d::receive_beam_pattern(coba3d::intrinsic_apodization(e), grid, lam,
                                         e.pitch_x(), e.pitch_y(), bp.workers);
    } else if (bp.weights == "coba") {
      const auto eff = coba3d::effective_weights(coba3d::unity_raw_weights(e), e);
      pat = coba3d::coba_receive_beam_pattern(e, eff, grid, lam, e.pitch_x(), e.pitch_y(),
                                              bp.workers);
    } else {
      throw coba3d::ConfigError("unknown weights mode '" + bp.weights + "'");
    }
    double peak = 0.0;
    for (const auto& v : pat.values.values()) peak = std::max(peak, std::abs(v));
    if (peak <= 0) peak = 1.0;
    std::ofstream csv(bp.out);
    if (!csv.good()) throw std::runtime_error("cannot write " + bp.out);
    csv << "theta_deg,phi_deg,re,im,mag_db\n";
    char line[160];
    for (std::size_t i = 0; i < grid.thetas_rad.size(); ++i) {
      for (std::size_t j = 0; j < grid.phis_rad.size(); ++j) {
        const coba3d::cdouble v = pat.values(i, j);
        const double mag = std::abs(v);
        const double db = 20.0 * std::log10(std::max(mag / peak, 1e-30));
        std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      coba3d::rad2deg(grid.thetas_rad[i]), coba3d::rad2deg(grid.phis_rad[j]),
                      v.real(), v.imag(), db);
        csv << line;
      }
    }
    if (!bp.pgm.empty()) {
      std::vector<std::uint8_t> gray(grid.thetas_rad.size() * grid.phis_rad.size());
      for (std::size_t i = 0; i < grid.thetas_rad.size(); ++i) {
        for (std::size_t j = 0; j < grid.phis_rad.size(); ++j) {
          const double db =
              20.0 * std::log10(std::max(std::abs(pat.values(i, j)) / peak, 1e-30));
          const double t = std::clamp(1.0 + db / bp.dynamic_range, 0.0, 1.0);
          gray[i * grid.phis_rad.size() + j] = static_cast<std::uint8_t>(std::lround(255.0 * t));
        }
      }
      coba3d::save_pgm(bp.pgm, grid.thetas_rad.size(), grid.phis_rad.size(), gray);
    }
    const auto m = coba3d::pattern_metrics(pat);
    std::cout << "mainlobe_deg=" << m.mainlobe_width_deg << " width_3db_deg=" << m.width_3db_deg
              << " peak_sidelobe_db=" << m.peak_sidelobe_db << (m.flat ? " (flat)" : "")
              << (m.note.empty() ? "" : (" note: " + m.note)) << "\n";
  });

  // simulate -----------------------------------------------------------------
  struct {
    std::string config, out;
    int workers = -1;
  } sim;
  CLI::App* simc = app.add_subcommand("simulate", "Synthesize an IQ cube from a config");
  simc->add_option("--config", sim.config, "experiment config JSON")->required();
  simc->add_option("--out", sim.out, "output .iqc path")->required();
  simc->add_option("--workers", sim.workers, "worker threads (default: config)");
  simc->parse_complete_callback([&] {
    auto cfg = coba3d::load_experiment_config(sim.config);
    if (sim.workers >= 0) cfg.workers = sim.workers;
    const auto phantom = coba3d::realize_phantom(cfg.phantom, cfg.seed);
    const auto cube = coba3d::simulate(phantom, cfg.scheme, cfg.rx_array, cfg.acq, cfg.workers);
    coba3d::save_iqcube(sim.out, cube);
    std::cout << cube.n_events << " events x " << cube.n_elements << " elements x "
              << cube.n_time << " samples -> " << sim.out << "\n";
  });

  // beamform -----------------------------------------------------------------
  struct {
    std::string config, cube, method = "das", array, path = "zero_fill", out;
    bool raw_unity = false;
    int workers = -1;
  } bf;
  CLI::App* bfc = app.add_subcommand("beamform", "Beamform an IQ cube onto the config grid");
  bfc->add_option("--config", bf.config, "experiment config JSON (grid + scheme)")->required();
  bfc->add_option("--cube", bf.cube, "input .iqc")->required();
  bfc->add_option("--method", bf.method, "das | coba | scoba")->required();
  bfc->add_option("--array", bf.array, "receive subset descriptor (default: full rx)");
  bfc->add_flag("--raw-unity", bf.raw_unity, "keep the intrinsic triangular weighting");
  bfc->add_option("--path", bf.path, "scoba: zero_fill | pairwise");
  bfc->add_option("--workers", bf.workers, "worker threads (default: config)");
  bfc->add_option("--out", bf.out, "output .bvol path")->required();
  bfc->parse_complete_callback([&] {
    auto cfg = coba3d::load_experiment_config(bf.config);
    if (bf.workers >= 0) cfg.workers = bf.workers;
    auto cube = coba3d::load_iqcube(bf.cube, cfg.rx_array.pitch_x(), cfg.rx_array.pitch_y());
    if (!(cube.rx_array == cfg.rx_array)) {
      throw coba3d::ConfigError("cube was recorded on a different receive array than config");
    }
    cube.scheme = cfg.scheme;
    auto field = coba3d::compound(cube, cfg.grid, cfg.workers);
    ElementSet sub = cfg.rx_array;
    if (!bf.array.empty()) {
      sub = coba3d::load_array_descriptor(bf.array);
      field = coba3d::restrict_field(field, sub);
    }
    coba3d::BeamformerKind kind;
    if (bf.method == "das") kind = coba3d::BeamformerKind::DAS;
    else if (bf.method == "coba") kind = coba3d::BeamformerKind::COBA3D;
    else if (bf.method == "scoba") kind = coba3d::BeamformerKind::SCOBA3D;
    else throw coba3d::ConfigError("unknown method '" + bf.method + "'");
    coba3d::ScobaPath path;
    if (bf.path == "zero_fill") path = coba3d::ScobaPath::ZeroFill;
    else if (bf.path == "pairwise") path = coba3d::ScobaPath::Pairwise;
    else throw coba3d::ConfigError("unknown scoba path '" + bf.path + "'");
    const ApodizationMap w = weights_for(kind, sub, bf.raw_unity);
    coba3d::Volume vol;
    switch (kind) {
      case coba3d::BeamformerKind::DAS: vol = coba3d::das(field, w); break;
      case coba3d::BeamformerKind::COBA3D: vol = coba3d::coba3d(field, w, cfg.workers); break;
      case coba3d::BeamformerKind::SCOBA3D:
        vol = coba3d::scoba3d(field, w, path, cfg.workers);
        break;
    }
    vol.provenance = coba3d::config_hash(cfg);
    coba3d::save_volume(bf.out, vol);
    std::cout << bf.method << " on " << sub.size() << " elements -> " << bf.out << "\n";
  });

  // metrics ------------------------------------------------------------------
  struct {
    std::string config, volume, label = "volume", out;
    std::size_t elements = 0;
  } met;
  CLI::App* metc = app.add_subcommand("metrics", "CR / FWHM of a beamformed volume");
  metc->add_option("--config", met.config, "experiment config JSON (metric regions)")
      ->required();
  metc->add_option("--volume", met.volume, "input .bvol")->required();
  metc->add_option("--label", met.label, "row label (default 'volume')");
  metc->add_option("--elements", met.elements, "element count recorded in the row");
  metc->add_option("--out", met.out, "CSV output path (default: stdout only)");
  metc->parse_complete_callback([&] {
    const auto cfg = coba3d::load_experiment_config(met.config);
    const auto vol = coba3d::load_volume(met.volume);
    const auto row = measure_volume(vol, cfg.metrics, met.label, met.elements);
    std::vector<coba3d::MetricRow> rows{row};
    if (!met.out.empty()) {
      std::ofstream csv(met.out);
      if (!csv.good()) throw std::runtime_error("cannot write " + met.out);
      write_metric_csv(csv, rows);
    }
    write_metric_csv(std::cout, rows);
  });

  // render -------------------------------------------------------------------
  struct {
    std::string volume, out, plane = "xz";
    double dynamic_range = 60.0;
    int index = -1;
  } ren;
  CLI::App* renc = app.add_subcommand("render", "Write a log-compressed B-mode slice as PGM");
  renc->add_option("--volume", ren.volume, "input .bvol")->required();
  renc->add_option("--plane", ren.plane, "xz | yz (default xz)");
  renc->add_option("--index", ren.index, "fan index along the other axis (default center)");
  renc->add_option("--dynamic-range", ren.dynamic_range, "dB (default 60)");
  renc->add_option("--out", ren.out, "output .pgm path")->required();
  renc->parse_complete_callback([&] {
    const auto vol = coba3d::load_volume(ren.volume);
    coba3d::SliceSpec slice;
    if (ren.plane == "xz") {
      slice.plane = coba3d::SlicePlane::XZ;
      slice.fixed_index = ren.index >= 0 ? ren.index : vol.grid.n_dir_y / 2;
    } else if (ren.plane == "yz") {
      slice.plane = coba3d::SlicePlane::YZ;
      slice.fixed_index = ren.index >= 0 ? ren.index : vol.grid.n_dir_x / 2;
    } else {
      throw coba3d::ConfigError("unknown plane '" + ren.plane + "'");
    }
    const auto img = coba3d::envelope_logcompress(vol, ren.dynamic_range, slice);
    coba3d::save_pgm(ren.out, img.n_lateral, img.n_depth, coba3d::to_gray(img));
    std::cout << img.n_lateral << "x" << img.n_depth << " slice -> " << ren.out << "\n";
  });

  // run ----------------------------------------------------------------------
  struct {
    std::string config, output_dir;
    int workers = -1;
  } run;
  CLI::App* runc = app.add_subcommand("run", "Full pipeline: simulate, beamform, measure");
  runc->add_option("--config", run.config, "experiment config JSON")->required();
  runc->add_option("--output-dir", run.output_dir, "overrides the config's output_dir");
  runc->add_option("--workers", run.workers, "worker threads (default: config)");
  runc->parse_complete_callback([&] {
    auto cfg = coba3d::load_experiment_config(run.config);
    if (!run.output_dir.empty()) cfg.output_dir = run.output_dir;
    if (run.workers >= 0) cfg.workers = run.workers;
    const auto res = coba3d::run_experiment(cfg);
    std::cout << "config " << res.config_hash << ", " << res.n_events << " events\n";
    write_metric_csv(std::cout, res.rows);
    for (const auto& a : res.artifacts) std::cout << "  " << a << "\n";
  });

  // compare ------------------------------------------------------------------
  struct {
    std::vector<std::string> configs;
    std::string out;
  } cmp;
  CLI::App* cmpc = app.add_subcommand("compare", "Run several configs, tabulate CR/FWHM");
  cmpc->add_option("configs", cmp.configs, "two or more experiment configs")->required();
  cmpc->add_option("--out", cmp.out, "combined CSV path")->required();
  cmpc->parse_complete_callback([&] {
    coba3d::compare_experiments(cmp.configs, cmp.out);
    std::ifstream in(cmp.out);
    std::cout << in.rdbuf();
  });

  // bench --------------------------------------------------------------------
  struct {
    int min_half = 1, max_half = 15, reps = 3;
    std::string out;
  } ben;
  CLI::App* benc = app.add_subcommand("bench", "Direct vs Fourier self-convolution timing");
  benc->add_option("--min-half", ben.min_half, "smallest aperture half extent (default 1)");
  benc->add_option("--max-half", ben.max_half, "largest aperture half extent (default 15)");
  benc->add_option("--reps", ben.reps, "repetitions, best-of (default 3)");
  benc->add_option("--out", ben.out, "CSV path (default: stdout only)");
  benc->parse_complete_callback([&] {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::string table = "half,n,direct_ms,fourier_ms,ratio\n";
    char line[128];
    for (int h = ben.min_half; h <= ben.max_half; ++h) {
      const std::size_t n = 2 * static_cast<std::size_t>(h) + 1;
      coba3d::CMat r(n, n);
      for (std::size_t i = 0; i < n * n; ++i) r.data()[i] = {u(rng), u(rng)};
      auto best = [&](coba3d::ConvMethod m) {
        double t = 1e300;
        for (int k = 0; k < ben.reps; ++k) {
          const auto t0 = std::chrono::steady_clock::now();
          const auto c = coba3d::conv2d_self(r, m);
          const auto t1 = std::chrono::steady_clock::now();
          if (c.rows() != 2 * n - 1) throw std::runtime_error("conv size check failed");
          t = std::min(t, std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        return t;
      };
      const double td = best(coba3d::ConvMethod::Direct);
      const double tf = best(coba3d::ConvMethod::Fourier);
      std::snprintf(line, sizeof line, "%d,%zu,%.4f,%.4f,%.2f\n", h, n, td, tf, td / tf);
      table += line;
    }
    if (!ben.out.empty()) {
      std::ofstream csv(ben.out);
      if (!csv.good()) throw std::runtime_error("cannot write " + ben.out);
      csv << table;
    }
    std::cout << table;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad flags are config errors
  } catch (const coba3d::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
