// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "coba3d/acoustic_sim.hpp"
#include "coba3d/array_geometry.hpp"
#include "coba3d/beamformers.hpp"
#include "coba3d/types.hpp"

using namespace coba3d;

namespace {

constexpr double kC = 1540.0;
constexpr double kF0 = 3e6;
const double kPitch = 0.5 * kC / kF0;

CompoundField steering_field(const ElementSet& arr, double sx, double sy) {
  CompoundField f;
  f.rx_array = arr;
  f.grid = ImagingGrid::fan(0.0, 0.0, 1, 0.0, 0.0, 1, 30e-3, 30e-3, 1);
  f.center_freq = kF0;
  f.y.resize(arr.size());
  for (std::size_t e = 0; e < arr.size(); ++e) {
    const Index2 p = arr.positions()[e];
    f.y[e] = std::polar(1.0, -(sx * p.n + sy * p.m));
  }
  return f;
}

CompoundField random_field(const ElementSet& arr, std::size_t n_points, std::uint64_t seed) {
  CompoundField f;
  f.rx_array = arr;
  f.grid = ImagingGrid::fan(-0.1, 0.1, 1, 0.0, 0.0, 1, 20e-3, 40e-3,
                            static_cast<int>(n_points));
  f.center_freq = kF0;
  f.y.resize(n_points * arr.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& z : f.y) z = {u(rng), u(rng)};
  return f;
}

ApodizationMap random_coarray_weights(const ElementSet& arr, std::uint64_t seed) {
  const ElementSet s = sum_coarray(arr);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<double> w(s.size());
  for (auto& v : w) v = u(rng);
  return ApodizationMap(s.positions(), std::move(w), WeightKind::User);
}

double rel_diff(const Volume& a, const Volume& b) {
  REQUIRE(a.values.size() == b.values.size());
  double scale = 0.0;
  for (const auto& z : b.values) scale = std::max(scale, std::abs(z));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  }
  return worst / std::max(scale, 1e-300);
}

}  // namespace

TEST_CASE("fan grids sweep the steering angles with the y tilt fastest") {
  const ImagingGrid g = ImagingGrid::fan(deg2rad(-10.0), deg2rad(10.0), 3, deg2rad(-5.0),
                                         deg2rad(5.0), 2, 20e-3, 30e-3, 5);
  CHECK(g.n_dir_x == 3);
  CHECK(g.n_dir_y == 2);
  REQUIRE(g.n_directions() == 6);
  REQUIRE(g.depths_m.size() == 5);
  CHECK(g.n_points() == 30);
  CHECK(g.depths_m.front() == doctest::Approx(20e-3));
  CHECK(g.depths_m.back() == doctest::Approx(30e-3));

  const Vec3 u0 = g.direction_unit(0);
  const Vec3 want0 = steering_dir({deg2rad(-10.0), deg2rad(-5.0)});
  CHECK(u0.x == doctest::Approx(want0.x).epsilon(1e-12));
  CHECK(u0.y == doctest::Approx(want0.y).epsilon(1e-12));
  CHECK(u0.z == doctest::Approx(want0.z).epsilon(1e-12));
  const Vec3 u1 = g.direction_unit(1);
  const Vec3 want1 = steering_dir({deg2rad(-10.0), deg2rad(5.0)});
  CHECK(u1.y == doctest::Approx(want1.y).epsilon(1e-12));

  const Vec3 v = g.voxel(0, 4);
  CHECK(v.norm() == doctest::Approx(30e-3).epsilon(1e-12));

  CHECK_NOTHROW(validate(g));
  ImagingGrid bad = g;
  bad.n_dir_x = 2;
  CHECK_THROWS(validate(bad));
  bad = g;
  bad.directions[0][0] = kPi / 2;
  CHECK_THROWS(validate(bad));
  bad = g;
  bad.depths_m[1] = bad.depths_m[0];
  CHECK_THROWS(validate(bad));
  CHECK_THROWS(ImagingGrid::fan(0.0, 0.0, 0, 0.0, 0.0, 1, 1e-3, 2e-3, 1));
}

TEST_CASE("compounding one event recovers the echo envelope at the scatterer") {
  const ElementSet rx = make_upa(3, 3, kPitch, kPitch);
  Phantom ph;
  ph.scatterers = {{{0.0, 0.0, 30e-3}, 1.0}};
  TransmitScheme scheme;
  scheme.mode = TxMode::Diverging;
  scheme.focal_z_m = -3e-3;
  scheme.events = {{0.0, 0.0}};
  AcqParams acq;
  acq.t_start = 25e-6;
  acq.t_max = 55e-6;
  const IQCube cube = simulate(ph, scheme, rx, acq);

  const ImagingGrid g = ImagingGrid::fan(0.0, 0.0, 1, 0.0, 0.0, 1, 30e-3, 30e-3, 1);
  std::size_t truncated = 123;
  const CompoundField f = compound(cube, g, 0, &truncated);
  CHECK(truncated == 0);
  REQUIRE(f.y.size() == rx.size());
  for (std::size_t e = 0; e < rx.size(); ++e) {
    // Delay alignment cancels the carrier; linear interpolation of the
    // envelope costs at most a couple percent.
    CHECK(std::abs(f.y[e].real() - 1.0) < 0.02);
    CHECK(std::abs(f.y[e].imag()) < 1e-9);
  }
}

TEST_CASE("compounding many diverging events adds coherently at the target") {
  const ElementSet rx = make_upa(2, 2, kPitch, kPitch);
  Phantom ph;
  ph.scatterers = {{{0.0, 0.0, 30e-3}, 1.0}};
  TransmitScheme scheme;
  scheme.mode = TxMode::Diverging;
  scheme.focal_z_m = -3e-3;
  scheme.events = make_event_grid(deg2rad(-5.0), deg2rad(5.0), 3, deg2rad(-5.0),
                                  deg2rad(5.0), 3);
  AcqParams acq;
  acq.t_start = 25e-6;
  acq.t_max = 55e-6;
  const IQCube cube = simulate(ph, scheme, rx, acq);

  const ImagingGrid g = ImagingGrid::fan(0.0, 0.0, 1, 0.0, 0.0, 1, 28e-3, 32e-3, 21);
  const CompoundField f = compound(cube, g);
  const Volume vol = das(f, ApodizationMap::uniform(rx, 1.0, WeightKind::User));

  std::size_t imax = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < vol.values.size(); ++i) {
    if (std::abs(vol.values[i]) > best) {
      best = std::abs(vol.values[i]);
      imax = i;
    }
  }
  CHECK(imax == 10);  // 30 mm sits in the middle of the depth axis
  CHECK(best > 0.8 * 9 * 25);
  CHECK(best <= 9 * 25 * (1 + 1e-9));
}

TEST_CASE("focused compounding picks the best-aligned event") {
  const ElementSet rx = make_upa(1, 1, kPitch, kPitch);
  IQCube cube;
  cube.n_events = 3;
  cube.n_elements = rx.size();
  cube.n_time = 721;
  cube.sample_rate = 12e6;
  cube.center_freq = kF0;
  cube.start_time = 0.0;
  cube.sound_speed = kC;
  cube.rx_array = rx;
  cube.scheme.mode = TxMode::Focused;
  cube.scheme.focal_z_m = 25e-3;
  cube.scheme.events = {{deg2rad(-10.0), 0.0}, {0.0, 0.0}, {deg2rad(10.0), 0.0}};
  cube.samples.assign(cube.n_events * cube.n_elements * cube.n_time, cdouble{});
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t e = 0; e < cube.n_elements; ++e) {
      for (std::size_t t = 0; t < cube.n_time; ++t) {
        cube.at(k, e, t) = cdouble{double(k + 1), 0.0};
      }
    }
  }

  // Rays along each event, plus one between events 0 and 1 but closer to 0.
  const ImagingGrid g = ImagingGrid::fan(deg2rad(-10.0), deg2rad(10.0), 3, 0.0, 0.0, 1,
                                         25e-3, 25e-3, 1);
  const CompoundField f = compound(cube, g);
  for (std::size_t d = 0; d < 3; ++d) {
    CHECK(std::abs(f.at(d, 0)) == doctest::Approx(double(d + 1)).epsilon(1e-9));
  }
  const ImagingGrid between = ImagingGrid::fan(deg2rad(-6.0), deg2rad(-6.0), 1, 0.0, 0.0,
                                               1, 25e-3, 25e-3, 1);
  const CompoundField fb = compound(cube, between);
  CHECK(std::abs(fb.at(0, 0)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("compounding validates the cube") {
  const ElementSet rx = make_upa(1, 1, kPitch, kPitch);
  IQCube cube;
  cube.n_events = 1;
  cube.n_elements = rx.size();
  cube.n_time = 10;
  cube.sample_rate = 12e6;
  cube.center_freq = kF0;
  cube.sound_speed = kC;
  cube.rx_array = rx;
  cube.samples.assign(cube.n_elements * cube.n_time, cdouble{});
  const ImagingGrid g = ImagingGrid::fan(0.0, 0.0, 1, 0.0, 0.0, 1, 1e-3, 1e-3, 1);
  // No transmit scheme events.
  CHECK_THROWS(compound(cube, g));
  cube.scheme.mode = TxMode::Diverging;
  cube.scheme.focal_z_m = -3e-3;
  cube.scheme.events = {{0.0, 0.0}};
  IQCube wrong = cube;
  wrong.n_elements = rx.size() + 1;
  CHECK_THROWS(compound(wrong, g));
  wrong = cube;
  wrong.samples.resize(wrong.samples.size() - 1);
  CHECK_THROWS(compound(wrong, g));
}

TEST_CASE("out-of-window voxels are counted and left unfilled") {
  const ElementSet rx = make_upa(1, 1, kPitch, kPitch);
  Phantom ph;
  ph.scatterers = {{{0.0, 0.0, 25e-3}, 1.0}};
  TransmitScheme scheme;
  scheme.mode = TxMode::Diverging;
  scheme.focal_z_m = -3e-3;
  scheme.events = {{0.0, 0.0}};
  AcqParams acq;
  acq.t_start = 20e-6;
  acq.t_max = 45e-6;
  const IQCube cube = simulate(ph, scheme, rx, acq);

  ImagingGrid g = ImagingGrid::fan(0.0, 0.0, 1, 0.0, 0.0, 1, 25e-3, 25e-3, 1);
  g.depths_m.push_back(200e-3);  // round trip far beyond t_max
  std::size_t truncated = 0;
  const CompoundField f = compound(cube, g, 0, &truncated);
  CHECK(truncated == rx.size());
  for (std::size_t e = 0; e < rx.size(); ++e) {
    CHECK(std::abs(f.at(0, e)) > 0.5);
    CHECK(f.at(1, e) == cdouble{});
  }
}

TEST_CASE("restricting a field keeps the matching element columns") {
  const ElementSet full = make_upa(1, 1, kPitch, kPitch);
  const ElementSet t = make_plus(1, 1, kPitch, kPitch);
  const CompoundField f = random_field(full, 3, 7);
  const CompoundField r = restrict_field(f, t);
  CHECK(r.rx_array == t);
  REQUIRE(r.y.size() == 3 * t.size());
  for (std::size_t pt = 0; pt < 3; ++pt) {
    for (std::size_t e = 0; e < t.size(); ++e) {
      const Index2 p = t.positions()[e];
      std::size_t src = full.size();
      for (std::size_t i = 0; i < full.size(); ++i) {
        if (full.positions()[i] == p) src = i;
      }
      REQUIRE(src < full.size());
      CHECK(r.at(pt, e) == f.at(pt, src));
    }
  }

  const ElementSet stranger({{9, 9}}, kPitch, kPitch);
  CHECK_THROWS(restrict_field(f, stranger));
  const ElementSet off_pitch({{0, 0}}, 2 * kPitch, 2 * kPitch);
  CHECK_THROWS(restrict_field(f, off_pitch));
}

TEST_CASE("delay-and-sum is the weighted element sum") {
  const ElementSet arr = make_upa(1, 1, kPitch, kPitch);
  const CompoundField f = random_field(arr, 4, 11);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::vector<double> w(arr.size());
  for (auto& v : w) v = u(rng);
  const Volume vol = das(f, ApodizationMap(arr.positions(), w, WeightKind::User));
  CHECK(vol.beamformer == BeamformerKind::DAS);
  CHECK(to_string(vol.beamformer) == "das");
  for (std::size_t pt = 0; pt < 4; ++pt) {
    cdouble want{};
    for (std::size_t e = 0; e < arr.size(); ++e) want += w[e] * f.at(pt, e);
    CHECK(std::abs(vol.values[pt] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  }
  ApodizationMap stray({{7, 7}}, {1.0}, WeightKind::User);
  CHECK_THROWS(das(f, stray));
}

TEST_CASE("square-root transform halves magnitude in log domain and keeps phase") {
  CompoundField f;
  f.rx_array = make_upa(1, 0, kPitch, kPitch);
  f.grid = ImagingGrid::fan(0.0, 0.0, 1, 0.0, 0.0, 1, 1e-3, 1e-3, 1);
  f.center_freq = kF0;
  f.y = {cdouble{4.0, 0.0}, cdouble{-9.0, 0.0}, cdouble{0.0, 1.0}};
  const CompoundField r = sqrt_transform(f);
  CHECK(std::abs(r.y[0] - cdouble{2.0, 0.0}) < 1e-12);
  CHECK(std::abs(r.y[1] - cdouble{-3.0, 0.0}) < 1e-12);
  CHECK(std::abs(r.y[2] - cdouble{0.0, 1.0}) < 1e-12);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const cdouble z{u(rng), u(rng)};
    CompoundField g = f;
    g.y = {z, z, z};
    const cdouble s = sqrt_transform(g).y[0];
    CHECK(std::abs(s) * std::abs(s) == doctest::Approx(std::abs(z)).epsilon(1e-12));
    if (std::abs(z) > 1e-12) {
      CHECK(std::abs(std::polar(1.0, std::arg(s)) - std::polar(1.0, std::arg(z))) < 1e-12);
    }
  }
  CompoundField zero = f;
  zero.y = {cdouble{}, cdouble{}, cdouble{}};
  CHECK(sqrt_transform(zero).y[0] == cdouble{});
}

TEST_CASE("effective weights divide by the intrinsic multiplicity") {
  const ElementSet e = make_upa(1, 1, kPitch, kPitch);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  const ElementSet s = sum_coarray(e);
  std::vector<double> w(s.size());
  for (auto& v : w) v = u(rng);
  const ApodizationMap user(s.positions(), w, WeightKind::User);
  const ApodizationMap eff = effective_weights(user, e);
  CHECK(eff.kind() == WeightKind::Effective);
  CHECK(eff.value_at({0, 0}) == doctest::Approx(user.value_at({0, 0}) / 9.0));
  CHECK(eff.value_at({2, 2}) == doctest::Approx(user.value_at({2, 2}) / 1.0));
  CHECK(eff.value_at({1, 0}) == doctest::Approx(user.value_at({1, 0}) / 6.0));

  const ApodizationMap unity = unity_raw_weights(e);
  CHECK(unity.kind() == WeightKind::User);
  CHECK(unity.size() == s.size());
  for (double v : unity.values()) CHECK(v == 1.0);

  // The co-array of an X misses odd-parity points; asking for a weight there
  // has no multiplicity to divide by.
  const ElementSet x = make_x(3, 3, kPitch, kPitch);
  ApodizationMap hole({{1, 0}}, {1.0}, WeightKind::User);
  CHECK_THROWS_WITH_AS(effective_weights(hole, x) /* (1,0) not in the co-array */,
                       "co-array hole: weight requested where multiplicity is zero",
                       std::invalid_argument);
}

TEST_CASE("convolutional beamforming matches its closed form on steering fields") {
  const ElementSet e = make_upa(3, 3, kPitch, kPitch);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> us(-kPi, kPi);
  const ApodizationMap w = random_coarray_weights(e, 29);
  for (int trial = 0; trial < 12; ++trial) {
    const double sx = us(rng);
    const double sy = us(rng);
    const CompoundField f = steering_field(e, sx, sy);
    const Volume vol = coba3d::coba3d(f, w);
    CHECK(vol.beamformer == BeamformerKind::COBA3D);
    cdouble want{};
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Index2 p = w.support()[i];
      want += w.values()[i] * std::polar(1.0, -(sx * p.n + sy * p.m));
    }
    CHECK(std::abs(vol.values[0] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("convolutional beamforming scales linearly with signal magnitude") {
  const ElementSet e = make_upa(2, 2, kPitch, kPitch);
  const CompoundField f = random_field(e, 5, 41);
  CompoundField scaled = f;
  for (auto& z : scaled.y) z *= 4.0;
  const ApodizationMap w = random_coarray_weights(e, 43);
  const Volume v1 = coba3d::coba3d(f, w);
  const Volume v4 = coba3d::coba3d(scaled, w);
  for (std::size_t i = 0; i < v1.values.size(); ++i) {
    CHECK(std::abs(v4.values[i] - 4.0 * v1.values[i]) <=
          1e-12 * std::max(1.0, std::abs(4.0 * v1.values[i])));
  }
}

TEST_CASE("convolutional beamforming rejects sparse receive arrays") {
  const ElementSet plus = make_plus(2, 2, kPitch, kPitch);
  const CompoundField f = random_field(plus, 1, 5);
  CHECK_THROWS(coba3d::coba3d(f, unity_raw_weights(plus)));
}

TEST_CASE("sparse beamforming on the full array reduces to the dense one") {
  for (int half = 1; half <= 4; ++half) {
    const ElementSet e = make_upa(half, half, kPitch, kPitch);
    const CompoundField f = random_field(e, 3, 100 + half);
    const ApodizationMap w = random_coarray_weights(e, 200 + half);
    const Volume dense = coba3d::coba3d(f, w);
    const Volume zf = scoba3d(f, w, ScobaPath::ZeroFill);
    const Volume pw = scoba3d(f, w, ScobaPath::Pairwise);
    CHECK(zf.beamformer == BeamformerKind::SCOBA3D);
    CHECK(rel_diff(zf, dense) <= 1e-12);
    CHECK(rel_diff(pw, dense) <= 1e-10);
  }
}

TEST_CASE("pairwise and zero-fill sparse paths agree on sparse arrays") {
  std::vector<ElementSet> arrays{
      make_plus(3, 3, kPitch, kPitch),
      make_x(3, 3, kPitch, kPitch),
      make_box(3, 3, kPitch, kPitch),
      make_nested({3, 1, 2}, kPitch, kPitch),
  };
  int seed = 300;
  for (const auto& t : arrays) {
    const CompoundField f = random_field(t, 4, ++seed);
    const ApodizationMap w = random_coarray_weights(t, ++seed);
    const Volume zf = scoba3d(f, w, ScobaPath::ZeroFill);
    const Volume pw = scoba3d(f, w, ScobaPath::Pairwise);
    CHECK(rel_diff(pw, zf) <= 1e-10);
  }
}

TEST_CASE("sparse beamforming matches its closed form on steering fields") {
  const ElementSet t = make_plus(2, 2, kPitch, kPitch);
  const ApodizationMap w = random_coarray_weights(t, 57);
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> us(-kPi, kPi);
  for (int trial = 0; trial < 8; ++trial) {
    const double sx = us(rng);
    const double sy = us(rng);
    const CompoundField f = steering_field(t, sx, sy);
    for (ScobaPath path : {ScobaPath::ZeroFill, ScobaPath::Pairwise}) {
      const Volume vol = scoba3d(f, w, path);
      cdouble want{};
      for (std::size_t i = 0; i < w.size(); ++i) {
        const Index2 p = w.support()[i];
        want += w.values()[i] * std::polar(1.0, -(sx * p.n + sy * p.m));
      }
      CHECK(std::abs(vol.values[0] - want) <= 1e-11 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("worker count does not change beamformed volumes") {
  const ElementSet e = make_upa(2, 2, kPitch, kPitch);
  const CompoundField f = random_field(e, 6, 71);
  const ApodizationMap w = random_coarray_weights(e, 73);
  const Volume a = coba3d::coba3d(f, w, 1);
  const Volume b = coba3d::coba3d(f, w, 3);
  bool same = true;
  for (std::size_t i = 0; i < a.values.size(); ++i) same = same && a.values[i] == b.values[i];
  CHECK(same);

  const ElementSet t = make_plus(2, 2, kPitch, kPitch);
  const CompoundField fs = random_field(t, 6, 79);
  const ApodizationMap ws = random_coarray_weights(t, 83);
  const Volume sa = scoba3d(fs, ws, ScobaPath::Pairwise, 1);
  const Volume sb = scoba3d(fs, ws, ScobaPath::Pairwise, 3);
  for (std::size_t i = 0; i < sa.values.size(); ++i) {
    CHECK(std::abs(sa.values[i] - sb.values[i]) <= 1e-13 * std::max(1.0, std::abs(sa.values[i])));
  }
}
