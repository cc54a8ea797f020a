// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include "coba3d/acoustic_sim.hpp"
#include "coba3d/array_geometry.hpp"
#include "coba3d/types.hpp"

using namespace coba3d;

namespace {

constexpr double kC = 1540.0;
constexpr double kF0 = 3e6;
const double kPitch = 0.5 * kC / kF0;

TransmitScheme diverging_scheme(std::vector<TxEvent> events, double focal_z = -3e-3) {
  TransmitScheme s;
  s.mode = TxMode::Diverging;
  s.events = std::move(events);
  s.focal_z_m = focal_z;
  return s;
}

AcqParams default_acq(double t_start, double t_max) {
  AcqParams a;
  a.t_start = t_start;
  a.t_max = t_max;
  return a;
}

}  // namespace

TEST_CASE("pulse envelope is unit peak with the stated -6 dB duration") {
  const double T = 2.0 / kF0;  // n_cycles / f0
  CHECK(std::abs(pulse(0.0, kF0, 2.0) - cdouble{1.0, 0.0}) < 1e-15);
  CHECK(pulse(T / 2.0, kF0, 2.0).real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pulse(-T / 2.0, kF0, 2.0).real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pulse(0.7e-6, kF0, 2.0) == pulse(-0.7e-6, kF0, 2.0));
  CHECK(pulse(1e-6, 5e6, 3.0).real() ==
        doctest::Approx(std::pow(0.5, (1e-6 * 2.0 * 5e6 / 3.0) *
                                          (1e-6 * 2.0 * 5e6 / 3.0)))
            .epsilon(1e-12));
  CHECK_THROWS(pulse(0.0, 0.0, 2.0));
  CHECK_THROWS(pulse(0.0, kF0, -1.0));
}

TEST_CASE("steering direction rotates the boresight") {
  const Vec3 z = steering_dir({0.0, 0.0});
  CHECK(z.x == doctest::Approx(0.0));
  CHECK(z.y == doctest::Approx(0.0));
  CHECK(z.z == doctest::Approx(1.0));

  const Vec3 x = steering_dir({deg2rad(90.0), 0.0});
  CHECK(x.x == doctest::Approx(1.0));
  CHECK(std::abs(x.z) < 1e-12);

  const Vec3 my = steering_dir({0.0, deg2rad(90.0)});
  CHECK(my.y == doctest::Approx(-1.0));
  CHECK(std::abs(my.x) < 1e-12);
  CHECK(std::abs(my.z) < 1e-12);

  for (double a : {-0.7, 0.2, 1.1}) {
    for (double b : {-0.4, 0.9}) {
      CHECK(steering_dir({a, b}).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("event grids sweep beta fastest and center single counts") {
  const auto grid = make_event_grid(deg2rad(-1.0), deg2rad(1.0), 3, deg2rad(-2.0),
                                    deg2rad(2.0), 5);
  REQUIRE(grid.size() == 15);
  CHECK(grid[0].alpha_rad == doctest::Approx(deg2rad(-1.0)));
  CHECK(grid[0].beta_rad == doctest::Approx(deg2rad(-2.0)));
  CHECK(grid[1].alpha_rad == doctest::Approx(deg2rad(-1.0)));
  CHECK(grid[1].beta_rad == doctest::Approx(deg2rad(-1.0)));
  CHECK(grid[5].alpha_rad == doctest::Approx(0.0));
  CHECK(grid[5].beta_rad == doctest::Approx(deg2rad(-2.0)));
  CHECK(grid[14].alpha_rad == doctest::Approx(deg2rad(1.0)));
  CHECK(grid[14].beta_rad == doctest::Approx(deg2rad(2.0)));

  const auto single = make_event_grid(deg2rad(-10.0), deg2rad(10.0), 1, deg2rad(4.0),
                                      deg2rad(8.0), 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0].alpha_rad == doctest::Approx(0.0));
  CHECK(single[0].beta_rad == doctest::Approx(deg2rad(6.0)));

  CHECK_THROWS(make_event_grid(0.0, 0.0, 0, 0.0, 0.0, 1));
}

TEST_CASE("diverging transmit delay counts from the array center") {
  auto scheme = diverging_scheme({{0.0, 0.0}}, -5e-3);
  const TxEvent ev{0.0, 0.0};
  // On axis the virtual source sits 5 mm behind the array: t = z / c.
  for (double z : {10e-3, 30e-3, 80e-3}) {
    CHECK(tx_delay(ev, scheme, {0.0, 0.0, z}, kC) == doctest::Approx(z / kC).epsilon(1e-12));
  }
  // Mirrored steering and mirrored voxel agree.
  auto mirrored = diverging_scheme({{0.0, 0.0}}, -5e-3);
  const TxEvent plus{deg2rad(12.0), deg2rad(-7.0)};
  const TxEvent minus{-deg2rad(12.0), deg2rad(-7.0)};
  const Vec3 v{4e-3, 2e-3, 35e-3};
  const Vec3 vm{-4e-3, 2e-3, 35e-3};
  CHECK(tx_delay(plus, mirrored, v, kC) ==
        doctest::Approx(tx_delay(minus, mirrored, vm, kC)).epsilon(1e-12));
  // Off-axis voxels arrive later than the on-axis depth.
  CHECK(tx_delay(ev, scheme, {10e-3, 0.0, 30e-3}, kC) > 30e-3 / kC);
}

TEST_CASE("focused transmit delay is depth over c on axis") {
  TransmitScheme scheme;
  scheme.mode = TxMode::Focused;
  scheme.focal_z_m = 20e-3;
  scheme.events = {{0.0, 0.0}};
  const TxEvent ev{0.0, 0.0};
  // Both before and behind the focus the on-axis arrival is z / c.
  for (double z : {5e-3, 19e-3, 20e-3, 21e-3, 60e-3}) {
    CHECK(tx_delay(ev, scheme, {0.0, 0.0, z}, kC) == doctest::Approx(z / kC).epsilon(1e-12));
  }
  // Off the axis the converging wave arrives after the on-axis wave at the
  // same depth.
  const double onax = tx_delay(ev, scheme, {0.0, 0.0, 40e-3}, kC);
  CHECK(tx_delay(ev, scheme, {6e-3, 0.0, 40e-3}, kC) > onax);
}

TEST_CASE("receive delay is the exact element-to-voxel time of flight") {
  CHECK(rx_delay({0, 0}, kPitch, kPitch, {0.0, 0.0, 30e-3}, kC) ==
        doctest::Approx(30e-3 / kC).epsilon(1e-14));
  const Index2 el{15, 15};
  const Vec3 far{0.1, 0.05, 10.0};
  const double exact = rx_delay(el, kPitch, kPitch, far, kC);
  const Vec3 ep{15 * kPitch, 15 * kPitch, 0.0};
  const double approx = (far.norm() - ep.dot(far) / far.norm()) / kC;
  CHECK(std::abs(exact - approx) * kC < 2e-6);
}

TEST_CASE("scheme validation rejects inconsistent focal depths") {
  const ElementSet rx = make_upa(1, 1, kPitch, kPitch);
  Phantom ph;
  ph.scatterers = {{{0.0, 0.0, 30e-3}, 1.0}};
  TransmitScheme bad_div = diverging_scheme({{0.0, 0.0}}, 3e-3);
  CHECK_THROWS(simulate(ph, bad_div, rx, default_acq(0.0, 60e-6)));
  TransmitScheme bad_foc;
  bad_foc.mode = TxMode::Focused;
  bad_foc.focal_z_m = -3e-3;
  bad_foc.events = {{0.0, 0.0}};
  CHECK_THROWS(simulate(ph, bad_foc, rx, default_acq(0.0, 60e-6)));
  TransmitScheme empty = diverging_scheme({});
  CHECK_THROWS(simulate(ph, empty, rx, default_acq(0.0, 60e-6)));
  CHECK_THROWS(simulate(Phantom{}, diverging_scheme({{0.0, 0.0}}), rx,
                        default_acq(0.0, 60e-6)));
  Phantom behind;
  behind.scatterers = {{{0.0, 0.0, -1e-3}, 1.0}};
  CHECK_THROWS(simulate(behind, diverging_scheme({{0.0, 0.0}}), rx,
                        default_acq(0.0, 60e-6)));
  CHECK_THROWS(simulate(ph, diverging_scheme({{0.0, 0.0}}), rx,
                        default_acq(60e-6, 60e-6)));
}

TEST_CASE("a single scatterer echoes at its round-trip delay") {
  const ElementSet rx = make_upa(2, 2, kPitch, kPitch);
  Phantom ph;
  const Vec3 p{0.0, 0.0, 30e-3};
  ph.scatterers = {{p, 1.0}};
  const auto scheme = diverging_scheme({{0.0, 0.0}});
  const AcqParams acq = default_acq(30e-6, 50e-6);
  const IQCube cube = simulate(ph, scheme, rx, acq);

  CHECK(cube.n_events == 1);
  CHECK(cube.n_elements == 25);
  CHECK(cube.n_time == 241);
  CHECK(cube.start_time == acq.t_start);

  const double w0 = 2.0 * kPi * acq.center_freq;
  for (std::size_t e = 0; e < cube.n_elements; ++e) {
    const Index2 el = rx.positions()[e];
    const double tau = tx_delay(scheme.events[0], scheme, p, kC) +
                       rx_delay(el, kPitch, kPitch, p, kC);
    // Largest sample sits at the grid point nearest the true delay.
    std::size_t imax = 0;
    double best = -1.0;
    for (std::size_t t = 0; t < cube.n_time; ++t) {
      const double m = std::abs(cube.at(0, e, t));
      if (m > best) {
        best = m;
        imax = t;
      }
    }
    const auto expected =
        static_cast<std::size_t>(std::llround((tau - acq.t_start) * acq.sample_rate));
    CHECK(imax == expected);
    CHECK(best > 0.85);
    CHECK(best <= 1.0 + 1e-12);
    // Carrier phase is exp(-j w0 tau) regardless of the envelope.
    const cdouble s = cube.at(0, e, imax);
    CHECK(std::abs(s / std::abs(s) - std::polar(1.0, -w0 * tau)) < 1e-6);
  }
}

TEST_CASE("samples scale linearly with scatterer amplitude") {
  const ElementSet rx = make_upa(1, 1, kPitch, kPitch);
  const auto scheme = diverging_scheme({{deg2rad(3.0), deg2rad(-2.0)}});
  const AcqParams acq = default_acq(25e-6, 60e-6);
  Phantom a;
  a.scatterers = {{{2e-3, -1e-3, 28e-3}, 1.0}};
  Phantom b = a;
  b.scatterers[0].amplitude = 2.5;
  const IQCube ca = simulate(a, scheme, rx, acq);
  const IQCube cb = simulate(b, scheme, rx, acq);
  REQUIRE(ca.samples.size() == cb.samples.size());
  for (std::size_t i = 0; i < ca.samples.size(); ++i) {
    CHECK(std::abs(cb.samples[i] - 2.5 * ca.samples[i]) <= 1e-14);
  }
}

TEST_CASE("echoes superpose across scatterers") {
  const ElementSet rx = make_upa(1, 1, kPitch, kPitch);
  const auto scheme = diverging_scheme({{0.0, 0.0}, {deg2rad(5.0), 0.0}});
  const AcqParams acq = default_acq(25e-6, 60e-6);
  Phantom p1, p2, both;
  p1.scatterers = {{{1e-3, 0.0, 27e-3}, 0.8}};
  p2.scatterers = {{{-2e-3, 1e-3, 33e-3}, 1.3}};
  both.scatterers = {p1.scatterers[0], p2.scatterers[0]};
  const IQCube c1 = simulate(p1, scheme, rx, acq);
  const IQCube c2 = simulate(p2, scheme, rx, acq);
  const IQCube cb = simulate(both, scheme, rx, acq);
  for (std::size_t i = 0; i < cb.samples.size(); ++i) {
    CHECK(std::abs(cb.samples[i] - (c1.samples[i] + c2.samples[i])) <= 1e-15);
  }
}

TEST_CASE("the sampling window must cover every round trip") {
  const ElementSet rx = make_upa(1, 1, kPitch, kPitch);
  Phantom ph;
  ph.scatterers = {{{0.0, 0.0, 20e-3}, 1.0}, {{0.0, 0.0, 60e-3}, 1.0}};
  const auto scheme = diverging_scheme({{0.0, 0.0}});
  // 60 mm round trip needs ~78 us; a 50 us window cuts it off.
  try {
    simulate(ph, scheme, rx, default_acq(0.0, 50e-6));
    FAIL("expected a truncation error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("truncates 1 scatterer") != std::string::npos);
    CHECK(msg.find("indices: 1") != std::string::npos);
  }
  CHECK_NOTHROW(simulate(ph, scheme, rx, default_acq(0.0, 90e-6)));
}

TEST_CASE("geometric spreading divides by both path lengths") {
  const ElementSet rx = make_upa(0, 0, kPitch, kPitch);
  Phantom ph;
  const Vec3 p{0.0, 0.0, 30e-3};
  ph.scatterers = {{p, 1.0}};
  const auto scheme = diverging_scheme({{0.0, 0.0}});
  AcqParams plain = default_acq(30e-6, 50e-6);
  AcqParams spread = plain;
  spread.spreading = true;
  const IQCube c0 = simulate(ph, scheme, rx, plain);
  const IQCube c1 = simulate(ph, scheme, rx, spread);
  const double tx_r = (p - focal_point(scheme, scheme.events[0])).norm();
  const double rx_r = p.norm();
  const double gain = 1.0 / (tx_r * rx_r);
  for (std::size_t t = 0; t < c0.n_time; ++t) {
    CHECK(std::abs(c1.at(0, 0, t) - gain * c0.at(0, 0, t)) <=
          1e-12 * std::abs(gain * c0.at(0, 0, t)) + 1e-30);
  }
}

TEST_CASE("worker count does not change the samples") {
  const ElementSet rx = make_upa(1, 1, kPitch, kPitch);
  Phantom ph;
  ph.scatterers = {{{1e-3, 0.0, 26e-3}, 1.0},
                   {{-1e-3, 2e-3, 31e-3}, 0.7},
                   {{0.0, -2e-3, 29e-3}, 1.4}};
  const auto scheme = diverging_scheme({{0.0, 0.0}, {deg2rad(4.0), deg2rad(4.0)}});
  const AcqParams acq = default_acq(25e-6, 55e-6);
  const IQCube one = simulate(ph, scheme, rx, acq, 1);
  const IQCube four = simulate(ph, scheme, rx, acq, 4);
  REQUIRE(one.samples.size() == four.samples.size());
  bool same = true;
  for (std::size_t i = 0; i < one.samples.size(); ++i) {
    same = same && one.samples[i] == four.samples[i];
  }
  CHECK(same);
}

TEST_CASE("cyst phantoms are deterministic and anechoic inside the sphere") {
  Box3 box{{-5e-3, -5e-3, 25e-3}, {5e-3, 5e-3, 35e-3}};
  const Vec3 center{0.0, 0.0, 30e-3};
  const double radius = 2e-3;
  const double density = 5e7;  // 50 scatterers in a 1e-6 m^3 box
  const Phantom a = make_cyst_phantom(density, center, radius, box, 42);
  const Phantom b = make_cyst_phantom(density, center, radius, box, 42);
  const Phantom c = make_cyst_phantom(density, center, radius, box, 43);

  REQUIRE(a.scatterers.size() == 50);
  REQUIRE(b.scatterers.size() == 50);
  bool identical = true;
  for (std::size_t i = 0; i < a.scatterers.size(); ++i) {
    identical = identical && a.scatterers[i].position.x == b.scatterers[i].position.x &&
                a.scatterers[i].position.y == b.scatterers[i].position.y &&
                a.scatterers[i].position.z == b.scatterers[i].position.z &&
                a.scatterers[i].amplitude == b.scatterers[i].amplitude;
  }
  CHECK(identical);
  bool differs = false;
  for (std::size_t i = 0; i < c.scatterers.size() && i < a.scatterers.size(); ++i) {
    differs = differs || a.scatterers[i].position.x != c.scatterers[i].position.x;
  }
  CHECK(differs);

  for (const auto& s : a.scatterers) {
    CHECK(s.position.x >= box.min.x);
    CHECK(s.position.x <= box.max.x);
    CHECK(s.position.y >= box.min.y);
    CHECK(s.position.y <= box.max.y);
    CHECK(s.position.z >= box.min.z);
    CHECK(s.position.z <= box.max.z);
    CHECK((s.position - center).norm() >= radius);
    CHECK(s.amplitude >= 0.5);
    CHECK(s.amplitude <= 1.5);
  }

  CHECK(a.label == "cyst");
  CHECK_THROWS(make_cyst_phantom(density, center, -1.0, box, 1));
  CHECK_THROWS(make_cyst_phantom(density, center, radius,
                                 Box3{{0.0, 0.0, 1.0}, {0.0, 1.0, 2.0}}, 1));
  // A sphere swallowing the whole box leaves nowhere to sample.
  CHECK_THROWS(make_cyst_phantom(density, center, 1.0, box, 1));
  CHECK_THROWS(make_cyst_phantom(0.0, center, radius, box, 1));
}
