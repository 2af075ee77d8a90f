#include <cmath>
#include <numbers>

#include "dai/paths.hpp"
#include "doctest.h"

using namespace dai;

namespace {

const LatticeConfig kLat{};
const TimingParams kTiming{};

// The background gradient used throughout: h * 324.5 Hz / d.
const double kPaperGradient = kPlanck * 324.5 / kLat.spacing;

Sequence diamond(int n) { return build_geometry({GeometryKind::SingleDiamond, n}); }

}  // namespace

TEST_CASE("two-shift diamond ramps up and down") {
  PathPair paths = compute_paths(diamond(2), kLat);
  REQUIRE(paths.segments.size() == 4);
  const PathSegment& up = paths.segments[1];
  CHECK(up.xl0 == 0.0);
  CHECK(up.xl1 == doctest::Approx(kLat.spacing / 2.0));
  CHECK(up.xr1 == doctest::Approx(-kLat.spacing / 2.0));
  const PathSegment& down = paths.segments[2];
  CHECK(down.xl1 == 0.0);
  CHECK(down.xr1 == 0.0);
  CHECK(paths.max_separation() == doctest::Approx(kLat.spacing).epsilon(1e-12));
}

TEST_CASE("paths start and end together and tile the timeline") {
  for (int n : {2, 4, 12}) {
    PathPair paths = compute_paths(diamond(n), kLat);
    CHECK(paths.segments.front().xl0 == 0.0);
    CHECK(paths.segments.front().xr0 == 0.0);
    CHECK(paths.segments.back().xl1 == 0.0);
    CHECK(paths.segments.back().xr1 == 0.0);
    double t = 0.0;
    for (const PathSegment& seg : paths.segments) {
      CHECK(seg.t0 == doctest::Approx(t).epsilon(1e-12));
      CHECK(seg.t1 > seg.t0);
      CHECK(seg.spin_l != seg.spin_r);
      t = seg.t1;
    }
    CHECK(t == doctest::Approx(paths.total_duration));
  }
}

TEST_CASE("spin labels swap exactly at pi pulses") {
  Sequence seq = diamond(4);  // Q S+ P S- S+ P S- Q
  PathPair paths = compute_paths(seq, kLat);
  REQUIRE(paths.segments.size() == 8);
  CHECK(paths.segments[0].spin_l == Spin::Up);
  CHECK(paths.segments[2].spin_l == Spin::Up);   // during the pulse itself
  CHECK(paths.segments[3].spin_l == Spin::Down);  // after it
  CHECK(paths.segments[5].spin_l == Spin::Down);
  CHECK(paths.segments[6].spin_l == Spin::Up);
}

TEST_CASE("maximum separations match the shift count") {
  CHECK(compute_paths(diamond(12), kLat).max_separation() ==
        doctest::Approx(6.0 * kLat.spacing).epsilon(1e-12));
  CHECK(compute_paths(diamond(12), kLat).max_separation() ==
        doctest::Approx(2.598e-6).epsilon(1e-3));
  double sep48 = compute_paths(diamond(48), kLat).max_separation();
  CHECK(sep48 == doctest::Approx(24.0 * kLat.spacing).epsilon(1e-12));
  CHECK(sep48 > 10e-6);
}

TEST_CASE("compute_paths rejects invalid sequences") {
  CHECK_THROWS_AS(compute_paths(parse_sequence("Q(0) S+ Q(0)"), kLat), std::invalid_argument);
}

TEST_CASE("spacetime area of small diamonds") {
  // n=2: two triangles, d * tau_S.
  CHECK(spacetime_area(compute_paths(diamond(2), kLat)) ==
        doctest::Approx(433e-9 * 18e-6).epsilon(1e-12));
  // n=4: ramp averages (d/2 + 3d/2) * tau_S * 2 plus two pulses at d.
  CHECK(spacetime_area(compute_paths(diamond(4), kLat)) ==
        doctest::Approx(433e-9 * 96e-6).epsilon(1e-12));
}

TEST_CASE("hold adds a rectangle at the apex") {
  for (int n : {4, 12}) {
    for (double t_hold : {from_us(100.0), from_us(1000.0)}) {
      double base = spacetime_area(compute_paths(diamond(n), kLat));
      Sequence hold = build_geometry({GeometryKind::HoldDiamond, n, t_hold});
      double with_hold = spacetime_area(compute_paths(hold, kLat));
      CHECK(with_hold - base ==
            doctest::Approx((n / 2.0) * kLat.spacing * t_hold).epsilon(1e-9));
    }
  }
}

TEST_CASE("zero potential gives zero phase") {
  PotentialModel zero{LinearGradientPotential{0.0}};
  for (const GeometrySpec& spec :
       {GeometrySpec{GeometryKind::SingleDiamond, 12},
        GeometrySpec{GeometryKind::DoubleDiamond, 8},
        GeometrySpec{GeometryKind::HoldDiamond, 4, from_us(100.0)}}) {
    CHECK(phase_integral(compute_paths(build_geometry(spec), kLat), zero) == 0.0);
  }
}

TEST_CASE("quadrature matches the closed form at n = 12") {
  PotentialModel pot{LinearGradientPotential{kPaperGradient}};
  double quad = phase_integral(compute_paths(diamond(12), kLat), pot);
  double closed = closed_form_diamond_phase(12, kPaperGradient, kTiming, kLat.spacing);
  CHECK(std::abs(quad - closed) < 1e-9);
  // Independent arithmetic: bracket 36*30us - 6*12us = 1008 us at 2pi*324.5 rad/s.
  CHECK(quad == doctest::Approx(2.0 * std::numbers::pi * 324.5 * 1.008e-3).epsilon(1e-9));
  CHECK(quad == doctest::Approx(2.0552).epsilon(1e-4));
}

TEST_CASE("quadrature matches the closed form for all even n") {
  PotentialModel pot{LinearGradientPotential{kPaperGradient}};
  for (int n = 2; n <= 48; n += 2) {
    double quad = phase_integral(compute_paths(diamond(n), kLat), pot);
    double closed = closed_form_diamond_phase(n, kPaperGradient, kTiming, kLat.spacing);
    CAPTURE(n);
    CHECK(std::abs(quad - closed) < 1e-9);
  }
}

TEST_CASE("closed-form diamond phase landmarks") {
  CHECK(closed_form_diamond_phase(2, kPaperGradient, kTiming, kLat.spacing) ==
        doctest::Approx(0.0367).epsilon(2e-4));
  double phi48 = closed_form_diamond_phase(48, kPaperGradient, kTiming, kLat.spacing);
  CHECK(std::abs(phi48 - 34.645) < 0.01);
  CHECK(phi48 / std::numbers::pi == doctest::Approx(11.03).epsilon(1e-3));
  CHECK_THROWS_AS(closed_form_diamond_phase(3, kPaperGradient, kTiming, kLat.spacing),
                  std::invalid_argument);
}

TEST_CASE("closed-form hold phase") {
  CHECK(closed_form_hold_phase(12, kPaperGradient, 0.0, kLat.spacing) == 0.0);
  CHECK(closed_form_hold_phase(12, kPaperGradient, from_us(100.0), kLat.spacing) ==
        doctest::Approx(2.0 * std::numbers::pi * 324.5 * 6e-4).epsilon(1e-9));
  CHECK(closed_form_hold_phase(12, kPaperGradient, from_us(100.0), kLat.spacing) ==
        doctest::Approx(1.2233).epsilon(1e-4));
  CHECK(closed_form_hold_phase(4, kPaperGradient, 1e-3, kLat.spacing) ==
        doctest::Approx(4.0778).epsilon(1e-4));
  CHECK_THROWS_AS(closed_form_hold_phase(4, kPaperGradient, -1.0, kLat.spacing),
                  std::invalid_argument);
}

TEST_CASE("closed-form acceleration phase") {
  CHECK(closed_form_acceleration_phase(20, kLat.mass, 0.0, from_us(20.0), kLat.spacing) == 0.0);
  double phi = closed_form_acceleration_phase(20, kLat.mass, 5.0 * kLat.g0, from_us(20.0),
                                              kLat.spacing);
  CHECK(std::abs(phi - 8.886) < 1e-3);
  CHECK(closed_form_acceleration_phase(4, kLat.mass, kLat.g0, from_us(20.0), kLat.spacing) ==
        doctest::Approx(0.3555).epsilon(1e-3));
  CHECK_THROWS_AS(
      closed_form_acceleration_phase(4, kLat.mass, 6e4, from_us(20.0), kLat.spacing),
      std::invalid_argument);
}

TEST_CASE("gradient to acceleration equivalence") {
  CHECK(gradient_equivalent_acceleration(0.0, kLat.mass, kLat.g0) == 0.0);
  CHECK(gradient_equivalent_acceleration(kLat.mass * kLat.g0, kLat.mass, kLat.g0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  double equiv = gradient_equivalent_acceleration(kPaperGradient, kLat.mass, kLat.g0);
  CHECK(equiv == doctest::Approx(0.2295).epsilon(0.0044));  // 0.2295 +- 0.001
  CHECK(std::abs(equiv - 0.2296) / 0.2296 < 1e-3);
}

TEST_CASE("double diamond cancels any static linear gradient") {
  PotentialModel pot{LinearGradientPotential{kPaperGradient}};
  for (int n : {8, 24, 48}) {
    Sequence dd = build_geometry({GeometryKind::DoubleDiamond, n});
    CHECK(std::abs(phase_integral(compute_paths(dd, kLat), pot)) < 1e-9);
  }
}

TEST_CASE("double diamond suppresses the beam potential phase") {
  PotentialModel beam{GaussianBeamAxialPotential{1.19e-27, 600e-6, 2.3e-3}};
  // Equal maximal separation: 12-shift single vs 24-shift double diamond.
  double single = phase_integral(compute_paths(diamond(12), kLat), beam);
  Sequence dd = build_geometry({GeometryKind::DoubleDiamond, 24});
  double twin = phase_integral(compute_paths(dd, kLat), beam);
  CHECK(std::abs(single) > 1e-3);  // the effect being suppressed is real
  CHECK(std::abs(twin / single) < 1e-3);
}

TEST_CASE("hold phase adds on top of the diamond phase") {
  PotentialModel pot{LinearGradientPotential{kPaperGradient}};
  for (int n : {4, 12}) {
    for (double t_hold : {from_us(50.0), from_us(300.0)}) {
      Sequence hold = build_geometry({GeometryKind::HoldDiamond, n, t_hold});
      double with_hold = phase_integral(compute_paths(hold, kLat), pot);
      double base = phase_integral(compute_paths(build_geometry(
                                       {GeometryKind::SingleDiamond, n}), kLat), pot);
      double expected = closed_form_hold_phase(n, kPaperGradient, t_hold, kLat.spacing);
      CHECK(std::abs((with_hold - base) - expected) < 1e-9);
    }
  }
}

TEST_CASE("acceleration windows reproduce the closed form through the integrator") {
  PotentialModel none{LinearGradientPotential{0.0}};
  for (int n : {4, 12, 20}) {
    for (double accel : {kLat.g0, 5.0 * kLat.g0, -3.0 * kLat.g0}) {
      Sequence seq = build_geometry({GeometryKind::AccelDiamond, n, 0.0, accel, from_us(20.0)});
      PotentialModel effective = with_sequence_inertia(none, seq, kLat.mass);
      double quad = phase_integral(compute_paths(seq, kLat), effective);
      double closed =
          closed_form_acceleration_phase(n, kLat.mass, accel, from_us(20.0), kLat.spacing);
      CAPTURE(n);
      CAPTURE(accel);
      CHECK(std::abs(quad - closed) < 1e-9);
    }
  }
}

TEST_CASE("inertial window cut mid-ramp integrates exactly") {
  // Window covering the second half of the opening shift of a 2-shift
  // diamond: separation grows as d*t/tau_S, so the differential phase is the
  // triangle integral -m*alpha*d*(t1^2-t0^2)/(2*tau_S*hbar).
  const double tau = kTiming.tau_pi2();  // ramp starts after the first split
  const double t0 = tau + from_us(9.0), t1 = tau + from_us(18.0);
  const double alpha = 2.0;
  PotentialModel window{InertialWindowPotential{alpha, t0, t1, kLat.mass}};
  double quad = phase_integral(compute_paths(diamond(2), kLat), window);
  double expected = -kLat.mass * alpha * kLat.spacing *
                    ((t1 - tau) * (t1 - tau) - (t0 - tau) * (t0 - tau)) /
                    (2.0 * from_us(18.0) * kHbar);
  CHECK(quad == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("inertial window is silent while the arms coincide") {
  Sequence seq = parse_sequence("Q(0) I(50) Q(0)");
  PotentialModel window{InertialWindowPotential{3.0, 0.0, from_us(40.0), kLat.mass}};
  CHECK(phase_integral(compute_paths(seq, kLat), window) == 0.0);
}

TEST_CASE("phase is antisymmetric and linear in the gradient") {
  Sequence seq = diamond(8);
  PathPair paths = compute_paths(seq, kLat);
  double base = phase_integral(paths, PotentialModel{LinearGradientPotential{kPaperGradient}});
  double flipped =
      phase_integral(paths, PotentialModel{LinearGradientPotential{-kPaperGradient}});
  double doubled =
      phase_integral(paths, PotentialModel{LinearGradientPotential{2.0 * kPaperGradient}});
  CHECK(flipped == doctest::Approx(-base).epsilon(1e-12));
  CHECK(doubled == doctest::Approx(2.0 * base).epsilon(1e-12));
}
