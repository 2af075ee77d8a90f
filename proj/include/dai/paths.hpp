#pragma once

#include <iosfwd>

#include "dai/potentials.hpp"
#include "dai/sequence.hpp"

namespace dai {

enum class Spin { Up, Down };

// One constant-velocity stretch of both arms. Positions interpolate linearly
// between the endpoint values; spin labels are constant within a segment and
// swap only at pi-pulse boundaries.
struct PathSegment {
  double t0 = 0.0, t1 = 0.0;
  double xl0 = 0.0, xl1 = 0.0;  // left arm: the arm that starts spin-up
  double xr0 = 0.0, xr1 = 0.0;
  Spin spin_l = Spin::Up;
  Spin spin_r = Spin::Down;
};

struct PathPair {
  std::vector<PathSegment> segments;
  double total_duration = 0.0;

  double max_separation() const;
};

// Unrolls a validated sequence into the two arm trajectories. Shifts ramp the
// positions linearly over their duration; every other block freezes them in
// the lattice frame. Throws std::invalid_argument on a sequence that fails
// validate_sequence.
PathPair compute_paths(const Sequence& seq, const LatticeConfig& lat);

// Time integral of |xl - xr| in m*s, exact for the piecewise-linear paths.
double spacetime_area(const PathPair& paths);

// Phase (1/hbar) * Int [U(xl(t), t) - U(xr(t), t)] dt by 16-point
// Gauss-Legendre quadrature per segment, with segments pre-split at the
// potential's time breakpoints so the integrand is smooth on each piece.
double phase_integral(const PathPair& paths, const PotentialModel& pot);

// Diamond phase under a uniform gradient:
// (gradU/hbar) * d * [(n/2)^2 (tau_S + tau_pi) - (n/2) tau_pi].
double closed_form_diamond_phase(int n, double grad_u, const TimingParams& timing, double d);

// Extra phase from holding at maximum separation: gradU * (n/2) * d * t_hold / hbar.
double closed_form_hold_phase(int n, double grad_u, double t_hold, double d);

// Phase from accelerating the lattice at full separation:
// mass * accel * (n/2) * d * t_acc / hbar.
double closed_form_acceleration_phase(int n, double mass, double accel, double t_acc, double d);

// Gradient strength as a fraction of gravity: (gradU/mass)/g0.
double gradient_equivalent_acceleration(double grad_u, double mass, double g0);

// CSV rows "t,xL,xR,spinL" at every segment boundary.
void write_paths_csv(std::ostream& os, const PathPair& paths);

}  // namespace dai
