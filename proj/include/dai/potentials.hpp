#pragma once

#include <variant>
#include <vector>

#include "dai/sequence.hpp"

namespace dai {

// Spin-independent potentials U(x, t) with analytic gradients. Models with a
// time structure declare breakpoints so integrators can split intervals at
// the discontinuities.

struct LinearGradientPotential {
  double grad_u = 0.0;  // J/m, U = grad_u * x
};

// On-axis potential of a focused beam: the axial intensity profile is a
// Lorentzian in the distance from the focus with the Rayleigh length as
// scale, so U(x) = -depth / (1 + ((x - x_focus)/rayleigh)^2).
struct GaussianBeamAxialPotential {
  double depth = 0.0;    // J, trap depth scale U0 > 0 for an attractive trap
  double x_focus = 0.0;  // m, signed focus offset
  double rayleigh = kRayleighLength;  // m, > 0
};

// U = -mass * accel * x while t in [t_on, t_off), zero outside. `accel` is
// the acceleration equivalent of the force the atom feels (+x force for
// accel > 0); a lattice accelerated by a_lat maps to accel = -a_lat.
struct InertialWindowPotential {
  double accel = 0.0;  // m/s^2
  double t_on = 0.0;   // s
  double t_off = 0.0;  // s, > t_on
  double mass = kCsMass;
};

struct PotentialModel;

struct PotentialSum {
  std::vector<PotentialModel> parts;  // non-empty
};

struct PotentialModel {
  std::variant<LinearGradientPotential, GaussianBeamAxialPotential, InertialWindowPotential,
               PotentialSum>
      model;
};

double potential_value(const PotentialModel& pot, double x, double t);
double potential_gradient(const PotentialModel& pot, double x, double t);

// Sorted unique times where U is discontinuous in t.
std::vector<double> potential_time_breakpoints(const PotentialModel& pot);

struct LinearizeResult {
  LinearGradientPotential fit;   // least-squares slope over the window
  double intercept = 0.0;        // J, fitted value at x0
  double max_deviation = 0.0;    // J, max |U - line| over the window
};

// Least-squares line through U on a 1001-point grid over
// [x0 - window/2, x0 + window/2]. Only the beam model can be meaningfully
// linearized, so the argument type restricts the input.
LinearizeResult linearize_gaussian_axial(const GaussianBeamAxialPotential& pot, double x0,
                                         double window);

// Pseudo-potentials for the acceleration windows of a sequence, one per
// window, with on/off times on the sequence's own timeline.
std::vector<InertialWindowPotential> inertial_from_sequence(const Sequence& seq, double mass);

// `base` plus the sequence's inertial windows (base unchanged if none).
PotentialModel with_sequence_inertia(const PotentialModel& base, const Sequence& seq,
                                     double mass);

}  // namespace dai
