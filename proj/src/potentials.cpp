#include "dai/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dai {

double potential_value(const PotentialModel& pot, double x, double t) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearGradientPotential>) {
          return m.grad_u * x;
        } else if constexpr (std::is_same_v<T, GaussianBeamAxialPotential>) {
          double u = (x - m.x_focus) / m.rayleigh;
          return -m.depth / (1.0 + u * u);
        } else if constexpr (std::is_same_v<T, InertialWindowPotential>) {
          if (t >= m.t_on && t < m.t_off) return -m.mass * m.accel * x;
          return 0.0;
        } else {
          double sum = 0.0;
          for (const PotentialModel& p : m.parts) sum += potential_value(p, x, t);
          return sum;
        }
      },
      pot.model);
}

double potential_gradient(const PotentialModel& pot, double x, double t) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearGradientPotential>) {
          return m.grad_u;
        } else if constexpr (std::is_same_v<T, GaussianBeamAxialPotential>) {
          double u = (x - m.x_focus) / m.rayleigh;
          double denom = 1.0 + u * u;
          return 2.0 * m.depth * u / (m.rayleigh * denom * denom);
        } else if constexpr (std::is_same_v<T, InertialWindowPotential>) {
          if (t >= m.t_on && t < m.t_off) return -m.mass * m.accel;
          return 0.0;
        } else {
          double sum = 0.0;
          for (const PotentialModel& p : m.parts) sum += potential_gradient(p, x, t);
          return sum;
        }
      },
      pot.model);
}

static void collect_breakpoints(const PotentialModel& pot, std::vector<double>& out) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, InertialWindowPotential>) {
          out.push_back(m.t_on);
          out.push_back(m.t_off);
        } else if constexpr (std::is_same_v<T, PotentialSum>) {
          for (const PotentialModel& p : m.parts) collect_breakpoints(p, out);
        }
      },
      pot.model);
}

std::vector<double> potential_time_breakpoints(const PotentialModel& pot) {
  std::vector<double> out;
  collect_breakpoints(pot, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

LinearizeResult linearize_gaussian_axial(const GaussianBeamAxialPotential& pot, double x0,
                                         double window) {
  if (!(window > 0.0)) throw std::invalid_argument("linearization window must be positive");
  constexpr int kPoints = 1001;

  // Centered coordinates keep the normal equations well conditioned.
  double sxx = 0.0, sxy = 0.0, sy = 0.0;
  PotentialModel wrapped{pot};
  double values[kPoints];
  double coords[kPoints];
  for (int i = 0; i < kPoints; ++i) {
    double xi = x0 + window * (static_cast<double>(i) / (kPoints - 1) - 0.5);
    coords[i] = xi - x0;
    values[i] = potential_value(wrapped, xi, 0.0);
    sy += values[i];
  }
  double ymean = sy / kPoints;
  for (int i = 0; i < kPoints; ++i) {
    sxx += coords[i] * coords[i];
    sxy += coords[i] * (values[i] - ymean);
  }
  LinearizeResult res;
  res.fit.grad_u = sxy / sxx;
  res.intercept = ymean;  // grid symmetric about x0, so the mean sits at x0
  for (int i = 0; i < kPoints; ++i) {
    double dev = std::abs(values[i] - (ymean + res.fit.grad_u * coords[i]));
    res.max_deviation = std::max(res.max_deviation, dev);
  }
  return res;
}

std::vector<InertialWindowPotential> inertial_from_sequence(const Sequence& seq, double mass) {
  std::vector<InertialWindowPotential> windows;
  double t = 0.0;
  for (const Block& b : seq.blocks) {
    if (const auto* a = std::get_if<AccelWindow>(&b.op)) {
      // The force the atom feels in the lattice frame opposes the lattice
      // acceleration, hence the sign flip.
      windows.push_back(InertialWindowPotential{-a->accel, t, t + b.duration, mass});
    }
    t += b.duration;
  }
  return windows;
}

PotentialModel with_sequence_inertia(const PotentialModel& base, const Sequence& seq,
                                     double mass) {
  std::vector<InertialWindowPotential> windows = inertial_from_sequence(seq, mass);
  if (windows.empty()) return base;
  PotentialSum sum;
  sum.parts.push_back(base);
  for (const InertialWindowPotential& w : windows) sum.parts.push_back(PotentialModel{w});
  return PotentialModel{sum};
}

}  // namespace dai
