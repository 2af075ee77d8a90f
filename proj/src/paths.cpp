#include "dai/paths.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace dai {

double PathPair::max_separation() const {
  double m = 0.0;
  for (const PathSegment& s : segments) {
    m = std::max(m, std::abs(s.xl0 - s.xr0));
    m = std::max(m, std::abs(s.xl1 - s.xr1));
  }
  return m;
}

PathPair compute_paths(const Sequence& seq, const LatticeConfig& lat) {
  if (!validate_sequence(seq).empty())
    throw std::invalid_argument("compute_paths: sequence fails validation");

  const double half_step = lat.spacing / 2.0;
  PathPair paths;
  paths.segments.reserve(seq.blocks.size());

  double t = 0.0;
  int xl = 0, xr = 0;  // half-step units, exact
  Spin spin_l = Spin::Up;
  for (const Block& b : seq.blocks) {
    PathSegment seg;
    seg.t0 = t;
    seg.t1 = t + b.duration;
    seg.xl0 = xl * half_step;
    seg.xr0 = xr * half_step;
    if (const auto* sh = std::get_if<Shift>(&b.op)) {
      int dl = spin_l == Spin::Up ? sh->direction : -sh->direction;
      xl += dl;
      xr -= dl;
    }
    seg.xl1 = xl * half_step;
    seg.xr1 = xr * half_step;
    seg.spin_l = spin_l;
    seg.spin_r = spin_l == Spin::Up ? Spin::Down : Spin::Up;
    paths.segments.push_back(seg);
    if (std::holds_alternative<PiPulse>(b.op))
      spin_l = spin_l == Spin::Up ? Spin::Down : Spin::Up;
    t = seg.t1;
  }
  paths.total_duration = t;
  return paths;
}

double spacetime_area(const PathPair& paths) {
  double area = 0.0;
  for (const PathSegment& seg : paths.segments) {
    double s0 = seg.xl0 - seg.xr0;
    double s1 = seg.xl1 - seg.xr1;
    double dt = seg.t1 - seg.t0;
    if (s0 * s1 >= 0.0) {
      area += 0.5 * std::abs(s0 + s1) * dt;
    } else {
      // Separation crosses zero inside the segment: two triangles.
      area += 0.5 * dt * (s0 * s0 + s1 * s1) / (std::abs(s0) + std::abs(s1));
    }
  }
  return area;
}

namespace {

// 16-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
constexpr double kGlNode[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605, 0.4580167776572273863424194,
    0.6178762444026437484466718, 0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr double kGlWeight[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637, 0.1691565193950025381893121,
    0.1495959888165767320815017, 0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

template <class F>
double gauss16(double a, double b, F&& f) {
  double mid = 0.5 * (a + b);
  double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < 8; ++i) {
    double dx = half * kGlNode[i];
    sum += kGlWeight[i] * (f(mid - dx) + f(mid + dx));
  }
  return sum * half;
}

}  // namespace

double phase_integral(const PathPair& paths, const PotentialModel& pot) {
  const std::vector<double> breaks = potential_time_breakpoints(pot);
  double integral = 0.0;
  for (const PathSegment& seg : paths.segments) {
    double dt = seg.t1 - seg.t0;
    if (dt <= 0.0) continue;
    auto diff = [&](double t) {
      double u = (t - seg.t0) / dt;
      double xl = seg.xl0 + u * (seg.xl1 - seg.xl0);
      double xr = seg.xr0 + u * (seg.xr1 - seg.xr0);
      return potential_value(pot, xl, t) - potential_value(pot, xr, t);
    };
    double a = seg.t0;
    for (double brk : breaks) {
      if (brk <= a) continue;
      if (brk >= seg.t1) break;
      integral += gauss16(a, brk, diff);
      a = brk;
    }
    integral += gauss16(a, seg.t1, diff);
  }
  return integral / kHbar;
}

namespace {

void require_even(int n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("shift count must be an even integer >= 2");
}

}  // namespace

double closed_form_diamond_phase(int n, double grad_u, const TimingParams& timing, double d) {
  require_even(n);
  double m = n / 2;
  return grad_u / kHbar * d * (m * m * (timing.tau_shift + timing.tau_pi) - m * timing.tau_pi);
}

double closed_form_hold_phase(int n, double grad_u, double t_hold, double d) {
  require_even(n);
  if (t_hold < 0.0) throw std::invalid_argument("t_hold must be non-negative");
  return grad_u * (n / 2) * d * t_hold / kHbar;
}

double closed_form_acceleration_phase(int n, double mass, double accel, double t_acc,
                                      double d) {
  require_even(n);
  if (!(std::abs(accel) < kCriticalAcceleration))
    throw std::invalid_argument("acceleration reaches the interband tunneling guard");
  return mass * accel * (n / 2) * d * t_acc / kHbar;
}

double gradient_equivalent_acceleration(double grad_u, double mass, double g0) {
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
  return grad_u / mass / g0;
}

void write_paths_csv(std::ostream& os, const PathPair& paths) {
  os << "t,xL,xR,spinL\n";
  auto spin = [](Spin s) { return s == Spin::Up ? "up" : "down"; };
  for (std::size_t i = 0; i < paths.segments.size(); ++i) {
    const PathSegment& seg = paths.segments[i];
    os << format_double(seg.t0) << ',' << format_double(seg.xl0) << ','
       << format_double(seg.xr0) << ',' << spin(seg.spin_l) << '\n';
    if (i + 1 == paths.segments.size())
      os << format_double(seg.t1) << ',' << format_double(seg.xl1) << ','
         << format_double(seg.xr1) << ',' << spin(seg.spin_l) << '\n';
  }
}

}  // namespace dai
