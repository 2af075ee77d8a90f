#include "dai/decoherence.hpp"

#include <cmath>
#include <stdexcept>

namespace dai {

double predict_contrast(const Sequence& seq, const DecoherenceParams& p) {
  if (!(p.t_hold_gauss > 0.0)) throw std::invalid_argument("t_hold_gauss must be positive");
  const int n = seq.shift_count();
  // The transport fidelity applies once per shift and per arm.
  const double per_shift =
      (1.0 - p.kappa_idle) * p.f_shift * p.f_shift * (1.0 - p.kappa_extra);
  const double c = p.initial_contrast * std::pow(per_shift, n);
  return hold_echo_contrast(c, seq.echo_time(), p.t_hold_gauss);
}

double hold_echo_contrast(double c_in, double t_echo, double t_gauss) {
  if (t_echo < 0.0) throw std::invalid_argument("t_echo must be non-negative");
  const double u = t_echo / t_gauss;
  return c_in * std::exp(-u * u);
}

}  // namespace dai
