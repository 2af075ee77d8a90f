#pragma once

#include "dai/sequence.hpp"

namespace dai {

// Phenomenological contrast budget. Shift-synchronous losses act once per
// shift; idle and hold time feeds an uncompensated Gaussian echo decay.
struct DecoherenceParams {
  double kappa_idle = 0.006;    // fractional contrast loss per step, pulses/idles
  double f_shift = 0.99;        // transport fidelity per arm per shift, (0, 1]
  double kappa_extra = 0.017;   // residual contrast loss per shift
  double t_hold_gauss = 1e-3;   // s, Gaussian echo decay constant (data-fit scale)
  double gamma_loss = 0.05;     // atom survival loss probability
  double initial_contrast = 1.0;
};

// C = C0 * [(1-kappa_idle) * f_shift^2 * (1-kappa_extra)]^n * exp(-(t_echo/T)^2)
// with n the number of shift blocks and t_echo the idle plus window time.
// Acceleration windows cost nothing beyond their idle-time contribution.
double predict_contrast(const Sequence& seq, const DecoherenceParams& p);

// Gaussian echo decay alone: c_in * exp(-(t_echo/t_gauss)^2).
double hold_echo_contrast(double c_in, double t_echo, double t_gauss);

}  // namespace dai
