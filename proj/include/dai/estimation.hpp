#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dai/measurement.hpp"
#include "dai/sequence.hpp"

namespace dai {

// Maximum-likelihood fit of (Phi, C, gamma) to a binomial fringe record.
struct FringeFit {
  double phi = 0.0;       // rad, principal branch (-pi, pi]
  double contrast = 0.0;  // [0, 1]
  double gamma = 0.0;     // [0, 1]
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // order (phi, C, gamma)
  double log_likelihood = 0.0;
  bool converged = false;
  bool degenerate = false;  // all-zero or all-full counts
  int iterations = 0;

  double sigma_phi() const { return std::sqrt(std::max(0.0, covariance(0, 0))); }
};

struct FringeGuess {
  double phi = 0.0;
  double contrast = 0.5;
  double gamma = 0.05;
};

// First-harmonic initializer. Requires >= 4 distinct phase points spanning
// more than pi; throws std::invalid_argument on a degenerate grid.
FringeGuess initial_fringe_guess(const FringeData& data);

// Damped Gauss-Newton ascent of the binomial log-likelihood with C and gamma
// kept in (0, 1) by a logistic reparameterization. Convergence: step below
// 1e-10 in the original parameters, at most 100 iterations. Covariance is the
// inverse observed information at the optimum. Non-convergence sets a flag
// rather than throwing.
FringeFit fit_fringe(const FringeData& data, const FringeGuess& guess);

// Weighted least squares on proportions, for cross-checking the MLE.
FringeFit fit_fringe_least_squares(const FringeData& data, const FringeGuess& guess);

// Principal branch (-pi, pi].
double wrap_phase(double phi);

struct UnwrapResult {
  std::vector<double> phases;  // unwrapped, same length as input
  std::vector<int> flagged;    // indices where the branch choice was ambiguous
};

// Branch recovery for a diamond-size scan. Each phase is moved to the branch
// nearest the prediction of a quadratic-in-(n/2) model fitted to the already
// unwrapped points; the first point goes nearest to zero and the second
// continues the single-point scaling of the first.
UnwrapResult unwrap_phase_series(const std::vector<int>& n_list,
                                 const std::vector<double>& wrapped,
                                 const TimingParams& timing, double d);

// Same branch logic against a straight-line continuation, for scans that are
// linear in the control variable (hold time, acceleration).
UnwrapResult unwrap_linear_series(const std::vector<double>& xs,
                                  const std::vector<double>& wrapped);

struct GradientFit {
  double grad_u = 0.0;  // J/m
  double sigma = 0.0;   // J/m
  double chi2_per_dof = 0.0;
};

// Weighted least squares of the diamond phase model, linear in gradU and
// therefore closed form.
GradientFit fit_gradient(const std::vector<int>& n_list, const std::vector<double>& phases,
                         const std::vector<double>& sigmas, const TimingParams& timing,
                         double d);

struct SlopeFit {
  double slope = 0.0;
  double sigma_slope = 0.0;
  double intercept = 0.0;
  double sigma_intercept = 0.0;
  double chi2_per_dof = 0.0;
};

// Weighted straight line with a free intercept.
SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& phases,
                   const std::vector<double>& sigmas);

}  // namespace dai
