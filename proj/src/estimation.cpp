#include "dai/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "dai/paths.hpp"

namespace dai {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

double logit(double y) {
  y = std::clamp(y, 1e-6, 1.0 - 1e-6);
  return std::log(y / (1.0 - y));
}

// p(phi) and its first and second derivatives in (Phi, C, gamma).
struct PointEval {
  double p;
  Eigen::Vector3d dp;
  Eigen::Matrix3d d2p;
};

PointEval eval_point(double phi_hat, double c, double g, double probe) {
  const double th = phi_hat + probe;
  const double ct = std::cos(th), st = std::sin(th);
  PointEval e;
  e.p = 0.5 * (1.0 - g) * (1.0 + c * ct);
  e.dp << -0.5 * (1.0 - g) * c * st, 0.5 * (1.0 - g) * ct, -0.5 * (1.0 + c * ct);
  e.d2p.setZero();
  e.d2p(0, 0) = -0.5 * (1.0 - g) * c * ct;
  e.d2p(0, 1) = e.d2p(1, 0) = -0.5 * (1.0 - g) * st;
  e.d2p(0, 2) = e.d2p(2, 0) = 0.5 * c * st;
  e.d2p(1, 2) = e.d2p(2, 1) = -0.5 * ct;
  return e;
}

double log_likelihood(const FringeData& data, double phi_hat, double c, double g) {
  double ll = 0.0;
  for (std::size_t i = 0; i < data.phi_grid.size(); ++i) {
    const int n = data.shots[i];
    if (n == 0) continue;
    const int s = data.successes[i];
    const double p = fringe_probability({phi_hat, c, g}, data.phi_grid[i]);
    if (s > 0) ll += s * std::log(p);
    if (s < n) ll += (n - s) * std::log1p(-p);
  }
  return ll;
}

void check_data(const FringeData& data) {
  const std::size_t m = data.phi_grid.size();
  if (m == 0 || data.successes.size() != m || data.shots.size() != m)
    throw std::invalid_argument("fringe data arrays must be non-empty and equally sized");
  for (std::size_t i = 0; i < m; ++i) {
    if (data.shots[i] < 0 || data.successes[i] < 0 || data.successes[i] > data.shots[i])
      throw std::invalid_argument("fringe data counts out of range");
  }
}

bool counts_degenerate(const FringeData& data) {
  bool all_zero = true, all_full = true;
  for (std::size_t i = 0; i < data.phi_grid.size(); ++i) {
    if (data.shots[i] == 0) continue;
    if (data.successes[i] != 0) all_zero = false;
    if (data.successes[i] != data.shots[i]) all_full = false;
  }
  return all_zero || all_full;
}

// Inverse of the observed information, falling back to a spectral
// pseudo-inverse with inflated variance along unidentified directions.
Eigen::Matrix3d invert_information(const Eigen::Matrix3d& info) {
  Eigen::Matrix3d sym = 0.5 * (info + info.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sym);
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  const double tol = std::max(lmax * 1e-13, 1e-300);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int k = 0; k < 3; ++k) {
    const double lambda = es.eigenvalues()(k);
    const Eigen::Vector3d v = es.eigenvectors().col(k);
    const double variance = lambda > tol ? 1.0 / lambda : 1e12;
    cov += variance * v * v.transpose();
  }
  return cov;
}

enum class Objective { MaximumLikelihood, LeastSquares };

FringeFit fit_impl(const FringeData& data, const FringeGuess& guess, Objective objective) {
  check_data(data);

  // Fixed least-squares weights from smoothed proportions.
  std::vector<double> ls_weight(data.phi_grid.size(), 0.0);
  for (std::size_t i = 0; i < data.phi_grid.size(); ++i) {
    const double n = data.shots[i];
    if (n == 0) continue;
    const double y = (data.successes[i] + 0.5) / (n + 1.0);
    ls_weight[i] = n / (y * (1.0 - y));
  }

  auto objective_value = [&](double phi_hat, double c, double g) {
    if (objective == Objective::MaximumLikelihood) return log_likelihood(data, phi_hat, c, g);
    double q = 0.0;
    for (std::size_t i = 0; i < data.phi_grid.size(); ++i) {
      if (data.shots[i] == 0) continue;
      const double y = static_cast<double>(data.successes[i]) / data.shots[i];
      const double r = y - fringe_probability({phi_hat, c, g}, data.phi_grid[i]);
      q -= 0.5 * ls_weight[i] * r * r;
    }
    return q;
  };

  // v = (Phi, logit C, logit gamma)
  Eigen::Vector3d v(guess.phi, logit(guess.contrast), logit(guess.gamma));

  FringeFit fit;
  fit.degenerate = counts_degenerate(data);

  double current = objective_value(v(0), sigmoid(v(1)), sigmoid(v(2)));
  double lambda = 1e-3;
  for (int iter = 0; iter < 100; ++iter) {
    fit.iterations = iter + 1;
    const double c = sigmoid(v(1)), g = sigmoid(v(2));
    const Eigen::Vector3d chain(1.0, c * (1.0 - c), g * (1.0 - g));

    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();  // scoring approximation
    for (std::size_t i = 0; i < data.phi_grid.size(); ++i) {
      const int n = data.shots[i];
      if (n == 0) continue;
      const int s = data.successes[i];
      const PointEval e = eval_point(v(0), c, g, data.phi_grid[i]);
      const Eigen::Vector3d dpv = e.dp.cwiseProduct(chain);
      if (objective == Objective::MaximumLikelihood) {
        const double w1 = s / e.p - (n - s) / (1.0 - e.p);
        grad += w1 * dpv;
        hess += n / (e.p * (1.0 - e.p)) * dpv * dpv.transpose();
      } else {
        const double r = static_cast<double>(s) / n - e.p;
        grad += ls_weight[i] * r * dpv;
        hess += ls_weight[i] * dpv * dpv.transpose();
      }
    }

    bool accepted = false;
    Eigen::Vector3d v_new = v;
    double proposal = current;
    for (int inner = 0; inner < 40 && !accepted; ++inner) {
      Eigen::Matrix3d damped = hess + lambda * Eigen::Matrix3d::Identity();
      Eigen::Vector3d step = damped.ldlt().solve(grad);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      Eigen::Vector3d cand = v + step;
      cand(1) = std::clamp(cand(1), -40.0, 40.0);
      cand(2) = std::clamp(cand(2), -40.0, 40.0);
      proposal = objective_value(cand(0), sigmoid(cand(1)), sigmoid(cand(2)));
      if (std::isfinite(proposal) && proposal >= current) {
        v_new = cand;
        accepted = true;
        lambda = std::max(lambda * 0.3, 1e-12);
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;

    const double step_orig =
        std::max({std::abs(v_new(0) - v(0)), std::abs(sigmoid(v_new(1)) - sigmoid(v(1))),
                  std::abs(sigmoid(v_new(2)) - sigmoid(v(2)))});
    v = v_new;
    current = proposal;
    if (step_orig < 1e-10) {
      fit.converged = true;
      break;
    }
  }

  const double c = sigmoid(v(1)), g = sigmoid(v(2));
  fit.phi = wrap_phase(v(0));
  fit.contrast = c;
  fit.gamma = g;
  fit.log_likelihood = log_likelihood(data, v(0), c, g);

  // Observed information in the original (Phi, C, gamma) coordinates.
  Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < data.phi_grid.size(); ++i) {
    const int n = data.shots[i];
    if (n == 0) continue;
    const int s = data.successes[i];
    const PointEval e = eval_point(v(0), c, g, data.phi_grid[i]);
    if (objective == Objective::MaximumLikelihood) {
      double w2 = 0.0, w1 = 0.0;
      if (s > 0) {
        w2 += s / (e.p * e.p);
        w1 += s / e.p;
      }
      if (s < n) {
        w2 += (n - s) / ((1.0 - e.p) * (1.0 - e.p));
        w1 -= (n - s) / (1.0 - e.p);
      }
      info += w2 * e.dp * e.dp.transpose() - w1 * e.d2p;
    } else {
      info += ls_weight[i] * e.dp * e.dp.transpose();
    }
  }
  fit.covariance = invert_information(info);
  return fit;
}

}  // namespace

double wrap_phase(double phi) {
  double w = std::remainder(phi, kTwoPi);
  if (w <= -std::numbers::pi) w = std::numbers::pi;
  return w;
}

FringeGuess initial_fringe_guess(const FringeData& data) {
  check_data(data);
  std::set<double> distinct(data.phi_grid.begin(), data.phi_grid.end());
  const double span = data.phi_grid.empty()
                          ? 0.0
                          : *std::max_element(data.phi_grid.begin(), data.phi_grid.end()) -
                                *std::min_element(data.phi_grid.begin(), data.phi_grid.end());
  if (distinct.size() < 4 || !(span > std::numbers::pi))
    throw std::invalid_argument(
        "degenerate grid: need >= 4 distinct phase points spanning more than pi");

  const std::size_t m = data.phi_grid.size();
  double ybar = 0.0;
  std::vector<double> y(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    y[i] = data.shots[i] > 0 ? static_cast<double>(data.successes[i]) / data.shots[i] : 0.0;
    ybar += y[i];
  }
  ybar /= static_cast<double>(m);

  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    a += (y[i] - ybar) * std::cos(data.phi_grid[i]);
    b += (y[i] - ybar) * std::sin(data.phi_grid[i]);
  }

  FringeGuess guess;
  guess.phi = std::atan2(-b, a);
  const double amplitude = 2.0 / static_cast<double>(m) * std::hypot(a, b);
  guess.gamma = std::clamp(1.0 - 2.0 * ybar, 0.0, 0.95);
  guess.contrast = std::clamp(amplitude / std::max(ybar, 1e-9), 1e-3, 0.999);
  return guess;
}

FringeFit fit_fringe(const FringeData& data, const FringeGuess& guess) {
  return fit_impl(data, guess, Objective::MaximumLikelihood);
}

FringeFit fit_fringe_least_squares(const FringeData& data, const FringeGuess& guess) {
  return fit_impl(data, guess, Objective::LeastSquares);
}

// ---------------------------------------------------------------------------
// Phase unwrapping

namespace {

double snap_to_branch(double wrapped, double prediction, bool& ambiguous) {
  const double k = std::round((prediction - wrapped) / kTwoPi);
  const double u = wrapped + kTwoPi * k;
  const double r = std::abs(u - prediction);           // distance of chosen branch
  ambiguous = (kTwoPi - 2.0 * r) < 0.1;                // runner-up nearly as close
  return u;
}

}  // namespace

UnwrapResult unwrap_phase_series(const std::vector<int>& n_list,
                                 const std::vector<double>& wrapped,
                                 const TimingParams& timing, double d) {
  if (n_list.size() != wrapped.size())
    throw std::invalid_argument("n_list and wrapped phases must have equal length");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 2 || n_list[i] % 2 != 0)
      throw std::invalid_argument("n_list entries must be even and >= 2");
    if (i > 0 && n_list[i] <= n_list[i - 1])
      throw std::invalid_argument("n_list must be strictly ascending");
  }

  // Basis value per unit gradient; the scan model is linear in it only
  // through the quadratic-in-(n/2) structure fitted below.
  auto unit_phase = [&](int n) { return closed_form_diamond_phase(n, 1.0, timing, d); };

  UnwrapResult res;
  res.phases.resize(wrapped.size());
  bool ambiguous = false;
  for (std::size_t i = 0; i < wrapped.size(); ++i) {
    double prediction = 0.0;
    if (i == 1) {
      prediction = res.phases[0] / unit_phase(n_list[0]) * unit_phase(n_list[1]);
    } else if (i >= 2) {
      // Least squares of u_j = a m_j^2 + b m_j on the points unwrapped so far.
      double s22 = 0.0, s21 = 0.0, s11 = 0.0, r2 = 0.0, r1 = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        const double m = n_list[j] / 2.0;
        s22 += m * m * m * m;
        s21 += m * m * m;
        s11 += m * m;
        r2 += m * m * res.phases[j];
        r1 += m * res.phases[j];
      }
      const double det = s22 * s11 - s21 * s21;
      const double mi = n_list[i] / 2.0;
      if (std::abs(det) > 0.0) {
        const double a = (r2 * s11 - r1 * s21) / det;
        const double b = (s22 * r1 - s21 * r2) / det;
        prediction = a * mi * mi + b * mi;
      } else {
        prediction = res.phases[i - 1];
      }
    }
    res.phases[i] = snap_to_branch(wrapped[i], prediction, ambiguous);
    if (ambiguous) res.flagged.push_back(static_cast<int>(i));
  }
  return res;
}

UnwrapResult unwrap_linear_series(const std::vector<double>& xs,
                                  const std::vector<double>& wrapped) {
  if (xs.size() != wrapped.size())
    throw std::invalid_argument("xs and wrapped phases must have equal length");
  UnwrapResult res;
  res.phases.resize(wrapped.size());
  bool ambiguous = false;
  for (std::size_t i = 0; i < wrapped.size(); ++i) {
    double prediction = 0.0;
    if (i == 1) {
      prediction = res.phases[0];
    } else if (i >= 2) {
      double sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        sx += xs[j];
        sxx += xs[j] * xs[j];
        sy += res.phases[j];
        sxy += xs[j] * res.phases[j];
      }
      const double count = static_cast<double>(i);
      const double det = count * sxx - sx * sx;
      if (std::abs(det) > 0.0) {
        const double slope = (count * sxy - sx * sy) / det;
        const double icept = (sxx * sy - sx * sxy) / det;
        prediction = icept + slope * xs[i];
      } else {
        prediction = res.phases[i - 1];
      }
    }
    res.phases[i] = snap_to_branch(wrapped[i], prediction, ambiguous);
    if (ambiguous) res.flagged.push_back(static_cast<int>(i));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Physical model fits

GradientFit fit_gradient(const std::vector<int>& n_list, const std::vector<double>& phases,
                         const std::vector<double>& sigmas, const TimingParams& timing,
                         double d) {
  const std::size_t m = n_list.size();
  if (m < 3 || phases.size() != m || (!sigmas.empty() && sigmas.size() != m))
    throw std::invalid_argument("fit_gradient needs >= 3 consistent points");

  double sgg = 0.0, sgy = 0.0;
  std::vector<double> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    basis[i] = closed_form_diamond_phase(n_list[i], 1.0, timing, d);
    const double sigma = sigmas.empty() ? 1.0 : sigmas[i];
    if (!(sigma > 0.0)) throw std::invalid_argument("sigmas must be positive");
    const double w = 1.0 / (sigma * sigma);
    sgg += w * basis[i] * basis[i];
    sgy += w * basis[i] * phases[i];
  }
  GradientFit fit;
  fit.grad_u = sgy / sgg;
  fit.sigma = std::sqrt(1.0 / sgg);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sigma = sigmas.empty() ? 1.0 : sigmas[i];
    const double r = (phases[i] - fit.grad_u * basis[i]) / sigma;
    chi2 += r * r;
  }
  fit.chi2_per_dof = chi2 / static_cast<double>(m - 1);
  return fit;
}

SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& phases,
                   const std::vector<double>& sigmas) {
  const std::size_t m = xs.size();
  if (m < 2 || phases.size() != m || (!sigmas.empty() && sigmas.size() != m))
    throw std::invalid_argument("fit_slope needs >= 2 consistent points");

  double s = 0.0, sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sigma = sigmas.empty() ? 1.0 : sigmas[i];
    if (!(sigma > 0.0)) throw std::invalid_argument("sigmas must be positive");
    const double w = 1.0 / (sigma * sigma);
    s += w;
    sx += w * xs[i];
    sxx += w * xs[i] * xs[i];
    sy += w * phases[i];
    sxy += w * xs[i] * phases[i];
  }
  const double det = s * sxx - sx * sx;
  if (!(std::abs(det) > 0.0))
    throw std::invalid_argument("fit_slope: degenerate abscissae");

  SlopeFit fit;
  fit.slope = (s * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  fit.sigma_slope = std::sqrt(s / det);
  fit.sigma_intercept = std::sqrt(sxx / det);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sigma = sigmas.empty() ? 1.0 : sigmas[i];
    const double r = (phases[i] - fit.intercept - fit.slope * xs[i]) / sigma;
    chi2 += r * r;
  }
  fit.chi2_per_dof = m > 2 ? chi2 / static_cast<double>(m - 2) : 0.0;
  return fit;
}

}  // namespace dai
