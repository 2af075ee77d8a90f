#include "dai/measurement.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dai {

double fringe_probability(const FringeModel& model, double probe_phase) {
  return 0.5 * (1.0 - model.gamma) *
         (1.0 + model.contrast * std::cos(model.phi + probe_phase));
}

int bernoulli_outcome(double p, RngStream& stream) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("bernoulli_outcome: p must be in [0, 1]");
  return stream.next_double() < p ? 1 : 0;
}

FringeData simulate_fringe(const FringeModel& model, const std::vector<double>& phi_grid,
                           int shots_per_point, RngStream stream) {
  if (shots_per_point < 0)
    throw std::invalid_argument("simulate_fringe: negative shot count");
  FringeData data;
  data.phi_grid = phi_grid;
  data.seed = stream.state();
  data.successes.resize(phi_grid.size());
  data.shots.assign(phi_grid.size(), shots_per_point);
  for (std::size_t i = 0; i < phi_grid.size(); ++i) {
    const double p = fringe_probability(model, phi_grid[i]);
    RngStream point_stream = stream.derive(i);
    int hits = 0;
    for (int j = 0; j < shots_per_point; ++j) {
      RngStream shot_stream = point_stream.derive(j);
      hits += bernoulli_outcome(p, shot_stream);
    }
    data.successes[i] = hits;
  }
  return data;
}

ExperimentResult run_experiment(const Sequence& seq, const PotentialModel& pot,
                                const DecoherenceParams& dec, const MeasurementPlan& plan,
                                const LatticeConfig& lat) {
  ExperimentResult result = run_experiment(seq, pot, dec, plan, lat, RngStream(plan.seed));
  result.data.seed = plan.seed;
  return result;
}

ExperimentResult run_experiment(const Sequence& seq, const PotentialModel& pot,
                                const DecoherenceParams& dec, const MeasurementPlan& plan,
                                const LatticeConfig& lat, RngStream stream) {
  const PathPair paths = compute_paths(seq, lat);
  const PotentialModel effective = with_sequence_inertia(pot, seq, lat.mass);

  ExperimentResult result;
  result.truth.phi = phase_integral(paths, effective) + seq.final_probe_phase();
  result.truth.contrast = predict_contrast(seq, dec);
  result.truth.gamma = dec.gamma_loss;
  result.truth.area = spacetime_area(paths);
  result.truth.max_separation = paths.max_separation();
  result.truth.n_shifts = seq.shift_count();
  result.truth.total_duration = paths.total_duration;

  FringeModel model{result.truth.phi, result.truth.contrast, result.truth.gamma};
  result.data = simulate_fringe(model, plan.phi_grid, plan.shots_per_point, stream);
  return result;
}

std::vector<double> uniform_phase_grid(int points) {
  if (points < 1) throw std::invalid_argument("phase grid needs at least one point");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = 2.0 * std::numbers::pi * i / points - std::numbers::pi;
  return grid;
}

}  // namespace dai
