#pragma once

#include <cstdint>
#include <vector>

#include "dai/decoherence.hpp"
#include "dai/paths.hpp"
#include "dai/potentials.hpp"
#include "dai/rng.hpp"
#include "dai/sequence.hpp"

namespace dai {

// Detection model: p(phi) = (1-gamma)/2 * [1 + C * cos(Phi + phi)].
struct FringeModel {
  double phi = 0.0;       // rad, interferometric phase
  double contrast = 0.0;  // [0, 1]
  double gamma = 0.0;     // [0, 1], atom loss probability
};

double fringe_probability(const FringeModel& model, double probe_phase);

// Binomial counts of spin-down detections over a probe-phase grid.
struct FringeData {
  std::vector<double> phi_grid;  // rad
  std::vector<int> successes;
  std::vector<int> shots;
  std::uint64_t seed = 0;
};

// 1 with probability p, deterministic given the stream state. Throws on
// p outside [0, 1].
int bernoulli_outcome(double p, RngStream& stream);

// One atom per shot; the draw for (point i, shot j) comes from
// stream.derive(i).derive(j), so results do not depend on evaluation order.
FringeData simulate_fringe(const FringeModel& model, const std::vector<double>& phi_grid,
                           int shots_per_point, RngStream stream);

struct MeasurementPlan {
  std::vector<double> phi_grid;
  int shots_per_point = 0;
  std::uint64_t seed = 0;
};

// Ground truth retained next to the simulated record for later scoring.
struct TruthRecord {
  double phi = 0.0;       // rad, unwrapped
  double contrast = 0.0;
  double gamma = 0.0;
  double area = 0.0;      // m*s
  double max_separation = 0.0;  // m
  int n_shifts = 0;
  double total_duration = 0.0;  // s
};

struct ExperimentResult {
  FringeData data;
  TruthRecord truth;
};

// Full pipeline for one sequence: paths -> phase (user potential plus the
// sequence's own acceleration windows) -> contrast -> simulated fringe.
// The sequence's final split phase adds to the interferometric phase.
ExperimentResult run_experiment(const Sequence& seq, const PotentialModel& pot,
                                const DecoherenceParams& dec, const MeasurementPlan& plan,
                                const LatticeConfig& lat);

// Same, but drawing from an already-derived stream (the plan's seed is
// recorded in the returned data but not used for the draws).
ExperimentResult run_experiment(const Sequence& seq, const PotentialModel& pot,
                                const DecoherenceParams& dec, const MeasurementPlan& plan,
                                const LatticeConfig& lat, RngStream stream);

std::vector<double> uniform_phase_grid(int points);

}  // namespace dai
