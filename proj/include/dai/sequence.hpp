#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dai/constants.hpp"

namespace dai {

// Block durations that are not fixed by the block itself (split, shift, pi
// pulse) are resolved from these when a sequence is built or parsed.
struct TimingParams {
  double tau_shift = from_us(18.0);  // s, one spin-dependent shift
  double tau_pi = from_us(12.0);     // s, pi pulse

  // pi/2 duration, timeline bookkeeping only: splits happen at zero arm
  // separation and contribute no differential phase.
  double tau_pi2() const { return tau_pi / 2.0; }

  bool operator==(const TimingParams&) const = default;
};

struct LatticeConfig {
  double wavelength = kLatticeWavelength;  // m
  double spacing = kLatticeSpacing;        // m, d = wavelength / 2
  double rayleigh = kRayleighLength;       // m
  double mass = kCsMass;                   // kg
  double g0 = kStandardGravity;            // m/s^2

  bool operator==(const LatticeConfig&) const = default;
};

// Elementary operation blocks. A Shift moves the arm currently labelled
// spin-up by +direction*d/2 and the spin-down arm by -direction*d/2; a
// PiPulse swaps the labels and freezes positions. Split is the pi/2 Ramsey
// boundary carrying the probe phase.
struct SplitPulse {
  double probe_phase = 0.0;  // rad
  bool operator==(const SplitPulse&) const = default;
};
struct Shift {
  int direction = +1;  // +1 or -1
  bool operator==(const Shift&) const = default;
};
struct PiPulse {
  bool operator==(const PiPulse&) const = default;
};
struct Idle {
  bool operator==(const Idle&) const = default;
};
struct AccelWindow {
  double accel = 0.0;  // m/s^2, lattice acceleration while the window is on
  bool operator==(const AccelWindow&) const = default;
};

struct Block {
  std::variant<SplitPulse, Shift, PiPulse, Idle, AccelWindow> op;
  double duration = 0.0;  // s, strictly positive

  bool operator==(const Block&) const = default;
};

Block make_split(double probe_phase, const TimingParams& timing);
Block make_shift(int direction, const TimingParams& timing);
Block make_pi(const TimingParams& timing);
Block make_idle(double duration);
Block make_accel_window(double accel, double duration);

struct Sequence {
  std::vector<Block> blocks;
  TimingParams timing;

  bool operator==(const Sequence&) const = default;

  double total_duration() const;
  int shift_count() const;
  // Total idle plus acceleration-window time; the echo-sensitive part of the
  // timeline for the contrast model.
  double echo_time() const;
  // Probe phase of the last split, 0 if absent.
  double final_probe_phase() const;
};

enum class GeometryKind { SingleDiamond, DoubleDiamond, HoldDiamond, AccelDiamond };

struct GeometrySpec {
  GeometryKind kind = GeometryKind::SingleDiamond;
  int n_shifts = 2;          // even, >= 2; DoubleDiamond additionally % 4 == 0
  double t_hold = 0.0;       // s, HoldDiamond: total dwell at max separation
  double accel = 0.0;        // m/s^2, AccelDiamond
  double t_acc = 0.0;        // s, AccelDiamond: total accelerated time
  double probe_phase = 0.0;  // rad, final split
};

// DSL parse failure; positions are 1-based.
class SequenceParseError : public std::runtime_error {
 public:
  SequenceParseError(std::string msg, int line, int column, int token_index)
      : std::runtime_error(std::move(msg)), line(line), column(column), token_index(token_index) {}
  int line;
  int column;
  int token_index;
};

// Text form, whitespace-separated tokens, '#' starts a line comment:
//   timing tau_S=<us> tau_pi=<us>        (optional header; defaults 18, 12)
//   Q(<phase rad>) S+ S- P I(<us>) A(<m/s^2>,<us>)
Sequence parse_sequence(std::string_view text);
std::string serialize_sequence(const Sequence& seq);

struct Violation {
  int block_index = -1;  // -1: whole-sequence violation
  std::string message;
};

// Empty result means the sequence is well formed: Ramsey pair present, arms
// recombine exactly (integer half-step bookkeeping), durations positive and
// the acceleration guard holds. Violations are data, not exceptions.
std::vector<Violation> validate_sequence(const Sequence& seq);

// Throws std::invalid_argument on an invalid spec. Every generated sequence
// passes validate_sequence.
Sequence build_geometry(const GeometrySpec& spec, const TimingParams& timing = {});

// Arm positions in exact half-step (d/2) integer units at block boundaries;
// index 0 is the arm that starts spin-up. positions[k] is the state after
// block k-1, positions[0] = {0, 0}.
std::vector<std::array<int, 2>> arm_positions_half_steps(const Sequence& seq);

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace dai
