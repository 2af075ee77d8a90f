#pragma once

#include <numbers>

// Physical constants (SI) and apparatus defaults for the caesium lattice
// interferometer. Anything that is experiment configuration rather than a
// constant of nature has a mutable home in LatticeConfig / TimingParams;
// the values here are only their defaults.

namespace dai {

inline constexpr double kPlanck = 6.62607015e-34;  // J s, exact SI
inline constexpr double kHbar = kPlanck / (2.0 * std::numbers::pi);

// Cs-133, 132.905451961 u
inline constexpr double kCsMass = 132.905451961 * 1.66053906660e-27;  // kg

inline constexpr double kStandardGravity = 9.80665;  // m/s^2

inline constexpr double kLatticeWavelength = 866e-9;                 // m
inline constexpr double kLatticeSpacing = kLatticeWavelength / 2.0;  // d
inline constexpr double kRayleighLength = 2.3e-3;                    // m

// Interband tunneling stays negligible below this lattice acceleration;
// sequences carrying a faster ramp are rejected by validation.
inline constexpr double kCriticalAcceleration = 5e4;  // m/s^2

// Measured spin coherence times, kept as configuration documentation:
// bare Ramsey, single echo, echo train with dynamical decoupling.
inline constexpr double kT2Bare = 200e-6;        // s
inline constexpr double kT2SingleEcho = 600e-6;  // s
inline constexpr double kT2EchoTrain = 2.3e-3;   // s

// Every path that turns a microsecond figure into seconds goes through this
// helper so equal inputs give bit-identical durations.
constexpr double from_us(double us) { return us * 1e-6; }

}  // namespace dai
