#pragma once

#include <numbers>

namespace entpulse::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018.
inline constexpr double hbar = 1.054571817e-34;           // J s
inline constexpr double atomic_mass = 1.66053906660e-27;  // kg

// Linear frequency (Hz) to angular frequency (rad/s) and back.
constexpr double angular(double hz) { return two_pi * hz; }
constexpr double linear(double rad_per_s) { return rad_per_s / two_pi; }

}  // namespace entpulse::units
