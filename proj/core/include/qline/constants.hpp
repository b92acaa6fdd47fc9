#pragma once

namespace qline::constants {

// CODATA 2018 (exact by SI definition)
inline constexpr double electron_charge = 1.602176634e-19;  // C
inline constexpr double planck = 6.62607015e-34;            // J s
inline constexpr double hbar = 1.054571817e-34;             // J s
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

}  // namespace qline::constants
