#pragma once

#include <numbers>

// CODATA 2018 values, SI units.
namespace hybridspin::physical {

inline constexpr double kVacuumPermeability = 1.25663706212e-6;  // N A^-2
inline constexpr double kReducedPlanck = 1.054571817e-34;         // J s
inline constexpr double kElectronGyromagneticRatio = 1.76085963023e11;  // rad s^-1 T^-1

/// gamma_e / 2pi in MHz/mT.
inline constexpr double kGammaEMhzPerMt = kElectronGyromagneticRatio / (2.0 * std::numbers::pi) * 1e-9;

}  // namespace hybridspin::physical
