#pragma once

#include <cmath>

// Unit conventions used throughout:
//   energy      E/h in GHz (linear frequency)
//   time        ns
//   capacitance fF
//   flux        radians of superconducting phase (2*pi*Phi/Phi0)
//   charge      Cooper-pair number
// GHz*ns = 1, so a phase accumulated over t ns at E GHz is 2*pi*E*t radians.
// Decay rates quoted as kappa/2pi in GHz become 2*pi*kappa in 1/ns.

namespace armsim::units {

inline constexpr double two_pi = 6.283185307179586476925287;

// CODATA 2018 exact values
inline constexpr double h_Js = 6.62607015e-34;
inline constexpr double hbar_Js = 1.054571817e-34;
inline constexpr double e_C = 1.602176634e-19;
inline constexpr double kB_JperK = 1.380649e-23;
inline constexpr double Phi0_Wb = h_Js / (2.0 * e_C);

// kB/h in GHz per kelvin
inline constexpr double kB_GHzperK = kB_JperK / h_Js * 1e-9;

// E_C/h in GHz for a capacitance in fF: e^2 / (2 C h)
inline double charging_energy_ghz(double c_fF) {
  return e_C * e_C / (2.0 * c_fF * 1e-15 * h_Js) * 1e-9;
}

// Capacitance (fF) whose charging energy is the given E_C (GHz)
inline double capacitance_fF(double ec_ghz) { return charging_energy_ghz(ec_ghz) / ec_ghz * 1.0; }

// Junction critical current in uA for a Josephson energy E_J/h in GHz:
// I_c = 2 pi E_J / Phi0 with E_J in joules.
inline double junction_critical_current_uA(double ej_ghz) {
  return two_pi * h_Js * ej_ghz * 1e9 / Phi0_Wb * 1e6;
}

// Fabrication-rule junction shunt capacitance: area = I_c / j_c, C = c_s * area.
inline double junction_capacitance_fF(double ej_ghz, double jc_uA_per_um2 = 1.0,
                                      double cs_fF_per_um2 = 67.0) {
  return cs_fF_per_um2 * junction_critical_current_uA(ej_ghz) / jc_uA_per_um2;
}

// Bose occupation of a mode at f GHz and temperature T kelvin
inline double thermal_occupation(double f_ghz, double temperature_K) {
  if (temperature_K <= 0.0) return 0.0;
  return 1.0 / std::expm1(f_ghz / (kB_GHzperK * temperature_K));
}

}  // namespace armsim::units
