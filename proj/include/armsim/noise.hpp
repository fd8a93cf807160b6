#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "armsim/dynamics.hpp"
#include "armsim/hierarchy.hpp"

namespace armsim {

struct NoiseModel {
  double q_diel = 3.5e6;
  double t_diel_K = 0.020;
  double a_phi_phi0 = 1e-6;     // sqrt-PSD amplitude at 1 Hz, in Phi_0
  double x_qp = 2e-9;
  double gap_ghz = 44.0;        // superconducting gap / h (aluminum)
  double t_eff_K = 0.045;       // resonator effective temperature
  double kappa_ghz = 0.1;       // resonator linewidth / 2pi
};

// --- Dielectric loss ---------------------------------------------------------

struct DielectricBreakdown {
  struct Item {
    std::string origin;
    Branch branch;
    double c_fF = 0.0;
    double rate_per_s = 0.0;
  };
  std::vector<Item> items;
  double total_rate_per_s = 0.0;
  double t1_us() const { return total_rate_per_s > 0 ? 1e6 / total_rate_per_s : 0.0; }
};

// Voltage-noise transition rate summed over every capacitor: the node voltage
// operators come from V = 2e C^-1 n with the node charges reassembled from
// the transformed ones, and each capacitor contributes
// |<1| C dV |0>|^2 (S_V(w) + S_V(-w)) / hbar^2 with
// S_V(w, C) = hbar/(C Q) |coth(hbar w / 2 kT) + 1|.
DielectricBreakdown dielectric_t1(const EigenSystem& es, const TransformedCircuit& circuit,
                                  const Label& ground, const Label& excited,
                                  const NoiseModel& model);

// --- Flux noise --------------------------------------------------------------

// Golden-rule flux-noise relaxation: dH/dPhi = (2 pi / Phi_0) E_L phi with the
// extended-coordinate flux operator, S_Phi(w) = A^2 (2 pi 1Hz / w).
double flux_t1_rate_per_s(const EigenSystem& es, const std::string& phi_op, double el_ghz,
                          const Label& ground, const Label& excited, const NoiseModel& model);

struct FluxEchoConfig {
  double record_s = 10.0;        // synthesized record length
  double sample_rate_hz = 1e6;
  unsigned long long seed = 1;
  std::vector<double> tau_s;     // probe separations; default log grid
};

struct FluxEchoResult {
  std::vector<double> tau_s;
  std::vector<double> coherence;  // |<exp(i theta)>|
  double tphi_s = 0.0;            // 1/e crossing, 0 when no crossing
};

// Echo dephasing from a synthesized 1/f flux record: the qubit frequency
// curve omega(phi_ext) is sampled by the record, short segments are
// integrated with a sign flip halfway, and the coherence is averaged over
// non-overlapping segments.
FluxEchoResult flux_echo_tphi(const std::vector<double>& phi_ext_rad,
                              const std::vector<double>& omega_ghz, double phi_bias_rad,
                              const NoiseModel& model, const FluxEchoConfig& config = {});

// --- Charge noise ------------------------------------------------------------

struct ChargeDispersion {
  double omega0_ghz = 0.0;
  double amplitude_ghz = 0.0;   // A in w(n_g) = w0 + A cos(2 pi n_g)
  double residual = 0.0;        // rms fit residual / |A|
  double rate_per_s = 0.0;      // A/pi with A in angular units
  double tphi_s() const { return rate_per_s > 0 ? 1.0 / rate_per_s : 0.0; }
};

// Cosine fit of a frequency-vs-offset-charge sweep; throws when the residual
// exceeds 5% of the fitted amplitude.
ChargeDispersion charge_dephasing(const std::vector<double>& ng,
                                  const std::vector<double>& omega_ghz);

// --- Quasiparticles ----------------------------------------------------------

struct QuasiparticleResult {
  double junction_rate_per_s = 0.0;  // main junction, sin(phi/2) element
  double array_rate_per_s = 0.0;     // junction array, (phi/2) element
  double junction_element = 0.0;
  double array_element = 0.0;
};

QuasiparticleResult quasiparticle_t1(const EigenSystem& es, const std::string& sin_half_op,
                                     const std::string& phi_op, double ej_ghz, double el_ghz,
                                     const Label& ground, const Label& excited,
                                     const NoiseModel& model);

// --- Resonator-induced channels ----------------------------------------------

// Thermal photon shot-noise dephasing,
// Gamma = (kappa/2) Re[sqrt((1 + i chi/kappa)^2 + 4 i chi n_th / kappa) - 1].
double shot_noise_tphi_s(double chi_ghz, double kappa_ghz, double n_th);

// Purcell lifetime from the constructed resonator collapse operator,
// 1/T1 = |<000| d |100>|^2.
double purcell_t1_ms(const EigenSystem& es, const CollapseOp& collapse);

// --- Aggregation --------------------------------------------------------------

struct NoiseBudgetRow {
  std::string mode;
  std::optional<double> t1_dielectric_us;
  std::optional<double> t1_flux_us;
  std::optional<double> t1_quasiparticle_us;  // reported, excluded from totals
  std::optional<double> tphi_flux_echo_us;
  std::optional<double> tphi_charge_us;
  double t1_total_us = 0.0;
  double tphi_total_us = 0.0;
  double t2e_us = 0.0;
};

// Harmonic totals; the quasiparticle channel is reported but kept out of the
// totals unless include_qp is set, matching the coherence table convention.
NoiseBudgetRow aggregate(const std::string& mode, std::optional<double> t1_diel_us,
                         std::optional<double> t1_flux_us, std::optional<double> t1_qp_us,
                         std::optional<double> tphi_echo_us, std::optional<double> tphi_charge_us,
                         bool include_qp = false);

struct NoiseError : std::runtime_error {
  explicit NoiseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace armsim
