#pragma once

#include <optional>

#include "armsim/metrics.hpp"
#include "armsim/noise.hpp"
#include "armsim/optimize.hpp"
#include "armsim/presets.hpp"

namespace armsim::experiments {

// --- spectrum ----------------------------------------------------------------

struct GateSpectrum {
  double w1, w2, w3, w4, w5;          // GHz
  double alpha1, alpha5;              // GHz
  double zz_khz;
  double chi13_mhz, chi53_mhz;
  double iso1, iso2;                  // full-circuit node-frame ratios
};

struct ReadoutSpectrum {
  double wq, warm, wr;                // GHz
  double chi12;                       // GHz
  double drive_ghz;
  double delta_e_mhz, delta_o_mhz;
  bool hybrid_found = false;
};

GateSpectrum gate_spectrum(const Netlist& nl, const HierarchyPlan& plan);
ReadoutSpectrum readout_spectrum(const Netlist& nl, const HierarchyPlan& plan);

// --- CZ gate -----------------------------------------------------------------

struct GateCoherence {
  ModeCoherence data1, transmon, data2;  // totals per mode
};

// Coherence-table totals used by the gate simulations; the dielectric channel
// scales with the quality factor, the flux and charge channels do not.
GateCoherence gate_coherence_totals(double q_diel = 3.5e6);

struct GateSystem {
  Netlist netlist;
  TransformedCircuit tc;
  EigenSystem es;
  Label l00000{{0, 0, 0, 0, 0}}, l10000{{1, 0, 0, 0, 0}}, l00001{{0, 0, 0, 0, 1}},
      l10001{{1, 0, 0, 0, 1}}, l00100{{0, 0, 1, 0, 0}};
  double drive_freq_ghz = 0.0;
  double drive_element = 0.0;  // |<00000| n_coupler |00100>|
  ActiveSpace space;
  Vec energies;        // projected, GHz
  CMat drive_op;       // projected coupler charge
  int c00 = 0, c01 = 0, c10 = 0, c11 = 0, ctr = 0;  // local indices
};

// Full hierarchy plus the lossless pre-run active space (pulse width per the
// procedure, population threshold 1e-6 for the master-equation gate space).
GateSystem build_gate_system(const Netlist& nl, const HierarchyPlan& plan,
                             double prerun_width_ns = 7.0, double pop_threshold = 1e-6,
                             double prerun_rtol = 1e-6);

// Cosine-pulse amplitude whose envelope area drives a full Rabi cycle.
double pulse_area_amplitude(double width_ns, double element);

// Projected 4x4 propagator in the computational dressed basis.
CMat cz_propagator(const GateSystem& gs, double amplitude_ghz, double width_ns,
                   double rtol = 1e-10);

// Fast objective: 1 - |<CZ pp| V(theta) psi(T)>|^2 from the |++> initial
// state, maximized over virtual-Z phases.
double cz_state_error(const GateSystem& gs, double amplitude_ghz, double width_ns,
                      double rtol = 1e-9);

struct CzTuneResult {
  double amplitude_ghz = 0.0;
  FidelityReport report;
};

// Amplitude tuning around the pulse-area seed: golden-section on the fast
// objective, then a propagator-based parabolic refinement.
CzTuneResult tune_cz(const GateSystem& gs, double width_ns);

// Open-system CZ: master-equation process tomography over the 16-state input
// basis with the coherence totals attached to both data modes and the
// coupler, scored by the Kraus-form average gate fidelity.
FidelityReport cz_open_system(const GateSystem& gs, double amplitude_ghz, double width_ns,
                              const GateCoherence& coherence, int threads = 0);

// --- single-qubit gate ---------------------------------------------------------

struct OneQubitResult {
  double amplitude_ghz = 0.0;
  double freq_ghz = 0.0;
  FidelityReport coherent;
  FidelityReport open;  // filled when coherence is provided
};

OneQubitResult onequbit_gate(const Netlist& nl, const HierarchyPlan& plan, int qubit,
                             double width_ns, const GateCoherence* coherence,
                             int threads = 0);

// --- readout -------------------------------------------------------------------

struct ReadoutSystem {
  Netlist netlist;
  TransformedCircuit tc;
  EigenSystem es;
  Label l000{{0, 0, 0}}, l100{{1, 0, 0}}, l010{{0, 1, 0}}, l001{{0, 0, 1}};
  double kappa_ghz = 0.1;
  double pulse_ns = 20.0;
  DriveSpec drive;
  CollapseOp collapse;       // 1 MHz floor, dynamics
  CollapseOp collapse_full;  // no floor, Purcell
  ActiveSpace space;
  Vec energies;
  CMat drive_local, collapse_local, number_local;
  int loc000 = 0, loc100 = 0;
};

ReadoutSystem build_readout_system(const Netlist& nl, const HierarchyPlan& plan,
                                   double kappa_ghz, double pulse_ns, double amplitude_ghz);

struct ReadoutMeResult {
  double bin_ns = 5e-3;
  double window_ns = 35.0;
  std::vector<Cplx> weights;     // conj(<L>_0 - <L>_1) at bin midpoints
  double nbar0 = 0.0, nbar1 = 0.0;  // peak photon number during the pulse
  double qnd0 = 0.0, qnd1 = 0.0;    // infidelity after 50 ns ring-down
};

ReadoutMeResult readout_master_equation(const ReadoutSystem& rs, double window_ns = 35.0,
                                        double ringdown_ns = 50.0);

struct ReadoutRunResult {
  ReadoutMeResult me;
  ReadoutReport report;          // eta = 1
  ReadoutReport report_eta;      // scaled eta
  TrajectoryBatch batch0, batch1;
};

ReadoutRunResult readout_trajectories(const ReadoutSystem& rs, const ReadoutMeResult& me,
                                      int n_traj, unsigned long long seed, double eta = 0.5,
                                      int threads = 0);

// Secant calibration of the square-pulse drive amplitude to a target peak
// photon number with the data mode in its ground state.
double calibrate_readout_amplitude(const Netlist& nl, const HierarchyPlan& plan,
                                   double kappa_ghz, double pulse_ns, double target_nbar,
                                   double guess_ghz);

// QND infidelity versus arm-mode offset charge.
struct QndPoint {
  double ng = 0.0;
  double qnd0 = 0.0, qnd1 = 0.0;
};
std::vector<QndPoint> qnd_offset_charge_sweep(const Netlist& nl, const HierarchyPlan& plan,
                                              double kappa_ghz, double pulse_ns,
                                              double amplitude_ghz,
                                              const std::vector<double>& ng_values,
                                              int threads = 0);

// --- noise budget ----------------------------------------------------------------

struct NoiseBudgetResult {
  NoiseBudgetRow data1, data2, transmon;
  double diel_t1_us[3] = {0, 0, 0};
  double flux_t1_ms[2] = {0, 0};
  double echo_tphi_ms[2] = {0, 0};
  double charge_tphi_ms[3] = {0, 0, 0};
  double qp_t1_us[2] = {0, 0};
  double purcell_ms[2] = {0, 0};      // kappa/2pi = 100, 70 MHz
  double shot_tphi_ms[2] = {0, 0};
  double chi_detuned_mhz = 0.0;       // E_J2 lowered to 13 GHz
};

NoiseBudgetResult noise_budget(const NoiseModel& model, int threads = 0,
                               unsigned long long seed = 1);

// --- Monte Carlo -------------------------------------------------------------------

struct MonteCarloConfig {
  int n_samples = 24;
  double rel_std = 0.05;
  double gate_ns = 15.0;
  unsigned long long seed = 1;
  int direct_budget = 150;
  double retune_span = 0.10;       // +-10% bounds on E_J2, E_J3, E_J4
  double plan_scale = 0.5;
  int threads = 0;
};

struct MonteCarloSample {
  int index = 0;
  bool ok = false;
  std::string error;
  double ej2 = 0.0, ej3 = 0.0, ej4 = 0.0;          // retuned values
  double coherent_error = 0.0;
  double zz_khz = 0.0;
};

struct MonteCarloResult {
  MonteCarloConfig config;
  std::vector<MonteCarloSample> samples;
  double percentile_error(double q) const;   // over ok samples
  double percentile_zz(double q) const;
};

MonteCarloResult monte_carlo(const MonteCarloConfig& config);

}  // namespace armsim::experiments
