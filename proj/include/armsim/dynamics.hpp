#pragma once

#include <functional>
#include <string>
#include <vector>

#include "armsim/eigensystem.hpp"

namespace armsim {

struct DriveSpec {
  enum class Envelope { Cosine, Square };
  std::string target;  // operator name in the eigensystem
  Envelope envelope = Envelope::Cosine;
  double amplitude_ghz = 0.0;
  double freq_ghz = 0.0;
  double start_ns = 0.0;
  double duration_ns = 0.0;
  double carrier_phase = 0.0;

  // Envelope alone (vanishes at both ends for the cosine shape).
  double envelope_at(double t_ns) const;
  // Full waveform: amplitude * envelope * cos(2 pi f (t - start) + phase).
  double eps(double t_ns) const;
};

struct DrivenOp {
  DriveSpec spec;
  CMat op;
};

struct CollapseOp {
  CMat op;  // rate absorbed, units 1/sqrt(ns)
  std::string provenance;
};

using CollapseSet = std::vector<CollapseOp>;

// App-B style resonator collapse: L = sum_{i<j} sqrt(kappa_eff,ij) |<e_j| xi
// |e_i>| |e_i><e_j| with xi = n_r / <000|n_r|001> and kappa_eff = kappa
// (w_ij/w_r)^2. Terms below rate_floor (1/ns) are dropped; pass 0 to keep the
// Purcell-scale elements.
CollapseOp build_resonator_collapse(const EigenSystem& es, const std::string& nr_op,
                                    double kappa_ghz, double omega_r_ghz,
                                    double rate_floor_per_ns = 1e-3);

struct ModeCoherence {
  double t1_ns = 0.0;    // <= 0 disables the channel
  double tphi_ns = 0.0;
};

// Relaxation sqrt(1/T1)|0><1| and dephasing sqrt(1/Tphi)|1><1| per mode,
// constructed on the given labeled basis states (the "primarily populated"
// set) and lifted into the eigenbasis.
CollapseSet qubit_collapses(const EigenSystem& es,
                            const std::vector<std::pair<int, ModeCoherence>>& modes,
                            const std::vector<Label>& span);

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-3;   // ns
  double h_min = 1e-9;
  bool interaction_picture = true;
};

using StateObserver = std::function<void(double t_ns, const CVec&)>;
using DensityObserver = std::function<void(double t_ns, const CMat&)>;

// Lab-frame Schroedinger evolution under H = diag(E) + sum eps_k(t) M_k,
// integrated in the interaction picture of diag(E) with adaptive RK45.
// The observer is called at every time in t_grid with the lab-frame state.
CVec evolve_schrodinger(const Vec& energies_ghz, const std::vector<DrivenOp>& drives,
                        const CVec& psi0, const std::vector<double>& t_grid,
                        const StateObserver& observer = {}, IntegratorOptions opts = {});

struct LindbladOptions : IntegratorOptions {
  LindbladOptions() {
    rtol = 1e-8;
    atol = 1e-10;
  }
  double trace_abort = 1e-6;
  bool check_positivity = false;  // eigenvalue check at grid points
};

CMat evolve_lindblad(const Vec& energies_ghz, const std::vector<DrivenOp>& drives,
                     const CollapseSet& collapses, const CMat& rho0,
                     const std::vector<double>& t_grid, const DensityObserver& observer = {},
                     LindbladOptions opts = {});

// Projection of a full eigensystem onto a retained subset of eigenstates.
struct ActiveSpace {
  std::vector<int> states;  // parent eigenindices, ascending

  int dim() const { return static_cast<int>(states.size()); }
  int local_index(int parent) const;
  Vec project(const Vec& energies) const;
  CMat project(const CMat& op) const;
  CMat project(const HermOp& op) const;
  CVec basis_state(int parent) const;
};

// States whose population ever exceeds `threshold` in a lossless run from
// each initial state, plus the initial states themselves.
ActiveSpace populated_space(const Vec& energies_ghz, const std::vector<DrivenOp>& drives,
                            const std::vector<int>& initial_states, double threshold,
                            double window_ns, double sample_dt_ns = 0.01,
                            IntegratorOptions opts = {});

struct TruncationThresholds {
  double population = 1e-5;
  double connectivity = 1e-2;
  int max_rounds = 10;
};

// App-B iterative active-space construction: evolve the master equation on
// the current set, drop states that never exceed the population threshold,
// add states connected through link-operator matrix elements above the
// connectivity threshold, and repeat to a fixed point. `link_ops` carry the
// normalization (the resonator drive as xi with <000|xi|001> = 1, the
// collapse as d/sqrt(kappa)).
ActiveSpace iterative_truncation(const EigenSystem& es, const std::vector<DrivenOp>& drives,
                                 const CollapseSet& collapses,
                                 const std::vector<CMat>& link_ops,
                                 const std::vector<int>& initial_states, double window_ns,
                                 const TruncationThresholds& thresholds = {},
                                 LindbladOptions opts = {});

// One heterodyne stochastic-Schroedinger trajectory batch. The measured
// record for bin b is r_b = integral over the bin of (<L>(t) dt + dZ*), with
// complex Wiener noise E|dZ|^2 = dt. Weighted integrals accumulate
// S(tau_m) = sum_{bins <= tau_m} conj(w_b) r_b against the supplied weights.
struct TrajectoryBatch {
  int true_label = 0;
  std::vector<double> mark_times_ns;
  std::vector<std::vector<Cplx>> weighted_marks;  // [traj][mark]
  std::vector<double> sample_times_ns;            // ensemble diagnostics
  Mat mean_populations;                           // [sample][state]
};

struct SseConfig {
  double dt_ns = 1e-3;
  double record_bin_ns = 5e-3;
  double window_ns = 35.0;
  std::vector<double> mark_times_ns;  // defaults to 1 ns steps over window
  int n_traj = 100;
  unsigned long long seed = 1;
  int threads = 0;
  double sample_dt_ns = 0.5;  // population diagnostics
};

TrajectoryBatch sse_trajectories(const Vec& energies_ghz, const std::vector<DrivenOp>& drives,
                                 const CMat& collapse, const CVec& psi0, int true_label,
                                 const std::vector<Cplx>& weights_per_bin,
                                 const SseConfig& config);

struct DynamicsError : std::runtime_error {
  explicit DynamicsError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace armsim
