#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "armsim/dynamics.hpp"

namespace armsim {

struct FidelityReport {
  double fidelity = 0.0;
  double leakage = 0.0;
  double theta_a = 0.0, theta_b = 0.0;  // virtual-Z phases used (radians)
  double gate_time_ns = 0.0;
  enum class Method { Propagator, Kraus } method = Method::Propagator;
};

// Ideal CZ in the |q1 q2> ordering used throughout: pi phase on |00>.
CMat cz_unitary();
// X/2 rotation exp(-i pi sigma_x / 4).
CMat xhalf_unitary();

// Average-fidelity of a projected 4x4 propagator against CZ,
// F = [Tr(T^dag T) + |Tr(U^dag V T)|^2] / 20, maximized over the two
// virtual-Z phases V = diag(1, e^{i tb}, e^{i ta}, e^{i(ta+tb)}) (closed-form
// alignment seeds, then coordinate-ascent refinement).
FidelityReport propagator_fidelity(const CMat& t_matrix, bool optimize_phases = true);

struct KrausSet {
  std::vector<CMat> ops;
  double completeness_defect = 0.0;  // ||I - sum E^dag E||
  double choi_negativity = 0.0;      // most negative clipped eigenvalue
};

// Quantum process tomography by linear inversion over the product basis
// {|0>,|1>,|+>,|+i>} per qubit. `apply` maps an input density matrix in the
// computational subspace to the evolved, projected output. d in {2, 4}.
// Throws when the reconstructed Choi matrix has eigenvalues below -1e-6;
// smaller negativity is clipped and recorded.
KrausSet process_tomography(const std::function<CMat(const CMat&)>& apply, int d,
                            int threads = 1);

// Eq.-5 style average gate fidelity of a (possibly leaky) Kraus channel
// against a target unitary, F = sum_i [Tr(E_i^dag E_i) + |Tr(U^dag E_i)|^2] /
// (d(d+1)), maximized over virtual-Z phases when optimize_phases is set.
FidelityReport kraus_fidelity(const KrausSet& kraus, const CMat& target, int d,
                              bool optimize_phases = true);

struct ReadoutReport {
  std::vector<double> mark_times_ns;
  std::vector<double> snr;            // at eta = 1
  std::vector<double> assignment_error;  // 0.5 erfc(SNR/sqrt(2))
  double eta = 1.0;                   // applied as SNR *= sqrt(eta)
  // Gaussian fits along the discriminating axis at the final mark
  double mu0 = 0.0, mu1 = 0.0, sigma0 = 0.0, sigma1 = 0.0;
  int misassigned0 = 0, misassigned1 = 0;  // observed, at the final mark
  int shots0 = 0, shots1 = 0;
  // full per-shot projections at the final mark (histogram export)
  std::vector<double> projections0, projections1;
};

// Gaussian discrimination of the weighted integrated records of two prepared
// batches; per-shot statistics projected on the mu0-mu1 axis, equal-likelihood
// (quadratic) assignment threshold. Requires >= 100 shots per class.
ReadoutReport integrate_readout(const TrajectoryBatch& batch0, const TrajectoryBatch& batch1,
                                double eta = 1.0);

// 1 - sum over resonator occupations of <q,a,n| rho |q,a,n> for the dressed
// labels matching the initial state's qubit occupations; rho lives in `space`.
double qnd_infidelity(const EigenSystem& es, const ActiveSpace& space, const CMat& rho,
                      const Label& initial, int resonator_pos);

struct MetricsError : std::runtime_error {
  explicit MetricsError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace armsim
