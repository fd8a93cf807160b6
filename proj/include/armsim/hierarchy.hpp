#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "armsim/eigensystem.hpp"

namespace armsim {

// One g * Op_a (x) Op_b term coupling two subsystems, by operator name.
struct CouplingTerm {
  double g_ghz = 0.0;
  std::string op_a;
  std::string op_b;
};

struct ComposeOptions {
  // Product labels with total excitation above this are not tracked; keeps the
  // greedy assignment focused on the low-lying states that downstream
  // observables name.
  int max_label_excitation = 1 << 20;
  // Minimum squared overlap for a label to claim an eigenvector at all.
  double min_overlap = 0.05;
  // Below this squared overlap a one-to-one assignment is considered
  // hybridized and the even/odd pair detection runs.
  double hybrid_overlap = 0.6;
  // A detected pair must be split by less than this to count as a resonant
  // hybrid rather than two independently diluted states.
  double hybrid_max_split_ghz = 1.5;
  // Warn (via the report) when an assigned computational label has squared
  // overlap under 0.5.
  double warn_overlap = 0.5;
};

// Builds H = E_a (x) I + I (x) E_b + sum g Op_a (x) Op_b, keeps the lowest
// `keep` eigenstates, lifts and rotates every operator of both subsystems,
// and assigns bare-product labels greedily by overlap magnitude (each product
// label claims the unassigned eigenvector of largest overlap). Resonantly
// split pairs are recorded as even/odd hybrids per ComposeOptions.
EigenSystem compose(const EigenSystem& a, const EigenSystem& b,
                    const std::vector<CouplingTerm>& coupling, int keep,
                    const ComposeOptions& opts = {});

// Declarative merge plan over the transformed circuit's coordinates. Leaves
// are single modes; each step merges two previously built subsystems.
struct HierarchyPlan {
  struct Step {
    std::vector<int> left_modes;   // coordinate ids (must match a built subsystem)
    std::vector<int> right_modes;
    int keep = 0;
  };
  std::map<int, int> mode_keep;          // coordinate id -> kept states
  std::map<int, int> mode_cutoff;        // optional basis cutoff override
  std::vector<Step> steps;
  ComposeOptions compose_opts;

  void validate(int n_modes) const;  // binary tree covering all modes once
};

// Runs the full pipeline: bare modes in their default bases, per-mode
// truncation, then the plan's pairwise merges with couplings derived from the
// transformed charging matrix (8 E'_C,ij n_i n_j for i in left, j in right).
EigenSystem run_hierarchy(const TransformedCircuit& circuit, const HierarchyPlan& plan);

// --- Spectral observables ---------------------------------------------------

// chi = E11 - E10 - E01 + E00 between two modes (all other modes in ground);
// hybridized labels use the mean of the split pair.
double cross_kerr_ghz(const EigenSystem& es, int mode_a, int mode_b);

// ZZ between the outer data modes of the five-mode gate circuit, in kHz.
double static_zz_khz(const EigenSystem& es);

// Node-frame charge operator n_node = (W^T n')_node as a combination of the
// carried transformed charge operators.
HermOp node_charge_op(const EigenSystem& es, const TransformedCircuit& circuit, int node);

// |<00| n_arm |01>| / |<00| n_arm |10>| with the node-frame arm charge
// operator, on a two-mode arm-qubit subsystem with labels ordered
// (data, arm). Infinity when the denominator vanishes.
double isolation_ratio(const EigenSystem& es, const HermOp& arm_charge,
                       const Label& ground, const Label& arm_excited,
                       const Label& data_excited);

struct Detunings {
  double drive_ghz = 0.0;   // omega_d = E|001> - E|000>
  double delta_even_ghz = 0.0;
  double delta_odd_ghz = 0.0;
};

// Readout-circuit detunings of the hybridized excited-manifold states from
// the bare resonator drive.
Detunings detunings(const EigenSystem& es);

struct SpectrumReport {
  std::vector<double> mode_freqs_ghz;
  std::vector<double> anharmonicities_ghz;       // per mode, E2-2E1+E0 where labeled
  std::map<std::pair<int, int>, double> cross_kerr_ghz;
  std::optional<double> static_zz_khz;
  std::vector<double> isolation_ratios;          // per arm qubit where applicable
  std::optional<Detunings> readout_detunings;
};

}  // namespace armsim
