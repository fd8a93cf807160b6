#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "armsim/basis.hpp"
#include "armsim/linalg.hpp"

namespace armsim {

// Bare-product label: excitation number per mode, aligned with
// EigenSystem::modes. Prints as |01000> when all entries are single digits.
struct Label {
  std::vector<int> n;

  bool operator==(const Label&) const = default;
  bool operator<(const Label& other) const { return n < other.n; }
  std::string str() const;
};

Label concat_labels(const Label& a, const Label& b);

// Truncated eigenbasis of a (sub)circuit. Operators are stored rotated into
// the kept eigenbasis; energies are shifted so the ground state sits at 0.
struct EigenSystem {
  std::vector<int> modes;  // transformed-coordinate ids, ascending
  Vec energies;            // GHz
  std::map<std::string, HermOp> ops;
  std::map<Label, int> labels;

  // Hybridized pair bookkeeping (resonant product states that split into
  // even/odd combinations instead of mapping one-to-one).
  struct HybridPair {
    Label a, b;        // the two product labels involved
    int even_state;    // eigenindex of the same-sign superposition
    int odd_state;
  };
  std::vector<HybridPair> hybrids;

  int dim() const { return static_cast<int>(energies.size()); }
  bool has_label(const Label& l) const { return labels.count(l) > 0; }
  int state(const Label& l) const;
  double energy(const Label& l) const { return energies[state(l)]; }
  const HermOp& op(const std::string& name) const;

  // Energy of a hybridized product label, averaging the split pair when the
  // label belongs to one (Table-style convention).
  double energy_or_hybrid_mean(const Label& l) const;
};

// Lowest `keep` eigenpairs of a bare mode; operator matrices rotated into the
// kept eigenbasis, labels (k) for k = 0..keep-1.
EigenSystem diagonalize_truncate(const BareMode& mode, int mode_id, int keep);

// Generic form used by the composition step: diagonalizes `h`, keeps the
// lowest `keep` states and rotates every operator in `ops`.
EigenSystem diagonalize_truncate(const HermOp& h, const std::map<std::string, HermOp>& ops,
                                 int keep);

struct ConvergenceReport {
  std::vector<int> cutoffs;
  std::vector<double> max_rel_drift;  // between successive cutoffs
  bool converged = false;             // drift below threshold at the top rung
  double threshold = 1e-8;
};

// Re-diagonalizes a coordinate over a ladder of increasing cutoffs and
// reports the maximum relative drift of the kept energies.
ConvergenceReport convergence_check(const Coordinate& coord, double ec_diag_ghz, int keep,
                                    const std::vector<int>& cutoffs, double threshold = 1e-8);

}  // namespace armsim
