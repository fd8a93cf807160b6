#pragma once

#include <optional>
#include <string>

#include "armsim/circuit.hpp"
#include "armsim/linalg.hpp"

namespace armsim {

// Discretization basis for one transformed coordinate. Periodic coordinates
// use charge states -n_max..n_max; extended coordinates use the oscillator
// basis of their quadratic part with the given zero-point phase.
struct ModeBasis {
  CoordinateKind kind = CoordinateKind::Extended;
  int coordinate = 0;
  int cutoff = 0;          // n_max (periodic) or N_fock (extended)
  double phi_zpf = 0.0;    // extended only

  int dim() const { return kind == CoordinateKind::Periodic ? 2 * cutoff + 1 : cutoff; }
};

// Operators of a single bare mode in its discretization basis. Extended modes
// carry a diagonal gauge that makes the charge operator real symmetric and the
// phase operator i * antisymmetric, so mode couplings n_i n_j stay real.
struct BareMode {
  ModeBasis basis;
  HermOp h_ghz;
  HermOp n_op;        // charge, shifted by the coordinate offset charge
  HermOp phi_op;      // extended only
  HermOp sin_half_phi;  // sin(phi/2) across the coordinate; extended only
  HermOp num_op;      // oscillator occupation, extended only
  double offset_charge = 0.0;
  double coordinate_shift = 0.0;  // flux displacement absorbed into phi

  int dim() const { return basis.dim(); }
};

// Default basis for a coordinate: n_max = 40 charge states (periodic) or
// N_fock = 60 oscillator states with phi_zpf = (2 E_C / E_L)^(1/4) (extended).
ModeBasis default_basis(const Coordinate& coord, double ec_diag_ghz, int cutoff = 0);

// H = 4 E_C (n - n_g)^2 + sum_L (E_L/2)(phi + f_L)^2 - sum_J E_J cos(phi - f_J)
// built in `basis`. The quadratic part's flux offset is absorbed by shifting
// the coordinate, which keeps the Hamiltonian real at a half-quantum sweet
// spot. Throws on a basis/kind mismatch.
BareMode build_bare_mode(const Coordinate& coord, double ec_diag_ghz, const ModeBasis& basis);

struct QuantizationError : std::runtime_error {
  explicit QuantizationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace armsim
