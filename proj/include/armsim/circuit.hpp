#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "armsim/linalg.hpp"

namespace armsim {

// A branch endpoint pair; b < 0 means ground.
struct Branch {
  int a = -1;
  int b = -1;
  bool to_ground() const { return b < 0; }
};

struct Junction {
  Branch branch;
  double ej_ghz = 0.0;
  double external_flux_rad = 0.0;
};

struct Inductor {
  Branch branch;
  double el_ghz = 0.0;
  double external_flux_rad = 0.0;
  // Junction-array superinductors carry the series capacitance of their
  // junctions, which reduces to the single-junction fabrication rule applied
  // to E_L (independent of array length). Geometric inductors (CPW) do not.
  bool junction_array = false;
};

// Parasitic capacitance added between chain neighbours, indexed by chain
// distance (index 0 = nearest neighbour). Junction shunt capacitance follows
// a fixed critical-current-density fabrication rule.
struct ParasiticRules {
  std::vector<double> by_distance_fF;  // e.g. {1.0, 0.5, 0.1}
  bool junction_caps = true;
  // Tabulated node-to-ground shunt values are design totals that already
  // include their own junction's capacitance, so the fabrication-rule cap is
  // added only for branch junctions (and junction-array inductors).
  bool shunts_include_ground_junction = true;
  double jc_uA_per_um2 = 1.0;
  double cs_fF_per_um2 = 67.0;
  // Pairs whose designed coupling capacitor already absorbs the stray value
  // (no distance-rule parasitic added), keyed by chain distance.
  std::vector<std::pair<int, int>> absorbed_pairs;

  static ParasiticRules gate5() { return {{1.0, 0.5, 0.1}, true, true, 1.0, 67.0, {}}; }
  static ParasiticRules readout3() { return {{1.0, 0.1}, true, true, 1.0, 67.0, {{1, 2}}}; }
  static ParasiticRules none() { return {{}, false, true, 1.0, 67.0, {}}; }
};

struct CircuitSpec {
  std::vector<std::string> nodes;              // display names, index = node id
  std::map<int, double> ground_caps_fF;        // node -> C
  std::map<std::pair<int, int>, double> branch_caps_fF;  // (a<b) -> C
  std::vector<Junction> junctions;
  std::vector<Inductor> inductors;
  std::map<int, double> offset_charges;        // node -> n_g
  std::vector<int> chain_order;                // node ids along the physical chain

  int node_count() const { return static_cast<int>(nodes.size()); }
  int node_id(const std::string& name) const;
  void validate() const;  // throws CircuitError on bad topology or values
};

struct CircuitError : std::runtime_error {
  explicit CircuitError(const std::string& what) : std::runtime_error(what) {}
};

struct ChargingMatrix {
  Mat c_fF;     // Maxwell capacitance matrix
  Mat ec_ghz;   // (e^2/2) C^-1 / h
};

// Every capacitor in the circuit after the parasitic and junction-shunt
// rules are applied (explicit, parasitic, junction, array), itemized for the
// dielectric-loss sum.
struct CapacitorElement {
  Branch branch;  // b < 0 marks a ground capacitor
  double c_fF = 0.0;
  std::string origin;  // "ground", "branch", "parasitic", "junction", "array"
};
std::vector<CapacitorElement> capacitor_elements(const CircuitSpec& spec,
                                                 const ParasiticRules& rules);

// Maxwell capacitance matrix with parasitic and junction-shunt rules applied.
Mat assemble_capacitance(const CircuitSpec& spec, const ParasiticRules& rules);

// E_C = e^2/(2h) C^-1 in GHz. Throws on a singular capacitance matrix and
// names the offending (isolated) node.
ChargingMatrix charging_energies(const CircuitSpec& spec, const Mat& c_fF);

struct TransformSpec {
  Eigen::MatrixXi w;  // integer, |det| = 1
  static TransformSpec identity(int n);
};

// One potential-energy term living on a single transformed coordinate.
struct CosineTerm {
  double ej_ghz = 0.0;
  double flux_rad = 0.0;  // -E_J cos(phi' - flux)
  int sign = 1;           // coordinate orientation, cos is even so unused
};

struct QuadraticTerm {
  double el_ghz = 0.0;
  double flux_rad = 0.0;  // (E_L/2)(phi' + sign*flux)^2 with phi' = sign*(node diff)
};

enum class CoordinateKind { Periodic, Extended };

struct Coordinate {
  int index = 0;
  CoordinateKind kind = CoordinateKind::Periodic;
  std::vector<CosineTerm> cosines;
  std::vector<QuadraticTerm> quadratics;
  double offset_charge = 0.0;
};

struct TransformedCircuit {
  CircuitSpec spec;
  ParasiticRules rules;
  TransformSpec transform;
  Mat ec_node_ghz;   // untransformed E_C
  Mat ec_prime_ghz;  // W E_C W^T
  Mat c_fF;
  std::vector<Coordinate> coordinates;
};

// Applies phi' = W phi, n' = (W^T)^-1 n, E_C' = W E_C W^T and classifies each
// transformed coordinate as periodic or extended. Requires every junction and
// inductor branch to map onto a single transformed coordinate (unit vector row
// of W^-1 up to sign); rejects non-unimodular W.
TransformedCircuit transform_variables(const CircuitSpec& spec, const TransformSpec& t,
                                       const ParasiticRules& rules);

// Offset charges transform like the charge operators, n_g' = (W^T)^-1 n_g --
// used when building periodic bare modes.
Vec transformed_offset_charges(const CircuitSpec& spec, const TransformSpec& t);

}  // namespace armsim
