#include "armsim/presets.hpp"

#include <cmath>

namespace armsim::presets {

namespace {
constexpr double kPi = 3.14159265358979323846;

int scaled(int keep, double s) { return std::max(2, static_cast<int>(std::lround(keep * s))); }
}  // namespace

Netlist gate5() {
  Netlist nl;
  CircuitSpec& spec = nl.spec;
  spec.nodes = {"1", "2", "3", "4", "5"};
  spec.ground_caps_fF = {{0, 20.8}, {1, 33.1}, {2, 29.1}, {3, 33.0}, {4, 19.4}};
  spec.branch_caps_fF = {{{1, 2}, 4.7}, {{2, 3}, 4.8}};
  spec.junctions = {
      {{0, 1}, 38.5, 0.0},  // E_J12
      {{1, -1}, 19.8, 0.0},  // E_J2
      {{2, -1}, 20.5, 0.0},  // E_J3
      {{3, -1}, 17.6, 0.0},  // E_J4
      {{3, 4}, 38.4, 0.0},  // E_J45
  };
  spec.inductors = {
      {{0, 1}, 26.2, kPi, true},  // E_L12 junction array, half-quantum bias
      {{3, 4}, 26.2, kPi, true},  // E_L45
  };
  spec.chain_order = {0, 1, 2, 3, 4};
  nl.parasitic_profile = "gate5";
  nl.rules = ParasiticRules::gate5();
  return nl;
}

Netlist readout3() {
  Netlist nl;
  CircuitSpec& spec = nl.spec;
  spec.nodes = {"1", "2", "r"};
  spec.ground_caps_fF = {{0, 20.4}, {1, 36.2}, {2, 293.0}};
  spec.branch_caps_fF = {{{1, 2}, 6.5}};
  spec.junctions = {
      {{0, 1}, 38.5, 0.0},   // E_J12
      {{1, -1}, 33.6, 0.0},  // E_J2
  };
  spec.inductors = {
      {{0, 1}, 26.2, kPi, true},   // E_L12 junction array
      {{2, -1}, 223.0, 0.0, false}, // resonator E_Lr is a CPW
  };
  spec.chain_order = {0, 1, 2};
  nl.parasitic_profile = "readout3";
  nl.rules = ParasiticRules::readout3();
  return nl;
}

TransformSpec gate5_transform() {
  TransformSpec t;
  t.w.resize(5, 5);
  t.w << 1, -1, 0, 0, 0,
         0,  1, 0, 0, 0,
         0,  0, 1, 0, 0,
         0,  0, 0, 1, 0,
         0,  0, 0, -1, 1;
  return t;
}

TransformSpec readout3_transform() {
  TransformSpec t;
  t.w.resize(3, 3);
  t.w << 1, -1, 0,
         0,  1, 0,
         0,  0, 1;
  return t;
}

HierarchyPlan gate5_plan(double scale) {
  HierarchyPlan plan;
  int per_mode = scaled(12, scale);
  for (int m = 0; m < 5; ++m) plan.mode_keep[m] = per_mode;
  plan.steps = {
      {{0}, {1}, scaled(24, scale)},
      {{3}, {4}, scaled(24, scale)},
      {{0, 1}, {2}, scaled(96, scale)},
      {{0, 1, 2}, {3, 4}, scaled(576, scale)},
  };
  return plan;
}

HierarchyPlan readout3_plan() {
  HierarchyPlan plan;
  plan.mode_keep = {{0, 12}, {1, 12}, {2, 20}};
  plan.steps = {
      {{0}, {1}, 24},
      {{0, 1}, {2}, 300},
  };
  return plan;
}

TransformedCircuit transformed(const Netlist& nl, const TransformSpec& t) {
  return transform_variables(nl.spec, t, nl.rules);
}

EigenSystem solve_gate5(const Netlist& nl, const HierarchyPlan& plan) {
  return run_hierarchy(transformed(nl, gate5_transform()), plan);
}

EigenSystem solve_readout3(const Netlist& nl, const HierarchyPlan& plan) {
  return run_hierarchy(transformed(nl, readout3_transform()), plan);
}

}  // namespace armsim::presets
