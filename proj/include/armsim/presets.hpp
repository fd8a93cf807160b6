#pragma once

#include "armsim/hierarchy.hpp"
#include "armsim/netlist.hpp"

namespace armsim::presets {

// Five-node two-qubit gate chain: data / arm / transmon coupler / arm / data.
// Flux-biased at half a quantum on both data loops.
Netlist gate5();

// Three-node readout chain: data / arm / resonator.
Netlist readout3();

// Variable transforms isolating the periodic coordinates.
TransformSpec gate5_transform();
TransformSpec readout3_transform();

// Merge plans. The gate plan follows (data+arm), (data+arm), (+transmon),
// (final); keeps default to 12 / 24 / 96 / 576 and scale by `scale` rounded
// up, letting sweeps and the Monte Carlo loop run lighter plans.
HierarchyPlan gate5_plan(double scale = 1.0);
HierarchyPlan readout3_plan();

// Convenience: transform + hierarchy for a (possibly modified) netlist.
TransformedCircuit transformed(const Netlist& nl, const TransformSpec& t);
EigenSystem solve_gate5(const Netlist& nl, const HierarchyPlan& plan);
EigenSystem solve_readout3(const Netlist& nl, const HierarchyPlan& plan);

}  // namespace armsim::presets
