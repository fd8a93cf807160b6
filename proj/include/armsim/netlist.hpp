#pragma once

#include <string>
#include <vector>

#include "armsim/circuit.hpp"

namespace armsim {

// Netlist file schema (JSON, units fF / GHz / radians):
// {
//   "nodes": ["1","2","3"],
//   "chain_order": ["1","2","3"],
//   "parasitic_profile": "gate5" | "readout3" | "none",
//   "ground_caps": {"1": 20.8, ...},
//   "branch_caps": [{"nodes": ["2","3"], "c_fF": 4.7}, ...],
//   "junctions":  [{"nodes": ["1","2"], "ej_ghz": 38.5, "external_flux_rad": 0.0},
//                  {"node": "2", "ej_ghz": 19.8}, ...],
//   "inductors":  [{"nodes": ["1","2"], "el_ghz": 26.2, "external_flux_rad": 3.14159...},
//                  {"node": "r", "el_ghz": 223.0}, ...],
//   "offset_charges": {"2": 0.0}
// }
struct Netlist {
  CircuitSpec spec;
  ParasiticRules rules;
  std::string parasitic_profile;
};

Netlist load_netlist(const std::string& path);
Netlist parse_netlist(const std::string& json_text, const std::string& origin = "<string>");
std::string netlist_to_json(const Netlist& nl);

// Schema and physics lint; returns human-readable problems (empty = clean).
std::vector<std::string> validate_netlist_file(const std::string& path);

}  // namespace armsim
