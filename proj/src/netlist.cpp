#include "armsim/netlist.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace armsim {

using nlohmann::json;

namespace {

Branch branch_from(const json& item, const CircuitSpec& spec, const std::string& what) {
  Branch br;
  if (item.contains("node")) {
    br.a = spec.node_id(item.at("node").get<std::string>());
    br.b = -1;
  } else if (item.contains("nodes")) {
    const auto& pair = item.at("nodes");
    if (!pair.is_array() || pair.size() != 2)
      throw CircuitError(what + ": \"nodes\" must be a two-element array");
    br.a = spec.node_id(pair[0].get<std::string>());
    br.b = spec.node_id(pair[1].get<std::string>());
  } else {
    throw CircuitError(what + ": needs \"node\" or \"nodes\"");
  }
  return br;
}

ParasiticRules rules_from(const std::string& profile) {
  if (profile == "gate5") return ParasiticRules::gate5();
  if (profile == "readout3") return ParasiticRules::readout3();
  if (profile == "none" || profile.empty()) return ParasiticRules::none();
  throw CircuitError("unknown parasitic_profile '" + profile +
                     "' (expected gate5, readout3 or none)");
}

}  // namespace

Netlist parse_netlist(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CircuitError(origin + ": JSON parse error: " + e.what());
  }
  Netlist nl;
  CircuitSpec& spec = nl.spec;
  if (!j.contains("nodes")) throw CircuitError(origin + ": missing \"nodes\"");
  for (const auto& name : j.at("nodes")) spec.nodes.push_back(name.get<std::string>());

  if (j.contains("ground_caps"))
    for (auto& [name, val] : j.at("ground_caps").items())
      spec.ground_caps_fF[spec.node_id(name)] = val.get<double>();

  if (j.contains("branch_caps"))
    for (const auto& item : j.at("branch_caps")) {
      Branch br = branch_from(item, spec, "branch_caps entry");
      if (br.to_ground()) throw CircuitError("branch_caps entry must join two nodes");
      auto key = std::minmax(br.a, br.b);
      spec.branch_caps_fF[{key.first, key.second}] = item.at("c_fF").get<double>();
    }

  if (j.contains("junctions"))
    for (const auto& item : j.at("junctions")) {
      Junction junc;
      junc.branch = branch_from(item, spec, "junction");
      junc.ej_ghz = item.at("ej_ghz").get<double>();
      junc.external_flux_rad = item.value("external_flux_rad", 0.0);
      spec.junctions.push_back(junc);
    }

  if (j.contains("inductors"))
    for (const auto& item : j.at("inductors")) {
      Inductor ind;
      ind.branch = branch_from(item, spec, "inductor");
      ind.el_ghz = item.at("el_ghz").get<double>();
      ind.external_flux_rad = item.value("external_flux_rad", 0.0);
      spec.inductors.push_back(ind);
    }

  if (j.contains("offset_charges"))
    for (auto& [name, val] : j.at("offset_charges").items())
      spec.offset_charges[spec.node_id(name)] = val.get<double>();

  if (j.contains("chain_order"))
    for (const auto& name : j.at("chain_order"))
      spec.chain_order.push_back(spec.node_id(name.get<std::string>()));

  nl.parasitic_profile = j.value("parasitic_profile", std::string("none"));
  nl.rules = rules_from(nl.parasitic_profile);
  spec.validate();
  return nl;
}

Netlist load_netlist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CircuitError("cannot open netlist file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_netlist(ss.str(), path);
}

std::string netlist_to_json(const Netlist& nl) {
  const CircuitSpec& spec = nl.spec;
  json j;
  j["nodes"] = spec.nodes;
  json gc = json::object();
  for (const auto& [node, c] : spec.ground_caps_fF) gc[spec.nodes[node]] = c;
  j["ground_caps"] = gc;
  j["branch_caps"] = json::array();
  for (const auto& [pair, c] : spec.branch_caps_fF)
    j["branch_caps"].push_back(
        {{"nodes", {spec.nodes[pair.first], spec.nodes[pair.second]}}, {"c_fF", c}});
  j["junctions"] = json::array();
  for (const auto& junc : spec.junctions) {
    json item;
    if (junc.branch.to_ground())
      item["node"] = spec.nodes[junc.branch.a];
    else
      item["nodes"] = {spec.nodes[junc.branch.a], spec.nodes[junc.branch.b]};
    item["ej_ghz"] = junc.ej_ghz;
    if (junc.external_flux_rad != 0.0) item["external_flux_rad"] = junc.external_flux_rad;
    j["junctions"].push_back(item);
  }
  j["inductors"] = json::array();
  for (const auto& ind : spec.inductors) {
    json item;
    if (ind.branch.to_ground())
      item["node"] = spec.nodes[ind.branch.a];
    else
      item["nodes"] = {spec.nodes[ind.branch.a], spec.nodes[ind.branch.b]};
    item["el_ghz"] = ind.el_ghz;
    if (ind.external_flux_rad != 0.0) item["external_flux_rad"] = ind.external_flux_rad;
    j["inductors"].push_back(item);
  }
  json oc = json::object();
  for (const auto& [node, g] : spec.offset_charges) oc[spec.nodes[node]] = g;
  j["offset_charges"] = oc;
  json chain = json::array();
  for (int id : spec.chain_order) chain.push_back(spec.nodes[id]);
  j["chain_order"] = chain;
  j["parasitic_profile"] = nl.parasitic_profile;
  return j.dump(2);
}

std::vector<std::string> validate_netlist_file(const std::string& path) {
  std::vector<std::string> problems;
  Netlist nl;
  try {
    nl = load_netlist(path);
  } catch (const std::exception& e) {
    problems.emplace_back(e.what());
    return problems;
  }
  const CircuitSpec& spec = nl.spec;
  // Physics lint beyond schema validation.
  for (int i = 0; i < spec.node_count(); ++i) {
    bool touched = spec.ground_caps_fF.count(i) > 0;
    for (const auto& [pair, c] : spec.branch_caps_fF)
      touched |= (pair.first == i || pair.second == i);
    for (const auto& junc : spec.junctions)
      touched |= (junc.branch.a == i || junc.branch.b == i);
    for (const auto& ind : spec.inductors)
      touched |= (ind.branch.a == i || ind.branch.b == i);
    if (!touched) problems.push_back("node '" + spec.nodes[i] + "' is connected to nothing");
  }
  for (const auto& junc : spec.junctions) {
    if (junc.external_flux_rad != 0.0) {
      problems.push_back("junction carries external flux; the irrotational convention puts "
                         "flux on the inductive branch of each loop");
    }
  }
  try {
    Mat c = assemble_capacitance(spec, nl.rules);
    charging_energies(spec, c);
  } catch (const std::exception& e) {
    problems.emplace_back(e.what());
  }
  return problems;
}

}  // namespace armsim
