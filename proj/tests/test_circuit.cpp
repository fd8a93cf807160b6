#include <doctest.h>

#include <random>

#include "armsim/circuit.hpp"
#include "armsim/netlist.hpp"
#include "armsim/presets.hpp"
#include "armsim/units.hpp"

using namespace armsim;

TEST_CASE("single grounded node gives a 1x1 capacitance matrix") {
  CircuitSpec spec;
  spec.nodes = {"a"};
  spec.ground_caps_fF = {{0, 20.0}};
  Mat c = assemble_capacitance(spec, ParasiticRules::none());
  REQUIRE(c.rows() == 1);
  CHECK(c(0, 0) == doctest::Approx(20.0));
}

TEST_CASE("junction fabrication rule: 38.5 GHz -> 77.5 nA -> 5.19 fF") {
  CHECK(units::junction_critical_current_uA(38.5) == doctest::Approx(0.0775).epsilon(1e-3));
  CHECK(units::junction_capacitance_fF(38.5) == doctest::Approx(5.19).epsilon(2e-3));
}

TEST_CASE("charging energy of 20.4 fF is 0.949 GHz") {
  CHECK(units::charging_energy_ghz(20.4) == doctest::Approx(0.9495).epsilon(1e-3));
}

TEST_CASE("diagonal capacitance matrix inverts to diagonal charging matrix") {
  CircuitSpec spec;
  spec.nodes = {"a", "b"};
  spec.ground_caps_fF = {{0, 10.0}, {1, 40.0}};
  Mat c = assemble_capacitance(spec, ParasiticRules::none());
  ChargingMatrix cm = charging_energies(spec, c);
  CHECK(cm.ec_ghz(0, 1) == doctest::Approx(0.0));
  CHECK(cm.ec_ghz(0, 0) == doctest::Approx(units::charging_energy_ghz(10.0)));
  CHECK(cm.ec_ghz(1, 1) == doctest::Approx(units::charging_energy_ghz(40.0)));
}

TEST_CASE("isolated node is rejected with a diagnostic naming it") {
  CircuitSpec spec;
  spec.nodes = {"a", "island"};
  spec.ground_caps_fF = {{0, 10.0}};
  Mat c = assemble_capacitance(spec, ParasiticRules::none());
  try {
    charging_energies(spec, c);
    FAIL("expected CircuitError");
  } catch (const CircuitError& e) {
    CHECK(std::string(e.what()).find("island") != std::string::npos);
  }
}

TEST_CASE("capacitance matrix is symmetric, diagonally dominant, positive definite") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> cap(1.0, 50.0);
  for (int trial = 0; trial < 20; ++trial) {
    CircuitSpec spec;
    int n = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) spec.nodes.push_back("n" + std::to_string(i));
    for (int i = 0; i < n; ++i) spec.ground_caps_fF[i] = cap(rng);
    for (int i = 0; i + 1 < n; ++i)
      if (rng() % 2) spec.branch_caps_fF[{i, i + 1}] = cap(rng);
    for (int i = 0; i < n; ++i) spec.chain_order.push_back(i);
    Mat c = assemble_capacitance(spec, ParasiticRules::gate5());
    CHECK((c - c.transpose()).norm() == 0.0);
    for (int i = 0; i < n; ++i) {
      double offsum = c.row(i).cwiseAbs().sum() - std::abs(c(i, i));
      CHECK(c(i, i) >= offsum - 1e-12);
    }
    Vec ev = eigh_values(c);
    CHECK(ev[0] > 0.0);
    ChargingMatrix cm = charging_energies(spec, c);
    Vec ecev = eigh_values(cm.ec_ghz);
    CHECK(ecev[0] > 0.0);
    CHECK((cm.ec_ghz - cm.ec_ghz.transpose()).norm() < 1e-15);
  }
}

TEST_CASE("identity transform leaves charging matrix and terms unchanged") {
  CircuitSpec spec;
  spec.nodes = {"a", "b"};
  spec.ground_caps_fF = {{0, 30.0}, {1, 50.0}};
  spec.branch_caps_fF = {{{0, 1}, 4.0}};
  spec.junctions = {{{0, -1}, 12.0, 0.0}, {{1, -1}, 20.0, 0.0}};
  TransformedCircuit tc =
      transform_variables(spec, TransformSpec::identity(2), ParasiticRules::none());
  CHECK((tc.ec_prime_ghz - tc.ec_node_ghz).norm() < 1e-15);
  CHECK(tc.coordinates[0].cosines.size() == 1);
  CHECK(tc.coordinates[1].cosines.size() == 1);
}

TEST_CASE("a branch spanning two coordinates is rejected") {
  Netlist nl = presets::readout3();
  CHECK_THROWS_AS(transform_variables(nl.spec, TransformSpec::identity(3), nl.rules),
                  CircuitError);
}

TEST_CASE("non-unimodular transform is rejected") {
  Netlist nl = presets::readout3();
  TransformSpec t;
  t.w.resize(3, 3);
  t.w << 2, 0, 0, 0, 1, 0, 0, 0, 1;
  CHECK_THROWS_AS(transform_variables(nl.spec, t, nl.rules), CircuitError);
}

TEST_CASE("gate transform isolates coordinates and classifies them") {
  Netlist nl = presets::gate5();
  TransformedCircuit tc = presets::transformed(nl, presets::gate5_transform());
  CHECK(tc.coordinates[0].kind == CoordinateKind::Extended);
  CHECK(tc.coordinates[1].kind == CoordinateKind::Periodic);
  CHECK(tc.coordinates[2].kind == CoordinateKind::Periodic);
  CHECK(tc.coordinates[3].kind == CoordinateKind::Periodic);
  CHECK(tc.coordinates[4].kind == CoordinateKind::Extended);
  CHECK(tc.coordinates[0].cosines.size() == 1);
  CHECK(tc.coordinates[0].quadratics.size() == 1);
  CHECK(tc.coordinates[0].cosines[0].ej_ghz == doctest::Approx(38.5));
  // E_C' = W E_C W^T
  Mat w = presets::gate5_transform().w.cast<double>();
  CHECK((tc.ec_prime_ghz - w * tc.ec_node_ghz * w.transpose()).norm() < 1e-12);
}

TEST_CASE("readout transform classification") {
  Netlist nl = presets::readout3();
  TransformedCircuit tc = presets::transformed(nl, presets::readout3_transform());
  CHECK(tc.coordinates[0].kind == CoordinateKind::Extended);
  CHECK(tc.coordinates[1].kind == CoordinateKind::Periodic);
  CHECK(tc.coordinates[2].kind == CoordinateKind::Extended);
}

TEST_CASE("commutation is preserved exactly for integer W") {
  Eigen::MatrixXi w = presets::gate5_transform().w;
  Mat wt = w.cast<double>().transpose();
  Mat wti = wt.inverse();
  // [phi'_i, n'_j] = i (W W^-1)_ij = i delta_ij
  CHECK((wt * wti - Mat::Identity(5, 5)).norm() < 1e-14);
}

TEST_CASE("offset charges transform with (W^T)^-1") {
  Netlist nl = presets::gate5();
  nl.spec.offset_charges[1] = 0.3;  // arm node of qubit 1
  Vec ng = transformed_offset_charges(nl.spec, presets::gate5_transform());
  CHECK(ng[1] == doctest::Approx(0.3));
  CHECK(std::abs(ng[0]) < 1e-14);
  CHECK(std::abs(ng[2]) < 1e-14);
}

TEST_CASE("netlist round trip and validation") {
  Netlist nl = presets::gate5();
  std::string text = netlist_to_json(nl);
  Netlist back = parse_netlist(text);
  CHECK(back.spec.nodes == nl.spec.nodes);
  CHECK(back.spec.junctions.size() == nl.spec.junctions.size());
  CHECK(back.spec.ground_caps_fF == nl.spec.ground_caps_fF);
  CHECK(back.parasitic_profile == "gate5");
}

TEST_CASE("netlist parse errors name the problem") {
  CHECK_THROWS_AS(parse_netlist("{\"nodes\": [\"a\"], \"junctions\": "
                                "[{\"node\": \"a\", \"ej_ghz\": -1.0}]}"),
                  CircuitError);
  CHECK_THROWS_AS(parse_netlist("{\"nodes\": [\"a\"], \"ground_caps\": {\"zz\": 5.0}}"),
                  CircuitError);
}
