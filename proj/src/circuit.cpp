#include "armsim/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "armsim/units.hpp"

namespace armsim {

int CircuitSpec::node_id(const std::string& name) const {
  for (int i = 0; i < node_count(); ++i)
    if (nodes[i] == name) return i;
  throw CircuitError("unknown node '" + name + "'");
}

namespace {

void check_branch(const CircuitSpec& spec, const Branch& br, const char* kind) {
  const int n = spec.node_count();
  if (br.a < 0 || br.a >= n)
    throw CircuitError(std::string(kind) + " references undeclared node id " +
                       std::to_string(br.a));
  if (!br.to_ground() && (br.b >= n || br.b == br.a))
    throw CircuitError(std::string(kind) + " has invalid branch (" + std::to_string(br.a) +
                       "," + std::to_string(br.b) + ")");
}

std::pair<int, int> ordered(const Branch& br) {
  return {std::min(br.a, br.b), std::max(br.a, br.b)};
}

}  // namespace

void CircuitSpec::validate() const {
  if (nodes.empty()) throw CircuitError("circuit has no nodes");
  for (const auto& [node, c] : ground_caps_fF) {
    if (node < 0 || node >= node_count())
      throw CircuitError("ground capacitor on undeclared node id " + std::to_string(node));
    if (c <= 0.0)
      throw CircuitError("ground capacitance on node '" + nodes[node] + "' must be > 0");
  }
  for (const auto& [pair, c] : branch_caps_fF) {
    Branch br{pair.first, pair.second};
    check_branch(*this, br, "branch capacitor");
    if (c <= 0.0) throw CircuitError("branch capacitance must be > 0");
  }
  std::set<std::pair<int, int>> seen_j, seen_l;
  for (const auto& j : junctions) {
    check_branch(*this, j.branch, "junction");
    if (j.ej_ghz <= 0.0) throw CircuitError("junction E_J must be > 0");
    if (!seen_j.insert(ordered(j.branch)).second)
      throw CircuitError("duplicate junction branch");
  }
  for (const auto& l : inductors) {
    check_branch(*this, l.branch, "inductor");
    if (l.el_ghz <= 0.0) throw CircuitError("inductor E_L must be > 0");
    if (!seen_l.insert(ordered(l.branch)).second)
      throw CircuitError("duplicate inductor branch");
  }
  for (const auto& [node, ng] : offset_charges) {
    (void)ng;
    if (node < 0 || node >= node_count())
      throw CircuitError("offset charge on undeclared node id " + std::to_string(node));
  }
  if (!chain_order.empty()) {
    std::set<int> in_chain(chain_order.begin(), chain_order.end());
    if (in_chain.size() != chain_order.size())
      throw CircuitError("chain_order repeats a node");
    for (int id : chain_order)
      if (id < 0 || id >= node_count())
        throw CircuitError("chain_order references undeclared node id " + std::to_string(id));
  }
}

std::vector<CapacitorElement> capacitor_elements(const CircuitSpec& spec,
                                                 const ParasiticRules& rules) {
  spec.validate();
  std::vector<CapacitorElement> out;
  for (const auto& [node, c] : spec.ground_caps_fF) out.push_back({{node, -1}, c, "ground"});
  for (const auto& [pair, c] : spec.branch_caps_fF)
    out.push_back({{pair.first, pair.second}, c, "branch"});

  if (!rules.by_distance_fF.empty() && !spec.chain_order.empty()) {
    const int m = static_cast<int>(spec.chain_order.size());
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        int dist = j - i;
        if (dist > static_cast<int>(rules.by_distance_fF.size())) continue;
        int a = spec.chain_order[i], b = spec.chain_order[j];
        bool absorbed = false;
        for (const auto& p : rules.absorbed_pairs)
          absorbed |= (std::min(a, b) == std::min(p.first, p.second) &&
                       std::max(a, b) == std::max(p.first, p.second));
        if (absorbed) continue;
        out.push_back({{a, b}, rules.by_distance_fF[dist - 1], "parasitic"});
      }
    }
  }

  // Junction shunt capacitance from the fabrication rule, in parallel with
  // every branch junction; junction-array superinductors carry the same rule
  // applied to E_L (the series capacitance of an N-junction array is
  // independent of N). Ground-junction capacitance is part of the tabulated
  // shunt when the rules say so.
  if (rules.junction_caps) {
    for (const auto& j : spec.junctions) {
      if (j.branch.to_ground() && rules.shunts_include_ground_junction) continue;
      out.push_back({j.branch,
                     units::junction_capacitance_fF(j.ej_ghz, rules.jc_uA_per_um2,
                                                    rules.cs_fF_per_um2),
                     "junction"});
    }
    for (const auto& l : spec.inductors)
      if (l.junction_array)
        out.push_back({l.branch,
                       units::junction_capacitance_fF(l.el_ghz, rules.jc_uA_per_um2,
                                                      rules.cs_fF_per_um2),
                       "array"});
  }
  return out;
}

Mat assemble_capacitance(const CircuitSpec& spec, const ParasiticRules& rules) {
  const int n = spec.node_count();
  Mat c = Mat::Zero(n, n);
  for (const auto& element : capacitor_elements(spec, rules)) {
    if (element.branch.to_ground()) {
      c(element.branch.a, element.branch.a) += element.c_fF;
    } else {
      c(element.branch.a, element.branch.a) += element.c_fF;
      c(element.branch.b, element.branch.b) += element.c_fF;
      c(element.branch.a, element.branch.b) -= element.c_fF;
      c(element.branch.b, element.branch.a) -= element.c_fF;
    }
  }
  return c;
}

ChargingMatrix charging_energies(const CircuitSpec& spec, const Mat& c_fF) {
  const int n = static_cast<int>(c_fF.rows());
  for (int i = 0; i < n; ++i) {
    if (c_fF(i, i) <= 0.0)
      throw CircuitError("node '" + spec.nodes[i] +
                         "' has no capacitance; capacitance matrix is singular");
  }
  Eigen::FullPivLU<Mat> lu(c_fF);
  if (!lu.isInvertible()) {
    // Identify the most isolated node for the diagnostic.
    int worst = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      double offsum = c_fF.row(i).cwiseAbs().sum() - std::abs(c_fF(i, i));
      double slack = c_fF(i, i) - offsum;
      if (best < 0 || slack < best) best = slack, worst = i;
    }
    throw CircuitError("capacitance matrix is singular (node '" + spec.nodes[worst] +
                       "' is effectively isolated)");
  }
  ChargingMatrix out;
  out.c_fF = c_fF;
  Mat cinv = lu.inverse();
  out.ec_ghz = units::charging_energy_ghz(1.0) * 0.5 * (cinv + cinv.transpose());
  return out;
}

TransformSpec TransformSpec::identity(int n) {
  TransformSpec t;
  t.w = Eigen::MatrixXi::Identity(n, n);
  return t;
}

namespace {

// Integer determinant by fraction-free Gaussian elimination on a copy.
long long int_det(Eigen::MatrixXi m) {
  const int n = static_cast<int>(m.rows());
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> a = m.cast<long long>();
  long long det = 1, denom = 1;
  for (int k = 0; k < n; ++k) {
    int piv = -1;
    for (int i = k; i < n; ++i)
      if (a(i, k) != 0) {
        piv = i;
        break;
      }
    if (piv < 0) return 0;
    if (piv != k) {
      a.row(piv).swap(a.row(k));
      det = -det;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / denom;
      a(i, k) = 0;
    }
    denom = a(k, k);
  }
  return det * a(n - 1, n - 1) / denom;
}

}  // namespace

Vec transformed_offset_charges(const CircuitSpec& spec, const TransformSpec& t) {
  const int n = spec.node_count();
  Vec ng = Vec::Zero(n);
  for (const auto& [node, g] : spec.offset_charges) ng[node] = g;
  Mat wt = t.w.cast<double>().transpose();
  return wt.partialPivLu().solve(ng);
}

TransformedCircuit transform_variables(const CircuitSpec& spec, const TransformSpec& t,
                                       const ParasiticRules& rules) {
  spec.validate();
  const int n = spec.node_count();
  if (t.w.rows() != n || t.w.cols() != n)
    throw CircuitError("transform dimension does not match node count");
  long long det = int_det(t.w);
  if (det != 1 && det != -1)
    throw CircuitError("transform matrix is not unimodular (det = " + std::to_string(det) +
                       ")");

  TransformedCircuit out;
  out.spec = spec;
  out.rules = rules;
  out.transform = t;
  out.c_fF = assemble_capacitance(spec, rules);
  ChargingMatrix cm = charging_energies(spec, out.c_fF);
  out.ec_node_ghz = cm.ec_ghz;
  Mat wd = t.w.cast<double>();
  out.ec_prime_ghz = wd * cm.ec_ghz * wd.transpose();

  // Winv maps node phases to transformed ones: phi = W^-1 phi'. A branch with
  // node-phase difference u.phi lands on coordinate k when u.W^-1 = +-e_k.
  Mat winv = wd.inverse();
  Vec ng_prime = transformed_offset_charges(spec, t);

  out.coordinates.resize(n);
  for (int k = 0; k < n; ++k) {
    out.coordinates[k].index = k;
    out.coordinates[k].offset_charge = ng_prime[k];
  }

  auto coordinate_of = [&](const Branch& br, const char* kind) -> std::pair<int, int> {
    Eigen::RowVectorXd u = Eigen::RowVectorXd::Zero(n);
    u[br.a] = 1.0;
    if (!br.to_ground()) u[br.b] = -1.0;
    Eigen::RowVectorXd coeff = u * winv;
    int coord = -1, sign = 0;
    for (int k = 0; k < n; ++k) {
      double c = coeff[k];
      if (std::abs(c) < 1e-9) continue;
      if (coord >= 0 || std::abs(std::abs(c) - 1.0) > 1e-9)
        throw CircuitError(std::string(kind) +
                           " branch does not map onto a single transformed coordinate; "
                           "choose a different W");
      coord = k;
      sign = c > 0 ? 1 : -1;
    }
    if (coord < 0) throw CircuitError(std::string(kind) + " branch maps to no coordinate");
    return {coord, sign};
  };

  for (const auto& j : spec.junctions) {
    auto [k, s] = coordinate_of(j.branch, "junction");
    // -E_J cos(s phi' - f) = -E_J cos(phi' - s f)
    out.coordinates[k].cosines.push_back({j.ej_ghz, s * j.external_flux_rad, s});
  }
  for (const auto& l : spec.inductors) {
    auto [k, s] = coordinate_of(l.branch, "inductor");
    // (E_L/2)(s phi' + f)^2 = (E_L/2)(phi' + s f)^2
    out.coordinates[k].quadratics.push_back({l.el_ghz, s * l.external_flux_rad});
  }
  for (auto& coord : out.coordinates)
    coord.kind = coord.quadratics.empty() ? CoordinateKind::Periodic : CoordinateKind::Extended;
  return out;
}

}  // namespace armsim
