#include "armsim/eigensystem.hpp"

#include <algorithm>
#include <cmath>

namespace armsim {

std::string Label::str() const {
  std::string s = "|";
  bool wide = std::any_of(n.begin(), n.end(), [](int v) { return v > 9; });
  for (std::size_t i = 0; i < n.size(); ++i) {
    s += std::to_string(n[i]);
    if (wide && i + 1 < n.size()) s += ",";
  }
  return s + ">";
}

Label concat_labels(const Label& a, const Label& b) {
  Label out;
  out.n = a.n;
  out.n.insert(out.n.end(), b.n.begin(), b.n.end());
  return out;
}

int EigenSystem::state(const Label& l) const {
  auto it = labels.find(l);
  if (it == labels.end())
    throw LinalgError("state label " + l.str() + " was not assigned in this eigensystem");
  return it->second;
}

const HermOp& EigenSystem::op(const std::string& name) const {
  auto it = ops.find(name);
  if (it == ops.end()) throw LinalgError("eigensystem has no operator '" + name + "'");
  return it->second;
}

double EigenSystem::energy_or_hybrid_mean(const Label& l) const {
  for (const auto& h : hybrids) {
    if (h.a == l || h.b == l)
      return 0.5 * (energies[h.even_state] + energies[h.odd_state]);
  }
  return energy(l);
}

EigenSystem diagonalize_truncate(const BareMode& mode, int mode_id, int keep) {
  std::map<std::string, HermOp> ops;
  const std::string id = std::to_string(mode_id);
  ops["n" + id] = mode.n_op;
  if (mode.phi_op.dim() > 0) ops["phi" + id] = mode.phi_op;
  if (mode.sin_half_phi.dim() > 0) ops["sinhalf" + id] = mode.sin_half_phi;
  if (mode.num_op.dim() > 0) ops["num" + id] = mode.num_op;
  EigenSystem es = diagonalize_truncate(mode.h_ghz, ops, keep);
  es.modes = {mode_id};
  for (int k = 0; k < es.dim(); ++k) es.labels[Label{{k}}] = k;
  return es;
}

EigenSystem diagonalize_truncate(const HermOp& h, const std::map<std::string, HermOp>& ops,
                                 int keep) {
  const int n = h.dim();
  if (keep <= 0 || keep > n) keep = n;
  EigenSystem es;
  if (h.is_real()) {
    EighReal sol = eigh(h.re(), keep);
    fix_eigenvector_gauge(sol.vectors);
    es.energies = sol.values.array() - sol.values[0];
    for (const auto& [name, op] : ops) es.ops[name] = op.rotated(sol.vectors);
  } else {
    EighCplx sol = eigh(h.to_complex(), keep);
    fix_eigenvector_gauge(sol.vectors);
    es.energies = sol.values.array() - sol.values[0];
    for (const auto& [name, op] : ops) es.ops[name] = op.rotated(sol.vectors);
  }
  return es;
}

ConvergenceReport convergence_check(const Coordinate& coord, double ec_diag_ghz, int keep,
                                    const std::vector<int>& cutoffs, double threshold) {
  if (cutoffs.size() < 2)
    throw QuantizationError("convergence_check needs a ladder of at least 2 cutoffs");
  ConvergenceReport report;
  report.cutoffs = cutoffs;
  report.threshold = threshold;
  Vec prev;
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    ModeBasis basis = default_basis(coord, ec_diag_ghz, cutoffs[i]);
    BareMode mode = build_bare_mode(coord, ec_diag_ghz, basis);
    EigenSystem es = diagonalize_truncate(mode, coord.index, keep);
    Vec now = es.energies;
    if (i > 0) {
      int m = std::min<int>(static_cast<int>(prev.size()), static_cast<int>(now.size()));
      double drift = 0.0;
      for (int k = 1; k < m; ++k)
        drift = std::max(drift, std::abs(now[k] - prev[k]) / std::max(1e-12, std::abs(now[k])));
      report.max_rel_drift.push_back(drift);
    }
    prev = now;
  }
  report.converged = report.max_rel_drift.back() <= threshold;
  return report;
}

}  // namespace armsim
