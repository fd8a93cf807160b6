#include "armsim/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace armsim {

namespace {

struct LabeledOverlap {
  double weight;
  int product;  // product-basis index
  int state;    // eigenindex
};

// Squared overlap of eigenvector column k with product basis vector p.
template <typename MatT>
double overlap2(const MatT& vectors, int p, int k) {
  return std::norm(Cplx(vectors(p, k)));
}


template <typename MatT>
void assign_labels(EigenSystem& es, const std::vector<std::pair<Label, int>>& products,
                   const Vec& bare_energies, const MatT& vectors, const ComposeOptions& opts) {
  const int keep = static_cast<int>(vectors.cols());
  std::vector<LabeledOverlap> entries;
  entries.reserve(products.size() * 4);
  for (std::size_t i = 0; i < products.size(); ++i) {
    int p = products[i].second;
    for (int k = 0; k < keep; ++k) {
      double w = overlap2(vectors, p, k);
      if (w >= opts.min_overlap) entries.push_back({w, static_cast<int>(i), k});
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const LabeledOverlap& x, const LabeledOverlap& y) { return x.weight > y.weight; });

  std::vector<int> state_taken(keep, -1);     // eigenindex -> product list index
  std::vector<int> label_state(products.size(), -1);
  std::vector<double> label_weight(products.size(), 0.0);
  for (const auto& e : entries) {
    if (state_taken[e.state] >= 0 || label_state[e.product] >= 0) continue;
    state_taken[e.state] = e.product;
    label_state[e.product] = e.state;
    label_weight[e.product] = e.weight;
  }

  // Adiabatic-order correction: when two strongly mixed product labels end up
  // assigned against their bare energy order (a near-50/50 split makes the
  // raw overlap ranking arbitrary), swap them so level repulsion preserves
  // the bare ordering.
  std::vector<int> assigned;
  for (std::size_t i = 0; i < products.size(); ++i)
    if (label_state[i] >= 0) assigned.push_back(static_cast<int>(i));
  for (int pass = 0; pass < 4; ++pass) {
    bool changed = false;
    for (std::size_t a = 0; a < assigned.size(); ++a) {
      for (std::size_t b = a + 1; b < assigned.size(); ++b) {
        int i = assigned[a], j = assigned[b];
        int si = label_state[i], sj = label_state[j];
        double bare_i = bare_energies[products[i].second];
        double bare_j = bare_energies[products[j].second];
        if ((bare_i - bare_j) * (es.energies[si] - es.energies[sj]) >= 0) continue;
        if (overlap2(vectors, products[i].second, sj) < 0.2 ||
            overlap2(vectors, products[j].second, si) < 0.2)
          continue;
        std::swap(label_state[i], label_state[j]);
        label_weight[i] = overlap2(vectors, products[i].second, label_state[i]);
        label_weight[j] = overlap2(vectors, products[j].second, label_state[j]);
        changed = true;
      }
    }
    if (!changed) break;
  }

  for (std::size_t i = 0; i < products.size(); ++i)
    if (label_state[i] >= 0) es.labels[products[i].first] = label_state[i];

  // Hybridized pairs: two labels whose best overlaps sit around 0.5 on two
  // eigenvectors that share their weight (the readout |110>/|101> situation).
  std::set<int> used;
  for (std::size_t i = 0; i < products.size(); ++i) {
    if (label_state[i] < 0 || label_weight[i] >= opts.hybrid_overlap) continue;
    if (used.count(static_cast<int>(i))) continue;
    for (std::size_t j = i + 1; j < products.size(); ++j) {
      if (label_state[j] < 0 || label_weight[j] >= opts.hybrid_overlap) continue;
      if (used.count(static_cast<int>(j))) continue;
      int ka = label_state[i], kb = label_state[j];
      int pa = products[i].second, pb = products[j].second;
      if (std::abs(es.energies[ka] - es.energies[kb]) > opts.hybrid_max_split_ghz) continue;
      double mass_a = overlap2(vectors, pa, ka) + overlap2(vectors, pa, kb);
      double mass_b = overlap2(vectors, pb, ka) + overlap2(vectors, pb, kb);
      if (mass_a < 0.8 || mass_b < 0.8) continue;
      EigenSystem::HybridPair hp;
      hp.a = products[i].first;
      hp.b = products[j].first;
      // The same-sign (even) superposition is the upshifted member for a
      // positive charge-charge coupling; energies are ascending in k.
      hp.even_state = std::max(ka, kb);
      hp.odd_state = std::min(ka, kb);
      es.hybrids.push_back(hp);
      used.insert(static_cast<int>(i));
      used.insert(static_cast<int>(j));
      break;
    }
  }
}

}  // namespace

EigenSystem compose(const EigenSystem& a, const EigenSystem& b,
                    const std::vector<CouplingTerm>& coupling, int keep,
                    const ComposeOptions& opts) {
  const int na = a.dim(), nb = b.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(na) * nb;
  if (keep <= 0 || keep > n) keep = static_cast<int>(n);

  // H = Ea (x) I + I (x) Eb + couplings, assembled in HermOp form.
  Vec diag(n);
  for (int ia = 0; ia < na; ++ia)
    for (int ib = 0; ib < nb; ++ib) diag[static_cast<Eigen::Index>(ia) * nb + ib] =
        a.energies[ia] + b.energies[ib];

  Mat h_re = diag.asDiagonal();
  Mat h_im;
  for (const auto& term : coupling) {
    const HermOp& oa = a.op(term.op_a);
    const HermOp& ob = b.op(term.op_b);
    // (re_a + i im_a) (x) (re_b + i im_b)
    if (oa.has_re() && ob.has_re()) h_re += term.g_ghz * kron(oa.re(), ob.re());
    if (oa.has_im() && ob.has_im()) h_re -= term.g_ghz * kron(oa.im(), ob.im());
    if (oa.has_re() && ob.has_im()) {
      if (h_im.size() == 0) h_im = Mat::Zero(n, n);
      h_im += term.g_ghz * kron(oa.re(), ob.im());
    }
    if (oa.has_im() && ob.has_re()) {
      if (h_im.size() == 0) h_im = Mat::Zero(n, n);
      h_im += term.g_ghz * kron(oa.im(), ob.re());
    }
  }

  EigenSystem es;
  es.modes = a.modes;
  es.modes.insert(es.modes.end(), b.modes.begin(), b.modes.end());

  // Product labels to track, capped by total excitation.
  std::vector<std::pair<Label, int>> products;
  for (const auto& [la, ia] : a.labels) {
    int exc_a = std::accumulate(la.n.begin(), la.n.end(), 0);
    for (const auto& [lb, ib] : b.labels) {
      int exc = exc_a + std::accumulate(lb.n.begin(), lb.n.end(), 0);
      if (exc > opts.max_label_excitation) continue;
      products.emplace_back(concat_labels(la, lb), ia * nb + ib);
    }
  }

  auto lift_ops = [&](auto&& rotate_a, auto&& rotate_b) {
    for (const auto& [name, op] : a.ops) es.ops[name] = rotate_a(op);
    for (const auto& [name, op] : b.ops) es.ops[name] = rotate_b(op);
  };

  if (h_im.size() == 0) {
    EighReal sol = eigh(h_re, keep);
    fix_eigenvector_gauge(sol.vectors);
    es.energies = sol.values.array() - sol.values[0];
    const Mat& v = sol.vectors;
    lift_ops(
        [&](const HermOp& op) {
          HermOp out;
          if (op.has_re()) out.add_scaled(HermOp::RealSym(rotate_kron_left(op.re(), v, na, nb)), 1.0);
          if (op.has_im())
            out.add_scaled(HermOp::ImagAntisym(rotate_kron_left(op.im(), v, na, nb)), 1.0);
          return out;
        },
        [&](const HermOp& op) {
          HermOp out;
          if (op.has_re())
            out.add_scaled(HermOp::RealSym(rotate_kron_right(op.re(), v, na, nb)), 1.0);
          if (op.has_im())
            out.add_scaled(HermOp::ImagAntisym(rotate_kron_right(op.im(), v, na, nb)), 1.0);
          return out;
        });
    assign_labels(es, products, diag, v, opts);
  } else {
    CMat h = h_re.cast<Cplx>();
    h.imag() += h_im;
    EighCplx sol = eigh(h, keep);
    fix_eigenvector_gauge(sol.vectors);
    es.energies = sol.values.array() - sol.values[0];
    const CMat& v = sol.vectors;
    auto rotate = [&](const HermOp& op, bool left) {
      CMat m = CMat::Zero(keep, keep);
      if (op.has_re())
        m += left ? rotate_kron_left(op.re(), v, na, nb) : rotate_kron_right(op.re(), v, na, nb);
      if (op.has_im())
        m += Cplx(0, 1) * (left ? rotate_kron_left(op.im(), v, na, nb)
                                : rotate_kron_right(op.im(), v, na, nb));
      return HermOp::FromComplex(m);
    };
    lift_ops([&](const HermOp& op) { return rotate(op, true); },
             [&](const HermOp& op) { return rotate(op, false); });
    assign_labels(es, products, diag, v, opts);
  }

  if (!es.labels.count(Label{std::vector<int>(es.modes.size(), 0)}))
    throw LinalgError("compose: the all-ground product label was not assigned");
  return es;
}

void HierarchyPlan::validate(int n_modes) const {
  std::set<std::vector<int>> built;
  for (int m = 0; m < n_modes; ++m) built.insert({m});
  for (const auto& step : steps) {
    if (!built.count(step.left_modes) || !built.count(step.right_modes))
      throw LinalgError("hierarchy plan step references a subsystem that was not built");
    built.erase(step.left_modes);
    built.erase(step.right_modes);
    std::vector<int> merged = step.left_modes;
    merged.insert(merged.end(), step.right_modes.begin(), step.right_modes.end());
    built.insert(merged);
  }
  if (built.size() != 1)
    throw LinalgError("hierarchy plan does not merge all modes into one subsystem");
  const auto& root = *built.begin();
  std::set<int> covered(root.begin(), root.end());
  if (static_cast<int>(covered.size()) != n_modes)
    throw LinalgError("hierarchy plan does not cover every mode exactly once");
}

EigenSystem run_hierarchy(const TransformedCircuit& circuit, const HierarchyPlan& plan) {
  const int n = static_cast<int>(circuit.coordinates.size());
  plan.validate(n);

  std::map<std::vector<int>, EigenSystem> built;
  for (int m = 0; m < n; ++m) {
    const Coordinate& coord = circuit.coordinates[m];
    double ec = circuit.ec_prime_ghz(m, m);
    int cutoff = 0;
    if (auto it = plan.mode_cutoff.find(m); it != plan.mode_cutoff.end()) cutoff = it->second;
    ModeBasis basis = default_basis(coord, ec, cutoff);
    BareMode mode = build_bare_mode(coord, ec, basis);
    int keep = 12;
    if (auto it = plan.mode_keep.find(m); it != plan.mode_keep.end()) keep = it->second;
    built[{m}] = diagonalize_truncate(mode, m, keep);
  }

  for (const auto& step : plan.steps) {
    EigenSystem& left = built.at(step.left_modes);
    EigenSystem& right = built.at(step.right_modes);
    std::vector<CouplingTerm> coupling;
    for (int i : step.left_modes)
      for (int j : step.right_modes) {
        double g = 8.0 * circuit.ec_prime_ghz(i, j);
        if (std::abs(g) < 1e-14) continue;
        coupling.push_back({g, "n" + std::to_string(i), "n" + std::to_string(j)});
      }
    EigenSystem merged = compose(left, right, coupling, step.keep, plan.compose_opts);
    built.erase(step.left_modes);
    built.erase(step.right_modes);
    std::vector<int> key = merged.modes;
    built[key] = std::move(merged);
  }
  return std::move(built.begin()->second);
}

namespace {

Label basis_label(const EigenSystem& es, const std::vector<std::pair<int, int>>& excitations) {
  Label l;
  l.n.assign(es.modes.size(), 0);
  for (auto [mode, exc] : excitations) {
    auto it = std::find(es.modes.begin(), es.modes.end(), mode);
    if (it == es.modes.end()) throw LinalgError("mode id not present in eigensystem");
    l.n[std::distance(es.modes.begin(), it)] = exc;
  }
  return l;
}

}  // namespace

double cross_kerr_ghz(const EigenSystem& es, int mode_a, int mode_b) {
  Label l00 = basis_label(es, {});
  Label l10 = basis_label(es, {{mode_a, 1}});
  Label l01 = basis_label(es, {{mode_b, 1}});
  Label l11 = basis_label(es, {{mode_a, 1}, {mode_b, 1}});
  return es.energy_or_hybrid_mean(l11) - es.energy_or_hybrid_mean(l10) -
         es.energy_or_hybrid_mean(l01) + es.energy_or_hybrid_mean(l00);
}

double static_zz_khz(const EigenSystem& es) {
  if (es.modes.size() != 5) throw LinalgError("static ZZ expects the five-mode gate circuit");
  int first = es.modes.front(), last = es.modes.back();
  Label l00 = basis_label(es, {});
  Label l10 = basis_label(es, {{first, 1}});
  Label l01 = basis_label(es, {{last, 1}});
  Label l11 = basis_label(es, {{first, 1}, {last, 1}});
  double zz_ghz = es.energy(l11) - es.energy(l10) - es.energy(l01) + es.energy(l00);
  return zz_ghz * 1e6;
}

HermOp node_charge_op(const EigenSystem& es, const TransformedCircuit& circuit, int node) {
  HermOp out = HermOp::Zero(es.dim());
  const auto& w = circuit.transform.w;
  for (int j = 0; j < w.rows(); ++j) {
    int coeff = w(j, node);
    if (coeff == 0) continue;
    out.add_scaled(es.op("n" + std::to_string(j)), static_cast<double>(coeff));
  }
  return out;
}

double isolation_ratio(const EigenSystem& es, const HermOp& arm_charge, const Label& ground,
                       const Label& arm_excited, const Label& data_excited) {
  int s00 = es.state(ground);
  int s01 = es.state(arm_excited);
  int s10 = es.state(data_excited);
  auto element = [&](int i, int j) {
    Cplx v(0, 0);
    if (arm_charge.has_re()) v += arm_charge.re()(i, j);
    if (arm_charge.has_im()) v += Cplx(0, 1) * arm_charge.im()(i, j);
    return std::abs(v);
  };
  double num = element(s00, s01);
  double den = element(s00, s10);
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

Detunings detunings(const EigenSystem& es) {
  if (es.modes.size() != 3) throw LinalgError("detunings expect the three-mode readout circuit");
  Detunings d;
  Label ground = basis_label(es, {});
  Label res1 = basis_label(es, {{es.modes[2], 1}});
  Label q1 = basis_label(es, {{es.modes[0], 1}});
  d.drive_ghz = es.energy(res1) - es.energy(ground);
  // The |1>|psi_e>, |1>|psi_o> pair is the hybrid of |110> and |101>.
  Label l110 = basis_label(es, {{es.modes[0], 1}, {es.modes[1], 1}});
  Label l101 = basis_label(es, {{es.modes[0], 1}, {es.modes[2], 1}});
  for (const auto& h : es.hybrids) {
    if ((h.a == l110 && h.b == l101) || (h.a == l101 && h.b == l110)) {
      double e_even = es.energies[h.even_state];
      double e_odd = es.energies[h.odd_state];
      double e100 = es.energy(q1);
      d.delta_even_ghz = d.drive_ghz - e_even + e100;
      d.delta_odd_ghz = d.drive_ghz - e_odd + e100;
      return d;
    }
  }
  throw LinalgError("readout eigensystem has no |110>/|101> hybridized pair");
}

}  // namespace armsim
