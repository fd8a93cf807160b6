#include "armsim/metrics.hpp"

#include <cmath>
#include <tuple>

#include "armsim/threading.hpp"
#include "armsim/units.hpp"

namespace armsim {

using units::two_pi;

CMat cz_unitary() {
  CMat u = CMat::Identity(4, 4);
  u(0, 0) = -1.0;
  return u;
}

CMat xhalf_unitary() {
  CMat u(2, 2);
  double c = std::cos(M_PI / 4), s = std::sin(M_PI / 4);
  u << Cplx(c, 0), Cplx(0, -s), Cplx(0, -s), Cplx(c, 0);
  return u;
}

namespace {

// max over phases of sum_i |sum_k V_k c[i][k]|^2 for the diagonal virtual-Z
// phase pattern; coordinate ascent from alignment seeds plus a coarse grid.
std::pair<double, std::pair<double, double>> maximize_phase_sum(
    const std::vector<Eigen::Vector4cd>& cs) {
  auto value = [&](double ta, double tb) {
    Cplx va = std::polar(1.0, ta), vb = std::polar(1.0, tb);
    double sum = 0.0;
    for (const auto& c : cs) sum += std::norm(c[0] + vb * c[1] + va * c[2] + va * vb * c[3]);
    return sum;
  };
  double best_ta = 0.0, best_tb = 0.0, best = value(0.0, 0.0);
  // alignment seed from the dominant Kraus term
  if (!cs.empty()) {
    const auto& c = cs.front();
    double ta = std::arg(c[0]) - std::arg(c[2]);
    double tb = std::arg(c[0]) - std::arg(c[1]);
    if (value(ta, tb) > best) best = value(ta, tb), best_ta = ta, best_tb = tb;
  }
  const int grid = 24;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      double ta = two_pi * i / grid, tb = two_pi * j / grid;
      double v = value(ta, tb);
      if (v > best) best = v, best_ta = ta, best_tb = tb;
    }
  // local refinement by coordinate parabolic steps
  double step = two_pi / grid;
  for (int iter = 0; iter < 60 && step > 1e-10; ++iter) {
    bool moved = false;
    for (int axis = 0; axis < 2; ++axis) {
      double& var = axis == 0 ? best_ta : best_tb;
      double up = value(axis == 0 ? best_ta + step : best_ta,
                        axis == 0 ? best_tb : best_tb + step);
      double down = value(axis == 0 ? best_ta - step : best_ta,
                          axis == 0 ? best_tb : best_tb - step);
      if (up > best) {
        var += step;
        best = up;
        moved = true;
      } else if (down > best) {
        var -= step;
        best = down;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return {best, {best_ta, best_tb}};
}

}  // namespace

FidelityReport propagator_fidelity(const CMat& t_matrix, bool optimize_phases) {
  if (t_matrix.rows() != 4 || t_matrix.cols() != 4)
    throw MetricsError("propagator fidelity expects a 4x4 projected propagator");
  CMat u = cz_unitary();
  CMat m = t_matrix * u.adjoint();  // Tr(U^dag V T) = sum_l V_l (T U^dag)_{ll}
  double best = std::norm(m.trace());
  std::pair<double, double> phases{0.0, 0.0};
  if (optimize_phases) {
    std::vector<Eigen::Vector4cd> cs(1);
    for (int l = 0; l < 4; ++l) cs[0][l] = m(l, l);
    std::tie(best, phases) = maximize_phase_sum(cs);
  }
  FidelityReport report;
  report.theta_a = phases.first;
  report.theta_b = phases.second;
  double tt = (t_matrix.adjoint() * t_matrix).trace().real();
  report.fidelity = (tt + best) / 20.0;
  report.leakage = 1.0 - tt / 4.0;
  report.method = FidelityReport::Method::Propagator;
  return report;
}

namespace {

// Single-qubit input states |0>,|1>,|+>,|+i> and the coefficients expressing
// |m><n| in terms of them.
CMat input_state_1q(int s) {
  CVec v(2);
  switch (s) {
    case 0: v << 1, 0; break;
    case 1: v << 0, 1; break;
    case 2: v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0); break;
    default: v << 1.0 / std::sqrt(2.0), Cplx(0, 1.0 / std::sqrt(2.0)); break;
  }
  return v * v.adjoint();
}

Cplx ketbra_coeff(int m, int n, int s) {
  // |0><0| = r0 ; |1><1| = r1 ; |0><1| = r+ + i r_i - (1+i)(r0+r1)/2
  static const Cplx half_1i(0.5, 0.5);
  if (m == 0 && n == 0) return s == 0 ? 1.0 : 0.0;
  if (m == 1 && n == 1) return s == 1 ? 1.0 : 0.0;
  if (m == 0 && n == 1) {
    switch (s) {
      case 0: return -half_1i;
      case 1: return -half_1i;
      case 2: return 1.0;
      default: return Cplx(0, 1);
    }
  }
  // (1,0): conjugate coefficients
  switch (s) {
    case 0: return -std::conj(half_1i);
    case 1: return -std::conj(half_1i);
    case 2: return 1.0;
    default: return Cplx(0, -1);
  }
}

}  // namespace

KrausSet process_tomography(const std::function<CMat(const CMat&)>& apply, int d,
                            int threads) {
  if (d != 2 && d != 4) throw MetricsError("process tomography supports d = 2 or 4");
  const int nq = d == 2 ? 1 : 2;
  const int n_inputs = nq == 1 ? 4 : 16;

  std::vector<CMat> outputs(n_inputs);
  parallel_for(
      n_inputs,
      [&](std::size_t s) {
        CMat rho_in = nq == 1 ? input_state_1q(static_cast<int>(s))
                              : kron(input_state_1q(static_cast<int>(s) / 4),
                                     input_state_1q(static_cast<int>(s) % 4));
        outputs[s] = apply(rho_in);
        if (outputs[s].rows() != d || outputs[s].cols() != d)
          throw MetricsError("tomography output dimension mismatch");
      },
      threads);

  // E(|m><n|) by linearity, then the Choi matrix.
  CMat choi = CMat::Zero(d * d, d * d);
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      CMat block = CMat::Zero(d, d);
      for (int s = 0; s < n_inputs; ++s) {
        Cplx coeff;
        if (nq == 1) {
          coeff = ketbra_coeff(m, n, s);
        } else {
          coeff = ketbra_coeff(m / 2, n / 2, s / 4) * ketbra_coeff(m % 2, n % 2, s % 4);
        }
        if (coeff != Cplx(0, 0)) block += coeff * outputs[s];
      }
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) choi(m * d + i, n * d + j) = block(i, j);
    }
  }
  choi = 0.5 * (choi + choi.adjoint()).eval();

  EighCplx sol = eigh(choi);
  KrausSet out;
  double min_eig = sol.values.minCoeff();
  if (min_eig < -1e-6)
    throw MetricsError("non-physical Choi matrix: min eigenvalue " + std::to_string(min_eig));
  out.choi_negativity = std::min(0.0, min_eig);
  for (int k = 0; k < d * d; ++k) {
    double lambda = sol.values[k];
    if (lambda < 1e-12) continue;
    CMat e(d, d);
    for (int m = 0; m < d; ++m)
      for (int i = 0; i < d; ++i) e(i, m) = std::sqrt(lambda) * sol.vectors(m * d + i, k);
    out.ops.push_back(std::move(e));
  }

  // The reconstructed map must reproduce every input-output pair.
  CMat completeness = CMat::Zero(d, d);
  for (const auto& e : out.ops) completeness += e.adjoint() * e;
  out.completeness_defect = (CMat::Identity(d, d) - completeness).norm();
  for (int s = 0; s < n_inputs; ++s) {
    CMat rho_in = nq == 1 ? input_state_1q(s) : kron(input_state_1q(s / 4), input_state_1q(s % 4));
    CMat rebuilt = CMat::Zero(d, d);
    for (const auto& e : out.ops) rebuilt += e * rho_in * e.adjoint();
    if ((rebuilt - outputs[s]).norm() > 1e-8 * std::max(1.0, outputs[s].norm()))
      throw MetricsError("Kraus reconstruction failed to reproduce tomography data");
  }
  return out;
}

FidelityReport kraus_fidelity(const KrausSet& kraus, const CMat& target, int d,
                              bool optimize_phases) {
  double trace_term = 0.0;
  for (const auto& e : kraus.ops) trace_term += (e.adjoint() * e).trace().real();

  double phase_term = 0.0;
  FidelityReport report;
  report.method = FidelityReport::Method::Kraus;
  if (optimize_phases) {
    std::vector<Eigen::Vector4cd> cs;
    for (const auto& e : kraus.ops) {
      CMat m = e * target.adjoint();
      Eigen::Vector4cd c = Eigen::Vector4cd::Zero();
      for (int l = 0; l < d; ++l) c[d == 2 ? (l == 0 ? 0 : 2) : l] = m(l, l);
      cs.push_back(c);
    }
    auto [best, phases] = maximize_phase_sum(cs);
    phase_term = best;
    report.theta_a = phases.first;
    report.theta_b = phases.second;
  } else {
    for (const auto& e : kraus.ops) phase_term += std::norm((target.adjoint() * e).trace());
  }
  report.fidelity = (trace_term + phase_term) / (d * (d + 1.0));
  report.leakage = 1.0 - trace_term / d;
  return report;
}

ReadoutReport integrate_readout(const TrajectoryBatch& batch0, const TrajectoryBatch& batch1,
                                double eta) {
  const int n0 = static_cast<int>(batch0.weighted_marks.size());
  const int n1 = static_cast<int>(batch1.weighted_marks.size());
  if (n0 < 100 || n1 < 100)
    throw MetricsError("Gaussian readout fit needs at least 100 shots per class");
  if (batch0.mark_times_ns != batch1.mark_times_ns)
    throw MetricsError("trajectory batches were integrated on different mark grids");
  const int n_marks = static_cast<int>(batch0.mark_times_ns.size());

  ReadoutReport report;
  report.mark_times_ns = batch0.mark_times_ns;
  report.eta = eta;
  report.shots0 = n0;
  report.shots1 = n1;

  for (int m = 0; m < n_marks; ++m) {
    Cplx mu0c(0, 0), mu1c(0, 0);
    for (int s = 0; s < n0; ++s) mu0c += batch0.weighted_marks[s][m];
    for (int s = 0; s < n1; ++s) mu1c += batch1.weighted_marks[s][m];
    mu0c /= static_cast<double>(n0);
    mu1c /= static_cast<double>(n1);
    Cplx axis = mu0c - mu1c;
    double axis_norm = std::abs(axis);
    if (axis_norm == 0.0) axis = 1.0;
    else axis /= axis_norm;

    auto project = [&](const std::vector<std::vector<Cplx>>& marks, int s) {
      return (std::conj(axis) * marks[s][m]).real();
    };
    double mu0 = 0.0, mu1 = 0.0, var0 = 0.0, var1 = 0.0;
    for (int s = 0; s < n0; ++s) mu0 += project(batch0.weighted_marks, s);
    for (int s = 0; s < n1; ++s) mu1 += project(batch1.weighted_marks, s);
    mu0 /= n0;
    mu1 /= n1;
    for (int s = 0; s < n0; ++s) var0 += std::pow(project(batch0.weighted_marks, s) - mu0, 2);
    for (int s = 0; s < n1; ++s) var1 += std::pow(project(batch1.weighted_marks, s) - mu1, 2);
    double sigma0 = std::sqrt(var0 / (n0 - 1));
    double sigma1 = std::sqrt(var1 / (n1 - 1));

    double snr = (sigma0 + sigma1) > 0.0 ? std::abs(mu0 - mu1) / (sigma0 + sigma1) : 0.0;
    report.snr.push_back(snr);
    report.assignment_error.push_back(0.5 * std::erfc(snr * std::sqrt(eta) / std::sqrt(2.0)));

    if (m == n_marks - 1) {
      report.mu0 = mu0;
      report.mu1 = mu1;
      report.sigma0 = sigma0;
      report.sigma1 = sigma1;
      // Equal-likelihood quadratic discriminant for the observed assignments.
      auto loglike = [](double x, double mu, double sigma) {
        double z = (x - mu) / sigma;
        return -0.5 * z * z - std::log(sigma);
      };
      for (int s = 0; s < n0; ++s) {
        double x = project(batch0.weighted_marks, s);
        report.projections0.push_back(x);
        if (loglike(x, mu1, sigma1) > loglike(x, mu0, sigma0)) ++report.misassigned0;
      }
      for (int s = 0; s < n1; ++s) {
        double x = project(batch1.weighted_marks, s);
        report.projections1.push_back(x);
        if (loglike(x, mu0, sigma0) > loglike(x, mu1, sigma1)) ++report.misassigned1;
      }
    }
  }
  return report;
}

double qnd_infidelity(const EigenSystem& es, const ActiveSpace& space, const CMat& rho,
                      const Label& initial, int resonator_pos) {
  double fidelity = 0.0;
  for (const auto& [label, parent] : es.labels) {
    bool same = true;
    for (std::size_t k = 0; k < label.n.size(); ++k) {
      if (static_cast<int>(k) == resonator_pos) continue;
      same &= (label.n[k] == initial.n[k]);
    }
    if (!same) continue;
    auto it = std::lower_bound(space.states.begin(), space.states.end(), parent);
    if (it == space.states.end() || *it != parent) continue;
    int local = static_cast<int>(std::distance(space.states.begin(), it));
    fidelity += rho(local, local).real();
  }
  return 1.0 - fidelity;
}

}  // namespace armsim
