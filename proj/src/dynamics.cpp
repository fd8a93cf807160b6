#include "armsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "armsim/threading.hpp"
#include "armsim/units.hpp"

namespace armsim {

using units::two_pi;

double DriveSpec::envelope_at(double t_ns) const {
  double s = (t_ns - start_ns) / duration_ns;
  if (s < 0.0 || s > 1.0) return 0.0;
  if (envelope == Envelope::Square) return 1.0;
  return 0.5 * (1.0 - std::cos(two_pi * s));
}

double DriveSpec::eps(double t_ns) const {
  double env = envelope_at(t_ns);
  if (env == 0.0) return 0.0;
  return amplitude_ghz * env * std::cos(two_pi * freq_ghz * (t_ns - start_ns) + carrier_phase);
}

CollapseOp build_resonator_collapse(const EigenSystem& es, const std::string& nr_op,
                                    double kappa_ghz, double omega_r_ghz,
                                    double rate_floor_per_ns) {
  const HermOp& nr = es.op(nr_op);
  Label ground{std::vector<int>(es.modes.size(), 0)};
  Label res1 = ground;
  res1.n.back() = 1;  // resonator is the last mode in the readout ordering
  int g = es.state(ground), r1 = es.state(res1);
  CMat nrc = nr.to_complex();
  Cplx ref = nrc(g, r1);
  if (std::abs(ref) < 1e-9)
    throw DynamicsError("resonator reference element <000|n_r|001> vanishes");
  CMat xi = nrc / ref;

  const double kappa_rate = two_pi * kappa_ghz;  // 1/ns
  const int n = es.dim();
  CMat l = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double w_ij = es.energies[j] - es.energies[i];
      if (w_ij <= 0.0) continue;
      double kappa_eff = kappa_rate * (w_ij / omega_r_ghz) * (w_ij / omega_r_ghz);
      double mag = std::abs(xi(i, j));
      if (kappa_eff * mag * mag < rate_floor_per_ns) continue;
      l(i, j) = std::sqrt(kappa_eff) * mag;
    }
  }
  return {std::move(l), "resonator"};
}

CollapseSet qubit_collapses(const EigenSystem& es,
                            const std::vector<std::pair<int, ModeCoherence>>& modes,
                            const std::vector<Label>& span) {
  CollapseSet out;
  const int n = es.dim();
  for (const auto& [mode_id, coherence] : modes) {
    auto slot = std::find(es.modes.begin(), es.modes.end(), mode_id);
    if (slot == es.modes.end()) throw DynamicsError("qubit_collapses: unknown mode id");
    int pos = static_cast<int>(std::distance(es.modes.begin(), slot));

    if (coherence.t1_ns > 0.0) {
      CMat relax = CMat::Zero(n, n);
      bool any = false;
      for (const Label& upper : span) {
        if (upper.n[pos] != 1) continue;
        Label lower = upper;
        lower.n[pos] = 0;
        if (!es.has_label(upper) || !es.has_label(lower)) continue;
        relax(es.state(lower), es.state(upper)) = 1.0;
        any = true;
      }
      if (any)
        out.push_back({std::sqrt(1.0 / coherence.t1_ns) * relax,
                       "qubit-T1 mode " + std::to_string(mode_id)});
    }
    if (coherence.tphi_ns > 0.0) {
      CMat dephase = CMat::Zero(n, n);
      bool any = false;
      for (const Label& state : span) {
        if (state.n[pos] != 1) continue;
        if (!es.has_label(state)) continue;
        int k = es.state(state);
        dephase(k, k) = 1.0;
        any = true;
      }
      if (any)
        out.push_back({std::sqrt(1.0 / coherence.tphi_ns) * dephase,
                       "qubit-Tphi mode " + std::to_string(mode_id)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adaptive Dormand-Prince 5(4) over complex state vectors.

namespace {

struct Rk45Tableau {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // embedded 4th order
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

template <typename Rhs>
void integrate_rk45(Rhs&& rhs, CVec& y, double t0, double t1, double rtol, double atol,
                    double h_init, double h_min) {
  using T = Rk45Tableau;
  if (t1 <= t0) return;
  double t = t0;
  double h = std::min(h_init, t1 - t0);
  CVec k1 = rhs(t, y);
  CVec k2, k3, k4, k5, k6, k7, ytmp, y5;
  int rejected_in_a_row = 0;
  while (t < t1 - 1e-15) {
    h = std::min(h, t1 - t);
    if (h < h_min) throw DynamicsError("integrator step size underflow at t=" + std::to_string(t));
    ytmp = y + h * T::a21 * k1;
    k2 = rhs(t + T::c2 * h, ytmp);
    ytmp = y + h * (T::a31 * k1 + T::a32 * k2);
    k3 = rhs(t + T::c3 * h, ytmp);
    ytmp = y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
    k4 = rhs(t + T::c4 * h, ytmp);
    ytmp = y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
    k5 = rhs(t + T::c5 * h, ytmp);
    ytmp = y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
    k6 = rhs(t + h, ytmp);
    y5 = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
    k7 = rhs(t + h, y5);

    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      Cplx e = h * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] + T::e5 * k5[i] +
                    T::e6 * k6[i] + T::e7 * k7[i]);
      double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      double r = std::abs(e) / scale;
      err = std::max(err, r);
    }
    if (err <= 1.0) {
      t += h;
      y.swap(y5);
      k1.swap(k7);  // FSAL
      rejected_in_a_row = 0;
      double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      h *= std::min(5.0, std::max(0.2, grow));
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (++rejected_in_a_row > 60)
        throw DynamicsError("integrator failed to find an acceptable step at t=" +
                            std::to_string(t));
      // k1 still matches (t, y); only the trial step is discarded.
    }
  }
}

}  // namespace

CVec evolve_schrodinger(const Vec& energies_ghz, const std::vector<DrivenOp>& drives,
                        const CVec& psi0, const std::vector<double>& t_grid,
                        const StateObserver& observer, IntegratorOptions opts) {
  const Eigen::Index n = psi0.size();
  if (energies_ghz.size() != n) throw DynamicsError("state/energy dimension mismatch");
  const double t_start = t_grid.empty() ? 0.0 : t_grid.front();

  CVec phase(n), work(n), out(n);
  // Interaction picture: psi~ = exp(+i 2 pi E (t - t0)) psi.
  auto rhs_ip = [&](double t, const CVec& y) -> CVec {
    double tau = t - t_start;
    for (Eigen::Index i = 0; i < n; ++i)
      phase[i] = std::polar(1.0, -two_pi * energies_ghz[i] * tau);
    work = phase.cwiseProduct(y);  // lab-frame psi
    out.setZero();
    for (const auto& d : drives) {
      double eps = d.spec.eps(t);
      if (eps != 0.0) out.noalias() += eps * (d.op * work);
    }
    out *= Cplx(0, -two_pi);
    for (Eigen::Index i = 0; i < n; ++i) out[i] *= std::conj(phase[i]);
    return out;
  };
  auto rhs_lab = [&](double t, const CVec& y) -> CVec {
    out = energies_ghz.cast<Cplx>().cwiseProduct(y);
    for (const auto& d : drives) {
      double eps = d.spec.eps(t);
      if (eps != 0.0) out.noalias() += eps * (d.op * y);
    }
    return Cplx(0, -two_pi) * out;
  };

  CVec y = psi0;
  double t_prev = t_start;
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    double t_next = t_grid[g];
    if (t_next > t_prev) {
      if (opts.interaction_picture)
        integrate_rk45(rhs_ip, y, t_prev, t_next, opts.rtol, opts.atol, opts.h_init, opts.h_min);
      else
        integrate_rk45(rhs_lab, y, t_prev, t_next, opts.rtol, opts.atol, opts.h_init, opts.h_min);
      t_prev = t_next;
    }
    if (observer) {
      if (opts.interaction_picture) {
        double tau = t_next - t_start;
        for (Eigen::Index i = 0; i < n; ++i)
          work[i] = std::polar(1.0, -two_pi * energies_ghz[i] * tau) * y[i];
        observer(t_next, work);
      } else {
        observer(t_next, y);
      }
    }
  }
  if (opts.interaction_picture) {
    double tau = t_prev - t_start;
    for (Eigen::Index i = 0; i < n; ++i)
      y[i] *= std::polar(1.0, -two_pi * energies_ghz[i] * tau);
  }
  return y;
}

CMat evolve_lindblad(const Vec& energies_ghz, const std::vector<DrivenOp>& drives,
                     const CollapseSet& collapses, const CMat& rho0,
                     const std::vector<double>& t_grid, const DensityObserver& observer,
                     LindbladOptions opts) {
  const Eigen::Index n = rho0.rows();
  if (rho0.cols() != n || energies_ghz.size() != n)
    throw DynamicsError("density matrix dimension mismatch");
  const double t_start = t_grid.empty() ? 0.0 : t_grid.front();
  const double trace0 = rho0.trace().real();

  // Precompute L and L^dag L
  std::vector<CMat> ls, ldl;
  for (const auto& c : collapses) {
    ls.push_back(c.op);
    ldl.push_back(c.op.adjoint() * c.op);
  }

  CMat rho(n, n), g(n, n), drive_h(n, n);
  auto unphase = [&](const CVec& y, double tau, CMat& dst) {
    Eigen::Map<const CMat> ym(y.data(), n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        dst(i, j) = ym(i, j) * std::polar(1.0, -two_pi * (energies_ghz[i] - energies_ghz[j]) * tau);
  };
  auto rhs = [&](double t, const CVec& y) -> CVec {
    double tau = t - t_start;
    unphase(y, tau, rho);
    g.setZero();
    bool any_drive = false;
    for (const auto& d : drives) {
      double eps = d.spec.eps(t);
      if (eps == 0.0) continue;
      if (!any_drive) {
        drive_h = eps * d.op;
        any_drive = true;
      } else {
        drive_h += eps * d.op;
      }
    }
    if (any_drive) g.noalias() += Cplx(0, -two_pi) * (drive_h * rho - rho * drive_h);
    for (std::size_t k = 0; k < ls.size(); ++k) {
      g.noalias() += ls[k] * rho * ls[k].adjoint();
      g.noalias() -= 0.5 * (ldl[k] * rho + rho * ldl[k]);
    }
    CVec out(n * n);
    Eigen::Map<CMat> om(out.data(), n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        om(i, j) = g(i, j) * std::polar(1.0, two_pi * (energies_ghz[i] - energies_ghz[j]) * tau);
    return out;
  };

  CVec y(n * n);
  Eigen::Map<CMat>(y.data(), n, n) = rho0;
  double t_prev = t_start;
  CMat snapshot(n, n);
  for (std::size_t gi = 0; gi < t_grid.size(); ++gi) {
    double t_next = t_grid[gi];
    if (t_next > t_prev) {
      integrate_rk45(rhs, y, t_prev, t_next, opts.rtol, opts.atol, opts.h_init, opts.h_min);
      t_prev = t_next;
    }
    unphase(y, t_next - t_start, snapshot);
    double drift = std::abs(snapshot.trace().real() - trace0);
    if (drift > opts.trace_abort) {
      std::ostringstream msg;
      msg << "master equation trace drift " << drift << " at t=" << t_next
          << " (dim=" << n << ", collapses=" << collapses.size() << ")";
      throw DynamicsError(msg.str());
    }
    if (opts.check_positivity) {
      EighCplx sol = eigh(snapshot);
      if (sol.values[0] < -1e-6)
        throw DynamicsError("density matrix lost positivity: min eig " +
                            std::to_string(sol.values[0]));
    }
    if (observer) observer(t_next, snapshot);
  }
  unphase(y, t_prev - t_start, snapshot);
  return snapshot;
}

int ActiveSpace::local_index(int parent) const {
  auto it = std::lower_bound(states.begin(), states.end(), parent);
  if (it == states.end() || *it != parent)
    throw DynamicsError("state " + std::to_string(parent) + " is not in the active space");
  return static_cast<int>(std::distance(states.begin(), it));
}

Vec ActiveSpace::project(const Vec& energies) const {
  Vec out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = energies[states[i]];
  return out;
}

CMat ActiveSpace::project(const CMat& op) const {
  CMat out(dim(), dim());
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) out(i, j) = op(states[i], states[j]);
  return out;
}

CMat ActiveSpace::project(const HermOp& op) const { return project(op.to_complex()); }

CVec ActiveSpace::basis_state(int parent) const {
  CVec out = CVec::Zero(dim());
  out[local_index(parent)] = 1.0;
  return out;
}

ActiveSpace populated_space(const Vec& energies_ghz, const std::vector<DrivenOp>& drives,
                            const std::vector<int>& initial_states, double threshold,
                            double window_ns, double sample_dt_ns, IntegratorOptions opts) {
  const Eigen::Index n = energies_ghz.size();
  Vec max_pop = Vec::Zero(n);
  std::vector<double> grid;
  for (double t = 0.0; t <= window_ns + 1e-9; t += sample_dt_ns) grid.push_back(t);
  for (int init : initial_states) {
    CVec psi0 = CVec::Zero(n);
    psi0[init] = 1.0;
    evolve_schrodinger(energies_ghz, drives, psi0, grid,
                       [&](double, const CVec& psi) {
                         for (Eigen::Index i = 0; i < n; ++i)
                           max_pop[i] = std::max(max_pop[i], std::norm(psi[i]));
                       },
                       opts);
  }
  ActiveSpace space;
  for (Eigen::Index i = 0; i < n; ++i)
    if (max_pop[i] >= threshold) space.states.push_back(static_cast<int>(i));
  for (int init : initial_states)
    if (!std::binary_search(space.states.begin(), space.states.end(), init)) {
      space.states.push_back(init);
      std::sort(space.states.begin(), space.states.end());
    }
  return space;
}

ActiveSpace iterative_truncation(const EigenSystem& es, const std::vector<DrivenOp>& drives,
                                 const CollapseSet& collapses,
                                 const std::vector<CMat>& link_ops,
                                 const std::vector<int>& initial_states, double window_ns,
                                 const TruncationThresholds& thresholds, LindbladOptions opts) {
  const int n = es.dim();

  std::vector<Mat> links;
  for (const auto& op : link_ops) links.push_back(op.cwiseAbs());
  auto connected = [&](const std::set<int>& core) {
    std::set<int> extra;
    for (const Mat& link : links)
      for (int s : core)
        for (int k = 0; k < n; ++k)
          if (!core.count(k) && (link(s, k) > thresholds.connectivity ||
                                 link(k, s) > thresholds.connectivity))
            extra.insert(k);
    return extra;
  };

  // Initial set: seeds plus everything drive/collapse-connected to them,
  // chased to closure so ladders of strongly linked states enter whole.
  std::set<int> current(initial_states.begin(), initial_states.end());
  for (int hop = 0; hop < n; ++hop) {
    std::set<int> extra = connected(current);
    if (extra.empty()) break;
    current.insert(extra.begin(), extra.end());
  }

  std::vector<std::size_t> growth;
  for (int round = 0; round < thresholds.max_rounds; ++round) {
    growth.push_back(current.size());
    ActiveSpace space;
    space.states.assign(current.begin(), current.end());
    Vec energies = space.project(es.energies);
    std::vector<DrivenOp> local_drives;
    for (const auto& d : drives) local_drives.push_back({d.spec, space.project(d.op)});
    CollapseSet local_collapses;
    for (const auto& c : collapses)
      local_collapses.push_back({space.project(c.op), c.provenance});

    Vec max_pop = Vec::Zero(space.dim());
    std::vector<double> grid;
    for (double t = 0.0; t <= window_ns + 1e-9; t += 0.05) grid.push_back(t);
    for (int init : initial_states) {
      CVec psi0 = space.basis_state(init);
      CMat rho0 = psi0 * psi0.adjoint();
      evolve_lindblad(energies, local_drives, local_collapses, rho0, grid,
                      [&](double, const CMat& rho) {
                        for (int i = 0; i < space.dim(); ++i)
                          max_pop[i] = std::max(max_pop[i], rho(i, i).real());
                      },
                      opts);
    }

    std::set<int> kept(initial_states.begin(), initial_states.end());
    for (int i = 0; i < space.dim(); ++i)
      if (max_pop[i] >= thresholds.population) kept.insert(space.states[i]);
    std::set<int> next = kept;
    std::set<int> extra = connected(kept);
    next.insert(extra.begin(), extra.end());

    if (next == current) {
      ActiveSpace out;
      out.states.assign(current.begin(), current.end());
      return out;
    }
    current = std::move(next);
  }
  std::ostringstream msg;
  msg << "iterative truncation did not converge; active-space sizes:";
  for (std::size_t s : growth) msg << " " << s;
  throw DynamicsError(msg.str());
}

TrajectoryBatch sse_trajectories(const Vec& energies_ghz, const std::vector<DrivenOp>& drives,
                                 const CMat& collapse, const CVec& psi0, int true_label,
                                 const std::vector<Cplx>& weights_per_bin,
                                 const SseConfig& config) {
  const Eigen::Index n = psi0.size();
  const int steps_per_bin = static_cast<int>(std::lround(config.record_bin_ns / config.dt_ns));
  if (steps_per_bin < 1) throw DynamicsError("record bin must cover at least one SSE step");
  const int n_bins = static_cast<int>(std::lround(config.window_ns / config.record_bin_ns));
  if (static_cast<int>(weights_per_bin.size()) < n_bins)
    throw DynamicsError("weight vector shorter than the record window");

  TrajectoryBatch batch;
  batch.true_label = true_label;
  batch.mark_times_ns = config.mark_times_ns;
  if (batch.mark_times_ns.empty())
    for (double t = 1.0; t <= config.window_ns + 1e-9; t += 1.0) batch.mark_times_ns.push_back(t);
  const int n_marks = static_cast<int>(batch.mark_times_ns.size());
  std::vector<int> mark_bin(n_marks);
  for (int m = 0; m < n_marks; ++m)
    mark_bin[m] = std::min(n_bins, static_cast<int>(std::lround(batch.mark_times_ns[m] /
                                                                config.record_bin_ns)));

  const int n_samples = static_cast<int>(config.window_ns / config.sample_dt_ns) + 1;
  batch.sample_times_ns.resize(n_samples);
  for (int s = 0; s < n_samples; ++s) batch.sample_times_ns[s] = s * config.sample_dt_ns;
  batch.mean_populations = Mat::Zero(n_samples, n);
  batch.weighted_marks.assign(config.n_traj, std::vector<Cplx>(n_marks, Cplx(0, 0)));

  const int sample_stride =
      std::max(1, static_cast<int>(std::lround(config.sample_dt_ns / config.dt_ns)));
  const double dt = config.dt_ns;
  const double noise_sd = std::sqrt(dt / 2.0);

  std::mutex pop_mutex;

  parallel_for(
      config.n_traj,
      [&](std::size_t traj) {
        // Counter-based per-trajectory seeding (splitmix64 of seed and index)
        // keeps batches reproducible under parallel execution.
        unsigned long long z = config.seed + 0x9E3779B97F4A7C15ULL * (traj + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        std::mt19937_64 rng(z ^ (z >> 31));
        std::normal_distribution<double> gauss;

        CVec psi = psi0;
        CVec cpsi(n), drift(n), lab(n);
        Mat pops = Mat::Zero(n_samples, n);
        int sample_idx = 0;
        Cplx running(0, 0);
        int mark_idx = 0;
        int step = 0;
        const int total_steps = n_bins * steps_per_bin;
        Cplx bin_acc(0, 0);

        for (int bin = 0; bin < n_bins; ++bin) {
          bin_acc = Cplx(0, 0);
          for (int sub = 0; sub < steps_per_bin; ++sub, ++step) {
            double t = step * dt;
            if (step % sample_stride == 0 && sample_idx < n_samples) {
              for (Eigen::Index i = 0; i < n; ++i) pops(sample_idx, i) += std::norm(psi[i]);
              ++sample_idx;
            }
            cpsi.noalias() = collapse * psi;
            Cplx exp_l = psi.dot(cpsi);  // <L>
            Cplx dz = Cplx(gauss(rng) * noise_sd, gauss(rng) * noise_sd);
            bin_acc += exp_l * dt + std::conj(dz);

            // Normalized heterodyne drift + diffusion (Ito left point), then
            // Strang-split coherent step: half free phases, midpoint drive
            // kick, half free phases. The symmetric splitting removes the
            // first-order bias of a left-endpoint drive on a fast carrier.
            drift.noalias() = std::conj(exp_l) * cpsi;
            drift.noalias() -= 0.5 * (collapse.adjoint() * cpsi);
            drift -= 0.5 * std::norm(exp_l) * psi;
            psi += dt * drift + (cpsi - exp_l * psi) * std::conj(dz);
            for (Eigen::Index i = 0; i < n; ++i)
              psi[i] *= std::polar(1.0, -two_pi * energies_ghz[i] * 0.5 * dt);
            for (const auto& d : drives) {
              double eps = d.spec.eps(t + 0.5 * dt);
              if (eps != 0.0) psi += Cplx(0, -two_pi * eps * dt) * (d.op * psi).eval();
            }
            for (Eigen::Index i = 0; i < n; ++i)
              psi[i] *= std::polar(1.0, -two_pi * energies_ghz[i] * 0.5 * dt);
            psi /= psi.norm();
          }
          running += std::conj(weights_per_bin[bin]) * bin_acc;
          while (mark_idx < n_marks && mark_bin[mark_idx] == bin + 1) {
            batch.weighted_marks[traj][mark_idx] = running;
            ++mark_idx;
          }
        }
        while (mark_idx < n_marks) batch.weighted_marks[traj][mark_idx++] = running;
        while (sample_idx < n_samples) {
          for (Eigen::Index i = 0; i < n; ++i) pops(sample_idx, i) += std::norm(psi[i]);
          ++sample_idx;
        }
        std::lock_guard<std::mutex> lock(pop_mutex);
        batch.mean_populations += pops;
      },
      config.threads);

  batch.mean_populations /= static_cast<double>(config.n_traj);
  return batch;
}

}  // namespace armsim
