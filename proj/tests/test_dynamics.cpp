#include <doctest.h>

#include <cmath>
#include <random>

#include "armsim/dynamics.hpp"
#include "armsim/metrics.hpp"
#include "armsim/presets.hpp"
#include "armsim/units.hpp"

using namespace armsim;
using units::two_pi;

namespace {

// Gauged resonator operators (charge real symmetric, lowering i-free pattern
// handled through HermOp conventions elsewhere; here built directly).
CMat lowering_gauged(int n) {
  CMat a = CMat::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) a(k, k + 1) = Cplx(0, 1) * std::sqrt(double(k + 1));
  return a;
}

CMat charge_gauged(int n, double n_zpf) {
  CMat m = CMat::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    m(k, k + 1) = n_zpf * std::sqrt(double(k + 1));
    m(k + 1, k) = n_zpf * std::sqrt(double(k + 1));
  }
  return m;
}

std::vector<double> grid_to(double t1, double dt) {
  std::vector<double> g;
  for (double t = 0.0; t <= t1 + 1e-9; t += dt) g.push_back(t);
  return g;
}

}  // namespace

TEST_CASE("free evolution keeps populations and accumulates exact phases") {
  Vec e(3);
  e << 0.0, 1.7, 6.3;
  CVec psi0(3);
  psi0 << Cplx(0.5, 0), Cplx(0.5, 0.5), Cplx(0.0, 0.5);
  CVec psi = evolve_schrodinger(e, {}, psi0, grid_to(50.0, 5.0));
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(std::norm(psi[k]) - std::norm(psi0[k])) < 1e-10);
    Cplx expect = psi0[k] * std::polar(1.0, -two_pi * e[k] * 50.0);
    CHECK(std::abs(psi[k] - expect) < 1e-9);
  }
}

TEST_CASE("resonant two-level Rabi with a full-cycle cosine pulse returns") {
  // Envelope area 1/M in linear-frequency units is a 2 pi Bloch rotation.
  Vec e(2);
  e << 0.0, 5.0;
  CMat sx(2, 2);
  sx << 0, 1, 1, 0;
  DriveSpec drive;
  drive.target = "x";
  drive.envelope = DriveSpec::Envelope::Cosine;
  drive.duration_ns = 8.0;
  drive.freq_ghz = 5.0;
  drive.amplitude_ghz = 2.0 / (8.0 * 1.0);
  CVec psi0(2);
  psi0 << 1.0, 0.0;
  CVec psi = evolve_schrodinger(e, {{drive, sx}}, psi0, grid_to(8.0, 8.0));
  CHECK(std::norm(psi[0]) > 1.0 - 1e-3);  // off-RWA tolerance
  CHECK(std::abs(psi.norm() - 1.0) < 1e-9);
}

TEST_CASE("lab-frame and interaction-picture integration agree") {
  Vec e(3);
  e << 0.0, 4.5, 9.4;
  CMat m = CMat::Zero(3, 3);
  m(0, 1) = m(1, 0) = 0.8;
  m(1, 2) = m(2, 1) = 1.1;
  DriveSpec drive;
  drive.duration_ns = 5.0;
  drive.freq_ghz = 4.5;
  drive.amplitude_ghz = 0.08;
  CVec psi0(3);
  psi0 << 1.0, 0.0, 0.0;
  IntegratorOptions lab;
  lab.interaction_picture = false;
  CVec a = evolve_schrodinger(e, {{drive, m}}, psi0, grid_to(5.0, 5.0));
  CVec b = evolve_schrodinger(e, {{drive, m}}, psi0, grid_to(5.0, 5.0), {}, lab);
  CHECK((a - b).norm() < 1e-8);
}

TEST_CASE("norm is preserved to 1e-9 over 50 ns of driven evolution") {
  Vec e(4);
  e << 0.0, 1.6, 7.3, 9.1;
  CMat m = CMat::Zero(4, 4);
  m(0, 2) = m(2, 0) = 1.0;
  m(1, 3) = m(3, 1) = 0.7;
  DriveSpec drive;
  drive.duration_ns = 50.0;
  drive.freq_ghz = 7.3;
  drive.amplitude_ghz = 0.05;
  CVec psi0 = CVec::Zero(4);
  psi0[0] = 1.0;
  CVec psi = evolve_schrodinger(e, {{drive, m}}, psi0, grid_to(50.0, 10.0));
  CHECK(std::abs(psi.norm() - 1.0) < 1e-9);
}

TEST_CASE("master equation without collapses matches pure-state evolution") {
  Vec e(3);
  e << 0.0, 2.2, 5.9;
  CMat m = CMat::Zero(3, 3);
  m(0, 1) = m(1, 0) = 1.0;
  DriveSpec drive;
  drive.duration_ns = 4.0;
  drive.freq_ghz = 2.2;
  drive.amplitude_ghz = 0.1;
  CVec psi0(3);
  psi0 << std::sqrt(0.7), std::sqrt(0.3), 0.0;
  CVec psi = evolve_schrodinger(e, {{drive, m}}, psi0, grid_to(4.0, 4.0));
  CMat rho0 = psi0 * psi0.adjoint();
  CMat rho = evolve_lindblad(e, {{drive, m}}, {}, rho0, grid_to(4.0, 4.0));
  CHECK((rho - psi * psi.adjoint()).norm() < 1e-7);
}

TEST_CASE("relaxation decays populations as exp(-t/T1)") {
  Vec e(2);
  e << 0.0, 1.6;
  double t1 = 1000.0;  // 1 us
  CMat relax = CMat::Zero(2, 2);
  relax(0, 1) = std::sqrt(1.0 / t1);
  CollapseSet collapses = {{relax, "qubit-T1"}};
  CMat rho0 = CMat::Zero(2, 2);
  rho0(1, 1) = 1.0;
  std::vector<double> grid = grid_to(300.0, 50.0);
  std::vector<double> pops;
  evolve_lindblad(e, {}, collapses, rho0, grid,
                  [&](double, const CMat& rho) { pops.push_back(rho(1, 1).real()); });
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(pops[i] == doctest::Approx(std::exp(-grid[i] / t1)).epsilon(1e-6));
}

TEST_CASE("trace and hermiticity are preserved by the master equation") {
  Vec e(3);
  e << 0.0, 1.5, 9.0;
  CMat m = CMat::Zero(3, 3);
  m(0, 2) = m(2, 0) = 1.0;
  DriveSpec drive;
  drive.duration_ns = 20.0;
  drive.freq_ghz = 9.0;
  drive.amplitude_ghz = 0.1;
  CMat relax = CMat::Zero(3, 3);
  relax(0, 2) = 0.05;
  CollapseSet collapses = {{relax, "test"}};
  CMat rho0 = CMat::Zero(3, 3);
  rho0(0, 0) = 1.0;
  double worst_trace = 0.0, worst_herm = 0.0, worst_pos = 0.0;
  evolve_lindblad(e, {{drive, m}}, collapses, rho0, grid_to(20.0, 1.0),
                  [&](double, const CMat& rho) {
                    worst_trace = std::max(worst_trace, std::abs(rho.trace().real() - 1.0));
                    worst_herm = std::max(worst_herm, (rho - rho.adjoint()).norm());
                    Vec ev = eigh(rho).values;
                    worst_pos = std::min(worst_pos, ev[0]);
                  });
  CHECK(worst_trace < 1e-8);
  CHECK(worst_herm < 1e-10);
  CHECK(worst_pos > -1e-8);
}

TEST_CASE("driven damped resonator follows the classical linear response") {
  const int nfock = 12;
  const double f_r = 6.0, kappa_ghz = 0.02;  // kappa/2pi in GHz
  const double kappa_rate = two_pi * kappa_ghz;
  const double n_zpf = 0.8;
  Vec e(nfock);
  for (int k = 0; k < nfock; ++k) e[k] = f_r * k;
  CMat a = lowering_gauged(nfock);
  CMat n_op = charge_gauged(nfock, n_zpf);
  DriveSpec drive;
  drive.envelope = DriveSpec::Envelope::Square;
  drive.duration_ns = 12.0;
  drive.freq_ghz = f_r;
  drive.amplitude_ghz = 0.02;
  CollapseSet collapses = {{std::sqrt(kappa_rate) * a, "resonator"}};
  CMat rho0 = CMat::Zero(nfock, nfock);
  rho0(0, 0) = 1.0;

  std::vector<double> grid = grid_to(12.0, 0.25);
  std::vector<Cplx> alpha_me;
  evolve_lindblad(e, {{drive, n_op}}, collapses, rho0, grid,
                  [&](double, const CMat& rho) { alpha_me.push_back((a * rho).trace()); });

  // Classical oracle: d<a>/dt = (-i 2pi f - kappa/2) <a> + 2pi eps(t) n_zpf,
  // from [a, n] = i n_zpf in the gauged convention.
  std::vector<Cplx> alpha_cl(grid.size());
  Cplx alpha(0, 0);
  double dt = 1e-4;
  std::size_t gi = 0;
  auto rhs = [&](double t, Cplx al) {
    return (Cplx(0, -two_pi * f_r) - kappa_rate / 2.0) * al + two_pi * drive.eps(t) * n_zpf;
  };
  for (double t = 0.0; gi < grid.size(); t += dt) {
    if (t >= grid[gi] - 1e-9) alpha_cl[gi++] = alpha;
    Cplx k1 = rhs(t, alpha), k2 = rhs(t + dt / 2, alpha + dt / 2 * k1);
    Cplx k3 = rhs(t + dt / 2, alpha + dt / 2 * k2), k4 = rhs(t + dt, alpha + dt * k3);
    alpha += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  double peak = 0.0;
  for (auto& v : alpha_cl) peak = std::max(peak, std::abs(v));
  REQUIRE(peak > 0.05);  // the drive actually populates the mode
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(alpha_me[i] - alpha_cl[i]) < 1e-5 * std::max(1.0, peak));
}

TEST_CASE("resonator collapse of a bare mode reduces to sqrt(kappa) a") {
  // Single harmonic coordinate solved through the library path.
  Coordinate res;
  res.index = 0;
  res.kind = CoordinateKind::Extended;
  res.quadratics = {{223.0, 0.0}};
  double ec = 0.065;
  ModeBasis basis = default_basis(res, ec, 30);
  EigenSystem es = diagonalize_truncate(build_bare_mode(res, ec, basis), 0, 12);
  es.modes = {0};
  // relabel as a 1-mode "readout" system so <0|n|1> is the reference
  double kappa_ghz = 0.1;
  double omega = es.energies[1];
  CollapseOp d = build_resonator_collapse(es, "n0", kappa_ghz, omega, 0.0);
  double kappa_rate = two_pi * kappa_ghz;
  for (int k = 0; k + 1 < 10; ++k) {
    double expect = std::sqrt(kappa_rate * (k + 1));
    CHECK(std::abs(d.op(k, k + 1)) == doctest::Approx(expect).epsilon(1e-5));
  }
  // Off-ladder elements vanish for a linear mode.
  CHECK(std::abs(d.op(0, 5)) < 1e-6);
}

TEST_CASE("iterative truncation of an undriven lossless ground state is trivial") {
  Coordinate res;
  res.index = 0;
  res.kind = CoordinateKind::Extended;
  res.quadratics = {{100.0, 0.0}};
  EigenSystem es = diagonalize_truncate(build_bare_mode(res, 0.05, default_basis(res, 0.05, 20)),
                                        0, 10);
  es.modes = {0};
  ActiveSpace space = iterative_truncation(es, {}, {}, {}, {0}, 5.0);
  CHECK(space.states == std::vector<int>{0});
}

TEST_CASE("SSE on an idle ground state records pure zero-mean noise") {
  const int nfock = 4;
  Vec e(nfock);
  for (int k = 0; k < nfock; ++k) e[k] = 6.0 * k;
  CMat a = lowering_gauged(nfock);
  CMat l = std::sqrt(two_pi * 0.1) * a;
  CVec psi0 = CVec::Zero(nfock);
  psi0[0] = 1.0;
  SseConfig cfg;
  cfg.window_ns = 10.0;
  cfg.n_traj = 200;
  cfg.seed = 42;
  int n_bins = static_cast<int>(cfg.window_ns / cfg.record_bin_ns);
  std::vector<Cplx> weights(n_bins, Cplx(1.0, 0.0));
  TrajectoryBatch batch = sse_trajectories(e, {}, l, psi0, 0, weights, cfg);
  // Integrated record at the final mark: mean ~ 0, per-traj variance ~ window.
  Cplx mean(0, 0);
  for (auto& marks : batch.weighted_marks) mean += marks.back();
  mean /= static_cast<double>(cfg.n_traj);
  double se = std::sqrt(cfg.window_ns / 2.0 / cfg.n_traj);
  CHECK(std::abs(mean.real()) < 4 * se);
  CHECK(std::abs(mean.imag()) < 4 * se);
  // Ground state stays put.
  CHECK(batch.mean_populations(batch.mean_populations.rows() - 1, 0) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("SSE ensemble converges to the master equation at 1/sqrt(N)") {
  const int nfock = 8;
  const double f_r = 6.0, kappa_ghz = 0.05;
  Vec e(nfock);
  for (int k = 0; k < nfock; ++k) e[k] = f_r * k;
  CMat a = lowering_gauged(nfock);
  CMat n_op = charge_gauged(nfock, 0.9);
  CMat l = std::sqrt(two_pi * kappa_ghz) * a;
  DriveSpec drive;
  drive.envelope = DriveSpec::Envelope::Square;
  drive.duration_ns = 8.0;
  drive.freq_ghz = f_r;
  drive.amplitude_ghz = 0.03;

  CMat rho0 = CMat::Zero(nfock, nfock);
  rho0(0, 0) = 1.0;
  std::vector<double> grid = grid_to(8.0, 0.5);
  std::vector<Vec> me_pops;
  evolve_lindblad(e, {{drive, n_op}}, {{l, "res"}}, rho0, grid,
                  [&](double, const CMat& rho) { me_pops.push_back(rho.diagonal().real()); });

  CVec psi0 = CVec::Zero(nfock);
  psi0[0] = 1.0;
  SseConfig cfg;
  cfg.window_ns = 8.0;
  cfg.sample_dt_ns = 0.5;
  cfg.seed = 7;
  int n_bins = static_cast<int>(cfg.window_ns / cfg.record_bin_ns);
  std::vector<Cplx> weights(n_bins, Cplx(1.0, 0.0));

  // A heterodyne-monitored linear cavity stays in a coherent state with a
  // deterministic amplitude, so the ensemble mean exposes the integrator bias
  // directly.
  SseConfig c = cfg;
  c.n_traj = 200;
  c.seed = 11;
  TrajectoryBatch batch = sse_trajectories(e, {{drive, n_op}}, l, psi0, 0, weights, c);
  double err = 0.0;
  int count = 0;
  for (std::size_t s = 0; s < grid.size(); ++s)
    for (int k = 0; k < nfock; ++k) {
      err += std::pow(batch.mean_populations(s, k) - me_pops[s][k], 2);
      ++count;
    }
  CHECK(std::sqrt(err / count) < 1e-4);
}

TEST_CASE("SSE ensemble of a monitored driven qubit converges at 1/sqrt(N)") {
  // Resonantly driven two-level emitter under heterodyne detection of its
  // fluorescence: measurement backaction makes trajectories diffuse, and the
  // ensemble mean converges to the master equation as 1/sqrt(N).
  Vec e(2);
  e << 0.0, 4.0;
  CMat sx(2, 2);
  sx << 0, 1, 1, 0;
  CMat sm = CMat::Zero(2, 2);
  sm(0, 1) = 1.0;
  double gamma = 0.25;  // 1/ns
  CMat l = std::sqrt(gamma) * sm;
  DriveSpec drive;
  drive.envelope = DriveSpec::Envelope::Square;
  drive.duration_ns = 12.0;
  drive.freq_ghz = 4.0;
  drive.amplitude_ghz = 0.12;

  CMat rho0 = CMat::Zero(2, 2);
  rho0(0, 0) = 1.0;
  std::vector<double> grid = grid_to(12.0, 0.5);
  std::vector<Vec> me_pops;
  evolve_lindblad(e, {{drive, sx}}, {{l, "qubit"}}, rho0, grid,
                  [&](double, const CMat& rho) { me_pops.push_back(rho.diagonal().real()); });

  CVec psi0(2);
  psi0 << 1.0, 0.0;
  SseConfig cfg;
  cfg.window_ns = 12.0;
  cfg.sample_dt_ns = 0.5;
  int n_bins = static_cast<int>(cfg.window_ns / cfg.record_bin_ns);
  std::vector<Cplx> weights(n_bins, Cplx(1.0, 0.0));
  auto rms_error = [&](int n_traj, unsigned long long seed) {
    SseConfig c = cfg;
    c.n_traj = n_traj;
    c.seed = seed;
    TrajectoryBatch batch = sse_trajectories(e, {{drive, sx}}, l, psi0, 0, weights, c);
    double err = 0.0;
    int count = 0;
    for (std::size_t s = 0; s < grid.size(); ++s)
      for (int k = 0; k < 2; ++k) {
        err += std::pow(batch.mean_populations(s, k) - me_pops[s][k], 2);
        ++count;
      }
    return std::sqrt(err / count);
  };
  double err200 = rms_error(200, 21);
  double err800 = rms_error(800, 22);
  CHECK(err800 < err200);
  CHECK(err800 < 0.75 * err200);  // expect ~0.5 under 1/sqrt(N)
  CHECK(err800 < 0.02);
}
