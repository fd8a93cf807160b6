#include <doctest.h>

#include <cmath>
#include <random>

#include "armsim/metrics.hpp"

using namespace armsim;

namespace {

// Random trace-preserving channel from a Stinespring isometry (QR of a
// Ginibre matrix), m Kraus operators on dimension d.
KrausSet random_channel(int d, int m, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMat ginibre(d * m, d);
  for (int i = 0; i < d * m; ++i)
    for (int j = 0; j < d; ++j) ginibre(i, j) = Cplx(g(rng), g(rng));
  Eigen::HouseholderQR<CMat> qr(ginibre);
  CMat q = qr.householderQ() * CMat::Identity(d * m, d);
  KrausSet k;
  for (int block = 0; block < m; ++block) k.ops.push_back(q.block(block * d, 0, d, d));
  return k;
}

CMat apply_channel(const KrausSet& k, const CMat& rho) {
  CMat out = CMat::Zero(rho.rows(), rho.cols());
  for (const auto& e : k.ops) out += e * rho * e.adjoint();
  return out;
}

}  // namespace

TEST_CASE("Eq.-3 trivial values: F(U_CZ) = 1 and F(identity) = 0.4") {
  CHECK(propagator_fidelity(cz_unitary()).fidelity == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(propagator_fidelity(CMat::Identity(4, 4), false).fidelity ==
        doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("Eq.-3 fidelity is invariant under a global phase") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  CMat t(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t(i, j) = 0.4 * Cplx(g(rng), g(rng));
  t += 0.7 * cz_unitary();
  FidelityReport a = propagator_fidelity(t);
  FidelityReport b = propagator_fidelity(std::polar(1.0, 1.234) * t);
  CHECK(a.fidelity == doctest::Approx(b.fidelity).epsilon(1e-12));
}

TEST_CASE("virtual-Z optimization never decreases the fidelity") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    CMat t(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) t(i, j) = Cplx(g(rng), g(rng)) * 0.5;
    double raw = propagator_fidelity(t, false).fidelity;
    double opt = propagator_fidelity(t, true).fidelity;
    CHECK(opt >= raw - 1e-12);
  }
}

TEST_CASE("identity channel tomography returns a single identity Kraus") {
  auto apply = [](const CMat& rho) { return rho; };
  KrausSet k = process_tomography(apply, 2);
  REQUIRE(k.ops.size() == 1);
  CMat e = k.ops[0];
  // fix the global phase against (0,0)
  e *= std::conj(e(0, 0)) / std::abs(e(0, 0));
  CHECK((e - CMat::Identity(2, 2)).norm() < 1e-10);
  CHECK(k.completeness_defect < 1e-10);
}

TEST_CASE("amplitude damping tomography matches the closed form") {
  double p = 0.1;
  CMat e0 = CMat::Zero(2, 2), e1 = CMat::Zero(2, 2);
  e0(0, 0) = 1.0;
  e0(1, 1) = std::sqrt(1.0 - p);
  e1(0, 1) = std::sqrt(p);
  KrausSet target;
  target.ops = {e0, e1};
  auto apply = [&](const CMat& rho) { return apply_channel(target, rho); };
  KrausSet k = process_tomography(apply, 2);
  REQUIRE(k.ops.size() == 2);
  // Compare channels through their action (Kraus sets are gauge-ambiguous).
  for (int s = 0; s < 4; ++s) {
    CMat rho = CMat::Zero(2, 2);
    rho(s % 2, s / 2) = 1.0;
    CHECK((apply_channel(k, rho) - apply_channel(target, rho)).norm() < 1e-8);
  }
  // The reconstructed operators match the closed form up to the expected
  // sqrt(p) off-diagonal structure.
  double off = 0.0;
  for (const auto& e : k.ops) off = std::max(off, std::abs(e(0, 1)));
  CHECK(off == doctest::Approx(std::sqrt(p)).epsilon(1e-8));
}

TEST_CASE("two-qubit amplitude damping on one qubit reconstructs to 1e-8") {
  double p = 0.07;
  CMat e0 = CMat::Zero(2, 2), e1 = CMat::Zero(2, 2);
  e0(0, 0) = 1.0;
  e0(1, 1) = std::sqrt(1.0 - p);
  e1(0, 1) = std::sqrt(p);
  KrausSet target;
  target.ops = {kron(e0, CMat::Identity(2, 2)), kron(e1, CMat::Identity(2, 2))};
  auto apply = [&](const CMat& rho) { return apply_channel(target, rho); };
  KrausSet k = process_tomography(apply, 4);
  for (int trial = 0; trial < 6; ++trial) {
    std::mt19937_64 rng(trial);
    std::normal_distribution<double> g;
    CVec v(4);
    for (int i = 0; i < 4; ++i) v[i] = Cplx(g(rng), g(rng));
    v.normalize();
    CMat rho = v * v.adjoint();
    CHECK((apply_channel(k, rho) - apply_channel(target, rho)).norm() < 1e-8);
  }
}

TEST_CASE("Eq.-5 trivial values") {
  KrausSet cz;
  cz.ops = {cz_unitary()};
  CHECK(kraus_fidelity(cz, cz_unitary(), 4, false).fidelity ==
        doctest::Approx(1.0).epsilon(1e-12));

  KrausSet identity;
  identity.ops = {CMat::Identity(2, 2)};
  CHECK(kraus_fidelity(identity, xhalf_unitary(), 2, false).fidelity ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("tomography round trip reproduces Eq.-5 fidelity to 1e-8") {
  for (unsigned seed : {3u, 4u}) {
    KrausSet channel = random_channel(4, 3, seed);
    double direct = kraus_fidelity(channel, cz_unitary(), 4, false).fidelity;
    auto apply = [&](const CMat& rho) { return apply_channel(channel, rho); };
    KrausSet rebuilt = process_tomography(apply, 4);
    double via_tomo = kraus_fidelity(rebuilt, cz_unitary(), 4, false).fidelity;
    CHECK(via_tomo == doctest::Approx(direct).epsilon(1e-8));
  }
}

TEST_CASE("trace-preserving channels never exceed unit average fidelity") {
  for (unsigned seed : {11u, 12u, 13u}) {
    KrausSet channel = random_channel(4, 2, seed);
    FidelityReport r = kraus_fidelity(channel, cz_unitary(), 4, true);
    CHECK(r.fidelity <= 1.0 + 1e-9);
    CHECK(r.leakage == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("identical batches give SNR 0 and an assignment error of one half") {
  TrajectoryBatch b0, b1;
  b0.true_label = 0;
  b1.true_label = 1;
  b0.mark_times_ns = {1.0, 2.0};
  b1.mark_times_ns = {1.0, 2.0};
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int s = 0; s < 150; ++s) {
    std::vector<Cplx> marks = {Cplx(g(rng), g(rng)), Cplx(g(rng), g(rng))};
    b0.weighted_marks.push_back(marks);
    b1.weighted_marks.push_back(marks);
  }
  ReadoutReport r = integrate_readout(b0, b1);
  CHECK(r.snr.back() < 1e-9);
  CHECK(r.assignment_error.back() == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("fewer than 100 shots per class is refused") {
  TrajectoryBatch b0, b1;
  b0.mark_times_ns = b1.mark_times_ns = {1.0};
  for (int s = 0; s < 50; ++s) {
    b0.weighted_marks.push_back({Cplx(0, 0)});
    b1.weighted_marks.push_back({Cplx(1, 0)});
  }
  CHECK_THROWS_AS(integrate_readout(b0, b1), MetricsError);
}
