#include <doctest.h>

#include <random>

#include "armsim/linalg.hpp"

using namespace armsim;

namespace {

Mat random_sym(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST_CASE("eigh solves a 2x2 analytically") {
  Mat a(2, 2);
  a << 1.0, 2.0, 2.0, 1.0;
  EighReal sol = eigh(a);
  CHECK(sol.values[0] == doctest::Approx(-1.0));
  CHECK(sol.values[1] == doctest::Approx(3.0));
  CHECK((a * sol.vectors.col(0) + sol.vectors.col(0)).norm() < 1e-12);
}

TEST_CASE("eigh subset matches full solve") {
  Mat a = random_sym(40, 7);
  EighReal full = eigh(a);
  EighReal part = eigh(a, 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(part.values[k] == doctest::Approx(full.values[k]).epsilon(1e-12));
    CHECK((a * part.vectors.col(k) - part.values[k] * part.vectors.col(k)).norm() < 1e-10);
  }
}

TEST_CASE("complex hermitian eigh") {
  CMat a(2, 2);
  a << Cplx(2, 0), Cplx(0, -1), Cplx(0, 1), Cplx(2, 0);
  EighCplx sol = eigh(a);
  CHECK(sol.values[0] == doctest::Approx(1.0));
  CHECK(sol.values[1] == doctest::Approx(3.0));
}

TEST_CASE("HermOp complex round trip and rotation") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  CMat m(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m(i, j) = Cplx(g(rng), g(rng));
  CMat h = 0.5 * (m + m.adjoint());
  HermOp op = HermOp::FromComplex(h);
  CHECK((op.to_complex() - h).norm() < 1e-12);

  Mat v = random_sym(6, 11);
  HermOp rotated = op.rotated(v);
  CMat expect = v.transpose().cast<Cplx>() * h * v.cast<Cplx>();
  CHECK((rotated.to_complex() - expect).norm() < 1e-10);
}

TEST_CASE("kron-structured rotation matches dense kron") {
  const int na = 4, nb = 3, k = 5;
  Mat a = random_sym(na, 21);
  Mat b = random_sym(nb, 22);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  Mat v(na * nb, k);
  for (int i = 0; i < na * nb; ++i)
    for (int j = 0; j < k; ++j) v(i, j) = g(rng);

  Mat eye_b = Mat::Identity(nb, nb);
  Mat eye_a = Mat::Identity(na, na);
  CHECK((rotate_kron_left(a, v, na, nb) - v.transpose() * kron(a, eye_b) * v).norm() < 1e-10);
  CHECK((rotate_kron_right(b, v, na, nb) - v.transpose() * kron(eye_a, b) * v).norm() < 1e-10);

  CMat vc = v.cast<Cplx>() * Cplx(0.8, 0.6);
  CMat left = rotate_kron_left(a, vc, na, nb);
  CMat expect = vc.adjoint() * kron(a, eye_b).cast<Cplx>() * vc;
  CHECK((left - expect).norm() < 1e-10);
}

TEST_CASE("eigenvector gauge fixing is idempotent and sign-stable") {
  Mat a = random_sym(12, 5);
  EighReal sol = eigh(a);
  Mat v = sol.vectors;
  fix_eigenvector_gauge(v);
  Mat flipped = -v;
  fix_eigenvector_gauge(flipped);
  CHECK((flipped - v).norm() == 0.0);
}
