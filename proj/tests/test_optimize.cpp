#include <doctest.h>

#include <cmath>

#include "armsim/optimize.hpp"

using namespace armsim;

namespace {

double branin(const std::vector<double>& x) {
  const double a = 1.0, b = 5.1 / (4.0 * M_PI * M_PI), c = 5.0 / M_PI;
  const double r = 6.0, s = 10.0, t = 1.0 / (8.0 * M_PI);
  double term = x[1] - b * x[0] * x[0] + c * x[0] - r;
  return a * term * term + s * (1.0 - t) * std::cos(x[0]) + s;
}

}  // namespace

TEST_CASE("DIRECT finds a 1D quadratic minimum") {
  for (auto mode : {SearchSpace::Mode::Direct, SearchSpace::Mode::DirectL}) {
    SearchSpace space;
    space.bounds = {{0.0, 1.0}};
    space.objective = [](const std::vector<double>& x) {
      return (x[0] - 0.3) * (x[0] - 0.3);
    };
    space.budget = 50;
    space.mode = mode;
    DirectResult r = direct_optimize(space);
    CHECK(std::abs(r.best_point[0] - 0.3) < 0.01);
    CHECK(r.evaluations <= 50);
  }
}

TEST_CASE("DIRECT reaches the Branin optimum within 1e-2 in 300 evaluations") {
  for (auto mode : {SearchSpace::Mode::Direct, SearchSpace::Mode::DirectL}) {
    SearchSpace space;
    space.bounds = {{-5.0, 10.0}, {0.0, 15.0}};
    space.objective = branin;
    space.budget = 300;
    space.mode = mode;
    DirectResult r = direct_optimize(space);
    CHECK(r.best_value < 0.397887 + 1e-2);
    CHECK(r.evaluations <= 300);
  }
}

TEST_CASE("DIRECT stays inside bounds and is deterministic") {
  SearchSpace space;
  space.bounds = {{-2.0, 3.0}, {1.0, 4.0}};
  space.objective = [](const std::vector<double>& x) {
    return std::sin(3 * x[0]) + 0.3 * x[1] * x[1];
  };
  space.budget = 120;
  DirectResult a = direct_optimize(space);
  DirectResult b = direct_optimize(space);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].second == b.trace[i].second);
    for (int d = 0; d < 2; ++d) {
      CHECK(a.trace[i].first[d] == b.trace[i].first[d]);
      CHECK(a.trace[i].first[d] >= space.bounds[d].first);
      CHECK(a.trace[i].first[d] <= space.bounds[d].second);
    }
  }
}

TEST_CASE("objective failures propagate with the point") {
  SearchSpace space;
  space.bounds = {{0.0, 1.0}};
  space.objective = [](const std::vector<double>& x) -> double {
    if (x[0] < 0.2) throw std::runtime_error("model blew up");
    return x[0];
  };
  space.budget = 40;
  CHECK_THROWS_AS(direct_optimize(space), std::runtime_error);
}

TEST_CASE("1D maximizer locates a smooth peak") {
  auto f = [](double x) { return -std::pow(x - 1.7, 2) + 4.0; };
  Scan1dResult r = maximize_1d(f, 0.0, 3.0, 1e-6);
  CHECK(std::abs(r.best_x - 1.7) < 1e-4);
  CHECK(r.best_value == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("1D maximizer rejects a bracket without an interior peak") {
  auto f = [](double x) { return x; };
  CHECK_THROWS_AS(maximize_1d(f, 0.0, 1.0, 1e-6), OptimizeError);
}
