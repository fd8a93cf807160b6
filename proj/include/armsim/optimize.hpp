#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace armsim {

struct SearchSpace {
  std::vector<std::pair<double, double>> bounds;  // low < high per dimension
  std::function<double(const std::vector<double>&)> objective;  // minimized
  int budget = 150;
  enum class Mode { Direct, DirectL } mode = Mode::DirectL;
  double eps = 1e-4;  // potential-optimality improvement parameter
};

struct DirectResult {
  std::vector<double> best_point;
  double best_value = 0.0;
  int evaluations = 0;
  std::vector<std::pair<std::vector<double>, double>> trace;  // evaluation order
};

// Deterministic dividing-rectangles global minimization over the bound box.
// Potentially optimal rectangles come from the lower convex hull of
// (size, value); the locally-biased variant measures size by the longest side
// and divides one side at a time.
DirectResult direct_optimize(const SearchSpace& space);

struct Scan1dResult {
  double best_x = 0.0;
  double best_value = 0.0;
  int evaluations = 0;
};

// Golden-section maximization of a unimodal objective with a parabolic
// finishing step. Throws when the initial bracket holds no interior maximum.
Scan1dResult maximize_1d(const std::function<double(double)>& objective, double lo, double hi,
                         double xtol, int max_evals = 60);

struct OptimizeError : std::runtime_error {
  explicit OptimizeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace armsim
