#include "armsim/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace armsim {

namespace {

struct Rect {
  std::vector<double> center;  // unit-cube coordinates
  std::vector<int> level;      // per-dimension trisection count
  double value = 0.0;

  double size(SearchSpace::Mode mode) const {
    if (mode == SearchSpace::Mode::DirectL) {
      int jmin = *std::min_element(level.begin(), level.end());
      return 0.5 * std::pow(3.0, -jmin);
    }
    double sum = 0.0;
    for (int j : level) sum += std::pow(3.0, -2.0 * j);
    return 0.5 * std::sqrt(sum);
  }
};

}  // namespace

DirectResult direct_optimize(const SearchSpace& space) {
  const int dim = static_cast<int>(space.bounds.size());
  if (dim < 1) throw OptimizeError("search space has no dimensions");
  for (auto& [lo, hi] : space.bounds)
    if (!(lo < hi)) throw OptimizeError("search bounds must satisfy low < high");
  if (space.budget < 2 * dim + 1)
    throw OptimizeError("budget must be at least 2*dim + 1 evaluations");

  DirectResult result;
  auto denormalize = [&](const std::vector<double>& u) {
    std::vector<double> x(dim);
    for (int i = 0; i < dim; ++i)
      x[i] = space.bounds[i].first + u[i] * (space.bounds[i].second - space.bounds[i].first);
    return x;
  };
  auto evaluate = [&](const std::vector<double>& u) {
    std::vector<double> x = denormalize(u);
    double v = space.objective(x);
    result.trace.emplace_back(x, v);
    ++result.evaluations;
    if (result.evaluations == 1 || v < result.best_value) {
      result.best_value = v;
      result.best_point = x;
    }
    return v;
  };

  std::vector<Rect> rects;
  Rect root;
  root.center.assign(dim, 0.5);
  root.level.assign(dim, 0);
  root.value = evaluate(root.center);
  rects.push_back(root);

  while (result.evaluations + 2 <= space.budget) {
    const int evals_at_start = result.evaluations;
    // Group rectangles by size; keep the best per group.
    std::map<double, int> group_best;  // size -> rect index with lowest value
    for (int r = 0; r < static_cast<int>(rects.size()); ++r) {
      double s = rects[r].size(space.mode);
      auto it = group_best.find(s);
      if (it == group_best.end() || rects[r].value < rects[it->second].value)
        group_best[s] = r;
    }
    std::vector<std::pair<double, int>> groups(group_best.begin(), group_best.end());

    // Potentially optimal set via pairwise slope bounds and the epsilon test.
    std::vector<int> selected;
    double fmin = result.best_value;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      double dk = groups[k].first;
      double fk = rects[groups[k].second].value;
      double maxlo = -std::numeric_limits<double>::infinity();
      double minhi = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < groups.size(); ++j) {
        if (j == k) continue;
        double dj = groups[j].first;
        double fj = rects[groups[j].second].value;
        if (dj < dk)
          maxlo = std::max(maxlo, (fk - fj) / (dk - dj));
        else
          minhi = std::min(minhi, (fj - fk) / (dj - dk));
      }
      if (maxlo > minhi) continue;
      if (std::isfinite(minhi)) {
        double bound = fk - minhi * dk;
        double target = fmin - space.eps * std::abs(fmin);
        if (bound > target) continue;
      }
      selected.push_back(groups[k].second);
    }
    if (selected.empty()) selected.push_back(groups.back().second);

    // Divide each selected rectangle.
    for (int rid : selected) {
      if (result.evaluations >= space.budget) break;
      int jmin = *std::min_element(rects[rid].level.begin(), rects[rid].level.end());
      std::vector<int> long_dims;
      for (int i = 0; i < dim; ++i)
        if (rects[rid].level[i] == jmin) long_dims.push_back(i);
      if (space.mode == SearchSpace::Mode::DirectL && long_dims.size() > 1)
        long_dims.resize(1);  // one side at a time, lowest index

      double delta = std::pow(3.0, -(jmin + 1));
      struct Probe {
        int dim;
        double f_plus, f_minus;
        std::vector<double> c_plus, c_minus;
      };
      std::vector<Probe> probes;
      for (int i : long_dims) {
        if (result.evaluations + 2 > space.budget) break;
        Probe p;
        p.dim = i;
        p.c_plus = rects[rid].center;
        p.c_plus[i] += delta;
        p.c_minus = rects[rid].center;
        p.c_minus[i] -= delta;
        p.f_plus = evaluate(p.c_plus);
        p.f_minus = evaluate(p.c_minus);
        probes.push_back(std::move(p));
      }
      // Divide the dimension with the best probe first.
      std::sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) {
        return std::min(a.f_plus, a.f_minus) < std::min(b.f_plus, b.f_minus);
      });
      for (const Probe& p : probes) {
        rects[rid].level[p.dim] += 1;
        Rect plus;
        plus.center = p.c_plus;
        plus.level = rects[rid].level;
        plus.value = p.f_plus;
        Rect minus;
        minus.center = p.c_minus;
        minus.level = rects[rid].level;
        minus.value = p.f_minus;
        rects.push_back(std::move(plus));
        rects.push_back(std::move(minus));
      }
    }
    if (result.evaluations == evals_at_start) break;  // budget too tight to divide
  }
  return result;
}

Scan1dResult maximize_1d(const std::function<double(double)>& objective, double lo, double hi,
                         double xtol, int max_evals) {
  if (!(lo < hi)) throw OptimizeError("maximize_1d needs lo < hi");
  Scan1dResult result;
  int evals = 0;
  auto f = [&](double x) {
    ++evals;
    return objective(x);
  };
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  double fl = f(lo), fh = f(hi);
  if (std::max(f1, f2) < std::max(fl, fh))
    throw OptimizeError("no interior maximum in the bracket");
  while (b - a > xtol && evals < max_evals) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  // Parabolic finish through the bracket midpoints.
  double xm = 0.5 * (a + b), fm = f(xm);
  double xs[3] = {a, xm, b};
  double fs[3] = {f(a), fm, f(b)};
  double denom = (xs[1] - xs[0]) * (fs[1] - fs[2]) - (xs[1] - xs[2]) * (fs[1] - fs[0]);
  double best_x = xm, best_f = fm;
  if (std::abs(denom) > 1e-300) {
    double num = (xs[1] - xs[0]) * (xs[1] - xs[0]) * (fs[1] - fs[2]) -
                 (xs[1] - xs[2]) * (xs[1] - xs[2]) * (fs[1] - fs[0]);
    double cand = xs[1] - 0.5 * num / denom;
    if (cand > lo && cand < hi) {
      double fc = f(cand);
      if (fc > best_f) {
        best_f = fc;
        best_x = cand;
      }
    }
  }
  for (int i = 0; i < 3; ++i)
    if (fs[i] > best_f) best_f = fs[i], best_x = xs[i];
  result.best_x = best_x;
  result.best_value = best_f;
  result.evaluations = evals;
  return result;
}

}  // namespace armsim
