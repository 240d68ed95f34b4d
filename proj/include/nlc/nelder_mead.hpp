// Derivative-free simplex minimization.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace nlc {

struct NelderMeadOptions {
  int max_evaluations{400};
  double f_tolerance{1e-10};
  double x_tolerance{1e-8};
  // optional early exit once the objective falls below this value
  double target{-INFINITY};
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value{};
  int evaluations{};
  bool converged{};
  std::vector<double> trace;  // best value after each iteration
};

inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                                    const NelderMeadOptions& opt = {}) {
  const auto n = x0.size();
  if (steps.size() != n) throw std::invalid_argument("step vector size mismatch");
  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> val(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) pts[i + 1](i) += steps(i);

  NelderMeadResult r;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++r.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : INFINITY;
  };
  for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) val[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  auto sort = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return val[a] < val[b]; });
  };

  while (true) {
    sort();
    const auto best = order.front(), worst = order.back(), second = order[n - 1];
    r.trace.push_back(val[best]);
    double xspread = 0.0;
    for (const auto& p : pts) xspread = std::max(xspread, (p - pts[best]).cwiseAbs().maxCoeff());
    if (val[best] <= opt.target || (std::abs(val[worst] - val[best]) <= opt.f_tolerance &&
                                    xspread <= opt.x_tolerance)) {
      r.converged = true;
      break;
    }
    if (r.evaluations >= opt.max_evaluations) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (auto i : order)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr < val[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr < val[worst];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid)) : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : val[worst])) {
      pts[worst] = xc;
      val[worst] = fc;
      continue;
    }
    for (auto i : order) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      val[i] = eval(pts[i]);
    }
  }
  sort();
  r.x = pts[order.front()];
  r.value = val[order.front()];
  return r;
}

}  // namespace nlc
