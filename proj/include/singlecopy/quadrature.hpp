#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "singlecopy/error.hpp"

namespace singlecopy::quad {

struct Rule {
  std::vector<double> nodes;   // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n.
inline Rule gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      // p1 = P_n(x), p0 = P_{n-1}(x)
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double wgt = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = wgt;
    r.weights[n - 1 - i] = wgt;
  }
  return r;
}

inline const Rule& gl64() {
  static const Rule rule = gauss_legendre(64);
  return rule;
}

inline const Rule& gl16() {
  static const Rule rule = gauss_legendre(16);
  return rule;
}

inline double apply(const Rule& rule, const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(c + h * rule.nodes[i]);
  return s * h;
}

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

/// Globally adaptive Gauss-Legendre: a panel is accepted when its 16-point
/// estimate agrees with the sum over its two halves. Throws AccuracyError
/// if `max_panels` is exhausted first.
inline AdaptiveResult adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                                         double abs_tol, int max_panels = 1 << 14) {
  struct Panel {
    double a, b, whole;
  };
  const Rule& rule = gl16();
  std::vector<Panel> stack{{a, b, apply(rule, f, a, b)}};
  AdaptiveResult res;
  int used = 1;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double left = apply(rule, f, p.a, m);
    const double right = apply(rule, f, m, p.b);
    const double err = std::abs(left + right - p.whole);
    const double local_tol = abs_tol * (p.b - p.a) / (b - a);
    if (err <= local_tol || used >= max_panels) {
      res.value += left + right;
      res.error += err;
      ++res.panels;
      continue;
    }
    used += 2;
    stack.push_back({p.a, m, left});
    stack.push_back({m, p.b, right});
  }
  if (res.error > abs_tol) throw AccuracyError("adaptive quadrature did not converge", res.error);
  return res;
}

} // namespace singlecopy::quad
