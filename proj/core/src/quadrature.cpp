#include "kss/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kss/errors.hpp"

namespace kss {

void require_regular(const Overlap& overlap, const char* where) {
  if (overlap.singular()) {
    throw SingularOverlapError(std::string(where) +
                               ": overlap r=" + std::to_string(overlap.r) +
                               " is within 1e-12 of +-1");
  }
}

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  GaussLegendreRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

std::vector<OverlapNode> overlap_nodes(double a, double b,
                                       Substitution substitution, int n) {
  if (!(a < b) || a < -1.0 || b > 1.0) {
    throw DomainError("overlap_nodes: need -1 <= a < b <= 1");
  }
  const GaussLegendreRule gl = gauss_legendre(n);
  std::vector<OverlapNode> out;
  out.reserve(static_cast<std::size_t>(n));
  if (substitution == Substitution::kNone) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (int i = 0; i < n; ++i) {
      const double r = mid + half * gl.nodes[static_cast<std::size_t>(i)];
      out.push_back({Overlap::from_value(r),
                     half * gl.weights[static_cast<std::size_t>(i)]});
    }
    return out;
  }
  // theta runs from acos(b) (small) to acos(a) (large); iterate so that r
  // increases.
  const double theta_lo = std::acos(b);
  const double theta_hi = std::acos(a);
  const double half = 0.5 * (theta_hi - theta_lo);
  const double mid = 0.5 * (theta_hi + theta_lo);
  for (int i = n - 1; i >= 0; --i) {
    const double theta = mid + half * gl.nodes[static_cast<std::size_t>(i)];
    out.push_back({Overlap::from_angle(theta),
                   half * gl.weights[static_cast<std::size_t>(i)] *
                       std::sin(theta)});
  }
  return out;
}

QuadratureResult integrate_overlap(
    double a, double b, const QuadratureRule& rule,
    const std::function<double(const Overlap&)>& f) {
  if (rule.nodes < 1) throw DomainError("quadrature: nodes must be >= 1");
  QuadratureResult result;
  int n = rule.nodes;
  double previous = 0.0;
  for (;;) {
    const auto nodes = overlap_nodes(a, b, rule.substitution, n);
    result.samples.clear();
    result.samples.reserve(nodes.size());
    double sum = 0.0;
    for (const auto& node : nodes) {
      const double v = f(node.overlap);
      sum += node.weight * v;
      result.samples.emplace_back(node, v);
    }
    result.value = sum;
    result.nodes = n;
    if (!rule.adaptive) {
      result.converged = true;
      return result;
    }
    if (n != rule.nodes &&
        std::abs(sum - previous) <= rule.rel_tol * std::abs(sum)) {
      result.converged = true;
      return result;
    }
    if (2 * n > rule.max_nodes) {
      result.converged = (n != rule.nodes) &&
                         std::abs(sum - previous) <= rule.rel_tol * std::abs(sum);
      return result;
    }
    previous = sum;
    n *= 2;
  }
}

}  // namespace kss
