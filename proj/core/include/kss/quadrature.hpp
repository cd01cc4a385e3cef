#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "kss/overlap.hpp"

namespace kss {

struct GaussLegendreRule {
  std::vector<double> nodes;    // ascending, in (-1, 1)
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
GaussLegendreRule gauss_legendre(int n);

enum class Substitution {
  kNone,    // Gauss-Legendre directly in r
  kCosine,  // r = cos(theta), Gauss-Legendre in theta
};

struct QuadratureRule {
  int nodes = 64;
  Substitution substitution = Substitution::kCosine;
  // Double the node count until successive estimates agree to rel_tol.
  bool adaptive = true;
  double rel_tol = 1e-4;
  int max_nodes = 1024;
};

/// A quadrature node in overlap space; `weight` already contains the
/// substitution Jacobian, so  int_a^b f(r) dr ~= sum weight * f(overlap).
struct OverlapNode {
  Overlap overlap;
  double weight = 0.0;
};

std::vector<OverlapNode> overlap_nodes(double a, double b,
                                       Substitution substitution, int n);

struct QuadratureResult {
  double value = 0.0;
  int nodes = 0;
  bool converged = false;
  // (node, integrand value) from the final pass, ordered by increasing r.
  std::vector<std::pair<OverlapNode, double>> samples;
};

/// Integrates f over r in [a, b] following `rule`. With kCosine the endpoints
/// may be -1 and 1; nodes never land on them.
QuadratureResult integrate_overlap(
    double a, double b, const QuadratureRule& rule,
    const std::function<double(const Overlap&)>& f);

}  // namespace kss
