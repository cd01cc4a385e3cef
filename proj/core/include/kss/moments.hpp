#pragma once

#include <vector>

#include "kss/quadrature.hpp"
#include "kss/spectrum.hpp"

namespace kss {

/// Volume of the unit sphere S^{d-1} in R^d: 2 pi^{d/2} / Gamma(d/2).
double unit_sphere_volume(int ambient_dim);
double log_unit_sphere_volume(int ambient_dim);

struct MomentReport {
  double first_moment = 0.0;
  std::vector<double> equation_factors;  // sqrt(xi_k'(1) / xi_k(1))
  double volume_factor = 0.0;            // Vol(S^{N-K})
};

/// Expected number of zeros (K = N) or (N-K)-measure of the zero set (K < N):
/// Vol(S^{N-K}) prod_k sqrt(xi_k'(1) / xi_k(1)).
MomentReport expected_zero_measure(const SystemSpec& spec);

/// E chi_j = sqrt(2) Gamma((j+1)/2) / Gamma(j/2) and E chi_j^2 = j.
double chi_mean(int j);
double chi_sq_mean(int j);

/// (E J(M))^2 = prod_{k=0}^{K-1} (E chi_{N-k})^2 for a K x N standard
/// Gaussian matrix M.
double ej_squared(int sphere_dim, int equations);

/// Relative residual of Vol(S^N) E J(M) (2 pi)^{-K/2} = Vol(S^{N-K}), the
/// identity forced by linear equations (whose zero set is a great subsphere).
double volume_identity_residual(int sphere_dim, int equations);

/// Conditional variance deflation of the last gradient column,
/// lambda(r) = 1 - xi(1)/xi'(1) * xi'(r)^2 (1-r^2) / (xi(1)^2 - xi(r)^2).
/// Clamped to [0, 1] against rounding; SingularOverlapError at the poles.
double lambda_k(const MixedSpectrum& spectrum, double r);
double lambda_k(const MixedSpectrum& spectrum, const Overlap& overlap);

/// Phi(r) = (N - K + sum_k lambda_k(r)) / N.
double phi(const SystemSpec& spec, double r);
double phi(const SystemSpec& spec, const Overlap& overlap);

/// C_{N,K} = Vol(S^N) Vol(S^{N-1}) (2 pi)^{-K}.
double second_moment_constant(int sphere_dim, int equations);

struct VarianceBoundOptions {
  // Replace Phi by its upper bound 1.
  bool phi_as_one = false;
};

struct VarianceBound {
  double value = 0.0;  // bound on E Z^(2)([a, b])
  QuadratureResult quadrature;
};

/// r-space integrand of the Cauchy-Schwarz second-moment bound, without the
/// constant C_{N,K} N!/(N-K)!.
double variance_bound_integrand(const SystemSpec& spec, const Overlap& overlap,
                                bool phi_as_one = false);

/// Upper bound on E Z^(2)([a, b]) by Cauchy-Schwarz on the conditional
/// Jacobians. For K = N the integrand carries (1 - r^2)^{-1}; intervals
/// touching +-1 are refused (DomainError) unless the rule uses the cosine
/// substitution.
VarianceBound variance_upper_bound(const SystemSpec& spec, double a, double b,
                                   const QuadratureRule& rule,
                                   VarianceBoundOptions options = {});

/// 1 + 1/(N-1) + r^2 sqrt(N pi / 2): large-N bound on D(r) / (E J)^2.
double dbar_bound(int sphere_dim, double r);

/// Bound on E Z^(2)([a, b]) / (E Z)^2 obtained by replacing D(r)/(E J)^2 with
/// dbar_bound. Meant for windows around r = 0; for K = N it diverges at the
/// poles.
QuadratureResult dbar_ratio_bound(const SystemSpec& spec, double a, double b,
                                  const QuadratureRule& rule);

/// xi(r) = r^2 + (log p / p) r^p, the spectrum whose second moment blows up
/// when p grows doubly exponentially in N.
MixedSpectrum blowup_spectrum(int p);

struct BlowupPoint {
  double r = 0.0;
  double m1 = 0.0;           // ((1-r^2) / (1 - xi_1(r)^2/xi_1(1)^2))^{1/2}
  double l = 0.0;            // Phi_{N,N}(r) / (1 - r^2)
  double lower_bound = 0.0;  // (4 N (1 - r^2))^{-1}
  bool holds = false;        // m1 * l >= lower_bound
};

/// Evaluates the blow-up growth inequality on `grid_points` interior points
/// of (1/2, 1 - 2 log p / p) with xi_1 = blowup_spectrum(p), xi_k = t^2
/// otherwise, K = N.
std::vector<BlowupPoint> blowup_diagnostic(int p, int sphere_dim,
                                           int grid_points);

}  // namespace kss
