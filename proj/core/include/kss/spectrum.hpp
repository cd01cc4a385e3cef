#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "kss/overlap.hpp"

namespace kss {

/// One term a_p^2 t^p of a covariance polynomial.
struct SpectrumTerm {
  int degree = 2;
  double weight = 0.0;  // a_p^2, a variance, never a_p itself
};

/// Covariance polynomial xi(t) = sum_p a_p^2 t^p of one random equation,
/// stored sparsely so that very large degrees stay cheap.
///
/// Invariants (checked on construction, DomainError otherwise): every degree
/// is >= 2 and distinct, every weight is >= 0, and at least one weight is
/// positive. Terms are kept sorted by degree.
class MixedSpectrum {
 public:
  explicit MixedSpectrum(std::vector<SpectrumTerm> terms);

  /// xi(t) = weight * t^degree.
  static MixedSpectrum monomial(int degree, double weight = 1.0);

  const std::vector<SpectrumTerm>& terms() const { return terms_; }
  int max_degree() const { return terms_.back().degree; }

  /// xi, xi' or xi'' at t (order 0, 1, 2). Requires |t| <= 1.
  double xi(double t, int order = 0) const;

  /// xi(t) / xi(1).
  double nu(double t) const;

  /// xi(1) - xi(r) and xi(1) + xi(r), each without cancellation near the
  /// poles.
  double gap_minus(const Overlap& overlap) const;
  double gap_plus(const Overlap& overlap) const;

  /// xi(1)^2 - xi(r)^2.
  double pair_determinant(const Overlap& overlap) const {
    return gap_minus(overlap) * gap_plus(overlap);
  }

  /// (1 - r^2) / (xi(1)^2 - xi(r)^2); bounded on the whole open interval.
  double normalized_inverse_determinant(const Overlap& overlap) const;

  /// True when every degree has the same parity, i.e. f(-x) = +-f(x).
  bool parity_definite() const;

 private:
  std::vector<SpectrumTerm> terms_;
  double xi1_ = 0.0;
};

/// Sphere dimension N, K <= N equations and their spectra.
class SystemSpec {
 public:
  SystemSpec(int sphere_dim, std::vector<MixedSpectrum> spectra);

  /// K = degrees.size() equations with xi_k(t) = t^{d_k}.
  static SystemSpec homogeneous(int sphere_dim, const std::vector<int>& degrees);

  int sphere_dim() const { return sphere_dim_; }
  int equation_count() const { return static_cast<int>(spectra_.size()); }
  const std::vector<MixedSpectrum>& spectra() const { return spectra_; }
  const MixedSpectrum& spectrum(int k) const {
    return spectra_[static_cast<std::size_t>(k)];
  }

 private:
  int sphere_dim_ = 1;
  std::vector<MixedSpectrum> spectra_;
};

/// Covariance of (f(x), f(y)) for x.y = r: [[xi(1), xi(r)], [xi(r), xi(1)]].
/// Throws SingularOverlapError when |r| >= 1 - 1e-12.
Eigen::Matrix2d pair_covariance(const MixedSpectrum& spectrum, double r);

/// Gaussian density of (f_K(x), f_K(y)) at the origin:
/// (2 pi)^{-K} prod_k (xi_k(1)^2 - xi_k(r)^2)^{-1/2}.
double density_at_zero(std::span<const MixedSpectrum> spectra, double r);
double density_at_zero(std::span<const MixedSpectrum> spectra,
                       const Overlap& overlap);

}  // namespace kss
