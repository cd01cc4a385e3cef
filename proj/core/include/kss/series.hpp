#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "kss/random.hpp"
#include "kss/sampler.hpp"
#include "kss/stats.hpp"

namespace kss {

/// Polynomial f on R^n as a list of (multi-index, coefficient) terms.
class PolyObservable {
 public:
  PolyObservable(int n, std::vector<Monomial> terms);
  /// f(x) = 1.
  static PolyObservable constant(int n, double value = 1.0);

  int dimension() const { return n_; }
  int degree() const { return degree_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  double evaluate(const Eigen::VectorXd& x) const;
  /// d/dx_i f.
  PolyObservable derivative(int i) const;

 private:
  int n_ = 1;
  int degree_ = 0;
  std::vector<Monomial> terms_;
};

/// Covariance family Sigma(t) = [[S0, S1 + t S], [S1 + t S, S0]], t in [-1, 1].
/// Construction checks that S0, S1, S are symmetric PSD and that Sigma(1)
/// and Sigma(-1) are PSD (DomainError otherwise).
class BlockPairCovariance {
 public:
  BlockPairCovariance(Eigen::MatrixXd sigma0, Eigen::MatrixXd sigma1,
                      Eigen::MatrixXd sigma);

  int dimension() const { return static_cast<int>(sigma0_.rows()); }
  const Eigen::MatrixXd& sigma0() const { return sigma0_; }
  const Eigen::MatrixXd& sigma1() const { return sigma1_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  Eigen::MatrixXd joint(double t) const;

 private:
  Eigen::MatrixXd sigma0_;
  Eigen::MatrixXd sigma1_;
  Eigen::MatrixXd sigma_;
};

/// Pairings beyond this total degree are refused.
inline constexpr int kMaxWickDegree = 16;
/// lambda_series refuses observables of higher degree.
inline constexpr int kMaxSeriesDegree = 8;

/// E f(X) g(Y) for (X, Y) ~ N(0, cov), cov of size 2n x 2n, by Isserlis
/// pairing. DomainError if cov is not PSD or a pairing exceeds
/// kMaxWickDegree.
double wick_expectation(const PolyObservable& f, const PolyObservable& g,
                        const Eigen::MatrixXd& cov);
/// E f(X) for X ~ N(0, cov), cov n x n.
double gaussian_expectation(const PolyObservable& f, const Eigen::MatrixXd& cov);

/// Coefficients alpha_0..alpha_{2d} of Lambda(t) = E f(X_t) f(Y_t), from
/// exact values at 2d + 1 Chebyshev nodes.
std::vector<double> lambda_series(const BlockPairCovariance& bpc,
                                  const PolyObservable& f);

/// V_k^T (S kron ... kron S) V_k with V_k the vectorized mean of the k-th
/// partials of f at X_0 ~ N(0, S0). Equals Lambda^{(k)}(0) when S1 = 0.
double derivative_formula(const BlockPairCovariance& bpc,
                          const PolyObservable& f, int k);

struct ReductionPoint {
  double t = 0.0;
  double exact = 0.0;
  McEstimate mc;
  double z_score = 0.0;  // |mc - exact| / se
};

/// Monte Carlo of E f(X^_t + Z) f(Y^_t + Z) with Z ~ N(0, S1) and
/// (X^_t, Y^_t) ~ N(0, [[S0 - S1, t S], [t S, S0 - S1]]), against the exact
/// E f(X_t) f(Y_t). Point i uses sub-stream i of seed.
std::vector<ReductionPoint> sigma1_reduction_check(
    const BlockPairCovariance& bpc, const PolyObservable& f,
    std::uint64_t n_mc, std::uint64_t seed,
    const std::vector<double>& ts = {-1.0, -0.5, 0.0, 0.5, 1.0},
    int threads = 1);

/// S1 = L1 L1^T, S = L L^T, S0 = S1 + S + R R^T with standard Gaussian
/// factors: always a valid family.
BlockPairCovariance random_block_pair(int n, Engine& rng);
/// Dense polynomial of exact degree `degree` with standard Gaussian
/// coefficients on all monomials of degree <= `degree`.
PolyObservable random_observable(int n, int degree, Engine& rng);

}  // namespace kss
