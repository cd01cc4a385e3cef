#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "kss/conditional.hpp"
#include "kss/errors.hpp"
#include "kss/moments.hpp"
#include "kss/zerocount.hpp"

namespace kss {
namespace {

Polynomial poly(int variables, std::vector<Monomial> terms) {
  return Polynomial(variables, std::move(terms));
}

// Roots are unit vectors, satisfy the residual bound and are separated.
void expect_clean_roots(const SphereSystem& system, const ZeroCountResult& result,
                        double residual_tol) {
  for (std::size_t i = 0; i < result.roots.size(); ++i) {
    const auto& x = result.roots[i];
    EXPECT_NEAR(x.norm(), 1.0, 1e-12);
    EXPECT_LE(system.values(x).cwiseAbs().maxCoeff(), residual_tol);
    for (std::size_t j = 0; j < i; ++j) {
      EXPECT_GT((x - result.roots[j]).norm(), result.dedupe_radius);
    }
  }
  EXPECT_LE(result.max_residual, residual_tol);
  EXPECT_EQ(result.count, static_cast<int>(result.roots.size()));
}

bool contains(const std::vector<Eigen::VectorXd>& roots, const Eigen::VectorXd& x) {
  for (const auto& y : roots) {
    if ((x - y).norm() < 1e-6) return true;
  }
  return false;
}

TEST(CircleCount, DifferenceOfSquaresHasFourZeros) {
  const PolynomialSystem system(1, {poly(2, {{{2, 0}, 1.0}, {{0, 2}, -1.0}})});
  const auto result = count_zeros_circle(system);
  EXPECT_EQ(result.count, 4);
  EXPECT_EQ(result.measure, 4.0);
  expect_clean_roots(PolynomialField(system), result, 1e-9);
  EXPECT_THROW(count_zeros_circle(PolynomialSystem(2, {poly(3, {{{1, 0, 0}, 1.0}})})),
               DomainError);
}

TEST(CircleCount, EvenForParityDefiniteSpectra) {
  for (int d : {2, 3, 4, 7}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto system = sample_system(SystemSpec::homogeneous(1, {d}), seed);
      const auto result = count_zeros_circle(system);
      EXPECT_EQ(result.count % 2, 0);
      EXPECT_LE(result.count, 2 * d);
      for (const auto& x : result.roots) EXPECT_TRUE(contains(result.roots, -x));
    }
  }
}

TEST(CircleCount, MeanMatchesExpectation) {
  const auto spec = SystemSpec::homogeneous(1, {3});
  const auto m = empirical_moments(spec, 4000, 1);
  EXPECT_NEAR(m.expected, 2.0 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(m.mean, m.expected, 4.0 * m.std_error);
  EXPECT_EQ(m.saturated, 0);
  EXPECT_EQ(m.degenerate, 0);
}

// The Monte Carlo second moment agrees with the two-point integral.
TEST(CircleCount, SecondMomentMatchesKacRice) {
  const auto spec = SystemSpec::homogeneous(1, {3});
  const auto m = empirical_moments(spec, 8000, 2);
  QuadratureRule rule;
  rule.adaptive = false;
  const auto kr = second_moment_mc(spec, rule, 10000, 3);
  EXPECT_NEAR(m.second_moment, kr.second_moment,
              4.0 * std::hypot(m.second_moment_se, kr.second_moment_se));
}

TEST(SphereCount, LinearSystemHasTwoZeros) {
  Eigen::MatrixXd forms(2, 3);
  forms << 1, 0, 0, 0, 1, 0;
  const LinearField field(forms);
  SphereCountOptions opts;
  opts.n_starts = 40;
  const auto result = count_zeros_sphere(field, opts);
  EXPECT_EQ(result.count, 2);
  expect_clean_roots(field, result, 1e-9);
  EXPECT_FALSE(result.degenerate);
}

TEST(SphereCount, ProductSystemHasFourZeros) {
  const PolynomialSystem system(
      2, {poly(3, {{{2, 0, 0}, 1.0}, {{0, 2, 0}, -1.0}}), poly(3, {{{0, 0, 1}, 1.0}})});
  SphereCountOptions opts;
  opts.n_starts = 200;
  const auto result = count_zeros_sphere(system, opts);
  EXPECT_EQ(result.count, 4);
  EXPECT_FALSE(result.saturated);
  EXPECT_FALSE(result.degenerate);
  expect_clean_roots(PolynomialField(system), result, 1e-9);
}

TEST(SphereCount, NonIsolatedZerosAreFlagged) {
  const PolynomialSystem system(
      2, {poly(3, {{{1, 1, 0}, 1.0}}), poly(3, {{{1, 0, 1}, 1.0}})});
  SphereCountOptions opts;
  opts.n_starts = 200;
  const auto result = count_zeros_sphere(system, opts);
  EXPECT_TRUE(result.degenerate || result.saturated);
}

TEST(SphereCount, ZeroFreeSystemIsNotAnError) {
  // x0^2 + x1^2 + x2^2 = 1 on the sphere, never zero.
  const PolynomialSystem system(
      2, {poly(3, {{{2, 0, 0}, 1.0}, {{0, 2, 0}, 1.0}, {{0, 0, 2}, 1.0}}),
          poly(3, {{{0, 0, 1}, 1.0}})});
  SphereCountOptions opts;
  opts.n_starts = 50;
  EXPECT_EQ(count_zeros_sphere(system, opts).count, 0);
}

TEST(SphereCount, RootsAreCleanAndAntipodallyClosed) {
  const auto spec = SystemSpec::homogeneous(3, {2, 3, 2});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto system = sample_system(spec, seed);
    SphereCountOptions opts;
    opts.expected = expected_zero_measure(spec).first_moment;
    opts.seed = seed;
    const auto result = count_zeros_sphere(system, opts);
    expect_clean_roots(PolynomialField(system), result, opts.residual_tol);
    EXPECT_EQ(result.count % 2, 0);
    for (const auto& x : result.roots) EXPECT_TRUE(contains(result.roots, -x));
    EXPECT_LE(result.count, 12);  // Bezout
  }
}

TEST(SphereCount, MeanOfQuadraticPairIsFour) {
  const auto m = empirical_moments(SystemSpec::homogeneous(2, {2, 2}), 1000, 4);
  EXPECT_NEAR(m.expected, 4.0, 1e-12);
  EXPECT_NEAR(m.mean, 4.0, 4.0 * m.std_error);
  EXPECT_EQ(m.n_used, 1000 - m.degenerate);
}

TEST(SphereCount, ConsistencyMatrix) {
  const std::vector<MixedSpectrum> spectra = {
      MixedSpectrum::monomial(2), MixedSpectrum::monomial(3),
      MixedSpectrum({{2, 1.0}, {4, 1.0}})};
  for (int n : {1, 2, 3}) {
    for (const auto& s : spectra) {
      const SystemSpec spec(n, std::vector<MixedSpectrum>(static_cast<std::size_t>(n), s));
      const auto m = empirical_moments(spec, n == 1 ? 2000 : 200, 5);
      EXPECT_NEAR(m.mean, m.expected, 4.0 * m.std_error + 1e-12)
          << "N=" << n << " max degree " << s.max_degree();
      EXPECT_EQ(m.saturated, 0);
    }
  }
}

TEST(SphereCount, ThreadCountDoesNotChangeResults) {
  const auto spec = SystemSpec::homogeneous(2, {2, 3});
  EmpiricalOptions one, three;
  three.threads = 3;
  const auto a = empirical_moments(spec, 40, 6, one);
  const auto b = empirical_moments(spec, 40, 6, three);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.mean, b.mean);
}

TEST(Crofton, GreatSubsphereHasExactMeasure) {
  Engine rng(7);
  for (int n : {2, 3, 4}) {
    for (int k = 1; k < n; ++k) {
      const LinearField field(testing::gaussian_matrix(rng, k, n + 1));
      const auto result = estimate_hausdorff_crofton(field, 10, 8);
      EXPECT_NEAR(result.measure, unit_sphere_volume(n - k + 1), 1e-9) << n << " " << k;
      EXPECT_NEAR(result.measure_se, 0.0, 1e-9);
    }
  }
  EXPECT_THROW(estimate_hausdorff_crofton(LinearField(Eigen::MatrixXd::Identity(2, 3)), 0, 1),
               DomainError);
}

TEST(Crofton, MeanMatchesExpectation) {
  const auto spec = SystemSpec::homogeneous(2, {2});
  const auto m = empirical_moments(spec, 400, 9);
  EXPECT_NEAR(m.expected, 2.0 * std::numbers::pi * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(m.mean, m.expected, 4.0 * m.std_error);
  for (double v : m.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Crofton, HigherCodimensionIsFiniteAndNonnegative) {
  const auto spec = SystemSpec::homogeneous(3, {2});
  const auto m = empirical_moments(spec, 40, 10);
  EXPECT_NEAR(m.mean, m.expected, 4.0 * m.std_error);
}

TEST(Empirical, RejectsTooFewTrials) {
  EXPECT_THROW(empirical_moments(SystemSpec::homogeneous(1, {2}), 1, 0), DomainError);
}

}  // namespace
}  // namespace kss
