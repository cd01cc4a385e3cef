#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "kss/errors.hpp"
#include "kss/sampler.hpp"
#include "kss/stats.hpp"
#include "oracles.hpp"

namespace kss {
namespace {

using testing::unit_vector;

std::map<std::vector<int>, RunningStats> coefficient_stats(const SystemSpec& spec,
                                                           int draws) {
  std::map<std::vector<int>, RunningStats> stats;
  for (int s = 0; s < draws; ++s) {
    const auto sys = sample_system(spec, static_cast<std::uint64_t>(s));
    const auto& eq = sys.equations().front();
    for (std::size_t i = 0; i < eq.size(); ++i) {
      const auto e = eq.exponents(i);
      stats[std::vector<int>(e.begin(), e.end())].add(eq.coefficient(i));
    }
  }
  return stats;
}

void expect_variance(const RunningStats& s, double expected) {
  const double se = expected * std::sqrt(2.0 / static_cast<double>(s.count()));
  EXPECT_NEAR(s.variance(), expected, 5.0 * se);
}

TEST(Sampler, MultinomialVariancesOnTheCircle) {
  const auto stats = coefficient_stats(SystemSpec::homogeneous(1, {2}), 20000);
  ASSERT_EQ(stats.size(), 3u);
  expect_variance(stats.at({2, 0}), 1.0);
  expect_variance(stats.at({1, 1}), 2.0);
  expect_variance(stats.at({0, 2}), 1.0);
}

TEST(Sampler, MultinomialVariancesCubicOnS2) {
  const auto stats = coefficient_stats(SystemSpec::homogeneous(2, {3}), 20000);
  ASSERT_EQ(stats.size(), 10u);
  expect_variance(stats.at({1, 1, 1}), 6.0);
  expect_variance(stats.at({3, 0, 0}), 1.0);
  expect_variance(stats.at({2, 1, 0}), 3.0);
}

TEST(Sampler, MixedSpectrumHasOneMonomialBlockPerDegree) {
  const SystemSpec spec(2, {MixedSpectrum({{2, 1.0}, {4, 0.5}})});
  const auto sys = sample_system(spec, 1);
  EXPECT_EQ(sys.equations().front().size(), 6u + 15u);
  EXPECT_EQ(sys.max_degree(), 4);
}

TEST(Sampler, Multinomials) {
  for (int vars = 1; vars <= 4; ++vars) {
    for (int p = 0; p <= 20; p += vars + 1) {
      for (const auto& alpha : multi_indices(vars, p)) {
        const double exact = static_cast<double>(multinomial_exact(alpha));
        EXPECT_NEAR(multinomial(alpha) / exact, 1.0, 1e-12);
      }
    }
  }
  const std::vector<int> a{1, 1, 1};
  EXPECT_EQ(multinomial_exact(a), 6u);
  const std::vector<int> big{10, 10, 1};
  EXPECT_THROW(multinomial_exact(big), DomainError);
}

TEST(Sampler, MultiIndicesCount) {
  // C(p + n - 1, n - 1) monomials of degree p in n variables.
  EXPECT_EQ(multi_indices(3, 3).size(), 10u);
  EXPECT_EQ(multi_indices(4, 5).size(), 56u);
  EXPECT_EQ(multi_indices(2, 0).size(), 1u);
}

TEST(Sampler, Deterministic) {
  const auto spec = SystemSpec::homogeneous(3, {2, 3});
  const auto a = sample_system(spec, 42);
  const auto b = sample_system(spec, 42);
  const auto c = sample_system(spec, 43);
  for (int k = 0; k < 2; ++k) {
    const auto& ea = a.equations()[static_cast<std::size_t>(k)];
    const auto& eb = b.equations()[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < ea.size(); ++i) {
      EXPECT_EQ(ea.coefficient(i), eb.coefficient(i));
    }
  }
  EXPECT_NE(a.equations()[0].coefficient(0), c.equations()[0].coefficient(0));
  EXPECT_EQ(a.seed(), 42u);
}

TEST(Sampler, EvalSystemBasics) {
  const PolynomialSystem zero(2, {Polynomial(3, {Monomial{{2, 0, 0}, 0.0}})});
  Eigen::VectorXd e0 = Eigen::VectorXd::Unit(3, 0);
  EXPECT_EQ(eval_system(zero, e0)(0), 0.0);
  const PolynomialSystem single(2, {Polynomial(3, {Monomial{{2, 0, 0}, 1.7}})});
  EXPECT_DOUBLE_EQ(eval_system(single, e0)(0), 1.7);
  EXPECT_THROW(eval_system(single, Eigen::VectorXd::Constant(3, 1.0)), DomainError);
  EXPECT_THROW(PolynomialSystem(2, {Polynomial(2, {Monomial{{2, 0}, 1.0}})}), DomainError);
}

TEST(Sampler, Parity) {
  Engine rng(5);
  const auto sys = sample_system(SystemSpec::homogeneous(3, {2, 3}), 9);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = unit_vector(rng, 4);
    const Eigen::VectorXd fx = eval_system(sys, x);
    const Eigen::VectorXd fm = eval_system(sys, -x);
    EXPECT_NEAR(fm(0), fx(0), 1e-12);
    EXPECT_NEAR(fm(1), -fx(1), 1e-12);
  }
}

TEST(Sampler, GradientMatchesFiniteDifferences) {
  Engine rng(6);
  const SystemSpec spec(3, {MixedSpectrum({{2, 1.0}, {5, 0.3}}), MixedSpectrum::monomial(4)});
  const auto sys = sample_system(spec, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = unit_vector(rng, 4);
    const TangentFrame frame = TangentFrame::random(x, rng);
    const Eigen::MatrixXd g = grad_system(sys, frame);
    ASSERT_EQ(g.rows(), 2);
    ASSERT_EQ(g.cols(), 3);
    for (int l = 0; l < 3; ++l) {
      const Eigen::VectorXd e = frame.vectors().col(l);
      for (int k = 0; k < 2; ++k) {
        // Along the great circle through x with tangent e.
        const double fd = testing::central_difference(
            [&](double t) {
              return eval_system(sys, std::cos(t) * x + std::sin(t) * e)(k);
            },
            0.0);
        EXPECT_NEAR(fd, g(k, l), 1e-6 * std::max(1.0, std::abs(g(k, l))));
      }
    }
  }
}

TEST(TangentFrame, RandomAndCompleteAreOrthonormal) {
  Engine rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = testing::uniform_int(rng, 1, 8);
    const Eigen::VectorXd x = unit_vector(rng, n + 1);
    EXPECT_LE(TangentFrame::random(x, rng).gram_residual(), 1e-12);
    EXPECT_LE(TangentFrame::complete(x).gram_residual(), 1e-12);
  }
  EXPECT_LE(TangentFrame::complete(Eigen::VectorXd::Unit(3, 0)).gram_residual(), 1e-12);
}

TEST(TangentFrame, RejectsNonOrthogonalVectors) {
  Eigen::VectorXd x = Eigen::VectorXd::Unit(3, 2);
  Eigen::MatrixXd bad(3, 2);
  bad << 1, 0, 0, 1, 0.1, 0;
  EXPECT_THROW(TangentFrame(x, bad), DomainError);
}

// E f(x) f(y) = xi(x.y), grad rows have variance xi'(1) and are uncorrelated
// with the values.
TEST(SamplerProperty, CovarianceAndGradientLaw) {
  Engine rng(8);
  const MixedSpectrum s({{2, 1.0}, {3, 0.5}, {4, 0.25}});
  const SystemSpec spec(3, {s});
  constexpr int kPairs = 5;
  std::vector<Eigen::VectorXd> xs, ys;
  std::vector<TangentFrame> frames;
  for (int p = 0; p < kPairs; ++p) {
    xs.push_back(unit_vector(rng, 4));
    ys.push_back(unit_vector(rng, 4));
    frames.push_back(TangentFrame::random(xs.back(), rng));
  }
  std::vector<RunningStats> cross(kPairs), grad_var(kPairs), value_grad(kPairs),
      grad_grad(kPairs);
  for (int d = 0; d < 20000; ++d) {
    const auto sys = sample_system(spec, 1000 + static_cast<std::uint64_t>(d));
    for (int p = 0; p < kPairs; ++p) {
      const double fx = eval_system(sys, xs[p])(0);
      cross[p].add(fx * eval_system(sys, ys[p])(0));
      const Eigen::MatrixXd g = grad_system(sys, frames[p]);
      grad_var[p].add(g(0, 0) * g(0, 0));
      value_grad[p].add(fx * g(0, 1));
      grad_grad[p].add(g(0, 0) * g(0, 2));
    }
  }
  for (int p = 0; p < kPairs; ++p) {
    EXPECT_NEAR(cross[p].mean(), s.xi(xs[p].dot(ys[p])), 5.0 * cross[p].std_error());
    EXPECT_NEAR(grad_var[p].mean(), s.xi(1.0, 1), 5.0 * grad_var[p].std_error());
    EXPECT_NEAR(value_grad[p].mean(), 0.0, 5.0 * value_grad[p].std_error());
    EXPECT_NEAR(grad_grad[p].mean(), 0.0, 5.0 * grad_grad[p].std_error());
  }
}

TEST(SamplerProperty, RotationInvariantMarginal) {
  Engine rng(9);
  const auto spec = SystemSpec::homogeneous(2, {3});
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < 4; ++i) xs.push_back(unit_vector(rng, 3));
  std::vector<RunningStats> second(xs.size());
  for (int d = 0; d < 20000; ++d) {
    const auto sys = sample_system(spec, static_cast<std::uint64_t>(d));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double v = eval_system(sys, xs[i])(0);
      second[i].add(v * v);
    }
  }
  for (const auto& s : second) EXPECT_NEAR(s.mean(), 1.0, 5.0 * s.std_error());
}

}  // namespace
}  // namespace kss
