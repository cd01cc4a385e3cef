// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and sample sizes are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "generators.hpp"
#include "kss/conditional.hpp"
#include "kss/moments.hpp"
#include "kss/sampler.hpp"
#include "kss/series.hpp"
#include "kss/stats.hpp"
#include "kss/zerocount.hpp"
#include "oracles.hpp"

namespace {

using namespace kss;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSeed = 20240611;

// c1
constexpr int kCircleTrials = 10000;
constexpr double kCircleSe = 3.0;
constexpr double kCircleSeconds = 60.0;
// c2
constexpr int kMixedTrials = 2000;
constexpr double kMixedSe = 3.0;
constexpr double kMaxSaturationRate = 0.01;
constexpr double kMixedSeconds = 600.0;
// c3
constexpr int kCovPairs = 20;
constexpr int kCovDraws = 100000;
constexpr double kCovSe = 5.0;
// c4
constexpr int kSchurSpectra = 50;
constexpr double kSchurTol = 1e-10;
// c5
constexpr int kKrNodes = 64;
constexpr std::uint64_t kKrSamples = 10000;
constexpr double kKrRelTol = 0.05;
constexpr double kKrSeconds = 900.0;
// c6
constexpr int kInequalityTrials = 1000;
constexpr double kIdentityTol = 1e-10;
constexpr int kIdentityMaxN = 30;
// c7
constexpr std::uint64_t kDbarSamples = 100000;
constexpr double kDbarSe = 3.0;
// c8
constexpr int kSeriesTrials = 100;
constexpr double kCoefficientFloor = -1e-8;
constexpr double kDerivativeTol = 1e-8;
// c9
constexpr int kCroftonTrials = 500;
constexpr double kCroftonSe = 3.0;
// c10
constexpr int kTrendTrials[] = {20000, 12000, 5000};  // N = 1, 2, 3
// c11
constexpr int kBlowupP = 10000;
constexpr int kBlowupN = 8;
constexpr int kBlowupGrid = 200;

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("[%s] %s %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

EmpiricalMoments c1() {
  const auto t0 = Clock::now();
  const auto m = empirical_moments(SystemSpec::homogeneous(1, {3}), kCircleTrials, kSeed);
  const double target = 2.0 * std::sqrt(3.0);
  const double secs = seconds_since(t0);
  const double z = std::abs(m.mean - target) / m.std_error;
  report("c1 first moment, circle", z <= kCircleSe && secs < kCircleSeconds,
         fmt("mean=%.5f se=%.5f target=%.5f z=%.2f time=%.1fs", m.mean, m.std_error, target, z,
             secs));
  return m;
}

void c2() {
  const auto t0 = Clock::now();
  const auto m = empirical_moments(SystemSpec::homogeneous(2, {2, 3}), kMixedTrials, kSeed + 2);
  const double target = 2.0 * std::sqrt(6.0);
  const double secs = seconds_since(t0);
  const double z = std::abs(m.mean - target) / m.std_error;
  const double sat = static_cast<double>(m.saturated) / m.n_trials;
  report("c2 first moment, mixed degrees",
         z <= kMixedSe && sat < kMaxSaturationRate && secs < kMixedSeconds,
         fmt("mean=%.5f se=%.5f target=%.5f z=%.2f saturated=%d degenerate=%d time=%.1fs",
             m.mean, m.std_error, target, z, m.saturated, m.degenerate, secs));
}

void c3() {
  const MixedSpectrum s({{2, 1.0}, {3, 0.5}, {5, 0.25}});
  const SystemSpec spec(3, {s});
  Engine rng(kSeed + 3);
  std::vector<Eigen::VectorXd> xs, ys;
  for (int i = 0; i < kCovPairs; ++i) {
    xs.push_back(testing::unit_vector(rng, 4));
    ys.push_back(testing::unit_vector(rng, 4));
  }
  std::vector<RunningStats> stats(kCovPairs);
  for (int d = 0; d < kCovDraws; ++d) {
    const auto sys = sample_system(spec, substream_seed(kSeed + 3, static_cast<std::uint64_t>(d)));
    for (int i = 0; i < kCovPairs; ++i) {
      stats[i].add(eval_system(sys, xs[i])(0) * eval_system(sys, ys[i])(0));
    }
  }
  double worst = 0.0;
  for (int i = 0; i < kCovPairs; ++i) {
    const double target = s.xi(xs[i].dot(ys[i]));
    worst = std::max(worst, std::abs(stats[i].mean() - target) / stats[i].std_error());
  }
  report("c3 covariance law", worst <= kCovSe,
         fmt("pairs=%d draws=%d max_z=%.2f", kCovPairs, kCovDraws, worst));
}

void c4() {
  Engine rng(kSeed + 4);
  constexpr int n = 3;
  std::vector<int> target;
  for (int i = 2; i < 2 * n + 2; ++i) target.push_back(i);
  double worst = 0.0;
  for (int t = 0; t < kSchurSpectra; ++t) {
    const MixedSpectrum s = testing::random_spectrum(rng);
    for (int i = -9; i <= 9; ++i) {
      const double r = 0.1 * i;
      const Eigen::MatrixXd cond =
          testing::schur_condition(joint_covariance(s, r, n).matrix, {0, 1}, target);
      const auto table = conditional_gradient_covariance(s, r, n);
      Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2 * n, 2 * n);
      for (int j = 0; j < n; ++j) {
        const bool last = j == n - 1;
        expected(j, j) = expected(n + j, n + j) =
            last ? table.normal_variance : table.tangent_variance;
        expected(j, n + j) = expected(n + j, j) = last ? table.normal_cross : table.tangent_cross;
      }
      worst = std::max(worst, (cond - expected).cwiseAbs().maxCoeff());
    }
  }
  report("c4 conditional covariance vs Schur complement", worst <= kSchurTol,
         fmt("spectra=%d max_abs_diff=%.3g", kSchurSpectra, worst));
}

void c5(const EmpiricalMoments& direct) {
  const auto t0 = Clock::now();
  QuadratureRule rule;
  rule.nodes = kKrNodes;
  rule.substitution = Substitution::kCosine;
  rule.adaptive = false;
  const auto kr = second_moment_mc(SystemSpec::homogeneous(1, {3}), rule, kKrSamples, kSeed + 5);
  const double secs = seconds_since(t0);
  const double rel = std::abs(kr.second_moment - direct.second_moment) / direct.second_moment;
  report("c5 Kac-Rice second moment vs direct", rel <= kKrRelTol && secs < kKrSeconds,
         fmt("kac_rice=%.4f+-%.4f direct=%.4f+-%.4f rel=%.4f time=%.1fs", kr.second_moment,
             kr.second_moment_se, direct.second_moment, direct.second_moment_se, rel, secs));
}

void c6() {
  Engine rng(kSeed + 6);
  int bad = 0;
  for (int t = 0; t < kInequalityTrials; ++t) {
    const MixedSpectrum s = testing::random_spectrum(rng);
    const int n = testing::uniform_int(rng, 1, 6);
    const int k = testing::uniform_int(rng, 1, n);
    std::vector<MixedSpectrum> spectra(static_cast<std::size_t>(k), s);
    spectra[0] = testing::random_spectrum(rng);
    const SystemSpec spec(n, spectra);
    const double r = testing::uniform(rng, -0.999, 0.999);
    const double lam = lambda_k(s, r);
    const double d1 = s.xi(1.0, 1), dr = s.xi(r, 1);
    const double lam_cap = (d1 * d1 - dr * dr + d1 * d1 - r * dr * dr) / (2.0 * d1 * d1);
    const double ph = phi(spec, r);
    const double nu = s.nu(r);
    const bool ok = lam >= 0.0 && lam <= 1.0 && lambda_k(s, 0.0) == 1.0 &&
                    lam <= lam_cap + 1e-12 && ph >= 0.0 && ph <= 1.0 &&
                    1.0 - nu * nu >= 1.0 - std::pow(r, 4) - 1e-15;
    if (!ok) ++bad;
  }
  double worst_identity = 0.0;
  for (int n = 1; n <= kIdentityMaxN; ++n) {
    for (int k = 1; k <= n; ++k) {
      worst_identity = std::max(worst_identity, volume_identity_residual(n, k));
    }
  }
  report("c6 inequality suite", bad == 0 && worst_identity <= kIdentityTol,
         fmt("trials=%d violations=%d max_identity_residual=%.3g", kInequalityTrials, bad,
             worst_identity));
}

void c7() {
  bool pass = true;
  std::string detail;
  for (int n : {4, 8}) {
    const auto spec = SystemSpec::homogeneous(n, std::vector<int>(static_cast<std::size_t>(n), 2));
    const double ej2 = ej_squared(n, n);
    for (double r : {0.0, 0.1, 0.2}) {
      const auto d = d_of_r_mc(spec, r, kDbarSamples, kSeed + 7 + static_cast<std::uint64_t>(n));
      const double ratio = d.estimate / ej2;
      const double bound = dbar_bound(n, r);
      pass = pass && ratio <= bound + kDbarSe * d.std_error / ej2;
      detail += fmt(" N=%d,r=%.1f:%.4f<=%.4f", n, r, ratio, bound);
    }
  }
  report("c7 D(r) bound", pass, fmt("samples=%llu", static_cast<unsigned long long>(kDbarSamples)) + detail);
}

void c8() {
  Engine rng(kSeed + 8);
  double lowest = std::numeric_limits<double>::infinity();
  double worst_rel = 0.0;
  for (int t = 0; t < kSeriesTrials; ++t) {
    const int n = testing::uniform_int(rng, 1, 3);
    const int d = testing::uniform_int(rng, 1, 3);
    const auto bpc = random_block_pair(n, rng);
    const auto f = random_observable(n, d, rng);
    for (double a : lambda_series(bpc, f)) lowest = std::min(lowest, a);
    const BlockPairCovariance reduced(bpc.sigma0(), Eigen::MatrixXd::Zero(n, n), bpc.sigma());
    const auto beta = lambda_series(reduced, f);
    double factorial = 1.0;
    for (int k = 0; k <= 3; ++k) {
      if (k > 0) factorial *= k;
      const double series = k < static_cast<int>(beta.size()) ? factorial * beta[static_cast<std::size_t>(k)] : 0.0;
      const double formula = derivative_formula(reduced, f, k);
      worst_rel = std::max(worst_rel, std::abs(series - formula) / std::max(1.0, std::abs(formula)));
    }
  }
  report("c8 power-series nonnegativity", lowest >= kCoefficientFloor && worst_rel <= kDerivativeTol,
         fmt("trials=%d min_coefficient=%.3g max_derivative_rel_error=%.3g", kSeriesTrials, lowest,
             worst_rel));
}

void c9() {
  const auto m = empirical_moments(SystemSpec::homogeneous(2, {2}), kCroftonTrials, kSeed + 9);
  const double target = 2.0 * std::numbers::pi * std::sqrt(2.0);
  const double z = std::abs(m.mean - target) / m.std_error;
  report("c9 Crofton estimator", z <= kCroftonSe,
         fmt("mean=%.4f se=%.4f target=%.4f z=%.2f saturated=%d", m.mean, m.std_error, target, z,
             m.saturated));
}

void c10() {
  // Analytic bound on Var(Z) / (E Z)^2 from the Cauchy-Schwarz integral plus
  // the diagonal and antipodal atoms.
  std::vector<double> analytic;
  std::string detail = "analytic:";
  for (int n : {4, 8, 16}) {
    const auto spec = SystemSpec::homogeneous(n, std::vector<int>(static_cast<std::size_t>(n), 2));
    QuadratureRule rule;
    rule.substitution = Substitution::kCosine;
    const double ez = expected_zero_measure(spec).first_moment;
    const auto bound = variance_upper_bound(spec, -1.0, 1.0, rule);
    const double ratio = (bound.value + 2.0 * ez) / (ez * ez) - 1.0;
    analytic.push_back(ratio);
    detail += fmt(" N=%d:%.4f", n, ratio);
  }
  const bool analytic_ok = analytic[0] > analytic[1] && analytic[1] > analytic[2];
  report("c10a analytic variance-ratio bound decreasing in N", analytic_ok, detail);

  std::vector<double> empirical;
  detail = "empirical:";
  for (int n = 1; n <= 3; ++n) {
    const auto spec = SystemSpec::homogeneous(n, std::vector<int>(static_cast<std::size_t>(n), 2));
    const auto m = empirical_moments(spec, kTrendTrials[n - 1], kSeed + 10 + static_cast<std::uint64_t>(n));
    empirical.push_back(m.normalized_variance);
    detail += fmt(" N=%d:%.4f(trials=%d,saturated=%d)", n, m.normalized_variance, m.n_trials,
                  m.saturated);
  }
  report("c10b empirical normalized variance decreasing N=1..3",
         empirical[0] > empirical[1] && empirical[1] > empirical[2], detail);
}

void c11() {
  const auto points = blowup_diagnostic(kBlowupP, kBlowupN, kBlowupGrid);
  int held = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    held += p.holds ? 1 : 0;
    worst = std::min(worst, p.m1 * p.l / p.lower_bound);
  }
  report("c11 blow-up growth inequality", held == static_cast<int>(points.size()),
         fmt("p=%d N=%d grid=%zu held=%d min_ratio=%.4f", kBlowupP, kBlowupN, points.size(), held,
             worst));
}

}  // namespace

int main() {
  const EmpiricalMoments circle = c1();
  c2();
  c3();
  c4();
  c5(circle);
  c6();
  c7();
  c8();
  c9();
  c10();
  c11();
  std::printf("%d criterion line(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
