#include "kss/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kss/errors.hpp"
#include "kss/moments.hpp"

namespace kss {
namespace {

void check_sphere_dim(int sphere_dim) {
  if (sphere_dim < 1) throw DomainError("sphere dimension must be >= 1");
}

// Slack for PSD checks on 2x2 blocks: rounding near the poles makes
// |cov| exceed the variance by a few ulps of the O(1) terms it was built from.
constexpr double kBlockSlack = 1e-9;

struct BlockSampler {
  double scale_a = 0.0;
  double scale_b_common = 0.0;
  double scale_b_own = 0.0;

  BlockSampler(double variance, double cov) {
    if (variance <= 0.0) return;
    scale_a = std::sqrt(variance);
    scale_b_common = cov / scale_a;
    scale_b_own = std::sqrt(std::max(0.0, variance - cov * cov / variance));
  }
};

McEstimate pair_mc(const ConditionalPairModel& model, PairLaw law,
                   std::uint64_t n_samples, std::uint64_t seed, int threads) {
  if (n_samples < 100) {
    throw DomainError("Monte Carlo estimate needs at least 100 samples");
  }
  const std::uint64_t chunks = (n_samples + kMcChunk - 1) / kMcChunk;
  std::vector<RunningStats> partial(static_cast<std::size_t>(chunks));
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
    Engine rng = make_engine(seed, c);
    const std::uint64_t begin = c * kMcChunk;
    const std::uint64_t end = std::min(n_samples, begin + kMcChunk);
    RunningStats stats;
    for (std::uint64_t s = begin; s < end; ++s) {
      const auto [m1, m2] = sample_conditional_pair(model, rng, law);
      stats.add(jdet(m1) * jdet(m2));
    }
    partial[c] = stats;
  });
  RunningStats total;
  for (const auto& p : partial) total.merge(p);
  return to_estimate(total);
}

}  // namespace

JointValueGradientCovariance joint_covariance(const MixedSpectrum& spectrum,
                                              const Overlap& overlap,
                                              int sphere_dim) {
  check_sphere_dim(sphere_dim);
  require_regular(overlap, "joint_covariance");
  const double r = overlap.r;
  const double xi1 = spectrum.xi(1.0);
  const double d1 = spectrum.xi(1.0, 1);
  const double dr = spectrum.xi(r, 1);
  const double d2r = spectrum.xi(r, 2);
  const double sin = std::sqrt(overlap.one_minus_sq());

  JointValueGradientCovariance out;
  out.sphere_dim = sphere_dim;
  const int n = sphere_dim;
  out.matrix = Eigen::MatrixXd::Zero(2 * n + 2, 2 * n + 2);
  auto set = [&](int i, int j, double v) {
    out.matrix(i, j) = v;
    out.matrix(j, i) = v;
  };
  const int fx = JointValueGradientCovariance::value_x();
  const int fy = JointValueGradientCovariance::value_y();
  set(fx, fx, xi1);
  set(fy, fy, xi1);
  set(fx, fy, spectrum.xi(r));
  const int last = n - 1;
  set(fy, out.grad_x(last), dr * sin);
  set(fx, out.grad_y(last), -dr * sin);
  for (int i = 0; i < n; ++i) {
    set(out.grad_x(i), out.grad_x(i), d1);
    set(out.grad_y(i), out.grad_y(i), d1);
    set(out.grad_x(i), out.grad_y(i),
        i == last ? r * dr - d2r * overlap.one_minus_sq() : dr);
  }
  return out;
}

JointValueGradientCovariance joint_covariance(const MixedSpectrum& spectrum,
                                              double r, int sphere_dim) {
  return joint_covariance(spectrum, Overlap::from_value(r), sphere_dim);
}

SpecialFramePair special_frame_pair(int sphere_dim, double r) {
  check_sphere_dim(sphere_dim);
  const Overlap ov = Overlap::from_value(r);
  require_regular(ov, "special_frame_pair");
  const int n = sphere_dim;
  const double sin = std::sqrt(ov.one_minus_sq());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 1);
  x(n) = 1.0;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n + 1);
  y(n - 1) = sin;
  y(n) = r;
  y /= y.norm();

  Eigen::MatrixXd ex = Eigen::MatrixXd::Zero(n + 1, n);
  Eigen::MatrixXd ey = Eigen::MatrixXd::Zero(n + 1, n);
  for (int i = 0; i < n; ++i) {
    ex(i, i) = 1.0;
    ey(i, i) = 1.0;
  }
  ey(n - 1, n - 1) = y(n);
  ey(n, n - 1) = -y(n - 1);
  return {TangentFrame(x, ex), TangentFrame(y, ey)};
}

ConditionalGradientCovariance conditional_gradient_covariance(
    const MixedSpectrum& spectrum, const Overlap& overlap, int sphere_dim) {
  check_sphere_dim(sphere_dim);
  require_regular(overlap, "conditional_gradient_covariance");
  const double r = overlap.r;
  const double xi1 = spectrum.xi(1.0);
  const double xir = spectrum.xi(r);
  const double d1 = spectrum.xi(1.0, 1);
  const double dr = spectrum.xi(r, 1);
  const double d2r = spectrum.xi(r, 2);
  // xi'(r)^2 (1 - r^2) / (xi(1)^2 - xi(r)^2)
  const double removed = dr * dr * spectrum.normalized_inverse_determinant(overlap);

  ConditionalGradientCovariance c;
  c.tangent_variance = d1;
  c.normal_variance = d1 - removed * xi1;
  c.tangent_cross = dr;
  c.normal_cross = r * dr - d2r * overlap.one_minus_sq() - removed * xir;
  return c;
}

ConditionalGradientCovariance conditional_gradient_covariance(
    const MixedSpectrum& spectrum, double r, int sphere_dim) {
  return conditional_gradient_covariance(spectrum, Overlap::from_value(r),
                                         sphere_dim);
}

ConditionalPairModel::ConditionalPairModel(const SystemSpec& spec,
                                           const Overlap& overlap)
    : sphere_dim_(spec.sphere_dim()), overlap_(overlap) {
  require_regular(overlap, "ConditionalPairModel");
  rows_.reserve(static_cast<std::size_t>(spec.equation_count()));
  for (const auto& s : spec.spectra()) {
    const auto c = conditional_gradient_covariance(s, overlap, sphere_dim_);
    const double d1 = s.xi(1.0, 1);
    Row row;
    row.lambda = lambda_k(s, overlap);
    row.tangent_corr = c.tangent_cross / d1;
    row.normal_cov = c.normal_cross / d1;
    const double excess = std::abs(row.normal_cov) - row.lambda;
    if (excess > kBlockSlack + 1e-8 * row.lambda ||
        std::abs(row.tangent_corr) > 1.0 + kBlockSlack) {
      throw ModelError("conditional pair block is not PSD at r=" +
                       std::to_string(overlap.r) + " (|cov| - var = " +
                       std::to_string(excess) + ")");
    }
    row.normal_cov = std::clamp(row.normal_cov, -row.lambda, row.lambda);
    row.tangent_corr = std::clamp(row.tangent_corr, -1.0, 1.0);
    rows_.push_back(row);
  }
}

ConditionalPairModel::ConditionalPairModel(const SystemSpec& spec, double r)
    : ConditionalPairModel(spec, Overlap::from_value(r)) {}

Eigen::Matrix2d ConditionalPairModel::block(int k, int j) const {
  const Row& row = rows_[static_cast<std::size_t>(k)];
  Eigen::Matrix2d b;
  if (j == sphere_dim_ - 1) {
    b << row.lambda, row.normal_cov, row.normal_cov, row.lambda;
  } else {
    b << 1.0, row.tangent_corr, row.tangent_corr, 1.0;
  }
  return b;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_conditional_pair(
    const ConditionalPairModel& model, Engine& rng, PairLaw law) {
  const int k_count = model.equation_count();
  const int n = model.sphere_dim();
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m1(k_count, n);
  Eigen::MatrixXd m2(k_count, n);
  for (int k = 0; k < k_count; ++k) {
    const auto& row = model.rows()[static_cast<std::size_t>(k)];
    const BlockSampler tangent(1.0, row.tangent_corr);
    for (int j = 0; j + 1 < n; ++j) {
      const double z1 = normal(rng);
      const double z2 = normal(rng);
      m1(k, j) = tangent.scale_a * z1;
      m2(k, j) = tangent.scale_b_common * z1 + tangent.scale_b_own * z2;
    }
    const BlockSampler last(row.lambda, row.normal_cov);
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    m1(k, n - 1) = last.scale_a * z1;
    m2(k, n - 1) = last.scale_b_common * z1 + last.scale_b_own * z2;
    if (law == PairLaw::kToppedUp) {
      const double top = std::sqrt(std::max(0.0, 1.0 - row.lambda));
      m1(k, n - 1) += top * normal(rng);
      m2(k, n - 1) += top * normal(rng);
    }
  }
  return {std::move(m1), std::move(m2)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_conditional_pair(
    const ConditionalPairModel& model, std::uint64_t seed, PairLaw law) {
  Engine rng = make_engine(seed, 0);
  return sample_conditional_pair(model, rng, law);
}

double jdet(const Eigen::MatrixXd& a) {
  const Eigen::Index k = a.rows();
  const Eigen::Index n = a.cols();
  if (k > n) {
    throw DomainError("jdet: K = " + std::to_string(k) + " rows exceed N = " +
                      std::to_string(n) + " columns");
  }
  Eigen::MatrixXd q(k, n);
  double product = 1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::RowVectorXd v = a.row(i);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < i; ++j) v -= q.row(j).dot(v) * q.row(j);
    }
    const double theta = v.norm();
    if (theta == 0.0) return 0.0;
    product *= theta;
    q.row(i) = v / theta;
  }
  return product;
}

McEstimate d_of_r_mc(const SystemSpec& spec, const Overlap& overlap,
                     std::uint64_t n_samples, std::uint64_t seed,
                     int threads) {
  const ConditionalPairModel model(spec, overlap);
  return pair_mc(model, PairLaw::kConditional, n_samples, seed, threads);
}

McEstimate d_of_r_mc(const SystemSpec& spec, double r, std::uint64_t n_samples,
                     std::uint64_t seed, int threads) {
  return d_of_r_mc(spec, Overlap::from_value(r), n_samples, seed, threads);
}

McEstimate eta_mc(const SystemSpec& spec, double r, std::uint64_t n_samples,
                  std::uint64_t seed, int threads) {
  const ConditionalPairModel model(spec, r);
  return pair_mc(model, PairLaw::kToppedUp, n_samples, seed, threads);
}

KacRiceReport second_moment_mc(const SystemSpec& spec,
                               const QuadratureRule& rule,
                               std::uint64_t samples_per_node,
                               std::uint64_t seed, int threads, double lo,
                               double hi) {
  const int n = spec.sphere_dim();
  const int k = spec.equation_count();
  const bool touches_pole = lo <= -1.0 + kSingularOverlapMargin ||
                            hi >= 1.0 - kSingularOverlapMargin;
  if (touches_pole && rule.substitution != Substitution::kCosine && k == n) {
    throw DomainError(
        "second_moment_mc: interval touches +-1 with K = N; use the cosine "
        "substitution");
  }

  KacRiceReport report;
  report.seed = seed;
  report.samples_per_node = samples_per_node;
  report.interval_lo = lo;
  report.interval_hi = hi;
  report.first_moment = expected_zero_measure(spec).first_moment;

  const auto nodes = overlap_nodes(lo, hi, rule.substitution, rule.nodes);
  report.quadrature_nodes = static_cast<int>(nodes.size());
  const double constant = second_moment_constant(n, k);
  report.nodes.resize(nodes.size());
  parallel_for(nodes.size(), threads, [&](std::size_t i) {
    const Overlap& ov = nodes[i].overlap;
    const McEstimate d = d_of_r_mc(spec, ov, samples_per_node,
                                   substream_seed(seed, i), 1);
    // C_{N,K} prod_k (xi'(1)^2 / (xi(1)^2 - xi(r)^2))^{1/2} (1-r^2)^{(N-2)/2}
    // rewritten with the bounded factors (1-r^2)/(xi(1)^2 - xi(r)^2).
    double log_kernel = 0.5 * (n - k - 2) * std::log(ov.one_minus_sq());
    for (const auto& s : spec.spectra()) {
      const double d1 = s.xi(1.0, 1);
      log_kernel += 0.5 * std::log(d1 * d1 * s.normalized_inverse_determinant(ov));
    }
    const double kernel = constant * std::exp(log_kernel);
    KacRiceNode& node = report.nodes[i];
    node.r = ov.r;
    node.d_hat = d.estimate;
    node.d_se = d.std_error;
    node.integrand = kernel * d.estimate;
    node.weight = nodes[i].weight;
  });

  double sum = 0.0;
  double var = 0.0;
  for (auto& node : report.nodes) {
    sum += node.weight * node.integrand;
    if (node.d_hat != 0.0) {
      const double se = node.weight * node.integrand / node.d_hat * node.d_se;
      var += se * se;
    }
    node.cumulative = sum;
  }
  report.continuous_part = sum;
  report.continuous_part_se = std::sqrt(var);

  const bool full = lo <= -1.0 && hi >= 1.0;
  if (full && k == n) {
    report.diagonal_atom = report.first_moment;
    const bool symmetric =
        std::all_of(spec.spectra().begin(), spec.spectra().end(),
                    [](const MixedSpectrum& s) { return s.parity_definite(); });
    report.antipodal_atom = symmetric ? report.first_moment : 0.0;
  }
  report.second_moment =
      report.continuous_part + report.diagonal_atom + report.antipodal_atom;
  report.second_moment_se = report.continuous_part_se;
  const double ez2 = report.first_moment * report.first_moment;
  report.variance_ratio = (report.second_moment - ez2) / ez2;
  report.variance_ratio_se = report.second_moment_se / ez2;
  return report;
}

}  // namespace kss
