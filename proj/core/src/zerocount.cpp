#include "kss/zerocount.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "kss/errors.hpp"
#include "kss/moments.hpp"
#include "kss/random.hpp"
#include "kss/stats.hpp"

namespace kss {
namespace {

constexpr int kCircleRefinements = 8;
constexpr double kBisectionTol = 1e-12;
// Sub-stream indices kept clear of the per-equation streams of sample_system.
constexpr std::uint64_t kStartStream = 1u << 20;
constexpr std::uint64_t kSliceStream = 1u << 21;

Eigen::VectorXd circle_point(double theta) {
  Eigen::VectorXd y(2);
  y << std::cos(theta), std::sin(theta);
  return y;
}

double circle_value(const SphereSystem& system, double theta) {
  return system.values(circle_point(theta))(0);
}

struct NewtonRoot {
  Eigen::VectorXd x;
  double residual = 0.0;
  double condition = 0.0;
};

std::optional<NewtonRoot> newton_on_sphere(const SphereSystem& system,
                                           Eigen::VectorXd x,
                                           const SphereCountOptions& opts) {
  const int n = system.sphere_dim();
  Eigen::MatrixXd a(n + 1, n + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Eigen::VectorXd f = system.values(x);
    a.topRows(n) = system.jacobian(x);
    a.row(n) = x.transpose();
    rhs.head(n) = -f;
    Eigen::VectorXd step = a.colPivHouseholderQr().solve(rhs);
    if (!step.allFinite()) return std::nullopt;
    double norm = step.norm();
    if (norm > 0.5) {
      step *= 0.5 / norm;
    }
    x = (x + step).normalized();
    if (norm < 1e-13 ||
        (norm < 1e-8 && system.values(x).lpNorm<Eigen::Infinity>() <=
                            0.01 * opts.residual_tol)) {
      break;
    }
  }
  const double residual = system.values(x).lpNorm<Eigen::Infinity>();
  if (!(residual <= opts.residual_tol)) return std::nullopt;
  a.topRows(n) = system.jacobian(x);
  a.row(n) = x.transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  const double condition =
      s(n) > 0.0 ? s(0) / s(n) : std::numeric_limits<double>::infinity();
  return NewtonRoot{std::move(x), residual, condition};
}

int default_starts(const SphereCountOptions& opts) {
  if (opts.n_starts > 0) return opts.n_starts;
  return 50 * std::max(1, static_cast<int>(std::ceil(opts.expected)));
}

}  // namespace

LinearField::LinearField(Eigen::MatrixXd forms) : forms_(std::move(forms)) {
  if (forms_.rows() < 1 || forms_.cols() < 2) {
    throw DomainError("linear field: need K >= 1 forms on R^{N+1}, N >= 1");
  }
}

RestrictedField::RestrictedField(const SphereSystem& base,
                                 Eigen::MatrixXd basis)
    : base_(base), basis_(std::move(basis)) {
  if (basis_.rows() != base_.sphere_dim() + 1 || basis_.cols() < 2 ||
      basis_.cols() > basis_.rows()) {
    throw DomainError("restricted field: basis has the wrong shape");
  }
  const Eigen::MatrixXd gram = basis_.transpose() * basis_;
  const double residual =
      (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (residual > 1e-12) {
    throw DomainError("restricted field: basis columns are not orthonormal");
  }
}

ZeroCountResult count_zeros_circle(const SphereSystem& system) {
  if (system.sphere_dim() != 1 || system.equation_count() != 1) {
    throw DomainError("count_zeros_circle needs N = K = 1");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  int cells = std::max(1024, 64 * system.max_degree());
  for (int attempt = 0; attempt <= kCircleRefinements; ++attempt, cells *= 2) {
    const double h = two_pi / cells;
    std::vector<double> values(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) {
      values[static_cast<std::size_t>(i)] = circle_value(system, h * i);
    }
    std::vector<int> brackets;
    for (int i = 0; i < cells; ++i) {
      const bool a = values[static_cast<std::size_t>(i)] >= 0.0;
      const bool b = values[static_cast<std::size_t>((i + 1) % cells)] >= 0.0;
      if (a != b) brackets.push_back(i);
    }
    bool crowded = false;
    for (std::size_t j = 0; j < brackets.size() && brackets.size() > 1; ++j) {
      const int next = brackets[(j + 1) % brackets.size()];
      const int gap = (next - brackets[j] + cells) % cells;
      if (gap < 2) crowded = true;
    }
    if (crowded) continue;

    ZeroCountResult result;
    result.count = static_cast<int>(brackets.size());
    result.measure = result.count;
    result.dedupe_radius = h;
    result.n_converged = result.count;
    for (int i : brackets) {
      double lo = h * i;
      double hi = h * (i + 1);
      const bool lo_sign = values[static_cast<std::size_t>(i)] >= 0.0;
      while (hi - lo > kBisectionTol) {
        const double mid = 0.5 * (lo + hi);
        if ((circle_value(system, mid) >= 0.0) == lo_sign) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double theta = 0.5 * (lo + hi);
      result.max_residual =
          std::max(result.max_residual, std::abs(circle_value(system, theta)));
      result.roots.push_back(circle_point(theta));
    }
    return result;
  }
  throw DiagnosticsError(
      "count_zeros_circle: sign changes still closer than 2 grid cells after " +
      std::to_string(kCircleRefinements) + " refinements");
}

ZeroCountResult count_zeros_circle(const PolynomialSystem& system) {
  return count_zeros_circle(PolynomialField(system));
}

ZeroCountResult count_zeros_sphere(const SphereSystem& system,
                                   const SphereCountOptions& options) {
  const int n = system.sphere_dim();
  if (system.equation_count() != n || n < 2) {
    throw DomainError("count_zeros_sphere needs K = N >= 2");
  }
  const int starts = default_starts(options);
  const int tranche = starts - static_cast<int>(std::ceil(
                                   options.saturation_tranche * starts));
  Engine rng = make_engine(options.seed, 0);

  ZeroCountResult result;
  result.n_starts = starts;
  result.dedupe_radius = options.dedupe_radius;
  auto record = [&](const NewtonRoot& root, int start) {
    for (const auto& known : result.roots) {
      if ((known - root.x).norm() < options.dedupe_radius) return false;
    }
    result.roots.push_back(root.x);
    result.max_residual = std::max(result.max_residual, root.residual);
    if (root.condition > options.degeneracy_condition) result.degenerate = true;
    if (start >= tranche) result.saturated = true;
    return true;
  };

  for (int s = 0; s < starts; ++s) {
    const auto root =
        newton_on_sphere(system, random_unit_vector(n + 1, rng), options);
    if (!root) continue;
    ++result.n_converged;
    if (record(*root, s)) {
      if (const auto mirror = newton_on_sphere(system, -root->x, options)) {
        record(*mirror, s);
      }
    }
  }
  // A system with no real zeros legitimately converges nowhere.
  if (!result.roots.empty() && result.n_converged * 100 < starts) {
    throw DiagnosticsError("count_zeros_sphere: " +
                           std::to_string(starts - result.n_converged) +
                           " of " + std::to_string(starts) +
                           " Newton starts failed to converge");
  }
  result.count = static_cast<int>(result.roots.size());
  result.measure = result.count;
  return result;
}

ZeroCountResult count_zeros_sphere(const PolynomialSystem& system,
                                   const SphereCountOptions& options) {
  return count_zeros_sphere(PolynomialField(system), options);
}

ZeroCountResult estimate_hausdorff_crofton(const SphereSystem& system,
                                           int n_slices, std::uint64_t seed,
                                           const SphereCountOptions& options) {
  const int n = system.sphere_dim();
  const int k = system.equation_count();
  if (k >= n) throw DomainError("Crofton estimate needs K < N");
  if (n_slices < 1) throw DomainError("Crofton estimate needs >= 1 slice");
  const double half_volume = 0.5 * unit_sphere_volume(n - k + 1);

  ZeroCountResult result;
  RunningStats stats;
  for (int s = 0; s < n_slices; ++s) {
    Engine rng = make_engine(seed, static_cast<std::uint64_t>(s));
    std::normal_distribution<double> normal;
    Eigen::MatrixXd forms_t(n + 1, n - k);
    for (int j = 0; j < n - k; ++j) {
      for (int i = 0; i <= n; ++i) forms_t(i, j) = normal(rng);
    }
    // The last K+1 columns of a full Q for the forms span their common kernel.
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(forms_t);
    const Eigen::MatrixXd q =
        qr.householderQ() * Eigen::MatrixXd::Identity(n + 1, n + 1);
    const RestrictedField slice(system, q.rightCols(k + 1));

    ZeroCountResult part;
    if (k == 1) {
      part = count_zeros_circle(slice);
    } else {
      SphereCountOptions sub = options;
      sub.seed = substream_seed(seed, kSliceStream + static_cast<std::uint64_t>(s));
      part = count_zeros_sphere(slice, sub);
    }
    stats.add(half_volume * part.count);
    result.count += part.count;
    result.n_starts += part.n_starts;
    result.n_converged += part.n_converged;
    result.max_residual = std::max(result.max_residual, part.max_residual);
    result.dedupe_radius = std::max(result.dedupe_radius, part.dedupe_radius);
    result.saturated = result.saturated || part.saturated;
    result.degenerate = result.degenerate || part.degenerate;
  }
  result.measure = stats.mean();
  result.measure_se = stats.std_error();
  return result;
}

ZeroCountResult estimate_hausdorff_crofton(const PolynomialSystem& system,
                                           int n_slices, std::uint64_t seed,
                                           const SphereCountOptions& options) {
  return estimate_hausdorff_crofton(PolynomialField(system), n_slices, seed,
                                    options);
}

EmpiricalMoments empirical_moments(const SystemSpec& spec, int n_trials,
                                   std::uint64_t seed,
                                   const EmpiricalOptions& options) {
  if (n_trials < 2) throw DomainError("empirical_moments needs >= 2 trials");
  const int n = spec.sphere_dim();
  const int k = spec.equation_count();
  const double expected = expected_zero_measure(spec).first_moment;

  SphereCountOptions sphere;
  sphere.n_starts = options.n_starts;
  sphere.residual_tol = options.residual_tol;
  // Expected root count per slice (Crofton) or per system.
  sphere.expected =
      k == n ? expected : 2.0 * expected / unit_sphere_volume(n - k + 1);

  std::vector<ZeroCountResult> trials(static_cast<std::size_t>(n_trials));
  parallel_for(trials.size(), options.threads, [&](std::size_t t) {
    const std::uint64_t trial_seed = substream_seed(seed, t);
    const PolynomialSystem system = sample_system(spec, trial_seed);
    const PolynomialField field(system);
    if (k < n) {
      trials[t] = estimate_hausdorff_crofton(
          field, options.crofton_slices,
          substream_seed(trial_seed, kSliceStream), sphere);
    } else if (n == 1) {
      trials[t] = count_zeros_circle(field);
    } else {
      SphereCountOptions own = sphere;
      own.seed = substream_seed(trial_seed, kStartStream);
      trials[t] = count_zeros_sphere(field, own);
    }
  });

  EmpiricalMoments out;
  out.n_trials = n_trials;
  out.expected = expected;
  RunningStats first;
  RunningStats second;
  for (const auto& r : trials) {
    out.values.push_back(r.measure);
    out.saturated_flags.push_back(r.saturated);
    out.degenerate_flags.push_back(r.degenerate);
    if (r.saturated) ++out.saturated;
    if (r.degenerate) {
      ++out.degenerate;
      continue;
    }
    first.add(r.measure);
    second.add(r.measure * r.measure);
  }
  out.n_used = static_cast<int>(first.count());
  out.mean = first.mean();
  out.variance = first.variance();
  out.std_error = first.std_error();
  out.second_moment = second.mean();
  out.second_moment_se = second.std_error();
  out.normalized_variance =
      out.mean != 0.0 ? out.variance / (out.mean * out.mean) : 0.0;
  return out;
}

}  // namespace kss
