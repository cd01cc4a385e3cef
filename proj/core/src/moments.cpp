#include "kss/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kss/errors.hpp"

namespace kss {
namespace {

constexpr double kPi = std::numbers::pi;

void check_dims(int n, int k, const char* where) {
  if (n < 1 || k < 1 || k > n) {
    throw DomainError(std::string(where) + ": need 1 <= K <= N (got N=" +
                      std::to_string(n) + ", K=" + std::to_string(k) + ")");
  }
}

double log_falling_factorial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double log_unit_sphere_volume(int ambient_dim) {
  if (ambient_dim < 1) {
    throw DomainError("unit_sphere_volume: dimension must be >= 1");
  }
  const double half = 0.5 * ambient_dim;
  return std::log(2.0) + half * std::log(kPi) - std::lgamma(half);
}

double unit_sphere_volume(int ambient_dim) {
  return std::exp(log_unit_sphere_volume(ambient_dim));
}

MomentReport expected_zero_measure(const SystemSpec& spec) {
  MomentReport report;
  const int n = spec.sphere_dim();
  const int k = spec.equation_count();
  report.volume_factor = unit_sphere_volume(n - k + 1);
  double log_product = 0.0;
  for (const auto& s : spec.spectra()) {
    const double ratio = s.xi(1.0, 1) / s.xi(1.0, 0);
    report.equation_factors.push_back(std::sqrt(ratio));
    log_product += 0.5 * std::log(ratio);
  }
  report.first_moment = report.volume_factor * std::exp(log_product);
  return report;
}

double chi_mean(int j) {
  if (j < 1) throw DomainError("chi_mean: degrees of freedom must be >= 1");
  return std::sqrt(2.0) * std::exp(std::lgamma(0.5 * (j + 1)) - std::lgamma(0.5 * j));
}

double chi_sq_mean(int j) {
  if (j < 1) throw DomainError("chi_sq_mean: degrees of freedom must be >= 1");
  return static_cast<double>(j);
}

double ej_squared(int sphere_dim, int equations) {
  check_dims(sphere_dim, equations, "ej_squared");
  double log_value = 0.0;
  for (int k = 0; k < equations; ++k) {
    log_value += 2.0 * std::log(chi_mean(sphere_dim - k));
  }
  return std::exp(log_value);
}

double volume_identity_residual(int sphere_dim, int equations) {
  check_dims(sphere_dim, equations, "volume_identity_residual");
  const double lhs_log = log_unit_sphere_volume(sphere_dim + 1) +
                         0.5 * std::log(ej_squared(sphere_dim, equations)) -
                         0.5 * equations * std::log(2.0 * kPi);
  const double rhs_log = log_unit_sphere_volume(sphere_dim - equations + 1);
  return std::abs(std::expm1(lhs_log - rhs_log));
}

double lambda_k(const MixedSpectrum& spectrum, const Overlap& overlap) {
  require_regular(overlap, "lambda_k");
  const double d1 = spectrum.xi(1.0, 1);
  const double dr = spectrum.xi(overlap.r, 1);
  const double deficit = spectrum.xi(1.0) / d1 * dr * dr *
                         spectrum.normalized_inverse_determinant(overlap);
  return std::clamp(1.0 - deficit, 0.0, 1.0);
}

double lambda_k(const MixedSpectrum& spectrum, double r) {
  return lambda_k(spectrum, Overlap::from_value(r));
}

double phi(const SystemSpec& spec, const Overlap& overlap) {
  const int n = spec.sphere_dim();
  double sum = n - spec.equation_count();
  for (const auto& s : spec.spectra()) sum += lambda_k(s, overlap);
  return sum / n;
}

double phi(const SystemSpec& spec, double r) {
  return phi(spec, Overlap::from_value(r));
}

double second_moment_constant(int sphere_dim, int equations) {
  check_dims(sphere_dim, equations, "second_moment_constant");
  return std::exp(log_unit_sphere_volume(sphere_dim + 1) +
                  log_unit_sphere_volume(sphere_dim) -
                  equations * std::log(2.0 * kPi));
}

double variance_bound_integrand(const SystemSpec& spec, const Overlap& overlap,
                                bool phi_as_one) {
  require_regular(overlap, "variance_bound_integrand");
  const int n = spec.sphere_dim();
  const int k = spec.equation_count();
  double log_value = 0.0;
  for (const auto& s : spec.spectra()) {
    const double d1 = s.xi(1.0, 1);
    log_value +=
        0.5 * std::log(d1 * d1 * s.normalized_inverse_determinant(overlap));
  }
  log_value += 0.5 * (n - k - 2) * std::log(overlap.one_minus_sq());
  const double weight = phi_as_one ? 1.0 : phi(spec, overlap);
  return std::exp(log_value) * weight;
}

VarianceBound variance_upper_bound(const SystemSpec& spec, double a, double b,
                                   const QuadratureRule& rule,
                                   VarianceBoundOptions options) {
  if (!(a < b) || a < -1.0 || b > 1.0) {
    throw DomainError("variance_upper_bound: need -1 <= a < b <= 1");
  }
  const int n = spec.sphere_dim();
  const int k = spec.equation_count();
  const bool touches_pole = a <= -1.0 + kSingularOverlapMargin ||
                            b >= 1.0 - kSingularOverlapMargin;
  if (touches_pole && rule.substitution != Substitution::kCosine) {
    if (k == n) {
      throw DomainError(
          "variance_upper_bound: interval touches +-1 with K = N; the "
          "integrand has a (1-r^2)^{-1} endpoint singularity, use the cosine "
          "substitution");
    }
    throw DomainError(
        "variance_upper_bound: interval touches +-1; use the cosine "
        "substitution");
  }
  VarianceBound bound;
  bound.quadrature = integrate_overlap(a, b, rule, [&](const Overlap& ov) {
    return variance_bound_integrand(spec, ov, options.phi_as_one);
  });
  const double constant = second_moment_constant(n, k) *
                          std::exp(log_falling_factorial(n, k));
  bound.value = constant * bound.quadrature.value;
  for (auto& sample : bound.quadrature.samples) sample.second *= constant;
  return bound;
}

double dbar_bound(int sphere_dim, double r) {
  if (sphere_dim < 2) throw DomainError("dbar_bound: N must be >= 2");
  require_regular(Overlap::from_value(r), "dbar_bound");
  return 1.0 + 1.0 / (sphere_dim - 1.0) +
         r * r * std::sqrt(sphere_dim * kPi / 2.0);
}

QuadratureResult dbar_ratio_bound(const SystemSpec& spec, double a, double b,
                                  const QuadratureRule& rule) {
  const int n = spec.sphere_dim();
  const double volume_ratio =
      std::exp(log_unit_sphere_volume(n) - log_unit_sphere_volume(n + 1));
  return integrate_overlap(a, b, rule, [&](const Overlap& ov) {
    require_regular(ov, "dbar_ratio_bound");
    double log_value = 0.5 * (n - 2) * std::log(ov.one_minus_sq());
    for (const auto& s : spec.spectra()) {
      const double xi1 = s.xi(1.0);
      // 1 - nu(r)^2 = (xi(1)^2 - xi(r)^2) / xi(1)^2
      log_value -= 0.5 * std::log(s.pair_determinant(ov) / (xi1 * xi1));
    }
    return volume_ratio * dbar_bound(n, ov.r) * std::exp(log_value);
  });
}

MixedSpectrum blowup_spectrum(int p) {
  if (p < 3) throw DomainError("blowup_spectrum: p must be >= 3");
  const double lp = std::log(static_cast<double>(p));
  return MixedSpectrum({{2, 1.0}, {p, lp / p}});
}

std::vector<BlowupPoint> blowup_diagnostic(int p, int sphere_dim,
                                           int grid_points) {
  if (grid_points < 1) throw DomainError("blowup_diagnostic: empty grid");
  const MixedSpectrum first = blowup_spectrum(p);
  std::vector<MixedSpectrum> spectra(static_cast<std::size_t>(sphere_dim),
                                     MixedSpectrum::monomial(2));
  spectra.front() = first;
  const SystemSpec spec(sphere_dim, std::move(spectra));

  const double lo = 0.5;
  const double hi = 1.0 - 2.0 * std::log(static_cast<double>(p)) / p;
  if (!(hi > lo)) {
    throw DomainError("blowup_diagnostic: p too small for a nonempty window");
  }
  std::vector<BlowupPoint> points;
  points.reserve(static_cast<std::size_t>(grid_points));
  for (int i = 1; i <= grid_points; ++i) {
    BlowupPoint pt;
    pt.r = lo + (hi - lo) * i / (grid_points + 1.0);
    const Overlap ov = Overlap::from_value(pt.r);
    pt.m1 = std::sqrt(first.xi(1.0) * first.xi(1.0) *
                      first.normalized_inverse_determinant(ov));
    pt.l = phi(spec, ov) / ov.one_minus_sq();
    pt.lower_bound = 1.0 / (4.0 * sphere_dim * ov.one_minus_sq());
    pt.holds = pt.m1 * pt.l >= pt.lower_bound;
    points.push_back(pt);
  }
  return points;
}

}  // namespace kss
