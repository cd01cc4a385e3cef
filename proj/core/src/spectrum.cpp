#include "kss/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kss/errors.hpp"

namespace kss {
namespace {

double power(double t, int p) { return p == 0 ? 1.0 : std::pow(t, p); }

// 1 - r^p and 1 + r^p from the accurate pole distances.
double one_minus_power(const Overlap& ov, int p) {
  if (ov.r >= 0.0) return -std::expm1(p * std::log1p(-ov.one_minus));
  const double log_abs = p * std::log1p(-ov.one_plus);
  return (p % 2 == 0) ? -std::expm1(log_abs) : 1.0 + std::exp(log_abs);
}

double one_plus_power(const Overlap& ov, int p) {
  if (ov.r >= 0.0) return 1.0 + std::exp(p * std::log1p(-ov.one_minus));
  const double log_abs = p * std::log1p(-ov.one_plus);
  return (p % 2 == 0) ? 1.0 + std::exp(log_abs) : -std::expm1(log_abs);
}

}  // namespace

MixedSpectrum::MixedSpectrum(std::vector<SpectrumTerm> terms)
    : terms_(std::move(terms)) {
  if (terms_.empty()) throw DomainError("spectrum: no terms");
  std::sort(terms_.begin(), terms_.end(),
            [](const SpectrumTerm& a, const SpectrumTerm& b) {
              return a.degree < b.degree;
            });
  bool any_positive = false;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& term = terms_[i];
    if (term.degree < 2) {
      throw DomainError("spectrum: degree " + std::to_string(term.degree) +
                        " < 2");
    }
    if (i > 0 && terms_[i - 1].degree == term.degree) {
      throw DomainError("spectrum: repeated degree " +
                        std::to_string(term.degree));
    }
    if (!(term.weight >= 0.0) || !std::isfinite(term.weight)) {
      throw DomainError("spectrum: weight for degree " +
                        std::to_string(term.degree) +
                        " must be finite and >= 0");
    }
    any_positive = any_positive || term.weight > 0.0;
  }
  if (!any_positive) throw DomainError("spectrum: all weights are zero");
  for (const auto& term : terms_) xi1_ += term.weight;
}

MixedSpectrum MixedSpectrum::monomial(int degree, double weight) {
  return MixedSpectrum({{degree, weight}});
}

double MixedSpectrum::xi(double t, int order) const {
  if (!(std::abs(t) <= 1.0)) {
    throw DomainError("xi: |t| = " + std::to_string(std::abs(t)) + " > 1");
  }
  double sum = 0.0;
  switch (order) {
    case 0:
      for (const auto& [p, w] : terms_) sum += w * power(t, p);
      return sum;
    case 1:
      for (const auto& [p, w] : terms_) sum += w * p * power(t, p - 1);
      return sum;
    case 2:
      for (const auto& [p, w] : terms_) {
        sum += w * p * (p - 1.0) * power(t, p - 2);
      }
      return sum;
    default:
      throw DomainError("xi: order must be 0, 1 or 2");
  }
}

double MixedSpectrum::nu(double t) const { return xi(t) / xi1_; }

double MixedSpectrum::gap_minus(const Overlap& overlap) const {
  double sum = 0.0;
  for (const auto& [p, w] : terms_) sum += w * one_minus_power(overlap, p);
  return sum;
}

double MixedSpectrum::gap_plus(const Overlap& overlap) const {
  double sum = 0.0;
  for (const auto& [p, w] : terms_) sum += w * one_plus_power(overlap, p);
  return sum;
}

double MixedSpectrum::normalized_inverse_determinant(
    const Overlap& overlap) const {
  require_regular(overlap, "normalized_inverse_determinant");
  return (overlap.one_minus / gap_minus(overlap)) *
         (overlap.one_plus / gap_plus(overlap));
}

bool MixedSpectrum::parity_definite() const {
  const int parity = terms_.front().degree % 2;
  return std::all_of(terms_.begin(), terms_.end(), [&](const SpectrumTerm& t) {
    return t.degree % 2 == parity;
  });
}

SystemSpec::SystemSpec(int sphere_dim, std::vector<MixedSpectrum> spectra)
    : sphere_dim_(sphere_dim), spectra_(std::move(spectra)) {
  if (sphere_dim_ < 1) throw DomainError("system: N must be >= 1");
  if (spectra_.empty()) throw DomainError("system: K must be >= 1");
  if (static_cast<int>(spectra_.size()) > sphere_dim_) {
    throw DomainError("system: K = " + std::to_string(spectra_.size()) +
                      " exceeds N = " + std::to_string(sphere_dim_));
  }
}

SystemSpec SystemSpec::homogeneous(int sphere_dim,
                                   const std::vector<int>& degrees) {
  std::vector<MixedSpectrum> spectra;
  spectra.reserve(degrees.size());
  for (int d : degrees) spectra.push_back(MixedSpectrum::monomial(d));
  return SystemSpec(sphere_dim, std::move(spectra));
}

Eigen::Matrix2d pair_covariance(const MixedSpectrum& spectrum, double r) {
  require_regular(Overlap::from_value(r), "pair_covariance");
  const double diag = spectrum.xi(1.0);
  const double off = spectrum.xi(r);
  Eigen::Matrix2d cov;
  cov << diag, off, off, diag;
  return cov;
}

double density_at_zero(std::span<const MixedSpectrum> spectra,
                       const Overlap& overlap) {
  require_regular(overlap, "density_at_zero");
  double log_density = 0.0;
  for (const auto& s : spectra) {
    log_density -= std::log(2.0 * std::numbers::pi) +
                   0.5 * std::log(s.pair_determinant(overlap));
  }
  return std::exp(log_density);
}

double density_at_zero(std::span<const MixedSpectrum> spectra, double r) {
  return density_at_zero(spectra, Overlap::from_value(r));
}

}  // namespace kss
