#include "kss/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/QR>

#include "kss/errors.hpp"

namespace kss {
namespace {

void fill_indices(int variable, int remaining, std::vector<int>& current,
                  std::vector<std::vector<int>>& out) {
  const int last = static_cast<int>(current.size()) - 1;
  if (variable == last) {
    current[static_cast<std::size_t>(variable)] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[static_cast<std::size_t>(variable)] = e;
    fill_indices(variable + 1, remaining - e, current, out);
  }
}

// Orthonormalizes `v` against the columns [0, count) of `basis` and `x`;
// two passes of modified Gram-Schmidt.
Eigen::VectorXd orthogonalize(const Eigen::VectorXd& x,
                              const Eigen::MatrixXd& basis, int count,
                              Eigen::VectorXd v) {
  for (int pass = 0; pass < 2; ++pass) {
    v -= x.dot(v) * x;
    for (int j = 0; j < count; ++j) {
      v -= basis.col(j).dot(v) * basis.col(j);
    }
  }
  return v;
}

TangentFrame complete_with(const Eigen::VectorXd& x,
                           const Eigen::MatrixXd& candidates) {
  const int n = static_cast<int>(x.size());
  // The candidate most aligned with x is the one to drop.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(candidates.col(a).dot(x)) <
           std::abs(candidates.col(b).dot(x));
  });
  Eigen::MatrixXd frame(n, n - 1);
  for (int j = 0; j < n - 1; ++j) {
    Eigen::VectorXd v =
        orthogonalize(x, frame, j, candidates.col(order[static_cast<std::size_t>(j)]));
    frame.col(j) = v / v.norm();
  }
  return TangentFrame(x, frame);
}

}  // namespace

Polynomial::Polynomial(int variables, std::vector<Monomial> terms)
    : variables_(variables) {
  if (variables_ < 1) throw DomainError("polynomial: need >= 1 variable");
  exponents_.reserve(terms.size() * static_cast<std::size_t>(variables_));
  coefficients_.reserve(terms.size());
  for (const auto& term : terms) {
    if (static_cast<int>(term.exponents.size()) != variables_) {
      throw DomainError("polynomial: exponent vector has wrong length");
    }
    int total = 0;
    for (int e : term.exponents) {
      if (e < 0) throw DomainError("polynomial: negative exponent");
      total += e;
    }
    degree_ = std::max(degree_, total);
    exponents_.insert(exponents_.end(), term.exponents.begin(),
                      term.exponents.end());
    coefficients_.push_back(term.coefficient);
  }
}

double Polynomial::evaluate(std::span<const double> x) const {
  const auto n = static_cast<std::size_t>(variables_);
  const auto stride = static_cast<std::size_t>(degree_ + 1);
  // powers[i * stride + e] = x_i^e
  std::vector<double> powers(n * stride);
  for (std::size_t i = 0; i < n; ++i) {
    powers[i * stride] = 1.0;
    for (std::size_t e = 1; e < stride; ++e) {
      powers[i * stride + e] = powers[i * stride + e - 1] * x[i];
    }
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < coefficients_.size(); ++t) {
    double term = coefficients_[t];
    const int* alpha = exponents_.data() + t * n;
    for (std::size_t i = 0; i < n; ++i) {
      term *= powers[i * stride + static_cast<std::size_t>(alpha[i])];
    }
    sum += term;
  }
  return sum;
}

void Polynomial::gradient(std::span<const double> x,
                          std::span<double> out) const {
  const auto n = static_cast<std::size_t>(variables_);
  const auto stride = static_cast<std::size_t>(degree_ + 1);
  std::vector<double> powers(n * stride);
  for (std::size_t i = 0; i < n; ++i) {
    powers[i * stride] = 1.0;
    for (std::size_t e = 1; e < stride; ++e) {
      powers[i * stride + e] = powers[i * stride + e - 1] * x[i];
    }
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t t = 0; t < coefficients_.size(); ++t) {
    const int* alpha = exponents_.data() + t * n;
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] == 0) continue;
      double term = coefficients_[t] * alpha[i];
      for (std::size_t j = 0; j < n; ++j) {
        const int e = (j == i) ? alpha[j] - 1 : alpha[j];
        term *= powers[j * stride + static_cast<std::size_t>(e)];
      }
      out[i] += term;
    }
  }
}

PolynomialSystem::PolynomialSystem(int sphere_dim,
                                   std::vector<Polynomial> equations,
                                   std::uint64_t seed)
    : sphere_dim_(sphere_dim), equations_(std::move(equations)), seed_(seed) {
  if (sphere_dim_ < 1) throw DomainError("system: N must be >= 1");
  for (const auto& eq : equations_) {
    if (eq.variables() != sphere_dim_ + 1) {
      throw DomainError("system: equation has " +
                        std::to_string(eq.variables()) +
                        " variables, expected N+1 = " +
                        std::to_string(sphere_dim_ + 1));
    }
  }
}

int PolynomialSystem::max_degree() const {
  int d = 0;
  for (const auto& eq : equations_) d = std::max(d, eq.degree());
  return d;
}

Eigen::VectorXd PolynomialSystem::evaluate_ambient(
    const Eigen::VectorXd& x) const {
  Eigen::VectorXd values(equation_count());
  const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  for (int k = 0; k < equation_count(); ++k) {
    values(k) = equations_[static_cast<std::size_t>(k)].evaluate(xs);
  }
  return values;
}

Eigen::MatrixXd PolynomialSystem::jacobian_ambient(
    const Eigen::VectorXd& x) const {
  Eigen::MatrixXd jac(equation_count(), variables());
  const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  std::vector<double> row(static_cast<std::size_t>(variables()));
  for (int k = 0; k < equation_count(); ++k) {
    equations_[static_cast<std::size_t>(k)].gradient(xs, row);
    for (int i = 0; i < variables(); ++i) {
      jac(k, i) = row[static_cast<std::size_t>(i)];
    }
  }
  return jac;
}

TangentFrame::TangentFrame(Eigen::VectorXd base, Eigen::MatrixXd vectors)
    : base_(std::move(base)), vectors_(std::move(vectors)) {
  if (vectors_.rows() != base_.size() || vectors_.cols() != base_.size() - 1) {
    throw DomainError("tangent frame: need (N+1) x N frame for a point in R^{N+1}");
  }
  if (std::abs(base_.norm() - 1.0) > 1e-10) {
    throw DomainError("tangent frame: base point is not on the unit sphere");
  }
  if (gram_residual() > 1e-12) {
    throw DomainError("tangent frame: vectors are not orthonormal and tangent");
  }
}

TangentFrame TangentFrame::complete(const Eigen::VectorXd& x) {
  const auto n = x.size();
  return complete_with(x, Eigen::MatrixXd::Identity(n, n));
}

TangentFrame TangentFrame::random(const Eigen::VectorXd& x, Engine& rng) {
  const auto n = x.size();
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  return complete_with(x, q);
}

double TangentFrame::gram_residual() const {
  const auto n = base_.size();
  Eigen::MatrixXd full(n, n);
  full.col(0) = base_;
  full.rightCols(n - 1) = vectors_;
  return (full.transpose() * full - Eigen::MatrixXd::Identity(n, n))
      .cwiseAbs()
      .maxCoeff();
}

std::vector<std::vector<int>> multi_indices(int variables, int degree) {
  if (variables < 1 || degree < 0) {
    throw DomainError("multi_indices: need variables >= 1 and degree >= 0");
  }
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<std::size_t>(variables), 0);
  fill_indices(0, degree, current, out);
  return out;
}

double multinomial(std::span<const int> alpha) {
  int total = 0;
  double log_value = 0.0;
  for (int a : alpha) {
    total += a;
    log_value -= std::lgamma(a + 1.0);
  }
  log_value += std::lgamma(total + 1.0);
  return std::exp(log_value);
}

std::uint64_t multinomial_exact(std::span<const int> alpha) {
  int total = 0;
  for (int a : alpha) total += a;
  if (total > 20) throw DomainError("multinomial_exact: degree > 20");
  // Product of binomials C(running, a); each fits easily, as does the product.
  std::uint64_t result = 1;
  std::uint64_t running = 0;
  for (int a : alpha) {
    std::uint64_t binomial = 1;
    for (std::uint64_t i = 1; i <= static_cast<std::uint64_t>(a); ++i) {
      binomial = binomial * (running + i) / i;
    }
    running += static_cast<std::uint64_t>(a);
    result *= binomial;
  }
  return result;
}

PolynomialSystem sample_system(const SystemSpec& spec, std::uint64_t seed) {
  const int variables = spec.sphere_dim() + 1;
  std::vector<Polynomial> equations;
  equations.reserve(static_cast<std::size_t>(spec.equation_count()));
  for (int k = 0; k < spec.equation_count(); ++k) {
    Engine rng = make_engine(seed, static_cast<std::uint64_t>(k));
    std::normal_distribution<double> normal;
    std::vector<Monomial> terms;
    for (const auto& [p, w] : spec.spectrum(k).terms()) {
      for (auto& alpha : multi_indices(variables, p)) {
        const double count = p <= 20
                                 ? static_cast<double>(multinomial_exact(alpha))
                                 : multinomial(alpha);
        const double coefficient = std::sqrt(w * count) * normal(rng);
        terms.push_back({std::move(alpha), coefficient});
      }
    }
    equations.emplace_back(variables, std::move(terms));
  }
  return PolynomialSystem(spec.sphere_dim(), std::move(equations), seed);
}

Eigen::VectorXd eval_system(const PolynomialSystem& system,
                            const Eigen::VectorXd& x) {
  if (x.size() != system.variables()) {
    throw DomainError("eval_system: point has wrong dimension");
  }
  if (std::abs(x.norm() - 1.0) > 1e-10) {
    throw DomainError("eval_system: point is not on the unit sphere");
  }
  return system.evaluate_ambient(x);
}

Eigen::MatrixXd grad_system(const PolynomialSystem& system,
                            const TangentFrame& frame) {
  if (frame.base().size() != system.variables()) {
    throw DomainError("grad_system: frame dimension does not match system");
  }
  return system.jacobian_ambient(frame.base()) * frame.vectors();
}

Eigen::VectorXd random_unit_vector(int ambient_dim, Engine& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(ambient_dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < ambient_dim; ++i) v(i) = normal(rng);
    norm = v.norm();
  } while (norm < 1e-300);
  return v / norm;
}

}  // namespace kss
