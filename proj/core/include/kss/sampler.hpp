#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "kss/random.hpp"
#include "kss/spectrum.hpp"

namespace kss {

struct Monomial {
  std::vector<int> exponents;  // one per variable x_0..x_N
  double coefficient = 0.0;
};

/// Real polynomial in a fixed number of variables, evaluated with a power
/// table (no Horner scheme: the monomial sets here are dense per degree).
class Polynomial {
 public:
  Polynomial(int variables, std::vector<Monomial> terms);

  int variables() const { return variables_; }
  int degree() const { return degree_; }
  std::size_t size() const { return coefficients_.size(); }
  std::span<const int> exponents(std::size_t term) const {
    return {exponents_.data() + term * static_cast<std::size_t>(variables_),
            static_cast<std::size_t>(variables_)};
  }
  double coefficient(std::size_t term) const { return coefficients_[term]; }

  double evaluate(std::span<const double> x) const;
  /// Ambient gradient d/dx_i, written to `out` (size variables()).
  void gradient(std::span<const double> x, std::span<double> out) const;

 private:
  int variables_ = 0;
  int degree_ = 0;
  std::vector<int> exponents_;  // row-major, size() x variables_
  std::vector<double> coefficients_;
};

/// K polynomial equations in N + 1 variables, plus the seed that produced
/// them (0 for hand-built systems).
class PolynomialSystem {
 public:
  PolynomialSystem(int sphere_dim, std::vector<Polynomial> equations,
                   std::uint64_t seed = 0);

  int sphere_dim() const { return sphere_dim_; }
  int variables() const { return sphere_dim_ + 1; }
  int equation_count() const { return static_cast<int>(equations_.size()); }
  int max_degree() const;
  std::uint64_t seed() const { return seed_; }
  const std::vector<Polynomial>& equations() const { return equations_; }

  // Homogeneous extension to all of R^{N+1}; no unit-norm check.
  Eigen::VectorXd evaluate_ambient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian_ambient(const Eigen::VectorXd& x) const;  // K x (N+1)

 private:
  int sphere_dim_ = 1;
  std::vector<Polynomial> equations_;
  std::uint64_t seed_ = 0;
};

/// Orthonormal basis (E_1..E_N) of the tangent space at a point of S^N,
/// stored as the columns of an (N+1) x N matrix.
class TangentFrame {
 public:
  /// Validates unit base, orthonormal columns orthogonal to the base
  /// (residual <= 1e-12).
  TangentFrame(Eigen::VectorXd base, Eigen::MatrixXd vectors);

  /// Gram-Schmidt completion of x by the standard basis.
  static TangentFrame complete(const Eigen::VectorXd& x);
  /// Gram-Schmidt completion of x by a uniformly rotated standard basis.
  static TangentFrame random(const Eigen::VectorXd& x, Engine& rng);

  const Eigen::VectorXd& base() const { return base_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  int sphere_dim() const { return static_cast<int>(vectors_.cols()); }

  /// max |[x E]^T [x E] - I|.
  double gram_residual() const;

 private:
  Eigen::VectorXd base_;
  Eigen::MatrixXd vectors_;
};

/// All exponent vectors over `variables` variables with total degree
/// `degree`, in lexicographically decreasing order of the leading exponent.
std::vector<std::vector<int>> multi_indices(int variables, int degree);

/// p! / prod_i alpha_i! through log-gamma.
double multinomial(std::span<const int> alpha);
/// Exact integer multinomial; total degree must be <= 20.
std::uint64_t multinomial_exact(std::span<const int> alpha);

/// Draws a system equal in law to the i.i.d.-tensor model: the coefficient of
/// x^alpha with |alpha| = p is N(0, a_p^2 p!/prod alpha_i!). Equation k uses
/// sub-stream k of `seed`, so equations are independent and reproducible.
PolynomialSystem sample_system(const SystemSpec& spec, std::uint64_t seed);

/// Values of all equations at a unit vector (DomainError if | |x| - 1 | > 1e-10).
Eigen::VectorXd eval_system(const PolynomialSystem& system,
                            const Eigen::VectorXd& x);

/// K x N matrix of directional derivatives E_l f_k at the frame's base point.
Eigen::MatrixXd grad_system(const PolynomialSystem& system,
                            const TangentFrame& frame);

/// Uniform point on S^{dim}.
Eigen::VectorXd random_unit_vector(int ambient_dim, Engine& rng);

}  // namespace kss
