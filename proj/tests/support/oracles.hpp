#pragma once

// Independent reference computations used as test oracles. None of these
// call into the library code paths they are compared against.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "kss/spectrum.hpp"

namespace kss::testing {

/// Covariance of `target` given `observed` for a Gaussian vector with
/// covariance `cov`: S_tt - S_to S_oo^{-1} S_ot.
inline Eigen::MatrixXd schur_condition(const Eigen::MatrixXd& cov,
                                       const std::vector<int>& observed,
                                       const std::vector<int>& target) {
  const auto no = static_cast<Eigen::Index>(observed.size());
  const auto nt = static_cast<Eigen::Index>(target.size());
  Eigen::MatrixXd soo(no, no), sto(nt, no), stt(nt, nt);
  for (Eigen::Index i = 0; i < no; ++i) {
    for (Eigen::Index j = 0; j < no; ++j) soo(i, j) = cov(observed[i], observed[j]);
  }
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (Eigen::Index j = 0; j < no; ++j) sto(i, j) = cov(target[i], observed[j]);
    for (Eigen::Index j = 0; j < nt; ++j) stt(i, j) = cov(target[i], target[j]);
  }
  return stt - sto * soo.fullPivLu().solve(sto.transpose());
}

/// Covariance of (f(x), f(y), E_i f(x), E_i f(y)) obtained by differentiating
/// the kernel xi(x.y) in the ambient space; frames are the columns of ex, ey.
inline Eigen::MatrixXd kernel_joint_covariance(const MixedSpectrum& s,
                                               const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& y,
                                               const Eigen::MatrixXd& ex,
                                               const Eigen::MatrixXd& ey) {
  const int n = static_cast<int>(ex.cols());
  const double r = x.dot(y);
  const double k0 = s.xi(r), k1 = s.xi(r, 1), k2 = s.xi(r, 2);
  const double d1 = s.xi(1.0, 1), d2 = s.xi(1.0, 2);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * n + 2, 2 * n + 2);
  c(0, 0) = c(1, 1) = s.xi(1.0);
  c(0, 1) = c(1, 0) = k0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd u = ex.col(i);
    const Eigen::VectorXd v = ey.col(i);
    // d/dy xi(x.y) = xi'(r) x
    c(0, 2 + n + i) = c(2 + n + i, 0) = k1 * x.dot(v);
    c(1, 2 + i) = c(2 + i, 1) = k1 * y.dot(u);
    c(0, 2 + i) = c(2 + i, 0) = d1 * x.dot(u);
    c(1, 2 + n + i) = c(2 + n + i, 1) = d1 * y.dot(v);
    for (int j = 0; j < n; ++j) {
      const Eigen::VectorXd uj = ex.col(j);
      const Eigen::VectorXd vj = ey.col(j);
      c(2 + i, 2 + j) = d1 * u.dot(uj) + d2 * u.dot(x) * x.dot(uj);
      c(2 + n + i, 2 + n + j) = d1 * v.dot(vj) + d2 * v.dot(y) * y.dot(vj);
      // d^2/(du_x dv_y) xi(x.y) = xi'(r) u.v + xi''(r) (u.y)(x.v)
      const double cross = k1 * u.dot(vj) + k2 * u.dot(y) * x.dot(vj);
      c(2 + i, 2 + n + j) = cross;
      c(2 + n + j, 2 + i) = cross;
    }
  }
  return c;
}

/// sqrt(det(A A^T)) from the Gram matrix.
inline double gram_jdet(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd g = a * a.transpose();
  return std::sqrt(std::max(0.0, g.determinant()));
}

/// E|XY| for centered jointly Gaussian (X, Y) with the given variances and
/// covariance.
inline double abs_product_mean(double var_x, double var_y, double cov) {
  const double sx = std::sqrt(var_x), sy = std::sqrt(var_y);
  if (sx == 0.0 || sy == 0.0) return 0.0;
  const double rho = std::clamp(cov / (sx * sy), -1.0, 1.0);
  return 2.0 / std::numbers::pi * sx * sy *
         (std::sqrt(1.0 - rho * rho) + rho * std::asin(rho));
}

/// E prod_k W_{idx[k]} by summing over all perfect matchings.
inline double isserlis_bruteforce(std::vector<int> idx, const Eigen::MatrixXd& cov) {
  if (idx.empty()) return 1.0;
  if (idx.size() % 2 != 0) return 0.0;
  const int first = idx.front();
  double sum = 0.0;
  for (std::size_t j = 1; j < idx.size(); ++j) {
    std::vector<int> rest;
    for (std::size_t k = 1; k < idx.size(); ++k) {
      if (k != j) rest.push_back(idx[k]);
    }
    sum += cov(first, idx[j]) * isserlis_bruteforce(rest, cov);
  }
  return sum;
}

inline double central_difference(const std::function<double(double)>& f, double t,
                                 double h = 1e-5) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace kss::testing
