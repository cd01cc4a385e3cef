#include "kss/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "kss/errors.hpp"

namespace kss {
namespace {

void require_psd(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DomainError(std::string(what) + " is not square");
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw DomainError(std::string(what) + " is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -1e-10 * scale) {
    throw DomainError(std::string(what) + " is not positive semi-definite (eigenvalue " +
                      std::to_string(ev.minCoeff()) + ")");
  }
}

// Symmetric PSD square root; tiny negative eigenvalues are clamped.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

class GaussianMoments {
 public:
  explicit GaussianMoments(const Eigen::MatrixXd& cov) : cov_(cov) {}

  // E prod_i W_i^{m_i}.
  double operator()(const std::vector<int>& m) {
    int total = 0;
    int first = -1;
    for (std::size_t i = 0; i < m.size(); ++i) {
      total += m[i];
      if (first < 0 && m[i] > 0) first = static_cast<int>(i);
    }
    if (total == 0) return 1.0;
    if (total % 2 != 0) return 0.0;
    if (total > kMaxWickDegree) {
      throw DomainError("Wick pairing of total degree " + std::to_string(total) +
                        " exceeds the cap of " + std::to_string(kMaxWickDegree));
    }
    if (auto it = memo_.find(m); it != memo_.end()) return it->second;
    std::vector<int> rest = m;
    --rest[static_cast<std::size_t>(first)];
    double sum = 0.0;
    for (std::size_t j = 0; j < rest.size(); ++j) {
      if (rest[j] == 0) continue;
      const double c = cov_(first, static_cast<Eigen::Index>(j));
      if (c == 0.0) continue;
      std::vector<int> sub = rest;
      --sub[j];
      sum += rest[j] * c * (*this)(sub);
    }
    memo_.emplace(m, sum);
    return sum;
  }

 private:
  const Eigen::MatrixXd& cov_;
  std::map<std::vector<int>, double> memo_;
};

}  // namespace

PolyObservable::PolyObservable(int n, std::vector<Monomial> terms)
    : n_(n), terms_(std::move(terms)) {
  if (n_ < 1) throw DomainError("observable: dimension must be >= 1");
  for (const auto& t : terms_) {
    if (static_cast<int>(t.exponents.size()) != n_) {
      throw DomainError("observable: exponent vector has wrong length");
    }
    int total = 0;
    for (int e : t.exponents) {
      if (e < 0) throw DomainError("observable: negative exponent");
      total += e;
    }
    if (t.coefficient != 0.0) degree_ = std::max(degree_, total);
  }
}

PolyObservable PolyObservable::constant(int n, double value) {
  return PolyObservable(n, {Monomial{std::vector<int>(static_cast<std::size_t>(n), 0), value}});
}

double PolyObservable::evaluate(const Eigen::VectorXd& x) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coefficient;
    for (int i = 0; i < n_; ++i) v *= std::pow(x(i), t.exponents[static_cast<std::size_t>(i)]);
    sum += v;
  }
  return sum;
}

PolyObservable PolyObservable::derivative(int i) const {
  std::vector<Monomial> out;
  for (const auto& t : terms_) {
    const int e = t.exponents[static_cast<std::size_t>(i)];
    if (e == 0) continue;
    Monomial d = t;
    d.coefficient *= e;
    --d.exponents[static_cast<std::size_t>(i)];
    out.push_back(std::move(d));
  }
  return PolyObservable(n_, std::move(out));
}

BlockPairCovariance::BlockPairCovariance(Eigen::MatrixXd sigma0,
                                         Eigen::MatrixXd sigma1,
                                         Eigen::MatrixXd sigma)
    : sigma0_(std::move(sigma0)), sigma1_(std::move(sigma1)), sigma_(std::move(sigma)) {
  const auto n = sigma0_.rows();
  if (n < 1 || sigma1_.rows() != n || sigma_.rows() != n) {
    throw DomainError("block pair covariance: blocks must share one size");
  }
  require_psd(sigma0_, "Sigma0");
  require_psd(sigma1_, "Sigma1");
  require_psd(sigma_, "Sigma");
  require_psd(joint(1.0), "Sigma(1)");
  require_psd(joint(-1.0), "Sigma(-1)");
}

Eigen::MatrixXd BlockPairCovariance::joint(double t) const {
  const auto n = sigma0_.rows();
  Eigen::MatrixXd m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = sigma0_;
  m.bottomRightCorner(n, n) = sigma0_;
  m.topRightCorner(n, n) = sigma1_ + t * sigma_;
  m.bottomLeftCorner(n, n) = sigma1_ + t * sigma_;
  return m;
}

double wick_expectation(const PolyObservable& f, const PolyObservable& g,
                        const Eigen::MatrixXd& cov) {
  const int n = f.dimension();
  if (g.dimension() != n || cov.rows() != 2 * n) {
    throw DomainError("wick_expectation: dimension mismatch");
  }
  require_psd(cov, "joint covariance");
  GaussianMoments moments(cov);
  std::vector<int> m(static_cast<std::size_t>(2 * n));
  double sum = 0.0;
  for (const auto& a : f.terms()) {
    for (const auto& b : g.terms()) {
      std::copy(a.exponents.begin(), a.exponents.end(), m.begin());
      std::copy(b.exponents.begin(), b.exponents.end(), m.begin() + n);
      sum += a.coefficient * b.coefficient * moments(m);
    }
  }
  return sum;
}

double gaussian_expectation(const PolyObservable& f, const Eigen::MatrixXd& cov) {
  if (cov.rows() != f.dimension()) {
    throw DomainError("gaussian_expectation: dimension mismatch");
  }
  require_psd(cov, "covariance");
  GaussianMoments moments(cov);
  double sum = 0.0;
  for (const auto& a : f.terms()) sum += a.coefficient * moments(a.exponents);
  return sum;
}

std::vector<double> lambda_series(const BlockPairCovariance& bpc,
                                  const PolyObservable& f) {
  const int d = f.degree();
  if (d > kMaxSeriesDegree) {
    throw DomainError("lambda_series: degree " + std::to_string(d) +
                      " exceeds the interpolation cap of " +
                      std::to_string(kMaxSeriesDegree));
  }
  const int m = 2 * d + 1;
  std::vector<double> values(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double t = std::cos(std::numbers::pi * (j + 0.5) / m);
    values[static_cast<std::size_t>(j)] = wick_expectation(f, f, bpc.joint(t));
  }
  // Chebyshev coefficients, then the monomial expansion of sum c_k T_k.
  std::vector<double> alpha(static_cast<std::size_t>(m), 0.0);
  std::vector<double> t_prev(static_cast<std::size_t>(m), 0.0);
  std::vector<double> t_cur(static_cast<std::size_t>(m), 0.0);
  t_cur[0] = 1.0;
  for (int k = 0; k < m; ++k) {
    double c = 0.0;
    for (int j = 0; j < m; ++j) {
      c += values[static_cast<std::size_t>(j)] *
           std::cos(std::numbers::pi * k * (j + 0.5) / m);
    }
    c *= (k == 0 ? 1.0 : 2.0) / m;
    for (int i = 0; i < m; ++i) alpha[static_cast<std::size_t>(i)] += c * t_cur[static_cast<std::size_t>(i)];
    std::vector<double> t_next(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i + 1 < m; ++i) {
      t_next[static_cast<std::size_t>(i + 1)] += (k == 0 ? 1.0 : 2.0) * t_cur[static_cast<std::size_t>(i)];
    }
    if (k > 0) {
      for (int i = 0; i < m; ++i) t_next[static_cast<std::size_t>(i)] -= t_prev[static_cast<std::size_t>(i)];
    }
    t_prev = std::move(t_cur);
    t_cur = std::move(t_next);
  }
  return alpha;
}

double derivative_formula(const BlockPairCovariance& bpc,
                          const PolyObservable& f, int k) {
  if (k < 0) throw DomainError("derivative_formula: k must be >= 0");
  const int n = bpc.dimension();
  // Partials in lexicographic order of (i_1, ..., i_k), i_1 most significant,
  // matching the row order of the Kronecker power.
  std::vector<PolyObservable> partials{f};
  for (int level = 0; level < k; ++level) {
    std::vector<PolyObservable> next;
    next.reserve(partials.size() * static_cast<std::size_t>(n));
    for (const auto& p : partials) {
      for (int i = 0; i < n; ++i) next.push_back(p.derivative(i));
    }
    partials = std::move(next);
  }
  const auto size = static_cast<Eigen::Index>(partials.size());
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    v(i) = gaussian_expectation(partials[static_cast<std::size_t>(i)], bpc.sigma0());
  }
  Eigen::MatrixXd kron = Eigen::MatrixXd::Ones(1, 1);
  for (int level = 0; level < k; ++level) {
    const auto r = kron.rows();
    Eigen::MatrixXd next(r * n, r * n);
    for (Eigen::Index a = 0; a < r; ++a) {
      for (Eigen::Index b = 0; b < r; ++b) {
        next.block(a * n, b * n, n, n) = kron(a, b) * bpc.sigma();
      }
    }
    kron = std::move(next);
  }
  return v.dot(kron * v);
}

std::vector<ReductionPoint> sigma1_reduction_check(
    const BlockPairCovariance& bpc, const PolyObservable& f,
    std::uint64_t n_mc, std::uint64_t seed, const std::vector<double>& ts,
    int threads) {
  const int n = bpc.dimension();
  if (f.dimension() != n) {
    throw DomainError("sigma1_reduction_check: dimension mismatch");
  }
  if (n_mc < 2) throw DomainError("sigma1_reduction_check: need >= 2 samples");
  const Eigen::MatrixXd reduced = bpc.sigma0() - bpc.sigma1();
  require_psd(reduced, "Sigma0 - Sigma1");
  const Eigen::MatrixXd common = psd_sqrt(bpc.sigma1());

  std::vector<ReductionPoint> out;
  for (std::size_t p = 0; p < ts.size(); ++p) {
    const double t = ts[p];
    Eigen::MatrixXd hat(2 * n, 2 * n);
    hat.topLeftCorner(n, n) = reduced;
    hat.bottomRightCorner(n, n) = reduced;
    hat.topRightCorner(n, n) = t * bpc.sigma();
    hat.bottomLeftCorner(n, n) = t * bpc.sigma();
    const Eigen::MatrixXd root = psd_sqrt(hat);
    const std::uint64_t point_seed = substream_seed(seed, p);
    const std::uint64_t chunks = (n_mc + kMcChunk - 1) / kMcChunk;
    std::vector<RunningStats> partial(static_cast<std::size_t>(chunks));
    parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
      Engine rng = make_engine(point_seed, c);
      std::normal_distribution<double> normal;
      Eigen::VectorXd z(2 * n);
      Eigen::VectorXd w(n);
      const std::uint64_t end = std::min(n_mc, (c + 1) * kMcChunk);
      for (std::uint64_t s = c * kMcChunk; s < end; ++s) {
        for (int i = 0; i < 2 * n; ++i) z(i) = normal(rng);
        for (int i = 0; i < n; ++i) w(i) = normal(rng);
        const Eigen::VectorXd xy = root * z;
        const Eigen::VectorXd shift = common * w;
        const Eigen::VectorXd x = xy.head(n) + shift;
        const Eigen::VectorXd y = xy.tail(n) + shift;
        partial[c].add(f.evaluate(x) * f.evaluate(y));
      }
    });
    RunningStats total;
    for (const auto& s : partial) total.merge(s);
    ReductionPoint point;
    point.t = t;
    point.exact = wick_expectation(f, f, bpc.joint(t));
    point.mc = to_estimate(total);
    const double diff = std::abs(point.mc.estimate - point.exact);
    point.z_score = point.mc.std_error > 0.0 ? diff / point.mc.std_error
                    : (diff <= 1e-12 * std::max(1.0, std::abs(point.exact)) ? 0.0
                                                                             : std::numeric_limits<double>::infinity());
    out.push_back(point);
  }
  return out;
}

BlockPairCovariance random_block_pair(int n, Engine& rng) {
  std::normal_distribution<double> normal;
  auto gaussian = [&] {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
    }
    return m;
  };
  const Eigen::MatrixXd l1 = gaussian();
  const Eigen::MatrixXd l = gaussian();
  const Eigen::MatrixXd r = gaussian();
  const Eigen::MatrixXd s1 = l1 * l1.transpose();
  const Eigen::MatrixXd s = l * l.transpose();
  const Eigen::MatrixXd s0 = s1 + s + r * r.transpose();
  return BlockPairCovariance(s0, s1, s);
}

PolyObservable random_observable(int n, int degree, Engine& rng) {
  std::normal_distribution<double> normal;
  std::vector<Monomial> terms;
  for (int p = 0; p <= degree; ++p) {
    for (auto& alpha : multi_indices(n, p)) {
      terms.push_back(Monomial{std::move(alpha), normal(rng)});
    }
  }
  return PolyObservable(n, std::move(terms));
}

}  // namespace kss
