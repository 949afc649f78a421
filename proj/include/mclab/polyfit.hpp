#pragma once

// Best L^q approximation (q ∈ {1, 2}) of sampled values on a ball by
// polynomials of degree ≤ d, in the monomial basis of z = (y − x)/r.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mclab/ball.hpp"
#include "mclab/error.hpp"
#include "mclab/grid.hpp"

namespace mclab {

inline constexpr int kMaxFitDegree = 3;

/// Monomials z^α with |α| ≤ d in graded order (1, z0, z1, z0², z0 z1, z1², ...).
/// d = −1 is the empty basis.
struct PolyBasis {
  int dim = 1;
  int degree = -1;
  std::vector<Index> exponents;

  static PolyBasis make(int dim, int degree) {
    if (dim != 1 && dim != 2) throw ValidationError("grid_dim", "basis dimension must be 1 or 2");
    if (degree < -1 || degree > kMaxFitDegree)
      throw ValidationError("fit_degree", "degree must be in [-1, " + std::to_string(kMaxFitDegree) + "]");
    PolyBasis b;
    b.dim = dim;
    b.degree = degree;
    for (int g = 0; g <= degree; ++g) {
      if (dim == 1) {
        b.exponents.push_back({g, 0});
        continue;
      }
      for (int a1 = 0; a1 <= g; ++a1) b.exponents.push_back({g - a1, a1});
    }
    return b;
  }

  std::size_t size() const noexcept { return exponents.size(); }

  /// C(N + d, d), with 0 for d = −1.
  static std::size_t expected_size(int dim, int degree) {
    if (degree < 0) return 0;
    return dim == 1 ? static_cast<std::size_t>(degree + 1) : static_cast<std::size_t>((degree + 1) * (degree + 2) / 2);
  }

  void evaluate(const Point& z, double* out) const {
    for (std::size_t t = 0; t < exponents.size(); ++t) {
      double v = 1.0;
      for (int e = 0; e < exponents[t][0]; ++e) v *= z[0];
      for (int e = 0; e < exponents[t][1]; ++e) v *= z[1];
      out[t] = v;
    }
  }
};

struct FitResult {
  std::vector<double> coefficients;
  double residual = 0.0;
  int iterations = 0;
  bool converged = true;
  bool rank_deficient = false;
};

inline nlohmann::json to_json(const FitResult& r) {
  return {{"coefficients", r.coefficients},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"rank_deficient", r.rank_deficient}};
}

/// Multiset of ball values stored as sorted nonzero values plus a count of
/// zeros. Exact constant fits and oscillations are computed from it.
class ValueMultiset {
 public:
  ValueMultiset() = default;

  void clear() {
    nonzero_.clear();
    total_ = 0;
  }
  void reserve(std::size_t n) { nonzero_.reserve(n); }
  void push_nonzero(double v) { nonzero_.push_back(v); }

  /// Sorts the collected nonzero values; `total` counts zeros as well.
  void finalize(std::size_t total) {
    total_ = total;
    std::sort(nonzero_.begin(), nonzero_.end());
    negatives_ = static_cast<std::size_t>(std::lower_bound(nonzero_.begin(), nonzero_.end(), 0.0) - nonzero_.begin());
  }

  std::size_t size() const noexcept { return total_; }
  std::size_t zeros() const noexcept { return total_ - nonzero_.size(); }

  /// t-th smallest element (0-based), zeros included.
  double at(std::size_t t) const {
    if (t < negatives_) return nonzero_[t];
    if (t < negatives_ + zeros()) return 0.0;
    return nonzero_[t - zeros()];
  }

  /// Lower median: element (m − 1)/2 of the sorted values.
  double median() const { return total_ == 0 ? 0.0 : at((total_ - 1) / 2); }

  double mean() const {
    long double s = 0.0L;
    for (double v : nonzero_) s += v;
    return total_ == 0 ? 0.0 : static_cast<double>(s / total_);
  }

  /// (1/m) Σ |v − c|.
  double mean_abs_deviation(double c) const {
    long double s = 0.0L;
    for (double v : nonzero_) s += std::abs(v - c);
    s += static_cast<long double>(zeros()) * std::abs(c);
    return total_ == 0 ? 0.0 : static_cast<double>(s / total_);
  }

  /// sqrt((1/m) Σ (v − c)²).
  double rms_deviation(double c) const {
    long double s = 0.0L;
    for (double v : nonzero_) s += static_cast<long double>(v - c) * (v - c);
    s += static_cast<long double>(zeros()) * c * c;
    return total_ == 0 ? 0.0 : std::sqrt(static_cast<double>(s / total_));
  }

  /// (1/m²) Σ_y Σ_z |v_y − v_z|, from sorted gaps: Σ_t (v_(t) − v_(t−1))·t·(m − t)·2.
  double double_average_oscillation() const {
    if (total_ < 2) return 0.0;
    const long double m = static_cast<long double>(total_);
    long double s = 0.0L;
    // Walk the distinct runs: negatives, zero block, positives.
    double prev = at(0);
    auto step = [&](std::size_t t, double v) {
      if (v != prev) s += static_cast<long double>(v - prev) * t * (m - t);
      prev = v;
    };
    for (std::size_t t = 1; t < negatives_; ++t) step(t, nonzero_[t]);
    if (zeros() > 0 && negatives_ > 0) step(negatives_, 0.0);
    const std::size_t pos_start = negatives_ + zeros();
    for (std::size_t t = std::max<std::size_t>(pos_start, 1); t < total_; ++t) step(t, nonzero_[t - zeros()]);
    return static_cast<double>(2.0L * s / (m * m));
  }

  const std::vector<double>& nonzero() const noexcept { return nonzero_; }

 private:
  std::vector<double> nonzero_;
  std::size_t negatives_ = 0;
  std::size_t total_ = 0;
};

namespace detail {

inline double mean_abs_residual(std::span<const Point> z, std::span<const double> v, const PolyBasis& basis,
                                const Eigen::VectorXd& c) {
  long double s = 0.0L;
  std::array<double, 16> phi{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    basis.evaluate(z[i], phi.data());
    double p = 0.0;
    for (std::size_t t = 0; t < basis.size(); ++t) p += c[t] * phi[t];
    s += std::abs(v[i] - p);
  }
  return static_cast<double>(s / v.size());
}

// Solves Σ w_i φ_i φ_iᵀ c = Σ w_i v_i φ_i; minimum-norm when singular.
inline Eigen::VectorXd weighted_solve(std::span<const Point> z, std::span<const double> v, const PolyBasis& basis,
                                      const double* weights, bool& rank_deficient) {
  const std::size_t b = basis.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(b, b);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b);
  std::array<double, 16> phi{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    basis.evaluate(z[i], phi.data());
    const double w = weights ? weights[i] : 1.0;
    for (std::size_t s = 0; s < b; ++s) {
      rhs[s] += w * v[i] * phi[s];
      for (std::size_t t = 0; t <= s; ++t) A(s, t) += w * phi[s] * phi[t];
    }
  }
  for (std::size_t s = 0; s < b; ++s)
    for (std::size_t t = s + 1; t < b; ++t) A(s, t) = A(t, s);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  cod.setThreshold(1e-13);
  if (static_cast<std::size_t>(cod.rank()) < b) rank_deficient = true;
  return cod.solve(rhs);
}

inline std::vector<double> to_std(const Eigen::VectorXd& c) { return std::vector<double>(c.data(), c.data() + c.size()); }

}  // namespace detail

/// Fits `values` at scaled coordinates `z` (|z| ≤ 1) by polynomials in `basis`.
///
/// q = 2 solves the normal equations. q = 1 with d = 0 returns the lower median
/// exactly; q = 1 with d ≥ 1 runs IRLS (ε = 1e−9·max|v|, relative tolerance
/// 1e−8, at most 200 iterations) from the better of the L² fit and the median
/// constant and reports the best iterate.
inline FitResult fit_polynomial(std::span<const Point> z, std::span<const double> values, const PolyBasis& basis,
                                int q) {
  if (q != 1 && q != 2) throw ValidationError("fit_exponent", "q must be 1 or 2, got " + std::to_string(q));
  if (values.empty()) throw ValidationError("ball_empty", "no samples to fit");
  if (z.size() != values.size()) throw ValidationError("fit_samples", "coordinate and value counts differ");
  FitResult out;
  if (basis.size() == 0) {
    long double s = 0.0L;
    for (double v : values) s += q == 1 ? std::abs(v) : static_cast<long double>(v) * v;
    s /= values.size();
    out.residual = q == 1 ? static_cast<double>(s) : std::sqrt(static_cast<double>(s));
    return out;
  }
  if (values.size() < basis.size())
    throw ValidationError("fit_infeasible", std::to_string(values.size()) + " samples for " +
                                                std::to_string(basis.size()) + " unknowns");
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) {
    out.coefficients.assign(basis.size(), 0.0);
    return out;
  }

  if (q == 1 && basis.degree == 0) {
    std::vector<double> sorted(values.begin(), values.end());
    std::nth_element(sorted.begin(), sorted.begin() + (sorted.size() - 1) / 2, sorted.end());
    const double med = sorted[(sorted.size() - 1) / 2];
    long double s = 0.0L;
    for (double v : values) s += std::abs(v - med);
    out.coefficients = {med};
    out.residual = static_cast<double>(s / values.size());
    return out;
  }

  bool rank_deficient = false;
  Eigen::VectorXd c2 = detail::weighted_solve(z, values, basis, nullptr, rank_deficient);
  if (q == 2) {
    long double s = 0.0L;
    std::array<double, 16> phi{};
    for (std::size_t i = 0; i < values.size(); ++i) {
      basis.evaluate(z[i], phi.data());
      double p = 0.0;
      for (std::size_t t = 0; t < basis.size(); ++t) p += c2[t] * phi[t];
      s += static_cast<long double>(values[i] - p) * (values[i] - p);
    }
    out.coefficients = detail::to_std(c2);
    out.residual = std::sqrt(static_cast<double>(s / values.size()));
    out.rank_deficient = rank_deficient;
    return out;
  }

  // q = 1, d ≥ 1: IRLS on a precomputed design matrix.
  const std::size_t n = values.size(), b = basis.size();
  Eigen::MatrixXd Phi(n, b);
  {
    std::array<double, 16> phi{};
    for (std::size_t i = 0; i < n; ++i) {
      basis.evaluate(z[i], phi.data());
      for (std::size_t t = 0; t < b; ++t) Phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = phi[t];
    }
  }
  const Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(n));
  auto mean_abs = [&](const Eigen::VectorXd& c) { return (v - Phi * c).cwiseAbs().sum() / static_cast<double>(n); };
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + (sorted.size() - 1) / 2, sorted.end());
  Eigen::VectorXd cmed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b));
  cmed[0] = sorted[(sorted.size() - 1) / 2];
  const double r2 = mean_abs(c2);
  const double rmed = mean_abs(cmed);
  Eigen::VectorXd best = r2 <= rmed ? c2 : cmed;
  double best_res = std::min(r2, rmed);
  Eigen::VectorXd current = best;
  double prev = best_res;
  const double eps = 1e-9 * scale;
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd WPhi(n, b);
  out.converged = false;
  int it = 0;
  for (it = 1; it <= 200; ++it) {
    w = (v - Phi * current).cwiseAbs().cwiseMax(eps).cwiseInverse();
    WPhi = w.asDiagonal() * Phi;
    const Eigen::MatrixXd A = Phi.transpose() * WPhi;
    const Eigen::VectorXd rhs = WPhi.transpose() * v;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    cod.setThreshold(1e-13);
    if (static_cast<std::size_t>(cod.rank()) < b) rank_deficient = true;
    current = cod.solve(rhs);
    const double res = mean_abs(current);
    if (res < best_res) {
      best_res = res;
      best = current;
    }
    if (std::abs(prev - res) <= 1e-8 * std::max(prev, std::numeric_limits<double>::min())) {
      out.converged = true;
      break;
    }
    prev = res;
  }
  out.iterations = std::min(it, 200);
  out.coefficients = detail::to_std(best);
  out.residual = best_res;
  out.rank_deficient = rank_deficient;
  return out;
}

/// Lattice samples of B_r(x) with zero extension: scaled coordinates and values.
struct BallSamples {
  std::vector<Point> z;
  std::vector<double> values;
};

inline void gather_ball(std::span<const double> field, const Domain& d, const Index& center, double radius,
                        const BallStencil& stencil, BallSamples& out) {
  out.z.clear();
  out.values.clear();
  out.z.reserve(stencil.lattice_count());
  out.values.reserve(stencil.lattice_count());
  const double scale = d.spacing() / radius;
  stencil.for_each_offset([&](const Index& o) {
    const Index y{center[0] + o[0], d.dim() == 2 ? center[1] + o[1] : 0};
    out.z.push_back({o[0] * scale, o[1] * scale});
    out.values.push_back(d.contains(y) ? field[d.flat(y)] : 0.0);
  });
}

/// Best polynomial of degree ≤ d on the ball (lattice points outside the box
/// carry the value 0).
inline FitResult best_polynomial(const GridFunction& u, const Ball& ball, int degree, int q) {
  const Domain& d = u.domain;
  const PolyBasis basis = PolyBasis::make(d.dim(), degree);
  const BallStencil stencil = make_stencil(d, ball.radius);
  BallSamples samples;
  gather_ball(u.values, d, ball.center, ball.radius, stencil, samples);
  return fit_polynomial(samples.z, samples.values, basis, q);
}

struct MonotonicityResult {
  bool ok = true;
  double residual_low = 0.0;   // degree d1
  double residual_high = 0.0;  // degree d2
  Index center{0, 0};
  double radius = 0.0;
};

/// residual(d2) ≤ residual(d1) + 1e−7·scale for d1 ≤ d2, scale = max |u| on the ball (at least 1).
inline MonotonicityResult residual_monotonicity_check(const GridFunction& u, const Ball& ball, int d1, int d2, int q) {
  if (d1 > d2) throw ValidationError("fit_degree", "monotonicity check needs d1 <= d2");
  MonotonicityResult r;
  r.center = ball.center;
  r.radius = ball.radius;
  r.residual_low = best_polynomial(u, ball, d1, q).residual;
  r.residual_high = best_polynomial(u, ball, d2, q).residual;
  double scale = 1.0;
  for (const Index& y : ball.member_indices) scale = std::max(scale, std::abs(u.at(y)));
  r.ok = r.residual_high <= r.residual_low + 1e-7 * scale;
  return r;
}

}  // namespace mclab
