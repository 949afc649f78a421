#pragma once

// Uniform cell-centred grids on [-L, L]^N (N = 1 or 2), sampled functions,
// finite-difference derivative tensors and discrete L^p integrals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mclab/error.hpp"

namespace mclab {

/// Grid multi-index. Only the first `dim` entries are meaningful; the rest stay 0.
using Index = std::array<int, 2>;
/// A point of R^N, padded like `Index`.
using Point = std::array<double, 2>;

class Domain {
 public:
  Domain() = default;

  /// Validates N ∈ {1,2}, even n ≥ 16, L > 0 and 4h ≤ m < L.
  static Domain make(int dim, int points_per_axis, double half_width, double support_margin) {
    if (dim != 1 && dim != 2) throw ValidationError("grid_dim", "N must be 1 or 2, got " + std::to_string(dim));
    if (points_per_axis < 16 || points_per_axis % 2 != 0)
      throw ValidationError("grid_points", "n must be an even integer >= 16, got " + std::to_string(points_per_axis));
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw ValidationError("grid_half_width", "L must be positive and finite");
    Domain d;
    d.dim_ = dim;
    d.n_ = points_per_axis;
    d.half_width_ = half_width;
    d.margin_ = support_margin;
    d.h_ = 2.0 * half_width / points_per_axis;
    if (!(support_margin < half_width))
      throw ValidationError("support_margin", "margin m must be smaller than L");
    if (support_margin < 4.0 * d.h_ * (1.0 - 1e-12))
      throw ValidationError("support_margin", "margin m = " + std::to_string(support_margin) +
                                                  " is below 4h = " + std::to_string(4.0 * d.h_));
    return d;
  }

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return n_; }
  double half_width() const noexcept { return half_width_; }
  double support_margin() const noexcept { return margin_; }
  double spacing() const noexcept { return h_; }
  /// h^N, the volume of one cell.
  double cell_volume() const noexcept { return dim_ == 1 ? h_ : h_ * h_; }
  /// Euclidean diameter of the box, 2L·√N.
  double diameter() const noexcept { return 2.0 * half_width_ * std::sqrt(static_cast<double>(dim_)); }

  std::size_t size() const noexcept {
    return dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
  }

  double coordinate(int i) const noexcept { return -half_width_ + (i + 0.5) * h_; }

  Point point(const Index& idx) const noexcept {
    return {coordinate(idx[0]), dim_ == 2 ? coordinate(idx[1]) : 0.0};
  }

  bool contains(const Index& idx) const noexcept {
    if (idx[0] < 0 || idx[0] >= n_) return false;
    if (dim_ == 2 && (idx[1] < 0 || idx[1] >= n_)) return false;
    return true;
  }

  std::size_t flat(const Index& idx) const noexcept {
    return dim_ == 1 ? static_cast<std::size_t>(idx[0])
                     : static_cast<std::size_t>(idx[0]) * n_ + static_cast<std::size_t>(idx[1]);
  }

  Index unflat(std::size_t f) const noexcept {
    if (dim_ == 1) return {static_cast<int>(f), 0};
    return {static_cast<int>(f / n_), static_cast<int>(f % n_)};
  }

  /// Index of the grid point closest to x (clamped to the box).
  Index nearest(const Point& x) const noexcept {
    auto axis = [&](double c) {
      int i = static_cast<int>(std::floor((c + half_width_) / h_));
      return std::clamp(i, 0, n_ - 1);
    };
    return {axis(x[0]), dim_ == 2 ? axis(x[1]) : 0};
  }

  /// True when the cell centre lies in the margin band |x|_∞ > L − m.
  bool in_margin_band(const Index& idx) const noexcept {
    const Point x = point(idx);
    const double inner = half_width_ - margin_;
    return std::abs(x[0]) > inner || (dim_ == 2 && std::abs(x[1]) > inner);
  }

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  int dim_ = 1;
  int n_ = 16;
  double half_width_ = 1.0;
  double margin_ = 0.25;
  double h_ = 0.125;
};

/// Samples of u at the cell centres, row-major (first axis slowest).
struct GridFunction {
  Domain domain;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(Domain d, std::vector<double> v) : domain(d), values(std::move(v)) {
    if (values.size() != domain.size())
      throw ValidationError("grid_values", "expected " + std::to_string(domain.size()) + " values, got " +
                                               std::to_string(values.size()));
    for (double x : values)
      if (!std::isfinite(x)) throw ValidationError("grid_values", "non-finite sample");
  }

  static GridFunction zeros(const Domain& d) { return GridFunction(d, std::vector<double>(d.size(), 0.0)); }

  double at(const Index& idx) const { return values[domain.flat(idx)]; }

  /// Zero extension outside the box.
  double at_or_zero(const Index& idx) const { return domain.contains(idx) ? values[domain.flat(idx)] : 0.0; }

  bool vanishes_on_margin() const {
    for (std::size_t f = 0; f < values.size(); ++f)
      if (values[f] != 0.0 && domain.in_margin_band(domain.unflat(f))) return false;
    return true;
  }
};

/// Shifts u by an integer number of cells, filling with zeros. Throws if a
/// nonzero value would leave the box.
inline GridFunction shifted(const GridFunction& u, const Index& offset) {
  const Domain& d = u.domain;
  GridFunction out = GridFunction::zeros(d);
  for (std::size_t f = 0; f < u.values.size(); ++f) {
    if (u.values[f] == 0.0) continue;
    Index src = d.unflat(f);
    Index dst{src[0] + offset[0], d.dim() == 2 ? src[1] + offset[1] : 0};
    if (!d.contains(dst)) throw ValidationError("shift_support", "shift moves nonzero values outside the box");
    out.values[d.flat(dst)] = u.values[f];
  }
  return out;
}

/// |D^ℓ u| on the grid together with every partial derivative ∂^α u, |α| = ℓ.
struct DerivativeField {
  int order = 0;
  std::vector<double> magnitudes;
  std::vector<Index> multi_indices;            // α, graded by decreasing α_0
  std::vector<double> weights;                 // ℓ!/α!
  std::vector<std::vector<double>> components;  // ∂^α u per multi-index

  /// Multinomial-weighted ℓ² distance between the derivative tensors at two
  /// flat positions; a negative position stands for a point outside the box.
  double tensor_distance(std::ptrdiff_t a, std::ptrdiff_t b) const {
    double s = 0.0;
    for (std::size_t c = 0; c < components.size(); ++c) {
      const double va = a >= 0 ? components[c][a] : 0.0;
      const double vb = b >= 0 ? components[c][b] : 0.0;
      s += weights[c] * (va - vb) * (va - vb);
    }
    return std::sqrt(s);
  }
};

inline constexpr int kMaxDerivativeOrder = 4;

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// One pass of a central difference along `axis` with zero extension.
// order 1: (u[i+1] − u[i−1]) / 2h, order 2: (u[i+1] − 2u[i] + u[i−1]) / h².
inline std::vector<double> central_difference(const Domain& d, const std::vector<double>& in, int axis, int order) {
  std::vector<double> out(in.size(), 0.0);
  const int n = d.points_per_axis();
  const double h = d.spacing();
  const std::size_t stride = (d.dim() == 2 && axis == 0) ? static_cast<std::size_t>(n) : 1;
  const std::size_t lines = d.size() / n;
  for (std::size_t line = 0; line < lines; ++line) {
    // Start of the line: for axis 0 in 2-D the line index is the column.
    const std::size_t base = (stride == 1) ? line * n : line;
    for (int i = 0; i < n; ++i) {
      const double left = i > 0 ? in[base + (i - 1) * stride] : 0.0;
      const double right = i + 1 < n ? in[base + (i + 1) * stride] : 0.0;
      const double mid = in[base + i * stride];
      out[base + i * stride] = order == 1 ? (right - left) / (2.0 * h) : (right - 2.0 * mid + left) / (h * h);
    }
  }
  return out;
}

inline std::vector<double> axis_derivative(const Domain& d, std::vector<double> v, int axis, int order) {
  for (int k = 0; k < order / 2; ++k) v = central_difference(d, v, axis, 2);
  if (order % 2 == 1) v = central_difference(d, v, axis, 1);
  return v;
}

}  // namespace detail

/// Computes ∂^α u for all |α| = ℓ by repeated central differences (compact
/// second differences for each pair of derivatives along an axis, one
/// first difference for an odd remainder), with zero extension beyond the box.
/// |D^ℓ u| = sqrt(Σ_α (ℓ!/α!) (∂^α u)²).
inline DerivativeField derivative_field(const GridFunction& u, int order) {
  if (order < 0 || order > kMaxDerivativeOrder)
    throw ValidationError("derivative_order", "order must be in [0, " + std::to_string(kMaxDerivativeOrder) +
                                                  "], got " + std::to_string(order));
  const Domain& d = u.domain;
  DerivativeField field;
  field.order = order;
  if (order == 0) {
    field.multi_indices = {Index{0, 0}};
    field.weights = {1.0};
    field.components = {u.values};
    field.magnitudes.resize(u.values.size());
    for (std::size_t i = 0; i < u.values.size(); ++i) field.magnitudes[i] = std::abs(u.values[i]);
    return field;
  }
  const double lfact = detail::factorial(order);
  const int second_max = d.dim() == 2 ? order : 0;
  for (int a1 = 0; a1 <= second_max; ++a1) {
    const int a0 = order - a1;
    std::vector<double> v = detail::axis_derivative(d, u.values, 0, a0);
    if (a1 > 0) v = detail::axis_derivative(d, std::move(v), 1, a1);
    field.multi_indices.push_back({a0, a1});
    field.weights.push_back(lfact / (detail::factorial(a0) * detail::factorial(a1)));
    field.components.push_back(std::move(v));
  }
  field.magnitudes.assign(u.values.size(), 0.0);
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < field.components.size(); ++c)
      s += field.weights[c] * field.components[c][i] * field.components[c][i];
    field.magnitudes[i] = std::sqrt(s);
  }
  return field;
}

/// h^N Σ |f_i|^p, summed in index order.
inline double power_integral(std::span<const double> field, double p, const Domain& d) {
  long double s = 0.0L;
  if (p == 1.0) {
    for (double v : field) s += std::abs(v);
  } else if (p == 2.0) {
    for (double v : field) s += static_cast<long double>(v) * v;
  } else {
    for (double v : field)
      if (v != 0.0) s += std::pow(std::abs(static_cast<long double>(v)), static_cast<long double>(p));
  }
  return static_cast<double>(s) * d.cell_volume();
}

/// (h^N Σ |f_i|^p)^{1/p}.
inline double lp_norm(std::span<const double> field, double p, const Domain& d) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("lp_exponent", "p must be finite and >= 1");
  return std::pow(power_integral(field, p, d), 1.0 / p);
}

inline double sup_norm(std::span<const double> field) {
  double m = 0.0;
  for (double v : field) m = std::max(m, std::abs(v));
  return m;
}

// --- grid dump format -------------------------------------------------------
// Header line "N n L m", then n^N decimal values, one per line, row-major.

inline void write_dump(std::ostream& os, const GridFunction& u) {
  const Domain& d = u.domain;
  os.precision(17);
  os << d.dim() << ' ' << d.points_per_axis() << ' ' << d.half_width() << ' ' << d.support_margin() << '\n';
  for (double v : u.values) os << v << '\n';
}

inline std::string dump_string(const GridFunction& u) {
  std::ostringstream os;
  write_dump(os, u);
  return os.str();
}

inline GridFunction read_dump(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ValidationError("grid_dump", "missing header line");
  std::istringstream hs(header);
  int dim = 0, n = 0;
  double L = 0.0, m = 0.0;
  if (!(hs >> dim >> n >> L >> m)) throw ValidationError("grid_dump", "malformed header '" + header + "'");
  std::string extra;
  if (hs >> extra) throw ValidationError("grid_dump", "trailing tokens in header");
  const Domain d = Domain::make(dim, n, L, m);
  std::vector<double> values;
  values.reserve(d.size());
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      throw ValidationError("grid_dump", "unparsable value '" + line + "'");
    }
    if (line.find_first_not_of(" \t\r", used) != std::string::npos)
      throw ValidationError("grid_dump", "unparsable value '" + line + "'");
    values.push_back(v);
  }
  if (values.size() != d.size())
    throw ValidationError("grid_dump", "expected " + std::to_string(d.size()) + " values, found " +
                                           std::to_string(values.size()));
  return GridFunction(d, std::move(values));
}

}  // namespace mclab
