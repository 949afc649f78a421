#pragma once

// Discrete Euclidean balls on the lattice hZ^N.
//
// A ball B_r(x) is the set of lattice points y with |y − x| ≤ r. Functions are
// zero-extended beyond the box, so a ball near the boundary still has its full
// lattice population: `member_indices` lists the in-box members and
// `lattice_count` counts all of them. Averages divide by `lattice_count`.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mclab/error.hpp"
#include "mclab/grid.hpp"

namespace mclab {

/// Lattice offsets of a ball of radius r, stored by rows: for each offset o_0
/// in [−reach, reach] the admissible o_1 form the run [−w(o_0), w(o_0)].
class BallStencil {
 public:
  BallStencil() = default;

  BallStencil(int dim, double radius_in_cells) : dim_(dim), radius_cells_(radius_in_cells) {
    // Integer bound on |o|² with a relative slack so that r = 2h admits |o|² = 4.
    max_dist2_ = static_cast<long long>(std::floor(radius_in_cells * radius_in_cells * (1.0 + 1e-12) + 1e-9));
    reach_ = static_cast<int>(std::floor(std::sqrt(static_cast<double>(max_dist2_)) + 1e-12));
    while (static_cast<long long>(reach_ + 1) * (reach_ + 1) <= max_dist2_) ++reach_;
    while (static_cast<long long>(reach_) * reach_ > max_dist2_) --reach_;
    if (dim == 1) {
      half_widths_ = {reach_};
      lattice_count_ = 2 * static_cast<std::size_t>(reach_) + 1;
    } else {
      half_widths_.resize(2 * reach_ + 1);
      lattice_count_ = 0;
      for (int o0 = -reach_; o0 <= reach_; ++o0) {
        const long long rest = max_dist2_ - static_cast<long long>(o0) * o0;
        int w = static_cast<int>(std::floor(std::sqrt(static_cast<double>(rest))));
        while (static_cast<long long>(w + 1) * (w + 1) <= rest) ++w;
        while (static_cast<long long>(w) * w > rest) --w;
        half_widths_[o0 + reach_] = w;
        lattice_count_ += 2 * static_cast<std::size_t>(w) + 1;
      }
    }
  }

  int dim() const noexcept { return dim_; }
  double radius_cells() const noexcept { return radius_cells_; }
  long long max_dist2() const noexcept { return max_dist2_; }
  int reach() const noexcept { return reach_; }
  std::size_t lattice_count() const noexcept { return lattice_count_; }

  /// Half-width of the run at first-axis offset o0 (2-D only).
  int half_width(int o0) const noexcept { return half_widths_[o0 + reach_]; }

  bool contains_offset(long long o0, long long o1) const noexcept { return o0 * o0 + o1 * o1 <= max_dist2_; }

  /// Visits every lattice offset in deterministic (row-major) order.
  template <class Fn>
  void for_each_offset(Fn&& fn) const {
    if (dim_ == 1) {
      for (int o = -reach_; o <= reach_; ++o) fn(Index{o, 0});
      return;
    }
    for (int o0 = -reach_; o0 <= reach_; ++o0) {
      const int w = half_width(o0);
      for (int o1 = -w; o1 <= w; ++o1) fn(Index{o0, o1});
    }
  }

 private:
  int dim_ = 1;
  double radius_cells_ = 0.0;
  long long max_dist2_ = 0;
  int reach_ = 0;
  std::size_t lattice_count_ = 1;
  std::vector<int> half_widths_{0};
};

struct Ball {
  Index center{0, 0};
  double radius = 0.0;
  std::vector<Index> member_indices;  // in-box members, row-major order
  std::size_t lattice_count = 0;      // all lattice points of the ball

  bool contains(const Index& idx) const {
    return std::find(member_indices.begin(), member_indices.end(), idx) != member_indices.end();
  }
};

inline void require_radius_floor(const Domain& d, double r) {
  if (!(r >= 2.0 * d.spacing() * (1.0 - 1e-12)) || !std::isfinite(r))
    throw ValidationError("radius_floor", "ball radius " + std::to_string(r) + " is below 2h = " +
                                              std::to_string(2.0 * d.spacing()));
}

inline BallStencil make_stencil(const Domain& d, double r) { return BallStencil(d.dim(), r / d.spacing()); }

/// Exact Euclidean membership on cell centres; r ≥ 2h.
inline Ball ball_members(const Domain& d, const Index& center, double r) {
  require_radius_floor(d, r);
  if (!d.contains(center)) throw ValidationError("ball_center", "center outside the box");
  const BallStencil stencil = make_stencil(d, r);
  Ball ball;
  ball.center = center;
  ball.radius = r;
  ball.lattice_count = stencil.lattice_count();
  stencil.for_each_offset([&](const Index& o) {
    Index y{center[0] + o[0], d.dim() == 2 ? center[1] + o[1] : 0};
    if (d.contains(y)) ball.member_indices.push_back(y);
  });
  return ball;
}

/// ((1/m) Σ |v_i|^q)^{1/q} over an explicit list of values.
inline double ball_average(std::span<const double> values, double q) {
  if (values.empty()) throw ValidationError("ball_empty", "cannot average over an empty ball");
  if (!(q >= 1.0)) throw ValidationError("average_exponent", "q must be >= 1");
  long double s = 0.0L;
  for (double v : values) s += std::pow(std::abs(static_cast<long double>(v)), static_cast<long double>(q));
  return std::pow(static_cast<double>(s / values.size()), 1.0 / q);
}

/// Equal-weight average of |field|^q over the ball (zero extension), to the power 1/q.
inline double ball_average(std::span<const double> field, const Domain& d, const Ball& ball, double q) {
  if (!(q >= 1.0)) throw ValidationError("average_exponent", "q must be >= 1");
  long double s = 0.0L;
  for (const Index& y : ball.member_indices) {
    const double v = field[d.flat(y)];
    if (v != 0.0) s += std::pow(std::abs(static_cast<long double>(v)), static_cast<long double>(q));
  }
  return std::pow(static_cast<double>(s / ball.lattice_count), 1.0 / q);
}

/// Sums of a field over lattice balls in O(#rows) using per-row prefix sums.
class BallSummer {
 public:
  BallSummer() = default;

  BallSummer(const Domain& d, std::span<const double> field) : domain_(d) {
    const int n = d.points_per_axis();
    const std::size_t rows = d.dim() == 1 ? 1 : static_cast<std::size_t>(n);
    prefix_.assign(rows * (n + 1), 0.0L);
    for (std::size_t r = 0; r < rows; ++r) {
      long double acc = 0.0L;
      for (int j = 0; j < n; ++j) {
        acc += field[r * n + j];
        prefix_[r * (n + 1) + j + 1] = acc;
      }
    }
  }

  double sum(const Index& c, const BallStencil& s) const {
    const int n = domain_.points_per_axis();
    if (domain_.dim() == 1) return row_sum(0, c[0] - s.reach(), c[0] + s.reach(), n);
    long double total = 0.0L;
    const int lo0 = std::max(0, c[0] - s.reach());
    const int hi0 = std::min(n - 1, c[0] + s.reach());
    for (int r = lo0; r <= hi0; ++r) {
      const int w = s.half_width(r - c[0]);
      total += row_sum_ld(static_cast<std::size_t>(r), c[1] - w, c[1] + w, n);
    }
    return std::max(0.0, static_cast<double>(total));
  }

 private:
  long double row_sum_ld(std::size_t row, int lo, int hi, int n) const {
    lo = std::max(lo, 0);
    hi = std::min(hi, n - 1);
    if (lo > hi) return 0.0L;
    const long double* p = prefix_.data() + row * (n + 1);
    return p[hi + 1] - p[lo];
  }
  double row_sum(std::size_t row, int lo, int hi, int n) const {
    return std::max(0.0, static_cast<double>(row_sum_ld(row, lo, hi, n)));
  }

  Domain domain_;
  std::vector<long double> prefix_;
};

/// Nonzero cells of a field with their multi-indices and bounding box; used to
/// visit only the informative members of large balls.
class SupportIndex {
 public:
  SupportIndex() = default;

  SupportIndex(const Domain& d, std::span<const double> field) : domain_(d) {
    lo_ = {d.points_per_axis(), d.dim() == 2 ? d.points_per_axis() : 0};
    hi_ = {-1, d.dim() == 2 ? -1 : 0};
    for (std::size_t f = 0; f < field.size(); ++f) {
      if (field[f] == 0.0) continue;
      const Index idx = d.unflat(f);
      flats_.push_back(f);
      indices_.push_back(idx);
      values_.push_back(field[f]);
      for (int a = 0; a < d.dim(); ++a) {
        lo_[a] = std::min(lo_[a], idx[a]);
        hi_[a] = std::max(hi_[a], idx[a]);
      }
    }
  }

  std::size_t size() const noexcept { return flats_.size(); }
  bool empty() const noexcept { return flats_.empty(); }
  const std::vector<std::size_t>& flats() const noexcept { return flats_; }
  const std::vector<Index>& indices() const noexcept { return indices_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const Index& lower() const noexcept { return lo_; }
  const Index& upper() const noexcept { return hi_; }

  /// True when every nonzero cell lies in B(c).
  bool covered_by(const Index& c, const BallStencil& s) const {
    if (flats_.empty()) return true;
    long long far[2] = {0, 0};
    for (int a = 0; a < domain_.dim(); ++a)
      far[a] = std::max(std::abs(static_cast<long long>(lo_[a]) - c[a]), std::abs(static_cast<long long>(hi_[a]) - c[a]));
    return s.contains_offset(far[0], far[1]);
  }

  /// False when the ball cannot contain any nonzero cell.
  bool may_intersect(const Index& c, const BallStencil& s) const {
    if (flats_.empty()) return false;
    for (int a = 0; a < domain_.dim(); ++a)
      if (c[a] + s.reach() < lo_[a] || c[a] - s.reach() > hi_[a]) return false;
    return true;
  }

  /// Calls fn(flat, value) for each nonzero member of B(c), choosing between a
  /// scan of the ball rows and a scan of the support list by cost.
  template <class Fn>
  void for_each_member(std::span<const double> field, const Index& c, const BallStencil& s, Fn&& fn) const {
    if (!may_intersect(c, s)) return;
    const Domain& d = domain_;
    const int n = d.points_per_axis();
    if (s.lattice_count() <= flats_.size()) {
      if (d.dim() == 1) {
        const int lo = std::max(0, c[0] - s.reach()), hi = std::min(n - 1, c[0] + s.reach());
        for (int i = lo; i <= hi; ++i)
          if (field[i] != 0.0) fn(static_cast<std::size_t>(i), field[i]);
        return;
      }
      const int lo0 = std::max(0, c[0] - s.reach()), hi0 = std::min(n - 1, c[0] + s.reach());
      for (int r = lo0; r <= hi0; ++r) {
        const int w = s.half_width(r - c[0]);
        const int lo = std::max(0, c[1] - w), hi = std::min(n - 1, c[1] + w);
        const std::size_t base = static_cast<std::size_t>(r) * n;
        for (int j = lo; j <= hi; ++j)
          if (field[base + j] != 0.0) fn(base + j, field[base + j]);
      }
      return;
    }
    for (std::size_t k = 0; k < flats_.size(); ++k) {
      const long long o0 = indices_[k][0] - c[0];
      const long long o1 = d.dim() == 2 ? indices_[k][1] - c[1] : 0;
      if (s.contains_offset(o0, o1)) fn(flats_[k], values_[k]);
    }
  }

 private:
  Domain domain_;
  std::vector<std::size_t> flats_;
  std::vector<Index> indices_;
  std::vector<double> values_;
  Index lo_{0, 0};
  Index hi_{-1, -1};
};

}  // namespace mclab
