#pragma once

// Sup-type functionals over balls: Morrey norms, Campanato and BMO
// seminorms, and the Hardy–Littlewood maximal function.
//
// The sup over x ∈ R^N and r ∈ (0, ρ) is taken over a CenterGrid × RadiusGrid.
// Per-ball statistics are cached by radius in a BallStatCache, so evaluating
// many (λ, ρ) pairs for one function costs one pass per radius.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "mclab/ball.hpp"
#include "mclab/error.hpp"
#include "mclab/grid.hpp"
#include "mclab/parallel.hpp"
#include "mclab/polyfit.hpp"

namespace mclab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Geometric radii r_max·c^{−j} down to r_min = 2h, with c = 2^{1/m}.
/// r_max = min(ρ, box diameter). m starts at `per_octave` (≥ 2, so c ≤ √2)
/// and grows until at least `min_count` radii exist.
struct RadiusGrid {
  double r_min = 0.0;
  double r_max = 0.0;
  int per_octave = 4;
  std::vector<double> radii;  // increasing

  static RadiusGrid make(const Domain& d, double rho, int min_count = 8, int per_octave = 4) {
    if (!(rho > 0.0)) throw ValidationError("radius_grid", "rho must be positive");
    if (min_count < 8) throw ValidationError("radius_count", "radius grid needs at least 8 radii");
    if (per_octave < 2) throw ValidationError("radius_grid", "at least 2 radii per octave are required");
    RadiusGrid g;
    g.r_min = 2.0 * d.spacing();
    g.r_max = std::min(rho, d.diameter());
    if (g.r_max < g.r_min * (1.0 - 1e-12))
      throw ValidationError("radius_grid", "rho = " + std::to_string(rho) + " is below the radius floor 2h = " +
                                               std::to_string(g.r_min));
    for (int m = per_octave; m <= 256; ++m) {
      const double c = std::pow(2.0, 1.0 / m);
      std::vector<double> desc;
      for (int j = 0;; ++j) {
        const double r = g.r_max * std::pow(c, -j);
        if (r <= g.r_min * (1.0 + 1e-9)) break;
        desc.push_back(r);
      }
      desc.push_back(g.r_min);
      g.radii.assign(desc.rbegin(), desc.rend());
      g.per_octave = m;
      if (static_cast<int>(g.radii.size()) >= min_count) break;
    }
    return g;
  }

  std::size_t size() const noexcept { return radii.size(); }

  /// The radii not exceeding rho (with a relative slack), i.e. the grid a
  /// finer-anchored make() would produce when the anchors nest.
  std::vector<double> up_to(double rho) const {
    std::vector<double> out;
    for (double r : radii)
      if (r <= rho * (1.0 + 1e-12)) out.push_back(r);
    return out;
  }
};

/// Ball centres: grid points whose coordinates are multiples of `stride` and
/// whose distance to the box boundary is at least `clearance` cells.
struct CenterGrid {
  int stride = 1;
  int clearance = 0;

  std::vector<Index> centers(const Domain& d) const {
    if (stride < 1) throw ValidationError("center_stride", "stride must be >= 1");
    std::vector<Index> out;
    const int n = d.points_per_axis();
    auto ok = [&](int i) { return i % stride == 0 && i >= clearance && i <= n - 1 - clearance; };
    if (d.dim() == 1) {
      for (int i = 0; i < n; ++i)
        if (ok(i)) out.push_back({i, 0});
    } else {
      for (int i = 0; i < n; ++i)
        if (ok(i))
          for (int j = 0; j < n; ++j)
            if (ok(j)) out.push_back({i, j});
    }
    if (out.empty()) throw ValidationError("center_grid", "no admissible centers");
    return out;
  }

  friend bool operator==(const CenterGrid&, const CenterGrid&) = default;
};

struct SupResult {
  std::string functional;
  nlohmann::json params = nlohmann::json::object();
  double value = 0.0;
  Index argmax_center{0, 0};
  double argmax_radius = 0.0;
  std::size_t skipped = 0;
};

inline nlohmann::json to_json(const SupResult& r, const Domain& d, const CenterGrid& c) {
  nlohmann::json center = nlohmann::json::array();
  for (int a = 0; a < d.dim(); ++a) center.push_back(r.argmax_center[a]);
  return {{"functional", r.functional},
          {"params", r.params},
          {"value", r.value},
          {"argmax_center", center},
          {"argmax_radius", r.argmax_radius},
          {"grid", {{"N", d.dim()}, {"n", d.points_per_axis()}, {"L", d.half_width()}}},
          {"stride", c.stride}};
}

inline nlohmann::json rho_json(double rho) { return std::isinf(rho) ? nlohmann::json("inf") : nlohmann::json(rho); }

/// Per-ball statistics of one function over a fixed set of centres, cached by
/// radius. Not thread-safe; the computations themselves run in parallel.
class BallStatCache {
 public:
  BallStatCache(GridFunction u, CenterGrid grid)
      : u_(std::move(u)), grid_(grid), centers_(grid.centers(u_.domain)), support_(u_.domain, u_.values) {
    const auto& v = support_.values();
    sorted_.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sorted_[i] = i;
    std::stable_sort(sorted_.begin(), sorted_.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    long double run = 0.0L;
    for (std::size_t j = 0; j < sorted_.size(); ++j) {
      const double x = v[sorted_[j]];
      all_pairs_ += static_cast<long double>(x) * j - run;
      run += x;
      all_abs_ += std::abs(x);
      if (x < 0.0) ++all_negatives_;
    }
  }

  const GridFunction& function() const noexcept { return u_; }
  const Domain& domain() const noexcept { return u_.domain; }
  const CenterGrid& center_grid() const noexcept { return grid_; }
  const std::vector<Index>& centers() const noexcept { return centers_; }

  const BallStencil& stencil(double r) {
    auto key = std::bit_cast<std::uint64_t>(r);
    auto it = stencils_.find(key);
    if (it != stencils_.end()) return it->second;
    require_radius_floor(u_.domain, r);
    return stencils_.emplace(key, make_stencil(u_.domain, r)).first->second;
  }

  /// Σ_{y ∈ B_r(x)} |u(y)|^q per centre.
  const std::vector<double>& power_sums(double q, double r) {
    const auto key = std::make_tuple(0, q, 0, std::bit_cast<std::uint64_t>(r));
    if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    const BallSummer& summer = summer_for(q);
    const BallStencil& s = stencil(r);
    std::vector<double> out(centers_.size());
    parallel_for(centers_.size(), [&](std::size_t i) { out[i] = summer.sum(centers_[i], s); }, 64);
    return tables_.emplace(key, std::move(out)).first->second;
  }

  /// Best-fit residual of degree `degree` in the discrete L^q sense per centre.
  /// degree −1 is the plain L^q average (zero polynomial).
  const std::vector<double>& fit_residuals(int degree, int q, double r) {
    const auto key = std::make_tuple(1, static_cast<double>(q), degree, std::bit_cast<std::uint64_t>(r));
    if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    if (q != 1 && q != 2) throw ValidationError("fit_exponent", "Campanato fits need q in {1, 2}");
    const BallStencil& s = stencil(r);
    const double count = static_cast<double>(s.lattice_count());
    std::vector<double> out(centers_.size());
    if (degree < 0) {
      const std::vector<double>& sums = power_sums(q, r);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = power_mean(sums[i], count, q);
    } else if (degree == 0 && q == 1 && large(s)) {
      const std::vector<double>& abs_sums = power_sums(1.0, r);
      const BallSummer& nonzero = indicator_summer(false);
      const BallSummer& negative = indicator_summer(true);
      const std::size_t m = s.lattice_count(), t = (m - 1) / 2;
      parallel_for(centers_.size(), [&](std::size_t i) {
        const auto count = static_cast<std::size_t>(std::llround(nonzero.sum(centers_[i], s)));
        const auto neg = static_cast<std::size_t>(std::llround(negative.sum(centers_[i], s)));
        if (t >= neg && t < neg + (m - count))
          out[i] = abs_sums[i] / static_cast<double>(m);
        else
          out[i] = median_residual_walk(centers_[i], s);
      }, 64);
    } else if (degree == 0) {
      parallel_for(centers_.size(), [&](std::size_t i) {
        thread_local ValueMultiset ms;
        collect(centers_[i], s, ms);
        out[i] = q == 1 ? ms.mean_abs_deviation(ms.median()) : ms.rms_deviation(ms.mean());
      });
    } else {
      const PolyBasis basis = PolyBasis::make(u_.domain.dim(), degree);
      parallel_for(centers_.size(), [&](std::size_t i) {
        if (!support_.may_intersect(centers_[i], s)) {
          out[i] = 0.0;
          return;
        }
        thread_local BallSamples samples;
        gather_ball(u_.values, u_.domain, centers_[i], r, s, samples);
        out[i] = fit_polynomial(samples.z, samples.values, basis, q).residual;
      }, 4);
    }
    return tables_.emplace(key, std::move(out)).first->second;
  }

  /// (1/#B²) Σ_{y,z ∈ B} |u(y) − u(z)| per centre.
  const std::vector<double>& oscillations(double r) {
    const auto key = std::make_tuple(2, 1.0, 0, std::bit_cast<std::uint64_t>(r));
    if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    const BallStencil& s = stencil(r);
    std::vector<double> out(centers_.size());
    if (large(s)) {
      parallel_for(centers_.size(), [&](std::size_t i) { out[i] = oscillation_walk(centers_[i], s); });
    } else {
      parallel_for(centers_.size(), [&](std::size_t i) {
        thread_local ValueMultiset ms;
        collect(centers_[i], s, ms);
        out[i] = ms.double_average_oscillation();
      });
    }
    return tables_.emplace(key, std::move(out)).first->second;
  }

  static double power_mean(double sum, double count, double q) {
    const double a = sum / count;
    if (q == 1.0) return a;
    if (q == 2.0) return std::sqrt(a);
    return std::pow(a, 1.0 / q);
  }

 private:
  // Balls with more lattice points than the support are handled by walking
  // the value-sorted support list instead of gathering and sorting members.
  bool large(const BallStencil& s) const { return s.lattice_count() > support_.size(); }

  bool member(std::size_t k, const Index& c, const BallStencil& s) const {
    const Index& y = support_.indices()[k];
    return s.contains_offset(y[0] - c[0], u_.domain.dim() == 2 ? y[1] - c[1] : 0);
  }

  // Σ_{y,z ∈ B} |u(y) − u(z)| = 2(P + Z·A) with P the pair sum over nonzero
  // members, A = Σ |v| over them and Z the number of zero members.
  double oscillation_walk(const Index& c, const BallStencil& s) const {
    if (!support_.may_intersect(c, s)) return 0.0;
    const long double m = static_cast<long double>(s.lattice_count());
    long double pairs = 0.0L, abs_sum = 0.0L;
    std::size_t count = 0;
    if (support_.covered_by(c, s)) {
      pairs = all_pairs_;
      abs_sum = all_abs_;
      count = sorted_.size();
    } else {
      long double run = 0.0L;
      const auto& v = support_.values();
      for (std::size_t k : sorted_) {
        if (!member(k, c, s)) continue;
        pairs += static_cast<long double>(v[k]) * count - run;
        run += v[k];
        abs_sum += std::abs(v[k]);
        ++count;
      }
    }
    const long double zeros = m - static_cast<long double>(count);
    return static_cast<double>(2.0L * (pairs + zeros * abs_sum) / (m * m));
  }

  // (1/m) Σ |v − med| with med the lower median of the ball values.
  double median_residual_walk(const Index& c, const BallStencil& s) const {
    if (!support_.may_intersect(c, s)) return 0.0;
    const std::size_t m = s.lattice_count();
    const auto& v = support_.values();
    const bool all = support_.covered_by(c, s);
    std::size_t count = 0, negatives = 0;
    long double abs_sum = 0.0L;
    if (all) {
      count = sorted_.size();
      negatives = all_negatives_;
      abs_sum = all_abs_;
    } else {
      for (std::size_t k : sorted_) {
        if (!member(k, c, s)) continue;
        ++count;
        if (v[k] < 0.0) ++negatives;
        abs_sum += std::abs(v[k]);
      }
    }
    const std::size_t zeros = m - count;
    const std::size_t t = (m - 1) / 2;
    if (t >= negatives && t < negatives + zeros) return static_cast<double>(abs_sum / m);
    const std::size_t rank = t < negatives ? t : t - zeros;  // among nonzero members
    double med = 0.0;
    std::size_t seen = 0;
    for (std::size_t k : sorted_) {
      if (!all && !member(k, c, s)) continue;
      if (seen++ == rank) {
        med = v[k];
        break;
      }
    }
    long double dev = static_cast<long double>(zeros) * std::abs(med);
    for (std::size_t k : sorted_)
      if (all || member(k, c, s)) dev += std::abs(v[k] - med);
    return static_cast<double>(dev / m);
  }

  const BallSummer& indicator_summer(bool negatives_only) {
    std::optional<BallSummer>& slot = negatives_only ? negative_summer_ : nonzero_summer_;
    if (!slot) {
      std::vector<double> ind(u_.values.size());
      for (std::size_t i = 0; i < ind.size(); ++i)
        ind[i] = (negatives_only ? u_.values[i] < 0.0 : u_.values[i] != 0.0) ? 1.0 : 0.0;
      slot.emplace(u_.domain, ind);
    }
    return *slot;
  }

  const BallSummer& summer_for(double q) {
    auto key = std::bit_cast<std::uint64_t>(q);
    if (auto it = summers_.find(key); it != summers_.end()) return it->second;
    std::vector<double> powered(u_.values.size());
    for (std::size_t i = 0; i < powered.size(); ++i) {
      const double a = std::abs(u_.values[i]);
      powered[i] = q == 1.0 ? a : (q == 2.0 ? a * a : (a == 0.0 ? 0.0 : std::pow(a, q)));
    }
    return summers_.emplace(key, BallSummer(u_.domain, powered)).first->second;
  }

  void collect(const Index& c, const BallStencil& s, ValueMultiset& ms) const {
    ms.clear();
    support_.for_each_member(u_.values, c, s, [&](std::size_t, double v) { ms.push_nonzero(v); });
    ms.finalize(s.lattice_count());
  }

  GridFunction u_;
  CenterGrid grid_;
  std::vector<Index> centers_;
  SupportIndex support_;
  std::vector<std::size_t> sorted_;  // support positions in ascending value order
  long double all_pairs_ = 0.0L;
  long double all_abs_ = 0.0L;
  std::size_t all_negatives_ = 0;
  std::map<std::uint64_t, BallStencil> stencils_;
  std::map<std::uint64_t, BallSummer> summers_;
  std::optional<BallSummer> nonzero_summer_, negative_summer_;
  std::map<std::tuple<int, double, int, std::uint64_t>, std::vector<double>> tables_;
};

namespace detail {

template <class TableFn>
SupResult sup_over(BallStatCache& cache, std::span<const double> radii, double lambda, TableFn&& table) {
  SupResult best;
  best.value = 0.0;
  bool first = true;
  for (double r : radii) {
    const std::vector<double>& vals = table(r);
    const double w = lambda == 0.0 ? 1.0 : std::pow(r, lambda);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double v = w * vals[i];
      if (first || v > best.value) {
        best.value = v;
        best.argmax_center = cache.centers()[i];
        best.argmax_radius = r;
        first = false;
      }
    }
  }
  return best;
}

}  // namespace detail

/// sup_{x, r} r^λ (avg_{B_r(x)} |u|^q)^{1/q}.
inline SupResult morrey_norm(BallStatCache& cache, double q, double lambda, const RadiusGrid& radii) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw ValidationError("morrey_exponent", "q must be finite and >= 1");
  if (radii.radii.empty()) throw ValidationError("radius_grid", "empty radius grid");
  SupResult r = detail::sup_over(cache, radii.radii, lambda, [&](double rad) -> const std::vector<double>& {
    if (q == 1.0 || q == 2.0) return cache.fit_residuals(-1, static_cast<int>(q), rad);
    thread_local std::vector<double> tmp;
    const std::vector<double>& sums = cache.power_sums(q, rad);
    const double count = static_cast<double>(cache.stencil(rad).lattice_count());
    tmp.resize(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) tmp[i] = BallStatCache::power_mean(sums[i], count, q);
    return tmp;
  });
  r.functional = "morrey";
  r.params = {{"q", q}, {"lambda", lambda}, {"rho", rho_json(radii.r_max)}};
  return r;
}

inline SupResult morrey_norm(const GridFunction& u, double q, double lambda, const RadiusGrid& radii,
                             const CenterGrid& centers) {
  BallStatCache cache(u, centers);
  return morrey_norm(cache, q, lambda, radii);
}

/// sup_{x, r} r^λ inf_{P ∈ P_{k−1}} (avg_{B_r(x)} |u − P|^q)^{1/q}; k = 0 is the Morrey norm.
inline SupResult campanato_seminorm(BallStatCache& cache, int q, double lambda, int k, const RadiusGrid& radii) {
  if (q != 1 && q != 2) throw ValidationError("fit_exponent", "Campanato seminorm needs q in {1, 2}");
  if (k < 0 || k - 1 > kMaxFitDegree) throw ValidationError("campanato_order", "k must be in [0, 4]");
  if (radii.radii.empty()) throw ValidationError("radius_grid", "empty radius grid");
  SupResult r = detail::sup_over(cache, radii.radii, lambda, [&](double rad) -> const std::vector<double>& {
    return cache.fit_residuals(k - 1, q, rad);
  });
  r.functional = "campanato";
  r.params = {{"q", q}, {"lambda", lambda}, {"k", k}, {"rho", rho_json(radii.r_max)}};
  return r;
}

inline SupResult campanato_seminorm(const GridFunction& u, int q, double lambda, int k, const RadiusGrid& radii,
                                    const CenterGrid& centers) {
  BallStatCache cache(u, centers);
  return campanato_seminorm(cache, q, lambda, k, radii);
}

/// sup_{x, r} (1/#B²) Σ_{y,z ∈ B_r(x)} |u(y) − u(z)|.
inline SupResult bmo_seminorm(BallStatCache& cache, const RadiusGrid& radii) {
  if (radii.radii.empty()) throw ValidationError("radius_grid", "empty radius grid");
  SupResult r = detail::sup_over(cache, radii.radii, 0.0,
                                 [&](double rad) -> const std::vector<double>& { return cache.oscillations(rad); });
  r.functional = "bmo";
  r.params = {{"rho", rho_json(radii.r_max)}};
  return r;
}

inline SupResult bmo_seminorm(const GridFunction& u, const RadiusGrid& radii, const CenterGrid& centers) {
  BallStatCache cache(u, centers);
  return bmo_seminorm(cache, radii);
}

/// Maximal averages of |f| at single points over a fixed radius grid.
class MaximalOperator {
 public:
  MaximalOperator(const Domain& d, std::span<const double> f, const RadiusGrid& radii) : domain_(d), radii_(radii) {
    std::vector<double> a(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) a[i] = std::abs(f[i]);
    summer_ = BallSummer(d, a);
    for (double r : radii.radii) stencils_.push_back(make_stencil(d, r));
  }

  /// max_r avg_{B_r(x)} |f| over radii ≤ rho.
  double at(const Index& x, double rho = kInfinity) const {
    double m = 0.0;
    for (std::size_t t = 0; t < stencils_.size(); ++t) {
      if (radii_.radii[t] > rho * (1.0 + 1e-12)) break;
      m = std::max(m, summer_.sum(x, stencils_[t]) / static_cast<double>(stencils_[t].lattice_count()));
    }
    return m;
  }

  const RadiusGrid& radii() const noexcept { return radii_; }

 private:
  Domain domain_;
  RadiusGrid radii_;
  BallSummer summer_;
  std::vector<BallStencil> stencils_;
};

/// M f at every grid point, sup over the radius grid.
inline std::vector<double> maximal_function(std::span<const double> f, const Domain& d, const RadiusGrid& radii) {
  MaximalOperator op(d, f, radii);
  std::vector<double> out(d.size());
  parallel_for(d.size(), [&](std::size_t i) { out[i] = op.at(d.unflat(i)); }, 256);
  return out;
}

/// M_ρ f(x): sup over radii in [2h, ρ] of avg_{B_r(x)} |f|.
inline double localized_maximal(std::span<const double> f, const Domain& d, double rho, const Index& x,
                                int min_count = 8) {
  const RadiusGrid radii = RadiusGrid::make(d, rho, min_count);
  return MaximalOperator(d, f, radii).at(x);
}

}  // namespace mclab
