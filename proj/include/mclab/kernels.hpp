#pragma once

// Singular-kernel sums: Riesz potentials of derivative magnitudes, Sobolev
// energies and fractional Gagliardo energies.
//
// Gagliardo sums run over the infinite lattice hZ^N with the field extended
// by zero. Pairs with both points outside the support contribute nothing, and
// pairs with exactly one point outside are folded into a closed-form lattice
// constant, Σ_{o ≠ 0} |o|^{−N−a} = 2ζ(1+a) (N = 1) or 4ζ(t)β(t), t = 1 + a/2 (N = 2).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mclab/ball.hpp"
#include "mclab/error.hpp"
#include "mclab/grid.hpp"
#include "mclab/parallel.hpp"

namespace mclab {

/// Dirichlet beta β(s) = Σ_{k≥0} (−1)^k (2k+1)^{−s}, summed with the
/// Cohen–Rodriguez Villegas–Zagier acceleration for alternating series.
inline double dirichlet_beta(double s) {
  constexpr int n = 48;
  const double d0 = std::pow(3.0 + std::sqrt(8.0), n);
  const double d = (d0 + 1.0 / d0) / 2.0;
  double b = -1.0, c = -d, sum = 0.0;
  for (int k = 0; k < n; ++k) {
    c = b - c;
    sum += c * std::pow(2.0 * k + 1.0, -s);
    b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0));
  }
  return sum / d;
}

/// Σ_{o ∈ Z^N ∖ {0}} |o|^{−(N + a)} for a > 0.
inline double lattice_kernel_constant(int dim, double a) {
  if (!(a > 0.0)) throw ValidationError("gagliardo_exponent", "sigma * p must be positive");
  if (dim == 1) return 2.0 * std::riemann_zeta(1.0 + a);
  const double t = 1.0 + a / 2.0;
  return 4.0 * std::riemann_zeta(t) * dirichlet_beta(t);
}

namespace detail {
inline double distance_power(double dist, double e) {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return dist;
  return std::pow(dist, e);
}
}  // namespace detail

/// h^N Σ_{y ∈ B_R(x), y ≠ x} f(y) / |x − y|^{N−k}.
inline double riesz_potential(std::span<const double> magnitudes, const Domain& d, const Index& x, double R, int k) {
  require_radius_floor(d, R);
  if (k < 1) throw ValidationError("riesz_order", "k must be >= 1");
  const BallStencil s = make_stencil(d, R);
  const double h = d.spacing();
  const double e = static_cast<double>(k - d.dim());
  long double sum = 0.0L;
  s.for_each_offset([&](const Index& o) {
    if (o[0] == 0 && o[1] == 0) return;
    const Index y{x[0] + o[0], d.dim() == 2 ? x[1] + o[1] : 0};
    if (!d.contains(y)) return;
    const double f = magnitudes[d.flat(y)];
    if (f == 0.0) return;
    const double dist = h * std::sqrt(static_cast<double>(o[0]) * o[0] + static_cast<double>(o[1]) * o[1]);
    sum += f * detail::distance_power(dist, e);
  });
  return static_cast<double>(sum) * d.cell_volume();
}

/// The same potential through its radial form
///   (N−k) ∫_0^R r^{k−N−1} m(r) dr + R^{k−N} m(R),   m(r) = h^N Σ_{0 < |y−x| ≤ r} f(y),
/// with m tabulated on shells of width h/shells_per_cell and interpolated
/// linearly across each shell; the kernel is integrated exactly per shell.
inline double riesz_potential_radial(std::span<const double> magnitudes, const Domain& d, const Index& x, double R,
                                     int k, int shells_per_cell = 4) {
  require_radius_floor(d, R);
  if (k < 1) throw ValidationError("riesz_order", "k must be >= 1");
  if (shells_per_cell < 2) throw ValidationError("riesz_bins", "need at least 2 shells per cell");
  const double h = d.spacing(), dr = h / shells_per_cell;
  const int shells = static_cast<int>(std::ceil(R / dr - 1e-12));
  std::vector<long double> shell_mass(static_cast<std::size_t>(shells) + 1, 0.0L);
  const BallStencil s = make_stencil(d, R);
  s.for_each_offset([&](const Index& o) {
    if (o[0] == 0 && o[1] == 0) return;
    const Index y{x[0] + o[0], d.dim() == 2 ? x[1] + o[1] : 0};
    if (!d.contains(y)) return;
    const double dist = h * std::sqrt(static_cast<double>(o[0]) * o[0] + static_cast<double>(o[1]) * o[1]);
    const auto j = static_cast<std::size_t>(std::min<double>(shells, std::ceil(dist / dr - 1e-12)));
    shell_mass[j] += magnitudes[d.flat(y)];
  });
  std::vector<double> m(shell_mass.size(), 0.0);  // m(j·dr), cumulative
  long double acc = 0.0L;
  for (std::size_t j = 0; j < m.size(); ++j) {
    acc += shell_mass[j];
    m[j] = static_cast<double>(acc) * d.cell_volume();
  }
  const double a = static_cast<double>(k - d.dim());  // r^{a−1} kernel, r^a primitive
  auto primitive = [&](double r) { return a == 0.0 ? std::log(r) : std::pow(r, a) / a; };
  auto moment = [&](double r) { return a + 1.0 == 0.0 ? std::log(r) : std::pow(r, a + 1.0) / (a + 1.0); };
  double integral = 0.0;
  for (int j = 0; j < shells; ++j) {
    const double r0 = j * dr, r1 = std::min(R, (j + 1) * dr);
    if (m[j] == 0.0 && m[j + 1] == 0.0) continue;
    // m linear on [r0, r1]: m(r) = m0 + (r − r0)·slope; ∫ r^{a−1} m(r) dr in closed form.
    const double slope = (m[j + 1] - m[j]) / dr;
    const double c0 = m[j] - r0 * slope;
    integral += c0 * (primitive(r1) - primitive(r0)) + slope * (moment(r1) - moment(r0));
  }
  const double tail = (a == 0.0 ? 1.0 : std::pow(R, a)) * m.back();
  return -a * integral + tail;
}

/// h^N Σ (ρ^{kp}|D^k u|^p + ρ^{ℓp}|D^ℓ u|^p) from precomputed fields.
inline double sobolev_energy(const DerivativeField& dk, const DerivativeField& dl, double p, double rho,
                             const Domain& d) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("sobolev_exponent", "p must be finite and >= 1");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("rho", "sobolev energy needs a finite rho > 0");
  long double s = 0.0L;
  const double wk = std::pow(rho, dk.order * p), wl = std::pow(rho, dl.order * p);
  for (std::size_t i = 0; i < dk.magnitudes.size(); ++i) {
    const double a = dk.magnitudes[i], b = dl.magnitudes[i];
    if (a != 0.0) s += wk * std::pow(a, p);
    if (b != 0.0) s += wl * std::pow(b, p);
  }
  return static_cast<double>(s) * d.cell_volume();
}

inline double sobolev_energy(const GridFunction& u, int k, int l, double p, double rho) {
  if (!(0 <= l && l < k)) throw ValidationError("derivative_order", "need 0 <= l < k");
  return sobolev_energy(derivative_field(u, k), derivative_field(u, l), p, rho, u.domain);
}

/// Which pairs enter the Gagliardo double sum.
enum class GagliardoRegion {
  lattice,  // all pairs of hZ^N, field extended by zero
  support,  // both points in the support of the field
};

/// Kernel |x − y|^{−(N+σp)} on lattice offsets of one domain, with the
/// lattice constant for the zero-extended tail.
class GagliardoKernel {
 public:
  GagliardoKernel(const Domain& d, double sigma, double p) : domain_(d), sigma_(sigma), p_(p) {
    if (!(sigma > 0.0 && sigma < 1.0)) throw ValidationError("sigma_range", "sigma must lie in (0, 1)");
    if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("gagliardo_exponent", "p must be finite and >= 1");
    const int n = d.points_per_axis();
    const double h = d.spacing();
    exponent_ = d.dim() + sigma * p;
    width_ = 2 * n - 1;
    table_.assign(d.dim() == 1 ? width_ : static_cast<std::size_t>(width_) * width_, 0.0);
    for (int a = -(n - 1); a <= n - 1; ++a) {
      for (int b = (d.dim() == 2 ? -(n - 1) : 0); b <= (d.dim() == 2 ? n - 1 : 0); ++b) {
        if (a == 0 && b == 0) continue;
        const double dist = h * std::sqrt(static_cast<double>(a) * a + static_cast<double>(b) * b);
        table_[slot(a, b)] = std::pow(dist, -exponent_);
      }
    }
    total_ = std::pow(h, -exponent_) * lattice_kernel_constant(d.dim(), sigma * p);
  }

  double operator()(int a, int b) const { return table_[slot(a, b)]; }
  /// Σ over all nonzero lattice offsets.
  double lattice_total() const noexcept { return total_; }
  double sigma() const noexcept { return sigma_; }
  double p() const noexcept { return p_; }
  const Domain& domain() const noexcept { return domain_; }

 private:
  std::size_t slot(int a, int b) const {
    const int n = domain_.points_per_axis();
    return domain_.dim() == 1 ? static_cast<std::size_t>(a + n - 1)
                              : static_cast<std::size_t>(a + n - 1) * width_ + static_cast<std::size_t>(b + n - 1);
  }

  Domain domain_;
  double sigma_, p_, exponent_ = 0.0, total_ = 0.0;
  int width_ = 0;
  std::vector<double> table_;
};

namespace detail {

inline double pow_half(double d2, double p) {
  if (p == 2.0) return d2;
  if (p == 1.0) return std::sqrt(d2);
  if (p == 1.5) {
    const double r = std::sqrt(d2);
    return r * std::sqrt(r);
  }
  return std::pow(d2, 0.5 * p);
}

struct TensorSupport {
  std::vector<std::size_t> flats;
  std::vector<Index> idx;
  std::vector<double> packed;  // √w_c · F_c per support point, components contiguous
  std::size_t comps = 0;
};

inline TensorSupport tensor_support(const DerivativeField& F, const Domain& d) {
  TensorSupport t;
  t.comps = F.components.size();
  for (std::size_t f = 0; f < d.size(); ++f) {
    bool nz = false;
    for (const auto& c : F.components) nz = nz || c[f] != 0.0;
    if (!nz) continue;
    t.flats.push_back(f);
    t.idx.push_back(d.unflat(f));
    for (std::size_t c = 0; c < t.comps; ++c) t.packed.push_back(std::sqrt(F.weights[c]) * F.components[c][f]);
  }
  return t;
}

inline double tensor_d2(const TensorSupport& t, std::size_t i, const double* other) {
  double s = 0.0;
  const double* a = &t.packed[i * t.comps];
  for (std::size_t c = 0; c < t.comps; ++c) {
    const double dlt = a[c] - (other ? other[c] : 0.0);
    s += dlt * dlt;
  }
  return s;
}

// Σ_{y ∈ S, y ≠ x} K(x−y)|F(x) − F(y)|^p and Σ_{y ∈ S, y ≠ x} K(x−y) for one x.
inline void pair_sums(const TensorSupport& t, const GagliardoKernel& K, const Index& x, const double* fx,
                      std::ptrdiff_t self, long double& energy, long double& kernel) {
  energy = 0.0L;
  kernel = 0.0L;
  for (std::size_t j = 0; j < t.flats.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) == self) continue;
    const double k = K(x[0] - t.idx[j][0], x[1] - t.idx[j][1]);
    kernel += k;
    const double d2 = tensor_d2(t, j, fx);
    if (d2 != 0.0) energy += k * pow_half(d2, K.p());
  }
}

}  // namespace detail

/// h^{2N} Σ_{x ≠ y} |F(x) − F(y)|^p / |x − y|^{N+σp} for the tensor field F = D^k u.
inline double gagliardo_energy(const DerivativeField& F, const GagliardoKernel& K,
                               GagliardoRegion region = GagliardoRegion::lattice) {
  const Domain& d = K.domain();
  const detail::TensorSupport t = detail::tensor_support(F, d);
  const double p = K.p();
  std::vector<long double> per(t.flats.size(), 0.0L);
  parallel_for(t.flats.size(), [&](std::size_t i) {
    long double e = 0.0L, ks = 0.0L;
    detail::pair_sums(t, K, t.idx[i], &t.packed[i * t.comps], static_cast<std::ptrdiff_t>(i), e, ks);
    if (region == GagliardoRegion::lattice) {
      const double fx = detail::pow_half(detail::tensor_d2(t, i, nullptr), p);
      e += 2.0L * fx * (static_cast<long double>(K.lattice_total()) - ks);
    }
    per[i] = e;
  }, 8);
  long double total = 0.0L;
  for (long double v : per) total += v;
  return static_cast<double>(total) * d.cell_volume() * d.cell_volume();
}

inline double gagliardo_energy(const DerivativeField& F, double sigma, double p, const Domain& d,
                               GagliardoRegion region = GagliardoRegion::lattice) {
  return gagliardo_energy(F, GagliardoKernel(d, sigma, p), region);
}

/// D_{σ,p}F(x) = (h^N Σ_{y ≠ x} |F(x) − F(y)|^p / |x − y|^{N+σp})^{1/p}.
class GagliardoPointwise {
 public:
  GagliardoPointwise(const DerivativeField& F, const GagliardoKernel& K)
      : kernel_(K), support_(detail::tensor_support(F, K.domain())) {
    const Domain& d = K.domain();
    position_.assign(d.size(), -1);
    for (std::size_t i = 0; i < support_.flats.size(); ++i) position_[support_.flats[i]] = static_cast<std::ptrdiff_t>(i);
  }

  double at(const Index& x) const {
    const Domain& d = kernel_.domain();
    const std::ptrdiff_t self = position_[d.flat(x)];
    std::vector<double> fx(support_.comps, 0.0);
    if (self >= 0)
      for (std::size_t c = 0; c < support_.comps; ++c) fx[c] = support_.packed[self * support_.comps + c];
    long double e = 0.0L, ks = 0.0L;
    detail::pair_sums(support_, kernel_, x, fx.data(), self, e, ks);
    if (self >= 0) {
      double d2 = 0.0;
      for (double v : fx) d2 += v * v;
      e += detail::pow_half(d2, kernel_.p()) * (static_cast<long double>(kernel_.lattice_total()) - ks);
    }
    return std::pow(std::max(0.0, static_cast<double>(e) * d.cell_volume()), 1.0 / kernel_.p());
  }

 private:
  const GagliardoKernel& kernel_;
  detail::TensorSupport support_;
  std::vector<std::ptrdiff_t> position_;
};

inline double gagliardo_pointwise(const DerivativeField& F, double sigma, double p, const Domain& d, const Index& x) {
  const GagliardoKernel K(d, sigma, p);
  return GagliardoPointwise(F, K).at(x);
}

}  // namespace mclab
