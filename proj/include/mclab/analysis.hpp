#pragma once

// Lazily computed quantities of one grid function, shared by every
// inequality evaluated on it.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <tuple>
#include <vector>

#include "mclab/grid.hpp"
#include "mclab/kernels.hpp"
#include "mclab/seminorms.hpp"

namespace mclab {

struct AnalysisSettings {
  CenterGrid centers{};
  int radius_count = 8;
};

/// Not thread-safe. Inner loops run through parallel_for.
class FunctionAnalysis {
 public:
  FunctionAnalysis(GridFunction u, AnalysisSettings settings = {})
      : u_(std::move(u)), settings_(settings), balls_(u_, settings.centers) {}

  const GridFunction& function() const noexcept { return u_; }
  const Domain& domain() const noexcept { return u_.domain; }
  const AnalysisSettings& settings() const noexcept { return settings_; }
  BallStatCache& balls() noexcept { return balls_; }

  const DerivativeField& derivative(int order) {
    auto it = derivatives_.find(order);
    if (it == derivatives_.end()) it = derivatives_.emplace(order, derivative_field(u_, order)).first;
    return it->second;
  }

  /// h^N Σ |D^order u|^p.
  double integral(int order, double p) {
    const auto key = std::make_pair(order, bits(p));
    auto it = integrals_.find(key);
    if (it == integrals_.end()) it = integrals_.emplace(key, power_integral(derivative(order).magnitudes, p, domain())).first;
    return it->second;
  }

  /// ρ^{kp} I_p(D^k u) + ρ^{ℓp} I_p(D^ℓ u).
  double energy(int k, int l, double p, double rho) {
    return std::pow(rho, k * p) * integral(k, p) + std::pow(rho, l * p) * integral(l, p);
  }

  const RadiusGrid& radii(double rho) {
    auto it = radius_grids_.find(bits(rho));
    if (it == radius_grids_.end())
      it = radius_grids_.emplace(bits(rho), RadiusGrid::make(domain(), rho, settings_.radius_count)).first;
    return it->second;
  }

  /// Campanato seminorm with P_{k−1} fits; k = 0 is the Morrey norm.
  const SupResult& campanato(int q, double lambda, int k, double rho) {
    const auto key = std::make_tuple(q, bits(lambda), k, bits(rho));
    auto it = campanato_.find(key);
    if (it == campanato_.end()) it = campanato_.emplace(key, campanato_seminorm(balls_, q, lambda, k, radii(rho))).first;
    return it->second;
  }

  const SupResult& morrey(double q, double lambda, double rho) {
    const auto key = std::make_tuple(bits(q), bits(lambda), bits(rho));
    auto it = morrey_.find(key);
    if (it == morrey_.end()) it = morrey_.emplace(key, morrey_norm(balls_, q, lambda, radii(rho))).first;
    return it->second;
  }

  const SupResult& bmo(double rho) {
    auto it = bmo_.find(bits(rho));
    if (it == bmo_.end()) it = bmo_.emplace(bits(rho), bmo_seminorm(balls_, radii(rho))).first;
    return it->second;
  }

  /// h^{2N} Σ_{x≠y} |D^k u(x) − D^k u(y)|^p / |x − y|^{N+σp}.
  double gagliardo(int k, double sigma, double p) {
    const auto key = std::make_tuple(k, bits(sigma), bits(p));
    auto it = gagliardo_.find(key);
    if (it == gagliardo_.end()) it = gagliardo_.emplace(key, gagliardo_energy(derivative(k), sigma, p, domain())).first;
    return it->second;
  }

  /// max over centres of Σ_{B_r(x)} |u|^t.
  double max_ball_sum(double t, double r) {
    const std::vector<double>& sums = balls_.power_sums(t, r);
    double m = 0.0;
    for (double v : sums) m = std::max(m, v);
    return m;
  }

  /// max over centres of avg_{B_r(x)} |u|^t (not raised to 1/t).
  double max_ball_mean(double t, double r) {
    return max_ball_sum(t, r) / static_cast<double>(balls_.stencil(r).lattice_count());
  }

  /// sup over centres and the ρ = ∞ radius grid of r^{−p} h^N Σ_{B_r(x)} |u|^p.
  double dilation_morrey(double p) {
    double m = 0.0;
    for (double r : radii(kInfinity).radii) m = std::max(m, std::pow(r, -p) * max_ball_sum(p, r) * domain().cell_volume());
    return m;
  }

  double sup() { return sup_norm(u_.values); }

  const MaximalOperator& maximal(int order) {
    auto it = maximal_.find(order);
    if (it == maximal_.end())
      it = maximal_.emplace(order, std::make_unique<MaximalOperator>(domain(), derivative(order).magnitudes,
                                                                     radii(kInfinity))).first;
    return *it->second;
  }

  const GagliardoKernel& kernel(double sigma, double p) {
    const auto key = std::make_pair(bits(sigma), bits(p));
    auto it = kernels_.find(key);
    if (it == kernels_.end()) it = kernels_.emplace(key, std::make_unique<GagliardoKernel>(domain(), sigma, p)).first;
    return *it->second;
  }

  const GagliardoPointwise& gagliardo_pointwise(int k, double sigma, double p) {
    const auto key = std::make_tuple(k, bits(sigma), bits(p));
    auto it = pointwise_.find(key);
    if (it == pointwise_.end())
      it = pointwise_.emplace(key, std::make_unique<GagliardoPointwise>(derivative(k), kernel(sigma, p))).first;
    return *it->second;
  }

 private:
  static std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

  GridFunction u_;
  AnalysisSettings settings_;
  BallStatCache balls_;
  std::map<int, DerivativeField> derivatives_;
  std::map<std::pair<int, std::uint64_t>, double> integrals_;
  std::map<std::uint64_t, RadiusGrid> radius_grids_;
  std::map<std::tuple<int, std::uint64_t, int, std::uint64_t>, SupResult> campanato_;
  std::map<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>, SupResult> morrey_;
  std::map<std::uint64_t, SupResult> bmo_;
  std::map<std::tuple<int, std::uint64_t, std::uint64_t>, double> gagliardo_;
  std::map<int, std::unique_ptr<MaximalOperator>> maximal_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::unique_ptr<GagliardoKernel>> kernels_;
  std::map<std::tuple<int, std::uint64_t, std::uint64_t>, std::unique_ptr<GagliardoPointwise>> pointwise_;
};

}  // namespace mclab
