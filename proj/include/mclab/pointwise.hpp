#pragma once

// Pointwise estimates at single grid points: the Riesz/average bound on
// R^ℓ|D^ℓ u(x)|, its difference-kernel counterpart, and the local
// interpolation bound by the maximal function and the Campanato seminorm.

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mclab/analysis.hpp"
#include "mclab/cases.hpp"
#include "mclab/kernels.hpp"

namespace mclab {

struct PointwiseReport {
  std::string lemma;
  nlohmann::json params = nlohmann::json::object();
  Index x{0, 0};
  double R = 0.0;
  double lhs = 0.0;
  std::vector<std::pair<std::string, double>> rhs_terms;
  double rhs = 0.0;
  double ratio = 0.0;
  std::optional<double> beta;
  bool violation = false;
};

inline nlohmann::json to_json(const PointwiseReport& r, const Domain& d) {
  nlohmann::json x = nlohmann::json::array(), terms = nlohmann::json::object();
  for (int a = 0; a < d.dim(); ++a) x.push_back(r.x[a]);
  for (const auto& [k, v] : r.rhs_terms) terms[k] = v;
  nlohmann::json j{{"lemma", r.lemma}, {"params", r.params}, {"x", x},           {"R", r.R},
                   {"lhs", r.lhs},     {"rhs_terms", terms},  {"ratio", r.ratio}, {"violation", r.violation}};
  if (r.beta) j["beta"] = *r.beta;
  return j;
}

namespace detail {

inline void close_report(PointwiseReport& r) {
  r.rhs = 0.0;
  for (const auto& t : r.rhs_terms) r.rhs += t.second;
  if (r.lhs == 0.0) {
    r.ratio = 0.0;
  } else if (r.rhs == 0.0) {
    r.ratio = std::numeric_limits<double>::infinity();
    r.violation = true;
  } else {
    r.ratio = r.lhs / r.rhs;
  }
}

inline double ball_mean_abs(const GridFunction& u, const Index& x, double R) {
  return ball_average(u.values, u.domain, ball_members(u.domain, x, R), 1.0);
}

}  // namespace detail

/// R^ℓ|D^ℓ u(x)| against h^N Σ_{B_R(x)∖x} |D^k u(y)|/|x−y|^{N−k} + avg_{B_R(x)} |u|.
inline PointwiseReport lemma_ratio(FunctionAnalysis& a, int k, int l, const Index& x, double R) {
  if (!(0 <= l && l < k)) throw ValidationError("case_orders", "need 0 <= l < k");
  const Domain& d = a.domain();
  PointwiseReport r;
  r.lemma = "riesz";
  r.params = {{"k", k}, {"l", l}};
  r.x = x;
  r.R = R;
  r.lhs = std::pow(R, l) * a.derivative(l).magnitudes[d.flat(x)];
  r.rhs_terms = {{"riesz", riesz_potential(a.derivative(k).magnitudes, d, x, R, k)},
                 {"average", detail::ball_mean_abs(a.function(), x, R)}};
  detail::close_report(r);
  return r;
}

/// h^N Σ_{y ∈ B_R(x), y ≠ x} |D^k u(y) − D^k u(x)| / |x − y|^{N−k}; lattice points
/// outside the box carry D^k u = 0.
inline double difference_potential(const DerivativeField& F, const Domain& d, const Index& x, double R, int k) {
  require_radius_floor(d, R);
  const BallStencil s = make_stencil(d, R);
  const double h = d.spacing();
  const double e = static_cast<double>(k - d.dim());
  const std::size_t fx = d.flat(x);
  long double sum = 0.0L;
  s.for_each_offset([&](const Index& o) {
    if (o[0] == 0 && o[1] == 0) return;
    const Index y{x[0] + o[0], d.dim() == 2 ? x[1] + o[1] : 0};
    const bool inside = d.contains(y);
    double d2 = 0.0;
    for (std::size_t c = 0; c < F.components.size(); ++c) {
      const double diff = (inside ? F.components[c][d.flat(y)] : 0.0) - F.components[c][fx];
      d2 += F.weights[c] * diff * diff;
    }
    if (d2 == 0.0) return;
    const double dist = h * std::sqrt(static_cast<double>(o[0]) * o[0] + static_cast<double>(o[1]) * o[1]);
    sum += std::sqrt(d2) * detail::distance_power(dist, e);
  });
  return static_cast<double>(sum) * d.cell_volume();
}

/// |D^ℓ u(x)| against the difference potential of D^k u plus avg_{B_R(x)} |u|.
inline PointwiseReport fractional_lemma_ratio(FunctionAnalysis& a, int k, int l, const Index& x, double R) {
  if (!(0 <= l && l < k)) throw ValidationError("case_orders", "need 0 <= l < k");
  const Domain& d = a.domain();
  PointwiseReport r;
  r.lemma = "difference";
  r.params = {{"k", k}, {"l", l}};
  r.x = x;
  r.R = R;
  r.lhs = a.derivative(l).magnitudes[d.flat(x)];
  r.rhs_terms = {{"difference", difference_potential(a.derivative(k), d, x, R, k)},
                 {"average", detail::ball_mean_abs(a.function(), x, R)}};
  detail::close_report(r);
  return r;
}

struct InterpolationExponents {
  double beta = 0.0;
  double a = 0.0;  // on the derivative term
  double b = 0.0;  // on the Campanato term
};

/// β = p(s+λ)/q − λ − ℓ with s = k (+σ), checked against −λ−ℓ ≤ β ≤ s−ℓ.
/// At the endpoint λ = (sp − ℓq)/(q−p), β is exactly 0.
inline InterpolationExponents interpolation_exponents(const InequalityCase& c) {
  const double s = c.smoothness();
  InterpolationExponents e;
  const double endpoint = lambda_endpoint(c);
  if (std::abs(c.lambda - endpoint) <= 1e-12 * std::max(1.0, std::abs(endpoint)))
    e.beta = 0.0;
  else
    e.beta = c.p * (s + c.lambda) / c.q - c.lambda - c.l;
  if (e.beta < -c.lambda - c.l)
    throw ValidationError("beta_lower_bound", "beta = " + std::to_string(e.beta) + " < -lambda - l");
  if (e.beta > s - c.l) throw ValidationError("beta_upper_bound", "beta = " + std::to_string(e.beta) + " > k - l");
  if (!(c.lambda + s > 0.0)) throw ValidationError("lambda_lower_bound", "lambda + k must be positive");
  e.a = (c.lambda + c.l + e.beta) / (c.lambda + s);
  e.b = (s - c.l - e.beta) / (c.lambda + s);
  return e;
}

/// ρ^ℓ|D^ℓ u(x)| against (ρ^k M(|D^k u|)(x) + ρ^ℓ|D^ℓ u(x)|)^a (ρ^{−λ} Campanato)^b.
/// Fractional cases use ρ^{k+σ} D_{σ,p}(D^k u)(x) in place of the maximal term.
/// At ρ = ∞ (endpoint λ only) the ρ-powers cancel and the bound is M^a·Campanato^b.
inline PointwiseReport interpolation_local_ratio(FunctionAnalysis& a, const InequalityCase& c, const Index& x) {
  validate_case(c);
  if (c.name != CaseName::theorem1 && c.name != CaseName::theorem2 && c.name != CaseName::morrey_hom &&
      c.name != CaseName::frac_hom)
    throw ValidationError("case_name", "interpolation bound applies to theorem1/theorem2 cases");
  const InterpolationExponents ex = interpolation_exponents(c);
  const Domain& d = a.domain();
  const bool frac = c.sigma.has_value();
  PointwiseReport r;
  r.lemma = frac ? "interpolation_fractional" : "interpolation";
  r.params = to_json(c);
  r.x = x;
  r.R = c.rho;
  r.beta = ex.beta;
  const double dl = a.derivative(c.l).magnitudes[d.flat(x)];
  const double top = frac ? a.gagliardo_pointwise(c.k, *c.sigma, c.p).at(x) : a.maximal(c.k).at(x);
  const double camp = a.campanato(1, c.lambda, c.l, c.rho).value;
  double lead = 0.0, tail = 0.0;
  if (c.homogeneous()) {
    r.lhs = dl;
    lead = top;
    tail = camp;
  } else {
    r.lhs = std::pow(c.rho, c.l) * dl;
    lead = std::pow(c.rho, c.smoothness()) * top + r.lhs;
    tail = std::pow(c.rho, -c.lambda) * camp;
  }
  const double bound = std::pow(lead, ex.a) * std::pow(tail, ex.b);
  r.rhs_terms = {{frac ? "gagliardo_pointwise" : "maximal", top}, {"campanato", camp}, {"bound", bound}};
  r.rhs = bound;
  if (r.lhs == 0.0) {
    r.ratio = 0.0;
  } else if (bound == 0.0) {
    r.ratio = std::numeric_limits<double>::infinity();
    r.violation = true;
  } else {
    r.ratio = r.lhs / bound;
  }
  return r;
}

/// `count` seeded grid points drawn uniformly from the bounding box of the
/// support of u (whole box when u ≡ 0). Same seed, same physical box → nearby
/// points at every resolution.
inline std::vector<Index> sample_points(const GridFunction& u, std::size_t count, std::uint64_t seed) {
  const Domain& d = u.domain;
  Point lo{d.half_width(), d.half_width()}, hi{-d.half_width(), -d.half_width()};
  bool any = false;
  for (std::size_t f = 0; f < u.values.size(); ++f) {
    if (u.values[f] == 0.0) continue;
    any = true;
    const Point x = d.point(d.unflat(f));
    for (int a = 0; a < d.dim(); ++a) {
      lo[a] = std::min(lo[a], x[a]);
      hi[a] = std::max(hi[a], x[a]);
    }
  }
  if (!any) lo = {-d.half_width(), -d.half_width()}, hi = {d.half_width(), d.half_width()};
  std::mt19937_64 gen(seed);
  std::vector<Index> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Point x{0.0, 0.0};
    for (int a = 0; a < 2; ++a) {
      const double t = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      if (a < d.dim()) x[a] = lo[a] + t * (hi[a] - lo[a]);
    }
    out.push_back(d.nearest(x));
  }
  return out;
}

}  // namespace mclab
