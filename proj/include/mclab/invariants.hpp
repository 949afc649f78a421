#pragma once

// Discrete invariants that must hold exactly (up to stated tolerances) on any
// corpus: each check returns the worst slack seen and a readable detail line.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mclab/analysis.hpp"
#include "mclab/cases.hpp"
#include "mclab/harness.hpp"

namespace mclab {

struct CheckResult {
  std::string name;
  bool ok = true;
  std::size_t evaluated = 0;
  double worst = 0.0;  // largest violation measure seen (≤ 0 or ≤ tol means pass)
  std::string detail;

  void record(bool pass, double measure, const std::string& where) {
    ++evaluated;
    if (measure > worst || (!pass && ok)) {
      worst = std::max(worst, measure);
      if (!pass || detail.empty()) detail = where;
    }
    if (!pass) ok = false;
  }
};

inline nlohmann::json to_json(const CheckResult& c) {
  return {{"check", c.name}, {"ok", c.ok}, {"evaluated", c.evaluated}, {"worst", c.worst}, {"detail", c.detail}};
}

/// A (λ, ρ) point at which the seminorm invariants are probed.
struct SeminormPoint {
  double lambda = 0.0;
  double rho = 1.0;
};

/// The distinct (λ, ρ) pairs of the Campanato factors of an expanded matrix.
inline std::vector<SeminormPoint> seminorm_points(const std::vector<InequalityCase>& cases) {
  std::vector<SeminormPoint> out;
  for (const auto& c : cases) {
    if (c.name != CaseName::theorem1 && c.name != CaseName::theorem2 && c.name != CaseName::morrey_hom &&
        c.name != CaseName::frac_hom)
      continue;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const SeminormPoint& s) {
      return s.lambda == c.lambda && s.rho == c.rho;
    });
    if (!seen) out.push_back({c.lambda, c.rho});
  }
  std::sort(out.begin(), out.end(), [](const SeminormPoint& a, const SeminormPoint& b) {
    return a.rho != b.rho ? a.rho < b.rho : a.lambda < b.lambda;
  });
  return out;
}

namespace detail {
inline std::string where(const std::string& id, const SeminormPoint& s) {
  std::ostringstream os;
  os << id << " lambda=" << s.lambda << " rho=" << (std::isinf(s.rho) ? std::string("inf") : std::to_string(s.rho));
  return os.str();
}
}  // namespace detail

/// campanato(k=2) ≤ campanato(k=1) ≤ campanato(k=0), q = 1, per (λ, ρ).
inline void check_degree_monotonicity(FunctionAnalysis& a, const std::string& id,
                                      const std::vector<SeminormPoint>& points, CheckResult& out, int max_k = 2) {
  const double tol = 1e-7 * std::max(1.0, a.sup());
  for (const auto& s : points) {
    double prev = a.campanato(1, s.lambda, 0, s.rho).value;
    for (int k = 1; k <= max_k; ++k) {
      const double v = a.campanato(1, s.lambda, k, s.rho).value;
      out.record(v <= prev + tol, v - prev, detail::where(id, s) + " k=" + std::to_string(k));
      prev = v;
    }
  }
}

/// Campanato with k = 0 against the Morrey norm, relative 1e−12.
inline void check_campanato_morrey(FunctionAnalysis& a, const std::string& id, const std::vector<SeminormPoint>& points,
                                   CheckResult& out) {
  for (const auto& s : points)
    for (int q : {1, 2}) {
      const double c = a.campanato(q, s.lambda, 0, s.rho).value;
      const double m = a.morrey(q, s.lambda, s.rho).value;
      const double rel = relative_drift(c, m);
      out.record(rel <= 1e-12, rel, detail::where(id, s) + " q=" + std::to_string(q));
    }
}

/// Per ball and for the sups: camp(q=1, λ=0, k=1) ≤ bmo ≤ 2·camp.
inline void check_bmo_sandwich(FunctionAnalysis& a, const std::string& id, const std::vector<double>& rhos,
                               CheckResult& out) {
  const double tol = 1e-7 * std::max(1.0, a.sup());
  for (double rho : rhos) {
    const SeminormPoint sp{0.0, rho};
    for (double r : a.radii(rho).radii) {
      const auto& med = a.balls().fit_residuals(0, 1, r);
      const auto& osc = a.balls().oscillations(r);
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < med.size(); ++i)
        worst = std::max({worst, med[i] - osc[i], osc[i] - 2.0 * med[i]});
      out.record(worst <= tol, worst, detail::where(id, sp) + " r=" + std::to_string(r));
    }
    const double c = a.campanato(1, 0.0, 1, rho).value, b = a.bmo(rho).value;
    out.record(c <= b + tol && b <= 2.0 * c + tol, std::max(c - b, b - 2.0 * c), detail::where(id, sp) + " sup");
  }
}

/// M f(x) ≥ avg_{B_{2h}(x)} |f| at every grid point, exactly.
inline void check_maximal_domination(FunctionAnalysis& a, const std::string& id, int order, CheckResult& out) {
  const Domain& d = a.domain();
  const auto& f = a.derivative(order).magnitudes;
  const RadiusGrid& g = a.radii(kInfinity);
  const std::vector<double> M = maximal_function(f, d, g);
  const BallSummer summer(d, f);
  const BallStencil s = make_stencil(d, 2.0 * d.spacing());
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  for (std::size_t i = 0; i < M.size(); ++i) {
    const double small = summer.sum(d.unflat(i), s) / static_cast<double>(s.lattice_count());
    if (small - M[i] > worst) {
      worst = small - M[i];
      at = i;
    }
  }
  out.record(worst <= 0.0, worst, id + " order=" + std::to_string(order) + " flat=" + std::to_string(at));
}

/// morrey(q=1, λ, ρ) ≤ max_x ρ^λ (avg_{B_{r_max}(x)} |u|^{N/λ})^{λ/N} + 1e−9, for 0 < λ ≤ N.
inline void check_holder_chain(FunctionAnalysis& a, const std::string& id, const std::vector<double>& lambdas,
                               const std::vector<double>& rhos, CheckResult& out) {
  const double N = a.domain().dim();
  for (double rho : rhos)
    for (double lambda : lambdas) {
      const RadiusGrid& g = a.radii(rho);
      const double lhs = a.morrey(1.0, lambda, rho).value;
      const double rhs = std::pow(g.r_max, lambda) * std::pow(a.max_ball_mean(N / lambda, g.r_max), lambda / N);
      out.record(lhs <= rhs + 1e-9 * std::max(1.0, rhs), lhs - rhs, detail::where(id, {lambda, rho}));
    }
}

/// ratio(theorem1, λ = N/q, ρ = 1) ≥ ratio(lions) and ratio(localized_sobolev) ≥ ratio(gn_subscale),
/// both up to a relative 1e−9.
inline void check_catalog_consistency(FunctionAnalysis& a, const std::string& id, const std::vector<double>& ps,
                                      const std::vector<double>& qs, CheckResult& out) {
  const int N = a.domain().dim();
  for (double p : ps)
    for (double q : qs) {
      if (!(q > p)) continue;
      try {
        const auto lions = make_case(CaseName::lions, N, 1, 0, p, q, {}, std::nullopt, 1.0);
        const auto t1 = make_case(CaseName::theorem1, N, 1, 0, p, q, {LambdaSpec::Kind::value, N / q}, std::nullopt, 1.0);
        const double rl = evaluate_case(lions, a, id).ratio, rt = evaluate_case(t1, a, id).ratio;
        std::ostringstream os;
        os << id << " theorem1>=lions p=" << p << " q=" << q;
        out.record(rt >= rl * (1.0 - 1e-9), rl - rt, os.str());
      } catch (const ValidationError&) {
      }
      for (auto [k, l] : std::vector<std::pair<int, int>>{{1, 0}, {2, 0}, {2, 1}}) {
        for (double rho : {0.5, 1.0}) {
          try {
            const InequalityCase probe{CaseName::gn_subscale, N, k, l, p, q, 0.0, std::nullopt, rho};
            const double lambda = std::min(lambda_endpoint(probe), static_cast<double>(N));
            if (!(lambda > 0.0)) continue;
            const auto ls = make_case(CaseName::localized_sobolev, N, k, l, p, q, {LambdaSpec::Kind::value, lambda},
                                      std::nullopt, rho);
            const auto gn =
                make_case(CaseName::gn_subscale, N, k, l, p, q, {LambdaSpec::Kind::value, lambda}, std::nullopt, rho);
            const double r1 = evaluate_case(ls, a, id).ratio, r2 = evaluate_case(gn, a, id).ratio;
            std::ostringstream os;
            os << id << " localized_sobolev>=gn_subscale k=" << k << " l=" << l << " p=" << p << " q=" << q
               << " rho=" << rho;
            out.record(r1 >= r2 * (1.0 - 1e-9), r2 - r1, os.str());
          } catch (const ValidationError&) {
          }
        }
      }
    }
}

/// ‖M f‖_2 / ‖f‖_2 ≤ 10 for f = |u|.
inline void check_maximal_l2(FunctionAnalysis& a, const std::string& id, CheckResult& out) {
  const Domain& d = a.domain();
  const auto& f = a.function().values;
  const double nf = lp_norm(f, 2.0, d);
  if (nf == 0.0) return;
  const double nm = lp_norm(maximal_function(f, d, a.radii(kInfinity)), 2.0, d);
  out.record(nm / nf <= 10.0, nm / nf, id);
}

}  // namespace mclab
