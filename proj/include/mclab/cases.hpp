#pragma once

// Parameter tuples of the interpolation inequalities and their admissible
// ranges, plus expansion of a test matrix into validated, deduplicated cases.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mclab/error.hpp"
#include "mclab/seminorms.hpp"

namespace mclab {

enum class CaseName {
  theorem1,
  theorem2,
  sobolev,
  sobolev_critical,
  lions,
  lions_dilation,
  morrey_critical,
  particular,
  localized_sobolev,
  lions_higher,
  linf_interp,
  bmo_gn_local,
  morrey_hom,
  bmo_gn_hom,
  frac_hom,
  frac_critical,
  frac_bmo,
  gn_subscale,
};

inline const std::vector<CaseName>& all_case_names() {
  static const std::vector<CaseName> names{
      CaseName::theorem1,       CaseName::theorem2,      CaseName::sobolev,         CaseName::sobolev_critical,
      CaseName::lions,          CaseName::lions_dilation, CaseName::morrey_critical, CaseName::particular,
      CaseName::localized_sobolev, CaseName::lions_higher, CaseName::linf_interp,   CaseName::bmo_gn_local,
      CaseName::morrey_hom,     CaseName::bmo_gn_hom,    CaseName::frac_hom,        CaseName::frac_critical,
      CaseName::frac_bmo,       CaseName::gn_subscale};
  return names;
}

inline const char* to_string(CaseName n) {
  switch (n) {
    case CaseName::theorem1: return "theorem1";
    case CaseName::theorem2: return "theorem2";
    case CaseName::sobolev: return "sobolev";
    case CaseName::sobolev_critical: return "sobolev_critical";
    case CaseName::lions: return "lions";
    case CaseName::lions_dilation: return "lions_dilation";
    case CaseName::morrey_critical: return "morrey_critical";
    case CaseName::particular: return "particular";
    case CaseName::localized_sobolev: return "localized_sobolev";
    case CaseName::lions_higher: return "lions_higher";
    case CaseName::linf_interp: return "linf_interp";
    case CaseName::bmo_gn_local: return "bmo_gn_local";
    case CaseName::morrey_hom: return "morrey_hom";
    case CaseName::bmo_gn_hom: return "bmo_gn_hom";
    case CaseName::frac_hom: return "frac_hom";
    case CaseName::frac_critical: return "frac_critical";
    case CaseName::frac_bmo: return "frac_bmo";
    case CaseName::gn_subscale: return "gn_subscale";
  }
  return "?";
}

inline CaseName case_name_from_string(const std::string& s) {
  for (CaseName n : all_case_names())
    if (s == to_string(n)) return n;
  throw ValidationError("case_name", "unknown inequality '" + s + "'");
}

/// Cases whose right-hand side involves a Gagliardo energy.
inline bool is_fractional(CaseName n) {
  return n == CaseName::theorem2 || n == CaseName::frac_hom || n == CaseName::frac_critical ||
         n == CaseName::frac_bmo;
}

/// Statements invariant under u ↦ u(·/s): the homogeneous endpoint forms.
inline bool dilation_invariant(CaseName n, double rho) {
  switch (n) {
    case CaseName::theorem1:
    case CaseName::theorem2: return std::isinf(rho);
    case CaseName::morrey_hom:
    case CaseName::frac_hom:
    case CaseName::sobolev_critical:
    case CaseName::lions_dilation:
    case CaseName::morrey_critical:
    case CaseName::bmo_gn_hom:
    case CaseName::frac_bmo:
    case CaseName::frac_critical: return true;
    default: return false;
  }
}

struct InequalityCase {
  CaseName name = CaseName::theorem1;
  int N = 1;
  int k = 1;
  int l = 0;
  double p = 2.0;
  double q = 4.0;
  double lambda = 0.0;
  std::optional<double> sigma;
  double rho = 1.0;  // kInfinity for the homogeneous forms

  double smoothness() const { return k + sigma.value_or(0.0); }
  bool homogeneous() const { return std::isinf(rho); }
};

/// ((k+σ)p − ℓq)/(q − p), the scale-invariant λ.
inline double lambda_endpoint(int k, int l, double p, double q, double sigma = 0.0) {
  return ((k + sigma) * p - l * q) / (q - p);
}

inline double lambda_endpoint(const InequalityCase& c) {
  return lambda_endpoint(c.k, c.l, c.p, c.q, c.sigma.value_or(0.0));
}

inline nlohmann::json to_json(const InequalityCase& c) {
  nlohmann::json j{{"name", to_string(c.name)}, {"N", c.N}, {"k", c.k}, {"l", c.l}, {"p", c.p},
                   {"q", c.q},                   {"lambda", c.lambda}};
  j["sigma"] = c.sigma ? nlohmann::json(*c.sigma) : nlohmann::json(nullptr);
  j["rho"] = rho_json(c.rho);
  return j;
}

inline std::string case_key(const InequalityCase& c) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(c.name) << '|' << c.N << '|' << c.k << '|' << c.l << '|' << c.p << '|' << c.q << '|' << c.lambda
     << '|' << (c.sigma ? *c.sigma : -1.0) << '|' << c.rho;
  return os.str();
}

/// How λ is given in a test matrix: a literal value or a symbolic anchor.
struct LambdaSpec {
  enum class Kind { value, minus_l, endpoint } kind = Kind::value;
  double value = 0.0;

  static LambdaSpec parse(const nlohmann::json& j) {
    if (j.is_number()) return {Kind::value, j.get<double>()};
    if (j.is_string()) {
      const auto s = j.get<std::string>();
      if (s == "-l") return {Kind::minus_l, 0.0};
      if (s == "endpoint") return {Kind::endpoint, 0.0};
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return {Kind::value, v};
      } catch (const std::exception&) {
      }
    }
    throw ValidationError("lambda_spec", "expected a number, \"-l\" or \"endpoint\", got " + j.dump());
  }

  nlohmann::json to_json() const {
    switch (kind) {
      case Kind::minus_l: return "-l";
      case Kind::endpoint: return "endpoint";
      case Kind::value: break;
    }
    return value;
  }
};

namespace detail {

constexpr double kCaseTol = 1e-12;

inline bool close(double a, double b) { return std::abs(a - b) <= kCaseTol * std::max({1.0, std::abs(a), std::abs(b)}); }

[[noreturn]] inline void reject(const std::string& constraint, const std::string& detail) {
  throw ValidationError(constraint, detail);
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline void require_orders(const InequalityCase& c) {
  if (c.N != 1 && c.N != 2) reject("grid_dim", "N must be 1 or 2");
  if (!(0 <= c.l && c.l < c.k)) reject("case_orders", "need 0 <= l < k");
  if (c.k > kMaxDerivativeOrder) reject("case_orders", "k exceeds the supported derivative order");
}

inline void require_exponents(const InequalityCase& c, bool strict_p) {
  if (!std::isfinite(c.p) || (strict_p ? !(c.p > 1.0) : !(c.p >= 1.0)))
    reject("p_range", std::string("p must be ") + (strict_p ? "> 1" : ">= 1") + ", got " + num(c.p));
  if (!std::isfinite(c.q) || !(c.q > c.p)) reject("q_range", "need p < q < inf, got q = " + num(c.q));
}

inline void require_sigma(const InequalityCase& c) {
  if (!c.sigma || !(*c.sigma > 0.0 && *c.sigma < 1.0)) reject("sigma_range", "sigma must lie in (0, 1)");
}

inline void require_finite_rho(const InequalityCase& c) {
  if (!(c.rho > 0.0)) reject("rho_range", "rho must be positive");
  if (std::isinf(c.rho)) reject("rho_infinite", "this inequality needs a finite rho");
}

inline void require_lambda_window(const InequalityCase& c, double lo, double hi) {
  if (hi < lo - kCaseTol) reject("lambda_upper_bound", "empty lambda range: endpoint " + num(hi) + " < " + num(lo));
  if (c.lambda < lo - kCaseTol) reject("lambda_lower_bound", "lambda = " + num(c.lambda) + " < " + num(lo));
  if (c.lambda > hi + kCaseTol) reject("lambda_upper_bound", "lambda = " + num(c.lambda) + " > " + num(hi));
}

inline void require_homogeneous_lambda(const InequalityCase& c) {
  const double e = lambda_endpoint(c);
  if (!close(c.lambda, e)) reject("homogeneous_endpoint", "rho = inf requires lambda at the endpoint " + num(e));
  if (!(c.lambda < c.N - kCaseTol))
    reject("lambda_dimension", "homogeneous lambda = " + num(c.lambda) + " must be below N = " + std::to_string(c.N));
}

}  // namespace detail

/// Checks the hypotheses of the named inequality; throws ValidationError
/// naming the violated constraint.
inline void validate_case(const InequalityCase& c) {
  using detail::reject;
  detail::require_orders(c);
  const double N = c.N;
  const bool frac = is_fractional(c.name);
  if (frac)
    detail::require_sigma(c);
  else if (c.sigma)
    reject("sigma_range", "sigma is only meaningful for fractional cases");
  if (!(c.rho > 0.0)) reject("rho_range", "rho must be positive");

  auto k1l0 = [&] {
    if (c.k != 1 || c.l != 0) reject("case_orders", std::string(to_string(c.name)) + " needs k = 1, l = 0");
  };
  auto derived_q = [&](double q, const char* what) {
    if (!detail::close(c.q, q)) reject("q_range", std::string(what) + " fixes q = " + detail::num(q));
  };
  auto homogeneous = [&] {
    if (!std::isinf(c.rho)) reject("rho_range", std::string(to_string(c.name)) + " is homogeneous (rho = inf)");
  };
  auto lambda_fixed = [&](double v) {
    if (!detail::close(c.lambda, v)) reject("lambda_fixed", "lambda must equal " + detail::num(v));
  };

  switch (c.name) {
    case CaseName::theorem1:
    case CaseName::theorem2: {
      detail::require_exponents(c, c.name == CaseName::theorem1);
      detail::require_lambda_window(c, -c.l, lambda_endpoint(c));
      if (std::isinf(c.rho)) detail::require_homogeneous_lambda(c);
      break;
    }
    case CaseName::morrey_hom:
    case CaseName::frac_hom: {
      detail::require_exponents(c, c.name == CaseName::morrey_hom);
      homogeneous();
      detail::require_lambda_window(c, -c.l, lambda_endpoint(c));
      detail::require_homogeneous_lambda(c);
      break;
    }
    case CaseName::sobolev: {
      k1l0();
      detail::require_exponents(c, false);
      if (!(1.0 / c.q > 1.0 / c.p - 1.0 / N))
        reject("sobolev_subcritical", "need 1/q > 1/p - 1/N");
      lambda_fixed(0.0);
      break;
    }
    case CaseName::sobolev_critical:
    case CaseName::lions_dilation: {
      k1l0();
      if (!(c.p > 1.0 && c.p < N)) reject("p_range", "critical exponent needs 1 < p < N");
      derived_q(N * c.p / (N - c.p), "the critical exponent");
      lambda_fixed(0.0);
      homogeneous();
      break;
    }
    case CaseName::lions: {
      k1l0();
      detail::require_exponents(c, false);
      if (1.0 / c.q < 1.0 / c.p - 1.0 / N - detail::kCaseTol) reject("sobolev_subcritical", "need 1/q >= 1/p - 1/N");
      lambda_fixed(0.0);
      if (!detail::close(c.rho, 1.0)) reject("rho_range", "lions uses unit balls (rho = 1)");
      break;
    }
    case CaseName::morrey_critical: {
      if (!(c.p > 1.0) || !std::isfinite(c.p)) reject("p_range", "p must be > 1");
      if (!(c.k * c.p < N)) reject("sobolev_subcritical", "need kp < N");
      derived_q(N * c.p / (N - (c.k - c.l) * c.p), "the critical Morrey form");
      lambda_fixed(N / c.p - c.k);
      homogeneous();
      break;
    }
    case CaseName::particular: {
      k1l0();
      detail::require_exponents(c, true);
      detail::require_finite_rho(c);
      if (c.lambda < -detail::kCaseTol) reject("lambda_lower_bound", "lambda must be >= 0");
      if (!(c.lambda < c.p / (c.q - c.p) - detail::kCaseTol))
        reject("lambda_upper_bound", "lambda must be < p/(q-p) = " + detail::num(c.p / (c.q - c.p)));
      break;
    }
    case CaseName::localized_sobolev:
    case CaseName::gn_subscale: {
      detail::require_exponents(c, true);
      detail::require_finite_rho(c);
      if (!(c.l * c.q < c.k * c.p)) reject("gn_order", "need l q < k p");
      if (!(c.lambda > detail::kCaseTol)) reject("lambda_lower_bound", "lambda must be > 0");
      if (c.lambda > lambda_endpoint(c) + detail::kCaseTol)
        reject("lambda_upper_bound", "lambda exceeds the endpoint " + detail::num(lambda_endpoint(c)));
      if (c.lambda > N + detail::kCaseTol) reject("lambda_dimension", "lambda must be <= N");
      break;
    }
    case CaseName::lions_higher: {
      if (c.l != 0) reject("case_orders", "lions_higher is evaluated for l = 0");
      detail::require_exponents(c, false);
      detail::require_finite_rho(c);
      if (1.0 / c.q < 1.0 / c.p - c.k / N - detail::kCaseTol) reject("sobolev_subcritical", "need 1/q >= 1/p - k/N");
      lambda_fixed(N / c.q);
      break;
    }
    case CaseName::linf_interp: {
      detail::require_exponents(c, true);
      detail::require_finite_rho(c);
      if (c.l * c.q > c.k * c.p + detail::kCaseTol) reject("gn_order", "need l q <= k p");
      lambda_fixed(0.0);
      break;
    }
    case CaseName::bmo_gn_local: {
      if (c.l < 1) reject("case_orders", "bmo_gn_local needs 1 <= l <= k - 1");
      detail::require_exponents(c, false);
      detail::require_finite_rho(c);
      if (c.l * c.q > c.k * c.p + detail::kCaseTol) reject("gn_order", "need l q <= k p");
      lambda_fixed(0.0);
      break;
    }
    case CaseName::bmo_gn_hom:
    case CaseName::frac_bmo: {
      if (c.l < 1) reject("case_orders", std::string(to_string(c.name)) + " needs l >= 1");
      if (!(c.p >= 1.0) || !std::isfinite(c.p)) reject("p_range", "p must be >= 1");
      derived_q(c.p * c.smoothness() / c.l, "the BMO form");
      lambda_fixed(0.0);
      homogeneous();
      break;
    }
    case CaseName::frac_critical: {
      if (c.l != 0) reject("case_orders", "frac_critical needs l = 0");
      if (!(c.p >= 1.0) || !std::isfinite(c.p)) reject("p_range", "p must be >= 1");
      if (!(c.p * c.smoothness() < N)) reject("sobolev_subcritical", "need p (k + sigma) < N");
      derived_q(N * c.p / (N - c.smoothness() * c.p), "the critical fractional form");
      lambda_fixed(N / c.p - c.smoothness());
      homogeneous();
      break;
    }
  }
}

/// Builds a case from matrix-style inputs. Parameters the named inequality
/// does not use are normalised (so duplicates collapse), derived exponents are
/// filled in, and the result is validated.
inline InequalityCase make_case(CaseName name, int N, int k, int l, double p, double q, LambdaSpec lambda,
                                std::optional<double> sigma, double rho) {
  InequalityCase c{name, N, k, l, p, q, 0.0, is_fractional(name) ? sigma : std::nullopt, rho};
  if (is_fractional(name) && !sigma) detail::reject("sigma_range", "fractional cases need sigma");
  const double s = c.sigma.value_or(0.0);
  const double dN = N;
  auto resolve = [&] {
    switch (lambda.kind) {
      case LambdaSpec::Kind::minus_l: return -static_cast<double>(l);
      case LambdaSpec::Kind::endpoint: return lambda_endpoint(c);
      case LambdaSpec::Kind::value: break;
    }
    return lambda.value;
  };
  switch (name) {
    case CaseName::theorem1:
    case CaseName::theorem2:
    case CaseName::particular:
    case CaseName::localized_sobolev:
    case CaseName::gn_subscale:
      c.lambda = resolve();
      break;
    case CaseName::morrey_hom:
    case CaseName::frac_hom:
      c.rho = kInfinity;
      c.lambda = lambda_endpoint(c);
      break;
    case CaseName::sobolev:
      c.rho = kInfinity;
      break;
    case CaseName::sobolev_critical:
    case CaseName::lions_dilation:
      c.rho = kInfinity;
      if (p < dN) c.q = dN * p / (dN - p);
      break;
    case CaseName::lions:
      c.rho = 1.0;
      break;
    case CaseName::morrey_critical:
      c.rho = kInfinity;
      if (k * p < dN) c.q = dN * p / (dN - (k - l) * p);
      c.lambda = dN / p - k;
      break;
    case CaseName::lions_higher:
      c.lambda = dN / q;
      break;
    case CaseName::linf_interp:
    case CaseName::bmo_gn_local:
      break;
    case CaseName::bmo_gn_hom:
    case CaseName::frac_bmo:
      c.rho = kInfinity;
      if (l >= 1) c.q = p * (k + s) / l;
      break;
    case CaseName::frac_critical:
      c.rho = kInfinity;
      if (p * (k + s) < dN) c.q = dN * p / (dN - (k + s) * p);
      c.lambda = dN / p - (k + s);
      break;
  }
  if (c.lambda == 0.0) c.lambda = 0.0;  // drop −0
  validate_case(c);
  return c;
}

struct TestMatrix {
  std::vector<CaseName> cases = all_case_names();
  std::vector<std::pair<int, int>> orders{{1, 0}, {2, 0}, {2, 1}};
  std::vector<double> p{1.5, 2.0};
  std::vector<double> q{3.0, 4.0};
  std::vector<LambdaSpec> lambda{{LambdaSpec::Kind::minus_l, 0.0}, {LambdaSpec::Kind::value, 0.0},
                                 {LambdaSpec::Kind::endpoint, 0.0}};
  std::vector<double> sigma{0.5};
  std::vector<double> rho{0.5, 1.0, kInfinity};

  static TestMatrix defaults() { return {}; }
};

inline nlohmann::json to_json(const TestMatrix& m) {
  nlohmann::json j;
  for (CaseName n : m.cases) j["cases"].push_back(to_string(n));
  for (auto [k, l] : m.orders) j["orders"].push_back({k, l});
  j["p"] = m.p;
  j["q"] = m.q;
  for (const auto& l : m.lambda) j["lambda"].push_back(l.to_json());
  j["sigma"] = m.sigma;
  for (double r : m.rho) j["rho"].push_back(rho_json(r));
  return j;
}

inline double rho_from_json(const nlohmann::json& j) {
  if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "INF")) return kInfinity;
  if (j.is_number() && j.get<double>() > 0.0) return j.get<double>();
  throw ValidationError("rho_range", "rho must be a positive number or \"inf\", got " + j.dump());
}

/// Reads a matrix override; absent keys keep their defaults, unknown keys are rejected.
inline TestMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("matrix", "test matrix must be a JSON object");
  static const std::set<std::string> known{"cases", "orders", "p", "q", "lambda", "sigma", "rho"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ValidationError("matrix", "unknown key '" + key + "'");
  TestMatrix m;
  auto numbers = [&](const char* key, std::vector<double>& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_array() || j[key].empty()) throw ValidationError("matrix", std::string(key) + " must be a non-empty array");
    out.clear();
    for (const auto& v : j[key]) {
      if (!v.is_number()) throw ValidationError("matrix", std::string(key) + " entries must be numbers");
      out.push_back(v.get<double>());
    }
  };
  try {
    if (j.contains("cases")) {
      m.cases.clear();
      for (const auto& v : j.at("cases")) m.cases.push_back(case_name_from_string(v.get<std::string>()));
    }
    if (j.contains("orders")) {
      m.orders.clear();
      for (const auto& v : j.at("orders")) {
        if (!v.is_array() || v.size() != 2) throw ValidationError("matrix", "orders entries are [k, l] pairs");
        m.orders.emplace_back(v[0].get<int>(), v[1].get<int>());
      }
    }
    numbers("p", m.p);
    numbers("q", m.q);
    numbers("sigma", m.sigma);
    if (j.contains("lambda")) {
      m.lambda.clear();
      for (const auto& v : j.at("lambda")) m.lambda.push_back(LambdaSpec::parse(v));
    }
    if (j.contains("rho")) {
      m.rho.clear();
      for (const auto& v : j.at("rho")) m.rho.push_back(rho_from_json(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("matrix", e.what());
  }
  return m;
}

struct SkippedCase {
  nlohmann::json params;  // the raw matrix point
  std::string constraint;
  std::string reason;
};

struct Expansion {
  std::vector<InequalityCase> cases;
  std::vector<SkippedCase> skipped;
};

/// All feasible cases of the matrix for dimension N, in a deterministic order,
/// deduplicated after normalisation. Infeasible points are kept with the reason.
inline Expansion expand(const TestMatrix& m, int N) {
  Expansion out;
  std::set<std::string> seen, seen_skips;
  const std::vector<double> no_sigma{0.0};
  for (CaseName name : m.cases) {
    const std::vector<double>& sigmas = is_fractional(name) ? m.sigma : no_sigma;
    for (auto [k, l] : m.orders)
      for (double p : m.p)
        for (double q : m.q)
          for (const LambdaSpec& lam : m.lambda)
            for (double s : sigmas)
              for (double rho : m.rho) {
                try {
                  std::optional<double> sig;
                  if (is_fractional(name)) sig = s;
                  InequalityCase c = make_case(name, N, k, l, p, q, lam, sig, rho);
                  if (seen.insert(case_key(c)).second) out.cases.push_back(c);
                } catch (const ValidationError& e) {
                  nlohmann::json raw{{"name", to_string(name)}, {"N", N}, {"k", k}, {"l", l}, {"p", p},
                                     {"q", q}, {"lambda", lam.to_json()}, {"rho", rho_json(rho)}};
                  if (is_fractional(name)) raw["sigma"] = s;
                  if (seen_skips.insert(raw.dump()).second) out.skipped.push_back({raw, e.constraint(), e.what()});
                }
              }
  }
  return out;
}

}  // namespace mclab
