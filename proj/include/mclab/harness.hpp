#pragma once

// Ratio evaluation of the inequality catalog, corpus generation and the
// scaling / refinement studies.
//
// A ratio is lhs/rhs with the unknown constant removed. It is an empirical
// lower bound on the best constant for that case, never an estimate of it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>
#include <json.hpp>

#include "mclab/analysis.hpp"
#include "mclab/cases.hpp"
#include "mclab/families.hpp"

namespace mclab {

struct RatioReport {
  InequalityCase c;
  std::string function_id;
  int resolution = 0;
  double lhs = 0.0;
  std::vector<std::pair<std::string, double>> rhs_factors;
  double rhs = 0.0;
  double ratio = 0.0;
  bool violation = false;  // rhs = 0 while lhs > 0
  std::string notes;
};

inline nlohmann::json to_json(const RatioReport& r) {
  nlohmann::json factors = nlohmann::json::object();
  for (const auto& [name, v] : r.rhs_factors) factors[name] = v;
  return {{"case", to_json(r.c)}, {"function", r.function_id}, {"n", r.resolution}, {"lhs", r.lhs},
          {"rhs", r.rhs},         {"rhs_factors", factors},    {"ratio", r.ratio},  {"violation", r.violation},
          {"notes", r.notes}};
}

namespace detail {

inline double ipow(double base, double e) {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return base;
  return std::pow(base, e);
}

inline void finish(RatioReport& r) {
  if (r.lhs == 0.0) {
    r.ratio = 0.0;
  } else if (r.rhs == 0.0 || !std::isfinite(r.rhs)) {
    r.ratio = std::numeric_limits<double>::infinity();
    r.violation = true;
    r.notes = "rhs vanishes while lhs > 0";
  } else {
    r.ratio = r.lhs / r.rhs;
  }
}

// ρ^{−λ}·Campanato(q=1, λ, P_{ℓ−1}, ρ), or the plain seminorm at ρ = ∞.
inline double campanato_factor(FunctionAnalysis& a, const InequalityCase& c) {
  const double v = a.campanato(1, c.lambda, c.l, c.rho).value;
  return c.homogeneous() ? v : ipow(c.rho, -c.lambda) * v;
}

}  // namespace detail

/// Evaluates any catalog case on one function. The case must be valid.
inline RatioReport evaluate_case(const InequalityCase& c, FunctionAnalysis& a, const std::string& id = "") {
  validate_case(c);
  if (a.domain().dim() != c.N) throw ValidationError("grid_dim", "case N differs from the grid dimension");
  RatioReport r;
  r.c = c;
  r.function_id = id;
  r.resolution = a.domain().points_per_axis();
  const double p = c.p, q = c.q, N = c.N, rho = c.rho;
  const int k = c.k, l = c.l;
  auto add = [&](const char* name, double v) {
    r.rhs_factors.emplace_back(name, v);
    return v;
  };
  // ρ^{ℓq} I_q(D^ℓ u), or I_q(D^ℓ u) when ρ is not part of the statement.
  auto lhs_scaled = [&] { return (c.homogeneous() ? 1.0 : std::pow(rho, l * q)) * a.integral(l, q); };

  switch (c.name) {
    case CaseName::theorem1:
    case CaseName::morrey_hom: {
      r.lhs = lhs_scaled();
      const double camp = add("campanato", detail::campanato_factor(a, c));
      const double e = add("energy", c.homogeneous() ? a.integral(k, p) : a.energy(k, l, p, rho));
      r.rhs = detail::ipow(camp, q - p) * e;
      break;
    }
    case CaseName::theorem2:
    case CaseName::frac_hom: {
      r.lhs = lhs_scaled();
      const double s = *c.sigma;
      const double camp = add("campanato", detail::campanato_factor(a, c));
      const double g = add("gagliardo", a.gagliardo(k, s, p));
      double e = g;
      if (!c.homogeneous()) e = std::pow(rho, (k + s) * p) * g + add("lower_order", std::pow(rho, l * p) * a.integral(l, p));
      add("energy", e);
      r.rhs = detail::ipow(camp, q - p) * e;
      break;
    }
    case CaseName::sobolev: {
      r.lhs = std::pow(a.integral(0, q), p / q);
      r.rhs = add("gradient", a.integral(1, p)) + add("function", a.integral(0, p));
      break;
    }
    case CaseName::sobolev_critical: {
      r.lhs = std::pow(a.integral(0, q), 1.0 - p / N);
      r.rhs = add("gradient", a.integral(1, p));
      break;
    }
    case CaseName::lions: {
      r.lhs = a.integral(0, q);
      const double m = add("unit_ball_mass", a.max_ball_sum(q, 1.0) * a.domain().cell_volume());
      const double e = add("energy", a.integral(1, p) + a.integral(0, p));
      r.rhs = detail::ipow(m, 1.0 - p / q) * e;
      break;
    }
    case CaseName::lions_dilation: {
      r.lhs = a.integral(0, q);
      const double m = add("scaled_mass", a.dilation_morrey(p));
      const double g = add("gradient", a.integral(1, p));
      r.rhs = detail::ipow(m, p / (N - p)) * g;
      break;
    }
    case CaseName::morrey_critical: {
      r.lhs = a.integral(l, q);
      const double m = add("morrey", a.morrey(1.0, c.lambda, kInfinity).value);
      const double g = add("derivative", a.integral(k, p));
      r.rhs = detail::ipow(m, (k - l) * p * p / (N - (k - l) * p)) * g;
      break;
    }
    case CaseName::particular: {
      r.lhs = a.integral(0, q);
      const double m = add("morrey", std::pow(rho, -c.lambda) * a.morrey(1.0, c.lambda, rho).value);
      const double e = add("energy", a.energy(1, 0, p, rho));
      r.rhs = detail::ipow(m, q - p) * e;
      break;
    }
    case CaseName::localized_sobolev: {
      r.lhs = lhs_scaled();
      const double t = N / c.lambda;
      const double m = add("local_mean", a.max_ball_mean(t, rho));
      const double e = add("energy", a.energy(k, l, p, rho));
      r.rhs = detail::ipow(m, (q - p) * c.lambda / N) * e;
      break;
    }
    case CaseName::lions_higher: {
      r.lhs = a.integral(0, q);
      const double m = add("local_mean", a.max_ball_mean(q, rho));
      const double e = add("energy", a.energy(k, 0, p, rho));
      r.rhs = detail::ipow(m, 1.0 - p / q) * e;
      break;
    }
    case CaseName::linf_interp: {
      r.lhs = lhs_scaled();
      const double m = add("sup", a.sup());
      const double e = add("energy", a.energy(k, l, p, rho));
      r.rhs = detail::ipow(m, q - p) * e;
      break;
    }
    case CaseName::bmo_gn_local: {
      r.lhs = lhs_scaled();
      const double b = add("bmo", a.bmo(rho).value);
      const double e = add("energy", a.energy(k, l, p, rho));
      r.rhs = detail::ipow(b, q - p) * e;
      break;
    }
    case CaseName::bmo_gn_hom: {
      r.lhs = a.integral(l, q);
      const double b = add("bmo", a.bmo(kInfinity).value);
      const double g = add("derivative", a.integral(k, p));
      r.rhs = detail::ipow(b, (static_cast<double>(k) / l - 1.0) * p) * g;
      break;
    }
    case CaseName::frac_critical: {
      r.lhs = a.integral(0, q);
      const double s = c.smoothness();
      const double m = add("morrey", a.morrey(1.0, c.lambda, kInfinity).value);
      const double g = add("gagliardo", a.gagliardo(k, *c.sigma, p));
      r.rhs = detail::ipow(m, s * p * p / (N - s * p)) * g;
      break;
    }
    case CaseName::frac_bmo: {
      r.lhs = a.integral(l, q);
      const double b = add("bmo", a.bmo(kInfinity).value);
      const double g = add("gagliardo", a.gagliardo(k, *c.sigma, p));
      r.rhs = detail::ipow(b, (c.smoothness() / l - 1.0) * p) * g;
      break;
    }
    case CaseName::gn_subscale: {
      r.lhs = lhs_scaled();
      const double t = N / c.lambda;
      const double m = add("scaled_integral", std::pow(rho, -N) * a.integral(0, t));
      const double e = add("energy", a.energy(k, l, p, rho));
      r.rhs = detail::ipow(m, (q - p) / t) * e;
      break;
    }
  }
  detail::finish(r);
  return r;
}

inline RatioReport evaluate_theorem1(const InequalityCase& c, FunctionAnalysis& a, const std::string& id = "") {
  if (c.name != CaseName::theorem1 && c.name != CaseName::morrey_hom)
    throw ValidationError("case_name", "evaluate_theorem1 needs a theorem1 case");
  return evaluate_case(c, a, id);
}

inline RatioReport evaluate_theorem2(const InequalityCase& c, FunctionAnalysis& a, const std::string& id = "") {
  if (c.name != CaseName::theorem2 && c.name != CaseName::frac_hom)
    throw ValidationError("case_name", "evaluate_theorem2 needs a theorem2 case");
  return evaluate_case(c, a, id);
}

/// Builds the named case from explicit parameters and evaluates it.
inline RatioReport evaluate_named(const std::string& name, int k, int l, double p, double q, LambdaSpec lambda,
                                  std::optional<double> sigma, double rho, FunctionAnalysis& a,
                                  const std::string& id = "") {
  const InequalityCase c = make_case(case_name_from_string(name), a.domain().dim(), k, l, p, q, lambda, sigma, rho);
  return evaluate_case(c, a, id);
}

// --- corpus -----------------------------------------------------------------

struct CorpusEntry {
  std::string id;
  CorpusFamily family;
};

struct CorpusFunction {
  std::string id;
  CorpusFamily family;
  GridFunction u;
  std::string sha256;
};

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

/// Seed for an unseeded randomised family: splitmix64 of (run seed, position).
inline std::uint64_t derive_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Samples every entry. Randomised families without an explicit seed get one
/// derived from `seed`, so the result is a pure function of its inputs.
inline std::vector<CorpusFunction> generate_corpus(const std::vector<CorpusEntry>& entries, const Domain& d,
                                                   std::uint64_t seed) {
  std::vector<CorpusFunction> out;
  std::map<std::string, int> ids;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CorpusFamily f = entries[i].family;
    if (!f.seed && (f.kind == FamilyKind::multi_bump || f.kind == FamilyKind::random_fourier))
      f.seed = derive_seed(seed, i);
    if (ids[entries[i].id]++ > 0) throw ValidationError("corpus_id", "duplicate function id '" + entries[i].id + "'");
    try {
      GridFunction u = sample(d, f);
      out.push_back({entries[i].id, f, u, sha256_hex(dump_string(u))});
    } catch (const ValidationError& e) {
      throw ValidationError(e.constraint(), "function '" + entries[i].id + "': " + e.what());
    }
  }
  return out;
}

inline nlohmann::json corpus_manifest(const std::vector<CorpusFunction>& corpus, const Domain& d, std::uint64_t seed) {
  nlohmann::json fns = nlohmann::json::array();
  for (const auto& f : corpus)
    fns.push_back({{"id", f.id}, {"family", to_json(f.family)}, {"sha256", f.sha256}, {"file", f.id + ".grid"}});
  return {{"grid", {{"N", d.dim()}, {"n", d.points_per_axis()}, {"L", d.half_width()}, {"m", d.support_margin()}}},
          {"seed", seed},
          {"functions", fns}};
}

/// Default corpus for dimension N on the default box (L = 4, margin 0.5).
inline std::vector<CorpusEntry> default_corpus(int N) {
  auto at = [&](double x, double y) { return N == 1 ? std::vector<double>{x} : std::vector<double>{x, y}; };
  std::vector<CorpusEntry> out;
  auto add = [&](std::string id, CorpusFamily f) { out.push_back({std::move(id), std::move(f)}); };
  CorpusFamily f;

  f = {};
  f.kind = FamilyKind::gaussian_bump;
  f.center = at(0.0, 0.0);
  f.width = 0.5;
  add("gaussian", f);

  f.center = at(0.6, -0.4);
  f.width = N == 1 ? 0.35 : 0.4;
  add("gaussian_offset", f);

  f = {};
  f.kind = FamilyKind::smooth_plateau;
  f.center = at(0.0, 0.0);
  f.inner_radius = 0.5;
  f.outer_radius = 1.2;
  add("plateau", f);

  f = {};
  f.kind = FamilyKind::modulated_bump;
  f.center = at(0.0, 0.0);
  f.width = 0.5;
  f.wavevector = N == 1 ? std::vector<double>{4.0} : std::vector<double>{3.0, 2.0};
  f.phase = 0.3;
  add("modulated", f);

  f = {};
  f.kind = FamilyKind::multi_bump;
  f.center = at(0.0, 0.0);
  f.count = 3;
  f.spread = 0.6;
  f.width = 0.3;
  if (N == 2) f.width = 0.4;
  add("multi3", f);

  f.count = 5;
  f.spread = 0.8;
  add("multi5", f);

  const std::vector<double> widths = N == 1 ? std::vector<double>{1.0, 0.5, 0.25} : std::vector<double>{1.2, 0.8, 0.5};
  for (std::size_t i = 0; i < widths.size(); ++i) {
    f = {};
    f.kind = FamilyKind::concentration;
    f.center = at(0.0, 0.0);
    f.width = widths[i];
    add("concentration" + std::to_string(i + 1), f);
  }

  for (int i = 0; i < 2; ++i) {
    f = {};
    f.kind = FamilyKind::random_fourier;
    f.center = at(0.0, 0.0);
    f.radius = 1.5;
    f.modes = 4;
    f.max_mode = 4;
    add("fourier" + std::to_string(i + 1), f);
  }
  return out;
}

// --- studies ----------------------------------------------------------------

struct ScalingRow {
  double scale = 1.0;
  RatioReport report;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  double flatness = 1.0;  // max/min ratio over the scales
  std::vector<std::pair<double, std::string>> skipped;  // scale, violated constraint
};

inline double flatness_of(const ScalingTable& t) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : t.rows) {
    lo = std::min(lo, r.report.ratio);
    hi = std::max(hi, r.report.ratio);
  }
  if (hi == 0.0) return 1.0;
  return (lo > 0.0 && std::isfinite(hi)) ? hi / lo : std::numeric_limits<double>::infinity();
}

/// Scaling tables for several cases on one family; each dilated function is
/// sampled and analysed once.
inline std::vector<ScalingTable> scaling_studies(const std::vector<InequalityCase>& cases, const CorpusFamily& f,
                                                 const Domain& d, const std::vector<double>& scales,
                                                 const AnalysisSettings& settings, const std::string& id = "") {
  std::vector<ScalingTable> out(cases.size());
  for (double s : scales) {
    std::optional<GridFunction> u;
    try {
      u = sample(d, dilated(f, s));
    } catch (const ValidationError& e) {
      for (auto& t : out) t.skipped.emplace_back(s, e.constraint());
      continue;
    }
    FunctionAnalysis a(std::move(*u), settings);
    for (std::size_t i = 0; i < cases.size(); ++i) out[i].rows.push_back({s, evaluate_case(cases[i], a, id)});
  }
  for (auto& t : out) t.flatness = flatness_of(t);
  return out;
}

/// Ratio of a case on u_s(x) = u(x/s) for each scale; scales whose dilated
/// family leaves the admissible band are rejected by sample().
inline ScalingTable scaling_study(const InequalityCase& c, const CorpusFamily& f, const Domain& d,
                                  const std::vector<double>& scales, const AnalysisSettings& settings,
                                  const std::string& id = "") {
  return scaling_studies({c}, f, d, scales, settings, id).front();
}

struct RefinementTable {
  std::vector<RatioReport> rows;  // one per resolution
  double drift = 0.0;             // |r₂ − r₁| / max(r₁, r₂)
};

inline double relative_drift(double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

/// Settings for resolution n derived from settings tuned for base.
inline AnalysisSettings rescaled_settings(const AnalysisSettings& settings, int base_n, int n) {
  AnalysisSettings s = settings;
  const int factor = std::max(1, n / base_n);
  s.centers.stride = settings.centers.stride * factor;
  s.centers.clearance = settings.centers.clearance * factor;
  return s;
}

inline std::vector<RefinementTable> refinement_studies(const std::vector<InequalityCase>& cases, const CorpusFamily& f,
                                                       const Domain& base, const std::vector<int>& resolutions,
                                                       const AnalysisSettings& settings, const std::string& id = "") {
  std::vector<RefinementTable> out(cases.size());
  for (int n : resolutions) {
    const Domain d = Domain::make(base.dim(), n, base.half_width(), base.support_margin());
    FunctionAnalysis a(sample(d, f), rescaled_settings(settings, base.points_per_axis(), n));
    for (std::size_t i = 0; i < cases.size(); ++i) out[i].rows.push_back(evaluate_case(cases[i], a, id));
  }
  for (auto& t : out)
    if (t.rows.size() >= 2) t.drift = relative_drift(t.rows.front().ratio, t.rows.back().ratio);
  return out;
}

/// Ratio of a case for the same family sampled at each resolution. Center
/// strides scale with n so the physical centre set stays comparable.
inline RefinementTable refinement_study(const InequalityCase& c, const CorpusFamily& f, const Domain& base,
                                        const std::vector<int>& resolutions, const AnalysisSettings& settings,
                                        const std::string& id = "") {
  return refinement_studies({c}, f, base, resolutions, settings, id).front();
}

/// One summary row per case: max ratio over functions, its argmax, and the
/// flatness / drift figures when studies were run.
struct SummaryRow {
  InequalityCase c;
  double max_ratio = 0.0;
  std::string argmax_function;
  std::optional<double> flatness;
  std::optional<double> drift;
};

inline std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(10);
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  os << v;
  return os.str();
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "case,N,k,l,p,q,lambda,sigma,rho,max_ratio,argmax_function,flatness,drift\n";
  for (const auto& r : rows) {
    const auto& c = r.c;
    os << to_string(c.name) << ',' << c.N << ',' << c.k << ',' << c.l << ',' << csv_number(c.p) << ','
       << csv_number(c.q) << ',' << csv_number(c.lambda) << ',' << (c.sigma ? csv_number(*c.sigma) : "") << ','
       << (c.homogeneous() ? "inf" : csv_number(c.rho)) << ',' << csv_number(r.max_ratio) << ',' << r.argmax_function
       << ',' << (r.flatness ? csv_number(*r.flatness) : "") << ',' << (r.drift ? csv_number(*r.drift) : "") << '\n';
  }
  return os.str();
}

}  // namespace mclab
