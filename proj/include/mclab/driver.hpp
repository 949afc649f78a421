#pragma once

// The four CLI commands as library calls. Each writes its files under an
// output directory and returns what it wrote so tests can inspect it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mclab/analysis.hpp"
#include "mclab/cases.hpp"
#include "mclab/config.hpp"
#include "mclab/harness.hpp"
#include "mclab/invariants.hpp"
#include "mclab/parallel.hpp"
#include "mclab/pointwise.hpp"

namespace mclab {

namespace fs = std::filesystem;

namespace detail {

inline std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("output_io", "cannot write " + p.string());
  return os;
}

inline void write_text(const fs::path& p, const std::string& text) {
  auto os = open_out(p);
  os << text;
  if (!os) throw ValidationError("output_io", "write failed for " + p.string());
}

// Runs job(i) for i in [0, count) up to `parallelism` at a time and hands each
// finished result to sink(i, result) in index order.
template <class Result, class Job, class Sink>
void ordered_jobs(std::size_t count, int parallelism, Job&& job, Sink&& sink) {
  const std::size_t batch = static_cast<std::size_t>(std::max(1, parallelism));
  for (std::size_t start = 0; start < count; start += batch) {
    const std::size_t end = std::min(count, start + batch);
    std::vector<std::optional<Result>> slots(end - start);
    if (end - start > 1)
      parallel_for(end - start, [&](std::size_t j) { slots[j].emplace(job(start + j)); }, 1);
    else
      slots[0].emplace(job(start));
    for (std::size_t j = 0; j < slots.size(); ++j) sink(start + j, std::move(*slots[j]));
  }
}

inline std::string case_csv_fields(const InequalityCase& c) {
  std::ostringstream os;
  os << to_string(c.name) << ',' << c.N << ',' << c.k << ',' << c.l << ',' << csv_number(c.p) << ','
     << csv_number(c.q) << ',' << csv_number(c.lambda) << ',' << (c.sigma ? csv_number(*c.sigma) : "") << ','
     << (c.homogeneous() ? "inf" : csv_number(c.rho));
  return os.str();
}

inline const char* kCaseCsvHeader = "case,N,k,l,p,q,lambda,sigma,rho";

inline std::vector<double> finite_rhos(const TestMatrix& m) {
  std::vector<double> out;
  for (double r : m.rho)
    if (std::isfinite(r)) out.push_back(r);
  return out;
}

inline int max_order(const TestMatrix& m) {
  int k = 0;
  for (auto [kk, l] : m.orders) k = std::max(k, kk);
  return k;
}

}  // namespace detail

/// The corpus of a run: read from corpus_dir when set, otherwise generated.
inline std::vector<CorpusFunction> load_corpus(const RunConfig& cfg) {
  if (!cfg.corpus_dir) return generate_corpus(cfg.corpus_entries(), cfg.domain(), cfg.seed);
  auto corpus = read_corpus(*cfg.corpus_dir);
  const Domain d = cfg.domain();
  for (const auto& f : corpus)
    if (f.u.domain.dim() != d.dim() || f.u.domain.points_per_axis() != d.points_per_axis() ||
        f.u.domain.half_width() != d.half_width())
      throw ValidationError("corpus_grid", "dump '" + f.id + "' does not match the configured grid");
  return corpus;
}

/// Corpus functions selected by study.functions (all when empty).
inline std::vector<CorpusFunction> selected(std::vector<CorpusFunction> corpus, const std::vector<std::string>& ids) {
  if (ids.empty()) return corpus;
  std::vector<CorpusFunction> out;
  for (const auto& id : ids) {
    auto it = std::find_if(corpus.begin(), corpus.end(), [&](const CorpusFunction& f) { return f.id == id; });
    if (it == corpus.end()) throw ValidationError("function_id", "no corpus function '" + id + "'");
    out.push_back(*it);
  }
  return out;
}

// --- corpus ------------------------------------------------------------------

inline nlohmann::json run_corpus(const RunConfig& cfg, const fs::path& out) {
  const auto corpus = generate_corpus(cfg.corpus_entries(), cfg.domain(), cfg.seed);
  return write_corpus(corpus, cfg.domain(), cfg.seed, out / "corpus");
}

// --- norms -------------------------------------------------------------------

struct NormRow {
  std::string functional;
  std::optional<int> order;     // derivative order or fit degree bound k
  std::optional<int> lower;     // ℓ of an energy
  std::optional<double> exponent;
  std::optional<double> lambda;
  std::optional<double> sigma;
  std::optional<double> rho;
  int n = 0;
  double value = 0.0;
};

inline nlohmann::json to_json(const NormRow& r) {
  nlohmann::json j{{"functional", r.functional}, {"n", r.n}, {"value", r.value}};
  if (r.order) j["k"] = *r.order;
  if (r.lower) j["l"] = *r.lower;
  if (r.exponent) j["exponent"] = *r.exponent;
  if (r.lambda) j["lambda"] = *r.lambda;
  if (r.sigma) j["sigma"] = *r.sigma;
  if (r.rho) j["rho"] = rho_json(*r.rho);
  return j;
}

inline std::string norms_csv(const std::vector<NormRow>& rows) {
  std::ostringstream os;
  os << "functional,k,l,exponent,lambda,sigma,rho,n,value\n";
  auto opt = [](const auto& v) {
    if (!v) return std::string();
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, int>)
      return std::to_string(*v);
    else
      return csv_number(*v);
  };
  for (const auto& r : rows)
    os << r.functional << ',' << opt(r.order) << ',' << opt(r.lower) << ',' << opt(r.exponent) << ','
       << opt(r.lambda) << ',' << opt(r.sigma) << ',' << opt(r.rho) << ',' << r.n << ',' << csv_number(r.value)
       << '\n';
  return os.str();
}

/// Every seminorm of one function at the parameters the configured matrix uses.
/// Campanato rows cover fit degrees k ≤ 1, the ones the catalog evaluates.
inline std::vector<NormRow> norm_table(FunctionAnalysis& a, const TestMatrix& m) {
  const int N = a.domain().dim(), n = a.domain().points_per_axis();
  std::vector<NormRow> rows;
  std::set<double> exps(m.p.begin(), m.p.end());
  exps.insert(m.q.begin(), m.q.end());
  const int kmax = detail::max_order(m);
  for (int k = 0; k <= kmax; ++k)
    for (double e : exps) rows.push_back({"lp_integral", k, {}, e, {}, {}, {}, n, a.integral(k, e)});
  rows.push_back({"sup", {}, {}, {}, {}, {}, {}, n, a.sup()});
  for (double rho : detail::finite_rhos(m))
    for (auto [k, l] : m.orders)
      for (double p : m.p) rows.push_back({"energy", k, l, p, {}, {}, rho, n, a.energy(k, l, p, rho)});
  const auto points = seminorm_points(expand(m, N).cases);
  for (const auto& s : points)
    for (int q : {1, 2}) {
      rows.push_back({"morrey", {}, {}, double(q), s.lambda, {}, s.rho, n, a.morrey(q, s.lambda, s.rho).value});
      for (int k = 0; k <= 1; ++k)
        rows.push_back({"campanato", k, {}, double(q), s.lambda, {}, s.rho, n, a.campanato(q, s.lambda, k, s.rho).value});
    }
  for (double rho : m.rho) rows.push_back({"bmo", {}, {}, {}, {}, {}, rho, n, a.bmo(rho).value});
  for (int k = 0; k <= kmax; ++k)
    for (double sigma : m.sigma)
      for (double p : m.p) rows.push_back({"gagliardo", k, {}, p, {}, sigma, {}, n, a.gagliardo(k, sigma, p)});
  for (double p : m.p)
    if (p < N) rows.push_back({"dilation_morrey", {}, {}, p, {}, {}, kInfinity, n, a.dilation_morrey(p)});
  return rows;
}

inline std::vector<NormRow> run_norms(const RunConfig& cfg, const std::string& id, const fs::path& out) {
  const auto corpus = selected(load_corpus(cfg), {id});
  FunctionAnalysis a(corpus.front().u, cfg.analysis());
  const auto rows = norm_table(a, cfg.matrix);
  std::ostringstream jl;
  for (const auto& r : rows) jl << to_json(r).dump() << '\n';
  detail::write_text(out / ("norms_" + id + ".jsonl"), jl.str());
  detail::write_text(out / ("norms_" + id + ".csv"), norms_csv(rows));
  return rows;
}

// --- check -------------------------------------------------------------------

/// Centre grid of the degree-monotonicity probe. In 2-D the k = 2 Campanato
/// needs an L¹ linear fit on every ball, so the probe uses every 8th centre.
inline AnalysisSettings monotonicity_settings(const AnalysisSettings& s, int N) {
  AnalysisSettings out = s;
  if (N == 2) out.centers.stride = std::max(s.centers.stride, 8);
  return out;
}

/// Integer offset used for the translation probe: a few cells, a multiple of
/// the centre stride so the centre lattice maps onto itself.
inline Index translation_offset(const AnalysisSettings& s, int N) {
  const int st = s.centers.stride;
  return N == 1 ? Index{3 * st, 0} : Index{3 * st, -2 * st};
}

struct CheckOutcome {
  std::vector<RatioReport> reports;
  std::vector<SummaryRow> summary;
  std::vector<SkippedCase> skipped;
  std::vector<CheckResult> checks;
  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.ok; });
  }
};

namespace detail {

struct FunctionCheck {
  std::vector<RatioReport> reports;
  std::vector<CheckResult> checks;
};

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"ratio_finite",        "degree_monotonicity", "campanato_morrey",
                                              "bmo_sandwich",        "maximal_domination",  "holder_chain",
                                              "catalog_consistency", "maximal_l2",          "translation_equivariance"};
  return names;
}

inline FunctionCheck check_function(const RunConfig& cfg, const CorpusFunction& f,
                                    const std::vector<InequalityCase>& cases) {
  FunctionCheck out;
  for (const auto& n : check_names()) out.checks.push_back({n});
  auto check = [&](const std::string& n) -> CheckResult& {
    return *std::find_if(out.checks.begin(), out.checks.end(), [&](const CheckResult& c) { return c.name == n; });
  };
  const AnalysisSettings settings = cfg.analysis();
  const int N = f.u.domain.dim();
  FunctionAnalysis a(f.u, settings);
  for (const auto& c : cases) {
    out.reports.push_back(evaluate_case(c, a, f.id));
    const auto& r = out.reports.back();
    check("ratio_finite").record(std::isfinite(r.ratio) && !r.violation, r.violation ? 1.0 : 0.0,
                                 f.id + " " + case_key(c));
  }
  const auto points = seminorm_points(cases);
  {
    const AnalysisSettings ms = monotonicity_settings(settings, N);
    if (ms.centers.stride == settings.centers.stride) {
      check_degree_monotonicity(a, f.id, points, check("degree_monotonicity"));
    } else {
      FunctionAnalysis coarse(f.u, ms);
      check_degree_monotonicity(coarse, f.id, points, check("degree_monotonicity"));
    }
  }
  check_campanato_morrey(a, f.id, points, check("campanato_morrey"));
  std::vector<double> rhos = cfg.matrix.rho;
  check_bmo_sandwich(a, f.id, rhos, check("bmo_sandwich"));
  for (int k = 0; k <= max_order(cfg.matrix); ++k) check_maximal_domination(a, f.id, k, check("maximal_domination"));
  const std::vector<double> lambdas{0.25 * N, 0.5 * N, 0.75 * N, 1.0 * N};
  check_holder_chain(a, f.id, lambdas, finite_rhos(cfg.matrix), check("holder_chain"));
  check_catalog_consistency(a, f.id, cfg.matrix.p, cfg.matrix.q, check("catalog_consistency"));
  check_maximal_l2(a, f.id, check("maximal_l2"));

  auto& tr = check("translation_equivariance");
  std::optional<GridFunction> moved;
  try {
    moved = shifted(f.u, translation_offset(settings, N));
  } catch (const ValidationError&) {
    tr.detail = f.id + " skipped: shift leaves the box";
  }
  if (moved) {
    FunctionAnalysis b(std::move(*moved), settings);
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const double r1 = out.reports[i].ratio, r2 = evaluate_case(cases[i], b, f.id).ratio;
      const double rel = (std::isinf(r1) && r1 == r2) ? 0.0 : relative_drift(r1, r2);
      tr.record(rel <= 1e-10, rel, f.id + " " + case_key(cases[i]));
    }
  }
  return out;
}

inline void merge(CheckResult& into, const CheckResult& from) {
  const bool take = from.worst > into.worst || (!from.ok && into.ok) || into.detail.empty();
  into.evaluated += from.evaluated;
  if (take) {
    into.worst = std::max(into.worst, from.worst);
    if (!from.detail.empty()) into.detail = from.detail;
  }
  into.ok = into.ok && from.ok;
}

inline nlohmann::json skipped_json(const std::vector<SkippedCase>& skipped) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : skipped) j.push_back({{"params", s.params}, {"constraint", s.constraint}, {"reason", s.reason}});
  return j;
}

}  // namespace detail

/// Evaluates every feasible matrix case on every corpus function and runs the
/// invariant checks. Reports stream to reports.jsonl in (function, case) order.
inline CheckOutcome run_check(const RunConfig& cfg, const fs::path& out) {
  const auto corpus = load_corpus(cfg);
  const Expansion ex = expand(cfg.matrix, cfg.N);
  CheckOutcome result;
  result.skipped = ex.skipped;
  for (const auto& n : detail::check_names()) result.checks.push_back({n});
  auto jl = detail::open_out(out / "reports.jsonl");
  std::vector<SummaryRow> summary(ex.cases.size());
  for (std::size_t i = 0; i < ex.cases.size(); ++i) summary[i].c = ex.cases[i];
  detail::ordered_jobs<detail::FunctionCheck>(
      corpus.size(), cfg.parallelism, [&](std::size_t i) { return detail::check_function(cfg, corpus[i], ex.cases); },
      [&](std::size_t, detail::FunctionCheck fc) {
        for (std::size_t i = 0; i < fc.reports.size(); ++i) {
          const auto& r = fc.reports[i];
          jl << to_json(r).dump() << '\n';
          if (summary[i].argmax_function.empty() || r.ratio > summary[i].max_ratio) {
            summary[i].max_ratio = r.ratio;
            summary[i].argmax_function = r.function_id;
          }
        }
        jl.flush();
        for (std::size_t i = 0; i < fc.checks.size(); ++i) detail::merge(result.checks[i], fc.checks[i]);
        for (auto& r : fc.reports) result.reports.push_back(std::move(r));
      });
  result.summary = std::move(summary);
  detail::write_text(out / "summary.csv", summary_csv(result.summary));
  detail::write_text(out / "skipped.json", nlohmann::json{{"skipped", detail::skipped_json(ex.skipped)}}.dump(2) + "\n");
  nlohmann::json inv = nlohmann::json::array();
  for (const auto& c : result.checks) inv.push_back(to_json(c));
  detail::write_text(out / "invariants.json",
                     nlohmann::json{{"ok", result.ok()}, {"cases", ex.cases.size()}, {"functions", corpus.size()},
                                    {"checks", inv}}
                             .dump(2) +
                         "\n");
  return result;
}

// --- studies -----------------------------------------------------------------

enum class StudyKind { scaling, refinement, pointwise };

inline StudyKind study_kind_from_string(const std::string& s) {
  if (s == "scaling") return StudyKind::scaling;
  if (s == "refinement") return StudyKind::refinement;
  if (s == "pointwise") return StudyKind::pointwise;
  throw ValidationError("study", "unknown study '" + s + "'");
}

/// Cases whose dilation flatness is asserted: endpoint λ at ρ = ∞.
inline bool flatness_asserted(const InequalityCase& c) {
  return c.homogeneous() && (c.name == CaseName::theorem1 || c.name == CaseName::theorem2 ||
                             c.name == CaseName::morrey_hom || c.name == CaseName::frac_hom);
}

struct ScalingOutcome {
  struct Entry {
    InequalityCase c;
    std::string function_id;
    ScalingTable table;
  };
  std::vector<Entry> entries;
  double worst_asserted_flatness = 1.0;
};

inline ScalingOutcome run_scaling(const RunConfig& cfg, const fs::path& out) {
  const auto corpus = selected(load_corpus(cfg), cfg.study.functions);
  std::vector<InequalityCase> cases;
  for (const auto& c : expand(cfg.matrix, cfg.N).cases)
    if (dilation_invariant(c.name, c.rho)) cases.push_back(c);
  ScalingOutcome result;
  std::ostringstream rows, flat;
  rows << detail::kCaseCsvHeader << ",function,scale,n,ratio\n";
  flat << detail::kCaseCsvHeader << ",function,flatness,asserted,skipped_scales\n";
  detail::ordered_jobs<std::vector<ScalingTable>>(
      corpus.size(), cfg.parallelism,
      [&](std::size_t i) {
        return scaling_studies(cases, corpus[i].family, cfg.domain(), cfg.study.scales, cfg.analysis(), corpus[i].id);
      },
      [&](std::size_t i, std::vector<ScalingTable> tables) {
        for (std::size_t j = 0; j < cases.size(); ++j) {
          const auto& t = tables[j];
          const std::string key = detail::case_csv_fields(cases[j]);
          for (const auto& r : t.rows)
            rows << key << ',' << corpus[i].id << ',' << csv_number(r.scale) << ',' << r.report.resolution << ','
                 << csv_number(r.report.ratio) << '\n';
          std::string skipped;
          for (const auto& [s, why] : t.skipped) skipped += (skipped.empty() ? "" : ";") + csv_number(s) + ":" + why;
          const bool asserted = flatness_asserted(cases[j]);
          flat << key << ',' << corpus[i].id << ',' << csv_number(t.flatness) << ',' << (asserted ? 1 : 0) << ','
               << skipped << '\n';
          if (asserted && t.rows.size() >= 2)
            result.worst_asserted_flatness = std::max(result.worst_asserted_flatness, t.flatness);
          result.entries.push_back({cases[j], corpus[i].id, t});
        }
      });
  detail::write_text(out / "study_scaling.csv", rows.str());
  detail::write_text(out / "study_scaling_flatness.csv", flat.str());
  return result;
}

struct RefinementOutcome {
  std::vector<int> resolutions;
  std::vector<InequalityCase> cases;
  std::vector<std::vector<double>> max_ratio;  // [case][resolution]
  std::vector<std::vector<std::string>> argmax;
  std::vector<double> drift;  // per case, of the corpus maxima
};

inline RefinementOutcome run_refinement(const RunConfig& cfg, const fs::path& out) {
  const auto corpus = selected(load_corpus(cfg), cfg.study.functions);
  RefinementOutcome result;
  result.cases = expand(cfg.matrix, cfg.N).cases;
  result.resolutions = {cfg.n, cfg.n * cfg.study.refine_factor};
  const std::size_t nc = result.cases.size(), nr = result.resolutions.size();
  result.max_ratio.assign(nc, std::vector<double>(nr, 0.0));
  result.argmax.assign(nc, std::vector<std::string>(nr));
  detail::ordered_jobs<std::vector<RefinementTable>>(
      corpus.size(), cfg.parallelism,
      [&](std::size_t i) {
        return refinement_studies(result.cases, corpus[i].family, cfg.domain(), result.resolutions, cfg.analysis(),
                                  corpus[i].id);
      },
      [&](std::size_t i, std::vector<RefinementTable> tables) {
        for (std::size_t c = 0; c < nc; ++c)
          for (std::size_t r = 0; r < nr; ++r)
            if (result.argmax[c][r].empty() || tables[c].rows[r].ratio > result.max_ratio[c][r]) {
              result.max_ratio[c][r] = tables[c].rows[r].ratio;
              result.argmax[c][r] = corpus[i].id;
            }
      });
  std::ostringstream os;
  os << detail::kCaseCsvHeader << ",n,max_ratio,argmax_function,drift\n";
  std::vector<SummaryRow> summary;
  for (std::size_t c = 0; c < nc; ++c) {
    result.drift.push_back(relative_drift(result.max_ratio[c].front(), result.max_ratio[c].back()));
    for (std::size_t r = 0; r < nr; ++r)
      os << detail::case_csv_fields(result.cases[c]) << ',' << result.resolutions[r] << ','
         << csv_number(result.max_ratio[c][r]) << ',' << result.argmax[c][r] << ',' << csv_number(result.drift.back())
         << '\n';
    summary.push_back({result.cases[c], result.max_ratio[c].front(), result.argmax[c].front(), {}, result.drift.back()});
  }
  detail::write_text(out / "study_refinement.csv", os.str());
  detail::write_text(out / "study_refinement_summary.csv", summary_csv(summary));
  return result;
}

struct PointwiseOutcome {
  struct Group {
    std::string lemma;
    std::string params;  // compact key: "k=2,l=1" or a case key
    std::vector<double> max_ratio;  // per resolution
    std::vector<std::string> argmax;
    std::size_t evaluations = 0;
    bool violation = false;
    double drift = 0.0;
  };
  std::vector<int> resolutions;
  std::vector<Group> groups;
  std::size_t points_per_function = 0;
  struct Beta {
    InequalityCase c;
    std::optional<InterpolationExponents> exponents;
    std::string error;
  };
  std::vector<Beta> betas;
};

namespace detail {

struct PointwiseJob {
  std::vector<std::string> lines;  // JSON-lines
  std::map<std::string, std::pair<double, bool>> max_by_group;  // key → (max ratio, any violation)
  std::map<std::string, std::size_t> counts;
};

inline std::string group_key(const std::string& lemma, const std::string& params) { return lemma + "|" + params; }

}  // namespace detail

/// Sweeps both pointwise lemmas over seeded points and the radius grid up to
/// study.pointwise_rho, plus the local interpolation bound of every
/// theorem1/theorem2 case, at n and refine_factor·n.
inline PointwiseOutcome run_pointwise(const RunConfig& cfg, const fs::path& out) {
  const auto corpus = selected(load_corpus(cfg), cfg.study.functions);
  const auto cases = expand(cfg.matrix, cfg.N).cases;
  PointwiseOutcome result;
  result.resolutions = {cfg.n, cfg.n * cfg.study.refine_factor};
  result.points_per_function = static_cast<std::size_t>(cfg.study.points);
  std::vector<InequalityCase> interp;
  for (const auto& c : cases) {
    if (c.name != CaseName::theorem1 && c.name != CaseName::theorem2 && c.name != CaseName::morrey_hom &&
        c.name != CaseName::frac_hom)
      continue;
    PointwiseOutcome::Beta b{c, std::nullopt, ""};
    try {
      b.exponents = interpolation_exponents(c);
      interp.push_back(c);
    } catch (const ValidationError& e) {
      b.error = e.constraint();
    }
    result.betas.push_back(b);
  }
  std::map<std::string, std::size_t> group_index;
  auto group = [&](const std::string& lemma, const std::string& params) -> PointwiseOutcome::Group& {
    const auto key = detail::group_key(lemma, params);
    auto it = group_index.find(key);
    if (it == group_index.end()) {
      it = group_index.emplace(key, result.groups.size()).first;
      result.groups.push_back({lemma, params, std::vector<double>(result.resolutions.size(), 0.0),
                               std::vector<std::string>(result.resolutions.size()), 0, false, 0.0});
    }
    return result.groups[it->second];
  };
  auto jl = detail::open_out(out / "study_pointwise.jsonl");
  for (std::size_t ri = 0; ri < result.resolutions.size(); ++ri) {
    const int n = result.resolutions[ri];
    const Domain d = Domain::make(cfg.N, n, cfg.L, cfg.margin);
    const AnalysisSettings settings = rescaled_settings(cfg.analysis(), cfg.n, n);
    detail::ordered_jobs<detail::PointwiseJob>(
        corpus.size(), cfg.parallelism,
        [&](std::size_t i) {
          detail::PointwiseJob job;
          FunctionAnalysis a(sample(d, corpus[i].family), settings);
          const auto pts = sample_points(a.function(), result.points_per_function, derive_seed(cfg.seed, 1000 + i));
          const RadiusGrid g = RadiusGrid::make(d, cfg.study.pointwise_rho, cfg.radius_count);
          auto emit = [&](const PointwiseReport& r, const std::string& params) {
            nlohmann::json j = to_json(r, d);
            j["function"] = corpus[i].id;
            j["n"] = n;
            job.lines.push_back(j.dump());
            const auto key = detail::group_key(r.lemma, params);
            auto& m = job.max_by_group[key];
            m.first = std::max(m.first, r.ratio);
            m.second = m.second || r.violation || !std::isfinite(r.ratio);
            ++job.counts[key];
          };
          for (const Index& x : pts) {
            for (auto [k, l] : cfg.matrix.orders) {
              const std::string params = "k=" + std::to_string(k) + ",l=" + std::to_string(l);
              for (double R : g.radii) {
                emit(lemma_ratio(a, k, l, x, R), params);
                emit(fractional_lemma_ratio(a, k, l, x, R), params);
              }
            }
            for (const auto& c : interp) emit(interpolation_local_ratio(a, c, x), case_key(c));
          }
          return job;
        },
        [&](std::size_t i, detail::PointwiseJob job) {
          for (const auto& line : job.lines) jl << line << '\n';
          jl.flush();
          for (const auto& [key, m] : job.max_by_group) {
            const auto bar = key.find('|');
            auto& gr = group(key.substr(0, bar), key.substr(bar + 1));
            if (gr.argmax[ri].empty() || m.first > gr.max_ratio[ri]) {
              gr.max_ratio[ri] = m.first;
              gr.argmax[ri] = corpus[i].id;
            }
            gr.violation = gr.violation || m.second;
            gr.evaluations += job.counts[key];
          }
        });
  }
  std::ostringstream os;
  os << "lemma,params,n,max_ratio,argmax_function,drift,violation\n";
  for (auto& gr : result.groups) {
    gr.drift = relative_drift(gr.max_ratio.front(), gr.max_ratio.back());
    for (std::size_t r = 0; r < result.resolutions.size(); ++r)
      os << gr.lemma << ",\"" << gr.params << "\"," << result.resolutions[r] << ',' << csv_number(gr.max_ratio[r])
         << ',' << gr.argmax[r] << ',' << csv_number(gr.drift) << ',' << (gr.violation ? 1 : 0) << '\n';
  }
  detail::write_text(out / "study_pointwise.csv", os.str());
  std::ostringstream bs;
  bs << detail::kCaseCsvHeader << ",beta,a,b,error\n";
  for (const auto& b : result.betas) {
    bs << detail::case_csv_fields(b.c) << ',';
    if (b.exponents)
      bs << csv_number(b.exponents->beta) << ',' << csv_number(b.exponents->a) << ',' << csv_number(b.exponents->b)
         << ",\n";
    else
      bs << ",,," << b.error << '\n';
  }
  detail::write_text(out / "study_pointwise_beta.csv", bs.str());
  return result;
}

}  // namespace mclab
