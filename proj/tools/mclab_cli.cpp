// mclab: corpus generation, seminorm tables, the ratio suite and studies.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mclab/mclab.hpp"

namespace {

enum Exit { kOk = 0, kInvariant = 1, kUsage = 2 };

struct Common {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::optional<int> resolution;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "run configuration (JSON)")->required();
  cmd->add_option("--out", c.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", c.seed, "corpus seed (overrides seed)");
  cmd->add_option("--parallelism", c.parallelism, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--resolution", c.resolution, "grid points per axis (overrides grid.n)");
}

mclab::RunConfig resolve(const Common& c) {
  mclab::RunConfig cfg = mclab::load_config(c.config);
  if (c.out) cfg.output_dir = *c.out;
  if (c.seed) cfg.seed = *c.seed;
  if (c.parallelism) cfg.parallelism = *c.parallelism;
  if (c.resolution) cfg.n = *c.resolution;
  mclab::validate_config(cfg);
  mclab::set_parallelism(cfg.parallelism);
  return cfg;
}

std::string fmt(double v) { return mclab::csv_number(v); }

int cmd_check(const mclab::RunConfig& cfg) {
  const auto r = mclab::run_check(cfg, cfg.output_dir);
  std::cout << r.summary.size() << " cases, " << r.skipped.size() << " skipped, " << r.reports.size()
            << " reports\n";
  for (const auto& c : r.checks)
    std::cout << (c.ok ? "ok   " : "FAIL ") << c.name << "  evaluated=" << c.evaluated << " worst=" << fmt(c.worst)
              << (c.ok ? "" : "  at " + c.detail) << '\n';
  return r.ok() ? kOk : kInvariant;
}

int cmd_study(const mclab::RunConfig& cfg, mclab::StudyKind kind) {
  using mclab::StudyKind;
  switch (kind) {
    case StudyKind::scaling: {
      const auto r = mclab::run_scaling(cfg, cfg.output_dir);
      std::cout << r.entries.size() << " scaling tables, worst asserted flatness " << fmt(r.worst_asserted_flatness)
                << '\n';
      break;
    }
    case StudyKind::refinement: {
      const auto r = mclab::run_refinement(cfg, cfg.output_dir);
      double worst = 0.0;
      for (double d : r.drift) worst = std::max(worst, d);
      std::cout << r.cases.size() << " cases at n=" << r.resolutions.front() << "," << r.resolutions.back()
                << ", worst drift " << fmt(worst) << '\n';
      break;
    }
    case StudyKind::pointwise: {
      const auto r = mclab::run_pointwise(cfg, cfg.output_dir);
      for (const auto& g : r.groups)
        if (g.lemma == "riesz" || g.lemma == "difference")
          std::cout << g.lemma << " " << g.params << " max=" << fmt(g.max_ratio.front()) << ","
                    << fmt(g.max_ratio.back()) << " drift=" << fmt(g.drift) << '\n';
      std::cout << r.groups.size() << " groups, " << r.betas.size() << " exponent checks\n";
      break;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morrey/Campanato interpolation inequality lab"};
  app.require_subcommand(1);
  Common common;
  std::string function_id, study;

  auto* corpus = app.add_subcommand("corpus", "write grid dumps and a manifest");
  add_common(corpus, common);
  auto* norms = app.add_subcommand("norms", "seminorm table of one corpus function");
  add_common(norms, common);
  norms->add_option("--function", function_id, "corpus function id")->required();
  auto* check = app.add_subcommand("check", "ratio suite and invariant checks");
  add_common(check, common);
  auto* st = app.add_subcommand("study", "scaling, refinement or pointwise study");
  add_common(st, common);
  st->add_option("--study", study, "scaling | refinement | pointwise")
      ->required()
      ->check(CLI::IsMember({"scaling", "refinement", "pointwise"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const mclab::RunConfig cfg = resolve(common);
    if (corpus->parsed()) {
      const auto m = mclab::run_corpus(cfg, cfg.output_dir);
      std::cout << "wrote " << m["functions"].size() << " functions to "
                << (std::filesystem::path(cfg.output_dir) / "corpus").string() << '\n';
      return kOk;
    }
    if (norms->parsed()) {
      const auto rows = mclab::run_norms(cfg, function_id, cfg.output_dir);
      std::cout << mclab::norms_csv(rows);
      return kOk;
    }
    if (check->parsed()) return cmd_check(cfg);
    return cmd_study(cfg, mclab::study_kind_from_string(study));
  } catch (const mclab::ValidationError& e) {
    std::cerr << "error [" << e.constraint() << "]: " << e.what() << '\n';
    return kUsage;
  } catch (const mclab::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [io]: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
