#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mclab/driver.hpp"

using namespace mclab;
namespace fs = std::filesystem;

namespace {

std::string rejection(auto fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.constraint();
  }
  return "none";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mclab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

nlohmann::json small_config() {
  return nlohmann::json::parse(R"({
    "grid": {"N": 1, "n": 128, "L": 4.0, "m": 0.5},
    "corpus": [
      {"id": "bump", "family": "gaussian_bump", "center": [0.0], "width": 0.5},
      {"id": "noisy", "family": "random_fourier", "center": [0.2], "radius": 1.5, "modes": 3, "max_mode": 3}
    ],
    "matrix": {"cases": ["theorem1", "morrey_hom"], "orders": [[1, 0]], "p": [2.0], "q": [4.0],
               "lambda": ["-l", 0.25, 9.0, "endpoint"], "rho": [1.0, "inf"]},
    "seed": 3
  })");
}

}  // namespace

TEST(Config, Defaults) {
  const RunConfig c = config_from_json(nlohmann::json::object());
  EXPECT_EQ(c.N, 1);
  EXPECT_EQ(c.n, 256);
  EXPECT_TRUE(c.use_default_corpus);
  EXPECT_NO_THROW(validate_config(c));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(rejection([] { config_from_json({{"grd", {{"N", 1}}}}); }), "config");
  EXPECT_EQ(rejection([] { config_from_json({{"grid", {{"N", 1}, {"h", 0.1}}}}); }), "config");
  EXPECT_EQ(rejection([] { config_from_json({{"seed", -4}}); }), "config");
  EXPECT_EQ(rejection([] { validate_config(config_from_json({{"grid", {{"m", 0.01}}}})); }), "support_margin");
  EXPECT_EQ(rejection([] { validate_config(config_from_json({{"center_stride", 0}})); }), "center_stride");
  EXPECT_EQ(rejection([] { validate_config(config_from_json({{"grid", {{"n", 64}}}})); }), "feature_resolution");
}

TEST(Config, CorpusRoundTripAndCorruption) {
  const fs::path dir = scratch("corpus");
  RunConfig cfg = config_from_json(small_config());
  const auto corpus = generate_corpus(cfg.corpus_entries(), cfg.domain(), cfg.seed);
  write_corpus(corpus, cfg.domain(), cfg.seed, dir);
  const auto back = read_corpus(dir);
  ASSERT_EQ(back.size(), corpus.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].id, corpus[i].id);
    EXPECT_EQ(back[i].u.values, corpus[i].u.values);
    EXPECT_EQ(back[i].sha256, corpus[i].sha256);
  }
  std::string text = slurp(dir / "bump.grid");
  text[text.size() / 2] = text[text.size() / 2] == '1' ? '2' : '1';
  std::ofstream(dir / "bump.grid", std::ios::binary) << text;
  EXPECT_EQ(rejection([&] { read_corpus(dir); }), "grid_dump");

  cfg.corpus_dir = dir.string();
  cfg.n = 256;
  write_corpus(corpus, Domain::make(1, 128, 4.0, 0.5), cfg.seed, dir);
  EXPECT_EQ(rejection([&] { load_corpus(cfg); }), "corpus_grid");
}

TEST(Driver, CheckWritesDeterministicOutputs) {
  const RunConfig cfg = config_from_json(small_config());
  const fs::path a = scratch("check_a"), b = scratch("check_b");
  const CheckOutcome ra = run_check(cfg, a);
  run_check(cfg, b);
  for (const char* f : {"reports.jsonl", "summary.csv", "skipped.json", "invariants.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_TRUE(ra.ok());
  EXPECT_EQ(ra.reports.size(), 2 * ra.summary.size());
  const auto skipped = nlohmann::json::parse(slurp(a / "skipped.json"));
  bool upper = false;
  for (const auto& s : skipped["skipped"]) upper |= s["constraint"] == "lambda_upper_bound";
  EXPECT_TRUE(upper);
  std::istringstream lines(slurp(a / "reports.jsonl"));
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("ratio"));
    ++count;
  }
  EXPECT_EQ(count, ra.reports.size());
}

TEST(Driver, ParallelCheckMatchesSerial) {
  RunConfig cfg = config_from_json(small_config());
  const fs::path a = scratch("par_a"), b = scratch("par_b");
  run_check(cfg, a);
  cfg.parallelism = 3;
  set_parallelism(3);
  run_check(cfg, b);
  set_parallelism(1);
  EXPECT_EQ(slurp(a / "reports.jsonl"), slurp(b / "reports.jsonl"));
}

TEST(Driver, NormsAndUnknownFunction) {
  const RunConfig cfg = config_from_json(small_config());
  const fs::path out = scratch("norms");
  const auto rows = run_norms(cfg, "bump", out);
  EXPECT_FALSE(rows.empty());
  EXPECT_TRUE(fs::exists(out / "norms_bump.csv"));
  EXPECT_TRUE(fs::exists(out / "norms_bump.jsonl"));
  EXPECT_EQ(rejection([&] { run_norms(cfg, "missing", out); }), "function_id");
}

TEST(Driver, PointwiseStudyEmitsRequestedPoints) {
  nlohmann::json j = small_config();
  j["study"] = {{"points", 12}, {"functions", {"bump"}}};
  const RunConfig cfg = config_from_json(j);
  const fs::path out = scratch("pointwise");
  const PointwiseOutcome r = run_pointwise(cfg, out);
  EXPECT_EQ(r.points_per_function, 12u);
  for (const auto& g : r.groups) EXPECT_FALSE(g.violation) << g.lemma;
  EXPECT_TRUE(fs::exists(out / "study_pointwise.csv"));
}
