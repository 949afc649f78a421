#pragma once

// Run configuration: a JSON document with strict keys.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mclab/cases.hpp"
#include "mclab/error.hpp"
#include "mclab/families.hpp"
#include "mclab/grid.hpp"
#include "mclab/harness.hpp"

namespace mclab {

struct StudyConfig {
  std::vector<double> scales{0.5, 1.0, 2.0};
  int refine_factor = 2;     // second resolution = factor·n
  int points = 50;           // pointwise sample count per function
  double pointwise_rho = 2.0;  // largest R of the lemma sweeps
  std::vector<std::string> functions;  // empty: every corpus function
};

struct RunConfig {
  int N = 1;
  int n = 256;
  double L = 4.0;
  double margin = 0.5;
  std::vector<CorpusEntry> corpus;  // empty with use_default_corpus = false means none
  bool use_default_corpus = true;
  std::optional<std::string> corpus_dir;
  TestMatrix matrix;
  int center_stride = 1;
  int radius_count = 8;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int parallelism = 1;
  StudyConfig study;

  Domain domain() const { return Domain::make(N, n, L, margin); }
  AnalysisSettings analysis() const { return {CenterGrid{center_stride, 0}, radius_count}; }
  std::vector<CorpusEntry> corpus_entries() const { return use_default_corpus ? default_corpus(N) : corpus; }
};

namespace detail {

inline void only_keys(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ValidationError("config", where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ValidationError("config", "unknown key '" + key + "' in " + where);
}

template <class T>
T get_as(const nlohmann::json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config", std::string("bad value for '") + key + "' in " + where);
  }
}

}  // namespace detail

inline CorpusEntry corpus_entry_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
    throw ValidationError("config", "corpus entries need a string 'id'");
  nlohmann::json fam = j;
  fam.erase("id");
  return {j["id"].get<std::string>(), family_from_json(fam)};
}

/// Parses and validates a configuration document. Module invariants are
/// re-checked: the domain is built and every corpus family is sampled.
inline RunConfig config_from_json(const nlohmann::json& j) {
  using detail::get_as;
  detail::only_keys(j,
                    {"grid", "corpus", "corpus_dir", "matrix", "center_stride", "radius_count", "seed", "output_dir",
                     "parallelism", "study"},
                    "config");
  RunConfig c;
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    detail::only_keys(g, {"N", "n", "L", "m"}, "grid");
    if (g.contains("N")) c.N = get_as<int>(g, "N", "grid");
    if (g.contains("n")) c.n = get_as<int>(g, "n", "grid");
    if (g.contains("L")) c.L = get_as<double>(g, "L", "grid");
    if (g.contains("m")) c.margin = get_as<double>(g, "m", "grid");
  }
  if (j.contains("corpus")) {
    const auto& v = j["corpus"];
    if (v.is_string() && v.get<std::string>() == "default") {
      c.use_default_corpus = true;
    } else if (v.is_array()) {
      c.use_default_corpus = false;
      for (const auto& e : v) c.corpus.push_back(corpus_entry_from_json(e));
    } else {
      throw ValidationError("config", "corpus must be \"default\" or an array of family objects");
    }
  }
  if (j.contains("corpus_dir")) c.corpus_dir = get_as<std::string>(j, "corpus_dir", "config");
  if (j.contains("matrix")) c.matrix = matrix_from_json(j["matrix"]);
  if (j.contains("center_stride")) c.center_stride = get_as<int>(j, "center_stride", "config");
  if (j.contains("radius_count")) c.radius_count = get_as<int>(j, "radius_count", "config");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ValidationError("config", "seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j, "output_dir", "config");
  if (j.contains("parallelism")) c.parallelism = get_as<int>(j, "parallelism", "config");
  if (j.contains("study")) {
    const auto& s = j["study"];
    detail::only_keys(s, {"scales", "refine_factor", "points", "pointwise_rho", "functions"}, "study");
    if (s.contains("scales")) c.study.scales = get_as<std::vector<double>>(s, "scales", "study");
    if (s.contains("refine_factor")) c.study.refine_factor = get_as<int>(s, "refine_factor", "study");
    if (s.contains("points")) c.study.points = get_as<int>(s, "points", "study");
    if (s.contains("pointwise_rho")) c.study.pointwise_rho = get_as<double>(s, "pointwise_rho", "study");
    if (s.contains("functions")) c.study.functions = get_as<std::vector<std::string>>(s, "functions", "study");
  }
  return c;
}

/// Checks everything that can be checked before running.
inline void validate_config(const RunConfig& c) {
  const Domain d = c.domain();
  if (c.center_stride < 1) throw ValidationError("center_stride", "center_stride must be >= 1");
  if (c.radius_count < 8) throw ValidationError("radius_count", "radius_count must be >= 8");
  if (c.parallelism < 1) throw ValidationError("parallelism", "parallelism must be >= 1");
  if (c.study.refine_factor < 2) throw ValidationError("study", "refine_factor must be >= 2");
  if (c.study.points < 1) throw ValidationError("study", "points must be >= 1");
  for (double s : c.study.scales)
    if (!(s > 0.0)) throw ValidationError("study", "scales must be positive");
  if (!c.corpus_dir) generate_corpus(c.corpus_entries(), d, c.seed);
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config_io", "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

/// Writes grid dumps and a manifest to `dir`.
inline nlohmann::json write_corpus(const std::vector<CorpusFunction>& corpus, const Domain& d, std::uint64_t seed,
                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& f : corpus) {
    std::ofstream os(dir / (f.id + ".grid"), std::ios::binary);
    if (!os) throw ValidationError("output_io", "cannot write " + (dir / (f.id + ".grid")).string());
    os << dump_string(f.u);
  }
  const nlohmann::json manifest = corpus_manifest(corpus, d, seed);
  std::ofstream os(dir / "manifest.json", std::ios::binary);
  if (!os) throw ValidationError("output_io", "cannot write manifest");
  os << manifest.dump(2) << '\n';
  return manifest;
}

/// Reads a corpus written by write_corpus, verifying each dump against its hash.
inline std::vector<CorpusFunction> read_corpus(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ValidationError("corpus_io", "no manifest.json in " + dir.string());
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("corpus_io", std::string("malformed manifest: ") + e.what());
  }
  std::vector<CorpusFunction> out;
  try {
    for (const auto& e : m.at("functions")) {
      const std::string id = e.at("id").get<std::string>();
      std::ifstream gs(dir / e.at("file").get<std::string>(), std::ios::binary);
      if (!gs) throw ValidationError("grid_dump", "missing dump for '" + id + "'");
      const std::string text((std::istreambuf_iterator<char>(gs)), std::istreambuf_iterator<char>());
      std::istringstream is(text);
      GridFunction u = read_dump(is);
      const std::string hash = sha256_hex(dump_string(u));
      if (hash != e.at("sha256").get<std::string>())
        throw ValidationError("grid_dump", "hash mismatch for '" + id + "'");
      out.push_back({id, family_from_json(e.at("family")), std::move(u), hash});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("corpus_io", std::string("malformed manifest: ") + e.what());
  }
  return out;
}

}  // namespace mclab
