#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "tado/cli/cli.hpp"
#include "tado/data/embedding_file.hpp"
#include "tado/errors.hpp"

using namespace tado;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

/// Fresh scratch directory removed at scope exit.
struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name) : path(fs::temp_directory_path() / ("tado_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  std::string operator/(const std::string& file) const { return (path / file).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool single_json_line(const std::string& text) {
  if (text.empty() || text.back() != '\n' || text.find('\n') != text.size() - 1) return false;
  return !json::parse(text, nullptr, false).is_discarded();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

}  // namespace

TEST_CASE("synth matches the requested histogram") {
  ScratchDir dir("synth");
  const Outcome o = run({"synth", "--n", "5000", "--dist", "0.05,0.05,0.10,0.35,0.45", "--seed", "1", "--out",
                         dir / "c.emb"});
  REQUIRE(o.code == 0);
  CHECK(single_json_line(o.out));
  const data::EmbeddingFile file = data::read_embedding_file(dir / "c.emb");
  const std::vector<double> target{0.05, 0.05, 0.10, 0.35, 0.45};
  std::vector<double> counts(5, 0.0);
  for (const data::EmbeddedReview& r : file.records) counts.at(static_cast<std::size_t>(r.rating) - 1) += 1.0;
  for (std::size_t c = 0; c < 5; ++c) {
    CHECK(std::abs(counts[c] / static_cast<double>(file.records.size()) - target[c]) <= 0.01);
  }
  CHECK(fs::exists(dir / "c.vocab.json"));
}

TEST_CASE("ingest with the pseudo-embedder and validate") {
  ScratchDir dir("ingest");
  REQUIRE(run({"synth", "--n", "300", "--dim", "8", "--out", dir / "s.emb", "--reviews", dir / "s.jsonl"}).code == 0);
  std::string jsonl = slurp(dir / "s.jsonl");
  write_file(dir / "raw.jsonl", "not json\n\n" + jsonl);

  const Outcome ingest =
      run({"ingest", "--reviews", dir / "raw.jsonl", "--out", dir / "p.emb", "--pseudo", "--dim", "12", "--seed", "4"});
  REQUIRE(ingest.code == 0);
  const json summary = json::parse(ingest.out);
  CHECK(summary.at("skipped_lines") == 1);
  CHECK(summary.at("records") == 300);
  CHECK(summary.at("dim") == 12);

  const Outcome valid = run({"ingest", "--validate", dir / "p.emb"});
  CHECK(valid.code == 0);
  CHECK(json::parse(valid.out).at("errors") == 0);

  const Outcome again =
      run({"ingest", "--reviews", dir / "raw.jsonl", "--out", dir / "q.emb", "--pseudo", "--dim", "12", "--seed", "4"});
  REQUIRE(again.code == 0);
  CHECK(slurp(dir / "p.emb") == slurp(dir / "q.emb"));

  std::string bytes = slurp(dir / "p.emb");
  write_file(dir / "cut.emb", bytes.substr(0, bytes.size() - 5));
  const Outcome truncated = run({"ingest", "--validate", dir / "cut.emb"});
  CHECK(truncated.code == 1);
  CHECK(single_json_line(truncated.err));
  CHECK(json::parse(truncated.err).at("error") == "format");

  const Outcome no_mode = run({"ingest", "--reviews", dir / "raw.jsonl", "--out", dir / "x.emb"});
  CHECK(no_mode.code == 2);
}

TEST_CASE("train, eval, ablate and wilcoxon") {
  ScratchDir dir("train");
  REQUIRE(run({"synth", "--n", "300", "--dim", "8", "--seed", "2", "--out", dir / "s.emb"}).code == 0);
  write_file(dir / "cfg.json",
             json{{"hidden", 8}, {"user_len", 4}, {"item_len", 4}, {"epochs", 2}, {"batch_size", 16},
                  {"embeddings", dir / "s.emb"}}
                 .dump());

  const Outcome first = run({"train", "--config", dir / "cfg.json", "--report", dir / "r.json", "--checkpoint",
                             dir / "m.bin"});
  REQUIRE(first.code == 0);
  const std::string report = slurp(dir / "r.json");
  const Outcome second = run({"train", "--config", dir / "cfg.json", "--report", dir / "r.json", "--checkpoint",
                              dir / "m.bin"});
  REQUIRE(second.code == 0);
  CHECK(slurp(dir / "r.json") == report);
  CHECK(first.out == second.out);

  const json r = json::parse(report);
  CHECK(r.at("config").at("epochs") == 2);
  CHECK(r.at("config").at("dim") == 8);
  CHECK(r.at("history").size() == 2);

  const Outcome evaluated = run({"eval", "--checkpoint", dir / "m.bin", "--embeddings", dir / "s.emb"});
  REQUIRE(evaluated.code == 0);
  CHECK(json::parse(evaluated.out).at("mse") == r.at("mse"));

  const Outcome override =
      run({"train", "--config", dir / "cfg.json", "--epochs", "1", "--variant", "no-lstm", "--report", dir / "o.json"});
  REQUIRE(override.code == 0);
  CHECK(json::parse(slurp(dir / "o.json")).at("history").size() == 1);
  CHECK(json::parse(override.out).at("variant") == "no-lstm");

  const Outcome ablate = run({"ablate", "--config", dir / "cfg.json", "--variant", "regression-only", "--report",
                              dir / "a.json"});
  REQUIRE(ablate.code == 0);
  CHECK(json::parse(ablate.out).at("variant") == "regression-only");

  const Outcome same = run({"wilcoxon", "--a", dir / "r.json", "--b", dir / "r.json"});
  REQUIRE(same.code == 0);
  CHECK(json::parse(same.out).at("p_value") == 1.0);
  const Outcome paired = run({"wilcoxon", "--a", dir / "r.json", "--b", dir / "a.json"});
  REQUIRE(paired.code == 0);
  const double p = json::parse(paired.out).at("p_value");
  CHECK(p > 0.0);
  CHECK(p <= 1.0);
}

TEST_CASE("gradcheck command") {
  const Outcome o = run({"gradcheck", "--seed", "7"});
  CHECK(o.code == 0);
  const json j = json::parse(o.out);
  CHECK(j.at("pass") == true);
  CHECK(j.at("max_relative_error").get<double>() < 1e-4);
}

TEST_CASE("errors are single JSON lines with the documented exit codes") {
  ScratchDir dir("errors");
  for (const std::vector<std::string>& args : std::vector<std::vector<std::string>>{
           {}, {"bogus"}, {"train", "--nope"}, {"ablate"}, {"wilcoxon", "--a", "x.json"}, {"ablate", "--variant", "bert"}}) {
    const Outcome o = run(args);
    CHECK(o.code == 2);
    CHECK(single_json_line(o.err));
  }
  write_file(dir / "bad.json", R"({"epoch": 3})");
  const Outcome bad_key = run({"train", "--config", dir / "bad.json", "--embeddings", dir / "none.emb"});
  CHECK(bad_key.code == 2);
  CHECK(json::parse(bad_key.err).at("message").get<std::string>().find("epoch") != std::string::npos);

  const Outcome missing = run({"train", "--embeddings", dir / "none.emb"});
  CHECK(missing.code == 1);
  CHECK(single_json_line(missing.err));

  write_file(dir / "broken.json", "{");
  const Outcome broken = run({"wilcoxon", "--a", dir / "broken.json", "--b", dir / "broken.json"});
  CHECK(broken.code == 1);
  CHECK(json::parse(broken.err).at("error") == "format");
}

TEST_CASE("run config JSON") {
  cli::RunConfig c;
  c.embeddings = "a.emb";
  c.split_ratio = 0.7;
  c.train.epochs = 4;
  const cli::RunConfig back = cli::apply_json(cli::RunConfig{}, cli::to_json(c));
  CHECK(cli::to_json(back) == cli::to_json(c));
  CHECK(back.dim_set);
  CHECK_FALSE(cli::apply_json(cli::RunConfig{}, {{"epochs", 2}}).dim_set);
  CHECK_THROWS_AS(cli::apply_json(c, {{"reports", "x"}}), ContractError);
  CHECK(cli::default_vocabulary_path("dir/x.emb") == "dir/x.vocab.json");
}
