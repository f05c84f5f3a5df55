#include "tado/cli/cli.hpp"

#include <bit>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "tado/data/corpus.hpp"
#include "tado/data/dataset.hpp"
#include "tado/data/embedding_file.hpp"
#include "tado/data/pseudo_embed.hpp"
#include "tado/data/synthetic.hpp"
#include "tado/data/vocabulary.hpp"
#include "tado/diffcore/param_tree.hpp"
#include "tado/errors.hpp"
#include "tado/eval/eval.hpp"
#include "tado/training/checkpoint.hpp"
#include "tado/training/config_json.hpp"
#include "tado/training/model_check.hpp"

namespace tado::cli {

using nlohmann::json;
using training::config_value;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage"; }
};

constexpr double kGradTolerance = 1e-4;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

json parse_json_file(const std::string& path) {
  const std::string text = read_text(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("invalid JSON in " + path, 0);
  return j;
}

std::string vocabulary_path(const RunConfig& c) {
  return c.vocabulary.empty() ? default_vocabulary_path(c.embeddings) : c.vocabulary;
}

void require_path(const std::string& value, const char* what) {
  if (value.empty()) throw UsageError(std::string("missing ") + what + " path");
}

void write_embeddings_checked(const std::string& path, std::uint32_t dim,
                              const std::vector<data::EmbeddedReview>& records) {
  data::write_embedding_file(path, dim, records);
  const data::EmbeddingFile back = data::read_embedding_file(path);
  if (back.dim != dim || back.records.size() != records.size()) {
    throw FormatError("re-read of " + path + " does not match what was written", 0);
  }
}

void write_vocabulary_checked(const std::string& path, const data::Vocabulary& vocab) {
  data::write_vocabulary(path, vocab);
  const data::Vocabulary back = data::read_vocabulary(path);
  if (data::to_json(back) != data::to_json(vocab)) {
    throw FormatError("re-read of " + path + " does not match what was written", 0);
  }
}

std::vector<std::uint64_t> parameter_bits(const training::Model& m) {
  std::vector<std::uint64_t> out;
  for (const Tensor& t : leaf_values(m.params)) {
    for (double v : t.data()) out.push_back(std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

void write_checkpoint_checked(const std::string& path, const training::Model& model) {
  training::write_checkpoint_file(path, model);
  const training::Model back = training::read_checkpoint_file(path);
  if (!(back.config == model.config) || parameter_bits(back) != parameter_bits(model)) {
    throw FormatError("re-read of " + path + " does not match what was written", 0);
  }
}

std::string report_text(const eval::EvalReport& report) { return eval::to_json(report).dump(2) + "\n"; }

void write_report_checked(const std::string& path, const eval::EvalReport& report) {
  const std::string text = report_text(report);
  write_text(path, text);
  const json back = parse_json_file(path);
  if (report_text(eval::report_from_json(back)) != text) {
    throw FormatError("re-read of " + path + " does not match what was written", 0);
  }
}

json review_json(const data::ReviewRecord& r) {
  return {{"asin", r.item_id},
          {"overall", r.rating},
          {"reviewText", r.text},
          {"reviewerID", r.user_id},
          {"unixReviewTime", r.timestamp}};
}

void write_reviews_checked(const std::string& path, const std::vector<data::ReviewRecord>& records) {
  std::string text;
  for (const data::ReviewRecord& r : records) text += review_json(r).dump() + "\n";
  write_text(path, text);
  std::istringstream in(read_text(path));
  const data::ParsedReviews back = data::parse_reviews(in);
  if (back.skipped != 0 || back.records != records) {
    throw FormatError("re-read of " + path + " does not match what was written", 0);
  }
}

data::InteractionDataset load_dataset(RunConfig& c) {
  require_path(c.embeddings, "embeddings");
  data::EmbeddingFile file = data::read_embedding_file(c.embeddings);
  if (!c.dim_set) {
    c.train.model.dim = file.dim;
  } else if (c.train.model.dim != file.dim) {
    throw ContractError("config dim " + std::to_string(c.train.model.dim) + " does not match embedding dim " +
                        std::to_string(file.dim));
  }
  return data::make_dataset(std::move(file.records), file.dim, c.split_ratio,
                            static_cast<int>(c.train.model.classes));
}

json summary(const eval::EvalReport& r) {
  json levels = json::object();
  for (const auto& [level, s] : r.per_level) levels[std::to_string(level)] = s.mse;
  return {{"mse", r.mse}, {"n", r.n}, {"per_level_mse", levels}, {"seed", r.seed}, {"variant", r.variant}};
}

std::vector<double> parse_distribution(const std::string& text) {
  std::vector<double> out;
  std::stringstream s(text);
  std::string part;
  while (std::getline(s, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError("--dist expects comma-separated numbers, got '" + text + "'");
    }
  }
  return out;
}

/// Flags shared by train, eval and ablate. Unset flags leave the config
/// file's values in place.
struct Overrides {
  std::string config_path;
  std::optional<std::string> embeddings, vocabulary, checkpoint, report, variant, selection, decode;
  std::optional<std::size_t> epochs, batch_size, hidden, user_len, item_len;
  std::optional<std::uint64_t> seed;
  std::optional<double> dropout, split_ratio;
  std::optional<bool> exclude_target, shared_projection;

  void attach(CLI::App* app, bool training) {
    app->add_option("--config", config_path, "RunConfig JSON file");
    app->add_option("--embeddings", embeddings, "TADOEMB1 embedding file");
    app->add_option("--vocabulary", vocabulary, "vocabulary sidecar");
    app->add_option("--checkpoint", checkpoint, training ? "checkpoint to write" : "checkpoint to read");
    app->add_option("--report", report, "report JSON to write");
    app->add_option("--split-ratio", split_ratio, "train share of the time split");
    app->add_option("--exclude-target", exclude_target, "drop the target pair's reviews from histories");
    app->add_option("--decode", decode, "no-weight-learning decode: expectation or argmax");
    if (!training) return;
    app->add_option("--seed", seed);
    app->add_option("--epochs", epochs);
    app->add_option("--batch-size", batch_size);
    app->add_option("--hidden", hidden);
    app->add_option("--user-len", user_len);
    app->add_option("--item-len", item_len);
    app->add_option("--dropout", dropout);
    app->add_option("--selection", selection, "snapshot rule: validation or train");
    app->add_option("--shared-projection", shared_projection);
  }

  void attach_variant(CLI::App* app, bool required) {
    auto* opt = app->add_option("--variant", variant, "variant tag");
    if (required) opt->required();
  }

  RunConfig resolve() const {
    try {
      return resolve_unchecked();
    } catch (const ContractError& e) {
      throw UsageError(e.what());
    }
  }

  RunConfig resolve_unchecked() const {
    RunConfig c;
    if (!config_path.empty()) c = apply_json(c, parse_json_file(config_path));
    if (embeddings) c.embeddings = *embeddings;
    if (vocabulary) c.vocabulary = *vocabulary;
    if (checkpoint) c.checkpoint = *checkpoint;
    if (report) c.report = *report;
    if (split_ratio) c.split_ratio = *split_ratio;
    if (exclude_target) c.train.exclude_target = *exclude_target;
    if (decode) c.train.model.decode = training::parse_decode(*decode);
    if (variant) c.train.model.variant = training::parse_variant(*variant);
    if (selection) c.train.selection = training::parse_selection(*selection);
    if (seed) c.train.seed = *seed;
    if (epochs) c.train.epochs = *epochs;
    if (batch_size) c.train.batch_size = *batch_size;
    if (hidden) c.train.model.hidden = *hidden;
    if (user_len) c.train.model.user_len = *user_len;
    if (item_len) c.train.model.item_len = *item_len;
    if (dropout) c.train.dropout = *dropout;
    if (shared_projection) c.train.model.shared_projection = *shared_projection;
    return c;
  }
};

json run_ingest(const std::string& reviews, const std::string& embeddings, const std::string& vocabulary,
                std::uint32_t dim, std::uint64_t seed) {
  std::istringstream in(read_text(reviews));
  data::ParsedReviews parsed = data::parse_reviews(in);
  const std::size_t parsed_count = parsed.records.size();
  const std::vector<data::ReviewRecord> kept = data::five_core_filter(std::move(parsed.records));
  data::Vocabulary vocab;
  vocab.dim = dim;
  std::vector<data::EmbeddedReview> records;
  records.reserve(kept.size());
  for (const data::ReviewRecord& r : kept) {
    data::EmbeddedReview e;
    e.user_index = vocab.users.intern(r.user_id);
    e.item_index = vocab.items.intern(r.item_id);
    e.rating = static_cast<float>(r.rating);
    e.timestamp = r.timestamp;
    for (double v : data::pseudo_embed(r.text, dim, seed)) e.vector.push_back(static_cast<float>(v));
    records.push_back(std::move(e));
  }
  write_embeddings_checked(embeddings, dim, records);
  write_vocabulary_checked(vocabulary, vocab);
  return {{"dim", dim},          {"embeddings", embeddings},
          {"filtered_out", parsed_count - kept.size()},
          {"items", vocab.items.size()},
          {"records", records.size()},
          {"skipped_lines", parsed.skipped},
          {"users", vocab.users.size()},
          {"vocabulary", vocabulary}};
}

json run_validate(const std::string& embeddings, const std::string& vocabulary_arg) {
  const data::EmbeddingFile file = data::read_embedding_file(embeddings);
  json result = {{"dim", file.dim}, {"embeddings", embeddings}, {"errors", 0}, {"records", file.records.size()}};
  const std::string vocabulary = vocabulary_arg.empty() ? default_vocabulary_path(embeddings) : vocabulary_arg;
  if (!vocabulary_arg.empty() || std::filesystem::exists(vocabulary)) {
    const data::Vocabulary vocab = data::read_vocabulary(vocabulary);
    if (vocab.dim != file.dim) {
      throw FormatError("vocabulary dim " + std::to_string(vocab.dim) + " differs from embedding dim " +
                            std::to_string(file.dim),
                        0);
    }
    for (std::size_t i = 0; i < file.records.size(); ++i) {
      const data::EmbeddedReview& r = file.records[i];
      if (r.user_index >= vocab.users.size() || r.item_index >= vocab.items.size()) {
        throw FormatError("record index outside the vocabulary", data::kEmbeddingHeaderBytes,
                          static_cast<std::int64_t>(i));
      }
    }
    result["vocabulary"] = vocabulary;
    result["users"] = vocab.users.size();
    result["items"] = vocab.items.size();
  }
  result["valid"] = true;
  return result;
}

json run_synth(std::size_t n, const std::string& dist, std::uint64_t seed, std::uint32_t dim,
               const std::string& embeddings, const std::string& vocabulary, const std::string& reviews) {
  data::SyntheticConfig cfg;
  cfg.interactions = n;
  cfg.seed = seed;
  cfg.dim = dim;
  if (!dist.empty()) cfg.distribution = parse_distribution(dist);
  const data::SyntheticCorpus corpus = data::make_synthetic_corpus(cfg);
  write_embeddings_checked(embeddings, dim, corpus.embedded);
  data::Vocabulary vocab = corpus.vocab;
  vocab.dim = dim;
  write_vocabulary_checked(vocabulary, vocab);
  if (!reviews.empty()) write_reviews_checked(reviews, corpus.records);

  std::vector<std::size_t> counts(cfg.distribution.size(), 0);
  for (const data::ReviewRecord& r : corpus.records) ++counts.at(static_cast<std::size_t>(r.rating) - 1);
  json histogram = json::object();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    histogram[std::to_string(c + 1)] = {
        {"count", counts[c]},
        {"share", static_cast<double>(counts[c]) / static_cast<double>(corpus.records.size())},
        {"target", cfg.distribution[c]}};
  }
  json result = {{"dim", dim},
                 {"embeddings", embeddings},
                 {"histogram", histogram},
                 {"records", corpus.records.size()},
                 {"seed", seed},
                 {"vocabulary", vocabulary}};
  if (!reviews.empty()) result["reviews"] = reviews;
  return result;
}

json run_train(RunConfig c) {
  const data::InteractionDataset ds = load_dataset(c);
  auto [report, trained] = eval::train_and_evaluate(c.train, ds);
  report.config = to_json(c);
  if (!c.checkpoint.empty()) write_checkpoint_checked(c.checkpoint, trained.model);
  if (!c.report.empty()) write_report_checked(c.report, report);
  json s = summary(report);
  s["selected_epoch"] = report.selected_epoch;
  if (!c.checkpoint.empty()) s["checkpoint"] = c.checkpoint;
  if (!c.report.empty()) s["report"] = c.report;
  return s;
}

json run_eval(RunConfig c) {
  require_path(c.checkpoint, "checkpoint");
  training::Model model = training::read_checkpoint_file(c.checkpoint);
  c.train.model = model.config;
  c.dim_set = true;
  const data::InteractionDataset ds = load_dataset(c);
  eval::EvalReport report = eval::evaluate(model, ds, ds.test, c.train.exclude_target);
  report.seed = c.train.seed;
  report.config = to_json(c);
  if (!c.report.empty()) write_report_checked(c.report, report);
  json s = summary(report);
  if (!c.report.empty()) s["report"] = c.report;
  return s;
}

json run_gradcheck(std::uint64_t seed) {
  const training::ModelGradCheck check = training::check_model_gradients(training::tiny_model_config(), seed);
  const double worst = check.max_relative_error();
  json result = {{"classification_max_relative_error", check.classification.max_relative_error},
                 {"max_relative_error", worst},
                 {"parameters", check.parameters},
                 {"pass", worst < kGradTolerance},
                 {"regression_max_relative_error", check.regression.max_relative_error},
                 {"seed", seed},
                 {"tolerance", kGradTolerance}};
  return result;
}

json run_wilcoxon(const std::string& a_path, const std::string& b_path) {
  const eval::EvalReport a = eval::report_from_json(parse_json_file(a_path));
  const eval::EvalReport b = eval::report_from_json(parse_json_file(b_path));
  if (a.n != b.n) {
    throw ContractError("reports cover different numbers of interactions (" + std::to_string(a.n) + " vs " +
                        std::to_string(b.n) + ")");
  }
  const eval::WilcoxonResult w = eval::wilcoxon_signed_rank(a.squared_errors, b.squared_errors);
  return {{"exact", w.exact},
          {"mse_a", a.mse},
          {"mse_b", b.mse},
          {"nonzero", w.nonzero},
          {"p_value", w.p_value},
          {"statistic", w.statistic}};
}

void emit_error(std::ostream& err, const char* kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

std::string default_vocabulary_path(const std::string& embeddings) {
  return std::filesystem::path(embeddings).replace_extension(".vocab.json").string();
}

json to_json(const RunConfig& c) {
  json j = training::to_json(c.train);
  j["split_ratio"] = c.split_ratio;
  j["reviews"] = c.reviews;
  j["embeddings"] = c.embeddings;
  j["vocabulary"] = c.vocabulary;
  j["checkpoint"] = c.checkpoint;
  j["report"] = c.report;
  j["pseudo_embed"] = c.pseudo_embed;
  j["pseudo_dim"] = c.pseudo_dim;
  j["pseudo_seed"] = c.pseudo_seed;
  return j;
}

RunConfig apply_json(RunConfig c, const json& j) {
  if (!j.is_object()) throw ContractError("config must be a JSON object");
  json rest = json::object();
  for (const auto& [key, v] : j.items()) {
    if (key == "split_ratio") c.split_ratio = config_value<double>(v, key);
    else if (key == "reviews") c.reviews = config_value<std::string>(v, key);
    else if (key == "embeddings") c.embeddings = config_value<std::string>(v, key);
    else if (key == "vocabulary") c.vocabulary = config_value<std::string>(v, key);
    else if (key == "checkpoint") c.checkpoint = config_value<std::string>(v, key);
    else if (key == "report") c.report = config_value<std::string>(v, key);
    else if (key == "pseudo_embed") c.pseudo_embed = config_value<bool>(v, key);
    else if (key == "pseudo_dim") c.pseudo_dim = config_value<std::uint32_t>(v, key);
    else if (key == "pseudo_seed") c.pseudo_seed = config_value<std::uint64_t>(v, key);
    else rest[key] = v;
  }
  if (rest.contains("dim")) c.dim_set = true;
  c.train = training::apply_json(c.train, rest);
  return c;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Review-based rating prediction with a dual-optimizer classifier", "tado"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Embed a JSON-lines review dump, or validate an embedding file");
  std::string ingest_reviews, ingest_embeddings, ingest_vocabulary, validate_path, ingest_config;
  bool pseudo = false;
  std::optional<std::uint32_t> ingest_dim;
  std::optional<std::uint64_t> ingest_seed;
  ingest->add_option("--config", ingest_config, "RunConfig JSON file");
  ingest->add_option("--reviews", ingest_reviews, "input JSON-lines file");
  ingest->add_option("--embeddings,--out", ingest_embeddings, "embedding file to write");
  ingest->add_option("--vocabulary", ingest_vocabulary, "vocabulary sidecar path");
  ingest->add_flag("--pseudo", pseudo, "use the deterministic pseudo-embedder");
  ingest->add_option("--dim", ingest_dim, "pseudo-embedding dimension");
  ingest->add_option("--seed", ingest_seed, "pseudo-embedding seed");
  ingest->add_option("--validate", validate_path, "embedding file to validate");

  // synth
  auto* synth = app.add_subcommand("synth", "Write the synthetic imbalanced corpus");
  std::size_t synth_n = 5000;
  std::string synth_dist, synth_embeddings = "synthetic.emb", synth_vocabulary, synth_reviews;
  std::uint64_t synth_seed = 1;
  std::uint32_t synth_dim = 16;
  synth->add_option("--n", synth_n, "number of interactions");
  synth->add_option("--dist", synth_dist, "rating level shares, comma-separated");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--dim", synth_dim, "review vector dimension");
  synth->add_option("--embeddings,--out", synth_embeddings, "embedding file to write");
  synth->add_option("--vocabulary", synth_vocabulary, "vocabulary sidecar path");
  synth->add_option("--reviews", synth_reviews, "optional JSON-lines copy of the corpus");

  // train / eval / ablate
  auto* train = app.add_subcommand("train", "Train a model and evaluate it on the test split");
  Overrides train_flags;
  train_flags.attach(train, true);
  train_flags.attach_variant(train, false);

  auto* evaluate = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  Overrides eval_flags;
  eval_flags.attach(evaluate, false);

  auto* ablate = app.add_subcommand("ablate", "Train and evaluate one ablation variant");
  Overrides ablate_flags;
  ablate_flags.attach(ablate, true);
  ablate_flags.attach_variant(ablate, true);

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the full model's gradients");
  std::uint64_t grad_seed = 1;
  gradcheck->add_option("--seed", grad_seed);

  // wilcoxon
  auto* wilcoxon = app.add_subcommand("wilcoxon", "Paired signed-rank test on two reports' squared errors");
  std::string report_a, report_b;
  wilcoxon->add_option("--a", report_a, "first report")->required();
  wilcoxon->add_option("--b", report_b, "second report")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what());
    return 2;
  }

  try {
    json result;
    if (ingest->parsed()) {
      RunConfig c;
      if (!ingest_config.empty()) {
        try {
          c = apply_json(c, parse_json_file(ingest_config));
        } catch (const ContractError& e) {
          throw UsageError(e.what());
        }
      }
      if (!validate_path.empty()) {
        result = run_validate(validate_path, ingest_vocabulary.empty() ? c.vocabulary : ingest_vocabulary);
      } else {
        if (!ingest_reviews.empty()) c.reviews = ingest_reviews;
        if (!ingest_embeddings.empty()) c.embeddings = ingest_embeddings;
        if (!ingest_vocabulary.empty()) c.vocabulary = ingest_vocabulary;
        if (pseudo) c.pseudo_embed = true;
        if (ingest_dim) c.pseudo_dim = *ingest_dim;
        if (ingest_seed) c.pseudo_seed = *ingest_seed;
        if (!pseudo && ingest_config.empty()) {
          throw UsageError("ingest needs --pseudo; transformer embeddings come from the encoder bridge");
        }
        if (!c.pseudo_embed) throw UsageError("only the pseudo-embedder is built into this binary");
        if (c.pseudo_dim == 0) throw UsageError("--dim must be positive");
        require_path(c.reviews, "reviews");
        require_path(c.embeddings, "embeddings");
        result = run_ingest(c.reviews, c.embeddings, vocabulary_path(c), c.pseudo_dim, c.pseudo_seed);
      }
    } else if (synth->parsed()) {
      const std::string vocab = synth_vocabulary.empty() ? default_vocabulary_path(synth_embeddings) : synth_vocabulary;
      result = run_synth(synth_n, synth_dist, synth_seed, synth_dim, synth_embeddings, vocab, synth_reviews);
    } else if (train->parsed()) {
      result = run_train(train_flags.resolve());
    } else if (evaluate->parsed()) {
      result = run_eval(eval_flags.resolve());
    } else if (ablate->parsed()) {
      result = run_train(ablate_flags.resolve());
    } else if (gradcheck->parsed()) {
      result = run_gradcheck(grad_seed);
      out << result.dump() << "\n";
      if (!result.at("pass").get<bool>()) {
        emit_error(err, "check-failed", "max relative error exceeds tolerance");
        return 1;
      }
      return 0;
    } else if (wilcoxon->parsed()) {
      result = run_wilcoxon(report_a, report_b);
    }
    out << result.dump() << "\n";
    return 0;
  } catch (const UsageError& e) {
    emit_error(err, e.kind(), e.what());
    return 2;
  } catch (const Error& e) {
    emit_error(err, e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what());
    return 1;
  }
}

}  // namespace tado::cli
