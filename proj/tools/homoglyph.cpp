// homoglyph: dataset generation, training, indexing, screening and evaluation.
//
// Exit codes: 0 clean, 2 spoof detected (check), 1 error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "homoglyph/baselines.hpp"
#include "homoglyph/checksum.hpp"
#include "homoglyph/corpus.hpp"
#include "homoglyph/errors.hpp"
#include "homoglyph/eval.hpp"
#include "homoglyph/index.hpp"
#include "homoglyph/model_io.hpp"
#include "homoglyph/pipeline.hpp"
#include "homoglyph/render.hpp"
#include "homoglyph/train.hpp"
#include "homoglyph/utf8.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace homoglyph;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitError = 1;
constexpr int kExitDetected = 2;

constexpr double kThresholdMaxFpr = 0.01;

const char* kSplitFiles[] = {"train.tsv", "val.tsv", "test.tsv"};

struct Globals {
  std::string font;
  std::uint64_t seed = kDefaultSeed;
};

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }
void info(const std::string& msg) { std::cerr << msg << "\n"; }

std::shared_ptr<const GlyphAtlas> load_atlas(const Globals& g) {
  return g.font.empty() ? GlyphAtlas::bundled() : GlyphAtlas::from_file(g.font);
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw InvalidArgument("no such file: " + p.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string error_kind(const Error& e) {
#define KIND(T) \
  if (dynamic_cast<const T*>(&e)) return #T
  KIND(EmptyString);
  KIND(StringTooLong);
  KIND(FontError);
  KIND(NonFiniteUpdate);
  KIND(EmptyIndex);
  KIND(NoSubstitutionPossible);
  KIND(InsufficientNames);
  KIND(UnrenderableCodepoint);
  KIND(UnknownCharacter);
  KIND(DegenerateLabels);
  KIND(ConvergenceFailure);
  KIND(FormatError);
  KIND(InvalidArgument);
#undef KIND
  return "Error";
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string mode = "process";
  std::size_t count = 2000;
  std::string out;
};

int cmd_synth(const Globals& g, const SynthArgs& a) {
  const auto mode = parse_mode(a.mode);
  const auto names = mode == DatasetMode::process ? synthesize_process_names(a.count, g.seed)
                                                  : synthesize_domain_names(a.count, g.seed);
  if (a.out.empty()) {
    for (const auto& n : names) std::cout << n << "\n";
  } else {
    write_name_list(a.out, names);
  }
  return kExitClean;
}

struct GenArgs {
  std::string names;
  std::string mode = "process";
  std::string out;
  std::string table;
  int max_edits = 0;
  double spoof_ratio = 1.0;
  std::size_t benign_pairs = 0;
};

int cmd_gen(const Globals& g, const GenArgs& a) {
  require_file(a.names);
  if (!a.table.empty()) require_file(a.table);
  const auto mode = parse_mode(a.mode);
  const auto atlas = load_atlas(g);
  const fs::path table_path = a.table.empty() ? data_dir() / "confusables.tsv" : fs::path(a.table);
  const auto table = ConfusableTable::load(table_path);
  for (const auto& r : table.unrenderable(*atlas)) warn("confusable replacement not in font: " + utf8_encode(r));

  DatasetConfig cfg;
  cfg.seed = g.seed;
  cfg.max_edits = a.max_edits;
  cfg.spoof_ratio = a.spoof_ratio;
  cfg.domain_benign_pairs = a.benign_pairs;
  const auto names = read_name_list(a.names);
  const auto split = build_dataset(names, mode, cfg, table, *atlas);

  const fs::path out(a.out);
  fs::create_directories(out);
  const PairList* parts[] = {&split.train, &split.validation, &split.test};
  json files = json::object();
  for (int i = 0; i < 3; ++i) {
    write_pairs(out / kSplitFiles[i], *parts[i]);
    std::size_t spoofs = 0;
    for (const auto& p : *parts[i]) spoofs += p.label == kLabelSpoof;
    files[kSplitFiles[i]] = {{"sha256", sha256_file(out / kSplitFiles[i])},
                             {"pairs", parts[i]->size()},
                             {"spoof_pairs", spoofs},
                             {"benign_pairs", parts[i]->size() - spoofs}};
  }
  json manifest = {
      {"command", "gen"},
      {"version", HOMOGLYPH_VERSION},
      {"mode", std::string(to_string(mode))},
      {"seed", g.seed},
      {"names_sha256", sha256_file(a.names)},
      {"table_sha256", sha256_file(table_path)},
      {"font_sha256", atlas->font_id()},
      {"config",
       {{"train_ratio", cfg.train_ratio},
        {"val_ratio", cfg.val_ratio},
        {"test_ratio", cfg.test_ratio},
        {"max_distance", mode == DatasetMode::process ? json(cfg.max_distance) : json(nullptr)},
        {"max_edits", cfg.max_edits},
        {"spoof_ratio", cfg.spoof_ratio},
        {"domain_benign_pairs", cfg.domain_benign_pairs},
        {"unicode_benign_fraction", cfg.unicode_benign_fraction},
        {"min_stem_length", cfg.min_stem_length}}},
      {"files", files},
  };
  write_json(out / "manifest.json", manifest);
  info("wrote " + std::to_string(split.total()) + " pairs to " + out.string());
  return kExitClean;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  TrainConfig cfg;
};

int cmd_train(const Globals& g, TrainArgs a) {
  const fs::path data(a.data);
  for (const char* f : kSplitFiles) require_file(data / f);
  a.cfg.rng_seed = g.seed;
  a.cfg.validate();
  const auto atlas = load_atlas(g);
  const auto train_pairs = read_pairs(data / "train.tsv");
  const auto val_pairs = read_pairs(data / "val.tsv");

  const fs::path out(a.out);
  fs::create_directories(out);
  const auto result = train(train_pairs, val_pairs, *atlas, a.cfg, [](const EpochRecord& r) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "epoch %d  train %.6f  val %.6f  (%.1fs)", r.epoch, r.train_loss, r.val_loss,
                  r.seconds);
    info(buf);
  });

  Model model{result.weights, a.cfg.leaky_slope};
  save_model(out / "model.bin", model);

  // Losses only, so reruns are byte-identical; wall-clock goes to timing.csv.
  std::string history = "epoch,train_loss,val_loss\n";
  std::string timing = "epoch,seconds\n";
  for (const auto& r : result.history.epochs) {
    history += std::to_string(r.epoch) + "," + fmt(r.train_loss) + "," + fmt(r.val_loss) + "\n";
    timing += std::to_string(r.epoch) + "," + fmt(r.seconds) + "\n";
  }
  write_text(out / "history.csv", history);
  write_text(out / "timing.csv", timing);

  ScoringContext ctx{atlas.get(), nullptr, &model};
  const auto val_roc = roc_auc(score_pairs(val_pairs, Scorer::model, ctx), "model");
  const double threshold = threshold_at_fpr(val_roc, kThresholdMaxFpr);

  json manifest = {
      {"command", "train"},
      {"version", HOMOGLYPH_VERSION},
      {"seed", g.seed},
      {"font_sha256", atlas->font_id()},
      {"train_sha256", sha256_file(data / "train.tsv")},
      {"val_sha256", sha256_file(data / "val.tsv")},
      {"config",
       {{"margin", a.cfg.margin},
        {"batch_size", a.cfg.batch_size},
        {"learning_rate", a.cfg.learning_rate},
        {"rmsprop_decay", a.cfg.rmsprop_decay},
        {"epochs", a.cfg.epochs},
        {"early_stop_patience", a.cfg.early_stop_patience},
        {"leaky_slope", a.cfg.leaky_slope}}},
      {"epochs_run", result.history.epochs.size()},
      {"best_epoch", result.best_epoch},
      {"val_auc", val_roc.auc},
      {"threshold", threshold},
      {"threshold_max_fpr", kThresholdMaxFpr},
      {"model_sha256", sha256_file(out / "model.bin")},
      {"history_sha256", sha256_file(out / "history.csv")},
  };
  write_json(out / "manifest.json", manifest);
  info("best epoch " + std::to_string(result.best_epoch) + ", validation AUC " + fmt(val_roc.auc) +
       ", threshold " + fmt(threshold));
  return kExitClean;
}

// ---------------------------------------------------------------------------

struct IndexArgs {
  std::string names;
  std::string model;
  std::string out;
  int trees = kDefaultTrees;
};

int cmd_index(const Globals& g, const IndexArgs& a) {
  require_file(a.names);
  require_file(a.model);
  const auto atlas = load_atlas(g);
  const Model model = load_model(a.model);

  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& raw : read_name_list(a.names)) {
    const PreparedQuery q = prepare_query(raw, *atlas);
    if (q.text.empty()) continue;
    if (q.truncated) warn("truncated \"" + raw + "\" to \"" + q.text + "\"");
    if (q.used_fallback) warn("\"" + raw + "\" contains characters missing from the font");
    if (seen.insert(q.text).second) names.push_back(q.text);
  }
  if (names.empty()) throw EmptyIndex("no names to index in " + a.names);

  auto features = embed_names(model, *atlas, names);
  const auto forest = KDForest::build(std::move(features), names, a.trees, g.seed);
  const fs::path out(a.out);
  fs::create_directories(out);
  const std::string checksum = model_checksum(model);
  forest.save(out / "index.bin", checksum);
  json manifest = {
      {"command", "index"},
      {"version", HOMOGLYPH_VERSION},
      {"seed", g.seed},
      {"trees", a.trees},
      {"names", names.size()},
      {"names_sha256", sha256_file(a.names)},
      {"model_sha256", checksum},
      {"font_sha256", atlas->font_id()},
      {"index_sha256", sha256_file(out / "index.bin")},
  };
  write_json(out / "manifest.json", manifest);
  info("indexed " + std::to_string(names.size()) + " names");
  return kExitClean;
}

// ---------------------------------------------------------------------------

struct CheckArgs {
  std::string index;
  std::string model;
  std::string queries;
  std::vector<std::string> names;
  std::optional<double> threshold;
  int checks = kDefaultChecks;
  std::string out;
};

double default_threshold(const fs::path& model_path) {
  const fs::path manifest = model_path.parent_path() / "manifest.json";
  if (fs::is_regular_file(manifest)) {
    const json j = read_json(manifest);
    if (j.contains("threshold") && j["threshold"].is_number()) return j["threshold"].get<double>();
  }
  throw InvalidArgument("no --threshold given and no threshold in " + manifest.string());
}

int cmd_check(const Globals& g, const CheckArgs& a) {
  require_file(a.index);
  require_file(a.model);
  if (!a.queries.empty()) require_file(a.queries);
  if (a.checks < 1) throw InvalidArgument("--checks must be at least 1");
  const double threshold = a.threshold ? *a.threshold : default_threshold(a.model);

  const auto atlas = load_atlas(g);
  const Model model = load_model(a.model);
  std::string stored;
  const auto forest = KDForest::load(a.index, &stored);
  const std::string actual = model_checksum(model);
  if (!stored.empty() && stored != actual) {
    throw InvalidArgument("index was built with model " + stored + " but " + a.model + " is " + actual);
  }

  std::vector<std::string> queries = a.names;
  if (!a.queries.empty()) {
    const auto more = read_name_list(a.queries);
    queries.insert(queries.end(), more.begin(), more.end());
  }
  const auto reports = check_names(forest, model, *atlas, queries, threshold, a.checks);

  std::string report = "query\tmatch\tdistance\n";
  bool detected = false;
  for (const auto& r : reports) {
    if (r.query.truncated) warn("truncated \"" + r.query.original + "\" to \"" + r.query.text + "\"");
    if (r.query.used_fallback) warn("\"" + r.query.original + "\" contains characters missing from the font");
    for (const auto& m : r.matches) {
      report += r.query.text + "\t" + m.label + "\t" + fmt(m.distance) + "\n";
      detected = true;
    }
  }
  if (a.out.empty()) {
    std::cout << report;
  } else {
    write_text(a.out, report);
  }
  return detected ? kExitDetected : kExitClean;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string data;
  std::string model;
  std::string out;
  std::vector<std::string> scorers = {"edit", "visual", "model"};
  std::string names;
  std::vector<int> checks_list = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
  int trees = kDefaultTrees;
  std::size_t max_queries = 0;
  std::vector<std::string> cluster_names = {"google.com", "facebook.com", "twitter.com", "snapchat.com"};
  int cluster_spoofs = 4;
};

int cmd_eval(const Globals& g, const EvalArgs& a) {
  const fs::path data(a.data);
  require_file(data / "test.tsv");
  if (!a.model.empty()) require_file(a.model);
  if (!a.names.empty()) require_file(a.names);
  std::vector<Scorer> scorers;
  for (const auto& s : a.scorers) scorers.push_back(parse_scorer(s));
  const bool needs_model = std::find(scorers.begin(), scorers.end(), Scorer::model) != scorers.end();
  if (needs_model && a.model.empty()) throw InvalidArgument("the model scorer needs --model");

  const auto atlas = load_atlas(g);
  std::optional<Model> model;
  if (!a.model.empty()) model = load_model(a.model);
  const auto test = read_pairs(data / "test.tsv");

  const fs::path out(a.out);
  fs::create_directories(out);
  json summary = {{"command", "eval"}, {"version", HOMOGLYPH_VERSION}, {"seed", g.seed},
                  {"test_sha256", sha256_file(data / "test.tsv")}, {"test_pairs", test.size()}};
  if (model) summary["model_sha256"] = model_checksum(*model);

  CharSimilarityTable table;
  if (std::find(scorers.begin(), scorers.end(), Scorer::visual) != scorers.end()) {
    table = similarity_table_for(test, *atlas);
    write_text(out / "similarity.tsv", table.to_tsv());
    summary["visual_note"] = "visual edit distance uses glyph-overlap similarity derived from the font, "
                             "an approximation of hand-tuned cost tables";
  }
  ScoringContext ctx{atlas.get(), &table, model ? &*model : nullptr};
  json aucs = json::object();
  for (Scorer s : scorers) {
    const std::string name(to_string(s));
    const auto roc = roc_auc(score_pairs(test, s, ctx), name);
    write_text(out / ("roc_" + name + ".csv"), roc_csv(roc));
    aucs[name] = roc.auc;
    info(name + " AUC " + fmt(roc.auc));
  }
  summary["auc"] = aucs;
  if (aucs.contains("model")) {
    json deltas = json::object();
    for (const char* base : {"edit", "visual"}) {
      if (!aucs.contains(base)) continue;
      const double m = aucs["model"].get<double>(), b = aucs[base].get<double>();
      deltas[base] = {{"absolute", m - b}, {"relative", b > 0 ? (m - b) / b : 0.0}};
    }
    summary["model_improvement"] = deltas;
  }

  if (!a.names.empty()) {
    const auto names = read_name_list(a.names);
    const auto hist = percent_edit_distance_histogram(names);
    write_text(out / "histogram.csv", histogram_csv(hist));

    if (model) {
      // Index the names; query with one generated spoof per name.
      std::vector<std::string> kept;
      std::set<std::string> seen;
      for (const auto& n : names) {
        const auto q = prepare_query(n, *atlas);
        if (!q.text.empty() && seen.insert(q.text).second) kept.push_back(q.text);
      }
      auto features = embed_names(*model, *atlas, kept);
      const auto forest = KDForest::build(features, kept, a.trees, g.seed);
      const auto conf = ConfusableTable::bundled();
      Rng rng(mix_seed(g.seed, 7));
      std::vector<std::string> queries;
      for (const auto& n : kept) {
        if (a.max_queries && queries.size() >= a.max_queries) break;
        const std::u32string u = utf8_decode(n);
        std::u32string q = u;
        if (!conf.matches(u).empty()) q = generate_spoof(u, conf, rng, 2);
        if (!atlas->fits(q) || q.size() > static_cast<std::size_t>(kMaxGlyphs)) q = u;
        queries.push_back(utf8_encode(q));
      }
      const auto qf = embed_names(*model, *atlas, queries);
      const auto curve = recall_vs_checks(forest, qf, oracle_top1(forest, qf), a.checks_list);
      write_text(out / "recall.csv", recall_csv(curve));
      summary["recall"] = {{"index_size", curve.index_size}, {"queries", curve.queries},
                           {"trees", a.trees}, {"linear_scan_us", curve.linear_scan_us}};
    }
  }

  if (model && a.cluster_names.size() >= 2) {
    const auto conf = ConfusableTable::bundled();
    Rng rng(mix_seed(g.seed, 11));
    std::vector<std::string> labels, strings;
    std::vector<std::size_t> group_of;
    for (std::size_t gi = 0; gi < a.cluster_names.size(); ++gi) {
      const std::u32string base = utf8_decode(a.cluster_names[gi]);
      labels.push_back(a.cluster_names[gi]);
      strings.push_back(a.cluster_names[gi]);
      group_of.push_back(gi);
      std::set<std::u32string> made{base};
      for (int k = 0, tries = 0; k < a.cluster_spoofs && tries < 1000; ++tries) {
        const auto s = generate_spoof(base, conf, rng, 2);
        if (!atlas->fits(s) || !made.insert(s).second) continue;
        labels.push_back(a.cluster_names[gi]);
        strings.push_back(utf8_encode(s));
        group_of.push_back(gi);
        ++k;
      }
    }
    const auto feats = embed_names(*model, *atlas, strings);
    std::vector<std::vector<FeatureVector>> groups(a.cluster_names.size());
    for (std::size_t i = 0; i < feats.size(); ++i) groups[group_of[i]].push_back(feats[i]);
    const auto sep = cluster_separation(groups);
    std::vector<std::string> pca_labels;
    for (std::size_t i = 0; i < strings.size(); ++i) pca_labels.push_back(labels[i] + " " + strings[i]);
    write_text(out / "pca.csv", pca_csv(pca_labels, pca_project(feats)));
    summary["cluster_separation"] = {{"intra", sep.intra}, {"inter", sep.inter},
                                     {"ratio", sep.inter > 0 ? sep.intra / sep.inter : 0.0}};
  }

  write_json(out / "summary.json", summary);
  return kExitClean;
}

// ---------------------------------------------------------------------------

int cmd_render(const Globals& g, const std::string& text, const std::string& out) {
  const auto atlas = load_atlas(g);
  const auto img = render_string(std::string_view(text), *atlas);
  if (img.used_fallback) warn("some characters are missing from the font");
  if (out.empty()) {
    std::cout << to_pbm(img);
  } else {
    write_text(out, to_pbm(img));
  }
  return kExitClean;
}

int cmd_similarity(const Globals& g, const std::string& chars, const std::string& out) {
  const auto atlas = load_atlas(g);
  std::set<char32_t> cps;
  if (chars.empty()) {
    for (char32_t c = 0x21; c < 0x7f; ++c) cps.insert(c);
    for (const auto& e : ConfusableTable::bundled().entries()) {
      for (const auto& r : e.replacements) cps.insert(r.begin(), r.end());
    }
  } else {
    for (char32_t c : utf8_decode(chars)) cps.insert(c);
  }
  const auto table = CharSimilarityTable::build(*atlas, {cps.begin(), cps.end()});
  if (out.empty()) {
    std::cout << table.to_tsv();
  } else {
    write_text(out, table.to_tsv());
  }
  return kExitClean;
}

void print_version() {
  std::cout << "homoglyph " << HOMOGLYPH_VERSION << "\n";
  std::cout << "data dir: " << data_dir().string() << "\n";
  for (const char* f : {"DejaVuSans.ttf", "confusables.tsv", "process_names.txt", "domain_names.txt"}) {
    const fs::path p = data_dir() / f;
    std::cout << f << ": " << (fs::is_regular_file(p) ? sha256_file(p) : std::string("missing")) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homoglyph (name-spoofing) detection with a Siamese CNN and a KD-tree forest"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Globals g;
  app.add_option("--font", g.font, "TrueType font replacing the bundled face")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_flag_callback("--version", [] {
    print_version();
    throw CLI::Success();
  }, "Print version and data-file checksums");

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Write a synthetic name list");
  s_synth->add_option("--mode", synth.mode, "process or domain")->capture_default_str();
  s_synth->add_option("--count", synth.count, "Number of names")->capture_default_str();
  s_synth->add_option("--out", synth.out, "Output file (default stdout)");

  GenArgs gen;
  auto* s_gen = app.add_subcommand("gen", "Build train/val/test pair datasets from a name list");
  s_gen->add_option("--names", gen.names, "Name list, one per line")->required();
  s_gen->add_option("--mode", gen.mode, "process or domain")->capture_default_str();
  s_gen->add_option("--out", gen.out, "Output directory")->required();
  s_gen->add_option("--table", gen.table, "Confusable table (default: bundled)");
  s_gen->add_option("--max-edits", gen.max_edits, "Substitutions per spoof (0 = mode default)");
  s_gen->add_option("--spoof-ratio", gen.spoof_ratio, "Spoof pairs per benign pair")->capture_default_str();
  s_gen->add_option("--benign-pairs", gen.benign_pairs, "Domain mode: benign pair count (0 = 5 per name)");

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "Train the Siamese network on a generated dataset");
  s_train->add_option("--data", tr.data, "Dataset directory from gen")->required();
  s_train->add_option("--out", tr.out, "Output directory")->required();
  s_train->add_option("--epochs", tr.cfg.epochs)->capture_default_str();
  s_train->add_option("--batch-size", tr.cfg.batch_size)->capture_default_str();
  s_train->add_option("--lr", tr.cfg.learning_rate)->capture_default_str();
  s_train->add_option("--decay", tr.cfg.rmsprop_decay)->capture_default_str();
  s_train->add_option("--margin", tr.cfg.margin)->capture_default_str();
  s_train->add_option("--patience", tr.cfg.early_stop_patience)->capture_default_str();
  s_train->add_option("--leaky-slope", tr.cfg.leaky_slope)->capture_default_str();

  IndexArgs ix;
  auto* s_index = app.add_subcommand("index", "Embed a whitelist of names and build the KD-tree forest");
  s_index->add_option("--names", ix.names, "Names to protect")->required();
  s_index->add_option("--model", ix.model, "Model file")->required();
  s_index->add_option("--out", ix.out, "Output directory")->required();
  s_index->add_option("--trees", ix.trees)->capture_default_str();

  CheckArgs ck;
  auto* s_check = app.add_subcommand("check", "Screen names against an index; exit 2 on a match");
  s_check->add_option("--index", ck.index, "Index file")->required();
  s_check->add_option("--model", ck.model, "Model file")->required();
  s_check->add_option("--queries", ck.queries, "File of names to screen");
  s_check->add_option("names", ck.names, "Names to screen");
  s_check->add_option("--threshold", ck.threshold, "Distance threshold (default: from the model manifest)");
  s_check->add_option("--checks", ck.checks)->capture_default_str();
  s_check->add_option("--out", ck.out, "Report file (default stdout)");

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("eval", "ROC, recall/timing, histogram and PCA outputs");
  s_eval->add_option("--data", ev.data, "Dataset directory from gen")->required();
  s_eval->add_option("--model", ev.model, "Model file");
  s_eval->add_option("--out", ev.out, "Results directory")->required();
  s_eval->add_option("--scorers", ev.scorers, "edit, visual, model")->delimiter(',')->capture_default_str();
  s_eval->add_option("--names", ev.names, "Name list for the histogram and recall curve");
  s_eval->add_option("--checks", ev.checks_list, "Checks values for the recall curve")->delimiter(',');
  s_eval->add_option("--trees", ev.trees)->capture_default_str();
  s_eval->add_option("--max-queries", ev.max_queries, "Cap on recall queries (0 = one per name)");
  s_eval->add_option("--cluster-names", ev.cluster_names, "Base names for the PCA/cluster output")->delimiter(',');

  std::string render_text, render_out;
  auto* s_render = app.add_subcommand("render", "Render a string as a plain PBM image");
  s_render->add_option("text", render_text)->required();
  s_render->add_option("--out", render_out, "Output file (default stdout)");

  std::string sim_chars, sim_out;
  auto* s_sim = app.add_subcommand("similarity", "Export the glyph similarity table as TSV");
  s_sim->add_option("--chars", sim_chars, "Characters to include (default: ASCII + confusables)");
  s_sim->add_option("--out", sim_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; usage errors share the generic error code.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*s_synth) return cmd_synth(g, synth);
    if (*s_gen) return cmd_gen(g, gen);
    if (*s_train) return cmd_train(g, tr);
    if (*s_index) return cmd_index(g, ix);
    if (*s_check) return cmd_check(g, ck);
    if (*s_eval) return cmd_eval(g, ev);
    if (*s_render) return cmd_render(g, render_text, render_out);
    if (*s_sim) return cmd_similarity(g, sim_chars, sim_out);
    std::cout << app.help();
    return kExitClean;
  } catch (const Error& e) {
    std::cerr << "error: " << error_kind(e) << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitError;
}
