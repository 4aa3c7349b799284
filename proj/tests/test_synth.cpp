#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparsecf/corpus.hpp"
#include "sparsecf/objective.hpp"
#include "sparsecf/rng.hpp"
#include "sparsecf/synth.hpp"
#include "sparsecf/types.hpp"

using namespace sparsecf;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

// Token family parsing for generated corpora: theme words "w<c>_<t>_<j>",
// cluster words "c<c>_<j>", global words "g<j>".
struct ParsedToken {
  char family;  // 'w', 'c', or 'g'
  std::size_t cluster = 0, theme = 0;
};

ParsedToken parse_token(const std::string& tok) {
  ParsedToken p;
  p.family = tok[0];
  if (p.family == 'w') {
    const auto u1 = tok.find('_');
    const auto u2 = tok.find('_', u1 + 1);
    p.cluster = std::stoul(tok.substr(1, u1 - 1));
    p.theme = std::stoul(tok.substr(u1 + 1, u2 - u1 - 1));
  } else if (p.family == 'c') {
    p.cluster = std::stoul(tok.substr(1, tok.find('_') - 1));
  }
  return p;
}

std::size_t item_index(const std::string& item_id) {
  return std::stoul(item_id.substr(item_id.find('_') + 1));
}

}  // namespace

// ---------------------------------------------------------------------------
// Feedback matrix generator.

TEST_CASE("feedback generation is deterministic and seed-sensitive") {
  SyntheticConfig cfg{50, 70, 0.2, 0.8, 9};
  FeedbackMatrix a = generate_feedback(cfg);
  FeedbackMatrix b = generate_feedback(cfg);
  CHECK(a.bits == b.bits);
  CHECK(a.item_probs == b.item_probs);
  cfg.seed = 10;
  FeedbackMatrix c = generate_feedback(cfg);
  CHECK(a.bits != c.bits);
}

TEST_CASE("feedback matrix dimensions and bit addressing") {
  // 70 items needs two 64-bit words per row.
  SyntheticConfig cfg{13, 70, 0.3, 0.7, 1};
  FeedbackMatrix m = generate_feedback(cfg);
  CHECK(m.n_users == 13);
  CHECK(m.n_items == 70);
  CHECK(m.words_per_row == 2);
  CHECK(m.bits.size() == 26);
  // get() and the raw words agree across the word boundary.
  for (std::size_t u = 0; u < m.n_users; ++u) {
    for (std::size_t i = 60; i < 70; ++i) {
      const bool direct =
          (m.bits[u * 2 + i / 64] >> (i % 64)) & 1u;
      CHECK(m.get(u, i) == direct);
    }
  }
}

TEST_CASE("item probabilities respect the configured band") {
  SyntheticConfig cfg{5, 200, 0.25, 0.65, 3};
  FeedbackMatrix m = generate_feedback(cfg);
  REQUIRE(m.item_probs.size() == 200);
  for (double p : m.item_probs) {
    CHECK(p >= 0.25);
    CHECK(p < 0.65);
  }
}

TEST_CASE("degenerate probability bands produce constant matrices") {
  SyntheticConfig ones{8, 9, 1.0, 1.0, 0};
  FeedbackMatrix m1 = generate_feedback(ones);
  for (std::size_t u = 0; u < 8; ++u) {
    for (std::size_t i = 0; i < 9; ++i) CHECK(m1.get(u, i));
  }
  CHECK(m1.density() == doctest::Approx(1.0));

  SyntheticConfig zeros{8, 9, 0.0, 0.0, 0};
  FeedbackMatrix m0 = generate_feedback(zeros);
  CHECK(m0.density() == doctest::Approx(0.0));
}

TEST_CASE("density equals the fraction of set cells") {
  SyntheticConfig cfg{40, 30, 0.2, 0.8, 7};
  FeedbackMatrix m = generate_feedback(cfg);
  std::size_t ones = 0;
  for (std::size_t u = 0; u < m.n_users; ++u) {
    for (std::size_t i = 0; i < m.n_items; ++i) ones += m.get(u, i);
  }
  CHECK(m.density() ==
        doctest::Approx(static_cast<double>(ones) / (40.0 * 30.0)));
  // Expected density is the mean item probability.
  CHECK(m.density() == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("feedback config validation") {
  CHECK_THROWS_AS(generate_feedback({0, 5, 0.2, 0.8, 0}), ConfigError);
  CHECK_THROWS_AS(generate_feedback({5, 0, 0.2, 0.8, 0}), ConfigError);
  CHECK_THROWS_AS(generate_feedback({5, 5, 0.8, 0.2, 0}), ConfigError);
  CHECK_THROWS_AS(generate_feedback({5, 5, -0.1, 0.5, 0}), ConfigError);
  CHECK_THROWS_AS(generate_feedback({5, 5, 0.5, 1.1, 0}), ConfigError);
}

// ---------------------------------------------------------------------------
// Matrix to co-occurrence stats.

TEST_CASE("matrix stats match a brute-force recount") {
  SyntheticConfig cfg{20, 10, 0.2, 0.9, 21};
  FeedbackMatrix m = generate_feedback(cfg);
  CooccurrenceStats stats = matrix_to_stats(m);

  std::int64_t total_purchases = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    std::int64_t col = 0;
    for (std::size_t u = 0; u < 20; ++u) col += m.get(u, i);
    CHECK(stats.item_count(static_cast<ItemId>(i)) == col);
    total_purchases += col;
  }
  CHECK(stats.total_purchases() == total_purchases);

  std::int64_t total_pairs = 0;
  double z = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    z += std::sqrt(static_cast<double>(stats.item_count(i)));
    for (std::size_t j = 0; j < 10; ++j) {
      std::int64_t both = 0;
      for (std::size_t u = 0; u < 20; ++u) both += m.get(u, i) && m.get(u, j);
      if (i == j) {
        CHECK(stats.pair_count(i, j) == 0);  // no self pairs
      } else {
        CHECK(stats.pair_count(static_cast<ItemId>(i),
                               static_cast<ItemId>(j)) == both);
        total_pairs += both;
      }
    }
  }
  CHECK(stats.total_pairs() == total_pairs);
  CHECK(stats.z() == doctest::Approx(z).epsilon(1e-12));

  // The matrix has no timestamps: co-occurrence counts both directions.
  for (const auto& [key, count] : stats.pairs()) {
    CHECK(stats.pair_count(pair_cand(key), pair_seed(key)) == count);
  }
}

// ---------------------------------------------------------------------------
// Convergence experiment.

TEST_CASE("small convergence run reaches the cosine oracle") {
  ConvergenceConfig cfg;
  cfg.synth = {300, 24, 0.2, 0.8, 5};
  cfg.learning_rate = 0.1;
  cfg.epochs = 150;
  ConvergenceReport report = run_convergence_experiment(cfg);

  CHECK(report.n_items == 24);
  CHECK(report.n_users == 300);
  CHECK(report.final_rmse < 1e-8);
  CHECK(report.final_spearman > 0.99999);
  CHECK(report.history.epochs.size() == 150);

  // Report invariants against independently recomputed stats.
  CooccurrenceStats stats = matrix_to_stats(generate_feedback(cfg.synth));
  CHECK(report.total_pairs == stats.total_pairs());
  CHECK(report.distinct_pairs == stats.pairs().size());
  CHECK(report.z == doctest::Approx(stats.z()));
  CHECK(report.matched_ratio ==
        doctest::Approx(static_cast<double>(stats.total_pairs()) /
                        (stats.z() * stats.z())));
  CHECK(report.density > 0.0);
  CHECK(report.density < 1.0);

  // exp(h) converging to cosine implies h converging to log cosine.
  CHECK(report.final_rmse_log < 1e-7);

  // Final-epoch callback metrics agree with the report's final metrics.
  const EpochRecord& last = report.history.epochs.back();
  REQUIRE(last.rmse.has_value());
  CHECK(*last.rmse == doctest::Approx(report.final_rmse));
}

TEST_CASE("per-epoch rmse is non-increasing once past epoch 20") {
  ConvergenceConfig cfg;
  cfg.synth = {250, 20, 0.2, 0.8, 12};
  cfg.epochs = 80;
  ConvergenceReport report = run_convergence_experiment(cfg);
  REQUIRE(report.history.epochs.size() == 80);
  for (std::size_t i = 20; i < report.history.epochs.size(); ++i) {
    REQUIRE(report.history.epochs[i].rmse.has_value());
    CHECK(*report.history.epochs[i].rmse <=
          *report.history.epochs[i - 1].rmse + 1e-12);
  }
}

TEST_CASE("convergence summary json exposes the report") {
  ConvergenceConfig cfg;
  cfg.synth = {100, 10, 0.3, 0.7, 2};
  cfg.epochs = 30;
  ConvergenceReport report = run_convergence_experiment(cfg);
  TempDir dir("sparsecf_conv_json");
  const auto path = dir.path / "summary.json";
  write_convergence_summary_json(path.string(), report);

  std::ifstream in(path);
  nlohmann::json j = nlohmann::json::parse(in);
  CHECK(j["n_items"] == 10);
  CHECK(j["n_users"] == 100);
  CHECK(j["total_pairs"] == report.total_pairs);
  CHECK(j["final_rmse_exp_vs_cosine"].get<double>() ==
        doctest::Approx(report.final_rmse));
  CHECK(j["final_spearman"].get<double>() ==
        doctest::Approx(report.final_spearman));
  CHECK(j["metric_support"] == "pairs with n_cp > 0");
  CHECK(j["history"]["epochs_run"] == 30);
}

// ---------------------------------------------------------------------------
// Ratio settings and sweep.

TEST_CASE("ratio settings factor the target ratio into k_s with k_r one") {
  auto stats =
      CooccurrenceStats::from_counts({4, 9}, {{pair_key(0, 1), 6}});
  // z = 2 + 3 = 5, |CP| = 6, matched ratio 6/25 = 0.24.
  const double multipliers[] = {1.0, 0.5, 10.0, 1e6};
  auto settings = ratio_settings(stats, 100, multipliers);
  REQUIRE(settings.size() == 4);
  for (const auto& s : settings) {
    CHECK(s.k_cp == 100);
    CHECK(s.k_r == 1);
  }
  CHECK(settings[0].k_s == 417);  // round(100 / 0.24)
  CHECK(settings[1].k_s == 833);  // round(100 / 0.12)
  CHECK(settings[2].k_s == 42);   // round(100 / 2.4)
  CHECK(settings[3].k_s == 1);    // clamped at 1
}

TEST_CASE("ratio settings validation") {
  auto stats = CooccurrenceStats::from_counts({4, 9}, {{pair_key(0, 1), 6}});
  const double ok[] = {1.0};
  CHECK_THROWS_AS(ratio_settings(stats, 0, ok), ConfigError);
  const double bad[] = {0.0};
  CHECK_THROWS_AS(ratio_settings(stats, 10, bad), ConfigError);
  const double neg[] = {-2.0};
  CHECK_THROWS_AS(ratio_settings(stats, 10, neg), ConfigError);
  auto empty = CooccurrenceStats::from_counts({4, 9}, {});
  CHECK_THROWS_AS(ratio_settings(empty, 10, ok), ConfigError);
}

TEST_CASE("small ratio sweep: matched sampling wins on rmse") {
  RatioSweepConfig cfg;
  cfg.synth = {200, 12, 0.2, 0.8, 4};
  cfg.k_cp = 3000;
  cfg.multipliers = {0.2, 1.0, 5.0};
  cfg.learning_rate = 0.005;
  cfg.epochs = 60;
  cfg.spearman_target = 0.95;
  RatioSweepReport sweep = run_ratio_sweep(cfg);

  REQUIRE(sweep.runs.size() == 3);
  CHECK(sweep.matched_index == 1);
  CooccurrenceStats stats = matrix_to_stats(generate_feedback(cfg.synth));
  CHECK(sweep.total_pairs == stats.total_pairs());
  CHECK(sweep.matched_ratio ==
        doctest::Approx(static_cast<double>(stats.total_pairs()) /
                        (stats.z() * stats.z())));

  for (const auto& run : sweep.runs) {
    CHECK(run.realized_ratio ==
          doctest::Approx(static_cast<double>(run.setting.k_cp) /
                          static_cast<double>(run.setting.k_s)));
    CHECK(run.shift == doctest::Approx(mc_shift(run.setting.k_cp,
                                                run.setting.k_s,
                                                run.setting.k_r, stats.z(),
                                                stats.total_pairs())));
    CHECK(std::isfinite(run.final_rmse));
    CHECK(run.history.epochs.size() == 60);
  }

  // Matched sampling (multiplier 1) estimates plain cosine best; its shift
  // is the smallest in magnitude by construction.
  const auto& matched = sweep.runs[1];
  CHECK(matched.final_rmse < sweep.runs[0].final_rmse);
  CHECK(matched.final_rmse < sweep.runs[2].final_rmse);
  CHECK(std::abs(matched.shift) <= std::abs(sweep.runs[0].shift) + 1e-9);
  CHECK(std::abs(matched.shift) <= std::abs(sweep.runs[2].shift) + 1e-9);

  // Shift-corrected scores land near log cosine for every ratio, so the
  // bias is the predicted shift rather than noise.
  for (const auto& run : sweep.runs) {
    CHECK(run.final_rmse_shifted < 0.5);
    CHECK(std::abs(run.median_h_minus_log_cos - run.shift) < 0.25);
  }

  // Skewed ratios trade final accuracy for early rank agreement: at this
  // scale the 5x run reaches the spearman target no later than matched.
  const int matched_hit = sweep.runs[1].epochs_to_spearman_target;
  const int skewed_hit = sweep.runs[2].epochs_to_spearman_target;
  CHECK(matched_hit >= 1);
  CHECK(skewed_hit >= 1);
  CHECK(skewed_hit <= matched_hit);
}

TEST_CASE("sweep summary json marks exactly one best run") {
  RatioSweepConfig cfg;
  cfg.synth = {120, 10, 0.3, 0.8, 6};
  cfg.k_cp = 1500;
  cfg.multipliers = {0.5, 1.0};
  cfg.learning_rate = 0.01;
  cfg.epochs = 25;
  RatioSweepReport sweep = run_ratio_sweep(cfg);
  TempDir dir("sparsecf_sweep_json");
  const auto path = dir.path / "sweep.json";
  write_sweep_summary_json(path.string(), sweep);

  std::ifstream in(path);
  nlohmann::json j = nlohmann::json::parse(in);
  REQUIRE(j["runs"].size() == 2);
  int best_flags = 0;
  for (const auto& run : j["runs"]) {
    best_flags += run["best_rmse"].get<bool>() ? 1 : 0;
    CHECK(run.contains("multiplier"));
    CHECK(run.contains("k_s"));
    CHECK(run.contains("shift"));
    CHECK(run.contains("final_rmse_shift_corrected"));
    CHECK(run.contains("median_h_minus_log_cos"));
    CHECK(run.contains("epochs_to_spearman_target"));
  }
  CHECK(best_flags == 1);
  CHECK(j["metric_support"] == "pairs with n_cp > 0");
  CHECK(j["matched_ratio"].get<double>() ==
        doctest::Approx(sweep.matched_ratio));
}

// ---------------------------------------------------------------------------
// Content corpus generator.

TEST_CASE("content corpus has the configured shape") {
  ContentCorpusConfig cfg;
  cfg.n_clusters = 4;
  cfg.items_per_cluster = 30;
  cfg.n_users = 50;
  cfg.seed = 3;
  cfg.id_prefix = "x";
  ContentCorpus corpus = generate_content_corpus(cfg);

  CHECK(corpus.items.size() == 120);
  CHECK(corpus.schema.names ==
        std::vector<std::string>{"title", "aspects"});
  CHECK(corpus.schema.sequential == std::vector<bool>{true, false});

  std::set<std::string> users;
  std::size_t min_len = 99, max_len = 0;
  for (const auto& rec : corpus.records) users.insert(rec.user);
  CHECK(users.size() == 50);
  CHECK(corpus.records.size() >= 50 * cfg.min_purchases);
  CHECK(corpus.records.size() <= 50 * cfg.max_purchases);

  for (const auto& item : corpus.items) {
    CHECK(item.item_id.rfind("x_", 0) == 0);
    const auto& title = item.features.at("title");
    const auto& aspects = item.features.at("aspects");
    min_len = std::min(min_len, title.size());
    max_len = std::max(max_len, title.size());
    CHECK(title.size() >= 3);
    CHECK(title.size() <= 5);
    CHECK(aspects.size() >= 2);
    CHECK(aspects.size() <= 4);
  }
  CHECK(min_len == 3);  // both extremes actually occur at this size
  CHECK(max_len == 5);
}

TEST_CASE("title and aspect tokens come from the item's own families") {
  ContentCorpusConfig cfg;
  cfg.n_clusters = 3;
  cfg.items_per_cluster = 25;
  cfg.n_users = 10;
  cfg.seed = 8;
  ContentCorpus corpus = generate_content_corpus(cfg);

  for (const auto& item : corpus.items) {
    const std::size_t idx = item_index(item.item_id);
    const std::size_t cluster = idx / cfg.items_per_cluster;
    const std::size_t theme = (idx % cfg.items_per_cluster) %
                              cfg.themes_per_cluster;

    // The first title token always names the item's theme.
    const ParsedToken first = parse_token(item.features.at("title")[0]);
    CHECK(first.family == 'w');
    CHECK(first.cluster == cluster);
    CHECK(first.theme == theme);

    for (const auto* set : {&item.features.at("title"),
                            &item.features.at("aspects")}) {
      for (const auto& tok : *set) {
        const ParsedToken p = parse_token(tok);
        // Theme and cluster words must match the item's own cluster/theme;
        // global words are shared.
        if (p.family == 'w') {
          CHECK(p.cluster == cluster);
          CHECK(p.theme == theme);
        } else if (p.family == 'c') {
          CHECK(p.cluster == cluster);
        } else {
          CHECK(p.family == 'g');
        }
      }
    }
  }
}

TEST_CASE("token families are shared across prefixes and seeds") {
  ContentCorpusConfig a;
  a.n_clusters = 3;
  a.items_per_cluster = 40;
  a.n_users = 10;
  a.seed = 1;
  a.id_prefix = "t";
  ContentCorpusConfig b = a;
  b.seed = 2;
  b.id_prefix = "e";
  b.items_per_cluster = 44;

  auto vocab_of = [](const ContentCorpus& c) {
    std::set<std::string> v;
    for (const auto& item : c.items) {
      for (const auto& [name, toks] : item.features) {
        v.insert(toks.begin(), toks.end());
      }
    }
    return v;
  };
  const auto va = vocab_of(generate_content_corpus(a));
  const auto vb = vocab_of(generate_content_corpus(b));
  // Token families depend only on (cluster, theme) indices, so a model
  // trained on one corpus sees almost no new tokens in the other.
  std::size_t unseen = 0;
  for (const auto& tok : vb) unseen += va.count(tok) == 0;
  CHECK(unseen < vb.size() / 20);
}

TEST_CASE("timestamps run in purchase order per user") {
  ContentCorpusConfig cfg;
  cfg.n_clusters = 2;
  cfg.items_per_cluster = 10;
  cfg.n_users = 20;
  cfg.seed = 4;
  ContentCorpus corpus = generate_content_corpus(cfg);
  std::map<std::string, std::int64_t> next;
  for (const auto& rec : corpus.records) {
    CHECK(rec.timestamp == next[rec.user]);
    ++next[rec.user];
  }
}

TEST_CASE("a single cluster keeps every co-purchase inside it") {
  ContentCorpusConfig cfg;
  cfg.n_clusters = 1;
  cfg.items_per_cluster = 15;
  cfg.n_users = 30;
  cfg.seed = 6;
  ContentCorpus corpus = generate_content_corpus(cfg);
  ItemRegistry reg;
  TransactionLog log = ingest_transactions(corpus.records, reg);
  CHECK(!log.copurchases.empty());
  for (const auto& cp : log.copurchases) {
    CHECK(reg.name(cp.seed).rfind("item_", 0) == 0);
    CHECK(item_index(reg.name(cp.seed)) < 15);
    CHECK(item_index(reg.name(cp.cand)) < 15);
  }
}

TEST_CASE("within-cluster co-purchase rates dominate cross-cluster rates") {
  ContentCorpusConfig cfg;
  cfg.n_clusters = 4;
  cfg.items_per_cluster = 25;
  cfg.n_users = 400;
  cfg.seed = 9;
  cfg.within_cluster_prob = 0.8;
  ContentCorpus corpus = generate_content_corpus(cfg);
  ItemRegistry reg;
  TransactionLog log = ingest_transactions(corpus.records, reg);

  const std::size_t n = cfg.items_per_cluster;
  std::int64_t within = 0, cross = 0;
  for (const auto& cp : log.copurchases) {
    const std::size_t cs = item_index(reg.name(cp.seed)) / n;
    const std::size_t cr = item_index(reg.name(cp.cand)) / n;
    (cs == cr ? within : cross) += 1;
  }
  // Per ordered pair: 3x more cross-cluster pairs exist, so compare rates.
  const double within_rate = static_cast<double>(within) / (100.0 * 99.0);
  const double cross_rate = static_cast<double>(cross) / (100.0 * 300.0);
  CHECK(within_rate > 2.0 * cross_rate);
}

TEST_CASE("content corpus generation is deterministic in the seed") {
  ContentCorpusConfig cfg;
  cfg.n_clusters = 2;
  cfg.items_per_cluster = 12;
  cfg.n_users = 25;
  cfg.seed = 11;
  ContentCorpus a = generate_content_corpus(cfg);
  ContentCorpus b = generate_content_corpus(cfg);
  REQUIRE(a.items.size() == b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    CHECK(a.items[i].item_id == b.items[i].item_id);
    CHECK(a.items[i].features == b.items[i].features);
  }
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].user == b.records[i].user);
    CHECK(a.records[i].item == b.records[i].item);
    CHECK(a.records[i].timestamp == b.records[i].timestamp);
  }

  cfg.seed = 12;
  ContentCorpus c = generate_content_corpus(cfg);
  bool any_diff = c.records.size() != a.records.size();
  for (std::size_t i = 0; !any_diff && i < a.records.size(); ++i) {
    any_diff = a.records[i].item != c.records[i].item;
  }
  CHECK(any_diff);
}

TEST_CASE("same seed writes byte-identical corpus files") {
  ContentCorpusConfig cfg;
  cfg.n_clusters = 2;
  cfg.items_per_cluster = 10;
  cfg.n_users = 15;
  cfg.seed = 13;
  TempDir d1("sparsecf_corpus_a"), d2("sparsecf_corpus_b");
  write_content_corpus(generate_content_corpus(cfg), d1.path.string());
  write_content_corpus(generate_content_corpus(cfg), d2.path.string());
  for (const char* name :
       {"catalog.jsonl", "transactions.tsv", "schema.tsv"}) {
    CHECK(slurp(d1.path / name) == slurp(d2.path / name));
  }
}

TEST_CASE("written corpus files load back into an equivalent corpus") {
  ContentCorpusConfig cfg;
  cfg.n_clusters = 2;
  cfg.items_per_cluster = 8;
  cfg.n_users = 12;
  cfg.seed = 14;
  ContentCorpus corpus = generate_content_corpus(cfg);
  TempDir dir("sparsecf_corpus_rt");
  write_content_corpus(corpus, dir.path.string());

  FeatureSchema schema = load_schema_tsv((dir.path / "schema.tsv").string());
  CHECK(schema.names == corpus.schema.names);
  CHECK(schema.sequential == corpus.schema.sequential);
  auto items = load_catalog_jsonl((dir.path / "catalog.jsonl").string());
  REQUIRE(items.size() == corpus.items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    CHECK(items[i].item_id == corpus.items[i].item_id);
    CHECK(items[i].features == corpus.items[i].features);
  }
  auto records =
      load_transactions_tsv((dir.path / "transactions.tsv").string());
  REQUIRE(records.size() == corpus.records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].item == corpus.records[i].item);
    CHECK(records[i].timestamp == corpus.records[i].timestamp);
  }
}

TEST_CASE("content corpus config validation") {
  ContentCorpusConfig cfg;
  cfg.n_clusters = 0;
  CHECK_THROWS_AS(generate_content_corpus(cfg), ConfigError);
  cfg = {};
  cfg.min_purchases = 1;
  CHECK_THROWS_AS(generate_content_corpus(cfg), ConfigError);
  cfg = {};
  cfg.max_purchases = cfg.min_purchases - 1;
  CHECK_THROWS_AS(generate_content_corpus(cfg), ConfigError);
  cfg = {};
  cfg.within_cluster_prob = 1.5;
  CHECK_THROWS_AS(generate_content_corpus(cfg), ConfigError);
  cfg = {};
  cfg.within_theme_prob = -0.1;
  CHECK_THROWS_AS(generate_content_corpus(cfg), ConfigError);
}

// ---------------------------------------------------------------------------
// Content experiment plumbing (small; the full protocol runs in acceptance).

TEST_CASE("mini content experiment populates a coherent report") {
  ContentExperimentConfig cfg;
  cfg.train_corpus.n_clusters = 3;
  cfg.train_corpus.items_per_cluster = 20;
  cfg.train_corpus.n_users = 300;
  cfg.eval_corpus.n_clusters = 3;
  cfg.eval_corpus.items_per_cluster = 24;
  cfg.eval_corpus.n_users = 300;
  cfg.arch = "linear";
  cfg.train.k_cp = 2000;
  cfg.train.k_r = 2;
  cfg.train.max_epochs = 8;
  cfg.train.patience = 8;
  cfg.train.minibatch = 1;
  cfg.train.learning_rate = 0.05;
  cfg.pool_size = 60;
  cfg.n_eval_seeds = 40;
  cfg.ks = {10};
  cfg.seed = 31;
  ContentExperimentReport report = run_content_experiment(cfg);

  CHECK(report.n_train_items == 60);
  CHECK(report.n_eval_items == 72);
  CHECK(report.train_total_pairs > 0);
  CHECK(report.model.pool_size == 60);
  CHECK(report.model.n_seeds <= 40);
  CHECK(report.model.n_seeds > 0);
  CHECK(report.untrained.n_seeds == report.model.n_seeds);
  CHECK(report.baseline_recall_at_k == doctest::Approx(10.0 / 61.0));
  double harmonic = 0.0;
  for (int i = 1; i <= 61; ++i) harmonic += 1.0 / i;
  CHECK(report.baseline_mrr == doctest::Approx(harmonic / 61.0));
  CHECK(std::isfinite(report.model.mrr));
  CHECK(report.model.recall.count(10) == 1);
  CHECK(!report.history.epochs.empty());

  // All-zero parameters score every candidate equally: the untrained
  // model's ranks are their tie means, far from the top of the pool.
  CHECK(report.untrained.recall.at(10) <= report.baseline_recall_at_k * 5);

  TempDir dir("sparsecf_content_json");
  const auto path = dir.path / "content.json";
  write_content_summary_json(path.string(), report, cfg);
  std::ifstream in(path);
  nlohmann::json j = nlohmann::json::parse(in);
  CHECK(j["arch"] == "linear");
  CHECK(j["n_train_items"] == 60);
  CHECK(j["recall"].contains("10"));
  CHECK(j["untrained_mrr"].get<double>() ==
        doctest::Approx(report.untrained.mrr));
  CHECK(j["baseline_mrr"].get<double>() ==
        doctest::Approx(report.baseline_mrr));
}

TEST_CASE("content experiment rejects unknown architectures") {
  ContentExperimentConfig cfg;
  cfg.train_corpus.n_clusters = 1;
  cfg.train_corpus.items_per_cluster = 5;
  cfg.train_corpus.n_users = 20;
  cfg.eval_corpus = cfg.train_corpus;
  cfg.eval_corpus.id_prefix = "e";
  cfg.arch = "transformer";
  CHECK_THROWS_AS(run_content_experiment(cfg), ConfigError);
}

TEST_CASE("default content training config is a sampled-mode setup") {
  TrainConfig tc = default_content_train();
  CHECK(tc.mode == LossMode::per_seed);
  CHECK(tc.k_cp >= 1);
  CHECK(tc.k_r >= 1);
  CHECK(tc.validation_fraction > 0.0);
  CHECK(tc.validation_fraction < 1.0);
  CHECK(tc.learning_rate > 0.0);
  CHECK(tc.max_epochs >= 1);
}
