#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsecf/corpus.hpp"
#include "sparsecf/eval.hpp"
#include "sparsecf/nn.hpp"
#include "sparsecf/train.hpp"
#include "sparsecf/types.hpp"

namespace sparsecf {

// ---------------------------------------------------------------------------
// Bernoulli implicit-feedback generator.

struct SyntheticConfig {
  std::size_t n_users = 10000;
  std::size_t n_items = 100;
  double p_low = 0.2;
  double p_high = 0.8;
  std::uint64_t seed = 0;
};

struct FeedbackMatrix {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::vector<std::uint64_t> bits;  // row-major, words_per_row per user
  std::vector<double> item_probs;
  std::size_t words_per_row = 0;

  bool get(std::size_t user, std::size_t item) const {
    return (bits[user * words_per_row + item / 64] >> (item % 64)) & 1u;
  }
  double density() const;
};

// Per-item probability p_i ~ U(p_low, p_high), then each cell
// r_ui ~ Bernoulli(p_i), all from one seeded stream.
FeedbackMatrix generate_feedback(const SyntheticConfig& config);

// Column sums and ordered-pair intersection counts (i != j; both directions
// carry the same count).  The feedback matrix has no timestamps, so unlike
// transaction ingestion every co-occurring pair counts both ways.
CooccurrenceStats matrix_to_stats(const FeedbackMatrix& m);

// ---------------------------------------------------------------------------
// Experiment 1: exact-loss convergence to log-cosine.

struct ConvergenceConfig {
  SyntheticConfig synth;
  double learning_rate = 0.1;
  int epochs = 200;
  double full_pair_mass = 10.0;
};

struct ConvergenceReport {
  TrainHistory history;  // rmse = RMSE(exp(h), cosine); spearman vs oracle
  double final_rmse = 0.0;
  double final_rmse_log = 0.0;  // RMSE(h, log cosine)
  double final_spearman = 0.0;
  std::size_t n_items = 0;
  std::size_t n_users = 0;
  std::int64_t total_pairs = 0;   // |CP|
  std::size_t distinct_pairs = 0;  // pairs with n_cp > 0 (metric support)
  double z = 0.0;
  double matched_ratio = 0.0;  // |CP| / z^2
  double density = 0.0;
};

// Feedback matrix -> indicator linear model -> full-loss SGD; per-epoch RMSE
// and Spearman against the exact cosine oracle over pairs with n_cp > 0.
ConvergenceReport run_convergence_experiment(const ConvergenceConfig& config);

void write_convergence_summary_json(const std::string& path,
                                    const ConvergenceReport& report);

// ---------------------------------------------------------------------------
// Experiment 2: sampling-ratio sweep.

struct RatioSetting {
  std::int64_t k_cp = 0;
  std::int64_t k_s = 0;
  std::int64_t k_r = 0;
};

// Settings with k_cp fixed and k_s chosen (k_r = 1) so that
// k_cp / (k_s * k_r) is as close as possible to multiplier * |CP| / z^2.
std::vector<RatioSetting> ratio_settings(const CooccurrenceStats& stats,
                                         std::int64_t k_cp,
                                         std::span<const double> multipliers);

struct RatioSweepConfig {
  SyntheticConfig synth{2000, 50, 0.2, 0.8, 0};
  std::int64_t k_cp = 100000;
  std::vector<double> multipliers = {0.1, 0.5, 1.0, 2.0, 10.0};
  double learning_rate = 0.002;
  int epochs = 200;
  double spearman_target = 0.99;
};

struct RatioRunReport {
  RatioSetting setting;
  double multiplier = 0.0;
  double realized_ratio = 0.0;  // k_cp / (k_s * k_r)
  double shift = 0.0;           // expected optimum offset at this ratio
  TrainHistory history;         // rmse = RMSE(exp(h), cosine) per epoch
  double final_rmse = 0.0;
  double final_rmse_shifted = 0.0;  // RMSE(h - shift, log cosine)
  double final_spearman = 0.0;
  double median_h_minus_log_cos = 0.0;
  int epochs_to_spearman_target = -1;  // 1-based epoch index, -1 if never
};

struct RatioSweepReport {
  std::vector<RatioRunReport> runs;
  std::size_t matched_index = 0;  // run with multiplier closest to 1
  double matched_ratio = 0.0;     // |CP| / z^2
  std::int64_t total_pairs = 0;
  double z = 0.0;
};

RatioSweepReport run_ratio_sweep(const RatioSweepConfig& config);

void write_sweep_summary_json(const std::string& path,
                              const RatioSweepReport& report);

// ---------------------------------------------------------------------------
// Content corpus generator: clustered items with correlated title and
// aspect tokens, plus simulated users who mostly buy within one cluster.
// Token families are derived from (cluster, theme) indices alone, so two
// corpora generated with different item-id prefixes share vocabulary and a
// model trained on one can score the other cold-start.

struct ContentCorpusConfig {
  std::size_t n_clusters = 10;
  std::size_t items_per_cluster = 200;
  std::size_t n_users = 5000;
  std::uint64_t seed = 0;
  std::string id_prefix = "item";
  std::size_t themes_per_cluster = 5;
  double within_cluster_prob = 0.8;
  std::size_t min_purchases = 8;
  std::size_t max_purchases = 16;
  // Share of within-cluster purchases that stay in the user's home theme;
  // concentrates co-purchases so content carries a learnable signal.
  double within_theme_prob = 0.85;
};

struct ContentCorpus {
  FeatureSchema schema;  // title (sequential), aspects (bag)
  std::vector<RawItem> items;
  std::vector<RawRecord> records;
};

ContentCorpus generate_content_corpus(const ContentCorpusConfig& config);
// Writes catalog.jsonl, transactions.tsv, schema.tsv into `dir`.
void write_content_corpus(const ContentCorpus& corpus, const std::string& dir);

// ---------------------------------------------------------------------------
// Experiment 3: end-to-end content-model ranking sanity.

// Per-seed sampled loss with a small validation split; the content corpora
// are sparse enough that this mirrors the marketplace protocol at desk scale.
TrainConfig default_content_train();

struct ContentExperimentConfig {
  ContentCorpusConfig train_corpus{10, 200, 5000, 0, "t", 5, 0.8, 8, 16};
  ContentCorpusConfig eval_corpus{10, 220, 5000, 0, "e", 5, 0.8, 8, 16};
  std::string arch = "dcf-mean";  // dcf-mean | dcf-rnn | linear
  std::size_t token_dim = 8;
  std::size_t rnn_hidden = 16;
  std::size_t item_dim = 16;
  std::size_t head_hidden = 32;
  bool tied = false;
  TrainConfig train = default_content_train();
  std::size_t pool_size = 2000;
  std::size_t n_eval_seeds = 200;
  std::vector<int> ks = {30};
  std::size_t eval_workers = 1;  // ranking metrics are worker-count invariant
  // Master seed; corpus, init, training, and pool seeds derive from it.
  std::uint64_t seed = 0;
};

struct ContentExperimentReport {
  RankingReport model;
  RankingReport untrained;  // all-zero linear model over the same task
  double baseline_recall_at_k = 0.0;  // k/(pool_size+1) at ks.front()
  double baseline_mrr = 0.0;          // E[1/rank] under random scoring
  TrainHistory history;
  std::size_t n_train_items = 0;
  std::size_t n_eval_items = 0;
  std::int64_t train_total_pairs = 0;
};

ContentExperimentReport run_content_experiment(
    const ContentExperimentConfig& config);

void write_content_summary_json(const std::string& path,
                                const ContentExperimentReport& report,
                                const ContentExperimentConfig& config);

}  // namespace sparsecf
