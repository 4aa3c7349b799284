#include "sparsecf/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "sparsecf/log.hpp"
#include "sparsecf/objective.hpp"
#include "sparsecf/rng.hpp"
#include "sparsecf/sampling.hpp"

namespace sparsecf {

using json = nlohmann::json;

double FeedbackMatrix::density() const {
  if (n_users == 0 || n_items == 0) return 0.0;
  std::uint64_t ones = 0;
  for (std::uint64_t word : bits) ones += std::popcount(word);
  return static_cast<double>(ones) /
         (static_cast<double>(n_users) * static_cast<double>(n_items));
}

FeedbackMatrix generate_feedback(const SyntheticConfig& config) {
  if (config.n_users < 1 || config.n_items < 1) {
    throw ConfigError("feedback matrix needs >= 1 user and item");
  }
  if (!(config.p_low >= 0.0) || !(config.p_high <= 1.0) ||
      config.p_low > config.p_high) {
    throw ConfigError("need 0 <= p_low <= p_high <= 1");
  }
  FeedbackMatrix m;
  m.n_users = config.n_users;
  m.n_items = config.n_items;
  m.words_per_row = (config.n_items + 63) / 64;
  m.bits.assign(m.n_users * m.words_per_row, 0);
  Rng rng(config.seed);
  m.item_probs.resize(config.n_items);
  for (double& p : m.item_probs) p = rng.uniform(config.p_low, config.p_high);
  for (std::size_t u = 0; u < m.n_users; ++u) {
    std::uint64_t* row = m.bits.data() + u * m.words_per_row;
    for (std::size_t i = 0; i < m.n_items; ++i) {
      if (rng.bernoulli(m.item_probs[i])) {
        row[i / 64] |= std::uint64_t{1} << (i % 64);
      }
    }
  }
  return m;
}

CooccurrenceStats matrix_to_stats(const FeedbackMatrix& m) {
  // Column bitsets over users make pair counts cheap popcounts.
  const std::size_t words_per_col = (m.n_users + 63) / 64;
  std::vector<std::uint64_t> cols(m.n_items * words_per_col, 0);
  for (std::size_t u = 0; u < m.n_users; ++u) {
    for (std::size_t i = 0; i < m.n_items; ++i) {
      if (m.get(u, i)) {
        cols[i * words_per_col + u / 64] |= std::uint64_t{1} << (u % 64);
      }
    }
  }
  std::vector<std::int64_t> item_counts(m.n_items, 0);
  for (std::size_t i = 0; i < m.n_items; ++i) {
    std::int64_t c = 0;
    for (std::size_t w = 0; w < words_per_col; ++w) {
      c += std::popcount(cols[i * words_per_col + w]);
    }
    item_counts[i] = c;
  }
  std::vector<std::pair<PairKey, std::int64_t>> pair_counts;
  for (std::size_t i = 0; i < m.n_items; ++i) {
    for (std::size_t j = i + 1; j < m.n_items; ++j) {
      std::int64_t c = 0;
      for (std::size_t w = 0; w < words_per_col; ++w) {
        c += std::popcount(cols[i * words_per_col + w] &
                           cols[j * words_per_col + w]);
      }
      if (c > 0) {
        pair_counts.emplace_back(
            pair_key(static_cast<ItemId>(i), static_cast<ItemId>(j)), c);
        pair_counts.emplace_back(
            pair_key(static_cast<ItemId>(j), static_cast<ItemId>(i)), c);
      }
    }
  }
  return CooccurrenceStats::from_counts(std::move(item_counts),
                                        std::move(pair_counts));
}

// ---------------------------------------------------------------------------
// Shared metric plumbing for the synthetic experiments.

namespace {

struct OraclePairs {
  std::vector<ItemId> seed, cand;
  std::vector<double> cosine, log_cosine;
};

OraclePairs oracle_pairs(const CooccurrenceStats& stats) {
  OraclePairs o;
  o.seed.reserve(stats.pairs().size());
  for (const auto& [key, count] : stats.pairs()) {
    (void)count;
    const ItemId s = pair_seed(key), r = pair_cand(key);
    o.seed.push_back(s);
    o.cand.push_back(r);
    const double cos = cosine_score(stats, s, r);
    o.cosine.push_back(cos);
    o.log_cosine.push_back(std::log(cos));
  }
  return o;
}

void score_all(const PairScorer& model, const OraclePairs& oracle,
               std::vector<double>& h) {
  h.resize(oracle.seed.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = model.score(oracle.seed[i], oracle.cand[i]);
  }
}

std::optional<double> try_spearman(std::span<const double> xs,
                                   std::span<const double> ys) {
  try {
    return spearman(xs, ys);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

double median_of(std::vector<double> v) {
  if (v.empty()) throw DomainError("median of empty vector");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double exp_rmse(std::span<const double> h, std::span<const double> cosine) {
  std::vector<double> eh(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) eh[i] = std::exp(h[i]);
  return rmse(eh, cosine);
}

json history_tail_json(const TrainHistory& history) {
  json j;
  j["epochs_run"] = history.epochs.size();
  j["best_epoch"] = history.best_epoch;
  if (!history.epochs.empty()) {
    j["final_train_loss"] = history.epochs.back().train_loss;
    if (history.epochs.back().val_loss) {
      j["final_val_loss"] = *history.epochs.back().val_loss;
    }
  }
  return j;
}

void dump_json(const std::string& path, const json& obj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write report: " + path);
  out << obj.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiment 1: convergence of the exact loss.

ConvergenceReport run_convergence_experiment(const ConvergenceConfig& config) {
  const FeedbackMatrix matrix = generate_feedback(config.synth);
  const CooccurrenceStats stats = matrix_to_stats(matrix);
  const OraclePairs oracle = oracle_pairs(stats);

  LinearPairModel model = LinearPairModel::indicator(stats.n_items());
  TrainConfig tc;
  tc.mode = LossMode::full;
  tc.learning_rate = config.learning_rate;
  tc.max_epochs = config.epochs;
  tc.full_pair_mass = config.full_pair_mass;
  tc.seed = config.synth.seed;

  std::vector<double> h;
  const MetricsCallback metrics = [&](const PairScorer& scorer,
                                      EpochRecord& rec) {
    score_all(scorer, oracle, h);
    rec.rmse = exp_rmse(h, oracle.cosine);
    rec.spearman = try_spearman(h, oracle.log_cosine).value_or(
        std::numeric_limits<double>::quiet_NaN());
  };

  ConvergenceReport report;
  report.history = fit_model(model, stats, tc, metrics);
  score_all(model, oracle, h);
  report.final_rmse = exp_rmse(h, oracle.cosine);
  report.final_rmse_log = rmse(h, oracle.log_cosine);
  report.final_spearman =
      try_spearman(h, oracle.log_cosine)
          .value_or(std::numeric_limits<double>::quiet_NaN());
  report.n_items = stats.n_items();
  report.n_users = config.synth.n_users;
  report.total_pairs = stats.total_pairs();
  report.distinct_pairs = stats.pairs().size();
  report.z = stats.z();
  report.matched_ratio =
      static_cast<double>(stats.total_pairs()) / (stats.z() * stats.z());
  report.density = matrix.density();
  return report;
}

void write_convergence_summary_json(const std::string& path,
                                    const ConvergenceReport& report) {
  json j;
  j["n_items"] = report.n_items;
  j["n_users"] = report.n_users;
  j["total_pairs"] = report.total_pairs;
  j["distinct_pairs"] = report.distinct_pairs;
  j["z"] = report.z;
  j["matched_ratio"] = report.matched_ratio;
  j["density"] = report.density;
  j["final_rmse_exp_vs_cosine"] = report.final_rmse;
  j["final_rmse_score_vs_log_cosine"] = report.final_rmse_log;
  j["final_spearman"] = report.final_spearman;
  j["metric_support"] = "pairs with n_cp > 0";
  j["history"] = history_tail_json(report.history);
  dump_json(path, j);
}

// ---------------------------------------------------------------------------
// Experiment 2: sampling-ratio sweep.

std::vector<RatioSetting> ratio_settings(const CooccurrenceStats& stats,
                                         std::int64_t k_cp,
                                         std::span<const double> multipliers) {
  if (k_cp < 1) throw ConfigError("k_cp must be >= 1");
  if (stats.total_pairs() < 1) {
    throw ConfigError("ratio settings need at least one co-purchase");
  }
  const double matched =
      static_cast<double>(stats.total_pairs()) / (stats.z() * stats.z());
  std::vector<RatioSetting> settings;
  for (double mult : multipliers) {
    if (!(mult > 0.0)) throw ConfigError("ratio multipliers must be > 0");
    const double target = mult * matched;
    const std::int64_t k_s = std::max<std::int64_t>(
        1, std::llround(static_cast<double>(k_cp) / target));
    settings.push_back({k_cp, k_s, 1});
  }
  return settings;
}

RatioSweepReport run_ratio_sweep(const RatioSweepConfig& config) {
  const FeedbackMatrix matrix = generate_feedback(config.synth);
  const CooccurrenceStats stats = matrix_to_stats(matrix);
  const OraclePairs oracle = oracle_pairs(stats);
  const auto settings =
      ratio_settings(stats, config.k_cp, config.multipliers);

  RatioSweepReport sweep;
  sweep.total_pairs = stats.total_pairs();
  sweep.z = stats.z();
  sweep.matched_ratio =
      static_cast<double>(stats.total_pairs()) / (stats.z() * stats.z());
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < config.multipliers.size(); ++i) {
    const double gap = std::fabs(config.multipliers[i] - 1.0);
    if (gap < best_gap) {
      best_gap = gap;
      sweep.matched_index = i;
    }
  }

  for (std::size_t run = 0; run < settings.size(); ++run) {
    const RatioSetting& setting = settings[run];
    RatioRunReport rr;
    rr.setting = setting;
    rr.multiplier = config.multipliers[run];
    rr.realized_ratio = static_cast<double>(setting.k_cp) /
                        (static_cast<double>(setting.k_s) *
                         static_cast<double>(setting.k_r));
    rr.shift = mc_shift(setting.k_cp, setting.k_s, setting.k_r, stats.z(),
                        stats.total_pairs());

    LinearPairModel model = LinearPairModel::indicator(stats.n_items());
    TrainConfig tc;
    tc.mode = LossMode::mc;
    tc.k_cp = setting.k_cp;
    tc.k_s = setting.k_s;
    tc.k_r = setting.k_r;
    tc.learning_rate = config.learning_rate;
    tc.max_epochs = config.epochs;
    tc.seed = Rng::derive(config.synth.seed, 1000 + run);

    std::vector<double> h;
    int first_hit = -1;
    const MetricsCallback metrics = [&](const PairScorer& scorer,
                                        EpochRecord& rec) {
      score_all(scorer, oracle, h);
      rec.rmse = exp_rmse(h, oracle.cosine);
      const auto rho = try_spearman(h, oracle.log_cosine);
      rec.spearman =
          rho.value_or(std::numeric_limits<double>::quiet_NaN());
      if (first_hit < 0 && rho && *rho >= config.spearman_target) {
        first_hit = rec.epoch;
      }
    };
    rr.history = fit_model(model, stats, tc, metrics);
    rr.epochs_to_spearman_target = first_hit;

    score_all(model, oracle, h);
    rr.final_rmse = exp_rmse(h, oracle.cosine);
    std::vector<double> shifted(h.size()), err(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      shifted[i] = h[i] - rr.shift;
      err[i] = h[i] - oracle.log_cosine[i];
    }
    rr.final_rmse_shifted = rmse(shifted, oracle.log_cosine);
    rr.final_spearman =
        try_spearman(h, oracle.log_cosine)
            .value_or(std::numeric_limits<double>::quiet_NaN());
    rr.median_h_minus_log_cos = median_of(err);
    sweep.runs.push_back(std::move(rr));
  }
  return sweep;
}

void write_sweep_summary_json(const std::string& path,
                              const RatioSweepReport& report) {
  json j;
  j["matched_ratio"] = report.matched_ratio;
  j["total_pairs"] = report.total_pairs;
  j["z"] = report.z;
  double best_rmse = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    if (report.runs[i].final_rmse < best_rmse) {
      best_rmse = report.runs[i].final_rmse;
      best_index = i;
    }
  }
  json runs = json::array();
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const RatioRunReport& rr = report.runs[i];
    json r;
    r["multiplier"] = rr.multiplier;
    r["k_cp"] = rr.setting.k_cp;
    r["k_s"] = rr.setting.k_s;
    r["k_r"] = rr.setting.k_r;
    r["realized_ratio"] = rr.realized_ratio;
    r["shift"] = rr.shift;
    r["final_rmse"] = rr.final_rmse;
    r["final_rmse_shift_corrected"] = rr.final_rmse_shifted;
    r["final_spearman"] = rr.final_spearman;
    r["median_h_minus_log_cos"] = rr.median_h_minus_log_cos;
    r["epochs_to_spearman_target"] = rr.epochs_to_spearman_target;
    r["best_rmse"] = (i == best_index);
    r["history"] = history_tail_json(rr.history);
    runs.push_back(std::move(r));
  }
  j["runs"] = runs;
  j["metric_support"] = "pairs with n_cp > 0";
  dump_json(path, j);
}

// ---------------------------------------------------------------------------
// Content corpus.

namespace {

std::string theme_word(std::size_t c, std::size_t t, std::size_t j) {
  return "w" + std::to_string(c) + "_" + std::to_string(t) + "_" +
         std::to_string(j);
}
std::string cluster_word(std::size_t c, std::size_t j) {
  return "c" + std::to_string(c) + "_" + std::to_string(j);
}
std::string global_word(std::size_t j) { return "g" + std::to_string(j); }

constexpr std::size_t kThemeVocab = 6;
constexpr std::size_t kClusterVocab = 12;
constexpr std::size_t kGlobalVocab = 20;

}  // namespace

ContentCorpus generate_content_corpus(const ContentCorpusConfig& config) {
  if (config.n_clusters < 1 || config.items_per_cluster < 1 ||
      config.n_users < 1 || config.themes_per_cluster < 1) {
    throw ConfigError("content corpus counts must be >= 1");
  }
  if (config.min_purchases < 2 || config.max_purchases < config.min_purchases) {
    throw ConfigError("need 2 <= min_purchases <= max_purchases");
  }
  if (config.within_cluster_prob < 0.0 || config.within_cluster_prob > 1.0 ||
      config.within_theme_prob < 0.0 || config.within_theme_prob > 1.0) {
    throw ConfigError("corpus probabilities must lie in [0, 1]");
  }

  ContentCorpus corpus;
  corpus.schema.names = {"title", "aspects"};
  corpus.schema.sequential = {true, false};

  Rng rng(config.seed);
  const std::size_t n_items = config.n_clusters * config.items_per_cluster;
  corpus.items.reserve(n_items);
  std::vector<std::size_t> item_cluster(n_items), item_theme(n_items);
  for (std::size_t c = 0; c < config.n_clusters; ++c) {
    for (std::size_t i = 0; i < config.items_per_cluster; ++i) {
      const std::size_t idx = c * config.items_per_cluster + i;
      const std::size_t theme = i % config.themes_per_cluster;
      item_cluster[idx] = c;
      item_theme[idx] = theme;
      RawItem item;
      item.item_id = config.id_prefix + "_" + std::to_string(idx);
      std::vector<std::string> title;
      const std::size_t title_len = 3 + rng.below(3);
      title.push_back(theme_word(c, theme, rng.below(kThemeVocab)));
      for (std::size_t w = 1; w < title_len; ++w) {
        const double roll = rng.uniform();
        if (roll < 0.7) {
          title.push_back(theme_word(c, theme, rng.below(kThemeVocab)));
        } else if (roll < 0.9) {
          title.push_back(cluster_word(c, rng.below(kClusterVocab)));
        } else {
          title.push_back(global_word(rng.below(kGlobalVocab)));
        }
      }
      std::vector<std::string> aspects;
      const std::size_t n_aspects = 2 + rng.below(3);
      for (std::size_t w = 0; w < n_aspects; ++w) {
        const double roll = rng.uniform();
        if (roll < 0.6) {
          aspects.push_back(theme_word(c, theme, rng.below(kThemeVocab)));
        } else if (roll < 0.9) {
          aspects.push_back(cluster_word(c, rng.below(kClusterVocab)));
        } else {
          aspects.push_back(global_word(rng.below(kGlobalVocab)));
        }
      }
      item.features.emplace("title", std::move(title));
      item.features.emplace("aspects", std::move(aspects));
      corpus.items.push_back(std::move(item));
    }
  }

  // Users buy mostly inside a home cluster, and inside it mostly from a
  // home theme, with timestamps in purchase order.
  for (std::size_t u = 0; u < config.n_users; ++u) {
    const std::size_t home_cluster = rng.below(config.n_clusters);
    const std::size_t home_theme = rng.below(config.themes_per_cluster);
    const std::size_t n_p =
        config.min_purchases +
        rng.below(config.max_purchases - config.min_purchases + 1);
    const std::string user = "u" + std::to_string(u);
    for (std::size_t p = 0; p < n_p; ++p) {
      std::size_t idx;
      if (rng.bernoulli(config.within_cluster_prob)) {
        if (rng.bernoulli(config.within_theme_prob)) {
          // Items of the home theme within the home cluster are the indices
          // congruent to the theme modulo themes_per_cluster.
          const std::size_t theme_count =
              (config.items_per_cluster - home_theme - 1) /
                  config.themes_per_cluster +
              1;
          const std::size_t pick = rng.below(theme_count);
          idx = home_cluster * config.items_per_cluster + home_theme +
                pick * config.themes_per_cluster;
        } else {
          idx = home_cluster * config.items_per_cluster +
                rng.below(config.items_per_cluster);
        }
      } else {
        idx = rng.below(n_items);
      }
      corpus.records.push_back(
          {user, corpus.items[idx].item_id, static_cast<std::int64_t>(p)});
    }
  }
  return corpus;
}

void write_content_corpus(const ContentCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  save_catalog_jsonl((base / "catalog.jsonl").string(), corpus.items);
  save_transactions_tsv((base / "transactions.tsv").string(), corpus.records);
  save_schema_tsv((base / "schema.tsv").string(), corpus.schema);
}

// ---------------------------------------------------------------------------
// Experiment 3: end-to-end content-model ranking.

TrainConfig default_content_train() {
  TrainConfig tc;
  tc.mode = LossMode::per_seed;
  tc.k_cp = 20000;
  // With tanh hidden units, learning starts from a long plateau where the
  // network outputs one constant for every pair. Several negatives per seed
  // move that constant away from zero; gradient flow then parks it partly in
  // the hidden biases, and the resulting tanh curvature is what lets the
  // seed-candidate interaction grow out of the plateau. Keep k_r > 1 and the
  // patience longer than the plateau (~100 epochs at these settings) or
  // training stops before the model learns anything beyond popularity.
  tc.k_r = 4;
  tc.learning_rate = 0.3;
  tc.minibatch = 20;
  tc.max_epochs = 300;
  tc.patience = 150;
  tc.min_delta = 1e-5;
  tc.validation_fraction = 0.05;
  return tc;
}

ContentExperimentReport run_content_experiment(
    const ContentExperimentConfig& config) {
  ContentExperimentConfig cfg = config;
  cfg.train_corpus.seed = Rng::derive(config.seed, seed_stream::corpus);
  cfg.eval_corpus.seed = Rng::derive(config.seed, seed_stream::corpus + 1);

  const ContentCorpus train_corpus = generate_content_corpus(cfg.train_corpus);
  const ContentCorpus eval_corpus = generate_content_corpus(cfg.eval_corpus);

  ItemRegistry registry;
  ItemCatalog catalog(train_corpus.schema);
  for (const RawItem& item : train_corpus.items) {
    catalog.add_item(registry.intern(item.item_id), item);
  }
  const std::size_t n_train_items = registry.size();
  catalog.freeze();
  for (const RawItem& item : eval_corpus.items) {
    catalog.add_item(registry.intern(item.item_id), item);
  }

  const TransactionLog train_log =
      ingest_transactions(train_corpus.records, registry);
  const CooccurrenceStats train_stats =
      CooccurrenceStats::from_log(train_log, registry.size());

  TrainConfig tc = cfg.train;
  tc.seed = Rng::derive(cfg.seed, seed_stream::train);

  ContentExperimentReport report;
  report.n_train_items = n_train_items;
  report.n_eval_items = registry.size() - n_train_items;
  report.train_total_pairs = train_stats.total_pairs();

  // The scorer evaluated at the end; kept alive through the branches below.
  std::unique_ptr<PairScorer> scorer;
  DcfModel dcf;
  ContentPairFeaturizer featurizer(catalog);
  if (cfg.arch == "linear") {
    auto linear = std::make_unique<LinearPairModel>(
        LinearPairModel::content(LinearModel(featurizer.dim()), featurizer));
    report.history = fit_model(*linear, train_stats, tc);
    scorer = std::move(linear);
  } else if (cfg.arch == "dcf-mean" || cfg.arch == "dcf-rnn") {
    DcfConfig mc;
    mc.schema = train_corpus.schema;
    mc.vocab_sizes = catalog.vocab_sizes();
    mc.token_dim = cfg.token_dim;
    mc.rnn_hidden = cfg.rnn_hidden;
    mc.item_dim = cfg.item_dim;
    mc.head_hidden = cfg.head_hidden;
    mc.use_rnn = cfg.arch == "dcf-rnn";
    mc.tied = cfg.tied;
    dcf = DcfModel::init(mc, Rng::derive(cfg.seed, seed_stream::init));
    auto pair_model = std::make_unique<DcfPairModel>(dcf, catalog);
    report.history = fit_model(*pair_model, train_stats, tc);
    scorer = std::move(pair_model);
  } else {
    throw ConfigError("unknown architecture '" + cfg.arch + "'");
  }

  // Evaluation task from the disjoint corpus: seeds drawn by co-purchase
  // frequency, ranked against a shared random pool.
  const TransactionLog eval_log =
      ingest_transactions(eval_corpus.records, registry);
  const CooccurrenceStats eval_stats =
      CooccurrenceStats::from_log(eval_log, registry.size());
  if (eval_stats.pairs().empty()) {
    throw DomainError("evaluation corpus produced no co-purchases");
  }
  std::vector<double> weights;
  weights.reserve(eval_stats.pairs().size());
  for (const auto& kv : eval_stats.pairs()) {
    weights.push_back(static_cast<double>(kv.second));
  }
  CategoricalSampler pair_pick(std::move(weights),
                               Rng::derive(cfg.seed, seed_stream::eval));
  std::unordered_set<PairKey> chosen;
  std::vector<std::pair<ItemId, ItemId>> eval_pairs;
  const std::size_t want =
      std::min(cfg.n_eval_seeds, eval_stats.pairs().size());
  for (std::size_t attempts = 0;
       eval_pairs.size() < want && attempts < 1000 * want; ++attempts) {
    const PairKey key = eval_stats.pairs()[pair_pick.draw()].first;
    if (chosen.insert(key).second) {
      eval_pairs.emplace_back(pair_seed(key), pair_cand(key));
    }
  }
  std::sort(eval_pairs.begin(), eval_pairs.end());

  std::unordered_set<ItemId> train_items;
  std::vector<ItemId> universe;
  for (ItemId t = 0; t < registry.size(); ++t) {
    if (t < n_train_items) {
      train_items.insert(t);
    } else {
      universe.push_back(t);
    }
  }
  const RankingTask task = build_ranking_task(
      train_items, eval_pairs, universe, cfg.pool_size, cfg.seed);

  report.model = evaluate_ranking(*scorer, task, cfg.ks, cfg.eval_workers);
  LinearPairModel untrained =
      LinearPairModel::content(LinearModel(featurizer.dim()), featurizer);
  report.untrained =
      evaluate_ranking(untrained, task, cfg.ks, cfg.eval_workers);

  const int k = cfg.ks.empty() ? 30 : cfg.ks.front();
  const double pool_plus_one = static_cast<double>(cfg.pool_size) + 1.0;
  report.baseline_recall_at_k = static_cast<double>(k) / pool_plus_one;
  double harmonic = 0.0;
  for (std::size_t i = 1; i <= cfg.pool_size + 1; ++i) {
    harmonic += 1.0 / static_cast<double>(i);
  }
  report.baseline_mrr = harmonic / pool_plus_one;
  return report;
}

void write_content_summary_json(const std::string& path,
                                const ContentExperimentReport& report,
                                const ContentExperimentConfig& config) {
  json j;
  j["arch"] = config.arch;
  j["n_train_items"] = report.n_train_items;
  j["n_eval_items"] = report.n_eval_items;
  j["train_total_pairs"] = report.train_total_pairs;
  j["pool_size"] = report.model.pool_size;
  j["n_seeds"] = report.model.n_seeds;
  json recall = json::object();
  for (const auto& [k, v] : report.model.recall) {
    recall[std::to_string(k)] = v;
  }
  j["recall"] = recall;
  j["mrr"] = report.model.mrr;
  json untrained_recall = json::object();
  for (const auto& [k, v] : report.untrained.recall) {
    untrained_recall[std::to_string(k)] = v;
  }
  j["untrained_recall"] = untrained_recall;
  j["untrained_mrr"] = report.untrained.mrr;
  j["baseline_recall_at_k"] = report.baseline_recall_at_k;
  j["baseline_mrr"] = report.baseline_mrr;
  j["history"] = history_tail_json(report.history);
  dump_json(path, j);
}

}  // namespace sparsecf
