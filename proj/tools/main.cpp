// sparsecf: co-purchase similarity models and experiments.
//
// Subcommands: synth-gen, validate-objective, ratio-sweep, train, evaluate,
// neighbors.  Every run writes its resolved configuration next to its
// outputs; identical flags + seeds produce byte-identical files.
// Exit codes: 0 success, 1 runtime or acceptance-check failure, 2 usage or
// configuration error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sparsecf/corpus.hpp"
#include "sparsecf/eval.hpp"
#include "sparsecf/log.hpp"
#include "sparsecf/nn.hpp"
#include "sparsecf/objective.hpp"
#include "sparsecf/rng.hpp"
#include "sparsecf/synth.hpp"
#include "sparsecf/train.hpp"
#include "sparsecf/types.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sparsecf;

namespace {

struct CommonOpts {
  std::uint64_t seed = 0;
  std::string out = ".";
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--seed", opts.seed, "Master random seed")
      ->capture_default_str();
  cmd->add_option("--out", opts.out, "Output directory")
      ->capture_default_str();
  cmd->add_option("--workers", opts.workers, "Worker threads (evaluation)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void write_resolved_config(const CLI::App& app, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "resolved_config.ini");
  if (!out) throw ConfigError("cannot write resolved config in " + out_dir);
  out << app.config_to_str(true, true);
}

void dump_json_file(const fs::path& path, const json& obj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << obj.dump(2) << '\n';
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Loads schema + catalog + transactions, interning catalog items first so
// their ids are dense and stable, then checks every transacted item has
// catalog features.
struct LoadedCorpus {
  ItemRegistry registry;
  FeatureSchema schema;
  std::unique_ptr<ItemCatalog> catalog;
  std::vector<RawItem> raw_items;
  TransactionLog log;
  std::size_t n_catalog_items = 0;
};

LoadedCorpus load_corpus(const std::string& schema_path,
                         const std::string& catalog_path,
                         const std::string& transactions_path) {
  LoadedCorpus c;
  c.schema = load_schema_tsv(schema_path);
  c.raw_items = load_catalog_jsonl(catalog_path);
  c.catalog = std::make_unique<ItemCatalog>(c.schema);
  for (const RawItem& item : c.raw_items) {
    c.catalog->add_item(c.registry.intern(item.item_id), item);
  }
  c.n_catalog_items = c.registry.size();
  c.catalog->freeze();
  if (!transactions_path.empty()) {
    const auto records = load_transactions_tsv(transactions_path);
    c.log = ingest_transactions(records, c.registry);
    for (ItemId t = c.n_catalog_items; t < c.registry.size(); ++t) {
      throw IngestError("transactions reference item '" + c.registry.name(t) +
                        "' missing from the catalog");
    }
  }
  return c;
}

json stats_summary(const CooccurrenceStats& stats, double density) {
  json j;
  j["n_items"] = stats.n_items();
  j["total_pairs"] = stats.total_pairs();
  j["distinct_pairs"] = stats.pairs().size();
  j["total_purchases"] = stats.total_purchases();
  j["z"] = stats.z();
  j["matched_ratio"] =
      stats.total_pairs() > 0
          ? static_cast<double>(stats.total_pairs()) / (stats.z() * stats.z())
          : 0.0;
  j["density"] = density;
  return j;
}

// ---------------------------------------------------------------------------
// synth-gen

int cmd_synth_gen(const CommonOpts& common, const SyntheticConfig& synth_in,
                  bool content, const ContentCorpusConfig& corpus_in,
                  const CLI::App& app) {
  write_resolved_config(app, common.out);
  if (content) {
    ContentCorpusConfig cc = corpus_in;
    cc.seed = common.seed;
    const ContentCorpus corpus = generate_content_corpus(cc);
    write_content_corpus(corpus, common.out);
    ItemRegistry registry;
    const TransactionLog log = ingest_transactions(corpus.records, registry);
    const auto stats = CooccurrenceStats::from_log(log, registry.size());
    json j = stats_summary(stats, 0.0);
    j.erase("density");
    j["n_users"] = log.n_users;
    j["n_clusters"] = cc.n_clusters;
    dump_json_file(fs::path(common.out) / "stats_summary.json", j);
    std::printf("content corpus: %zu items, %zu users, %lld co-purchases\n",
                registry.size(), log.n_users,
                static_cast<long long>(stats.total_pairs()));
    return 0;
  }
  SyntheticConfig sc = synth_in;
  sc.seed = common.seed;
  const FeedbackMatrix matrix = generate_feedback(sc);
  const auto stats = matrix_to_stats(matrix);
  if (stats.total_pairs() == 0) {
    SCF_WARN("no co-purchases in the generated matrix (items=%zu)",
             sc.n_items);
  }
  json j = stats_summary(stats, matrix.density());
  j["n_users"] = sc.n_users;
  dump_json_file(fs::path(common.out) / "stats_summary.json", j);
  std::printf("matrix %zux%zu density %.4f, %lld co-purchases, z %.4f\n",
              sc.n_users, sc.n_items, matrix.density(),
              static_cast<long long>(stats.total_pairs()), stats.z());
  return 0;
}

// ---------------------------------------------------------------------------
// validate-objective

int cmd_validate_objective(const CommonOpts& common, ConvergenceConfig config,
                           bool check, double max_rmse, double min_spearman,
                           const CLI::App& app) {
  write_resolved_config(app, common.out);
  config.synth.seed = common.seed;
  const ConvergenceReport report = run_convergence_experiment(config);
  write_history_csv((fs::path(common.out) / "history.csv").string(),
                    report.history);
  write_convergence_summary_json(
      (fs::path(common.out) / "convergence_summary.json").string(), report);
  std::printf("final rmse(exp(h), cosine) = %s\n", fmt17(report.final_rmse).c_str());
  std::printf("final spearman(h, log cosine) = %s\n",
              fmt17(report.final_spearman).c_str());
  if (check) {
    const bool ok = report.final_rmse <= max_rmse &&
                    report.final_spearman >= min_spearman;
    std::printf("check %s (rmse <= %g: %s, spearman >= %g: %s)\n",
                ok ? "passed" : "FAILED", max_rmse,
                report.final_rmse <= max_rmse ? "yes" : "no", min_spearman,
                report.final_spearman >= min_spearman ? "yes" : "no");
    return ok ? 0 : 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// ratio-sweep

int cmd_ratio_sweep(const CommonOpts& common, RatioSweepConfig config,
                    const CLI::App& app) {
  write_resolved_config(app, common.out);
  config.synth.seed = common.seed;
  const RatioSweepReport report = run_ratio_sweep(config);
  for (const RatioRunReport& run : report.runs) {
    char name[64];
    std::snprintf(name, sizeof(name), "ratio_%g.csv", run.multiplier);
    write_history_csv((fs::path(common.out) / name).string(), run.history);
  }
  write_sweep_summary_json(
      (fs::path(common.out) / "sweep_summary.json").string(), report);
  for (const RatioRunReport& run : report.runs) {
    std::printf(
        "multiplier %g: rmse %s, spearman %s, median shift error %s\n",
        run.multiplier, fmt17(run.final_rmse).c_str(),
        fmt17(run.final_spearman).c_str(),
        fmt17(run.median_h_minus_log_cos - run.shift).c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  std::string transactions, catalog, schema;
  std::string arch = "dcf-mean";
  std::string mode = "per_seed";
  TrainConfig train;
  std::size_t token_dim = 16;
  std::size_t rnn_hidden = 16;
  std::size_t item_dim = 32;
  std::size_t head_hidden = 64;
  bool tied = false;
};

int cmd_train(const CommonOpts& common, const TrainOpts& opts,
              const CLI::App& app) {
  write_resolved_config(app, common.out);
  LoadedCorpus corpus =
      load_corpus(opts.schema, opts.catalog, opts.transactions);
  const auto stats =
      CooccurrenceStats::from_log(corpus.log, corpus.registry.size());

  TrainConfig tc = opts.train;
  if (opts.mode == "full") {
    tc.mode = LossMode::full;
  } else if (opts.mode == "mc") {
    tc.mode = LossMode::mc;
  } else if (opts.mode == "per_seed") {
    tc.mode = LossMode::per_seed;
  } else {
    throw ConfigError("unknown loss mode '" + opts.mode + "'");
  }
  tc.seed = Rng::derive(common.seed, seed_stream::train);

  const fs::path out_dir(common.out);
  TrainHistory history;
  if (opts.arch == "linear") {
    ContentPairFeaturizer featurizer(*corpus.catalog);
    LinearPairModel model =
        LinearPairModel::content(LinearModel(featurizer.dim()), featurizer);
    history = fit_model(model, stats, tc);
    LinearModelMeta meta;
    meta.featurizer = "content";
    meta.vocab_sizes = corpus.catalog->vocab_sizes();
    save_linear_model((out_dir / "model.bin").string(), model.model(), meta);
  } else if (opts.arch == "dcf-mean" || opts.arch == "dcf-rnn") {
    DcfConfig mc;
    mc.schema = corpus.schema;
    mc.vocab_sizes = corpus.catalog->vocab_sizes();
    mc.token_dim = opts.token_dim;
    mc.rnn_hidden = opts.rnn_hidden;
    mc.item_dim = opts.item_dim;
    mc.head_hidden = opts.head_hidden;
    mc.use_rnn = opts.arch == "dcf-rnn";
    mc.tied = opts.tied;
    DcfModel model =
        DcfModel::init(mc, Rng::derive(common.seed, seed_stream::init));
    DcfPairModel pair_model(model, *corpus.catalog);
    history = fit_model(pair_model, stats, tc);
    save_dcf_model((out_dir / "model.bin").string(), model);
  } else {
    throw ConfigError("unknown architecture '" + opts.arch + "'");
  }
  write_history_csv((out_dir / "history.csv").string(), history);
  std::printf("trained %s for %zu epochs (best %d), model at %s\n",
              opts.arch.c_str(), history.epochs.size(), history.best_epoch,
              (out_dir / "model.bin").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOpts {
  std::string model;
  std::string arch;  // "random" for the baseline scorer; empty -> --model
  std::string catalog, schema;
  std::string eval_catalog, eval_transactions;
  std::size_t pool_size = 5000;
  std::size_t n_seeds = 100;
  std::vector<int> ks = {1, 10, 30};
};

int cmd_evaluate(const CommonOpts& common, const EvaluateOpts& opts,
                 const CLI::App& app) {
  write_resolved_config(app, common.out);
  LoadedCorpus corpus = load_corpus(opts.schema, opts.catalog, "");
  // Items the model may be asked to score cold-start.
  std::vector<RawItem> eval_items = load_catalog_jsonl(opts.eval_catalog);
  for (const RawItem& item : eval_items) {
    corpus.catalog->add_item(corpus.registry.intern(item.item_id), item);
  }
  const auto records = load_transactions_tsv(opts.eval_transactions);
  const TransactionLog eval_log =
      ingest_transactions(records, corpus.registry);
  const auto eval_stats =
      CooccurrenceStats::from_log(eval_log, corpus.registry.size());
  if (eval_stats.pairs().empty()) {
    throw ConfigError("evaluation transactions produced no co-purchases");
  }

  std::unique_ptr<PairScorer> scorer;
  DcfModel dcf;
  LinearModel linear;
  std::unique_ptr<ContentPairFeaturizer> featurizer;
  if (opts.arch == "random") {
    scorer = std::make_unique<RandomScorer>(common.seed);
  } else if (opts.arch == "zero") {
    featurizer = std::make_unique<ContentPairFeaturizer>(*corpus.catalog);
    scorer = std::make_unique<LinearPairModel>(LinearPairModel::content(
        LinearModel(featurizer->dim()), *featurizer));
  } else if (!opts.model.empty()) {
    const std::string kind = peek_model_kind(opts.model);
    if (kind == "dcf") {
      dcf = load_dcf_model(opts.model);
      if (dcf.config().vocab_sizes != corpus.catalog->vocab_sizes()) {
        throw ConfigError(
            "model vocabulary does not match the supplied catalog");
      }
      scorer = std::make_unique<DcfPairModel>(dcf, *corpus.catalog);
    } else {
      auto [lin, meta] = load_linear_model(opts.model);
      linear = std::move(lin);
      if (meta.featurizer == "content") {
        if (meta.vocab_sizes != corpus.catalog->vocab_sizes()) {
          throw ConfigError(
              "model vocabulary does not match the supplied catalog");
        }
        featurizer = std::make_unique<ContentPairFeaturizer>(*corpus.catalog);
        scorer = std::make_unique<LinearPairModel>(
            LinearPairModel::content(std::move(linear), *featurizer));
      } else {
        IndicatorPairFeaturizer ind(meta.n_items);
        scorer = std::make_unique<LinearPairModel>(LinearPairModel(
            std::move(linear),
            [ind](ItemId s, ItemId r, std::vector<std::uint64_t>& out) {
              out.assign(1, ind.feature(s, r));
            }));
      }
    }
  } else {
    throw ConfigError("evaluate needs --model or --arch random|zero");
  }

  // Seed pairs drawn by co-purchase frequency from the evaluation log.
  std::vector<double> weights;
  for (const auto& kv : eval_stats.pairs()) {
    weights.push_back(static_cast<double>(kv.second));
  }
  CategoricalSampler pick(std::move(weights),
                          Rng::derive(common.seed, seed_stream::eval));
  std::unordered_set<PairKey> chosen;
  std::vector<std::pair<ItemId, ItemId>> eval_pairs;
  const std::size_t want = std::min(opts.n_seeds, eval_stats.pairs().size());
  for (std::size_t attempts = 0;
       eval_pairs.size() < want && attempts < 1000 * want; ++attempts) {
    const PairKey key = eval_stats.pairs()[pick.draw()].first;
    if (chosen.insert(key).second) {
      eval_pairs.emplace_back(pair_seed(key), pair_cand(key));
    }
  }
  std::sort(eval_pairs.begin(), eval_pairs.end());

  std::unordered_set<ItemId> train_items;
  for (ItemId t = 0; t < corpus.n_catalog_items; ++t) train_items.insert(t);
  std::vector<ItemId> universe;
  for (ItemId t = corpus.n_catalog_items; t < corpus.registry.size(); ++t) {
    universe.push_back(t);
  }
  const RankingTask task = build_ranking_task(
      train_items, eval_pairs, universe, opts.pool_size, common.seed);
  const RankingReport report =
      evaluate_ranking(*scorer, task, opts.ks, common.workers);
  write_ranking_report_json(
      (fs::path(common.out) / "ranking_report.json").string(), report);
  for (const auto& [k, v] : report.recall) {
    std::printf("recall@%d = %s\n", k, fmt17(v).c_str());
  }
  std::printf("mrr = %s over %zu seeds, pool %zu\n", fmt17(report.mrr).c_str(),
              report.n_seeds, report.pool_size);
  return 0;
}

// ---------------------------------------------------------------------------
// neighbors

struct NeighborsOpts {
  std::string model, catalog, schema;
  std::string item;
  std::vector<std::size_t> positions = {0,     10,    100,   1000,
                                        10000, 20000, 50000, 100000};
};

int cmd_neighbors(const CommonOpts& common, const NeighborsOpts& opts,
                  const CLI::App& app) {
  write_resolved_config(app, common.out);
  LoadedCorpus corpus = load_corpus(opts.schema, opts.catalog, "");
  const auto anchor = corpus.registry.find(opts.item);
  if (!anchor) {
    throw ConfigError("item '" + opts.item + "' not found in the catalog");
  }
  DcfModel model = load_dcf_model(opts.model);
  if (model.config().vocab_sizes != corpus.catalog->vocab_sizes()) {
    throw ConfigError("model vocabulary does not match the supplied catalog");
  }
  std::vector<ItemId> universe;
  for (ItemId t = 0; t < corpus.n_catalog_items; ++t) universe.push_back(t);
  std::vector<std::size_t> positions;
  for (std::size_t p : opts.positions) {
    if (p < universe.size()) positions.push_back(p);
  }
  const auto entries = nearest_neighbors(model, *corpus.catalog, *anchor,
                                         universe, positions);

  // Human-readable titles come from the raw catalog records.
  auto title_of = [&corpus](ItemId id) -> std::string {
    const RawItem& raw = corpus.raw_items[id];
    auto it = raw.features.find("title");
    if (it == raw.features.end()) return "";
    std::string title;
    for (const std::string& tok : it->second) {
      if (!title.empty()) title += ' ';
      title += tok;
    }
    return title;
  };
  const fs::path out_path = fs::path(common.out) / "neighbors.tsv";
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot write " + out_path.string());
  out << "position\titem_id\ttitle\tdistance\n";
  for (const NeighborEntry& e : entries) {
    out << e.position << '\t' << corpus.registry.name(e.item) << '\t'
        << title_of(e.item) << '\t' << fmt17(e.distance) << '\n';
  }
  std::printf("wrote %zu neighbor rows to %s\n", entries.size(),
              out_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse implicit-feedback co-purchase models"};
  app.require_subcommand(1);
  argv = app.ensure_utf8(argv);

  // synth-gen
  CommonOpts sg_common;
  SyntheticConfig sg_synth;
  bool sg_content = false;
  ContentCorpusConfig sg_corpus;
  auto* sg = app.add_subcommand("synth-gen",
                                "Generate synthetic feedback or a content corpus");
  add_common(sg, sg_common);
  sg->add_option("--items", sg_synth.n_items, "Items in the feedback matrix")
      ->capture_default_str();
  sg->add_option("--users", sg_synth.n_users, "Users in the feedback matrix")
      ->capture_default_str();
  sg->add_option("--p-low", sg_synth.p_low, "Lower item probability bound")
      ->capture_default_str();
  sg->add_option("--p-high", sg_synth.p_high, "Upper item probability bound")
      ->capture_default_str();
  sg->add_flag("--content", sg_content,
               "Emit a clustered content corpus instead of a matrix");
  sg->add_option("--clusters", sg_corpus.n_clusters, "Content clusters")
      ->capture_default_str();
  sg->add_option("--items-per-cluster", sg_corpus.items_per_cluster,
                 "Items per cluster")
      ->capture_default_str();
  sg->add_option("--corpus-users", sg_corpus.n_users, "Simulated users")
      ->capture_default_str();
  sg->add_option("--prefix", sg_corpus.id_prefix, "Item id prefix")
      ->capture_default_str();

  // validate-objective
  CommonOpts vo_common;
  ConvergenceConfig vo_config;
  bool vo_check = false;
  double vo_max_rmse = 1e-3, vo_min_spearman = 0.999;
  auto* vo = app.add_subcommand(
      "validate-objective",
      "Train the exact loss on synthetic data and compare with the oracle");
  add_common(vo, vo_common);
  vo->add_option("--items", vo_config.synth.n_items, "Items")
      ->capture_default_str();
  vo->add_option("--users", vo_config.synth.n_users, "Users")
      ->capture_default_str();
  vo->add_option("--epochs", vo_config.epochs, "Training epochs")
      ->capture_default_str();
  vo->add_option("--lr", vo_config.learning_rate, "Learning rate")
      ->capture_default_str();
  vo->add_option("--pair-mass", vo_config.full_pair_mass,
                 "Per-pair combined update weight")
      ->capture_default_str();
  vo->add_flag("--check", vo_check, "Exit 1 unless thresholds are met");
  vo->add_option("--max-rmse", vo_max_rmse, "Threshold for --check")
      ->capture_default_str();
  vo->add_option("--min-spearman", vo_min_spearman, "Threshold for --check")
      ->capture_default_str();

  // ratio-sweep
  CommonOpts rs_common;
  RatioSweepConfig rs_config;
  auto* rs = app.add_subcommand(
      "ratio-sweep", "Sweep sampling ratios of the subsampled loss");
  add_common(rs, rs_common);
  rs->add_option("--items", rs_config.synth.n_items, "Items")
      ->capture_default_str();
  rs->add_option("--users", rs_config.synth.n_users, "Users")
      ->capture_default_str();
  rs->add_option("--k-cp", rs_config.k_cp, "Positive samples per epoch")
      ->capture_default_str();
  rs->add_option("--multipliers", rs_config.multipliers,
                 "Swept multiples of the matched ratio")
      ->delimiter(',')
      ->capture_default_str();
  rs->add_option("--lr", rs_config.learning_rate, "Learning rate")
      ->capture_default_str();
  rs->add_option("--epochs", rs_config.epochs, "Training epochs")
      ->capture_default_str();

  // train
  CommonOpts tr_common;
  TrainOpts tr;
  auto* tr_cmd =
      app.add_subcommand("train", "Train a model on transaction files");
  add_common(tr_cmd, tr_common);
  tr_cmd->add_option("--transactions", tr.transactions, "Transactions TSV")
      ->required();
  tr_cmd->add_option("--catalog", tr.catalog, "Item catalog JSONL")->required();
  tr_cmd->add_option("--schema", tr.schema, "Feature schema TSV")->required();
  tr_cmd->add_option("--arch", tr.arch, "linear | dcf-mean | dcf-rnn")
      ->check(CLI::IsMember({"linear", "dcf-mean", "dcf-rnn"}))
      ->capture_default_str();
  tr_cmd->add_option("--mode", tr.mode, "full | mc | per_seed")
      ->check(CLI::IsMember({"full", "mc", "per_seed"}))
      ->capture_default_str();
  tr.train = default_content_train();
  tr_cmd->add_option("--k-cp", tr.train.k_cp, "Positives per epoch")
      ->capture_default_str();
  tr_cmd->add_option("--k-s", tr.train.k_s, "Negative seed draws per epoch")
      ->capture_default_str();
  tr_cmd->add_option("--k-r", tr.train.k_r, "Negatives per seed")
      ->capture_default_str();
  tr_cmd->add_option("--lr", tr.train.learning_rate, "Learning rate")
      ->capture_default_str();
  tr_cmd->add_option("--epochs", tr.train.max_epochs, "Epoch cap")
      ->capture_default_str();
  tr_cmd->add_option("--patience", tr.train.patience,
                     "Early-stopping patience (epochs)")
      ->capture_default_str();
  tr_cmd->add_option("--min-delta", tr.train.min_delta,
                     "Minimum validation improvement")
      ->capture_default_str();
  tr_cmd->add_option("--val-fraction", tr.train.validation_fraction,
                     "Held-out share of distinct co-purchase pairs")
      ->capture_default_str();
  tr_cmd->add_option("--minibatch", tr.train.minibatch, "Updates per step")
      ->capture_default_str();
  tr_cmd->add_option("--pair-mass", tr.train.full_pair_mass,
                     "Full mode: combined per-pair update weight")
      ->capture_default_str();
  tr_cmd->add_option("--token-dim", tr.token_dim, "Token embedding size")
      ->capture_default_str();
  tr_cmd->add_option("--rnn-hidden", tr.rnn_hidden, "Recurrent state size")
      ->capture_default_str();
  tr_cmd->add_option("--item-dim", tr.item_dim, "Item embedding size")
      ->capture_default_str();
  tr_cmd->add_option("--head-hidden", tr.head_hidden, "Head hidden size")
      ->capture_default_str();
  tr_cmd->add_flag("--tied", tr.tied, "Share embedder parameters across sides");

  // evaluate
  CommonOpts ev_common;
  EvaluateOpts ev;
  auto* ev_cmd = app.add_subcommand(
      "evaluate", "Rank held-out co-purchases against a random pool");
  add_common(ev_cmd, ev_common);
  ev_cmd->add_option("--model", ev.model, "Trained model file");
  // Accepts the empty default so recorded configs reload cleanly.
  ev_cmd->add_option("--arch", ev.arch,
                     "Baseline scorer instead of --model: random | zero")
      ->check(CLI::Validator(
          [](std::string& s) -> std::string {
            if (s.empty() || s == "random" || s == "zero") return {};
            return "'" + s + "' is not one of random, zero";
          },
          "{random,zero}"));
  ev_cmd->add_option("--catalog", ev.catalog, "Training catalog JSONL")
      ->required();
  ev_cmd->add_option("--schema", ev.schema, "Feature schema TSV")->required();
  ev_cmd->add_option("--eval-catalog", ev.eval_catalog,
                     "Catalog of evaluation items (disjoint from training)")
      ->required();
  ev_cmd->add_option("--eval-transactions", ev.eval_transactions,
                     "Transactions over evaluation items")
      ->required();
  ev_cmd->add_option("--pool-size", ev.pool_size, "Candidate pool size")
      ->capture_default_str();
  ev_cmd->add_option("--n-seeds", ev.n_seeds, "Seed pairs to evaluate")
      ->capture_default_str();
  ev_cmd->add_option("--k", ev.ks, "Recall cutoffs")
      ->delimiter(',')
      ->capture_default_str();

  // neighbors
  CommonOpts nb_common;
  NeighborsOpts nb;
  auto* nb_cmd = app.add_subcommand(
      "neighbors", "List items by embedding distance from an anchor");
  add_common(nb_cmd, nb_common);
  nb_cmd->add_option("--model", nb.model, "Trained dcf model file")->required();
  nb_cmd->add_option("--catalog", nb.catalog, "Catalog JSONL")->required();
  nb_cmd->add_option("--schema", nb.schema, "Feature schema TSV")->required();
  nb_cmd->add_option("--item", nb.item, "Anchor item id")->required();
  nb_cmd->add_option("--positions", nb.positions,
                     "Sorted-distance positions to report")
      ->delimiter(',')
      ->capture_default_str();

  app.set_config("--config", "", "Read options from an INI file");
  app.allow_config_extras(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sg->parsed()) {
      return cmd_synth_gen(sg_common, sg_synth, sg_content, sg_corpus, app);
    }
    if (vo->parsed()) {
      return cmd_validate_objective(vo_common, vo_config, vo_check,
                                    vo_max_rmse, vo_min_spearman, app);
    }
    if (rs->parsed()) return cmd_ratio_sweep(rs_common, rs_config, app);
    if (tr_cmd->parsed()) return cmd_train(tr_common, tr, app);
    if (ev_cmd->parsed()) return cmd_evaluate(ev_common, ev, app);
    if (nb_cmd->parsed()) return cmd_neighbors(nb_common, nb, app);
  } catch (const ConfigError& e) {
    SCF_ERROR("%s", e.what());
    return 2;
  } catch (const std::exception& e) {
    SCF_ERROR("%s", e.what());
    return 1;
  }
  return 2;
}
