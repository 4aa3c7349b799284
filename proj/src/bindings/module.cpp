// Python bindings for the core operations: objective math, transaction
// ingestion and co-purchase statistics, model loading and scoring, and the
// synthetic convergence experiment.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "sparsecf/corpus.hpp"
#include "sparsecf/eval.hpp"
#include "sparsecf/nn.hpp"
#include "sparsecf/objective.hpp"
#include "sparsecf/rng.hpp"
#include "sparsecf/synth.hpp"
#include "sparsecf/train.hpp"
#include "sparsecf/types.hpp"

namespace py = pybind11;
using namespace sparsecf;

namespace {

// Transactions -> interned stats, keeping the registry for name lookups.
class Dataset {
 public:
  explicit Dataset(
      const std::vector<std::tuple<std::string, std::string, std::int64_t>>&
          records) {
    std::vector<RawRecord> raw;
    raw.reserve(records.size());
    for (const auto& [user, item, ts] : records) {
      raw.push_back({user, item, ts});
    }
    log_ = ingest_transactions(raw, registry_);
    stats_ = std::make_unique<CooccurrenceStats>(
        CooccurrenceStats::from_log(log_, registry_.size()));
  }

  ItemId require(const std::string& name) const {
    const auto id = registry_.find(name);
    if (!id) throw DomainError("unknown item '" + name + "'");
    return *id;
  }

  std::size_t n_items() const { return registry_.size(); }
  std::size_t n_users() const { return log_.n_users; }
  std::int64_t total_pairs() const { return stats_->total_pairs(); }
  std::int64_t total_purchases() const { return stats_->total_purchases(); }
  double z() const { return stats_->z(); }
  std::int64_t item_count(const std::string& name) const {
    return stats_->item_count(require(name));
  }
  std::int64_t pair_count(const std::string& seed,
                          const std::string& cand) const {
    return stats_->pair_count(require(seed), require(cand));
  }
  double cosine(const std::string& seed, const std::string& cand) const {
    return cosine_score(*stats_, require(seed), require(cand));
  }
  std::vector<std::string> items() const {
    std::vector<std::string> names;
    for (ItemId t = 0; t < registry_.size(); ++t) {
      names.push_back(registry_.name(t));
    }
    return names;
  }

 private:
  ItemRegistry registry_;
  TransactionLog log_;
  std::unique_ptr<CooccurrenceStats> stats_;
};

// A trained model file bound to its catalog, scoring items by string id.
class LoadedModel {
 public:
  LoadedModel(const std::string& model_path, const std::string& schema_path,
              const std::string& catalog_path) {
    const FeatureSchema schema = load_schema_tsv(schema_path);
    const auto raw_items = load_catalog_jsonl(catalog_path);
    catalog_ = std::make_unique<ItemCatalog>(schema);
    for (const RawItem& item : raw_items) {
      catalog_->add_item(registry_.intern(item.item_id), item);
    }
    catalog_->freeze();
    kind_ = peek_model_kind(model_path);
    if (kind_ == "dcf") {
      dcf_ = load_dcf_model(model_path);
      if (dcf_.config().vocab_sizes != catalog_->vocab_sizes()) {
        throw ConfigError("model vocabulary does not match the catalog");
      }
      scorer_ = std::make_unique<DcfPairModel>(dcf_, *catalog_);
    } else {
      auto [linear, meta] = load_linear_model(model_path);
      if (meta.featurizer != "content") {
        throw ConfigError("only content linear models carry a catalog");
      }
      if (meta.vocab_sizes != catalog_->vocab_sizes()) {
        throw ConfigError("model vocabulary does not match the catalog");
      }
      ContentPairFeaturizer featurizer(*catalog_);
      scorer_ = std::make_unique<LinearPairModel>(
          LinearPairModel::content(std::move(linear), featurizer));
    }
  }

  ItemId require(const std::string& name) const {
    const auto id = registry_.find(name);
    if (!id) throw DomainError("unknown item '" + name + "'");
    return *id;
  }

  const std::string& kind() const { return kind_; }
  double score(const std::string& seed, const std::string& cand) const {
    return scorer_->score(require(seed), require(cand));
  }
  std::vector<double> embed(const std::string& item) const {
    if (kind_ != "dcf") throw DomainError("linear models have no embeddings");
    std::vector<double> out;
    dcf_.embed(catalog_->features(require(item)), out);
    return out;
  }

 private:
  ItemRegistry registry_;
  std::unique_ptr<ItemCatalog> catalog_;
  std::string kind_;
  DcfModel dcf_;
  std::unique_ptr<PairScorer> scorer_;
};

py::dict convergence_dict(const ConvergenceReport& r) {
  py::dict d;
  d["final_rmse"] = r.final_rmse;
  d["final_rmse_log"] = r.final_rmse_log;
  d["final_spearman"] = r.final_spearman;
  d["n_items"] = r.n_items;
  d["n_users"] = r.n_users;
  d["total_pairs"] = r.total_pairs;
  d["matched_ratio"] = r.matched_ratio;
  d["density"] = r.density;
  d["epochs"] = r.history.epochs.size();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Co-purchase similarity models for sparse implicit feedback";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<IngestError>(m, "IngestError");
  py::register_exception<DomainError>(m, "DomainError");
  py::register_exception<TrainError>(m, "TrainError");

  m.def("sigmoid", &sigmoid, py::arg("x"));
  m.def("log_sigmoid", &log_sigmoid, py::arg("x"));
  m.def(
      "pair_objective",
      [](double h, std::int64_t n_cp, std::int64_t n_d_s, std::int64_t n_d_r) {
        return pair_objective(h, n_cp, n_d_s, n_d_r);
      },
      py::arg("h"), py::arg("n_cp"), py::arg("n_d_s"), py::arg("n_d_r"),
      "Reward contribution of one ordered pair at score h");
  m.def(
      "optimal_h",
      [](std::int64_t n_cp, std::int64_t n_d_s,
         std::int64_t n_d_r) -> std::optional<double> {
        const OptimalH h = optimal_h(n_cp, n_d_s, n_d_r);
        if (h.is_neg_inf()) return std::nullopt;
        return h.value();
      },
      py::arg("n_cp"), py::arg("n_d_s"), py::arg("n_d_r"),
      "Maximising score: log of the co-purchase cosine, None when n_cp = 0");
  m.def("mc_shift", &mc_shift, py::arg("k_cp"), py::arg("k_s"), py::arg("k_r"),
        py::arg("z"), py::arg("total_pairs"),
        "Optimum offset induced by subsampled-loss sampling rates");

  py::class_<Dataset>(m, "Dataset",
                      "Co-purchase statistics over (user, item, timestamp) "
                      "transaction triples")
      .def(py::init<const std::vector<
               std::tuple<std::string, std::string, std::int64_t>>&>(),
           py::arg("records"))
      .def_property_readonly("n_items", &Dataset::n_items)
      .def_property_readonly("n_users", &Dataset::n_users)
      .def_property_readonly("total_pairs", &Dataset::total_pairs)
      .def_property_readonly("total_purchases", &Dataset::total_purchases)
      .def_property_readonly("z", &Dataset::z)
      .def("item_count", &Dataset::item_count, py::arg("item"))
      .def("pair_count", &Dataset::pair_count, py::arg("seed"),
           py::arg("cand"))
      .def("cosine", &Dataset::cosine, py::arg("seed"), py::arg("cand"))
      .def("items", &Dataset::items);

  py::class_<LoadedModel>(m, "Model",
                          "A trained model file bound to its catalog")
      .def(py::init<const std::string&, const std::string&,
                    const std::string&>(),
           py::arg("model_path"), py::arg("schema_path"),
           py::arg("catalog_path"))
      .def_property_readonly("kind", &LoadedModel::kind)
      .def("score", &LoadedModel::score, py::arg("seed"), py::arg("cand"))
      .def("embed", &LoadedModel::embed, py::arg("item"));

  m.def(
      "validate_objective",
      [](std::size_t n_users, std::size_t n_items, double p_low, double p_high,
         double learning_rate, int epochs, std::uint64_t seed) {
        ConvergenceConfig config;
        config.synth = {n_users, n_items, p_low, p_high, seed};
        config.learning_rate = learning_rate;
        config.epochs = epochs;
        return convergence_dict(run_convergence_experiment(config));
      },
      py::arg("n_users") = 10000, py::arg("n_items") = 100,
      py::arg("p_low") = 0.2, py::arg("p_high") = 0.8,
      py::arg("learning_rate") = 0.1, py::arg("epochs") = 200,
      py::arg("seed") = 0,
      "Train the exact loss on synthetic feedback; returns oracle-recovery "
      "metrics");
}
