#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sparsecf/corpus.hpp"
#include "sparsecf/types.hpp"

namespace sparsecf {

// Anything that scores ordered item pairs.  Scores are unbounded reals: they
// stand in for log-cosine, so no output squashing anywhere.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual double score(ItemId seed, ItemId cand) const = 0;
};

// ---------------------------------------------------------------------------
// Linear model over sparse binary pair features: h = sum of theta at the
// pair's active feature ids.

class LinearModel {
 public:
  LinearModel() = default;
  explicit LinearModel(std::size_t dim) : theta_(dim, 0.0) {}

  std::size_t dim() const { return theta_.size(); }
  double score(std::span<const std::uint64_t> features) const;
  void update(std::span<const std::uint64_t> features, double delta);

  std::vector<double>& theta() { return theta_; }
  const std::vector<double>& theta() const { return theta_; }

 private:
  std::vector<double> theta_;
};

// Pair (i, j) -> single active feature i * n_items + j.
class IndicatorPairFeaturizer {
 public:
  explicit IndicatorPairFeaturizer(std::size_t n_items);
  std::size_t n_items() const { return n_items_; }
  std::uint64_t dim() const { return n_items_ * n_items_; }
  std::uint64_t feature(ItemId i, ItemId j) const;  // DomainError out of range

 private:
  std::size_t n_items_;
};

// Pair -> indicator features of the seed's tokens (offset 0) and the
// candidate's tokens (offset = total vocab), across all feature sets.
class ContentPairFeaturizer {
 public:
  explicit ContentPairFeaturizer(const ItemCatalog& catalog);
  std::uint64_t dim() const { return 2 * total_vocab_; }
  void features(ItemId seed, ItemId cand,
                std::vector<std::uint64_t>& out) const;

 private:
  const ItemCatalog* catalog_;
  std::vector<std::uint64_t> set_offsets_;
  std::uint64_t total_vocab_;
};

// ---------------------------------------------------------------------------
// Building blocks of the content models.

enum class Activation { tanh_act, relu, identity };

struct EmbeddingTable {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> w;  // row-major [rows x dim]

  double* row(std::int32_t r) { return w.data() + static_cast<std::size_t>(r) * dim; }
  const double* row(std::int32_t r) const {
    return w.data() + static_cast<std::size_t>(r) * dim;
  }
};

// y = act(W x + b), W row-major [out x in].
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation act = Activation::identity;
  std::vector<double> w;
  std::vector<double> b;

  void forward(std::span<const double> x, std::vector<double>& y) const;
};

// Vanilla tanh recurrence h_t = tanh(W_in x_t + W_rec h_{t-1} + b), h_0 = 0.
struct RnnEncoder {
  std::size_t in = 0;
  std::size_t hidden = 0;
  std::vector<double> w_in;   // [hidden x in]
  std::vector<double> w_rec;  // [hidden x hidden]
  std::vector<double> b;
};

enum class Pooling { mean, rnn };

// Per-feature-set token tables feeding pooled vectors, concatenated, passed
// through tanh and a dense tanh layer to the item embedding.
struct ItemEmbedder {
  std::vector<EmbeddingTable> tables;  // one per feature set
  std::vector<Pooling> pooling;        // one per feature set
  std::vector<RnnEncoder> rnns;        // used only where pooling == rnn
  DenseLayer dense;                    // concat dim -> item dim, tanh

  std::size_t concat_dim() const;
  std::size_t out_dim() const { return dense.out; }
};

struct DcfConfig {
  FeatureSchema schema;
  std::vector<std::size_t> vocab_sizes;  // per set, including the OOV row
  std::size_t token_dim = 200;
  std::size_t rnn_hidden = 200;
  std::size_t item_dim = 400;
  std::size_t head_hidden = 1200;
  bool use_rnn = false;  // sequential sets get the recurrent encoder
  bool tied = false;
  Activation hidden_act = Activation::tanh_act;
};

// Forward-pass caches needed by the backward pass.
struct EmbedderTrace {
  std::vector<std::vector<std::int32_t>> tokens;
  std::vector<std::vector<double>> rnn_states;  // per set, T x hidden, flat
  std::vector<double> concat;      // pooled concatenation, pre-tanh
  std::vector<double> concat_act;  // tanh(concat)
  std::vector<double> phi;         // item embedding
};

struct PairTrace {
  EmbedderTrace seed, cand;
  std::vector<double> head_in;
  std::vector<double> head_act;  // hidden layer output
  double h = 0.0;
};

struct DenseGrads {
  std::vector<double> w, b;
};
struct RnnGrads {
  std::vector<double> w_in, w_rec, b;
};
struct TableGrad {
  // touched row -> gradient; untouched rows carry no entry at all
  std::map<std::int32_t, std::vector<double>> rows;
};
struct EmbedderGrads {
  std::vector<TableGrad> tables;
  std::vector<RnnGrads> rnns;
  DenseGrads dense;
};

struct Gradients {
  EmbedderGrads seed, cand;  // cand unused when the model is tied
  DenseGrads head_hidden, head_out;

  void clear();
};

// The two-embedder network with a two-layer prediction head.  Untied, the
// seed and candidate sides have independent parameters and h(s, r) is
// generally asymmetric.  Tied, one embedder serves both sides and the hidden
// head layer acts on phi(s) + phi(r) — equivalent to constraining the untied
// head's weight halves to be equal — which makes h symmetric under swap.
class DcfModel {
 public:
  DcfModel() = default;
  static DcfModel init(const DcfConfig& config, std::uint64_t seed);

  const DcfConfig& config() const { return config_; }
  bool tied() const { return config_.tied; }

  double predict(const ItemFeatures& s, const ItemFeatures& r,
                 PairTrace& trace) const;
  double predict(const ItemFeatures& s, const ItemFeatures& r) const;

  // d(h)/d(params) scaled by upstream, accumulated into `out` (call
  // out.clear() first for plain gradients).  Reads the trace written by
  // predict() on the same model.
  void backward(const PairTrace& trace, double upstream, Gradients& out) const;

  // theta += coef * grads, for every tensor.
  void apply_gradients(const Gradients& grads, double coef);

  // Embedding of one item through the seed-side embedder.
  void embed(const ItemFeatures& feats, std::vector<double>& out) const;

  const ItemEmbedder& seed_embedder() const { return seed_; }
  const ItemEmbedder& cand_embedder() const {
    return config_.tied ? seed_ : cand_;
  }
  const DenseLayer& head_hidden() const { return head_hidden_; }
  const DenseLayer& head_out() const { return head_out_; }

  // Mutable access for tests and serialization.
  ItemEmbedder& mutable_seed_embedder() { return seed_; }
  ItemEmbedder& mutable_cand_embedder() { return config_.tied ? seed_ : cand_; }
  DenseLayer& mutable_head_hidden() { return head_hidden_; }
  DenseLayer& mutable_head_out() { return head_out_; }

  // Every parameter tensor in the fixed serialization order.
  struct TensorRef {
    std::string name;
    double* data;
    std::size_t size;
  };
  std::vector<TensorRef> tensors();

  std::vector<double> flatten_params() const;
  void unflatten_params(std::span<const double> flat);

 private:
  DcfConfig config_;
  ItemEmbedder seed_, cand_;
  DenseLayer head_hidden_, head_out_;
};

// ---------------------------------------------------------------------------
// Model persistence: versioned binary container with a JSON header (schema,
// dimensions, tied flag, tensor shapes) followed by raw little-endian f64
// tensors in declared order.  Loading rejects any version or shape mismatch.

void save_dcf_model(const std::string& path, const DcfModel& model);
DcfModel load_dcf_model(const std::string& path);

struct LinearModelMeta {
  std::string featurizer;  // "indicator" | "content"
  std::size_t n_items = 0;               // indicator
  std::vector<std::size_t> vocab_sizes;  // content
};
void save_linear_model(const std::string& path, const LinearModel& model,
                       const LinearModelMeta& meta);
std::pair<LinearModel, LinearModelMeta> load_linear_model(
    const std::string& path);

// Kind probe: "linear", "dcf", or ConfigError for anything else.
std::string peek_model_kind(const std::string& path);

}  // namespace sparsecf
