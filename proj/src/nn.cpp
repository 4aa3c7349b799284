#include "sparsecf/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sparsecf/rng.hpp"

namespace sparsecf {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Linear model and featurizers.

double LinearModel::score(std::span<const std::uint64_t> features) const {
  double h = 0.0;
  for (std::uint64_t f : features) {
    if (f >= theta_.size()) {
      throw DomainError("feature id " + std::to_string(f) +
                        " out of range for dim " + std::to_string(theta_.size()));
    }
    h += theta_[f];
  }
  return h;
}

void LinearModel::update(std::span<const std::uint64_t> features,
                         double delta) {
  for (std::uint64_t f : features) {
    if (f >= theta_.size()) {
      throw DomainError("feature id " + std::to_string(f) +
                        " out of range for dim " + std::to_string(theta_.size()));
    }
    theta_[f] += delta;
  }
}

IndicatorPairFeaturizer::IndicatorPairFeaturizer(std::size_t n_items)
    : n_items_(n_items) {
  if (n_items < 1) throw ConfigError("indicator featurizer needs >= 1 item");
}

std::uint64_t IndicatorPairFeaturizer::feature(ItemId i, ItemId j) const {
  if (i >= n_items_ || j >= n_items_) {
    throw DomainError("item index out of range for indicator features");
  }
  return static_cast<std::uint64_t>(i) * n_items_ + j;
}

ContentPairFeaturizer::ContentPairFeaturizer(const ItemCatalog& catalog)
    : catalog_(&catalog) {
  const auto sizes = catalog.vocab_sizes();
  std::uint64_t offset = 0;
  for (std::size_t v : sizes) {
    set_offsets_.push_back(offset);
    offset += v;
  }
  total_vocab_ = offset;
}

void ContentPairFeaturizer::features(ItemId seed, ItemId cand,
                                     std::vector<std::uint64_t>& out) const {
  out.clear();
  const ItemFeatures& fs = catalog_->features(seed);
  const ItemFeatures& fr = catalog_->features(cand);
  for (std::size_t k = 0; k < fs.sets.size(); ++k) {
    for (std::int32_t t : fs.sets[k]) {
      out.push_back(set_offsets_[k] + static_cast<std::uint64_t>(t));
    }
  }
  for (std::size_t k = 0; k < fr.sets.size(); ++k) {
    for (std::int32_t t : fr.sets[k]) {
      out.push_back(total_vocab_ + set_offsets_[k] +
                    static_cast<std::uint64_t>(t));
    }
  }
}

// ---------------------------------------------------------------------------
// Dense / activation primitives.

namespace {

void apply_activation(Activation act, std::vector<double>& y) {
  switch (act) {
    case Activation::tanh_act:
      for (double& v : y) v = std::tanh(v);
      break;
    case Activation::relu:
      for (double& v : y) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::identity:
      break;
  }
}

// Derivative through the activation, expressed in terms of the output y.
double activation_grad(Activation act, double y) {
  switch (act) {
    case Activation::tanh_act:
      return 1.0 - y * y;
    case Activation::relu:
      return y > 0.0 ? 1.0 : 0.0;
    case Activation::identity:
      return 1.0;
  }
  return 1.0;
}

// y += W x, W row-major [n_out x n_in]
void gemv_add(const double* w, std::size_t n_out, std::size_t n_in,
              const double* x, double* y) {
  for (std::size_t o = 0; o < n_out; ++o) {
    const double* row = w + o * n_in;
    double acc = 0.0;
    for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * x[i];
    y[o] += acc;
  }
}

// xg += W^T delta
void gemv_t_add(const double* w, std::size_t n_out, std::size_t n_in,
                const double* delta, double* xg) {
  for (std::size_t o = 0; o < n_out; ++o) {
    const double* row = w + o * n_in;
    const double d = delta[o];
    if (d == 0.0) continue;
    for (std::size_t i = 0; i < n_in; ++i) xg[i] += d * row[i];
  }
}

// wg += delta (x) x   (outer product)
void outer_add(const double* delta, std::size_t n_out, const double* x,
               std::size_t n_in, double* wg) {
  for (std::size_t o = 0; o < n_out; ++o) {
    const double d = delta[o];
    if (d == 0.0) continue;
    double* row = wg + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) row[i] += d * x[i];
  }
}

void add_scaled(std::vector<double>& dst, const std::vector<double>& src,
                double coef) {
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += coef * src[i];
}

void ensure_size(std::vector<double>& v, std::size_t n) {
  v.assign(n, 0.0);
}

}  // namespace

void DenseLayer::forward(std::span<const double> x,
                         std::vector<double>& y) const {
  if (x.size() != in) {
    throw ConfigError("dense layer input size mismatch: got " +
                      std::to_string(x.size()) + ", expected " +
                      std::to_string(in));
  }
  y = b;
  gemv_add(w.data(), out, in, x.data(), y.data());
  apply_activation(act, y);
}

std::size_t ItemEmbedder::concat_dim() const {
  std::size_t total = 0;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    total += pooling[k] == Pooling::rnn ? rnns[k].hidden : tables[k].dim;
  }
  return total;
}

// ---------------------------------------------------------------------------
// DcfModel construction.

namespace {

ItemEmbedder make_embedder(const DcfConfig& config) {
  const std::size_t n_sets = config.schema.size();
  ItemEmbedder emb;
  emb.tables.resize(n_sets);
  emb.pooling.resize(n_sets);
  emb.rnns.resize(n_sets);
  for (std::size_t k = 0; k < n_sets; ++k) {
    emb.tables[k].rows = config.vocab_sizes[k];
    emb.tables[k].dim = config.token_dim;
    emb.tables[k].w.assign(config.vocab_sizes[k] * config.token_dim, 0.0);
    const bool recurrent = config.use_rnn && config.schema.sequential[k];
    emb.pooling[k] = recurrent ? Pooling::rnn : Pooling::mean;
    if (recurrent) {
      emb.rnns[k].in = config.token_dim;
      emb.rnns[k].hidden = config.rnn_hidden;
      emb.rnns[k].w_in.assign(config.rnn_hidden * config.token_dim, 0.0);
      emb.rnns[k].w_rec.assign(config.rnn_hidden * config.rnn_hidden, 0.0);
      emb.rnns[k].b.assign(config.rnn_hidden, 0.0);
    }
  }
  emb.dense.in = emb.concat_dim();
  emb.dense.out = config.item_dim;
  emb.dense.act = config.hidden_act;
  emb.dense.w.assign(emb.dense.in * emb.dense.out, 0.0);
  emb.dense.b.assign(emb.dense.out, 0.0);
  return emb;
}

DcfModel::TensorRef ref(const std::string& name, std::vector<double>& v) {
  return {name, v.data(), v.size()};
}

void check_config(const DcfConfig& config) {
  if (config.schema.size() == 0) {
    throw ConfigError("model needs at least one feature set");
  }
  if (config.vocab_sizes.size() != config.schema.size()) {
    throw ConfigError("vocab_sizes must match the schema length");
  }
  for (std::size_t v : config.vocab_sizes) {
    if (v < 1) throw ConfigError("vocabulary sizes must be >= 1");
  }
  if (config.token_dim < 1 || config.item_dim < 1 || config.head_hidden < 1 ||
      (config.use_rnn && config.rnn_hidden < 1)) {
    throw ConfigError("model dimensions must be >= 1");
  }
}

}  // namespace

DcfModel DcfModel::init(const DcfConfig& config, std::uint64_t seed) {
  check_config(config);
  DcfModel m;
  m.config_ = config;
  m.seed_ = make_embedder(config);
  if (!config.tied) m.cand_ = make_embedder(config);
  const std::size_t m_dim = config.item_dim;
  const std::size_t head_in = config.tied ? m_dim : 2 * m_dim;
  m.head_hidden_.in = head_in;
  m.head_hidden_.out = config.head_hidden;
  m.head_hidden_.act = config.hidden_act;
  m.head_hidden_.w.assign(head_in * config.head_hidden, 0.0);
  m.head_hidden_.b.assign(config.head_hidden, 0.0);
  m.head_out_.in = config.head_hidden;
  m.head_out_.out = 1;
  m.head_out_.act = Activation::identity;
  m.head_out_.w.assign(config.head_hidden, 0.0);
  m.head_out_.b.assign(1, 0.0);

  // Fill weights in tensor order so the draw sequence is part of the format:
  // embedding rows ~ U(+-0.5/d_emb), dense and recurrent matrices
  // ~ U(+-sqrt(6/(fan_in+fan_out))), biases zero.
  Rng rng(seed);
  auto fill = [&rng](std::vector<double>& v, double bound) {
    for (double& x : v) x = rng.uniform(-bound, bound);
  };
  const double emb_bound = 0.5 / static_cast<double>(config.token_dim);
  auto init_embedder = [&](ItemEmbedder& e) {
    for (std::size_t k = 0; k < e.tables.size(); ++k) {
      fill(e.tables[k].w, emb_bound);
      if (e.pooling[k] == Pooling::rnn) {
        RnnEncoder& r = e.rnns[k];
        fill(r.w_in, std::sqrt(6.0 / static_cast<double>(r.in + r.hidden)));
        fill(r.w_rec, std::sqrt(6.0 / static_cast<double>(2 * r.hidden)));
      }
    }
    fill(e.dense.w,
         std::sqrt(6.0 / static_cast<double>(e.dense.in + e.dense.out)));
  };
  init_embedder(m.seed_);
  if (!config.tied) init_embedder(m.cand_);
  fill(m.head_hidden_.w,
       std::sqrt(6.0 / static_cast<double>(m.head_hidden_.in +
                                           m.head_hidden_.out)));
  fill(m.head_out_.w,
       std::sqrt(6.0 / static_cast<double>(m.head_out_.in + 1)));
  return m;
}

// ---------------------------------------------------------------------------
// Forward.

namespace {

void embed_forward(const ItemEmbedder& emb, const FeatureSchema& schema,
                   const ItemFeatures& feats, EmbedderTrace& trace) {
  if (feats.sets.size() != schema.size()) {
    throw ConfigError("item features have " +
                      std::to_string(feats.sets.size()) +
                      " sets, schema expects " + std::to_string(schema.size()));
  }
  trace.tokens = feats.sets;
  trace.rnn_states.assign(schema.size(), {});
  ensure_size(trace.concat, emb.concat_dim());

  std::size_t offset = 0;
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const EmbeddingTable& table = emb.tables[k];
    const auto& toks = feats.sets[k];
    for (std::int32_t t : toks) {
      if (t < 0 || static_cast<std::size_t>(t) >= table.rows) {
        throw DomainError("token id " + std::to_string(t) +
                          " out of range for feature set " + schema.names[k]);
      }
    }
    if (emb.pooling[k] == Pooling::mean) {
      double* dst = trace.concat.data() + offset;
      if (!toks.empty()) {
        const double inv = 1.0 / static_cast<double>(toks.size());
        for (std::int32_t t : toks) {
          const double* row = table.row(t);
          for (std::size_t d = 0; d < table.dim; ++d) dst[d] += row[d];
        }
        for (std::size_t d = 0; d < table.dim; ++d) dst[d] *= inv;
      }
      offset += table.dim;
    } else {
      const RnnEncoder& rnn = emb.rnns[k];
      auto& states = trace.rnn_states[k];
      states.assign(toks.size() * rnn.hidden, 0.0);
      std::vector<double> state(rnn.hidden, 0.0);
      for (std::size_t t = 0; t < toks.size(); ++t) {
        std::vector<double> pre = rnn.b;
        gemv_add(rnn.w_in.data(), rnn.hidden, rnn.in, table.row(toks[t]),
                 pre.data());
        gemv_add(rnn.w_rec.data(), rnn.hidden, rnn.hidden, state.data(),
                 pre.data());
        for (std::size_t d = 0; d < rnn.hidden; ++d) {
          state[d] = std::tanh(pre[d]);
        }
        std::copy(state.begin(), state.end(),
                  states.begin() + static_cast<std::ptrdiff_t>(t * rnn.hidden));
      }
      if (!toks.empty()) {
        std::copy(state.begin(), state.end(), trace.concat.begin() + offset);
      }
      offset += rnn.hidden;
    }
  }

  trace.concat_act = trace.concat;
  apply_activation(emb.dense.act, trace.concat_act);
  emb.dense.forward(trace.concat_act, trace.phi);
}

}  // namespace

double DcfModel::predict(const ItemFeatures& s, const ItemFeatures& r,
                         PairTrace& trace) const {
  embed_forward(seed_, config_.schema, s, trace.seed);
  embed_forward(cand_embedder(), config_.schema, r, trace.cand);
  const std::size_t m_dim = config_.item_dim;
  if (config_.tied) {
    trace.head_in.resize(m_dim);
    for (std::size_t d = 0; d < m_dim; ++d) {
      trace.head_in[d] = trace.seed.phi[d] + trace.cand.phi[d];
    }
  } else {
    trace.head_in.resize(2 * m_dim);
    std::copy(trace.seed.phi.begin(), trace.seed.phi.end(),
              trace.head_in.begin());
    std::copy(trace.cand.phi.begin(), trace.cand.phi.end(),
              trace.head_in.begin() + static_cast<std::ptrdiff_t>(m_dim));
  }
  head_hidden_.forward(trace.head_in, trace.head_act);
  double h = head_out_.b[0];
  for (std::size_t i = 0; i < head_out_.in; ++i) {
    h += head_out_.w[i] * trace.head_act[i];
  }
  trace.h = h;
  return h;
}

double DcfModel::predict(const ItemFeatures& s, const ItemFeatures& r) const {
  PairTrace trace;
  return predict(s, r, trace);
}

void DcfModel::embed(const ItemFeatures& feats, std::vector<double>& out) const {
  EmbedderTrace trace;
  embed_forward(seed_, config_.schema, feats, trace);
  out = trace.phi;
}

// ---------------------------------------------------------------------------
// Backward.

void Gradients::clear() {
  auto clear_dense = [](DenseGrads& d) {
    std::fill(d.w.begin(), d.w.end(), 0.0);
    std::fill(d.b.begin(), d.b.end(), 0.0);
  };
  auto clear_side = [&](EmbedderGrads& e) {
    for (TableGrad& t : e.tables) t.rows.clear();
    for (RnnGrads& r : e.rnns) {
      std::fill(r.w_in.begin(), r.w_in.end(), 0.0);
      std::fill(r.w_rec.begin(), r.w_rec.end(), 0.0);
      std::fill(r.b.begin(), r.b.end(), 0.0);
    }
    clear_dense(e.dense);
  };
  clear_side(seed);
  clear_side(cand);
  clear_dense(head_hidden);
  clear_dense(head_out);
}

namespace {

void shape_dense_grads(DenseGrads& g, const DenseLayer& layer) {
  if (g.w.size() != layer.w.size()) g.w.assign(layer.w.size(), 0.0);
  if (g.b.size() != layer.b.size()) g.b.assign(layer.b.size(), 0.0);
}

void shape_embedder_grads(EmbedderGrads& g, const ItemEmbedder& emb) {
  g.tables.resize(emb.tables.size());
  if (g.rnns.size() != emb.rnns.size()) g.rnns.resize(emb.rnns.size());
  for (std::size_t k = 0; k < emb.rnns.size(); ++k) {
    if (emb.pooling[k] == Pooling::rnn &&
        g.rnns[k].w_in.size() != emb.rnns[k].w_in.size()) {
      g.rnns[k].w_in.assign(emb.rnns[k].w_in.size(), 0.0);
      g.rnns[k].w_rec.assign(emb.rnns[k].w_rec.size(), 0.0);
      g.rnns[k].b.assign(emb.rnns[k].b.size(), 0.0);
    }
  }
  shape_dense_grads(g.dense, emb.dense);
}

void embedder_backward(const ItemEmbedder& emb, const EmbedderTrace& trace,
                       std::span<const double> g_phi, EmbedderGrads& g) {
  shape_embedder_grads(g, emb);
  const DenseLayer& dense = emb.dense;

  // Through the dense layer's activation and affine map.
  std::vector<double> delta(dense.out);
  for (std::size_t o = 0; o < dense.out; ++o) {
    delta[o] = g_phi[o] * activation_grad(dense.act, trace.phi[o]);
  }
  outer_add(delta.data(), dense.out, trace.concat_act.data(), dense.in,
            g.dense.w.data());
  for (std::size_t o = 0; o < dense.out; ++o) g.dense.b[o] += delta[o];
  std::vector<double> g_act(dense.in, 0.0);
  gemv_t_add(dense.w.data(), dense.out, dense.in, delta.data(), g_act.data());

  // Through the concat activation.
  std::vector<double> g_concat(dense.in);
  for (std::size_t i = 0; i < dense.in; ++i) {
    g_concat[i] = g_act[i] * activation_grad(dense.act, trace.concat_act[i]);
  }

  // Split per feature set.
  std::size_t offset = 0;
  for (std::size_t k = 0; k < emb.tables.size(); ++k) {
    const EmbeddingTable& table = emb.tables[k];
    const auto& toks = trace.tokens[k];
    if (emb.pooling[k] == Pooling::mean) {
      if (!toks.empty()) {
        const double inv = 1.0 / static_cast<double>(toks.size());
        for (std::int32_t t : toks) {
          auto [it, fresh] = g.tables[k].rows.try_emplace(t);
          if (fresh) it->second.assign(table.dim, 0.0);
          for (std::size_t d = 0; d < table.dim; ++d) {
            it->second[d] += inv * g_concat[offset + d];
          }
        }
      }
      offset += table.dim;
    } else {
      const RnnEncoder& rnn = emb.rnns[k];
      const auto& states = trace.rnn_states[k];
      const std::size_t T = toks.size();
      if (T > 0) {
        // Backpropagation through time, last step first.
        std::vector<double> g_state(g_concat.begin() +
                                        static_cast<std::ptrdiff_t>(offset),
                                    g_concat.begin() +
                                        static_cast<std::ptrdiff_t>(
                                            offset + rnn.hidden));
        std::vector<double> delta_t(rnn.hidden);
        std::vector<double> g_prev(rnn.hidden);
        for (std::size_t t = T; t-- > 0;) {
          const double* s_t = states.data() + t * rnn.hidden;
          for (std::size_t d = 0; d < rnn.hidden; ++d) {
            delta_t[d] = g_state[d] * (1.0 - s_t[d] * s_t[d]);
          }
          const double* x_t = table.row(toks[t]);
          outer_add(delta_t.data(), rnn.hidden, x_t, rnn.in,
                    g.rnns[k].w_in.data());
          if (t > 0) {
            outer_add(delta_t.data(), rnn.hidden, states.data() + (t - 1) * rnn.hidden,
                      rnn.hidden, g.rnns[k].w_rec.data());
          }
          for (std::size_t d = 0; d < rnn.hidden; ++d) {
            g.rnns[k].b[d] += delta_t[d];
          }
          auto [it, fresh] = g.tables[k].rows.try_emplace(toks[t]);
          if (fresh) it->second.assign(table.dim, 0.0);
          gemv_t_add(rnn.w_in.data(), rnn.hidden, rnn.in, delta_t.data(),
                     it->second.data());
          if (t > 0) {
            std::fill(g_prev.begin(), g_prev.end(), 0.0);
            gemv_t_add(rnn.w_rec.data(), rnn.hidden, rnn.hidden,
                       delta_t.data(), g_prev.data());
            g_state = g_prev;
          }
        }
      }
      offset += rnn.hidden;
    }
  }
}

}  // namespace

void DcfModel::backward(const PairTrace& trace, double upstream,
                        Gradients& out) const {
  shape_dense_grads(out.head_hidden, head_hidden_);
  shape_dense_grads(out.head_out, head_out_);

  // Scalar output layer (identity).
  for (std::size_t i = 0; i < head_out_.in; ++i) {
    out.head_out.w[i] += upstream * trace.head_act[i];
  }
  out.head_out.b[0] += upstream;

  // Hidden head layer.
  std::vector<double> delta(head_hidden_.out);
  for (std::size_t o = 0; o < head_hidden_.out; ++o) {
    delta[o] = upstream * head_out_.w[o] *
               activation_grad(head_hidden_.act, trace.head_act[o]);
  }
  outer_add(delta.data(), head_hidden_.out, trace.head_in.data(),
            head_hidden_.in, out.head_hidden.w.data());
  for (std::size_t o = 0; o < head_hidden_.out; ++o) {
    out.head_hidden.b[o] += delta[o];
  }
  std::vector<double> g_in(head_hidden_.in, 0.0);
  gemv_t_add(head_hidden_.w.data(), head_hidden_.out, head_hidden_.in,
             delta.data(), g_in.data());

  const std::size_t m_dim = config_.item_dim;
  if (config_.tied) {
    // head_in = phi_s + phi_r, both through the shared embedder.
    embedder_backward(seed_, trace.seed, g_in, out.seed);
    embedder_backward(seed_, trace.cand, g_in, out.seed);
  } else {
    embedder_backward(seed_, trace.seed,
                      std::span<const double>(g_in.data(), m_dim), out.seed);
    embedder_backward(cand_, trace.cand,
                      std::span<const double>(g_in.data() + m_dim, m_dim),
                      out.cand);
  }
}

void DcfModel::apply_gradients(const Gradients& grads, double coef) {
  auto apply_dense = [coef](DenseLayer& layer, const DenseGrads& g) {
    add_scaled(layer.w, g.w, coef);
    add_scaled(layer.b, g.b, coef);
  };
  auto apply_side = [&](ItemEmbedder& emb, const EmbedderGrads& g) {
    for (std::size_t k = 0; k < emb.tables.size(); ++k) {
      for (const auto& [row, vec] : g.tables[k].rows) {
        double* dst = emb.tables[k].row(row);
        for (std::size_t d = 0; d < vec.size(); ++d) dst[d] += coef * vec[d];
      }
      if (emb.pooling[k] == Pooling::rnn && !g.rnns[k].w_in.empty()) {
        add_scaled(emb.rnns[k].w_in, g.rnns[k].w_in, coef);
        add_scaled(emb.rnns[k].w_rec, g.rnns[k].w_rec, coef);
        add_scaled(emb.rnns[k].b, g.rnns[k].b, coef);
      }
    }
    apply_dense(emb.dense, g.dense);
  };
  apply_side(seed_, grads.seed);
  if (!config_.tied) apply_side(cand_, grads.cand);
  apply_dense(head_hidden_, grads.head_hidden);
  apply_dense(head_out_, grads.head_out);
}

// ---------------------------------------------------------------------------
// Parameter enumeration and persistence.

std::vector<DcfModel::TensorRef> DcfModel::tensors() {
  std::vector<TensorRef> out;
  auto add_embedder = [&out](const std::string& side, ItemEmbedder& emb) {
    for (std::size_t k = 0; k < emb.tables.size(); ++k) {
      const std::string prefix = side + ".set" + std::to_string(k);
      out.push_back(ref(prefix + ".table", emb.tables[k].w));
      if (emb.pooling[k] == Pooling::rnn) {
        out.push_back(ref(prefix + ".rnn.w_in", emb.rnns[k].w_in));
        out.push_back(ref(prefix + ".rnn.w_rec", emb.rnns[k].w_rec));
        out.push_back(ref(prefix + ".rnn.b", emb.rnns[k].b));
      }
    }
    out.push_back(ref(side + ".dense.w", emb.dense.w));
    out.push_back(ref(side + ".dense.b", emb.dense.b));
  };
  add_embedder("seed", seed_);
  if (!config_.tied) add_embedder("cand", cand_);
  out.push_back(ref("head.hidden.w", head_hidden_.w));
  out.push_back(ref("head.hidden.b", head_hidden_.b));
  out.push_back(ref("head.out.w", head_out_.w));
  out.push_back(ref("head.out.b", head_out_.b));
  return out;
}

std::vector<double> DcfModel::flatten_params() const {
  auto refs = const_cast<DcfModel*>(this)->tensors();
  std::vector<double> flat;
  for (const TensorRef& r : refs) {
    flat.insert(flat.end(), r.data, r.data + r.size);
  }
  return flat;
}

void DcfModel::unflatten_params(std::span<const double> flat) {
  auto refs = tensors();
  std::size_t pos = 0;
  for (const TensorRef& r : refs) {
    if (pos + r.size > flat.size()) {
      throw ConfigError("parameter vector too short");
    }
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + r.size),
              r.data);
    pos += r.size;
  }
  if (pos != flat.size()) {
    throw ConfigError("parameter vector length mismatch");
  }
}

namespace {

constexpr char kMagic[8] = {'S', 'P', 'A', 'R', 'S', 'E', 'C', 'F'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kKindLinear = 1;
constexpr std::uint32_t kKindDcf = 2;

void write_header(std::ofstream& out, std::uint32_t kind,
                  const std::string& header) {
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t version = kFormatVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&kind), sizeof(kind));
  const std::uint64_t len = header.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
}

std::pair<std::uint32_t, json> read_header(std::ifstream& in,
                                           const std::string& path) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw ConfigError(path + ": not a model file");
  }
  std::uint32_t version = 0, kind = 0;
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&kind), sizeof(kind));
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in) throw ConfigError(path + ": truncated model header");
  if (version != kFormatVersion) {
    throw ConfigError(path + ": unsupported model format version " +
                      std::to_string(version));
  }
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  if (!in) throw ConfigError(path + ": truncated model header");
  json meta = json::parse(header, nullptr, false);
  if (meta.is_discarded()) {
    throw ConfigError(path + ": corrupt model metadata");
  }
  return {kind, meta};
}

std::string act_name(Activation a) {
  switch (a) {
    case Activation::tanh_act: return "tanh";
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
  }
  return "tanh";
}

Activation act_from_name(const std::string& name) {
  if (name == "tanh") return Activation::tanh_act;
  if (name == "relu") return Activation::relu;
  if (name == "identity") return Activation::identity;
  throw ConfigError("unknown activation '" + name + "'");
}

}  // namespace

void save_dcf_model(const std::string& path, const DcfModel& model) {
  auto& m = const_cast<DcfModel&>(model);
  const DcfConfig& c = model.config();
  json meta;
  meta["schema"]["names"] = c.schema.names;
  meta["schema"]["sequential"] = std::vector<int>(c.schema.sequential.begin(),
                                                  c.schema.sequential.end());
  meta["vocab_sizes"] = c.vocab_sizes;
  meta["token_dim"] = c.token_dim;
  meta["rnn_hidden"] = c.rnn_hidden;
  meta["item_dim"] = c.item_dim;
  meta["head_hidden"] = c.head_hidden;
  meta["use_rnn"] = c.use_rnn;
  meta["tied"] = c.tied;
  meta["hidden_act"] = act_name(c.hidden_act);
  json tensor_list = json::array();
  for (const auto& t : m.tensors()) {
    tensor_list.push_back({{"name", t.name}, {"size", t.size}});
  }
  meta["tensors"] = tensor_list;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model file: " + path);
  write_header(out, kKindDcf, meta.dump());
  for (const auto& t : m.tensors()) {
    out.write(reinterpret_cast<const char*>(t.data),
              static_cast<std::streamsize>(t.size * sizeof(double)));
  }
  if (!out) throw ConfigError("failed writing model file: " + path);
}

DcfModel load_dcf_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file: " + path);
  auto [kind, meta] = read_header(in, path);
  if (kind != kKindDcf) {
    throw ConfigError(path + ": not a dcf model file");
  }
  DcfConfig config;
  try {
    config.schema.names = meta.at("schema").at("names")
                              .get<std::vector<std::string>>();
    for (int flag : meta.at("schema").at("sequential").get<std::vector<int>>()) {
      config.schema.sequential.push_back(flag != 0);
    }
    config.vocab_sizes = meta.at("vocab_sizes").get<std::vector<std::size_t>>();
    config.token_dim = meta.at("token_dim").get<std::size_t>();
    config.rnn_hidden = meta.at("rnn_hidden").get<std::size_t>();
    config.item_dim = meta.at("item_dim").get<std::size_t>();
    config.head_hidden = meta.at("head_hidden").get<std::size_t>();
    config.use_rnn = meta.at("use_rnn").get<bool>();
    config.tied = meta.at("tied").get<bool>();
    config.hidden_act = act_from_name(meta.at("hidden_act").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(path + ": bad model metadata: " + e.what());
  }
  DcfModel model = DcfModel::init(config, 0);
  auto refs = model.tensors();
  const json& tensor_list = meta.at("tensors");
  if (tensor_list.size() != refs.size()) {
    throw ConfigError(path + ": tensor count mismatch");
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (tensor_list[i].at("name").get<std::string>() != refs[i].name ||
        tensor_list[i].at("size").get<std::size_t>() != refs[i].size) {
      throw ConfigError(path + ": tensor shape mismatch at '" + refs[i].name +
                        "'");
    }
    in.read(reinterpret_cast<char*>(refs[i].data),
            static_cast<std::streamsize>(refs[i].size * sizeof(double)));
    if (!in) throw ConfigError(path + ": truncated tensor data");
  }
  return model;
}

void save_linear_model(const std::string& path, const LinearModel& model,
                       const LinearModelMeta& meta) {
  json header;
  header["featurizer"] = meta.featurizer;
  header["dim"] = model.dim();
  if (meta.featurizer == "indicator") {
    header["n_items"] = meta.n_items;
  } else if (meta.featurizer == "content") {
    header["vocab_sizes"] = meta.vocab_sizes;
  } else {
    throw ConfigError("unknown featurizer kind '" + meta.featurizer + "'");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model file: " + path);
  write_header(out, kKindLinear, header.dump());
  out.write(reinterpret_cast<const char*>(model.theta().data()),
            static_cast<std::streamsize>(model.dim() * sizeof(double)));
  if (!out) throw ConfigError("failed writing model file: " + path);
}

std::pair<LinearModel, LinearModelMeta> load_linear_model(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file: " + path);
  auto [kind, header] = read_header(in, path);
  if (kind != kKindLinear) {
    throw ConfigError(path + ": not a linear model file");
  }
  LinearModelMeta meta;
  std::size_t dim = 0;
  try {
    meta.featurizer = header.at("featurizer").get<std::string>();
    dim = header.at("dim").get<std::size_t>();
    if (meta.featurizer == "indicator") {
      meta.n_items = header.at("n_items").get<std::size_t>();
    } else if (meta.featurizer == "content") {
      meta.vocab_sizes =
          header.at("vocab_sizes").get<std::vector<std::size_t>>();
    } else {
      throw ConfigError(path + ": unknown featurizer kind");
    }
  } catch (const json::exception& e) {
    throw ConfigError(path + ": bad model metadata: " + e.what());
  }
  LinearModel model(dim);
  in.read(reinterpret_cast<char*>(model.theta().data()),
          static_cast<std::streamsize>(dim * sizeof(double)));
  if (!in) throw ConfigError(path + ": truncated tensor data");
  return {std::move(model), std::move(meta)};
}

std::string peek_model_kind(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file: " + path);
  auto [kind, header] = read_header(in, path);
  (void)header;
  if (kind == kKindLinear) return "linear";
  if (kind == kKindDcf) return "dcf";
  throw ConfigError(path + ": unknown model kind");
}

}  // namespace sparsecf
