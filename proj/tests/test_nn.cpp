#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sparsecf/corpus.hpp"
#include "sparsecf/nn.hpp"
#include "sparsecf/rng.hpp"
#include "sparsecf/types.hpp"

using namespace sparsecf;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() / ("sparsecf_nn_" + std::to_string(counter++));
  fs::create_directories(dir);
  return dir / name;
}

DcfConfig small_config(bool use_rnn, bool tied) {
  DcfConfig c;
  c.schema.names = {"title", "aspects"};
  c.schema.sequential = {true, false};
  c.vocab_sizes = {7, 5};
  c.token_dim = 3;
  c.rnn_hidden = 4;
  c.item_dim = 5;
  c.head_hidden = 6;
  c.use_rnn = use_rnn;
  c.tied = tied;
  return c;
}

ItemFeatures feats(std::vector<std::int32_t> title,
                   std::vector<std::int32_t> aspects) {
  ItemFeatures f;
  f.sets = {std::move(title), std::move(aspects)};
  return f;
}

// Gradients flattened into tensor order, mirroring flatten_params().
std::vector<double> flatten_grads(DcfModel& m, const Gradients& g) {
  std::vector<double> flat(m.flatten_params().size(), 0.0);
  std::size_t off = 0;
  auto add_dense = [&](const DenseLayer& layer, const DenseGrads& dg) {
    for (std::size_t i = 0; i < layer.w.size(); ++i) {
      flat[off + i] += dg.w.empty() ? 0.0 : dg.w[i];
    }
    off += layer.w.size();
    for (std::size_t i = 0; i < layer.b.size(); ++i) {
      flat[off + i] += dg.b.empty() ? 0.0 : dg.b[i];
    }
    off += layer.b.size();
  };
  auto add_embedder = [&](const ItemEmbedder& e, const EmbedderGrads& eg) {
    for (std::size_t k = 0; k < e.tables.size(); ++k) {
      const EmbeddingTable& t = e.tables[k];
      if (k < eg.tables.size()) {
        for (const auto& kv : eg.tables[k].rows) {
          for (std::size_t d = 0; d < t.dim; ++d) {
            flat[off + static_cast<std::size_t>(kv.first) * t.dim + d] +=
                kv.second[d];
          }
        }
      }
      off += t.w.size();
      if (e.pooling[k] == Pooling::rnn) {
        const RnnEncoder& r = e.rnns[k];
        const RnnGrads& rg = eg.rnns[k];
        for (std::size_t i = 0; i < r.w_in.size(); ++i) {
          flat[off + i] += rg.w_in.empty() ? 0.0 : rg.w_in[i];
        }
        off += r.w_in.size();
        for (std::size_t i = 0; i < r.w_rec.size(); ++i) {
          flat[off + i] += rg.w_rec.empty() ? 0.0 : rg.w_rec[i];
        }
        off += r.w_rec.size();
        for (std::size_t i = 0; i < r.b.size(); ++i) {
          flat[off + i] += rg.b.empty() ? 0.0 : rg.b[i];
        }
        off += r.b.size();
      }
    }
    add_dense(e.dense, eg.dense);
  };
  add_embedder(m.seed_embedder(), g.seed);
  if (!m.tied()) add_embedder(m.cand_embedder(), g.cand);
  add_dense(m.head_hidden(), g.head_hidden);
  add_dense(m.head_out(), g.head_out);
  REQUIRE(off == flat.size());
  return flat;
}

}  // namespace

TEST_CASE("linear model sums the weights of active features") {
  LinearModel m(4);
  m.theta() = {0.5, -1.0, 2.0, 0.25};
  const std::vector<std::uint64_t> active = {0, 2, 2};
  CHECK(m.score(active) == doctest::Approx(4.5).epsilon(1e-15));
  m.update(active, 0.5);
  CHECK(m.theta() == std::vector<double>{1.0, -1.0, 3.0, 0.25});
  const std::vector<std::uint64_t> bad = {4};
  CHECK_THROWS_AS(m.score(bad), DomainError);
  CHECK_THROWS_AS(m.update(bad, 1.0), DomainError);
}

TEST_CASE("indicator featurizer flattens the pair grid row-major") {
  IndicatorPairFeaturizer f(3);
  CHECK(f.dim() == 9);
  CHECK(f.feature(0, 0) == 0);
  CHECK(f.feature(1, 2) == 5);
  CHECK(f.feature(2, 1) == 7);
  CHECK_THROWS_AS(f.feature(3, 0), DomainError);
  CHECK_THROWS_AS(f.feature(0, 3), DomainError);
  CHECK_THROWS_AS(IndicatorPairFeaturizer(0), ConfigError);
}

TEST_CASE("content featurizer separates sides and sets") {
  FeatureSchema schema;
  schema.names = {"title", "aspects"};
  schema.sequential = {true, false};
  ItemCatalog catalog(schema);
  catalog.add_item(0, RawItem{"a", {{"title", {"x", "y"}}, {"aspects", {"p"}}}});
  catalog.add_item(1, RawItem{"b", {{"title", {"y"}}, {"aspects", {"q"}}}});
  // vocab sizes: title 3 (unk, x, y), aspects 3 (unk, p, q); total 6
  ContentPairFeaturizer f(catalog);
  CHECK(f.dim() == 12);
  std::vector<std::uint64_t> out;
  f.features(0, 1, out);
  // seed a: title {1, 2} at offset 0, aspects {1} at offset 3
  // cand b: title {2} at offset 6, aspects {2} at offset 9
  CHECK(out == std::vector<std::uint64_t>{1, 2, 3 + 1, 6 + 2, 9 + 2});
  // swapping sides moves tokens across the side boundary
  f.features(1, 0, out);
  CHECK(out == std::vector<std::uint64_t>{2, 3 + 2, 6 + 1, 6 + 2, 9 + 1});
}

TEST_CASE("dense layer computes act(Wx + b)") {
  DenseLayer layer;
  layer.in = 2;
  layer.out = 2;
  layer.act = Activation::tanh_act;
  layer.w = {1.0, -2.0, 0.5, 0.25};  // rows: [1, -2], [0.5, 0.25]
  layer.b = {0.1, -0.1};
  std::vector<double> y;
  const std::vector<double> x = {0.3, 0.7};
  layer.forward(x, y);
  CHECK(y[0] == doctest::Approx(std::tanh(1.0 * 0.3 - 2.0 * 0.7 + 0.1)).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(std::tanh(0.5 * 0.3 + 0.25 * 0.7 - 0.1)).epsilon(1e-15));

  layer.act = Activation::relu;
  layer.forward(x, y);
  CHECK(y[0] == 0.0);  // pre-activation is -1.0
  CHECK(y[1] == doctest::Approx(0.225).epsilon(1e-15));

  layer.act = Activation::identity;
  layer.forward(x, y);
  CHECK(y[0] == doctest::Approx(-1.0).epsilon(1e-15));

  const std::vector<double> wrong = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(layer.forward(wrong, y), ConfigError);
}

TEST_CASE("mean-pooled prediction matches a hand computation") {
  DcfConfig c;
  c.schema.names = {"bag"};
  c.schema.sequential = {false};
  c.vocab_sizes = {4};
  c.token_dim = 2;
  c.item_dim = 2;
  c.head_hidden = 2;
  c.use_rnn = false;
  c.tied = false;
  DcfModel m = DcfModel::init(c, 1);

  // overwrite every parameter with known values
  auto& se = m.mutable_seed_embedder();
  se.tables[0].w = {0.0, 0.0, 0.1, 0.2, 0.3, -0.4, 0.5, 0.6};
  se.dense.w = {1.0, 0.5, -0.5, 0.25};
  se.dense.b = {0.01, -0.01};
  auto& ce = m.mutable_cand_embedder();
  ce.tables[0].w = {0.0, 0.0, -0.1, 0.3, 0.2, 0.2, -0.6, 0.1};
  ce.dense.w = {0.2, -0.3, 0.4, 0.8};
  ce.dense.b = {0.0, 0.05};
  m.mutable_head_hidden().w = {0.3, -0.2, 0.5, 0.1, -0.4, 0.6, 0.2, 0.7};
  m.mutable_head_hidden().b = {0.02, -0.03};
  m.mutable_head_out().w = {1.5, -2.5};
  m.mutable_head_out().b = {0.25};

  const ItemFeatures s = feats({}, {});  // unused shape, single-set schema
  ItemFeatures fs, fr;
  fs.sets = {{1, 3}};
  fr.sets = {{2}};
  (void)s;

  auto phi = [](const std::vector<double>& table, const std::vector<double>& w,
                const std::vector<double>& b,
                const std::vector<std::int32_t>& toks) {
    double c0 = 0.0, c1 = 0.0;
    for (std::int32_t t : toks) {
      c0 += table[2 * static_cast<std::size_t>(t)];
      c1 += table[2 * static_cast<std::size_t>(t) + 1];
    }
    c0 /= static_cast<double>(toks.size());
    c1 /= static_cast<double>(toks.size());
    const double a0 = std::tanh(c0), a1 = std::tanh(c1);
    return std::pair(std::tanh(w[0] * a0 + w[1] * a1 + b[0]),
                     std::tanh(w[2] * a0 + w[3] * a1 + b[1]));
  };
  const auto [s0, s1] = phi(se.tables[0].w, se.dense.w, se.dense.b, fs.sets[0]);
  const auto [r0, r1] = phi(ce.tables[0].w, ce.dense.w, ce.dense.b, fr.sets[0]);
  const auto& hh = m.head_hidden();
  const double a0 = std::tanh(hh.w[0] * s0 + hh.w[1] * s1 + hh.w[2] * r0 +
                              hh.w[3] * r1 + hh.b[0]);
  const double a1 = std::tanh(hh.w[4] * s0 + hh.w[5] * s1 + hh.w[6] * r0 +
                              hh.w[7] * r1 + hh.b[1]);
  const double expected = 1.5 * a0 - 2.5 * a1 + 0.25;

  PairTrace trace;
  CHECK(m.predict(fs, fr, trace) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(trace.h == doctest::Approx(expected).epsilon(1e-14));
  CHECK(trace.seed.phi[0] == doctest::Approx(s0).epsilon(1e-14));
  CHECK(trace.cand.phi[1] == doctest::Approx(r1).epsilon(1e-14));
  REQUIRE(trace.head_in.size() == 4);
  CHECK(trace.head_in[2] == doctest::Approx(r0).epsilon(1e-14));

  // embedding accessor runs items through the seed-side embedder
  std::vector<double> emb;
  m.embed(fs, emb);
  REQUIRE(emb.size() == 2);
  CHECK(emb[0] == doctest::Approx(s0).epsilon(1e-14));
  CHECK(emb[1] == doctest::Approx(s1).epsilon(1e-14));
}

TEST_CASE("recurrent encoding matches a hand-computed recurrence") {
  DcfConfig c;
  c.schema.names = {"seq"};
  c.schema.sequential = {true};
  c.vocab_sizes = {3};
  c.token_dim = 1;
  c.rnn_hidden = 2;
  c.item_dim = 1;
  c.head_hidden = 1;
  c.use_rnn = true;
  c.tied = true;
  DcfModel m = DcfModel::init(c, 1);

  auto& e = m.mutable_seed_embedder();
  e.tables[0].w = {0.0, 0.7, -0.4};
  e.rnns[0].w_in = {1.0, -1.0};   // [hidden x in] = [2 x 1]
  e.rnns[0].w_rec = {0.5, 0.25, -0.5, 0.75};
  e.rnns[0].b = {0.1, -0.2};
  e.dense.w = {2.0, -1.0};
  e.dense.b = {0.0};
  m.mutable_head_hidden().w = {1.0};
  m.mutable_head_hidden().b = {0.0};
  m.mutable_head_out().w = {1.0};
  m.mutable_head_out().b = {0.0};

  // tokens 1, 2 -> inputs x1 = 0.7, x2 = -0.4
  const double h10 = std::tanh(1.0 * 0.7 + 0.1);
  const double h11 = std::tanh(-1.0 * 0.7 - 0.2);
  const double h20 = std::tanh(1.0 * -0.4 + 0.5 * h10 + 0.25 * h11 + 0.1);
  const double h21 = std::tanh(-1.0 * -0.4 - 0.5 * h10 + 0.75 * h11 - 0.2);
  // concat is the LAST hidden state, then tanh, then the dense layer
  const double phi =
      std::tanh(2.0 * std::tanh(h20) - 1.0 * std::tanh(h21));
  // tied head: hidden acts on phi(s) + phi(r)
  const double expected = std::tanh(phi + phi);

  ItemFeatures f;
  f.sets = {{1, 2}};
  PairTrace trace;
  CHECK(m.predict(f, f, trace) == doctest::Approx(expected).epsilon(1e-14));
  // the trace keeps every intermediate state for the backward pass
  REQUIRE(trace.seed.rnn_states[0].size() == 4);
  CHECK(trace.seed.rnn_states[0][0] == doctest::Approx(h10).epsilon(1e-14));
  CHECK(trace.seed.rnn_states[0][3] == doctest::Approx(h21).epsilon(1e-14));

  // token order matters for the recurrent encoder
  ItemFeatures rev;
  rev.sets = {{2, 1}};
  CHECK(m.predict(rev, rev) != doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("an empty feature set pools to zeros") {
  const DcfConfig c = small_config(false, false);
  DcfModel m = DcfModel::init(c, 9);
  PairTrace trace;
  m.predict(feats({}, {1}), feats({1, 2}, {3}), trace);
  for (std::size_t d = 0; d < c.token_dim; ++d) {
    CHECK(trace.seed.concat[d] == 0.0);
  }
  // and with every set empty the item still embeds (bias-only path)
  ItemFeatures empty = feats({}, {});
  std::vector<double> phi;
  m.embed(empty, phi);
  std::vector<double> zero_concat(m.seed_embedder().dense.in, 0.0);
  std::vector<double> expected;
  m.seed_embedder().dense.forward(zero_concat, expected);
  CHECK(phi == expected);
}

TEST_CASE("token ids outside the vocabulary are rejected") {
  DcfModel m = DcfModel::init(small_config(false, false), 3);
  CHECK_THROWS_AS(m.predict(feats({7}, {}), feats({}, {})), DomainError);
  CHECK_THROWS_AS(m.predict(feats({}, {}), feats({}, {-1})), DomainError);
  ItemFeatures wrong_arity;
  wrong_arity.sets = {{1}};
  CHECK_THROWS_AS(m.predict(wrong_arity, wrong_arity), ConfigError);
}

TEST_CASE("tied models are symmetric under operand swap, untied are not") {
  const ItemFeatures a = feats({1, 3, 2}, {4, 1});
  const ItemFeatures b = feats({5, 6}, {2});
  DcfModel tied = DcfModel::init(small_config(true, true), 11);
  CHECK(tied.predict(a, b) == tied.predict(b, a));
  DcfModel untied = DcfModel::init(small_config(true, false), 11);
  CHECK(untied.predict(a, b) != untied.predict(b, a));
}

TEST_CASE("initialisation is deterministic, bounded, and zero-biased") {
  const DcfConfig c = small_config(true, false);
  DcfModel a = DcfModel::init(c, 5);
  DcfModel b = DcfModel::init(c, 5);
  DcfModel other = DcfModel::init(c, 6);
  CHECK(a.flatten_params() == b.flatten_params());
  CHECK(a.flatten_params() != other.flatten_params());

  const double emb_bound = 0.5 / static_cast<double>(c.token_dim);
  for (const auto& t : a.tensors()) {
    double bound;
    if (t.name.find(".table") != std::string::npos) {
      bound = emb_bound;
    } else if (t.name.find(".rnn.w_in") != std::string::npos) {
      bound = std::sqrt(6.0 / static_cast<double>(c.token_dim + c.rnn_hidden));
    } else if (t.name.find(".rnn.w_rec") != std::string::npos) {
      bound = std::sqrt(6.0 / static_cast<double>(2 * c.rnn_hidden));
    } else if (t.name == "head.hidden.w") {
      bound = std::sqrt(6.0 / static_cast<double>(2 * c.item_dim + c.head_hidden));
    } else if (t.name == "head.out.w") {
      bound = std::sqrt(6.0 / static_cast<double>(c.head_hidden + 1));
    } else if (t.name.ends_with(".b")) {
      for (std::size_t i = 0; i < t.size; ++i) CHECK(t.data[i] == 0.0);
      continue;
    } else {  // embedder dense weights
      REQUIRE(t.name.ends_with("dense.w"));
      const std::size_t concat =
          a.seed_embedder().dense.in;  // both sides share dims
      bound = std::sqrt(6.0 / static_cast<double>(concat + c.item_dim));
    }
    double max_abs = 0.0;
    for (std::size_t i = 0; i < t.size; ++i) {
      max_abs = std::max(max_abs, std::fabs(t.data[i]));
    }
    CHECK(max_abs <= bound);
    CHECK(max_abs > 0.1 * bound);  // actually filled, not left at zero
  }
}

TEST_CASE("init validates the configuration") {
  DcfConfig c = small_config(false, false);
  c.vocab_sizes = {7};
  CHECK_THROWS_AS(DcfModel::init(c, 1), ConfigError);
  c = small_config(false, false);
  c.token_dim = 0;
  CHECK_THROWS_AS(DcfModel::init(c, 1), ConfigError);
  c = small_config(false, false);
  c.schema = FeatureSchema{};
  c.vocab_sizes = {};
  CHECK_THROWS_AS(DcfModel::init(c, 1), ConfigError);
  c = small_config(true, false);
  c.rnn_hidden = 0;
  CHECK_THROWS_AS(DcfModel::init(c, 1), ConfigError);
}

TEST_CASE("analytic gradients match central finite differences") {
  const ItemFeatures s = feats({1, 3, 2}, {4, 1});
  const ItemFeatures r = feats({5, 6}, {2});
  for (bool use_rnn : {false, true}) {
    for (bool tied : {false, true}) {
      CAPTURE(use_rnn);
      CAPTURE(tied);
      DcfModel m = DcfModel::init(small_config(use_rnn, tied), 42);
      PairTrace trace;
      m.predict(s, r, trace);
      Gradients g;
      g.clear();
      m.backward(trace, 1.0, g);
      const std::vector<double> analytic = flatten_grads(m, g);
      const std::vector<double> base = m.flatten_params();
      const double eps = 1e-5;
      double worst = 0.0;
      for (std::size_t i = 0; i < base.size(); ++i) {
        std::vector<double> p = base;
        p[i] = base[i] + eps;
        m.unflatten_params(p);
        const double hp = m.predict(s, r);
        p[i] = base[i] - eps;
        m.unflatten_params(p);
        const double hm = m.predict(s, r);
        const double fd = (hp - hm) / (2 * eps);
        const double rel = std::fabs(fd - analytic[i]) /
                           std::max({1.0, std::fabs(fd), std::fabs(analytic[i])});
        worst = std::max(worst, rel);
      }
      m.unflatten_params(base);
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("upstream scaling and accumulation are linear") {
  DcfModel m = DcfModel::init(small_config(true, false), 13);
  const ItemFeatures s = feats({2, 1}, {3});
  const ItemFeatures r = feats({4}, {1, 2});
  PairTrace trace;
  m.predict(s, r, trace);
  Gradients once, scaled, twice;
  once.clear();
  scaled.clear();
  twice.clear();
  m.backward(trace, 1.0, once);
  m.backward(trace, -2.5, scaled);
  m.backward(trace, 1.0, twice);
  m.backward(trace, 1.0, twice);  // accumulates, does not overwrite
  const auto f_once = flatten_grads(m, once);
  const auto f_scaled = flatten_grads(m, scaled);
  const auto f_twice = flatten_grads(m, twice);
  for (std::size_t i = 0; i < f_once.size(); ++i) {
    CHECK(f_scaled[i] == doctest::Approx(-2.5 * f_once[i]).epsilon(1e-12));
    CHECK(f_twice[i] == doctest::Approx(2.0 * f_once[i]).epsilon(1e-12));
  }
}

TEST_CASE("apply_gradients walks in the gradient direction") {
  DcfModel m = DcfModel::init(small_config(false, false), 21);
  const ItemFeatures s = feats({1}, {2});
  const ItemFeatures r = feats({2}, {1});
  PairTrace trace;
  const double before = m.predict(s, r, trace);
  Gradients g;
  g.clear();
  m.backward(trace, 1.0, g);
  m.apply_gradients(g, 0.05);
  CHECK(m.predict(s, r) > before);
  m.apply_gradients(g, -0.05);
  CHECK(m.predict(s, r) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("flatten and unflatten round trip") {
  DcfModel m = DcfModel::init(small_config(true, true), 31);
  const std::vector<double> flat = m.flatten_params();
  std::vector<double> tweaked = flat;
  for (double& v : tweaked) v += 0.125;
  m.unflatten_params(tweaked);
  CHECK(m.flatten_params() == tweaked);
  CHECK_THROWS_AS(m.unflatten_params(std::vector<double>(flat.size() + 1)),
                  ConfigError);
}

TEST_CASE("tensor names follow the serialization order") {
  DcfModel m = DcfModel::init(small_config(true, false), 1);
  std::vector<std::string> names;
  for (const auto& t : m.tensors()) names.push_back(t.name);
  const std::vector<std::string> expected = {
      "seed.set0.table", "seed.set0.rnn.w_in", "seed.set0.rnn.w_rec",
      "seed.set0.rnn.b", "seed.set1.table", "seed.dense.w", "seed.dense.b",
      "cand.set0.table", "cand.set0.rnn.w_in", "cand.set0.rnn.w_rec",
      "cand.set0.rnn.b", "cand.set1.table", "cand.dense.w", "cand.dense.b",
      "head.hidden.w", "head.hidden.b", "head.out.w", "head.out.b"};
  CHECK(names == expected);
  // tied models share one embedder
  DcfModel tied = DcfModel::init(small_config(false, true), 1);
  names.clear();
  for (const auto& t : tied.tensors()) names.push_back(t.name);
  CHECK(names == std::vector<std::string>{"seed.set0.table", "seed.set1.table",
                                          "seed.dense.w", "seed.dense.b",
                                          "head.hidden.w", "head.hidden.b",
                                          "head.out.w", "head.out.b"});
}

TEST_CASE("dcf models survive a save/load round trip bit-exactly") {
  for (bool use_rnn : {false, true}) {
    for (bool tied : {false, true}) {
      DcfModel m = DcfModel::init(small_config(use_rnn, tied), 77);
      const fs::path path = temp_file("model.bin");
      save_dcf_model(path.string(), m);
      CHECK(peek_model_kind(path.string()) == "dcf");
      DcfModel loaded = load_dcf_model(path.string());
      CHECK(loaded.flatten_params() == m.flatten_params());
      CHECK(loaded.config().tied == tied);
      CHECK(loaded.config().use_rnn == use_rnn);
      CHECK(loaded.config().schema.names == m.config().schema.names);
      const ItemFeatures s = feats({1, 2}, {4});
      const ItemFeatures r = feats({3}, {1});
      CHECK(loaded.predict(s, r) == m.predict(s, r));
    }
  }
}

TEST_CASE("model loading rejects tampered files") {
  DcfModel m = DcfModel::init(small_config(false, false), 7);
  const fs::path path = temp_file("model.bin");
  save_dcf_model(path.string(), m);

  auto read_bytes = [&]() {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  auto write_bytes = [&](const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  };
  const std::string original = read_bytes();

  // magic
  std::string bad = original;
  bad[0] = 'X';
  write_bytes(bad);
  CHECK_THROWS_AS(load_dcf_model(path.string()), ConfigError);
  CHECK_THROWS_AS(peek_model_kind(path.string()), ConfigError);

  // format version
  bad = original;
  bad[8] = 99;
  write_bytes(bad);
  CHECK_THROWS_AS(load_dcf_model(path.string()), ConfigError);

  // a shape edit in the JSON header must fail the tensor check
  bad = original;
  const auto pos = bad.find("\"token_dim\":3");
  REQUIRE(pos != std::string::npos);
  bad[pos + 12] = '4';
  write_bytes(bad);
  CHECK_THROWS_AS(load_dcf_model(path.string()), ConfigError);

  // truncated tensor data
  write_bytes(original.substr(0, original.size() - 16));
  CHECK_THROWS_AS(load_dcf_model(path.string()), ConfigError);

  write_bytes(original);
  CHECK_NOTHROW(load_dcf_model(path.string()));
  CHECK_THROWS_AS(load_dcf_model("/nonexistent/model.bin"), ConfigError);
}

TEST_CASE("linear models round trip with their metadata") {
  LinearModel m(6);
  m.theta() = {0.0, 1.5, -2.25, 0.0, 3.0, -0.5};
  LinearModelMeta meta;
  meta.featurizer = "content";
  meta.vocab_sizes = {4, 2};
  const fs::path path = temp_file("linear.bin");
  save_linear_model(path.string(), m, meta);
  CHECK(peek_model_kind(path.string()) == "linear");
  auto [loaded, loaded_meta] = load_linear_model(path.string());
  CHECK(loaded.theta() == m.theta());
  CHECK(loaded_meta.featurizer == "content");
  CHECK(loaded_meta.vocab_sizes == std::vector<std::size_t>{4, 2});

  LinearModelMeta ind;
  ind.featurizer = "indicator";
  ind.n_items = 9;
  save_linear_model(path.string(), LinearModel(81), ind);
  auto [m2, meta2] = load_linear_model(path.string());
  CHECK(m2.dim() == 81);
  CHECK(meta2.n_items == 9);
  // kind mismatch: a linear file is not a dcf file
  CHECK_THROWS_AS(load_dcf_model(path.string()), ConfigError);
}
