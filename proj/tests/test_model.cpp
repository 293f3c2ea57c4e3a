#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "argprobe/model.hpp"

using namespace argprobe;

namespace {

ModelConfig tiny_cfg(int vocab = 11) {
  ModelConfig cfg;
  cfg.vocab_size = vocab;
  cfg.d_model = 8;
  cfg.n_layers = 2;
  cfg.n_heads = 2;
  cfg.max_pos = 12;
  cfg.dropout = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("predict_logprobs normalize and are deterministic") {
  TinyMlm m(tiny_cfg());
  m.init_random(7);
  std::vector<int> ids{3, 4, 5, 6, 2, 7};
  auto a = m.predict_logprobs(ids, {2, 4});
  auto b = m.predict_logprobs(ids, {2, 4});
  REQUIRE(a.size() == 2);
  for (size_t i = 0; i < a.size(); ++i) {
    double sum = 0.0;
    for (size_t j = 0; j < a[i].size(); ++j) {
      CHECK(a[i][j] == b[i][j]);
      sum += std::exp(a[i][j]);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("backprop matches central finite differences") {
  TinyMlm m(tiny_cfg());
  m.init_random(11);
  std::vector<int> ids{3, 2, 5, 8, 2, 9};
  std::vector<TinyMlm::CeTarget> ce{{1, 4}, {4, 6}};
  // KL targets against an arbitrary fixed reference distribution.
  const int V = m.config().vocab_size;
  std::vector<double> ref(V);
  {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    double sum = 0.0;
    for (auto& x : ref) sum += (x = u(rng));
    for (auto& x : ref) x = std::log(x / sum);
  }
  std::vector<TinyMlm::KlTarget> kl{{3, ref.data()}};

  std::vector<double> grad(m.n_params(), 0.0);
  m.seq_loss_grad(ids, ce, 0.5, kl, 2.5, nullptr, &grad);

  // Spot-check a deterministic random subset of coordinates.
  std::mt19937_64 pick(99);
  std::uniform_int_distribution<size_t> idx(0, m.n_params() - 1);
  const double h = 1e-5;
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 60; ++trial) {
    const size_t i = idx(pick);
    const double orig = m.params()[i];
    m.params()[i] = orig + h;
    const double lp = m.seq_loss(ids, ce, 0.5, kl, 2.5);
    m.params()[i] = orig - h;
    const double lm = m.seq_loss(ids, ce, 0.5, kl, 2.5);
    m.params()[i] = orig;
    const double fd = (lp - lm) / (2 * h);
    if (std::abs(fd) < 1e-10 && std::abs(grad[i]) < 1e-10) continue;
    CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5));
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("grow_vocab preserves existing weights and appends zero rows") {
  TinyMlm m(tiny_cfg());
  m.init_random(5);
  const auto before = m.params();
  TinyMlm grown = m;
  const int first = grown.grow_vocab(2);
  CHECK(first == 11);
  CHECK(grown.config().vocab_size == 13);
  const int d = m.config().d_model;
  for (int t = 0; t < 11; ++t)
    for (int j = 0; j < d; ++j)
      CHECK(grown.embedding_row(t)[j] == m.embedding_row(t)[j]);
  for (int t = 11; t < 13; ++t)
    for (int j = 0; j < d; ++j) CHECK(grown.embedding_row(t)[j] == 0.0);
  // Predictions on old ids only shift by the enlarged softmax support.
  auto a = m.predict_logprobs({3, 2, 5}, {1});
  auto b = grown.predict_logprobs({3, 2, 5}, {1});
  // Ratio between two old tokens is unchanged.
  CHECK(a[0][3] - a[0][4] == doctest::Approx(b[0][3] - b[0][4]).epsilon(1e-10));
  CHECK(m.params() == before);
}

TEST_CASE("adam freeze mask keeps frozen bytes invariant") {
  TinyMlm m(tiny_cfg());
  m.init_random(13);
  AdamOptimizer opt(m.n_params(), 0.01);
  opt.set_trainable_all(false);
  auto [off, len] = m.embedding_row_span(10);
  opt.set_trainable_range(off, len, true);

  const auto before = m.params();
  std::vector<int> ids{3, 2, 5};
  for (int step = 0; step < 5; ++step) {
    std::vector<double> grad(m.n_params(), 0.0);
    m.seq_loss_grad(ids, {{1, 10}}, 1.0, {}, 0.0, nullptr, &grad);
    opt.step(&m.params(), grad);
  }
  bool novel_changed = false;
  for (size_t i = 0; i < m.n_params(); ++i) {
    if (i >= off && i < off + len) {
      novel_changed = novel_changed || m.params()[i] != before[i];
    } else {
      CHECK(std::memcmp(&m.params()[i], &before[i], sizeof(double)) == 0);
    }
  }
  CHECK(novel_changed);
}

TEST_CASE("dropout is active in training mode and absent in eval") {
  auto cfg = tiny_cfg();
  cfg.dropout = 0.5;
  TinyMlm m(cfg);
  m.init_random(21);
  std::vector<int> ids{3, 2, 5, 6};
  std::mt19937_64 r1(1), r2(2);
  const double a = m.seq_loss_grad(ids, {{1, 4}}, 1.0, {}, 0.0, &r1, nullptr);
  const double b = m.seq_loss_grad(ids, {{1, 4}}, 1.0, {}, 0.0, &r2, nullptr);
  CHECK(a != b);
  const double c = m.seq_loss(ids, {{1, 4}}, 1.0, {}, 0.0);
  const double d = m.seq_loss(ids, {{1, 4}}, 1.0, {}, 0.0);
  CHECK(c == d);
}
