#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace argprobe {

struct ModelConfig {
  int vocab_size = 0;
  int d_model = 32;
  int n_layers = 2;
  int n_heads = 2;
  int max_pos = 48;
  double dropout = 0.1;
};

// Bidirectional transformer encoder with a masked-LM head tied to the input
// embedding matrix. Parameters live in one flat vector so snapshots, hashing,
// freeze masks and the optimizer state stay trivial. All numerics in double.
class TinyMlm {
 public:
  struct TensorSpec {
    std::string name;
    size_t offset;
    size_t size;
  };

  TinyMlm() = default;
  explicit TinyMlm(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  size_t n_params() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<TensorSpec>& layout() const { return layout_; }

  void init_random(std::uint64_t seed);

  // Grows the token embedding (and tied output head) by `count` rows,
  // zero-initialized. Returns the first new row index.
  int grow_vocab(int count);

  size_t tok_emb_offset() const { return off_tok_emb_; }
  double* embedding_row(int token_id);
  const double* embedding_row(int token_id) const;
  // [offset, offset+size) in the flat parameter vector for row `token_id`.
  std::pair<size_t, size_t> embedding_row_span(int token_id) const;

  // Deterministic eval-mode forward: log-probability vector (natural log)
  // over the vocabulary for each requested token position.
  std::vector<std::vector<double>> predict_logprobs(
      const std::vector<int>& ids, const std::vector<int>& positions) const;

  struct CeTarget {
    int pos;
    int target;
  };
  struct KlTarget {
    int pos;
    const double* baseline_logp;  // vocab_size entries, natural log
  };

  // Forward + backward for one sequence. Returns
  //   ce_scale * sum_i nll(ce[i]) + kl_scale * sum_j D_KL(p_model || p_base).
  // Gradients are accumulated into `grad` (same size as params). Dropout is
  // active only when `rng` is non-null.
  double seq_loss_grad(const std::vector<int>& ids,
                       const std::vector<CeTarget>& ce, double ce_scale,
                       const std::vector<KlTarget>& kl, double kl_scale,
                       std::mt19937_64* rng, std::vector<double>* grad) const;

  // Loss only (no gradient, no dropout). Same value as seq_loss_grad without
  // dropout.
  double seq_loss(const std::vector<int>& ids, const std::vector<CeTarget>& ce,
                  double ce_scale, const std::vector<KlTarget>& kl,
                  double kl_scale) const;

 private:
  struct Cache;
  void forward(const std::vector<int>& ids, std::mt19937_64* rng,
               Cache* cache) const;

  ModelConfig cfg_;
  std::vector<double> params_;
  std::vector<TensorSpec> layout_;

  size_t off_tok_emb_ = 0;
  size_t off_pos_emb_ = 0;
  size_t off_emb_ln_g_ = 0, off_emb_ln_b_ = 0;
  struct LayerOffsets {
    size_t wq, bq, wk, bk, wv, bv, wo, bo;
    size_t ln1_g, ln1_b;
    size_t w1, b1, w2, b2;
    size_t ln2_g, ln2_b;
  };
  std::vector<LayerOffsets> layer_off_;
  size_t off_out_bias_ = 0;

  void build_layout();
};

// Adam with a per-element trainable mask. Frozen elements are never touched,
// so their bytes are invariant across any number of steps.
class AdamOptimizer {
 public:
  AdamOptimizer(size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  void set_trainable_all(bool on);
  void set_trainable_range(size_t offset, size_t len, bool on);
  const std::vector<std::uint8_t>& trainable() const { return trainable_; }

  void step(std::vector<double>* params, const std::vector<double>& grad);
  int steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<double> m_, v_;
  std::vector<std::uint8_t> trainable_;
};

}  // namespace argprobe
