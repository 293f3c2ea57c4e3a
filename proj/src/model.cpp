#include "argprobe/model.hpp"

#include <cassert>
#include <cmath>
#include <cstring>

#include "argprobe/error.hpp"
#include "argprobe/kernels.hpp"

namespace argprobe {

namespace {

constexpr double kLnEps = 1e-5;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return cdf + x * pdf;
}

struct LnRowCache {
  std::vector<double> xhat;       // rows*d
  std::vector<double> inv_sigma;  // rows
};

// y = g * (x - mu)/sigma + b, row-wise over `rows` rows of width d.
void layernorm_forward(const double* x, const double* g, const double* b,
                       double* y, int rows, int d, LnRowCache* cache) {
  cache->xhat.resize(static_cast<size_t>(rows) * d);
  cache->inv_sigma.resize(rows);
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<size_t>(r) * d;
    double* yr = y + static_cast<size_t>(r) * d;
    double* xh = cache->xhat.data() + static_cast<size_t>(r) * d;
    double mu = 0.0;
    for (int j = 0; j < d; ++j) mu += xr[j];
    mu /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = xr[j] - mu;
      var += c * c;
    }
    var /= d;
    const double inv = 1.0 / std::sqrt(var + kLnEps);
    cache->inv_sigma[r] = inv;
    for (int j = 0; j < d; ++j) {
      xh[j] = (xr[j] - mu) * inv;
      yr[j] = g[j] * xh[j] + b[j];
    }
  }
}

void layernorm_backward(const double* dy, const double* g,
                        const LnRowCache& cache, double* dx, double* dg,
                        double* db, int rows, int d) {
  for (int r = 0; r < rows; ++r) {
    const double* dyr = dy + static_cast<size_t>(r) * d;
    const double* xh = cache.xhat.data() + static_cast<size_t>(r) * d;
    double* dxr = dx + static_cast<size_t>(r) * d;
    const double inv = cache.inv_sigma[r];
    double sum_dyg = 0.0, sum_dyg_xh = 0.0;
    for (int j = 0; j < d; ++j) {
      const double dyg = dyr[j] * g[j];
      sum_dyg += dyg;
      sum_dyg_xh += dyg * xh[j];
      dg[j] += dyr[j] * xh[j];
      db[j] += dyr[j];
    }
    const double m1 = sum_dyg / d;
    const double m2 = sum_dyg_xh / d;
    for (int j = 0; j < d; ++j) {
      const double dyg = dyr[j] * g[j];
      dxr[j] = inv * (dyg - m1 - xh[j] * m2);
    }
  }
}

void add_bias(const double* b, double* x, int rows, int d) {
  for (int r = 0; r < rows; ++r) {
    double* xr = x + static_cast<size_t>(r) * d;
    for (int j = 0; j < d; ++j) xr[j] += b[j];
  }
}

void bias_grad(const double* dy, double* db, int rows, int d) {
  for (int r = 0; r < rows; ++r) {
    const double* dyr = dy + static_cast<size_t>(r) * d;
    for (int j = 0; j < d; ++j) db[j] += dyr[j];
  }
}

}  // namespace

struct TinyMlm::Cache {
  int T = 0;
  std::vector<int> ids;
  bool dropout_on = false;

  std::vector<double> e;    // T*d, embedding sum pre-LN
  LnRowCache emb_ln;
  std::vector<double> h0;   // T*d, post emb LN
  std::vector<double> emb_drop_mask;  // T*d
  std::vector<double> h0d;  // layer-0 input

  struct Layer {
    std::vector<double> in;   // T*d (input to the layer)
    std::vector<double> q, k, v;  // T*d
    std::vector<double> att;      // heads*T*T (post-softmax)
    std::vector<double> ctx;      // T*d
    std::vector<double> o;        // T*d (post Wo+bo, pre-dropout)
    std::vector<double> att_drop_mask;  // T*d
    std::vector<double> res1;     // T*d
    LnRowCache ln1;
    std::vector<double> h1;       // T*d
    std::vector<double> f1;       // T*hidden (pre-GELU)
    std::vector<double> g1;       // T*hidden
    std::vector<double> f2;       // T*d (post W2+b2, pre-dropout)
    std::vector<double> ffn_drop_mask;  // T*d
    std::vector<double> res2;     // T*d
    LnRowCache ln2;
    std::vector<double> h2;       // T*d
  };
  std::vector<Layer> layers;
};

TinyMlm::TinyMlm(const ModelConfig& cfg) : cfg_(cfg) {
  if (cfg_.d_model % cfg_.n_heads != 0)
    fail(ErrorKind::config, "d_model must be divisible by n_heads");
  build_layout();
  params_.assign(layout_.back().offset + layout_.back().size, 0.0);
}

void TinyMlm::build_layout() {
  layout_.clear();
  layer_off_.clear();
  size_t off = 0;
  auto add = [&](const std::string& name, size_t size) {
    layout_.push_back({name, off, size});
    const size_t at = off;
    off += size;
    return at;
  };
  const size_t d = cfg_.d_model;
  const size_t hidden = 4 * d;
  off_tok_emb_ = add("tok_emb", static_cast<size_t>(cfg_.vocab_size) * d);
  off_pos_emb_ = add("pos_emb", static_cast<size_t>(cfg_.max_pos) * d);
  off_emb_ln_g_ = add("emb_ln_g", d);
  off_emb_ln_b_ = add("emb_ln_b", d);
  for (int l = 0; l < cfg_.n_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    LayerOffsets lo;
    lo.wq = add(p + "wq", d * d);
    lo.bq = add(p + "bq", d);
    lo.wk = add(p + "wk", d * d);
    lo.bk = add(p + "bk", d);
    lo.wv = add(p + "wv", d * d);
    lo.bv = add(p + "bv", d);
    lo.wo = add(p + "wo", d * d);
    lo.bo = add(p + "bo", d);
    lo.ln1_g = add(p + "ln1_g", d);
    lo.ln1_b = add(p + "ln1_b", d);
    lo.w1 = add(p + "w1", d * hidden);
    lo.b1 = add(p + "b1", hidden);
    lo.w2 = add(p + "w2", hidden * d);
    lo.b2 = add(p + "b2", d);
    lo.ln2_g = add(p + "ln2_g", d);
    lo.ln2_b = add(p + "ln2_b", d);
    layer_off_.push_back(lo);
  }
  off_out_bias_ = add("out_bias", cfg_.vocab_size);
}

void TinyMlm::init_random(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.02);
  for (auto& spec : layout_) {
    double* p = params_.data() + spec.offset;
    const bool is_ln_gain = spec.name.find("ln_g") != std::string::npos ||
                            spec.name.find("ln1_g") != std::string::npos ||
                            spec.name.find("ln2_g") != std::string::npos;
    const bool is_bias = spec.name.find("ln_b") != std::string::npos ||
                         spec.name.find("ln1_b") != std::string::npos ||
                         spec.name.find("ln2_b") != std::string::npos ||
                         spec.name.find(".b") != std::string::npos ||
                         spec.name == "out_bias";
    if (is_ln_gain) {
      std::fill(p, p + spec.size, 1.0);
    } else if (is_bias) {
      std::fill(p, p + spec.size, 0.0);
    } else {
      for (size_t i = 0; i < spec.size; ++i) p[i] = gauss(rng);
    }
  }
}

int TinyMlm::grow_vocab(int count) {
  const int first_new = cfg_.vocab_size;
  const size_t d = cfg_.d_model;
  ModelConfig new_cfg = cfg_;
  new_cfg.vocab_size += count;
  TinyMlm bigger(new_cfg);
  // Copy every tensor; the token embedding and out bias grow with zeros.
  std::memcpy(bigger.params_.data() + bigger.off_tok_emb_,
              params_.data() + off_tok_emb_,
              static_cast<size_t>(cfg_.vocab_size) * d * sizeof(double));
  const size_t mid_src = off_pos_emb_;
  const size_t mid_len = off_out_bias_ - off_pos_emb_;
  std::memcpy(bigger.params_.data() + bigger.off_pos_emb_,
              params_.data() + mid_src, mid_len * sizeof(double));
  std::memcpy(bigger.params_.data() + bigger.off_out_bias_,
              params_.data() + off_out_bias_,
              static_cast<size_t>(cfg_.vocab_size) * sizeof(double));
  *this = std::move(bigger);
  return first_new;
}

double* TinyMlm::embedding_row(int token_id) {
  return params_.data() + off_tok_emb_ +
         static_cast<size_t>(token_id) * cfg_.d_model;
}

const double* TinyMlm::embedding_row(int token_id) const {
  return params_.data() + off_tok_emb_ +
         static_cast<size_t>(token_id) * cfg_.d_model;
}

std::pair<size_t, size_t> TinyMlm::embedding_row_span(int token_id) const {
  return {off_tok_emb_ + static_cast<size_t>(token_id) * cfg_.d_model,
          static_cast<size_t>(cfg_.d_model)};
}

void TinyMlm::forward(const std::vector<int>& ids, std::mt19937_64* rng,
                      Cache* c) const {
  const int T = static_cast<int>(ids.size());
  if (T > cfg_.max_pos)
    fail(ErrorKind::bounds, "sequence length exceeds max positions");
  const int d = cfg_.d_model;
  const int hidden = 4 * d;
  const int heads = cfg_.n_heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const double* P = params_.data();

  c->T = T;
  c->ids = ids;
  c->dropout_on = (rng != nullptr && cfg_.dropout > 0.0);
  const size_t td = static_cast<size_t>(T) * d;

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto make_mask = [&](std::vector<double>* mask) {
    mask->assign(td, 1.0);
    if (!c->dropout_on) return;
    const double keep = 1.0 - cfg_.dropout;
    for (auto& m : *mask) m = (uni(*rng) < keep) ? (1.0 / keep) : 0.0;
  };

  c->e.resize(td);
  for (int t = 0; t < T; ++t) {
    const double* er = P + off_tok_emb_ + static_cast<size_t>(ids[t]) * d;
    const double* pr = P + off_pos_emb_ + static_cast<size_t>(t) * d;
    for (int j = 0; j < d; ++j) c->e[static_cast<size_t>(t) * d + j] = er[j] + pr[j];
  }
  c->h0.resize(td);
  layernorm_forward(c->e.data(), P + off_emb_ln_g_, P + off_emb_ln_b_,
                    c->h0.data(), T, d, &c->emb_ln);
  make_mask(&c->emb_drop_mask);
  c->h0d.resize(td);
  for (size_t i = 0; i < td; ++i) c->h0d[i] = c->h0[i] * c->emb_drop_mask[i];

  c->layers.resize(cfg_.n_layers);
  const std::vector<double>* cur = &c->h0d;
  for (int l = 0; l < cfg_.n_layers; ++l) {
    auto& L = c->layers[l];
    const auto& lo = layer_off_[l];
    L.in = *cur;
    L.q.resize(td);
    L.k.resize(td);
    L.v.resize(td);
    kern::matmul(L.in.data(), P + lo.wq, L.q.data(), T, d, d);
    add_bias(P + lo.bq, L.q.data(), T, d);
    kern::matmul(L.in.data(), P + lo.wk, L.k.data(), T, d, d);
    add_bias(P + lo.bk, L.k.data(), T, d);
    kern::matmul(L.in.data(), P + lo.wv, L.v.data(), T, d, d);
    add_bias(P + lo.bv, L.v.data(), T, d);

    L.att.assign(static_cast<size_t>(heads) * T * T, 0.0);
    L.ctx.assign(td, 0.0);
    for (int h = 0; h < heads; ++h) {
      double* att = L.att.data() + static_cast<size_t>(h) * T * T;
      for (int i = 0; i < T; ++i) {
        const double* qi = L.q.data() + static_cast<size_t>(i) * d + h * dh;
        for (int j = 0; j < T; ++j) {
          const double* kj = L.k.data() + static_cast<size_t>(j) * d + h * dh;
          double acc = 0.0;
          for (int x = 0; x < dh; ++x) acc += qi[x] * kj[x];
          att[static_cast<size_t>(i) * T + j] = acc * scale;
        }
      }
      kern::softmax_rows(att, T, T);
      for (int i = 0; i < T; ++i) {
        double* ci = L.ctx.data() + static_cast<size_t>(i) * d + h * dh;
        const double* ai = att + static_cast<size_t>(i) * T;
        for (int j = 0; j < T; ++j) {
          const double* vj = L.v.data() + static_cast<size_t>(j) * d + h * dh;
          const double a = ai[j];
          for (int x = 0; x < dh; ++x) ci[x] += a * vj[x];
        }
      }
    }
    L.o.resize(td);
    kern::matmul(L.ctx.data(), P + lo.wo, L.o.data(), T, d, d);
    add_bias(P + lo.bo, L.o.data(), T, d);
    make_mask(&L.att_drop_mask);
    L.res1.resize(td);
    for (size_t i = 0; i < td; ++i)
      L.res1[i] = L.in[i] + L.o[i] * L.att_drop_mask[i];
    L.h1.resize(td);
    layernorm_forward(L.res1.data(), P + lo.ln1_g, P + lo.ln1_b, L.h1.data(),
                      T, d, &L.ln1);

    L.f1.resize(static_cast<size_t>(T) * hidden);
    kern::matmul(L.h1.data(), P + lo.w1, L.f1.data(), T, d, hidden);
    add_bias(P + lo.b1, L.f1.data(), T, hidden);
    L.g1.resize(L.f1.size());
    for (size_t i = 0; i < L.f1.size(); ++i) L.g1[i] = gelu(L.f1[i]);
    L.f2.resize(td);
    kern::matmul(L.g1.data(), P + lo.w2, L.f2.data(), T, hidden, d);
    add_bias(P + lo.b2, L.f2.data(), T, d);
    make_mask(&L.ffn_drop_mask);
    L.res2.resize(td);
    for (size_t i = 0; i < td; ++i)
      L.res2[i] = L.h1[i] + L.f2[i] * L.ffn_drop_mask[i];
    L.h2.resize(td);
    layernorm_forward(L.res2.data(), P + lo.ln2_g, P + lo.ln2_b, L.h2.data(),
                      T, d, &L.ln2);
    cur = &L.h2;
  }
}

std::vector<std::vector<double>> TinyMlm::predict_logprobs(
    const std::vector<int>& ids, const std::vector<int>& positions) const {
  Cache c;
  forward(ids, nullptr, &c);
  const int d = cfg_.d_model;
  const int V = cfg_.vocab_size;
  const double* H = cfg_.n_layers > 0 ? c.layers.back().h2.data() : c.h0d.data();
  const double* E = params_.data() + off_tok_emb_;
  const double* bo = params_.data() + off_out_bias_;
  std::vector<std::vector<double>> out;
  out.reserve(positions.size());
  for (int pos : positions) {
    if (pos < 0 || pos >= c.T)
      fail(ErrorKind::bounds, "mask position out of range");
    std::vector<double> logits(V);
    kern::matmul_transb(H + static_cast<size_t>(pos) * d, E, logits.data(), 1,
                        d, V);
    for (int i = 0; i < V; ++i) logits[i] += bo[i];
    kern::log_softmax_rows(logits.data(), 1, V);
    out.push_back(std::move(logits));
  }
  return out;
}

double TinyMlm::seq_loss_grad(const std::vector<int>& ids,
                              const std::vector<CeTarget>& ce, double ce_scale,
                              const std::vector<KlTarget>& kl, double kl_scale,
                              std::mt19937_64* rng,
                              std::vector<double>* grad) const {
  Cache c;
  forward(ids, rng, &c);
  const int T = c.T;
  const int d = cfg_.d_model;
  const int hidden = 4 * d;
  const int V = cfg_.vocab_size;
  const int heads = cfg_.n_heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const double* P = params_.data();
  const double* E = P + off_tok_emb_;
  const double* bo_out = P + off_out_bias_;
  const size_t td = static_cast<size_t>(T) * d;
  const double* H = cfg_.n_layers > 0 ? c.layers.back().h2.data() : c.h0d.data();

  double loss = 0.0;
  // dH holds the gradient flowing into the top hidden states.
  std::vector<double> dH(td, 0.0);

  auto logits_at = [&](int pos, std::vector<double>* logp) {
    logp->resize(V);
    kern::matmul_transb(H + static_cast<size_t>(pos) * d, E, logp->data(), 1,
                        d, V);
    for (int i = 0; i < V; ++i) (*logp)[i] += bo_out[i];
    kern::log_softmax_rows(logp->data(), 1, V);
  };

  const bool want_grad = grad != nullptr;
  std::vector<double> dlogits;
  std::vector<double> logp;
  auto apply_head_grad = [&](int pos) {
    if (!want_grad) return;
    // dH_pos += dlogits * E;  dE_i += dlogits_i * H_pos;  db_out += dlogits.
    double* dHp = dH.data() + static_cast<size_t>(pos) * d;
    const double* Hp = H + static_cast<size_t>(pos) * d;
    double* dE = grad->data() + off_tok_emb_;
    double* dbo = grad->data() + off_out_bias_;
    for (int i = 0; i < V; ++i) {
      const double g = dlogits[i];
      if (g == 0.0) continue;
      dbo[i] += g;
      const double* Ei = E + static_cast<size_t>(i) * d;
      double* dEi = dE + static_cast<size_t>(i) * d;
      for (int j = 0; j < d; ++j) {
        dHp[j] += g * Ei[j];
        dEi[j] += g * Hp[j];
      }
    }
  };

  for (const auto& t : ce) {
    if (t.pos < 0 || t.pos >= T) fail(ErrorKind::bounds, "ce position");
    logits_at(t.pos, &logp);
    loss += ce_scale * (-logp[t.target]);
    if (want_grad) {
      dlogits.assign(V, 0.0);
      for (int i = 0; i < V; ++i)
        dlogits[i] = ce_scale * std::exp(logp[i]);
      dlogits[t.target] -= ce_scale;
      apply_head_grad(t.pos);
    }
  }
  for (const auto& t : kl) {
    if (t.pos < 0 || t.pos >= T) fail(ErrorKind::bounds, "kl position");
    logits_at(t.pos, &logp);
    double div = 0.0;
    for (int i = 0; i < V; ++i) {
      const double pi = std::exp(logp[i]);
      div += pi * (logp[i] - t.baseline_logp[i]);
    }
    loss += kl_scale * div;
    if (want_grad) {
      dlogits.resize(V);
      for (int i = 0; i < V; ++i) {
        const double pi = std::exp(logp[i]);
        dlogits[i] = kl_scale * pi * ((logp[i] - t.baseline_logp[i]) - div);
      }
      apply_head_grad(t.pos);
    }
  }
  if (!want_grad) return loss;

  // Backward through the stack.
  std::vector<double> dcur = dH;
  std::vector<double> dtmp(td), dres(td);
  std::vector<double> df1(static_cast<size_t>(T) * hidden);
  std::vector<double> dg1(static_cast<size_t>(T) * hidden);
  for (int l = cfg_.n_layers - 1; l >= 0; --l) {
    const auto& L = c.layers[l];
    const auto& lo = layer_off_[l];
    double* G = grad->data();
    // LN2
    layernorm_backward(dcur.data(), P + lo.ln2_g, L.ln2, dres.data(),
                       G + lo.ln2_g, G + lo.ln2_b, T, d);
    // res2 = h1 + dropout(f2); df2 = mask .* dres, dh1 = dres (residual)
    std::vector<double> df2(td);
    for (size_t i = 0; i < td; ++i) df2[i] = dres[i] * L.ffn_drop_mask[i];
    std::vector<double> dh1 = dres;
    // f2 = g1 W2 + b2
    bias_grad(df2.data(), G + lo.b2, T, d);
    kern::matmul_transa_acc(L.g1.data(), df2.data(), G + lo.w2, T, hidden, d);
    kern::matmul_transb(df2.data(), P + lo.w2, dg1.data(), T, d, hidden);
    for (size_t i = 0; i < dg1.size(); ++i)
      df1[i] = dg1[i] * gelu_grad(L.f1[i]);
    bias_grad(df1.data(), G + lo.b1, T, hidden);
    kern::matmul_transa_acc(L.h1.data(), df1.data(), G + lo.w1, T, d, hidden);
    kern::matmul_transb(df1.data(), P + lo.w1, dtmp.data(), T, hidden, d);
    for (size_t i = 0; i < td; ++i) dh1[i] += dtmp[i];
    // LN1
    layernorm_backward(dh1.data(), P + lo.ln1_g, L.ln1, dres.data(),
                       G + lo.ln1_g, G + lo.ln1_b, T, d);
    // res1 = in + dropout(o)
    std::vector<double> do_(td);
    for (size_t i = 0; i < td; ++i) do_[i] = dres[i] * L.att_drop_mask[i];
    std::vector<double> din = dres;  // residual path
    // o = ctx Wo + bo
    bias_grad(do_.data(), G + lo.bo, T, d);
    kern::matmul_transa_acc(L.ctx.data(), do_.data(), G + lo.wo, T, d, d);
    std::vector<double> dctx(td);
    kern::matmul_transb(do_.data(), P + lo.wo, dctx.data(), T, d, d);
    // attention backward per head
    std::vector<double> dq(td, 0.0), dk(td, 0.0), dv(td, 0.0);
    for (int h = 0; h < heads; ++h) {
      const double* att = L.att.data() + static_cast<size_t>(h) * T * T;
      std::vector<double> datt(static_cast<size_t>(T) * T, 0.0);
      for (int i = 0; i < T; ++i) {
        const double* dci = dctx.data() + static_cast<size_t>(i) * d + h * dh;
        const double* ai = att + static_cast<size_t>(i) * T;
        double* dai = datt.data() + static_cast<size_t>(i) * T;
        for (int j = 0; j < T; ++j) {
          const double* vj = L.v.data() + static_cast<size_t>(j) * d + h * dh;
          double* dvj = dv.data() + static_cast<size_t>(j) * d + h * dh;
          double acc = 0.0;
          for (int x = 0; x < dh; ++x) {
            acc += dci[x] * vj[x];
            dvj[x] += ai[j] * dci[x];
          }
          dai[j] = acc;
        }
        // softmax backward for row i
        double dot = 0.0;
        for (int j = 0; j < T; ++j) dot += dai[j] * ai[j];
        for (int j = 0; j < T; ++j) dai[j] = ai[j] * (dai[j] - dot);
      }
      for (int i = 0; i < T; ++i) {
        double* dqi = dq.data() + static_cast<size_t>(i) * d + h * dh;
        const double* dai = datt.data() + static_cast<size_t>(i) * T;
        for (int j = 0; j < T; ++j) {
          const double* kj = L.k.data() + static_cast<size_t>(j) * d + h * dh;
          const double* qi = L.q.data() + static_cast<size_t>(i) * d + h * dh;
          double* dkj = dk.data() + static_cast<size_t>(j) * d + h * dh;
          const double g = dai[j] * scale;
          for (int x = 0; x < dh; ++x) {
            dqi[x] += g * kj[x];
            dkj[x] += g * qi[x];
          }
        }
      }
    }
    // q/k/v projections
    bias_grad(dq.data(), G + lo.bq, T, d);
    kern::matmul_transa_acc(L.in.data(), dq.data(), G + lo.wq, T, d, d);
    kern::matmul_transb(dq.data(), P + lo.wq, dtmp.data(), T, d, d);
    for (size_t i = 0; i < td; ++i) din[i] += dtmp[i];
    bias_grad(dk.data(), G + lo.bk, T, d);
    kern::matmul_transa_acc(L.in.data(), dk.data(), G + lo.wk, T, d, d);
    kern::matmul_transb(dk.data(), P + lo.wk, dtmp.data(), T, d, d);
    for (size_t i = 0; i < td; ++i) din[i] += dtmp[i];
    bias_grad(dv.data(), G + lo.bv, T, d);
    kern::matmul_transa_acc(L.in.data(), dv.data(), G + lo.wv, T, d, d);
    kern::matmul_transb(dv.data(), P + lo.wv, dtmp.data(), T, d, d);
    for (size_t i = 0; i < td; ++i) din[i] += dtmp[i];
    dcur = std::move(din);
  }
  // embedding dropout + LN + table lookups
  for (size_t i = 0; i < td; ++i) dcur[i] *= c.emb_drop_mask[i];
  std::vector<double> de(td);
  layernorm_backward(dcur.data(), P + off_emb_ln_g_, c.emb_ln, de.data(),
                     grad->data() + off_emb_ln_g_,
                     grad->data() + off_emb_ln_b_, T, d);
  for (int t = 0; t < T; ++t) {
    double* dErow = grad->data() + off_tok_emb_ +
                    static_cast<size_t>(ids[t]) * d;
    double* dProw = grad->data() + off_pos_emb_ + static_cast<size_t>(t) * d;
    const double* det = de.data() + static_cast<size_t>(t) * d;
    for (int j = 0; j < d; ++j) {
      dErow[j] += det[j];
      dProw[j] += det[j];
    }
  }
  return loss;
}

double TinyMlm::seq_loss(const std::vector<int>& ids,
                         const std::vector<CeTarget>& ce, double ce_scale,
                         const std::vector<KlTarget>& kl,
                         double kl_scale) const {
  return seq_loss_grad(ids, ce, ce_scale, kl, kl_scale, nullptr, nullptr);
}

AdamOptimizer::AdamOptimizer(size_t n, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0),
      trainable_(n, 1) {}

void AdamOptimizer::set_trainable_all(bool on) {
  std::fill(trainable_.begin(), trainable_.end(), on ? 1 : 0);
}

void AdamOptimizer::set_trainable_range(size_t offset, size_t len, bool on) {
  for (size_t i = offset; i < offset + len && i < trainable_.size(); ++i)
    trainable_[i] = on ? 1 : 0;
}

void AdamOptimizer::step(std::vector<double>* params,
                         const std::vector<double>& grad) {
  if (params->size() != m_.size() || grad.size() != m_.size())
    fail(ErrorKind::shape, "optimizer/parameter size mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  double* p = params->data();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(m_.size()); ++i) {
    if (!trainable_[i]) continue;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double mh = m_[i] / bc1;
    const double vh = v_[i] / bc2;
    p[i] -= lr_ * mh / (std::sqrt(vh) + eps_);
  }
}

}  // namespace argprobe
