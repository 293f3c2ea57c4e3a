#include "argprobe/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "argprobe/error.hpp"

using nlohmann::json;

namespace argprobe::tuning {

size_t ReferencePool::size() const {
  size_t n = 0;
  for (const auto& c : corpora) n += c.sentences.size();
  return n;
}

ReferencePool load_reference_pool(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) fail(ErrorKind::io, "cannot open pool manifest in " + dir);
  json j;
  mf >> j;
  const size_t cap = j.value("cap", size_t{10000});
  ReferencePool pool;
  double total = 0.0;
  for (const auto& c : j.at("corpora")) {
    ReferencePool::Corpus corpus;
    corpus.name = c.at("file");
    corpus.proportion = c.at("proportion");
    total += corpus.proportion;
    std::ifstream f(dir + "/" + corpus.name);
    if (!f) fail(ErrorKind::io, "cannot open corpus " + corpus.name);
    std::string line;
    while (corpus.sentences.size() < cap && std::getline(f, line))
      if (!line.empty()) corpus.sentences.push_back(line);
    pool.corpora.push_back(std::move(corpus));
  }
  if (std::abs(total - 1.0) > 1e-9)
    fail(ErrorKind::config, "corpus mix proportions must sum to 1");
  return pool;
}

std::vector<std::string> sample_reference_batch(const ReferencePool& pool,
                                                int n, std::uint64_t seed,
                                                int step) {
  if (n <= 0) fail(ErrorKind::sampling, "sample size must be positive");
  // largest-remainder allocation of n across corpora
  const size_t k = pool.corpora.size();
  std::vector<int> counts(k);
  std::vector<std::pair<double, size_t>> remainders;
  int assigned = 0;
  for (size_t i = 0; i < k; ++i) {
    const double exact = pool.corpora[i].proportion * n;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.push_back({exact - counts[i], i});
  }
  std::sort(remainders.begin(), remainders.end(), [](auto& a, auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (int r = 0; r < n - assigned; ++r)
    counts[remainders[r % k].second]++;
  std::vector<std::string> out;
  out.reserve(n);
  for (size_t i = 0; i < k; ++i) {
    const auto& sents = pool.corpora[i].sentences;
    if (counts[i] > static_cast<int>(sents.size()))
      fail(ErrorKind::sampling,
           "corpus " + pool.corpora[i].name + " holds " +
               std::to_string(sents.size()) + " sentences, need " +
               std::to_string(counts[i]));
    std::seed_seq sq{seed, static_cast<std::uint64_t>(step),
                     static_cast<std::uint64_t>(i)};
    std::mt19937_64 rng(sq);
    std::sample(sents.begin(), sents.end(), std::back_inserter(out),
                counts[i], rng);
  }
  return out;
}

namespace {

double kl_pair(const std::vector<double>& model_logp,
               const std::vector<double>& base_logp) {
  if (model_logp.size() != base_logp.size())
    fail(ErrorKind::shape, "distribution support mismatch");
  double kl = 0.0;
  for (size_t j = 0; j < model_logp.size(); ++j)
    kl += std::exp(model_logp[j]) * (model_logp[j] - base_logp[j]);
  return kl;
}

}  // namespace

LossBreakdown compute_loss(
    const std::vector<backend::DistributionSet>& target_dists,
    const std::vector<std::vector<int>>& targets,
    const std::vector<backend::DistributionSet>& model_ref_dists,
    const std::vector<backend::DistributionSet>& baseline_ref_dists,
    const LossConfig& cfg) {
  if (target_dists.size() != targets.size())
    fail(ErrorKind::shape, "targets do not align with distributions");
  LossBreakdown out;
  for (size_t s = 0; s < target_dists.size(); ++s) {
    const auto& d = target_dists[s];
    if (d.logprobs.size() != targets[s].size())
      fail(ErrorKind::shape, "per-position target count mismatch");
    for (size_t p = 0; p < targets[s].size(); ++p) {
      const int t = targets[s][p];
      if (t < 0 || t >= static_cast<int>(d.logprobs[p].size()))
        fail(ErrorKind::bounds, "target id outside the vocabulary");
      out.ce -= d.logprobs[p][t];
    }
  }
  if (cfg.lambda > 0.0) {
    if (model_ref_dists.size() != baseline_ref_dists.size())
      fail(ErrorKind::shape, "reference distribution sets do not align");
    for (size_t s = 0; s < model_ref_dists.size(); ++s) {
      const auto& m = model_ref_dists[s];
      const auto& b = baseline_ref_dists[s];
      if (m.logprobs.size() != b.logprobs.size())
        fail(ErrorKind::shape, "reference position count mismatch");
      for (size_t p = 0; p < m.logprobs.size(); ++p)
        out.kl += kl_pair(m.logprobs[p], b.logprobs[p]);
    }
  }
  out.total = out.ce + cfg.lambda * out.kl;
  return out;
}

StopDecision early_stop_decision(const TuningTrajectory& trajectory,
                                 const TuningConfig& cfg) {
  if (trajectory.epochs.empty())
    fail(ErrorKind::validation, "no validation evaluation recorded");
  const int epoch = trajectory.epochs.back().epoch;
  if (epoch >= cfg.max_epochs) return StopDecision::stop;
  const int since_best =
      trajectory.best_epoch > 0 ? epoch - trajectory.best_epoch : epoch;
  if (epoch >= cfg.min_epochs && since_best >= cfg.patience)
    return StopDecision::stop;
  return StopDecision::proceed;
}

namespace {

// One tokenized sentence ready for training/scoring.
struct Prepared {
  std::vector<int> masked_ids;           // masks substituted
  std::vector<TinyMlm::CeTarget> ce;     // positions + expected ids
  // Paired argument positions for confidence: (own position, paired
  // position, expected id). Both positions masked jointly when scored.
  struct Pair {
    int own, other, expected;
  };
  std::vector<Pair> pairs;
};

int token_pos(const Tokenizer::Encoding& enc, int word_index,
              const std::string& id) {
  int pos = -1;
  for (size_t i = 0; i < enc.word_index.size(); ++i) {
    if (enc.word_index[i] == word_index) {
      if (pos >= 0)
        fail(ErrorKind::generation, "slot spans several tokens in " + id);
      pos = static_cast<int>(i);
    }
  }
  if (pos < 0)
    fail(ErrorKind::generation, "slot word index out of range in " + id);
  return pos;
}

paradigm::SlotRole paired_role(paradigm::SlotRole r) {
  using paradigm::SlotRole;
  switch (r) {
    case SlotRole::theme: return SlotRole::goal;
    case SlotRole::goal: return SlotRole::theme;
    case SlotRole::subject: return SlotRole::object;
    case SlotRole::object: return SlotRole::subject;
    default: return r;
  }
}

Prepared prepare(const paradigm::GeneratedSentence& s, const Tokenizer& tok) {
  Prepared out;
  const auto enc = tok.encode(s.text);
  out.masked_ids = enc.ids;
  for (const auto& slot : s.slots) {
    if (!slot.masked) continue;
    const int pos = token_pos(enc, slot.word_index, s.id);
    out.masked_ids[pos] = tok.mask_id();
    if (!slot.expected.empty()) {
      const int id = tok.token_id(tok.normalize(slot.expected));
      if (id < 0)
        fail(ErrorKind::missing_token,
             "expected token not in vocabulary: " + slot.expected);
      out.ce.push_back({pos, id});
      const auto other = s.slot_by_role(paired_role(slot.role));
      if (other && other->word_index != slot.word_index &&
          paired_role(slot.role) != slot.role) {
        out.pairs.push_back(
            {pos, token_pos(enc, other->word_index, s.id), id});
      }
    }
  }
  return out;
}

struct SubpartScore {
  double loss = 0.0;
  double accuracy = 0.0;
  double confidence = 0.0;
};

SubpartScore score_subpart(const TinyMlm& model, const Tokenizer& tok,
                           const std::vector<Prepared>& prepared) {
  SubpartScore out;
  int n_targets = 0, n_correct = 0, n_pairs = 0;
  double conf = 0.0;
  for (const auto& p : prepared) {
    if (p.ce.empty()) continue;
    std::vector<int> positions;
    for (const auto& ce : p.ce) positions.push_back(ce.pos);
    const auto dists = model.predict_logprobs(p.masked_ids, positions);
    for (size_t i = 0; i < p.ce.size(); ++i) {
      const auto& lp = dists[i];
      const double target_lp = lp[p.ce[i].target];
      out.loss -= target_lp;
      ++n_targets;
      bool strict_best = true;
      for (size_t j = 0; j < lp.size(); ++j)
        if (static_cast<int>(j) != p.ce[i].target && lp[j] >= target_lp)
          strict_best = false;
      if (strict_best) ++n_correct;
    }
    for (const auto& pair : p.pairs) {
      auto ids = p.masked_ids;
      ids[pair.own] = tok.mask_id();
      ids[pair.other] = tok.mask_id();
      const auto d = model.predict_logprobs(ids, {pair.own, pair.other});
      conf += d[0][pair.expected] - d[1][pair.expected];
      ++n_pairs;
    }
  }
  if (n_targets > 0) {
    out.loss /= n_targets;
    out.accuracy = static_cast<double>(n_correct) / n_targets;
  }
  if (n_pairs > 0) out.confidence = conf / n_pairs;
  return out;
}

}  // namespace

FinetunedState finetune(backend::ModelHandle& handle,
                        const paradigm::GeneratedDataset& tuning_data,
                        const std::vector<paradigm::GeneratedDataset>&
                            validation_subparts,
                        const TuningConfig& cfg, const LossConfig& loss_cfg,
                        const ReferencePool* pool,
                        TuningTrajectory* trajectory) {
  if (cfg.min_epochs > cfg.max_epochs || cfg.patience < 1 ||
      cfg.learning_rate <= 0.0)
    fail(ErrorKind::config, "invalid tuning configuration");
  if (loss_cfg.lambda > 0.0 && pool == nullptr)
    fail(ErrorKind::config, "KL regularizer needs a reference pool");
  if (trajectory == nullptr)
    fail(ErrorKind::config, "finetune needs a trajectory sink");
  *trajectory = TuningTrajectory{};

  auto& model = handle.model();
  const auto& tok = handle.tokenizer();
  handle.set_freeze_policy(cfg.freeze_policy);
  AdamOptimizer opt(model.n_params(), cfg.learning_rate);
  handle.configure_optimizer(&opt);

  std::vector<Prepared> train;
  for (const auto& s : tuning_data.sentences) train.push_back(prepare(s, tok));
  std::vector<std::vector<Prepared>> val;
  for (const auto& sp : validation_subparts) {
    std::vector<Prepared> prepared;
    for (const auto& s : sp.sentences) prepared.push_back(prepare(s, tok));
    val.push_back(std::move(prepared));
  }

  // Baseline weights for the drift penalty: the handle's recorded baseline,
  // which must match the current (novel-token-grown) parameter shape.
  TinyMlm baseline;
  std::unordered_map<std::string, std::vector<std::vector<double>>> base_cache;
  if (loss_cfg.lambda > 0.0) {
    const auto& base_params =
        handle.snapshot_params(handle.baseline_snapshot_hash());
    if (base_params.size() != model.n_params())
      fail(ErrorKind::shape,
           "baseline snapshot predates vocabulary growth; re-record it");
    baseline = model;
    baseline.params() = base_params;
  }

  std::mt19937_64 dropout_rng(cfg.seed);
  std::vector<double> grad(model.n_params());
  trajectory->best_val_loss = std::numeric_limits<double>::infinity();

  FinetunedState best;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // --- one full-batch optimizer step
    std::fill(grad.begin(), grad.end(), 0.0);
    double train_loss = 0.0;
    for (const auto& p : train)
      train_loss += model.seq_loss_grad(p.masked_ids, p.ce, 1.0, {}, 0.0,
                                        &dropout_rng, &grad);
    if (loss_cfg.lambda > 0.0) {
      const auto batch = sample_reference_batch(*pool, loss_cfg.kl_sample_size,
                                                cfg.seed, epoch);
      for (const auto& sent : batch) {
        auto it = base_cache.find(sent);
        if (it == base_cache.end()) {
          auto ids = tok.encode_ids(sent);
          if (static_cast<int>(ids.size()) > model.config().max_pos)
            ids.resize(model.config().max_pos);
          std::vector<int> all(ids.size());
          for (size_t i = 0; i < ids.size(); ++i) all[i] = static_cast<int>(i);
          it = base_cache.emplace(sent, baseline.predict_logprobs(ids, all))
                   .first;
        }
        auto ids = tok.encode_ids(sent);
        if (static_cast<int>(ids.size()) > model.config().max_pos)
          ids.resize(model.config().max_pos);
        std::vector<TinyMlm::KlTarget> kl;
        for (size_t i = 0; i < ids.size(); ++i)
          kl.push_back({static_cast<int>(i), it->second[i].data()});
        train_loss += model.seq_loss_grad(ids, {}, 0.0, kl, loss_cfg.lambda,
                                          nullptr, &grad);
      }
    }
    opt.step(&model.params(), grad);
    handle.bump_state_version();

    // --- validation (dropout disabled)
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss;
    double val_sum = 0.0;
    for (const auto& sp : val) {
      const auto score = score_subpart(model, tok, sp);
      rec.subpart_loss.push_back(score.loss);
      rec.subpart_accuracy.push_back(score.accuracy);
      rec.subpart_confidence.push_back(score.confidence);
      val_sum += score.loss;
    }
    rec.val_loss = val.empty() ? train_loss : val_sum / val.size();

    if (!std::isfinite(train_loss) || !std::isfinite(rec.val_loss)) {
      trajectory->diverged = true;
      trajectory->epochs.push_back(std::move(rec));
      fail(ErrorKind::divergence,
           "non-finite loss at epoch " + std::to_string(epoch));
    }
    if (rec.val_loss < trajectory->best_val_loss) {
      trajectory->best_val_loss = rec.val_loss;
      trajectory->best_epoch = epoch;
      trajectory->best_snapshot = handle.snapshot();
      rec.is_best = true;
      best = {trajectory->best_snapshot, epoch, rec.val_loss};
    }
    trajectory->epochs.push_back(std::move(rec));
    if (early_stop_decision(*trajectory, cfg) == StopDecision::stop) break;
  }
  if (best.snapshot_hash == 0)
    fail(ErrorKind::validation, "no epoch produced a finite validation loss");
  handle.restore(best.snapshot_hash);
  return best;
}

void write_trajectory(const TuningTrajectory& trajectory,
                      const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io, "cannot write trajectory: " + path);
  for (const auto& e : trajectory.epochs) {
    json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["subpart_loss"] = e.subpart_loss;
    j["subpart_accuracy"] = e.subpart_accuracy;
    j["subpart_confidence"] = e.subpart_confidence;
    j["val_loss"] = e.val_loss;
    j["is_best"] = e.is_best;
    f << j.dump() << "\n";
  }
}

}  // namespace argprobe::tuning
