#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "argprobe/backend.hpp"
#include "argprobe/paradigm.hpp"

namespace argprobe::tuning {

struct TuningConfig {
  backend::FreezePolicy freeze_policy =
      backend::FreezePolicy::novel_embeddings_only;
  double learning_rate = 0.001;
  int max_epochs = 260;
  int min_epochs = 1;
  int patience = 30;
  std::uint64_t seed = 0;
};

// KL drift regularizer: L = L_CE + lambda * sum_s sum_t D_KL(p_M || p_B).
struct LossConfig {
  double lambda = 0.0;
  int kl_sample_size = 100;
  std::vector<double> corpus_mix = {0.68, 0.32};
};

struct ReferencePool {
  struct Corpus {
    std::string name;
    double proportion = 0.0;
    std::vector<std::string> sentences;
  };
  std::vector<Corpus> corpora;
  size_t size() const;
};

// Reads <dir>/manifest.json plus the corpus files it names; truncates each
// corpus at the manifest's cap.
ReferencePool load_reference_pool(const std::string& dir);

// Fresh deterministic sample keyed by (seed, step): per-corpus counts follow
// the mix proportions (largest remainder), drawn without replacement.
std::vector<std::string> sample_reference_batch(const ReferencePool& pool,
                                                int n, std::uint64_t seed,
                                                int step);

struct LossBreakdown {
  double ce = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

// CE over the target distributions + lambda * summed KL over the reference
// distribution pairs. Distribution sets are position-aligned pairwise.
LossBreakdown compute_loss(
    const std::vector<backend::DistributionSet>& target_dists,
    const std::vector<std::vector<int>>& targets,
    const std::vector<backend::DistributionSet>& model_ref_dists,
    const std::vector<backend::DistributionSet>& baseline_ref_dists,
    const LossConfig& cfg);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::vector<double> subpart_loss;
  std::vector<double> subpart_accuracy;
  std::vector<double> subpart_confidence;
  double val_loss = 0.0;  // mean of subpart_loss
  bool is_best = false;
};

struct TuningTrajectory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based; 0 = none yet
  double best_val_loss = 0.0;
  std::uint64_t best_snapshot = 0;
  bool diverged = false;
};

struct FinetunedState {
  std::uint64_t snapshot_hash = 0;
  int epoch = 0;
  double val_loss = 0.0;
};

enum class StopDecision { proceed, stop };

// stop iff (epoch >= min_epochs and epochs-since-best >= patience) or
// epoch >= max_epochs.
StopDecision early_stop_decision(const TuningTrajectory& trajectory,
                                 const TuningConfig& cfg);

// Full-set batching: one epoch = one optimizer step. Validation runs with
// dropout disabled; the best-averaged-validation-loss state is returned and
// left restored on the handle. `pool` may be null when lambda = 0.
FinetunedState finetune(backend::ModelHandle& handle,
                        const paradigm::GeneratedDataset& tuning_data,
                        const std::vector<paradigm::GeneratedDataset>&
                            validation_subparts,
                        const TuningConfig& cfg, const LossConfig& loss_cfg,
                        const ReferencePool* pool, TuningTrajectory* trajectory);

void write_trajectory(const TuningTrajectory& trajectory,
                      const std::string& path);

}  // namespace argprobe::tuning
