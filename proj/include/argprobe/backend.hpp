#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "argprobe/model.hpp"
#include "argprobe/tokenizer.hpp"

namespace argprobe::backend {

enum class FreezePolicy { novel_embeddings_only, all_unfrozen };

FreezePolicy freeze_policy_from_string(const std::string& s);
std::string to_string(FreezePolicy p);

struct DistributionSet {
  std::string sentence_id;
  std::vector<int> positions;
  std::vector<std::vector<double>> logprobs;  // one full-vocab vector each
};

struct InvarianceReport {
  struct Entry {
    std::string sentence;
    bool identical = false;
    std::vector<int> augmented_ids;  // novel positions already deleted
    std::vector<int> pristine_ids;
  };
  std::vector<Entry> entries;
  bool pass = true;
};

// One masked language model: tokenizer + parameters + snapshot registry.
class ModelHandle {
 public:
  ModelHandle(std::string model_id, Tokenizer tok, TinyMlm model);

  const std::string& model_id() const { return model_id_; }
  const Tokenizer& tokenizer() const { return tok_; }
  const TinyMlm& model() const { return model_; }
  TinyMlm& model() { return model_; }
  std::uint64_t state_version() const { return state_version_; }
  void bump_state_version() { ++state_version_; }

  int vocab_size() const { return tok_.size(); }
  const std::vector<int>& added_token_ids() const { return tok_.added_ids(); }

  // Registers novel tokens; each must be absent and must normalize to a
  // non-empty surface. Returns the new ids in order.
  std::vector<int> add_tokens(const std::vector<std::string>& tokens);

  DistributionSet predict(const std::string& sentence,
                          const std::vector<int>& mask_positions) const;
  DistributionSet predict_ids(const std::vector<int>& ids,
                              const std::vector<int>& mask_positions,
                              const std::string& sentence_id = "") const;

  void set_freeze_policy(FreezePolicy policy);
  FreezePolicy freeze_policy() const { return policy_; }
  // Applies the current policy to an optimizer's trainable mask.
  void configure_optimizer(AdamOptimizer* opt) const;

  // Snapshots: full-parameter copies keyed by content hash.
  std::uint64_t snapshot();
  void restore(std::uint64_t hash);
  bool has_snapshot(std::uint64_t hash) const;
  std::uint64_t baseline_snapshot_hash() const { return baseline_hash_; }
  void record_baseline();
  // Parameter vector of a stored snapshot (for running the baseline model
  // alongside the tuned one).
  const std::vector<double>& snapshot_params(std::uint64_t hash) const;
  // Writes snapshots under `<dir>/<hash>` as raw doubles.
  void persist_snapshot(std::uint64_t hash, const std::string& dir) const;

 private:
  struct Snapshot {
    std::vector<double> params;
    FreezePolicy policy;
    std::uint64_t state_version;
  };

  std::string model_id_;
  Tokenizer tok_;
  TinyMlm model_;
  FreezePolicy policy_ = FreezePolicy::novel_embeddings_only;
  std::uint64_t state_version_ = 0;
  std::uint64_t baseline_hash_ = 0;
  std::map<std::uint64_t, Snapshot> snapshots_;
};

// Loads a checkpoint. Two id forms:
//   - a directory containing config.json + weights.bin (+ checksum)
//   - "tiny:<wordlist-path>?seed=S&d=D&layers=L&heads=H&len=N&dropout=P"
//     which builds a deterministic randomly initialized model over the
//     newline-delimited word list.
// Either way the returned handle has a recorded baseline snapshot.
std::unique_ptr<ModelHandle> load_baseline(const std::string& model_id);

void save_checkpoint(const ModelHandle& handle, const std::string& dir);

InvarianceReport verify_tokenization_invariance(
    const ModelHandle& augmented, const ModelHandle& pristine,
    const std::vector<std::string>& sentences);

std::uint64_t fnv1a64(const void* data, size_t bytes);

}  // namespace argprobe::backend
