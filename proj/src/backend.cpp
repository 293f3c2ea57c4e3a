#include "argprobe/backend.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "argprobe/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace argprobe::backend {

std::uint64_t fnv1a64(const void* data, size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

FreezePolicy freeze_policy_from_string(const std::string& s) {
  if (s == "novel-embeddings-only") return FreezePolicy::novel_embeddings_only;
  if (s == "all-unfrozen") return FreezePolicy::all_unfrozen;
  fail(ErrorKind::config, "unknown freeze policy: '" + s + "'");
}

std::string to_string(FreezePolicy p) {
  return p == FreezePolicy::novel_embeddings_only ? "novel-embeddings-only"
                                                  : "all-unfrozen";
}

ModelHandle::ModelHandle(std::string model_id, Tokenizer tok, TinyMlm model)
    : model_id_(std::move(model_id)), tok_(std::move(tok)),
      model_(std::move(model)) {
  if (tok_.size() != model_.config().vocab_size)
    fail(ErrorKind::shape, "tokenizer/model vocabulary size mismatch");
}

std::vector<int> ModelHandle::add_tokens(
    const std::vector<std::string>& tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    const int id = tok_.add_token(t);  // throws on conflict / empty
    const int row = model_.grow_vocab(1);
    if (row != id) fail(ErrorKind::shape, "vocab/embedding row divergence");
    ids.push_back(id);
  }
  ++state_version_;
  return ids;
}

DistributionSet ModelHandle::predict_ids(const std::vector<int>& ids,
                                         const std::vector<int>& mask_positions,
                                         const std::string& sentence_id) const {
  std::vector<int> masked = ids;
  for (int pos : mask_positions) {
    if (pos < 0 || pos >= static_cast<int>(ids.size()))
      fail(ErrorKind::bounds, "mask position out of range");
    masked[pos] = tok_.mask_id();
  }
  DistributionSet out;
  out.sentence_id = sentence_id;
  out.positions = mask_positions;
  out.logprobs = model_.predict_logprobs(masked, mask_positions);
  return out;
}

DistributionSet ModelHandle::predict(const std::string& sentence,
                                     const std::vector<int>& mask_positions) const {
  return predict_ids(tok_.encode_ids(sentence), mask_positions, sentence);
}

void ModelHandle::set_freeze_policy(FreezePolicy policy) { policy_ = policy; }

void ModelHandle::configure_optimizer(AdamOptimizer* opt) const {
  if (policy_ == FreezePolicy::all_unfrozen) {
    opt->set_trainable_all(true);
    return;
  }
  opt->set_trainable_all(false);
  for (int id : tok_.added_ids()) {
    auto [off, len] = model_.embedding_row_span(id);
    opt->set_trainable_range(off, len, true);
  }
}

std::uint64_t ModelHandle::snapshot() {
  const auto& p = model_.params();
  const std::uint64_t h = fnv1a64(p.data(), p.size() * sizeof(double));
  snapshots_[h] = Snapshot{p, policy_, state_version_};
  return h;
}

bool ModelHandle::has_snapshot(std::uint64_t hash) const {
  return snapshots_.count(hash) > 0;
}

void ModelHandle::restore(std::uint64_t hash) {
  auto it = snapshots_.find(hash);
  if (it == snapshots_.end())
    fail(ErrorKind::missing_token, "unknown snapshot hash");
  if (it->second.params.size() != model_.params().size())
    fail(ErrorKind::shape,
         "snapshot taken at a different vocabulary size; restore after "
         "matching add_tokens calls");
  model_.params() = it->second.params;
  policy_ = it->second.policy;
  ++state_version_;
}

void ModelHandle::record_baseline() { baseline_hash_ = snapshot(); }

const std::vector<double>& ModelHandle::snapshot_params(
    std::uint64_t hash) const {
  auto it = snapshots_.find(hash);
  if (it == snapshots_.end())
    fail(ErrorKind::missing_token, "unknown snapshot hash");
  return it->second.params;
}

void ModelHandle::persist_snapshot(std::uint64_t hash,
                                   const std::string& dir) const {
  auto it = snapshots_.find(hash);
  if (it == snapshots_.end())
    fail(ErrorKind::missing_token, "unknown snapshot hash");
  fs::create_directories(dir);
  std::ostringstream name;
  name << std::hex << hash;
  std::ofstream f(fs::path(dir) / name.str(), std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot write snapshot under " + dir);
  f.write(reinterpret_cast<const char*>(it->second.params.data()),
          static_cast<std::streamsize>(it->second.params.size() *
                                       sizeof(double)));
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::load, "cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::unique_ptr<ModelHandle> load_tiny(const std::string& model_id) {
  // tiny:<wordlist>?seed=S&d=D&layers=L&heads=H&len=N&dropout=P
  std::string rest = model_id.substr(5);
  std::string path = rest;
  std::map<std::string, std::string> kv;
  const auto qpos = rest.find('?');
  if (qpos != std::string::npos) {
    path = rest.substr(0, qpos);
    std::stringstream q(rest.substr(qpos + 1));
    std::string item;
    while (std::getline(q, item, '&')) {
      const auto eq = item.find('=');
      if (eq != std::string::npos)
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto geti = [&](const char* k, int def) {
    auto it = kv.find(k);
    return it == kv.end() ? def : std::stoi(it->second);
  };
  auto getd = [&](const char* k, double def) {
    auto it = kv.find(k);
    return it == kv.end() ? def : std::stod(it->second);
  };
  Tokenizer tok = Tokenizer::from_wordlist(read_lines(path));
  ModelConfig cfg;
  cfg.vocab_size = tok.size();
  cfg.d_model = geti("d", 32);
  cfg.n_layers = geti("layers", 2);
  cfg.n_heads = geti("heads", 2);
  cfg.max_pos = geti("len", 48);
  cfg.dropout = getd("dropout", 0.1);
  TinyMlm model(cfg);
  model.init_random(static_cast<std::uint64_t>(geti("seed", 0)));
  auto handle = std::make_unique<ModelHandle>(model_id, std::move(tok),
                                              std::move(model));
  handle->record_baseline();
  return handle;
}

std::unique_ptr<ModelHandle> load_dir(const std::string& dir) {
  const fs::path root(dir);
  const fs::path cfg_path = root / "config.json";
  const fs::path weights_path = root / "weights.bin";
  if (!fs::exists(cfg_path) || !fs::exists(weights_path))
    fail(ErrorKind::load, "unresolvable model id: " + dir);
  std::ifstream cf(cfg_path);
  json j;
  cf >> j;
  ModelConfig cfg;
  cfg.vocab_size = j.at("vocab_size");
  cfg.d_model = j.at("d_model");
  cfg.n_layers = j.at("n_layers");
  cfg.n_heads = j.at("n_heads");
  cfg.max_pos = j.at("max_pos");
  cfg.dropout = j.at("dropout");
  std::vector<std::string> words = j.at("vocab").get<std::vector<std::string>>();
  // The stored vocab includes the three specials first.
  Tokenizer tok = Tokenizer::from_wordlist(
      std::vector<std::string>(words.begin() + 3, words.end()),
      j.value("lowercase", true));
  if (tok.size() != cfg.vocab_size)
    fail(ErrorKind::integrity, "vocab list does not match config size");
  TinyMlm model(cfg);
  std::ifstream wf(weights_path, std::ios::binary);
  wf.read(reinterpret_cast<char*>(model.params().data()),
          static_cast<std::streamsize>(model.n_params() * sizeof(double)));
  if (static_cast<size_t>(wf.gcount()) != model.n_params() * sizeof(double))
    fail(ErrorKind::integrity, "weights.bin truncated");
  if (j.contains("checksum")) {
    const std::uint64_t want = std::stoull(j.at("checksum").get<std::string>(),
                                           nullptr, 16);
    const std::uint64_t got = fnv1a64(model.params().data(),
                                      model.n_params() * sizeof(double));
    if (want != got)
      fail(ErrorKind::integrity, "checkpoint checksum mismatch: " + dir);
  }
  auto handle = std::make_unique<ModelHandle>(dir, std::move(tok),
                                              std::move(model));
  handle->record_baseline();
  return handle;
}

}  // namespace

std::unique_ptr<ModelHandle> load_baseline(const std::string& model_id) {
  if (model_id.rfind("tiny:", 0) == 0) return load_tiny(model_id);
  return load_dir(model_id);
}

void save_checkpoint(const ModelHandle& handle, const std::string& dir) {
  fs::create_directories(dir);
  const auto& model = handle.model();
  json j;
  j["vocab_size"] = model.config().vocab_size;
  j["d_model"] = model.config().d_model;
  j["n_layers"] = model.config().n_layers;
  j["n_heads"] = model.config().n_heads;
  j["max_pos"] = model.config().max_pos;
  j["dropout"] = model.config().dropout;
  j["lowercase"] = handle.tokenizer().lowercase();
  j["vocab"] = handle.tokenizer().vocab();
  std::ostringstream cs;
  cs << std::hex
     << fnv1a64(model.params().data(), model.n_params() * sizeof(double));
  j["checksum"] = cs.str();
  std::ofstream cf(fs::path(dir) / "config.json");
  cf << j.dump(2) << "\n";
  std::ofstream wf(fs::path(dir) / "weights.bin", std::ios::binary);
  wf.write(reinterpret_cast<const char*>(model.params().data()),
           static_cast<std::streamsize>(model.n_params() * sizeof(double)));
}

InvarianceReport verify_tokenization_invariance(
    const ModelHandle& augmented, const ModelHandle& pristine,
    const std::vector<std::string>& sentences) {
  InvarianceReport report;
  const int base = pristine.tokenizer().size();
  for (const auto& s : sentences) {
    InvarianceReport::Entry e;
    e.sentence = s;
    const auto aug = augmented.tokenizer().encode(s);
    const auto pri = pristine.tokenizer().encode(s);
    // group both encodings by source word; a word that is exactly one novel
    // token is deleted from both sides, everything else must match after
    // novel ids are dropped
    std::map<int, std::vector<int>> aug_words, pri_words;
    for (size_t i = 0; i < aug.ids.size(); ++i)
      aug_words[aug.word_index[i]].push_back(aug.ids[i]);
    for (size_t i = 0; i < pri.ids.size(); ++i)
      pri_words[pri.word_index[i]].push_back(pri.ids[i]);
    for (const auto& [word, ids] : aug_words) {
      if (ids.size() == 1 && ids[0] >= base) continue;
      for (int id : ids)
        if (id < base) e.augmented_ids.push_back(id);
      const auto it = pri_words.find(word);
      if (it != pri_words.end())
        e.pristine_ids.insert(e.pristine_ids.end(), it->second.begin(),
                              it->second.end());
    }
    // pristine words with no augmented counterpart still count
    for (const auto& [word, ids] : pri_words) {
      if (aug_words.count(word)) continue;
      e.pristine_ids.insert(e.pristine_ids.end(), ids.begin(), ids.end());
    }
    e.identical = (e.augmented_ids == e.pristine_ids);
    report.pass = report.pass && e.identical;
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace argprobe::backend
