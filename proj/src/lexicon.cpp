#include "argprobe/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "argprobe/error.hpp"

using nlohmann::json;

namespace argprobe::lexicon {

namespace {

// Token position of the single token realizing word `word_index`.
int token_pos_for_word(const Tokenizer::Encoding& enc, int word_index) {
  int pos = -1;
  for (size_t i = 0; i < enc.word_index.size(); ++i) {
    if (enc.word_index[i] == word_index) {
      if (pos >= 0) fail(ErrorKind::selection, "argument slot spans tokens");
      pos = static_cast<int>(i);
    }
  }
  if (pos < 0)
    fail(ErrorKind::selection,
         "word index " + std::to_string(word_index) + " out of range");
  return pos;
}

}  // namespace

double neutrality_score(const backend::ModelHandle& handle,
                        const std::vector<ScoringSentence>& sentences,
                        const std::string& candidate) {
  if (sentences.empty())
    fail(ErrorKind::selection, "no scoring sentences");
  const auto& tok = handle.tokenizer();
  const int cand_id = tok.token_id(tok.normalize(candidate));
  if (cand_id < 0 || !tok.single_token(candidate))
    fail(ErrorKind::selection,
         "candidate is not a single token: " + candidate);
  double acc = 0.0;
  for (const auto& s : sentences) {
    const auto enc = tok.encode(s.text);
    const int sub_pos = token_pos_for_word(enc, s.subject_word);
    const int obj_pos = token_pos_for_word(enc, s.object_word);
    const auto dist = handle.predict_ids(enc.ids, {sub_pos, obj_pos}, s.text);
    const double diff =
        dist.logprobs[0][cand_id] - dist.logprobs[1][cand_id];
    acc += diff * diff;
  }
  return acc / static_cast<double>(sentences.size());
}

ArgumentNounSet select_neutral_nouns(
    const backend::ModelHandle& handle,
    const std::vector<ScoringSentence>& scoring_sentences,
    const std::vector<std::string>& candidate_pool) {
  if (candidate_pool.size() < 12)
    fail(ErrorKind::insufficient_candidates,
         "need at least 12 candidates, got " +
             std::to_string(candidate_pool.size()));
  std::vector<std::pair<std::string, double>> scored;
  scored.reserve(candidate_pool.size());
  for (const auto& c : candidate_pool)
    scored.emplace_back(c, neutrality_score(handle, scoring_sentences, c));
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  scored.resize(12);
  ArgumentNounSet out;
  out.scores = scored;
  const std::set<int> subject_ranks = {0, 3, 4, 7, 10, 11};
  for (int i = 0; i < 12; ++i) {
    if (subject_ranks.count(i))
      out.subject_nouns.push_back(scored[i].first);
    else
      out.object_nouns.push_back(scored[i].first);
  }
  return out;
}

FreqTable load_freq_table(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::io, "cannot open frequency table: " + path);
  FreqTable table;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string word, count;
    if (!std::getline(ss, word, '\t') || !std::getline(ss, count, '\t'))
      fail(ErrorKind::config, "frequency line needs word<TAB>count: " + line);
    table.counts.emplace_back(word, std::stol(count));
  }
  std::sort(table.counts.begin(), table.counts.end(),
            [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second > b.second
                                          : a.first < b.first;
            });
  return table;
}

FrequencyNounSet select_frequency_disjoint_nouns(
    const FreqTable& subject_counts, const FreqTable& object_counts,
    const std::pair<std::string, std::string>& patterns, int k,
    const Tokenizer* tok) {
  auto top = [k](const FreqTable& t) {
    std::vector<std::pair<std::string, long>> out(
        t.counts.begin(),
        t.counts.begin() + std::min<size_t>(k, t.counts.size()));
    return out;
  };
  const auto subj_top = top(subject_counts);
  const auto obj_top = top(object_counts);
  std::set<std::string> subj_words, obj_words;
  for (const auto& [w, c] : subj_top) subj_words.insert(w);
  for (const auto& [w, c] : obj_top) obj_words.insert(w);
  FrequencyNounSet out;
  out.patterns = patterns;
  for (const auto& [w, c] : subj_top)
    if (!obj_words.count(w) && (!tok || tok->single_token(w)))
      out.good_subjects.emplace_back(w, c);
  for (const auto& [w, c] : obj_top)
    if (!subj_words.count(w) && (!tok || tok->single_token(w)))
      out.good_objects.emplace_back(w, c);
  if (out.good_subjects.empty() || out.good_objects.empty())
    fail(ErrorKind::insufficient_candidates,
         "frequency selection left an empty role pool");
  return out;
}

void init_novel_embedding(backend::ModelHandle& handle, const NovelToken& token,
                          std::uint64_t seed) {
  const auto& tok = handle.tokenizer();
  const int id = tok.token_id(tok.normalize(token.surface));
  if (id < 0 || !tok.is_added(id))
    fail(ErrorKind::missing_token,
         "novel token not registered: " + token.surface);
  auto& model = handle.model();
  const int d = model.config().d_model;
  const int base_rows = tok.base_size();
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (int r = 0; r < base_rows; ++r) {
    const double* row = model.embedding_row(r);
    for (int j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (int j = 0; j < d; ++j) mean[j] /= base_rows;
  for (int r = 0; r < base_rows; ++r) {
    const double* row = model.embedding_row(r);
    for (int j = 0; j < d; ++j) {
      const double dx = row[j] - mean[j];
      var[j] += dx * dx;
    }
  }
  const std::uint64_t surface_hash =
      backend::fnv1a64(token.surface.data(), token.surface.size());
  std::mt19937_64 rng(seed ^ token.init_seed ^ surface_hash);
  double* row = model.embedding_row(id);
  for (int j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / base_rows);
    if (sd > 0.0) {
      std::normal_distribution<double> n(mean[j], sd);
      row[j] = n(rng);
    } else {
      row[j] = mean[j];
    }
  }
  handle.bump_state_version();
}

std::vector<std::string> filter_candidate_pool(
    const std::vector<std::string>& pool,
    const std::vector<const backend::ModelHandle*>& handles) {
  std::vector<std::string> out;
  for (const auto& w : pool) {
    if (w.size() <= 3) continue;
    bool ok = true;
    for (const auto* h : handles)
      if (!h->tokenizer().single_token(w)) ok = false;
    if (ok) out.push_back(w);
  }
  return out;
}

void write_lexicon_manifest(const ArgumentNounSet& nouns,
                            const std::string& path) {
  json j;
  j["subject_nouns"] = nouns.subject_nouns;
  j["object_nouns"] = nouns.object_nouns;
  json scores = json::array();
  for (const auto& [w, s] : nouns.scores)
    scores.push_back({{"noun", w}, {"score", s}});
  j["scores"] = scores;
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io, "cannot write lexicon manifest: " + path);
  f << j.dump(2) << "\n";
}

}  // namespace argprobe::lexicon
