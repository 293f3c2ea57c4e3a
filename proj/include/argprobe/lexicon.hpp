#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "argprobe/backend.hpp"

namespace argprobe::lexicon {

enum class NovelRole { theme, goal, verb };

struct NovelToken {
  std::string surface;
  NovelRole role = NovelRole::theme;
  std::uint64_t init_seed = 0;
};

struct ArgumentNounSet {
  std::vector<std::string> subject_nouns;  // 6
  std::vector<std::string> object_nouns;   // 6
  std::vector<std::pair<std::string, double>> scores;  // all 12, ranked
};

struct FrequencyNounSet {
  std::vector<std::pair<std::string, long>> good_subjects;
  std::vector<std::pair<std::string, long>> good_objects;
  std::pair<std::string, std::string> patterns;  // the query templates used
};

// A sentence used for neutrality scoring: text with the novel verb already in
// place and the word indices of the paired subject/object argument slots.
struct ScoringSentence {
  std::string text;
  int subject_word = -1;
  int object_word = -1;
};

// Mean over scoring sentences of (log p(sub=n|s) - log p(obj=n|s))^2 for one
// candidate noun; both positions masked jointly per sentence.
double neutrality_score(const backend::ModelHandle& handle,
                        const std::vector<ScoringSentence>& sentences,
                        const std::string& candidate);

// Picks the 12 lowest-scoring candidates (ties broken lexicographically) and
// assigns ranked indices {0,3,4,7,10,11} to subject slots, the rest to object
// slots.
ArgumentNounSet select_neutral_nouns(
    const backend::ModelHandle& handle,
    const std::vector<ScoringSentence>& scoring_sentences,
    const std::vector<std::string>& candidate_pool);

struct FreqTable {
  std::vector<std::pair<std::string, long>> counts;  // descending
};

FreqTable load_freq_table(const std::string& path);

// Top-k per pattern minus any noun in the other pattern's top-k; optional
// single-token filter against `tok`.
FrequencyNounSet select_frequency_disjoint_nouns(
    const FreqTable& subject_counts, const FreqTable& object_counts,
    const std::pair<std::string, std::string>& patterns, int k,
    const Tokenizer* tok = nullptr);

// Draws the embedding row from elementwise N(mean_j, std_j) of the existing
// (pre-novel) rows, seeded deterministically.
void init_novel_embedding(backend::ModelHandle& handle, const NovelToken& token,
                          std::uint64_t seed);

// Filters a raw pool: >3 characters and single-token under every handle.
std::vector<std::string> filter_candidate_pool(
    const std::vector<std::string>& pool,
    const std::vector<const backend::ModelHandle*>& handles);

void write_lexicon_manifest(const ArgumentNounSet& nouns,
                            const std::string& path);

}  // namespace argprobe::lexicon
