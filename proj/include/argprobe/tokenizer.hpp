#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace argprobe {

// Wordpiece-style tokenizer over a fixed vocabulary. Words missing from the
// vocabulary are split greedily into "##"-prefixed continuation pieces, with
// [UNK] as the fallback. Added tokens are matched as raw substrings of a word
// before wordpiece splitting, which is exactly what the tokenization
// invariance gate has to catch when a merge would have crossed the added
// token's boundary.
class Tokenizer {
 public:
  struct Encoding {
    std::vector<int> ids;
    // For each token, the index of the whitespace/punctuation word it came
    // from. Added tokens found inside a word share that word's index.
    std::vector<int> word_index;
  };

  Tokenizer() = default;

  // Builds a vocabulary of [PAD], [UNK], [MASK] followed by `words` in order.
  static Tokenizer from_wordlist(const std::vector<std::string>& words,
                                 bool lowercase = true);

  int base_size() const { return base_size_; }
  int size() const { return static_cast<int>(vocab_.size()); }
  int pad_id() const { return pad_id_; }
  int unk_id() const { return unk_id_; }
  int mask_id() const { return mask_id_; }
  bool lowercase() const { return lowercase_; }

  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::vector<int>& added_ids() const { return added_ids_; }
  const std::string& token_string(int id) const { return vocab_.at(id); }
  // -1 if absent.
  int token_id(const std::string& token) const;
  bool is_added(int id) const { return id >= base_size_; }

  std::string normalize(const std::string& s) const;

  // Appends a novel token; returns its id. Throws on conflict or when the
  // normalized surface is empty.
  int add_token(const std::string& surface);

  Encoding encode(const std::string& text) const;
  std::vector<int> encode_ids(const std::string& text) const {
    return encode(text).ids;
  }

  // True iff `word` maps to exactly one id (no subword split, no UNK).
  bool single_token(const std::string& word) const;

 private:
  void wordpiece(const std::string& word, std::vector<int>* out) const;
  void encode_word(const std::string& word, std::vector<int>* out) const;

  bool lowercase_ = true;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> added_ids_;
  int base_size_ = 0;
  int pad_id_ = 0;
  int unk_id_ = 1;
  int mask_id_ = 2;
};

}  // namespace argprobe
