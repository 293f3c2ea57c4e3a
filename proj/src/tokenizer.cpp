#include "argprobe/tokenizer.hpp"

#include <algorithm>
#include <cctype>

#include "argprobe/error.hpp"

namespace argprobe {

namespace {

bool is_split_punct(char c) {
  return c == '.' || c == ',' || c == '?' || c == '!' || c == ';' || c == ':';
}

// Splits a whitespace chunk into words: runs of non-split characters plus
// single split-punctuation characters. "[MASK]" style brackets stay attached.
void split_words(const std::string& text, std::vector<std::string>* out) {
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out->push_back(cur);
      cur.clear();
    }
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (is_split_punct(c)) {
      flush();
      out->push_back(std::string(1, c));
    } else {
      cur.push_back(c);
    }
  }
  flush();
}

}  // namespace

Tokenizer Tokenizer::from_wordlist(const std::vector<std::string>& words,
                                   bool lowercase) {
  Tokenizer t;
  t.lowercase_ = lowercase;
  auto push = [&t](const std::string& w) {
    if (t.index_.count(w)) return;
    t.index_.emplace(w, static_cast<int>(t.vocab_.size()));
    t.vocab_.push_back(w);
  };
  push("[PAD]");
  push("[UNK]");
  push("[MASK]");
  for (const auto& w : words) push(t.normalize(w));
  t.pad_id_ = 0;
  t.unk_id_ = 1;
  t.mask_id_ = 2;
  t.base_size_ = static_cast<int>(t.vocab_.size());
  return t;
}

std::string Tokenizer::normalize(const std::string& s) const {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    out.push_back(lowercase_ ? static_cast<char>(std::tolower(
                                   static_cast<unsigned char>(c)))
                             : c);
  }
  return out;
}

int Tokenizer::token_id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

int Tokenizer::add_token(const std::string& surface) {
  const std::string norm = normalize(surface);
  if (norm.empty())
    fail(ErrorKind::invalid_token,
         "added token normalizes to empty: '" + surface + "'");
  if (index_.count(norm))
    fail(ErrorKind::conflict, "token already present: '" + norm + "'");
  const int id = static_cast<int>(vocab_.size());
  index_.emplace(norm, id);
  vocab_.push_back(norm);
  added_ids_.push_back(id);
  return id;
}

void Tokenizer::wordpiece(const std::string& word, std::vector<int>* out) const {
  auto whole = index_.find(word);
  if (whole != index_.end() && !is_added(whole->second)) {
    out->push_back(whole->second);
    return;
  }
  std::vector<int> pieces;
  size_t start = 0;
  while (start < word.size()) {
    size_t end = word.size();
    int found = -1;
    while (end > start) {
      std::string piece = word.substr(start, end - start);
      if (start > 0) piece = "##" + piece;
      auto it = index_.find(piece);
      if (it != index_.end() && !is_added(it->second)) {
        found = it->second;
        break;
      }
      --end;
    }
    if (found < 0) {
      out->push_back(unk_id_);
      return;
    }
    pieces.push_back(found);
    start = end;
  }
  out->insert(out->end(), pieces.begin(), pieces.end());
}

void Tokenizer::encode_word(const std::string& word, std::vector<int>* out) const {
  // Earliest (then longest) added-token substring splits the word first.
  size_t best_pos = std::string::npos;
  size_t best_len = 0;
  int best_id = -1;
  for (int id : added_ids_) {
    const std::string& surf = vocab_[id];
    const size_t pos = word.find(surf);
    if (pos == std::string::npos) continue;
    if (pos < best_pos || (pos == best_pos && surf.size() > best_len)) {
      best_pos = pos;
      best_len = surf.size();
      best_id = id;
    }
  }
  if (best_id < 0) {
    wordpiece(word, out);
    return;
  }
  if (best_pos > 0) encode_word(word.substr(0, best_pos), out);
  out->push_back(best_id);
  if (best_pos + best_len < word.size())
    encode_word(word.substr(best_pos + best_len), out);
}

Tokenizer::Encoding Tokenizer::encode(const std::string& text) const {
  std::vector<std::string> words;
  {
    std::string norm;
    norm.reserve(text.size());
    for (char c : text)
      norm.push_back(lowercase_ ? static_cast<char>(std::tolower(
                                      static_cast<unsigned char>(c)))
                                : c);
    split_words(norm, &words);
  }
  Encoding enc;
  for (size_t w = 0; w < words.size(); ++w) {
    std::vector<int> ids;
    if (words[w] == "[mask]" || words[w] == "[MASK]") {
      ids.push_back(mask_id_);
    } else {
      encode_word(words[w], &ids);
    }
    for (int id : ids) {
      enc.ids.push_back(id);
      enc.word_index.push_back(static_cast<int>(w));
    }
  }
  return enc;
}

bool Tokenizer::single_token(const std::string& word) const {
  std::vector<int> ids;
  encode_word(normalize(word), &ids);
  return ids.size() == 1 && ids[0] != unk_id_;
}

}  // namespace argprobe
