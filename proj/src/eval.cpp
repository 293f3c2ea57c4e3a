#include "argprobe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "argprobe/error.hpp"

using nlohmann::json;

namespace argprobe::eval {

namespace {

double floored(double logp) { return std::max(logp, kLogProbFloor); }

int token_pos(const Tokenizer::Encoding& enc, int word_index,
              const std::string& id) {
  int pos = -1;
  for (size_t i = 0; i < enc.word_index.size(); ++i) {
    if (enc.word_index[i] == word_index) {
      if (pos >= 0)
        fail(ErrorKind::metric, "slot spans several tokens in " + id);
      pos = static_cast<int>(i);
    }
  }
  if (pos < 0) fail(ErrorKind::metric, "slot word index out of range in " + id);
  return pos;
}

std::string tense_str(paradigm::Tense t) {
  switch (t) {
    case paradigm::Tense::past: return "past";
    case paradigm::Tense::perfect: return "perfect";
    default: return "present";
  }
}

std::string key_value(const OutcomeRecord& r, const std::string& key) {
  using paradigm::to_string;
  const auto& t = r.tag;
  if (key == "model") return r.model;
  if (key == "role") return to_string(r.role);
  if (key == "noun") return std::to_string(r.noun);
  if (key == "structure") return t.structure_id;
  if (key == "alternation") return to_string(t.alternation);
  if (key == "voice") return to_string(t.voice);
  if (key == "tense") return tense_str(t.tense);
  if (key == "a_movement") return t.a_movement ? "yes" : "no";
  if (key == "abar_movement") return t.abar_movement ? "yes" : "no";
  if (key == "arg_order")
    return t.arg_order == paradigm::ArgOrder::SO ? "SO" : "OS";
  if (key == "order_vs_tuning")
    return t.order_vs_tuning == paradigm::OrderVsTuning::same ? "same"
                                                              : "reverse";
  if (key == "novel_order") {
    switch (t.novel_order) {
      case paradigm::NovelOrder::theme_first: return "theme_first";
      case paradigm::NovelOrder::goal_first: return "goal_first";
      default: return "na";
    }
  }
  fail(ErrorKind::config, "unknown grouping key: " + key);
}

json tag_to_json(const paradigm::StructureTag& t) {
  json j;
  j["structure_id"] = t.structure_id;
  j["alternation"] = paradigm::to_string(t.alternation);
  j["voice"] = paradigm::to_string(t.voice);
  j["tense"] = tense_str(t.tense);
  j["a_movement"] = t.a_movement;
  j["abar_movement"] = t.abar_movement;
  j["arg_order"] = t.arg_order == paradigm::ArgOrder::SO ? "SO" : "OS";
  j["order_vs_tuning"] =
      t.order_vs_tuning == paradigm::OrderVsTuning::same ? "same" : "reverse";
  j["novel_order"] = t.novel_order == paradigm::NovelOrder::theme_first
                         ? "theme_first"
                         : t.novel_order == paradigm::NovelOrder::goal_first
                               ? "goal_first"
                               : "na";
  json tr = json::array();
  for (auto x : t.transformations) tr.push_back(paradigm::to_string(x));
  j["transformations"] = tr;
  return j;
}

paradigm::StructureTag tag_from_json(const json& j) {
  paradigm::StructureTag t;
  t.structure_id = j.at("structure_id");
  t.alternation = paradigm::alternation_from_string(j.at("alternation"));
  t.voice = j.at("voice") == "passive" ? paradigm::Voice::passive
                                       : paradigm::Voice::active;
  const std::string tense = j.at("tense");
  t.tense = tense == "perfect"   ? paradigm::Tense::perfect
            : tense == "present" ? paradigm::Tense::present
                                 : paradigm::Tense::past;
  t.a_movement = j.at("a_movement");
  t.abar_movement = j.at("abar_movement");
  t.arg_order = j.at("arg_order") == "SO" ? paradigm::ArgOrder::SO
                                          : paradigm::ArgOrder::OS;
  t.order_vs_tuning = j.at("order_vs_tuning") == "same"
                          ? paradigm::OrderVsTuning::same
                          : paradigm::OrderVsTuning::reverse;
  const std::string no = j.at("novel_order");
  t.novel_order = no == "theme_first" ? paradigm::NovelOrder::theme_first
                  : no == "goal_first" ? paradigm::NovelOrder::goal_first
                                       : paradigm::NovelOrder::na;
  for (const auto& x : j.at("transformations"))
    t.transformations.insert(paradigm::transformation_from_string(x));
  return t;
}

paradigm::SlotRole role_from_string(const std::string& s) {
  using paradigm::SlotRole;
  for (auto r : {SlotRole::subject, SlotRole::theme, SlotRole::goal,
                 SlotRole::verb, SlotRole::filler, SlotRole::adverb,
                 SlotRole::modifier, SlotRole::object})
    if (paradigm::to_string(r) == s) return r;
  fail(ErrorKind::config, "unknown slot role: " + s);
}

double candidate_logp(const PredictionRecord& rec, int id) {
  auto it = rec.candidates.find(id);
  if (it == rec.candidates.end())
    fail(ErrorKind::metric, "candidate " + std::to_string(id) +
                                " missing from record " + rec.sentence_id);
  return it->second;
}

}  // namespace

bool position_accuracy_exp1(const PredictionRecord& rec, int expected,
                            int unexpected) {
  return candidate_logp(rec, expected) > candidate_logp(rec, unexpected);
}

bool cross_position_accuracy_exp2(int noun, const PredictionRecord& p,
                                  const PredictionRecord& p_other) {
  if (p.sentence_id != p_other.sentence_id)
    fail(ErrorKind::pairing, "positions from different sentences: " +
                                 p.sentence_id + " vs " + p_other.sentence_id);
  return candidate_logp(p, noun) > candidate_logp(p_other, noun);
}

ConfidenceRecord confidence(int noun, const PredictionRecord& p,
                            const PredictionRecord& p_other) {
  if (p.sentence_id != p_other.sentence_id)
    fail(ErrorKind::pairing, "positions from different sentences");
  ConfidenceRecord out;
  out.sentence_id = p.sentence_id;
  out.tag = p.tag;
  out.noun = noun;
  out.role = p.role;
  out.logp_appropriate = floored(candidate_logp(p, noun));
  out.logp_other = floored(candidate_logp(p_other, noun));
  out.confidence = out.logp_appropriate - out.logp_other;
  return out;
}

AccuracyBreakdown breakdown(const std::vector<OutcomeRecord>& records,
                            const std::vector<std::string>& keys) {
  AccuracyBreakdown out;
  std::map<std::string, std::pair<int, int>> tally;  // label -> (correct, n)
  int correct = 0;
  for (const auto& r : records) {
    std::string label;
    for (const auto& k : keys) {
      if (!label.empty()) label += '|';
      label += k + "=" + key_value(r, k);
    }
    auto& t = tally[label];
    t.first += r.correct;
    t.second += 1;
    correct += r.correct;
  }
  auto stat = [](int c, int n) {
    GroupStat g;
    g.count = n;
    g.mean = n > 0 ? static_cast<double>(c) / n : 0.0;
    g.std_error = n > 0 ? std::sqrt(g.mean * (1.0 - g.mean) / n) : 0.0;
    return g;
  };
  for (const auto& [label, t] : tally)
    out.groups[label] = stat(t.first, t.second);
  out.overall = stat(correct, static_cast<int>(records.size()));
  return out;
}

double order_penalty(const AccuracyBreakdown& by_order) {
  auto same = by_order.groups.find("order_vs_tuning=same");
  auto reverse = by_order.groups.find("order_vs_tuning=reverse");
  if (same == by_order.groups.end() || reverse == by_order.groups.end())
    fail(ErrorKind::metric, "breakdown lacks the order_vs_tuning split");
  return same->second.mean - reverse->second.mean;
}

AccuracyBreakdown conditional_accuracy(
    const std::vector<OutcomeRecord>& test_records,
    const std::vector<OutcomeRecord>& tuning_structure_records,
    const std::vector<std::string>& keys) {
  std::map<std::pair<int, paradigm::SlotRole>, std::pair<int, int>> gate;
  for (const auto& r : tuning_structure_records) {
    auto& g = gate[{r.noun, r.role}];
    g.first += r.correct;
    g.second += 1;
  }
  std::vector<OutcomeRecord> included;
  for (const auto& r : test_records) {
    auto it = gate.find({r.noun, r.role});
    if (it == gate.end())
      fail(ErrorKind::coverage,
           "no tuning-structure record for noun " + std::to_string(r.noun) +
               " in role " + paradigm::to_string(r.role));
    if (2 * it->second.first > it->second.second) included.push_back(r);
  }
  return breakdown(included, keys);
}

std::vector<ConfidenceCurve> track_trajectory(
    const std::vector<std::vector<ConfidenceRecord>>& per_epoch) {
  std::map<std::pair<std::string, paradigm::SlotRole>, ConfidenceCurve> curves;
  for (size_t e = 0; e < per_epoch.size(); ++e) {
    std::map<std::pair<std::string, paradigm::SlotRole>,
             std::pair<double, int>> sums;
    for (const auto& r : per_epoch[e]) {
      auto& s = sums[{r.tag.structure_id, r.role}];
      s.first += r.confidence;
      s.second += 1;
    }
    for (const auto& [k, s] : sums) {
      auto& curve = curves[k];
      if (curve.values.empty() && e > 0)
        fail(ErrorKind::metric, "confidence group appears mid-trajectory");
      curve.structure_id = k.first;
      curve.role = k.second;
      curve.values.push_back(s.first / s.second);
    }
    for (auto& [k, curve] : curves)
      if (curve.values.size() != e + 1)
        fail(ErrorKind::metric, "confidence group vanished mid-trajectory");
  }
  std::vector<ConfidenceCurve> out;
  for (auto& [k, c] : curves) out.push_back(std::move(c));
  return out;
}

std::vector<PredictionRecord> extract_records(
    const backend::ModelHandle& handle, const paradigm::GeneratedDataset& ds,
    const std::vector<int>& candidate_ids) {
  const auto& tok = handle.tokenizer();
  std::vector<PredictionRecord> out;
  for (const auto& s : ds.sentences) {
    const auto enc = tok.encode(s.text);
    std::vector<int> positions;
    std::vector<const paradigm::SlotInstance*> slots;
    for (const auto& slot : s.slots) {
      if (!slot.masked || slot.expected.empty()) continue;
      positions.push_back(token_pos(enc, slot.word_index, s.id));
      slots.push_back(&slot);
    }
    if (positions.empty()) continue;
    const auto dist = handle.predict_ids(enc.ids, positions, s.id);
    for (size_t i = 0; i < positions.size(); ++i) {
      PredictionRecord rec;
      rec.sentence_id = s.id;
      rec.tag = s.tag;
      rec.role = slots[i]->role;
      rec.position = positions[i];
      const int expected = tok.token_id(tok.normalize(slots[i]->expected));
      if (expected < 0)
        fail(ErrorKind::missing_token,
             "expected token not in vocabulary: " + slots[i]->expected);
      rec.expected = expected;
      for (int id : candidate_ids)
        rec.candidates[id] = floored(dist.logprobs[i][id]);
      if (!rec.candidates.count(expected))
        rec.candidates[expected] = floored(dist.logprobs[i][expected]);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<OutcomeRecord> judge_exp1(
    const std::vector<PredictionRecord>& records, int theme_id, int goal_id,
    const std::string& model) {
  std::vector<OutcomeRecord> out;
  for (const auto& r : records) {
    OutcomeRecord o;
    o.model = model;
    o.sentence_id = r.sentence_id;
    o.tag = r.tag;
    o.role = r.role;
    o.noun = r.expected;
    const int other = r.expected == theme_id ? goal_id : theme_id;
    o.correct = position_accuracy_exp1(r, r.expected, other);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<ConfidenceRecord> confidence_records_exp2(
    const backend::ModelHandle& handle, const paradigm::GeneratedDataset& ds) {
  const auto& tok = handle.tokenizer();
  std::vector<ConfidenceRecord> out;
  for (const auto& s : ds.sentences) {
    const auto subj = s.slot_by_role(paradigm::SlotRole::subject);
    const auto obj = s.slot_by_role(paradigm::SlotRole::object);
    if (!subj || !obj) continue;
    const auto enc = tok.encode(s.text);
    const int spos = token_pos(enc, subj->word_index, s.id);
    const int opos = token_pos(enc, obj->word_index, s.id);
    const auto dist = handle.predict_ids(enc.ids, {spos, opos}, s.id);
    auto record = [&](const paradigm::SlotInstance& own, int own_i,
                      int other_i, paradigm::SlotRole role) {
      const int noun = tok.token_id(tok.normalize(own.expected));
      if (noun < 0)
        fail(ErrorKind::missing_token,
             "argument noun not in vocabulary: " + own.expected);
      ConfidenceRecord r;
      r.sentence_id = s.id;
      r.tag = s.tag;
      r.noun = noun;
      r.role = role;
      r.logp_appropriate = floored(dist.logprobs[own_i][noun]);
      r.logp_other = floored(dist.logprobs[other_i][noun]);
      r.confidence = r.logp_appropriate - r.logp_other;
      out.push_back(std::move(r));
    };
    record(*subj, 0, 1, paradigm::SlotRole::subject);
    record(*obj, 1, 0, paradigm::SlotRole::object);
  }
  return out;
}

OutcomeRecord to_outcome(const ConfidenceRecord& rec,
                         const std::string& model) {
  OutcomeRecord o;
  o.model = model;
  o.sentence_id = rec.sentence_id;
  o.tag = rec.tag;
  o.role = rec.role;
  o.noun = rec.noun;
  o.correct = rec.confidence > 0.0;
  return o;
}

void write_outcomes(const std::vector<OutcomeRecord>& records,
                    const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io, "cannot write records: " + path);
  for (const auto& r : records) {
    json j;
    j["model"] = r.model;
    j["sentence_id"] = r.sentence_id;
    j["tag"] = tag_to_json(r.tag);
    j["role"] = paradigm::to_string(r.role);
    j["noun"] = r.noun;
    j["correct"] = r.correct;
    f << j.dump() << "\n";
  }
}

std::vector<OutcomeRecord> read_outcomes(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::io, "cannot read records: " + path);
  std::vector<OutcomeRecord> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    OutcomeRecord r;
    r.model = j.at("model");
    r.sentence_id = j.at("sentence_id");
    r.tag = tag_from_json(j.at("tag"));
    r.role = role_from_string(j.at("role"));
    r.noun = j.at("noun");
    r.correct = j.at("correct");
    out.push_back(std::move(r));
  }
  return out;
}

void write_confidences(const std::vector<ConfidenceRecord>& records,
                       const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io, "cannot write records: " + path);
  for (const auto& r : records) {
    json j;
    j["sentence_id"] = r.sentence_id;
    j["tag"] = tag_to_json(r.tag);
    j["noun"] = r.noun;
    j["role"] = paradigm::to_string(r.role);
    j["logp_appropriate"] = r.logp_appropriate;
    j["logp_other"] = r.logp_other;
    j["confidence"] = r.confidence;
    f << j.dump() << "\n";
  }
}

std::vector<ConfidenceRecord> read_confidences(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::io, "cannot read records: " + path);
  std::vector<ConfidenceRecord> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    ConfidenceRecord r;
    r.sentence_id = j.at("sentence_id");
    r.tag = tag_from_json(j.at("tag"));
    r.noun = j.at("noun");
    r.role = role_from_string(j.at("role"));
    r.logp_appropriate = j.at("logp_appropriate");
    r.logp_other = j.at("logp_other");
    r.confidence = j.at("confidence");
    out.push_back(std::move(r));
  }
  return out;
}

void write_breakdown(const AccuracyBreakdown& bd, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io, "cannot write breakdown: " + path);
  f << "group\tmean\tcount\tstd_error\n";
  for (const auto& [label, g] : bd.groups)
    f << label << "\t" << g.mean << "\t" << g.count << "\t" << g.std_error
      << "\n";
  f << "overall\t" << bd.overall.mean << "\t" << bd.overall.count << "\t"
    << bd.overall.std_error << "\n";
}

}  // namespace argprobe::eval
