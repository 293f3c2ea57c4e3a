#include "argprobe/paradigm.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "argprobe/error.hpp"

using nlohmann::json;

namespace argprobe::paradigm {

std::string to_string(Alternation a) {
  switch (a) {
    case Alternation::TO: return "TO";
    case Alternation::GO: return "GO";
    default: return "none";
  }
}

std::string to_string(Voice v) {
  return v == Voice::active ? "active" : "passive";
}

std::string to_string(Transformation t) {
  switch (t) {
    case Transformation::cleft: return "cleft";
    case Transformation::wh_matrix: return "wh_matrix";
    case Transformation::wh_embedded: return "wh_embedded";
    case Transformation::polar_question: return "polar_question";
    case Transformation::negation: return "negation";
    case Transformation::raising: return "raising";
    case Transformation::relative_clause: return "relative_clause";
    case Transformation::particle_shift: return "particle_shift";
  }
  return "?";
}

std::string to_string(SlotRole r) {
  switch (r) {
    case SlotRole::subject: return "subject";
    case SlotRole::theme: return "theme";
    case SlotRole::goal: return "goal";
    case SlotRole::verb: return "verb";
    case SlotRole::filler: return "filler";
    case SlotRole::adverb: return "adverb";
    case SlotRole::modifier: return "modifier";
    case SlotRole::object: return "object";
  }
  return "?";
}

Alternation alternation_from_string(const std::string& s) {
  if (s == "TO") return Alternation::TO;
  if (s == "GO") return Alternation::GO;
  if (s == "none") return Alternation::none;
  fail(ErrorKind::config, "unknown alternation: " + s);
}

Transformation transformation_from_string(const std::string& s) {
  for (auto t : {Transformation::cleft, Transformation::wh_matrix,
                 Transformation::wh_embedded, Transformation::polar_question,
                 Transformation::negation, Transformation::raising,
                 Transformation::relative_clause,
                 Transformation::particle_shift})
    if (to_string(t) == s) return t;
  fail(ErrorKind::config, "unknown transformation: " + s);
}

std::vector<int> GeneratedSentence::masked_word_indices() const {
  std::vector<int> out;
  for (const auto& s : slots)
    if (s.masked) out.push_back(s.word_index);
  return out;
}

std::optional<SlotInstance> GeneratedSentence::slot_by_role(SlotRole r) const {
  for (const auto& s : slots)
    if (s.role == r) return s;
  return std::nullopt;
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

struct Fill {
  std::string value;
  SlotRole role;
  bool masked;
};

// Realizes a pattern, recording a slot for every placeholder that names an
// argument (verb-form placeholders become plain words unless the novel verb
// placeholder is used).
GeneratedSentence realize(const std::string& id,
                          const std::vector<std::string>& pattern,
                          const std::map<std::string, Fill>& fills,
                          const StructureTag& tag) {
  GeneratedSentence out;
  out.id = id;
  out.tag = tag;
  std::vector<std::string> words;
  for (const auto& w : pattern) {
    if (!w.empty() && w.front() == '{') {
      auto it = fills.find(w);
      if (it == fills.end())
        fail(ErrorKind::generation, "unbound placeholder " + w + " in " + id);
      if (it->second.value == "-") continue;  // absent optional slot
      SlotInstance slot;
      slot.role = it->second.role;
      slot.word_index = static_cast<int>(words.size());
      slot.expected = it->second.value;
      slot.masked = it->second.masked;
      out.slots.push_back(slot);
      words.push_back(it->second.value);
    } else if (w == "[MASK]") {
      SlotInstance slot;
      slot.role = SlotRole::filler;
      slot.word_index = static_cast<int>(words.size());
      slot.masked = true;
      out.slots.push_back(slot);
      words.push_back(w);
    } else {
      words.push_back(w);
    }
  }
  out.text = join(words);
  return out;
}

// Order fields recomputed from realized slot positions.
void finish_tag(GeneratedSentence* s) {
  auto theme = s->slot_by_role(SlotRole::theme);
  auto goal = s->slot_by_role(SlotRole::goal);
  if (theme && goal)
    s->tag.novel_order = theme->word_index < goal->word_index
                             ? NovelOrder::theme_first
                             : NovelOrder::goal_first;
  auto subj = s->slot_by_role(SlotRole::subject);
  auto obj = s->slot_by_role(SlotRole::object);
  if (!obj) obj = theme;  // underlying object of exp1 structures is the theme
  if (subj && obj)
    s->tag.arg_order = subj->word_index < obj->word_index ? ArgOrder::SO
                                                          : ArgOrder::OS;
}

const VerbForms& verb_forms(const ParadigmConfig& cfg, const std::string& verb) {
  auto it = cfg.verbs.find(verb);
  if (it == cfg.verbs.end())
    fail(ErrorKind::config, "unknown verb: " + verb);
  return it->second;
}

std::map<std::string, Fill> verb_fills(const VerbForms& v) {
  return {
      {"{v.base}", {v.base, SlotRole::verb, false}},
      {"{v.past}", {v.past, SlotRole::verb, false}},
      {"{v.part}", {v.part, SlotRole::verb, false}},
      {"{v.third}", {v.third, SlotRole::verb, false}},
  };
}

}  // namespace

ParadigmConfig load_paradigm_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::io, "cannot open paradigm config: " + path);
  json j;
  f >> j;
  ParadigmConfig cfg;
  cfg.subject_fillers = j.at("subject_fillers").get<std::vector<std::string>>();
  cfg.theme_fillers = j.at("theme_fillers").get<std::vector<std::string>>();
  cfg.goal_fillers = j.at("goal_fillers").get<std::vector<std::string>>();
  cfg.exp2_adverbs = j.at("exp2_adverbs").get<std::vector<std::string>>();
  cfg.exp2_modifiers = j.at("exp2_modifiers").get<std::vector<std::string>>();
  cfg.novel_theme = j.at("novel_theme");
  cfg.novel_goal = j.at("novel_goal");
  cfg.novel_verb = j.at("novel_verb");
  for (auto& [name, v] : j.at("verbs").items()) {
    VerbForms vf;
    vf.cls = v.at("cls");
    vf.base = v.at("base");
    vf.past = v.at("past");
    vf.part = v.at("part");
    vf.third = v.at("third");
    cfg.verbs[name] = vf;
  }
  cfg.finetune_verbs = j.at("finetune_verbs").get<std::vector<std::string>>();
  cfg.test_verbs = j.at("test_verbs").get<std::vector<std::string>>();
  for (auto& [name, u] : j.at("unpassivizable").items())
    cfg.unpassivizable[name] = {u.at("active"), u.at("passive")};
  return cfg;
}

std::vector<CatalogEntry> load_catalog(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::io, "cannot open structure catalog: " + path);
  std::vector<CatalogEntry> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() != 6)
      fail(ErrorKind::config, "catalog line needs 6 columns: " + line);
    CatalogEntry e;
    e.id = cols[0];
    e.alternation = alternation_from_string(cols[1]);
    e.voice = cols[2] == "passive" ? Voice::passive : Voice::active;
    e.tense = cols[3] == "perfect"   ? Tense::perfect
              : cols[3] == "present" ? Tense::present
                                     : Tense::past;
    if (cols[4] != "-") {
      std::stringstream ts(cols[4]);
      std::string t;
      while (std::getline(ts, t, '+'))
        e.transformations.insert(transformation_from_string(t));
    }
    e.pattern = split_ws(cols[5]);
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

StructureTag tag_for_entry(const CatalogEntry& e) {
  StructureTag tag;
  tag.structure_id = e.id;
  tag.alternation = e.alternation;
  tag.voice = e.voice;
  tag.tense = e.tense;
  tag.transformations = e.transformations;
  tag.a_movement = e.voice == Voice::passive ||
                   e.transformations.count(Transformation::raising) > 0;
  tag.abar_movement =
      e.transformations.count(Transformation::cleft) > 0 ||
      e.transformations.count(Transformation::wh_matrix) > 0 ||
      e.transformations.count(Transformation::wh_embedded) > 0 ||
      e.transformations.count(Transformation::relative_clause) > 0;
  return tag;
}

// Fine-tuning patterns for experiment 1. Exactly one novel token per
// sentence; the other argument comes from the filler pool.
std::vector<std::string> exp1_tuning_pattern(Alternation alt, Voice voice) {
  if (voice == Voice::active) {
    if (alt == Alternation::TO)
      return split_ws("i {v.past} the {theme} onto the {goal} .");
    return split_ws("i {v.past} the {goal} with the {theme} .");
  }
  if (alt == Alternation::TO)
    return split_ws("the {theme} was {v.past} onto the {goal} .");
  return split_ws("the {goal} was {v.past} with the {theme} .");
}

StructureTag exp1_tuning_tag(Alternation alt, Voice voice) {
  StructureTag tag;
  tag.structure_id = "tuning_" + to_string(alt) + "_" + to_string(voice);
  tag.alternation = alt;
  tag.voice = voice;
  tag.tense = Tense::past;
  tag.a_movement = voice == Voice::passive;
  return tag;
}

GeneratedDataset exp1_set(const std::string& name, Purpose purpose,
                          const std::string& verb, Alternation alt,
                          Voice voice, const ParadigmConfig& cfg) {
  const auto& vf = verb_forms(cfg, verb);
  if (cfg.theme_fillers.size() < 6 || cfg.goal_fillers.size() < 6)
    fail(ErrorKind::generation, "filler pools must hold at least 6 nouns");
  GeneratedDataset ds;
  ds.purpose = purpose;
  ds.name = name;
  const auto pattern = exp1_tuning_pattern(alt, voice);
  const auto tag = exp1_tuning_tag(alt, voice);
  int n = 0;
  // 6 sentences with the novel theme + goal fillers.
  for (int i = 0; i < 6; ++i) {
    auto fills = verb_fills(vf);
    fills["{theme}"] = {cfg.novel_theme, SlotRole::theme, true};
    fills["{goal}"] = {cfg.goal_fillers[i], SlotRole::goal, false};
    auto s = realize(name + "/" + std::to_string(n++), pattern, fills, tag);
    finish_tag(&s);
    ds.sentences.push_back(std::move(s));
  }
  // 6 sentences with the novel goal + theme fillers.
  for (int i = 0; i < 6; ++i) {
    auto fills = verb_fills(vf);
    fills["{theme}"] = {cfg.theme_fillers[i], SlotRole::theme, false};
    fills["{goal}"] = {cfg.novel_goal, SlotRole::goal, true};
    auto s = realize(name + "/" + std::to_string(n++), pattern, fills, tag);
    finish_tag(&s);
    ds.sentences.push_back(std::move(s));
  }
  return ds;
}

}  // namespace

GeneratedDataset generate_finetune_exp1(const std::string& verb,
                                        Alternation structure,
                                        const ParadigmConfig& cfg) {
  return exp1_set("finetune_" + verb + "_" + to_string(structure),
                  Purpose::finetune, verb, structure, Voice::active, cfg);
}

std::vector<GeneratedDataset> generate_validation_exp1(
    const std::string& verb, Alternation structure,
    const ParadigmConfig& cfg) {
  const Alternation opposite =
      structure == Alternation::TO ? Alternation::GO : Alternation::TO;
  std::string other_verb;
  for (const auto& v : cfg.finetune_verbs)
    if (v != verb) other_verb = v;
  if (other_verb.empty())
    fail(ErrorKind::config, "need two fine-tuning verbs");
  std::vector<GeneratedDataset> out;
  auto tuning = exp1_set("val_tuning_nodropout", Purpose::validation_subpart,
                         verb, structure, Voice::active, cfg);
  out.push_back(std::move(tuning));
  out.push_back(exp1_set("val_opposite_alternation",
                         Purpose::validation_subpart, verb, opposite,
                         Voice::active, cfg));
  out.push_back(exp1_set("val_other_verb", Purpose::validation_subpart,
                         other_verb, opposite, Voice::active, cfg));
  out.push_back(exp1_set("val_passive", Purpose::validation_subpart, verb,
                         structure, Voice::passive, cfg));
  return out;
}

GeneratedDataset generate_test_exp1(const std::vector<CatalogEntry>& catalog,
                                    const ParadigmConfig& cfg,
                                    bool allow_custom_inventory) {
  if (!allow_custom_inventory && catalog.size() != 78)
    fail(ErrorKind::config, "structure inventory must hold 78 entries, got " +
                                std::to_string(catalog.size()));
  GeneratedDataset ds;
  ds.purpose = Purpose::test;
  ds.name = "test_exp1";
  for (const auto& entry : catalog) {
    const auto tag = tag_for_entry(entry);
    for (const auto& verb : cfg.test_verbs) {
      const auto& vf = verb_forms(cfg, verb);
      for (const auto& subj : cfg.subject_fillers) {
        auto fills = verb_fills(vf);
        fills["{subj}"] = {subj, SlotRole::subject, false};
        fills["{theme}"] = {cfg.novel_theme, SlotRole::theme, true};
        fills["{goal}"] = {cfg.novel_goal, SlotRole::goal, true};
        auto s = realize(entry.id + "/" + verb + "/" + subj, entry.pattern,
                         fills, tag);
        finish_tag(&s);
        ds.sentences.push_back(std::move(s));
      }
    }
  }
  return ds;
}

namespace {

// The 8 experiment-2 frame skeletons per (tense, voice). Frames differ in the
// preverbal adverb and the optional sentence-final modifier.
std::vector<std::string> exp2_pattern(Tense tense, Voice voice) {
  if (tense == Tense::perfect && voice == Voice::active)
    return split_ws(
        "the {subj} has {adverb} {nverb} the {obj} {modifier} .");
  if (tense == Tense::perfect && voice == Voice::passive)
    return split_ws(
        "the {obj} has {adverb} been {nverb} by the {subj} {modifier} .");
  if (tense == Tense::past && voice == Voice::active)
    return split_ws("the {subj} {adverb} {nverb} the {obj} {modifier} .");
  return split_ws(
      "the {obj} was {adverb} {nverb} by the {subj} {modifier} .");
}

GeneratedDataset exp2_set(const std::string& name, Purpose purpose,
                          Tense tense, Voice voice,
                          const lexicon::ArgumentNounSet& nouns,
                          const ParadigmConfig& cfg) {
  if (nouns.subject_nouns.size() != 6 || nouns.object_nouns.size() != 6)
    fail(ErrorKind::generation, "argument noun set must be 6+6");
  GeneratedDataset ds;
  ds.purpose = purpose;
  ds.name = name;
  StructureTag tag;
  tag.structure_id = name;
  tag.voice = voice;
  tag.tense = tense;
  tag.a_movement = voice == Voice::passive;
  const auto pattern = exp2_pattern(tense, voice);
  int n = 0;
  for (const auto& adv : cfg.exp2_adverbs) {
    for (const auto& mod : cfg.exp2_modifiers) {
      for (const auto& subj : nouns.subject_nouns) {
        for (const auto& obj : nouns.object_nouns) {
          std::map<std::string, Fill> fills;
          fills["{subj}"] = {subj, SlotRole::subject, true};
          fills["{obj}"] = {obj, SlotRole::object, true};
          fills["{adverb}"] = {adv, SlotRole::adverb, false};
          fills["{modifier}"] = {mod, SlotRole::modifier, false};
          fills["{nverb}"] = {cfg.novel_verb, SlotRole::verb, true};
          auto s = realize(name + "/" + std::to_string(n++), pattern, fills,
                           tag);
          finish_tag(&s);
          ds.sentences.push_back(std::move(s));
        }
      }
    }
  }
  return ds;
}

}  // namespace

GeneratedDataset generate_finetune_exp2(const lexicon::ArgumentNounSet& nouns,
                                        const ParadigmConfig& cfg) {
  if (cfg.exp2_adverbs.size() * cfg.exp2_modifiers.size() != 8)
    fail(ErrorKind::config, "experiment 2 needs exactly 8 frames");
  return exp2_set("finetune_exp2", Purpose::finetune, Tense::perfect,
                  Voice::active, nouns, cfg);
}

std::vector<GeneratedDataset> generate_validation_exp2(
    const lexicon::ArgumentNounSet& nouns, const ParadigmConfig& cfg) {
  std::vector<GeneratedDataset> out;
  out.push_back(exp2_set("val_perfect_transitive_nodropout",
                         Purpose::validation_subpart, Tense::perfect,
                         Voice::active, nouns, cfg));
  out.push_back(exp2_set("val_perfect_passive", Purpose::validation_subpart,
                         Tense::perfect, Voice::passive, nouns, cfg));
  out.push_back(exp2_set("val_past_transitive", Purpose::validation_subpart,
                         Tense::past, Voice::active, nouns, cfg));
  out.push_back(exp2_set("val_past_passive", Purpose::validation_subpart,
                         Tense::past, Voice::passive, nouns, cfg));
  return out;
}

GeneratedDataset generate_test_exp2(const lexicon::ArgumentNounSet& nouns,
                                    const ParadigmConfig& cfg) {
  // Voice x argument order crossed: simple actives/passives plus wh
  // questions that decouple voice from linear order.
  struct Shape {
    const char* id;
    Voice voice;
    Tense tense;
    Transformation trans;
    bool has_trans;
    const char* pattern;
  };
  const Shape shapes[] = {
      {"perfect_transitive", Voice::active, Tense::perfect,
       Transformation::cleft, false,
       "the {subj} has {adverb} {nverb} the {obj} ."},
      {"perfect_passive", Voice::passive, Tense::perfect,
       Transformation::cleft, false,
       "the {obj} has {adverb} been {nverb} by the {subj} ."},
      {"past_transitive", Voice::active, Tense::past, Transformation::cleft,
       false, "the {subj} {adverb} {nverb} the {obj} ."},
      {"past_passive", Voice::passive, Tense::past, Transformation::cleft,
       false, "the {obj} was {adverb} {nverb} by the {subj} ."},
      {"polar_perfect", Voice::active, Tense::perfect,
       Transformation::polar_question, true,
       "has the {subj} {adverb} {nverb} the {obj} ?"},
      {"wh_obj_perfect", Voice::active, Tense::perfect,
       Transformation::wh_matrix, true,
       "which {obj} has the {subj} {nverb} ?"},
      {"wh_subj_passive", Voice::passive, Tense::past,
       Transformation::wh_matrix, true,
       "which {subj} was the {obj} {nverb} by ?"},
      {"cleft_obj", Voice::active, Tense::past, Transformation::cleft, true,
       "it was the {obj} that the {subj} {nverb} ."},
  };
  GeneratedDataset ds;
  ds.purpose = Purpose::test;
  ds.name = "test_exp2";
  for (const auto& shape : shapes) {
    StructureTag tag;
    tag.structure_id = shape.id;
    tag.voice = shape.voice;
    tag.tense = shape.tense;
    tag.a_movement = shape.voice == Voice::passive;
    if (shape.has_trans) {
      tag.transformations.insert(shape.trans);
      tag.abar_movement = shape.trans == Transformation::wh_matrix ||
                          shape.trans == Transformation::cleft;
    }
    const auto pattern = split_ws(shape.pattern);
    int n = 0;
    for (const auto& subj : nouns.subject_nouns) {
      for (const auto& obj : nouns.object_nouns) {
        std::map<std::string, Fill> fills;
        fills["{subj}"] = {subj, SlotRole::subject, true};
        fills["{obj}"] = {obj, SlotRole::object, true};
        fills["{adverb}"] = {cfg.exp2_adverbs.at(0), SlotRole::adverb, false};
        fills["{nverb}"] = {cfg.novel_verb, SlotRole::verb, true};
        auto s = realize(std::string(shape.id) + "/" + std::to_string(n++),
                         pattern, fills, tag);
        finish_tag(&s);
        ds.sentences.push_back(std::move(s));
      }
    }
  }
  return ds;
}

GeneratedDataset generate_probe_two_pp(const ParadigmConfig& cfg) {
  GeneratedDataset ds;
  ds.purpose = Purpose::probe;
  ds.name = "probe_two_pp";
  for (const auto& verb : cfg.test_verbs) {
    const auto& vf = verb_forms(cfg, verb);
    for (const std::string prep : {"with", "on"}) {
      StructureTag tag;
      tag.structure_id = "two_pp_" + prep;
      tag.voice = Voice::passive;
      tag.a_movement = true;
      const std::string text = "the [MASK] " + prep + " the [MASK] was " +
                               vf.part + " " + prep + " the [MASK] .";
      auto s = realize("two_pp/" + verb + "/" + prep, split_ws(text), {}, tag);
      ds.sentences.push_back(std::move(s));
    }
  }
  return ds;
}

GeneratedDataset generate_probe_unpassivizable(
    const lexicon::FrequencyNounSet& nouns, const ParadigmConfig& cfg) {
  GeneratedDataset ds;
  ds.purpose = Purpose::probe;
  ds.name = "probe_unpassivizable";
  for (const auto& [verb, frames] : cfg.unpassivizable) {
    const size_t n =
        std::min(nouns.good_subjects.size(), nouns.good_objects.size());
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        const std::string& subj = nouns.good_subjects[i].first;
        const std::string& obj = nouns.good_objects[j].first;
        std::map<std::string, Fill> fills;
        fills["{subj}"] = {subj, SlotRole::subject, true};
        fills["{obj}"] = {obj, SlotRole::object, true};
        for (const auto& [voice, pattern] :
             {std::make_pair(Voice::active, frames.active),
              std::make_pair(Voice::passive, frames.passive)}) {
          StructureTag tag;
          tag.structure_id = "unpass_" + verb + "_" + to_string(voice);
          tag.voice = voice;
          tag.a_movement = voice == Voice::passive;
          auto s = realize(tag.structure_id + "/" + subj + "/" + obj,
                           split_ws(pattern), fills, tag);
          finish_tag(&s);
          ds.sentences.push_back(std::move(s));
        }
      }
    }
  }
  return ds;
}

StructureTag tag_structure(const GeneratedSentence& sentence,
                           const StructureTag& tuning_reference) {
  GeneratedSentence copy = sentence;
  finish_tag(&copy);
  StructureTag tag = copy.tag;
  if (tag.novel_order != NovelOrder::na &&
      tuning_reference.novel_order != NovelOrder::na) {
    tag.order_vs_tuning = tag.novel_order == tuning_reference.novel_order
                              ? OrderVsTuning::same
                              : OrderVsTuning::reverse;
  } else {
    tag.order_vs_tuning = tag.arg_order == tuning_reference.arg_order
                              ? OrderVsTuning::same
                              : OrderVsTuning::reverse;
  }
  return tag;
}

std::vector<lexicon::ScoringSentence> exp2_scoring_sentences(
    const ParadigmConfig& cfg) {
  std::vector<lexicon::ScoringSentence> out;
  // The 8 fine-tuning frames, subject/object slots to be masked jointly.
  for (const auto& adv : cfg.exp2_adverbs) {
    for (const auto& mod : cfg.exp2_modifiers) {
      lexicon::ScoringSentence s;
      std::vector<std::string> words{"the", "[MASK]", "has", adv,
                                     cfg.novel_verb, "the", "[MASK]"};
      if (mod != "-") words.push_back(mod);
      words.push_back(".");
      s.subject_word = 1;
      s.object_word = 6;
      s.text = join(words);
      out.push_back(std::move(s));
    }
  }
  // Five more complex sentences with the same argument slots.
  const char* extra[] = {
      "it was the [MASK] that has always X the [MASK] .",
      "the [MASK] has never X the [MASK] near the door .",
      "i wonder whether the [MASK] has often X the [MASK] .",
      "has the [MASK] usually X the [MASK] ?",
      "the [MASK] that has always X the [MASK] was new .",
  };
  const int subj_word[] = {3, 1, 4, 2, 1};
  const int obj_word[] = {9, 6, 9, 6, 7};
  for (int i = 0; i < 5; ++i) {
    lexicon::ScoringSentence s;
    std::string text(extra[i]);
    const auto xpos = text.find(" X ");
    text = text.substr(0, xpos) + " " + cfg.novel_verb +
           text.substr(xpos + 2);
    s.text = text;
    s.subject_word = subj_word[i];
    s.object_word = obj_word[i];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace argprobe::paradigm
