#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "argprobe/lexicon.hpp"

namespace argprobe::paradigm {

enum class Alternation { TO, GO, none };
enum class Voice { active, passive };
enum class ArgOrder { SO, OS };
enum class OrderVsTuning { same, reverse };
enum class Tense { past, perfect, present };
enum class NovelOrder { theme_first, goal_first, na };
enum class Transformation {
  cleft,
  wh_matrix,
  wh_embedded,
  polar_question,
  negation,
  raising,
  relative_clause,
  particle_shift,
};
enum class SlotRole { subject, theme, goal, verb, filler, adverb, modifier, object };

std::string to_string(Alternation a);
std::string to_string(Voice v);
std::string to_string(Transformation t);
Alternation alternation_from_string(const std::string& s);
Transformation transformation_from_string(const std::string& s);
std::string to_string(SlotRole r);

struct StructureTag {
  std::string structure_id;
  Alternation alternation = Alternation::none;
  Voice voice = Voice::active;
  bool a_movement = false;
  bool abar_movement = false;
  ArgOrder arg_order = ArgOrder::SO;
  // Linear order of the two novel-token roles (experiment 1 sentences).
  NovelOrder novel_order = NovelOrder::na;
  OrderVsTuning order_vs_tuning = OrderVsTuning::same;
  std::set<Transformation> transformations;
  Tense tense = Tense::past;
};

struct SlotInstance {
  SlotRole role = SlotRole::filler;
  int word_index = -1;
  std::string expected;  // token the slot should hold; empty for bare masks
  bool masked = false;
};

struct GeneratedSentence {
  std::string id;
  std::string text;  // space-separated words
  StructureTag tag;
  std::vector<SlotInstance> slots;
  std::vector<int> masked_word_indices() const;
  std::optional<SlotInstance> slot_by_role(SlotRole r) const;
};

enum class Purpose { finetune, validation_subpart, test, probe };

struct GeneratedDataset {
  Purpose purpose = Purpose::test;
  std::string name;
  std::vector<GeneratedSentence> sentences;
};

struct VerbForms {
  std::string cls;  // "spray" or "load"
  std::string base, past, part, third;
};

// Filler lexicon, novel-token surfaces and verb paradigms. Shipped defaults
// live in data/paradigm.json.
struct ParadigmConfig {
  std::vector<std::string> subject_fillers;
  std::vector<std::string> theme_fillers;
  std::vector<std::string> goal_fillers;
  std::vector<std::string> exp2_adverbs;
  std::vector<std::string> exp2_modifiers;  // "-" means absent
  std::string novel_theme = "thax";
  std::string novel_goal = "gorx";
  std::string novel_verb = "blorked";
  std::map<std::string, VerbForms> verbs;  // keyed by base form
  std::vector<std::string> finetune_verbs;  // {"spray", "load"}
  std::vector<std::string> test_verbs;      // the 8 of (5)
  struct UnpassFrames {
    std::string active;
    std::string passive;
  };
  std::map<std::string, UnpassFrames> unpassivizable;
};

ParadigmConfig load_paradigm_config(const std::string& path);

// One record of the declarative structure catalog.
struct CatalogEntry {
  std::string id;
  Alternation alternation;
  Voice voice;
  Tense tense;
  std::set<Transformation> transformations;
  std::vector<std::string> pattern;  // words + {subj}/{theme}/{goal}/{v.*}
};

std::vector<CatalogEntry> load_catalog(const std::string& path);

// ---- Generators ---------------------------------------------------------

// 12 sentences: 6 novel-theme x goal fillers + 6 novel-goal x theme fillers.
GeneratedDataset generate_finetune_exp1(const std::string& verb,
                                        Alternation structure,
                                        const ParadigmConfig& cfg);

// Subparts: tuning set (no dropout), opposite alternation, other verb with
// opposite alternation, passivized tuning structure.
std::vector<GeneratedDataset> generate_validation_exp1(
    const std::string& verb, Alternation structure, const ParadigmConfig& cfg);

// catalog x 8 verbs x subject fillers; both novel positions masked.
GeneratedDataset generate_test_exp1(const std::vector<CatalogEntry>& catalog,
                                    const ParadigmConfig& cfg,
                                    bool allow_custom_inventory = false);

// 8 frames x 6x6 noun pairings = 288 instances, 3 masks each.
GeneratedDataset generate_finetune_exp2(const lexicon::ArgumentNounSet& nouns,
                                        const ParadigmConfig& cfg);

// Subparts: perfect transitive (no dropout), perfect passive, past
// transitive, past passive.
std::vector<GeneratedDataset> generate_validation_exp2(
    const lexicon::ArgumentNounSet& nouns, const ParadigmConfig& cfg);

// Structures crossing voice x argument order for the exp2 metrics.
GeneratedDataset generate_test_exp2(const lexicon::ArgumentNounSet& nouns,
                                    const ParadigmConfig& cfg);

// Two-PP overgeneralization probe: 8 verbs x {with,on} variants.
GeneratedDataset generate_probe_two_pp(const ParadigmConfig& cfg);

// Paired active/passive sentences for the unpassivizable verbs.
GeneratedDataset generate_probe_unpassivizable(
    const lexicon::FrequencyNounSet& nouns, const ParadigmConfig& cfg);

// Completes order fields of a realized sentence's tag against the tuning
// structure's reference tag.
StructureTag tag_structure(const GeneratedSentence& sentence,
                           const StructureTag& tuning_reference);

// Neutrality-scoring sentences for lexicon::select_neutral_nouns: the 8
// fine-tuning frames plus 5 more complex sentences.
std::vector<lexicon::ScoringSentence> exp2_scoring_sentences(
    const ParadigmConfig& cfg);

}  // namespace argprobe::paradigm
