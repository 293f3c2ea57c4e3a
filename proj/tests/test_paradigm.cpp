#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "argprobe/error.hpp"
#include "argprobe/paradigm.hpp"

using namespace argprobe;
using namespace argprobe::paradigm;

namespace {

ParadigmConfig cfg() {
  return load_paradigm_config(std::string(ARGPROBE_DATA_DIR) +
                              "/paradigm.json");
}

std::vector<CatalogEntry> catalog() {
  return load_catalog(std::string(ARGPROBE_DATA_DIR) +
                      "/exp1_structures.tsv");
}

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

lexicon::ArgumentNounSet toy_nouns() {
  lexicon::ArgumentNounSet out;
  out.subject_nouns = {"alpha", "bravo", "cedar", "delta", "ember", "frost"};
  out.object_nouns = {"grape", "haven", "index", "jewel", "koala", "lemon"};
  return out;
}

}  // namespace

TEST_CASE("catalog loads 78 structures, balanced by alternation and voice") {
  auto cat = catalog();
  CHECK(cat.size() == 78);
  std::map<std::pair<Alternation, Voice>, int> counts;
  for (const auto& e : cat) counts[{e.alternation, e.voice}]++;
  CHECK(counts[{Alternation::TO, Voice::active}] == 20);
  CHECK(counts[{Alternation::TO, Voice::passive}] == 19);
  CHECK(counts[{Alternation::GO, Voice::active}] == 20);
  CHECK(counts[{Alternation::GO, Voice::passive}] == 19);
  std::set<std::string> ids;
  for (const auto& e : cat) ids.insert(e.id);
  CHECK(ids.size() == 78);
}

TEST_CASE("catalog parses fields of known entries") {
  auto cat = catalog();
  CHECK(cat[0].id == "to_active_plain");
  CHECK(cat[0].alternation == Alternation::TO);
  CHECK(cat[0].voice == Voice::active);
  CHECK(cat[0].tense == Tense::past);
  CHECK(cat[0].transformations.empty());
  bool found = false;
  for (const auto& e : cat) {
    if (e.id == "to_active_embwh_obj_raising") {
      found = true;
      CHECK(e.transformations ==
            std::set<Transformation>{Transformation::wh_embedded,
                                     Transformation::raising});
      CHECK(e.tense == Tense::perfect);
    }
  }
  CHECK(found);
}

TEST_CASE("finetune exp1 yields 12 sentences, one novel token each") {
  auto c = cfg();
  auto ds = generate_finetune_exp1("spray", Alternation::TO, c);
  REQUIRE(ds.sentences.size() == 12);
  CHECK(ds.purpose == Purpose::finetune);
  CHECK(ds.sentences[0].text == "i sprayed the thax onto the door .");
  CHECK(ds.sentences[6].text == "i sprayed the paint onto the gorx .");
  for (int i = 0; i < 12; ++i) {
    const auto& s = ds.sentences[i];
    auto masked = s.masked_word_indices();
    REQUIRE(masked.size() == 1);
    const auto slot = s.slot_by_role(i < 6 ? SlotRole::theme : SlotRole::goal);
    REQUIRE(slot.has_value());
    CHECK(slot->masked);
    CHECK(slot->expected == (i < 6 ? "thax" : "gorx"));
    CHECK(words(s.text).at(slot->word_index) == slot->expected);
    CHECK(s.tag.novel_order == NovelOrder::theme_first);
  }
}

TEST_CASE("finetune exp1 GO puts the goal before the theme") {
  auto c = cfg();
  auto ds = generate_finetune_exp1("load", Alternation::GO, c);
  CHECK(ds.sentences[0].text == "i loaded the door with the thax .");
  CHECK(ds.sentences[0].tag.novel_order == NovelOrder::goal_first);
  CHECK(ds.sentences[6].text == "i loaded the gorx with the paint .");
}

TEST_CASE("validation exp1 has the four subparts") {
  auto c = cfg();
  auto subparts = generate_validation_exp1("spray", Alternation::GO, c);
  REQUIRE(subparts.size() == 4);
  for (const auto& sp : subparts) {
    CHECK(sp.purpose == Purpose::validation_subpart);
    CHECK(sp.sentences.size() == 12);
  }
  // tuning structure itself
  CHECK(subparts[0].sentences[0].text == "i sprayed the door with the thax .");
  // opposite alternation, same verb
  CHECK(subparts[1].sentences[0].text == "i sprayed the thax onto the door .");
  // other verb, opposite alternation
  CHECK(subparts[2].sentences[0].text == "i loaded the thax onto the door .");
  // passivized tuning structure
  CHECK(subparts[3].sentences[0].text ==
        "the door was sprayed with the thax .");
  CHECK(subparts[3].sentences[0].tag.voice == Voice::passive);
}

TEST_CASE("test exp1 generates 5616 structurally tagged sentences") {
  auto c = cfg();
  auto cat = catalog();
  auto ds = generate_test_exp1(cat, c);
  CHECK(ds.sentences.size() == 5616);
  CHECK(ds.sentences.size() == cat.size() * 8 * 9);
  std::map<std::string, int> per_structure;
  for (const auto& s : ds.sentences) per_structure[s.tag.structure_id]++;
  CHECK(per_structure.size() == 78);
  for (const auto& [id, n] : per_structure) CHECK(n == 72);
}

TEST_CASE("test exp1 sentences mask both novel positions") {
  auto c = cfg();
  auto ds = generate_test_exp1(catalog(), c);
  const auto& s = ds.sentences[0];
  CHECK(s.tag.structure_id == "to_active_plain");
  CHECK(s.text == "the man sprayed the thax onto the gorx .");
  auto masked = s.masked_word_indices();
  REQUIRE(masked.size() == 2);
  CHECK(masked[0] == 4);
  CHECK(masked[1] == 7);
  CHECK(s.tag.novel_order == NovelOrder::theme_first);
  CHECK_FALSE(s.tag.a_movement);
  for (const auto& sent : ds.sentences)
    CHECK(sent.masked_word_indices().size() == 2);
}

TEST_CASE("test exp1 passives and movement flags") {
  auto c = cfg();
  auto ds = generate_test_exp1(catalog(), c);
  int passives = 0, abar = 0;
  for (const auto& s : ds.sentences) {
    if (s.tag.voice == Voice::passive) {
      ++passives;
      CHECK(s.tag.a_movement);
    }
    if (s.tag.abar_movement) ++abar;
    if (s.tag.structure_id == "to_passive_plain" &&
        s.id == "to_passive_plain/spray/man") {
      CHECK(s.text == "the thax was sprayed onto the gorx by the man .");
      CHECK(s.tag.novel_order == NovelOrder::theme_first);
    }
  }
  CHECK(passives == 38 * 72);
  CHECK(abar > 0);
}

TEST_CASE("test exp1 rejects a wrong-size inventory unless overridden") {
  auto c = cfg();
  auto cat = catalog();
  cat.pop_back();
  CHECK_THROWS_AS(generate_test_exp1(cat, c), Error);
  auto ds = generate_test_exp1(cat, c, /*allow_custom_inventory=*/true);
  CHECK(ds.sentences.size() == 77 * 72);
}

TEST_CASE("finetune exp2 yields 8 frames x 36 pairings with 3 masks") {
  auto c = cfg();
  auto ds = generate_finetune_exp2(toy_nouns(), c);
  REQUIRE(ds.sentences.size() == 288);
  const auto& s = ds.sentences[0];
  CHECK(s.text == "the alpha has always blorked the grape .");
  auto masked = s.masked_word_indices();
  REQUIRE(masked.size() == 3);
  CHECK(masked[0] == 1);
  CHECK(masked[1] == 4);
  CHECK(masked[2] == 6);
  CHECK(s.slot_by_role(SlotRole::subject)->expected == "alpha");
  CHECK(s.slot_by_role(SlotRole::verb)->expected == "blorked");
  CHECK(s.slot_by_role(SlotRole::object)->expected == "grape");
  CHECK(s.tag.arg_order == ArgOrder::SO);
  // 36th sentence switches frame: modifier "today" appended.
  CHECK(ds.sentences[36].text == "the alpha has always blorked the grape today .");
  // frame 3 starts the second adverb block.
  CHECK(ds.sentences[72].text == "the alpha has often blorked the grape .");
  for (const auto& sent : ds.sentences)
    CHECK(sent.masked_word_indices().size() == 3);
}

TEST_CASE("finetune exp2 demands exactly 8 frames") {
  auto c = cfg();
  c.exp2_adverbs.pop_back();
  CHECK_THROWS_AS(generate_finetune_exp2(toy_nouns(), c), Error);
}

TEST_CASE("validation exp2 has four subparts of 288") {
  auto c = cfg();
  auto subparts = generate_validation_exp2(toy_nouns(), c);
  REQUIRE(subparts.size() == 4);
  for (const auto& sp : subparts) CHECK(sp.sentences.size() == 288);
  CHECK(subparts[1].sentences[0].tag.voice == Voice::passive);
  CHECK(subparts[1].sentences[0].text ==
        "the grape has always been blorked by the alpha .");
  CHECK(subparts[2].sentences[0].text == "the alpha always blorked the grape .");
  CHECK(subparts[3].sentences[0].text ==
        "the grape was always blorked by the alpha .");
}

TEST_CASE("test exp2 crosses voice with argument order") {
  auto c = cfg();
  auto ds = generate_test_exp2(toy_nouns(), c);
  CHECK(ds.sentences.size() == 8 * 36);
  std::set<std::string> ids;
  for (const auto& s : ds.sentences) ids.insert(s.tag.structure_id);
  CHECK(ids.size() == 8);
  bool saw_wh = false;
  for (const auto& s : ds.sentences) {
    if (s.tag.structure_id == "wh_obj_perfect" && s.id == "wh_obj_perfect/0") {
      saw_wh = true;
      CHECK(s.text == "which grape has the alpha blorked ?");
      CHECK(s.tag.arg_order == ArgOrder::OS);
      CHECK(s.tag.voice == Voice::active);
      CHECK(s.tag.abar_movement);
    }
  }
  CHECK(saw_wh);
}

TEST_CASE("tag_structure marks order relative to the tuning reference") {
  auto c = cfg();
  auto tune = generate_finetune_exp2(toy_nouns(), c);
  const auto ref = tune.sentences[0].tag;
  auto test = generate_test_exp2(toy_nouns(), c);
  for (const auto& s : test.sentences) {
    auto tag = tag_structure(s, ref);
    if (tag.arg_order == ArgOrder::SO)
      CHECK(tag.order_vs_tuning == OrderVsTuning::same);
    else
      CHECK(tag.order_vs_tuning == OrderVsTuning::reverse);
  }
  // experiment 1: novel order drives the comparison.
  auto t1 = generate_finetune_exp1("spray", Alternation::TO, c);
  auto test1 = generate_test_exp1(catalog(), c);
  int same = 0, reverse = 0;
  for (const auto& s : test1.sentences) {
    auto tag = tag_structure(s, t1.sentences[0].tag);
    (tag.order_vs_tuning == OrderVsTuning::same ? same : reverse)++;
  }
  CHECK(same + reverse == 5616);
  CHECK(same > 0);
  CHECK(reverse > 0);
}

TEST_CASE("two-PP probe emits 16 fully masked frames") {
  auto c = cfg();
  auto ds = generate_probe_two_pp(c);
  CHECK(ds.sentences.size() == 16);
  for (const auto& s : ds.sentences)
    CHECK(s.masked_word_indices().size() == 3);
  CHECK(ds.sentences[0].text ==
        "the [MASK] with the [MASK] was sprayed with the [MASK] .");
}

TEST_CASE("unpassivizable probe pairs active and passive frames") {
  auto c = cfg();
  lexicon::FrequencyNounSet nouns;
  nouns.good_subjects = {{"farmer", 10}, {"nurse", 8}};
  nouns.good_objects = {{"table", 9}, {"roof", 7}};
  auto ds = generate_probe_unpassivizable(nouns, c);
  CHECK(ds.sentences.size() == 3 * 2 * 2 * 2);
  CHECK(ds.sentences[0].text == "a farmer costs a table .");
  CHECK(ds.sentences[1].text == "a table is cost by a farmer .");
  CHECK(ds.sentences[1].tag.a_movement);
}

TEST_CASE("scoring sentences mask paired argument slots") {
  auto c = cfg();
  auto sents = exp2_scoring_sentences(c);
  CHECK(sents.size() == 13);
  for (const auto& s : sents) {
    auto w = words(s.text);
    CHECK(w.at(s.subject_word) == "[MASK]");
    CHECK(w.at(s.object_word) == "[MASK]");
  }
  CHECK(sents[0].text == "the [MASK] has always blorked the [MASK] .");
}

TEST_CASE("string round trips") {
  CHECK(alternation_from_string(to_string(Alternation::GO)) ==
        Alternation::GO);
  CHECK(transformation_from_string("particle_shift") ==
        Transformation::particle_shift);
  CHECK_THROWS_AS(alternation_from_string("DO"), Error);
  CHECK_THROWS_AS(transformation_from_string("scrambling"), Error);
}
