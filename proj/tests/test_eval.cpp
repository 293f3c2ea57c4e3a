#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "argprobe/error.hpp"
#include "argprobe/eval.hpp"
#include "argprobe/lexicon.hpp"

using namespace argprobe;
using namespace argprobe::eval;

namespace {

const std::string kData = ARGPROBE_DATA_DIR;

PredictionRecord rec(std::map<int, double> probs, int expected,
                     const std::string& sid = "s0") {
  PredictionRecord r;
  r.sentence_id = sid;
  r.expected = expected;
  for (auto [id, p] : probs)
    r.candidates[id] = std::max(std::log(p), kLogProbFloor);
  return r;
}

OutcomeRecord outcome(bool correct, paradigm::SlotRole role,
                      paradigm::OrderVsTuning order, int noun = 0) {
  OutcomeRecord o;
  o.model = "m";
  o.role = role;
  o.noun = noun;
  o.correct = correct;
  o.tag.order_vs_tuning = order;
  return o;
}

}  // namespace

TEST_CASE("position accuracy is a strict comparison") {
  auto r = rec({{10, 0.3}, {11, 0.1}}, 10);
  CHECK(position_accuracy_exp1(r, 10, 11));
  CHECK_FALSE(position_accuracy_exp1(r, 11, 10));
  auto tie = rec({{10, 0.2}, {11, 0.2}}, 10);
  CHECK_FALSE(position_accuracy_exp1(tie, 10, 11));
  CHECK_FALSE(position_accuracy_exp1(tie, 11, 10));
  CHECK_THROWS_AS(position_accuracy_exp1(r, 10, 99), Error);
}

TEST_CASE("random candidate orderings hit chance level") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  int correct = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    auto r = rec({{10, u(rng)}, {11, u(rng)}}, 10);
    correct += position_accuracy_exp1(r, 10, 11);
  }
  const double rate = static_cast<double>(correct) / trials;
  CHECK(rate == doctest::Approx(0.5).epsilon(0.04));
  CHECK(std::abs(rate - 0.5) < 0.02);
}

TEST_CASE("cross-position accuracy equals the sign of confidence") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int i = 0; i < 500; ++i) {
    auto p = rec({{7, u(rng)}}, 7);
    auto q = rec({{7, u(rng)}}, 7);
    const bool acc = cross_position_accuracy_exp2(7, p, q);
    const auto c = confidence(7, p, q);
    CHECK(acc == (c.confidence > 0.0));
  }
}

TEST_CASE("cross-position accuracy demands a shared sentence") {
  auto p = rec({{7, 0.1}}, 7, "a");
  auto q = rec({{7, 0.02}}, 7, "b");
  CHECK_THROWS_AS(cross_position_accuracy_exp2(7, p, q), Error);
  auto q2 = rec({{7, 0.02}}, 7, "a");
  CHECK(cross_position_accuracy_exp2(7, p, q2));
  auto tied = rec({{7, 0.1}}, 7, "a");
  CHECK_FALSE(cross_position_accuracy_exp2(7, p, tied));
}

TEST_CASE("confidence is the exact log-odds difference") {
  auto p = rec({{7, 0.2}}, 7);
  auto q = rec({{7, 0.05}}, 7);
  auto c = confidence(7, p, q);
  CHECK(c.confidence == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(c.confidence == c.logp_appropriate - c.logp_other);
  // antisymmetry
  auto cr = confidence(7, q, p);
  CHECK(cr.confidence == doctest::Approx(-c.confidence).epsilon(1e-15));
  // equal probabilities -> 0
  CHECK(confidence(7, p, p).confidence == 0.0);
}

TEST_CASE("zero probabilities floor at -30 log units") {
  PredictionRecord p, q;
  p.sentence_id = q.sentence_id = "s";
  p.candidates[7] = -745.0;  // effectively zero
  q.candidates[7] = std::log(0.5);
  auto c = confidence(7, p, q);
  CHECK(c.logp_appropriate == kLogProbFloor);
  CHECK(c.confidence == kLogProbFloor - std::log(0.5));
}

TEST_CASE("breakdown matches a brute-force group-by") {
  std::mt19937_64 rng(5);
  std::vector<OutcomeRecord> records;
  for (int i = 0; i < 200; ++i) {
    auto o = outcome(rng() % 3 != 0,
                     rng() % 2 ? paradigm::SlotRole::theme
                               : paradigm::SlotRole::goal,
                     rng() % 2 ? paradigm::OrderVsTuning::same
                               : paradigm::OrderVsTuning::reverse);
    o.tag.voice = rng() % 2 ? paradigm::Voice::active
                            : paradigm::Voice::passive;
    records.push_back(o);
  }
  auto bd = breakdown(records, {"role", "voice"});
  // brute force
  std::map<std::string, std::pair<int, int>> want;
  for (const auto& r : records) {
    std::string label = "role=" + paradigm::to_string(r.role) + "|voice=" +
                        paradigm::to_string(r.tag.voice);
    want[label].first += r.correct;
    want[label].second += 1;
  }
  CHECK(bd.groups.size() == want.size());
  double recombined = 0.0;
  int total = 0;
  for (const auto& [label, w] : want) {
    const auto& g = bd.groups.at(label);
    CHECK(g.count == w.second);
    CHECK(g.mean ==
          doctest::Approx(static_cast<double>(w.first) / w.second)
              .epsilon(1e-12));
    CHECK(g.std_error ==
          doctest::Approx(std::sqrt(g.mean * (1 - g.mean) / g.count))
              .epsilon(1e-12));
    recombined += g.mean * g.count;
    total += g.count;
  }
  CHECK(recombined / total == doctest::Approx(bd.overall.mean).epsilon(1e-9));
  CHECK_THROWS_AS(breakdown(records, {"flavor"}), Error);
}

TEST_CASE("order penalty is same minus reverse") {
  std::vector<OutcomeRecord> records;
  // same: 37/40 = 0.925; reverse: 429/500 = 0.858
  for (int i = 0; i < 40; ++i)
    records.push_back(outcome(i < 37, paradigm::SlotRole::theme,
                              paradigm::OrderVsTuning::same));
  for (int i = 0; i < 500; ++i)
    records.push_back(outcome(i < 429, paradigm::SlotRole::theme,
                              paradigm::OrderVsTuning::reverse));
  auto bd = breakdown(records, {"order_vs_tuning"});
  CHECK(order_penalty(bd) == doctest::Approx(0.925 - 0.858).epsilon(1e-12));
  auto empty = breakdown({}, {"order_vs_tuning"});
  CHECK_THROWS_AS(order_penalty(empty), Error);
}

TEST_CASE("conditional accuracy with perfect tuning is plain accuracy") {
  std::vector<OutcomeRecord> test, tune;
  for (int i = 0; i < 20; ++i)
    test.push_back(outcome(i % 2 == 0,
                           i % 2 ? paradigm::SlotRole::theme
                                 : paradigm::SlotRole::goal,
                           paradigm::OrderVsTuning::same, i % 2 ? 10 : 11));
  tune.push_back(outcome(true, paradigm::SlotRole::theme,
                         paradigm::OrderVsTuning::same, 10));
  tune.push_back(outcome(true, paradigm::SlotRole::goal,
                         paradigm::OrderVsTuning::same, 11));
  auto cond = conditional_accuracy(test, tune, {"role"});
  auto plain = breakdown(test, {"role"});
  CHECK(cond.overall.mean == plain.overall.mean);
  CHECK(cond.overall.count == plain.overall.count);
}

TEST_CASE("conditional accuracy drops roles that failed in tuning") {
  std::vector<OutcomeRecord> test, tune;
  for (int i = 0; i < 10; ++i)
    test.push_back(outcome(true, paradigm::SlotRole::theme,
                           paradigm::OrderVsTuning::same, 10));
  for (int i = 0; i < 10; ++i)
    test.push_back(outcome(i < 4, paradigm::SlotRole::goal,
                           paradigm::OrderVsTuning::same, 11));
  // thax/theme fails in the tuning structure, gorx/goal passes
  tune.push_back(outcome(false, paradigm::SlotRole::theme,
                         paradigm::OrderVsTuning::same, 10));
  tune.push_back(outcome(true, paradigm::SlotRole::goal,
                         paradigm::OrderVsTuning::same, 11));
  auto cond = conditional_accuracy(test, tune, {"role"});
  CHECK(cond.overall.count == 10);  // only goal records survive
  CHECK(cond.groups.count("role=theme") == 0);
  CHECK(cond.groups.at("role=goal").mean == doctest::Approx(0.4));
  // perturbing an excluded record changes nothing
  test[0].correct = false;
  auto cond2 = conditional_accuracy(test, tune, {"role"});
  CHECK(cond2.overall.mean == cond.overall.mean);
  CHECK(cond2.overall.count == cond.overall.count);
}

TEST_CASE("conditional accuracy equals a filter-then-average oracle") {
  std::mt19937_64 rng(17);
  std::vector<OutcomeRecord> test, tune;
  for (int noun = 10; noun < 14; ++noun) {
    for (int rep = 0; rep < 3; ++rep)
      tune.push_back(outcome(rng() % 2 == 0, paradigm::SlotRole::subject,
                             paradigm::OrderVsTuning::same, noun));
    for (int i = 0; i < 5; ++i)
      test.push_back(outcome(rng() % 2 == 0, paradigm::SlotRole::subject,
                             paradigm::OrderVsTuning::same, noun));
  }
  auto cond = conditional_accuracy(test, tune, {});
  // oracle: majority gate per noun, then plain averaging
  int c = 0, n = 0;
  for (const auto& t : test) {
    int pass = 0, seen = 0;
    for (const auto& g : tune)
      if (g.noun == t.noun) {
        pass += g.correct;
        ++seen;
      }
    if (2 * pass > seen) {
      c += t.correct;
      ++n;
    }
  }
  CHECK(cond.overall.count == n);
  if (n > 0)
    CHECK(cond.overall.mean ==
          doctest::Approx(static_cast<double>(c) / n).epsilon(1e-12));
}

TEST_CASE("conditional accuracy requires tuning coverage") {
  std::vector<OutcomeRecord> test = {outcome(true, paradigm::SlotRole::theme,
                                             paradigm::OrderVsTuning::same,
                                             10)};
  std::vector<OutcomeRecord> tune = {outcome(true, paradigm::SlotRole::goal,
                                             paradigm::OrderVsTuning::same,
                                             11)};
  CHECK_THROWS_AS(conditional_accuracy(test, tune, {}), Error);
}

TEST_CASE("trajectory tracking yields one point per epoch per group") {
  std::vector<std::vector<ConfidenceRecord>> epochs;
  for (int e = 0; e < 5; ++e) {
    std::vector<ConfidenceRecord> recs;
    for (const char* sid : {"perfect_transitive", "past_passive"}) {
      for (auto role :
           {paradigm::SlotRole::subject, paradigm::SlotRole::object}) {
        for (int i = 0; i < 3; ++i) {
          ConfidenceRecord r;
          r.tag.structure_id = sid;
          r.role = role;
          r.confidence = 0.1 * e + 0.01 * i;
          recs.push_back(r);
        }
      }
    }
    epochs.push_back(std::move(recs));
  }
  auto curves = track_trajectory(epochs);
  REQUIRE(curves.size() == 4);
  for (const auto& c : curves) {
    REQUIRE(c.values.size() == 5);
    for (int e = 0; e < 5; ++e)
      CHECK(c.values[e] == doctest::Approx(0.1 * e + 0.01).epsilon(1e-12));
  }
}

TEST_CASE("persisted confidence records replay bit-identically") {
  std::vector<std::vector<ConfidenceRecord>> epochs(3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto& ep : epochs) {
    for (int i = 0; i < 8; ++i) {
      ConfidenceRecord r;
      r.sentence_id = "s" + std::to_string(i);
      r.tag.structure_id = i % 2 ? "a" : "b";
      r.noun = 10 + i;
      r.role = i % 2 ? paradigm::SlotRole::subject : paradigm::SlotRole::object;
      r.logp_appropriate = u(rng);
      r.logp_other = u(rng);
      r.confidence = r.logp_appropriate - r.logp_other;
      ep.push_back(r);
    }
  }
  auto live = track_trajectory(epochs);
  std::vector<std::vector<ConfidenceRecord>> replayed;
  for (size_t e = 0; e < epochs.size(); ++e) {
    const std::string path =
        "/tmp/argprobe_conf_" + std::to_string(e) + ".jsonl";
    write_confidences(epochs[e], path);
    replayed.push_back(read_confidences(path));
    std::remove(path.c_str());
  }
  auto again = track_trajectory(replayed);
  REQUIRE(live.size() == again.size());
  for (size_t i = 0; i < live.size(); ++i) {
    CHECK(live[i].structure_id == again[i].structure_id);
    CHECK(live[i].values == again[i].values);
  }
}

TEST_CASE("outcome records survive a write/read round trip") {
  std::vector<OutcomeRecord> records;
  auto o = outcome(true, paradigm::SlotRole::goal,
                   paradigm::OrderVsTuning::reverse, 12);
  o.sentence_id = "to_passive_plain/spray/man";
  o.tag.structure_id = "to_passive_plain";
  o.tag.alternation = paradigm::Alternation::TO;
  o.tag.voice = paradigm::Voice::passive;
  o.tag.a_movement = true;
  o.tag.transformations.insert(paradigm::Transformation::cleft);
  records.push_back(o);
  const std::string path = "/tmp/argprobe_outcomes.jsonl";
  write_outcomes(records, path);
  auto back = read_outcomes(path);
  std::remove(path.c_str());
  REQUIRE(back.size() == 1);
  CHECK(back[0].sentence_id == o.sentence_id);
  CHECK(back[0].tag.structure_id == o.tag.structure_id);
  CHECK(back[0].tag.voice == paradigm::Voice::passive);
  CHECK(back[0].tag.a_movement);
  CHECK(back[0].tag.transformations == o.tag.transformations);
  CHECK(back[0].role == paradigm::SlotRole::goal);
  CHECK(back[0].noun == 12);
  CHECK(back[0].correct);
}

TEST_CASE("extracted records agree with direct model queries") {
  auto h = backend::load_baseline(
      "tiny:" + kData +
      "/tiny_vocab.txt?seed=7&d=16&layers=1&heads=2&len=24&dropout=0.1");
  auto ids = h->add_tokens({"thax", "gorx"});
  auto cfg =
      paradigm::load_paradigm_config(kData + "/paradigm.json");
  auto catalog =
      paradigm::load_catalog(kData + "/exp1_structures.tsv");
  catalog.resize(2);
  auto ds = paradigm::generate_test_exp1(catalog, cfg, true);
  auto records = extract_records(*h, ds, ids);
  CHECK(records.size() == ds.sentences.size() * 2);
  // spot check the first record against a manual prediction
  const auto& s = ds.sentences[0];
  const auto enc = h->tokenizer().encode(s.text);
  auto masked = s.masked_word_indices();
  auto dist = h->predict_ids(enc.ids, {masked[0], masked[1]});
  CHECK(records[0].candidates.at(ids[0]) ==
        doctest::Approx(std::max(dist.logprobs[0][ids[0]], kLogProbFloor)));
  CHECK(records[0].role == paradigm::SlotRole::theme);
  CHECK(records[0].expected == ids[0]);
  // judge: correct iff the expected novel token outranks the other
  auto outcomes = judge_exp1(records, ids[0], ids[1], "tiny");
  REQUIRE(outcomes.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    const int other = records[i].expected == ids[0] ? ids[1] : ids[0];
    CHECK(outcomes[i].correct ==
          (records[i].candidates.at(records[i].expected) >
           records[i].candidates.at(other)));
  }
}

TEST_CASE("exp2 confidence records cover both underlying roles") {
  auto h = backend::load_baseline(
      "tiny:" + kData +
      "/tiny_vocab.txt?seed=7&d=16&layers=1&heads=2&len=24&dropout=0.1");
  h->add_tokens({"blorked"});
  auto cfg = paradigm::load_paradigm_config(kData + "/paradigm.json");
  lexicon::ArgumentNounSet nouns;
  nouns.subject_nouns = {"man", "woman", "boy", "girl", "worker", "farmer"};
  nouns.object_nouns = {"door", "wall", "fence", "table", "floor", "roof"};
  auto ds = paradigm::generate_test_exp2(nouns, cfg);
  auto recs = confidence_records_exp2(*h, ds);
  CHECK(recs.size() == ds.sentences.size() * 2);
  int subj = 0, obj = 0;
  for (const auto& r : recs) {
    CHECK(r.confidence == r.logp_appropriate - r.logp_other);
    (r.role == paradigm::SlotRole::subject ? subj : obj)++;
    auto o = to_outcome(r, "tiny");
    CHECK(o.correct == (r.confidence > 0.0));
    CHECK(o.noun == r.noun);
  }
  CHECK(subj == obj);
}
