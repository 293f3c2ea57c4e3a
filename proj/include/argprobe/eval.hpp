#pragma once

#include <map>
#include <string>
#include <vector>

#include "argprobe/backend.hpp"
#include "argprobe/paradigm.hpp"

namespace argprobe::eval {

// Natural-log floor substituted for numerically zero probabilities.
inline constexpr double kLogProbFloor = -30.0;

struct PredictionRecord {
  std::string sentence_id;
  paradigm::StructureTag tag;
  paradigm::SlotRole role = paradigm::SlotRole::filler;
  int position = -1;                 // token position within the sentence
  std::map<int, double> candidates;  // token id -> floored log-prob
  int expected = -1;
};

struct ConfidenceRecord {
  std::string sentence_id;
  paradigm::StructureTag tag;
  int noun = -1;
  paradigm::SlotRole role = paradigm::SlotRole::subject;  // underlying role
  double logp_appropriate = 0.0;
  double logp_other = 0.0;
  double confidence = 0.0;  // logp_appropriate - logp_other exactly
};

// One judged masked position; the unit the breakdown tables aggregate.
struct OutcomeRecord {
  std::string model;
  std::string sentence_id;
  paradigm::StructureTag tag;
  paradigm::SlotRole role = paradigm::SlotRole::filler;
  int noun = -1;
  bool correct = false;
};

struct GroupStat {
  double mean = 0.0;
  int count = 0;
  double std_error = 0.0;
};

struct AccuracyBreakdown {
  std::map<std::string, GroupStat> groups;  // "key=value|key=value" labels
  GroupStat overall;
};

// --- metrics --------------------------------------------------------------

// Strict inequality; ties are incorrect. Throws when either candidate is
// absent from the record.
bool position_accuracy_exp1(const PredictionRecord& rec, int expected,
                            int unexpected);

// True iff the noun's log-prob in its appropriate position beats the other
// position of the same sentence. Throws on cross-sentence pairs.
bool cross_position_accuracy_exp2(int noun, const PredictionRecord& p,
                                  const PredictionRecord& p_other);

ConfidenceRecord confidence(int noun, const PredictionRecord& p,
                            const PredictionRecord& p_other);

// Grouped means with counts and binomial standard errors. Supported keys:
// model, role, noun, structure, alternation, voice, tense, a_movement,
// abar_movement, arg_order, order_vs_tuning, novel_order.
AccuracyBreakdown breakdown(const std::vector<OutcomeRecord>& records,
                            const std::vector<std::string>& keys);

// same - reverse over the order_vs_tuning split.
double order_penalty(const AccuracyBreakdown& by_order);

// Keeps a test record iff the majority of tuning-structure records for its
// (noun, role) pair were correct. Missing pair -> coverage error.
AccuracyBreakdown conditional_accuracy(
    const std::vector<OutcomeRecord>& test_records,
    const std::vector<OutcomeRecord>& tuning_structure_records,
    const std::vector<std::string>& keys);

// Per-epoch mean confidence per (structure, underlying role); every curve
// has one point per epoch.
struct ConfidenceCurve {
  std::string structure_id;
  paradigm::SlotRole role;
  std::vector<double> values;
};

std::vector<ConfidenceCurve> track_trajectory(
    const std::vector<std::vector<ConfidenceRecord>>& per_epoch);

// --- record extraction ------------------------------------------------------

// Masked-position prediction records with candidates restricted to
// `candidate_ids` (log-probs floored). One record per masked slot with an
// expected surface.
std::vector<PredictionRecord> extract_records(
    const backend::ModelHandle& handle, const paradigm::GeneratedDataset& ds,
    const std::vector<int>& candidate_ids);

// Judges exp1 records: expected novel token vs the other one.
std::vector<OutcomeRecord> judge_exp1(
    const std::vector<PredictionRecord>& records, int theme_id, int goal_id,
    const std::string& model);

// Subject/object cross-position confidence records, both positions masked
// jointly per sentence.
std::vector<ConfidenceRecord> confidence_records_exp2(
    const backend::ModelHandle& handle, const paradigm::GeneratedDataset& ds);

OutcomeRecord to_outcome(const ConfidenceRecord& rec,
                         const std::string& model);

// --- persistence -------------------------------------------------------------

void write_outcomes(const std::vector<OutcomeRecord>& records,
                    const std::string& path);
std::vector<OutcomeRecord> read_outcomes(const std::string& path);

void write_confidences(const std::vector<ConfidenceRecord>& records,
                       const std::string& path);
std::vector<ConfidenceRecord> read_confidences(const std::string& path);

void write_breakdown(const AccuracyBreakdown& bd, const std::string& path);

}  // namespace argprobe::eval
