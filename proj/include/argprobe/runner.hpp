#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "argprobe/eval.hpp"
#include "argprobe/tuning.hpp"

namespace argprobe::runner {

enum class Experiment { exp1, exp2, probe_two_pp, probe_unpassivizable };

Experiment experiment_from_string(const std::string& s);
std::string to_string(Experiment e);

struct DataPaths {
  std::string paradigm;
  std::string catalog;
  std::string refpool;        // optional unless lambda > 0
  std::string candidate_pool; // exp2
  std::string freq_subject;   // probe_unpassivizable
  std::string freq_object;
  std::string noun_groups;    // analysis stage
};

struct ExperimentConfig {
  Experiment experiment = Experiment::exp1;
  std::vector<std::string> backends;
  std::vector<std::uint64_t> seeds;
  // exp1 conditions: verbs x structures ("TO"/"GO"); defaults come from the
  // paradigm file's finetune verb list when left empty.
  std::vector<std::string> verbs;
  std::vector<std::string> structures;
  // exp2 conditions: one label per argument noun set.
  std::vector<std::string> argument_sets;
  tuning::TuningConfig tune;
  tuning::LossConfig loss;
  DataPaths data;
  std::string output_dir;
};

ExperimentConfig load_experiment_config(const std::string& path);

// Throws a validation error on empty seeds/backends or missing data files.
void validate(const ExperimentConfig& cfg);

// Stable hash over every field that affects run outputs.
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct RunSpec {
  std::string run_id;     // <experiment>/<backend-slug>/<condition>/<seed>
  std::string backend;
  std::string condition;
  std::uint64_t seed = 0;
  std::string run_dir;
};

// Cross-product of backends x conditions x seeds; validates first.
std::vector<RunSpec> plan(const ExperimentConfig& cfg);

enum class Stage { generate, verify, tune, evaluate, analyze, report };
std::string to_string(Stage s);

struct StageStatus {
  std::string name;
  std::string status;  // "ok" | "failed" | "skipped"
  std::string detail;
};

struct RunManifest {
  std::string run_id;
  std::string backend;
  std::uint64_t config_hash = 0;
  std::vector<StageStatus> stages;
  std::vector<std::string> artifacts;  // paths relative to the run directory
  bool complete = false;
  // True when a finished run with an identical config hash was found on disk
  // and nothing was recomputed. Never persisted.
  bool reused = false;
  bool ok() const;
};

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

// Executes each run through `through`, isolating failures to their run.
// A completed run directory with a matching config hash is skipped.
std::vector<RunManifest> execute(const ExperimentConfig& cfg,
                                 const std::vector<RunSpec>& runs,
                                 Stage through = Stage::report);

struct TableSpec {
  std::vector<std::string> keys = {"model"};
};

struct AggregateReport {
  std::map<std::string, eval::GroupStat> groups;
  double same = 0.0;
  double reverse = 0.0;
  double penalty = 0.0;  // same - reverse
  std::vector<std::string> artifacts;
};

// Recomputes every aggregate from the persisted per-run record files; a
// missing artifact raises a report error naming the run.
AggregateReport report(const ExperimentConfig& cfg,
                       const std::vector<RunManifest>& manifests,
                       const TableSpec& spec);

}  // namespace argprobe::runner
