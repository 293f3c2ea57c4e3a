#include "argprobe/runner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "argprobe/error.hpp"
#include "argprobe/geometry.hpp"
#include "argprobe/lexicon.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace argprobe::runner {

Experiment experiment_from_string(const std::string& s) {
  if (s == "exp1") return Experiment::exp1;
  if (s == "exp2") return Experiment::exp2;
  if (s == "probe_two_pp") return Experiment::probe_two_pp;
  if (s == "probe_unpassivizable") return Experiment::probe_unpassivizable;
  fail(ErrorKind::validation, "unknown experiment: " + s);
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::exp1: return "exp1";
    case Experiment::exp2: return "exp2";
    case Experiment::probe_two_pp: return "probe_two_pp";
    default: return "probe_unpassivizable";
  }
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::generate: return "generate";
    case Stage::verify: return "verify";
    case Stage::tune: return "tune";
    case Stage::evaluate: return "evaluate";
    case Stage::analyze: return "analyze";
    default: return "report";
  }
}

namespace {

constexpr Stage kStages[] = {Stage::generate, Stage::verify,   Stage::tune,
                             Stage::evaluate, Stage::analyze, Stage::report};

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

// Short, filesystem-safe name for a backend id: scheme or basename plus a
// hash of the full id.
std::string backend_slug(const std::string& id) {
  std::string head;
  const auto colon = id.find(':');
  if (colon != std::string::npos && colon > 0) {
    head = id.substr(0, colon);
  } else {
    head = fs::path(id).filename().string();
    if (head.empty()) head = "model";
  }
  std::string clean;
  for (char c : head)
    if (std::isalnum(static_cast<unsigned char>(c))) clean += static_cast<char>(std::tolower(c));
  if (clean.empty()) clean = "model";
  const std::uint64_t h = backend::fnv1a64(id.data(), id.size());
  return clean + "-" + hex64(h).substr(0, 8);
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty() || !fs::exists(path))
    fail(ErrorKind::validation, what + " not found: " + path);
}

struct Condition {
  std::string label;
  std::string verb;                      // exp1
  paradigm::Alternation alternation = paradigm::Alternation::none;
  int argument_set_index = 0;            // exp2
};

Condition parse_condition(const ExperimentConfig& cfg, const std::string& label) {
  Condition c;
  c.label = label;
  if (cfg.experiment == Experiment::exp1) {
    const auto dash = label.rfind('-');
    if (dash == std::string::npos)
      fail(ErrorKind::validation, "malformed exp1 condition: " + label);
    c.verb = label.substr(0, dash);
    c.alternation = paradigm::alternation_from_string(label.substr(dash + 1));
  } else if (cfg.experiment == Experiment::exp2) {
    const auto it =
        std::find(cfg.argument_sets.begin(), cfg.argument_sets.end(), label);
    c.argument_set_index =
        it == cfg.argument_sets.end()
            ? 0
            : static_cast<int>(it - cfg.argument_sets.begin());
  }
  return c;
}

std::vector<std::string> conditions_for(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::exp1: {
      std::vector<std::string> verbs = cfg.verbs;
      if (verbs.empty()) {
        const auto pcfg = paradigm::load_paradigm_config(cfg.data.paradigm);
        verbs = pcfg.finetune_verbs;
      }
      std::vector<std::string> structures = cfg.structures;
      if (structures.empty()) structures = {"TO", "GO"};
      std::vector<std::string> out;
      for (const auto& v : verbs)
        for (const auto& s : structures) out.push_back(v + "-" + s);
      return out;
    }
    case Experiment::exp2: {
      if (cfg.argument_sets.empty()) return {"default"};
      return cfg.argument_sets;
    }
    default:
      return {"probe"};
  }
}

void hash_string(std::uint64_t* h, const std::string& s) {
  *h ^= backend::fnv1a64(s.data(), s.size());
  *h *= 1099511628211ULL;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::validation, std::string("malformed config: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.experiment = experiment_from_string(j.value("experiment", "exp1"));
  cfg.backends = j.value("backends", std::vector<std::string>{});
  cfg.seeds = j.value("seeds", std::vector<std::uint64_t>{});
  cfg.verbs = j.value("verbs", std::vector<std::string>{});
  cfg.structures = j.value("structures", std::vector<std::string>{});
  cfg.argument_sets = j.value("argument_sets", std::vector<std::string>{});
  if (j.contains("tuning")) {
    const auto& t = j["tuning"];
    cfg.tune.freeze_policy = backend::freeze_policy_from_string(
        t.value("freeze_policy", "novel-embeddings-only"));
    cfg.tune.learning_rate = t.value("learning_rate", cfg.tune.learning_rate);
    cfg.tune.max_epochs = t.value("max_epochs", cfg.tune.max_epochs);
    cfg.tune.min_epochs = t.value("min_epochs", cfg.tune.min_epochs);
    cfg.tune.patience = t.value("patience", cfg.tune.patience);
  }
  if (j.contains("loss")) {
    const auto& l = j["loss"];
    cfg.loss.lambda = l.value("lambda", cfg.loss.lambda);
    cfg.loss.kl_sample_size = l.value("kl_sample_size", cfg.loss.kl_sample_size);
    cfg.loss.corpus_mix = l.value("corpus_mix", cfg.loss.corpus_mix);
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    cfg.data.paradigm = d.value("paradigm", "");
    cfg.data.catalog = d.value("catalog", "");
    cfg.data.refpool = d.value("refpool", "");
    cfg.data.candidate_pool = d.value("candidate_pool", "");
    cfg.data.freq_subject = d.value("freq_subject", "");
    cfg.data.freq_object = d.value("freq_object", "");
    cfg.data.noun_groups = d.value("noun_groups", "");
  }
  cfg.output_dir = j.value("output_dir", "");
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.backends.empty())
    fail(ErrorKind::validation, "no backends configured");
  if (cfg.seeds.empty()) fail(ErrorKind::validation, "no seeds configured");
  if (cfg.output_dir.empty())
    fail(ErrorKind::validation, "no output directory configured");
  require_file(cfg.data.paradigm, "paradigm file");
  for (const auto& s : cfg.structures)
    if (s != "TO" && s != "GO")
      fail(ErrorKind::validation, "unknown structure label: " + s);
  switch (cfg.experiment) {
    case Experiment::exp1:
      require_file(cfg.data.catalog, "structure catalog");
      break;
    case Experiment::exp2:
      require_file(cfg.data.candidate_pool, "candidate pool");
      break;
    case Experiment::probe_unpassivizable:
      require_file(cfg.data.freq_subject, "subject frequency table");
      require_file(cfg.data.freq_object, "object frequency table");
      break;
    default:
      break;
  }
  if (cfg.loss.lambda > 0.0)
    require_file(cfg.data.refpool, "reference pool directory");
  if (cfg.loss.lambda < 0.0)
    fail(ErrorKind::validation, "lambda must be non-negative");
  if (cfg.tune.learning_rate <= 0.0)
    fail(ErrorKind::validation, "learning rate must be positive");
  if (cfg.tune.min_epochs < 1 || cfg.tune.max_epochs < cfg.tune.min_epochs)
    fail(ErrorKind::validation, "epoch bounds must satisfy 1 <= min <= max");
  if (cfg.tune.patience < 1)
    fail(ErrorKind::validation, "patience must be at least 1");
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ULL;
  hash_string(&h, to_string(cfg.experiment));
  for (const auto& b : cfg.backends) hash_string(&h, b);
  for (auto s : cfg.seeds) hash_string(&h, std::to_string(s));
  for (const auto& v : cfg.verbs) hash_string(&h, v);
  for (const auto& s : cfg.structures) hash_string(&h, s);
  for (const auto& a : cfg.argument_sets) hash_string(&h, a);
  hash_string(&h, backend::to_string(cfg.tune.freeze_policy));
  std::ostringstream os;
  os << cfg.tune.learning_rate << '/' << cfg.tune.max_epochs << '/'
     << cfg.tune.min_epochs << '/' << cfg.tune.patience << '/'
     << cfg.loss.lambda << '/' << cfg.loss.kl_sample_size;
  for (double m : cfg.loss.corpus_mix) os << '/' << m;
  hash_string(&h, os.str());
  for (const auto& p :
       {cfg.data.paradigm, cfg.data.catalog, cfg.data.refpool,
        cfg.data.candidate_pool, cfg.data.freq_subject, cfg.data.freq_object,
        cfg.data.noun_groups})
    hash_string(&h, p);
  return h;
}

std::vector<RunSpec> plan(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<RunSpec> out;
  const auto conditions = conditions_for(cfg);
  for (const auto& backend_id : cfg.backends) {
    const std::string slug = backend_slug(backend_id);
    for (const auto& cond : conditions) {
      for (auto seed : cfg.seeds) {
        RunSpec spec;
        spec.backend = backend_id;
        spec.condition = cond;
        spec.seed = seed;
        spec.run_id = to_string(cfg.experiment) + "/" + slug + "/" + cond +
                      "/" + std::to_string(seed);
        spec.run_dir = cfg.output_dir + "/runs/" + spec.run_id;
        out.push_back(std::move(spec));
      }
    }
  }
  return out;
}

bool RunManifest::ok() const {
  return std::none_of(stages.begin(), stages.end(),
                      [](const StageStatus& s) { return s.status == "failed"; });
}

void write_manifest(const RunManifest& m, const std::string& path) {
  json j;
  j["run_id"] = m.run_id;
  j["backend"] = m.backend;
  j["config_hash"] = hex64(m.config_hash);
  j["complete"] = m.complete;
  j["stages"] = json::array();
  for (const auto& s : m.stages)
    j["stages"].push_back({{"name", s.name}, {"status", s.status}, {"detail", s.detail}});
  j["artifacts"] = m.artifacts;
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot read manifest: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::integrity, std::string("malformed manifest: ") + e.what());
  }
  RunManifest m;
  m.run_id = j.value("run_id", "");
  m.backend = j.value("backend", "");
  m.config_hash = std::stoull(j.value("config_hash", "0"), nullptr, 16);
  m.complete = j.value("complete", false);
  for (const auto& s : j.value("stages", json::array()))
    m.stages.push_back({s.value("name", ""), s.value("status", ""), s.value("detail", "")});
  m.artifacts = j.value("artifacts", std::vector<std::string>{});
  return m;
}

namespace {

// Everything one run accumulates while its stages execute.
struct RunContext {
  Condition cond;
  paradigm::ParadigmConfig pcfg;
  std::unique_ptr<backend::ModelHandle> handle;
  std::unique_ptr<backend::ModelHandle> pristine;
  std::vector<int> novel_ids;
  paradigm::GeneratedDataset finetune;
  std::vector<paradigm::GeneratedDataset> validation;
  paradigm::GeneratedDataset test;
  paradigm::StructureTag tuning_ref;
  std::vector<eval::OutcomeRecord> outcomes;
  std::vector<eval::ConfidenceRecord> confidences;
};

void write_dataset(const paradigm::GeneratedDataset& ds, const std::string& path) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write dataset: " + path);
  for (const auto& s : ds.sentences) out << s.id << '\t' << s.text << '\n';
}

void add_artifact(RunManifest* m, const std::string& rel) {
  if (std::find(m->artifacts.begin(), m->artifacts.end(), rel) ==
      m->artifacts.end())
    m->artifacts.push_back(rel);
}

std::vector<std::string> read_pool_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open candidate pool: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

std::vector<geometry::NounGroup> load_noun_groups(
    const std::string& path, const Tokenizer& tok) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open noun groups: " + path);
  json j;
  in >> j;
  std::vector<geometry::NounGroup> out;
  for (const auto& [label, words] : j.items()) {
    geometry::NounGroup g;
    g.label = label;
    for (const auto& w : words) {
      const int id = tok.token_id(tok.normalize(w.get<std::string>()));
      if (id >= 0) g.members.push_back(id);
    }
    if (!g.members.empty()) out.push_back(std::move(g));
  }
  return out;
}

// True for outcomes of the plain fine-tuning structure: same alternation,
// active past, no displacement. These gate the conditional accuracies.
bool is_tuning_structure(const eval::OutcomeRecord& r,
                         paradigm::Alternation alt) {
  return r.tag.alternation == alt &&
         r.tag.voice == paradigm::Voice::active &&
         r.tag.tense == paradigm::Tense::past && !r.tag.a_movement &&
         !r.tag.abar_movement && r.tag.transformations.empty();
}

void stage_generate(const ExperimentConfig& cfg, const RunSpec& spec,
                    RunContext* ctx, RunManifest* m) {
  ctx->pcfg = paradigm::load_paradigm_config(cfg.data.paradigm);
  ctx->handle = backend::load_baseline(spec.backend);
  ctx->pristine = backend::load_baseline(spec.backend);
  switch (cfg.experiment) {
    case Experiment::exp1: {
      ctx->novel_ids = ctx->handle->add_tokens(
          {ctx->pcfg.novel_theme, ctx->pcfg.novel_goal});
      lexicon::init_novel_embedding(
          *ctx->handle, {ctx->pcfg.novel_theme, lexicon::NovelRole::theme, 1},
          spec.seed);
      lexicon::init_novel_embedding(
          *ctx->handle, {ctx->pcfg.novel_goal, lexicon::NovelRole::goal, 2},
          spec.seed);
      ctx->handle->record_baseline();
      ctx->finetune = paradigm::generate_finetune_exp1(
          ctx->cond.verb, ctx->cond.alternation, ctx->pcfg);
      ctx->validation = paradigm::generate_validation_exp1(
          ctx->cond.verb, ctx->cond.alternation, ctx->pcfg);
      const auto catalog = paradigm::load_catalog(cfg.data.catalog);
      ctx->test = paradigm::generate_test_exp1(catalog, ctx->pcfg);
      ctx->tuning_ref = ctx->finetune.sentences.front().tag;
      for (auto& s : ctx->test.sentences)
        s.tag = paradigm::tag_structure(s, ctx->tuning_ref);
      break;
    }
    case Experiment::exp2: {
      ctx->novel_ids = ctx->handle->add_tokens({ctx->pcfg.novel_verb});
      lexicon::init_novel_embedding(
          *ctx->handle, {ctx->pcfg.novel_verb, lexicon::NovelRole::verb, 3},
          spec.seed);
      ctx->handle->record_baseline();
      auto pool = read_pool_lines(cfg.data.candidate_pool);
      // distinct argument sets rotate the pool so each condition selects
      // against a different candidate ordering
      const int rot = ctx->cond.argument_set_index % std::max<int>(1, pool.size());
      std::rotate(pool.begin(), pool.begin() + rot, pool.end());
      const auto filtered =
          lexicon::filter_candidate_pool(pool, {ctx->handle.get()});
      const auto nouns = lexicon::select_neutral_nouns(
          *ctx->handle, paradigm::exp2_scoring_sentences(ctx->pcfg), filtered);
      lexicon::write_lexicon_manifest(nouns, spec.run_dir + "/datasets/lexicon.json");
      add_artifact(m, "datasets/lexicon.json");
      ctx->finetune = paradigm::generate_finetune_exp2(nouns, ctx->pcfg);
      ctx->validation = paradigm::generate_validation_exp2(nouns, ctx->pcfg);
      ctx->test = paradigm::generate_test_exp2(nouns, ctx->pcfg);
      break;
    }
    case Experiment::probe_two_pp: {
      ctx->novel_ids = ctx->handle->add_tokens(
          {ctx->pcfg.novel_theme, ctx->pcfg.novel_goal});
      lexicon::init_novel_embedding(
          *ctx->handle, {ctx->pcfg.novel_theme, lexicon::NovelRole::theme, 1},
          spec.seed);
      lexicon::init_novel_embedding(
          *ctx->handle, {ctx->pcfg.novel_goal, lexicon::NovelRole::goal, 2},
          spec.seed);
      ctx->handle->record_baseline();
      ctx->test = paradigm::generate_probe_two_pp(ctx->pcfg);
      break;
    }
    case Experiment::probe_unpassivizable: {
      const auto subj = lexicon::load_freq_table(cfg.data.freq_subject);
      const auto obj = lexicon::load_freq_table(cfg.data.freq_object);
      const auto nouns = lexicon::select_frequency_disjoint_nouns(
          subj, obj, {"the _ <verb>s", "<verb>s the _"}, 10,
          &ctx->handle->tokenizer());
      ctx->test = paradigm::generate_probe_unpassivizable(nouns, ctx->pcfg);
      break;
    }
  }
  if (!ctx->finetune.sentences.empty()) {
    write_dataset(ctx->finetune, spec.run_dir + "/datasets/finetune.tsv");
    add_artifact(m, "datasets/finetune.tsv");
  }
  for (size_t i = 0; i < ctx->validation.size(); ++i) {
    const std::string rel = "datasets/validation_" + std::to_string(i) + ".tsv";
    write_dataset(ctx->validation[i], spec.run_dir + "/" + rel);
    add_artifact(m, rel);
  }
  write_dataset(ctx->test, spec.run_dir + "/datasets/test.tsv");
  add_artifact(m, "datasets/test.tsv");
}

void stage_verify(const RunSpec& spec, RunContext* ctx, RunManifest* m) {
  std::vector<std::string> sentences;
  for (const auto* ds : {&ctx->finetune, &ctx->test})
    for (const auto& s : ds->sentences) sentences.push_back(s.text);
  for (const auto& ds : ctx->validation)
    for (const auto& s : ds.sentences) sentences.push_back(s.text);
  const auto report = backend::verify_tokenization_invariance(
      *ctx->handle, *ctx->pristine, sentences);
  json j;
  j["pass"] = report.pass;
  j["checked"] = report.entries.size();
  j["failures"] = json::array();
  for (const auto& e : report.entries)
    if (!e.identical) j["failures"].push_back(e.sentence);
  std::ofstream out(spec.run_dir + "/invariance.json");
  out << j.dump(2) << '\n';
  add_artifact(m, "invariance.json");
  if (!report.pass) {
    std::string first;
    for (const auto& e : report.entries)
      if (!e.identical) { first = e.sentence; break; }
    fail(ErrorKind::validation,
         "tokenization invariance violated, first failure: " + first);
  }
}

bool stage_tune(const ExperimentConfig& cfg, const RunSpec& spec,
                RunContext* ctx, RunManifest* m) {
  if (ctx->finetune.sentences.empty()) return false;  // probes skip tuning
  tuning::TuningConfig tcfg = cfg.tune;
  tcfg.seed = spec.seed;
  tuning::ReferencePool pool;
  const tuning::ReferencePool* pool_ptr = nullptr;
  if (cfg.loss.lambda > 0.0) {
    pool = tuning::load_reference_pool(cfg.data.refpool);
    pool_ptr = &pool;
  }
  tuning::TuningTrajectory traj;
  const auto state = tuning::finetune(*ctx->handle, ctx->finetune,
                                      ctx->validation, tcfg, cfg.loss,
                                      pool_ptr, &traj);
  tuning::write_trajectory(traj, spec.run_dir + "/trajectory.jsonl");
  add_artifact(m, "trajectory.jsonl");
  ctx->handle->persist_snapshot(state.snapshot_hash, spec.run_dir + "/snapshots");
  add_artifact(m, "snapshots/" + hex64(state.snapshot_hash));
  json j;
  j["snapshot"] = hex64(state.snapshot_hash);
  j["epoch"] = state.epoch;
  j["val_loss"] = state.val_loss;
  std::ofstream out(spec.run_dir + "/tuned_state.json");
  out << j.dump(2) << '\n';
  add_artifact(m, "tuned_state.json");
  return true;
}

bool stage_evaluate(const ExperimentConfig& cfg, const RunSpec& spec,
                    RunContext* ctx, RunManifest* m) {
  const std::string model = backend_slug(spec.backend);
  switch (cfg.experiment) {
    case Experiment::exp1: {
      const int theme = ctx->novel_ids[0];
      const int goal = ctx->novel_ids[1];
      const auto recs = eval::extract_records(*ctx->handle, ctx->test,
                                              {theme, goal});
      ctx->outcomes = eval::judge_exp1(recs, theme, goal, model);
      // records come in (theme, goal) pairs per sentence
      std::map<std::string, std::vector<size_t>> by_sentence;
      for (size_t i = 0; i < recs.size(); ++i)
        by_sentence[recs[i].sentence_id].push_back(i);
      for (const auto& [sid, idx] : by_sentence) {
        if (idx.size() != 2) continue;
        const auto& a = recs[idx[0]];
        const auto& b = recs[idx[1]];
        const auto& t = a.role == paradigm::SlotRole::theme ? a : b;
        const auto& g = a.role == paradigm::SlotRole::theme ? b : a;
        ctx->confidences.push_back(eval::confidence(theme, t, g));
        ctx->confidences.push_back(eval::confidence(goal, g, t));
      }
      break;
    }
    case Experiment::exp2: {
      ctx->confidences = eval::confidence_records_exp2(*ctx->handle, ctx->test);
      for (const auto& c : ctx->confidences)
        ctx->outcomes.push_back(eval::to_outcome(c, model));
      break;
    }
    case Experiment::probe_unpassivizable: {
      std::vector<int> candidates;
      std::map<std::string, int> noun_id;
      for (const auto& s : ctx->test.sentences)
        for (const auto& slot : s.slots)
          if (slot.masked && !slot.expected.empty() &&
              !noun_id.count(slot.expected)) {
            const int id = ctx->handle->tokenizer().token_id(
                ctx->handle->tokenizer().normalize(slot.expected));
            if (id < 0)
              fail(ErrorKind::missing_token,
                   "probe noun not in vocabulary: " + slot.expected);
            noun_id[slot.expected] = id;
            candidates.push_back(id);
          }
      const auto recs =
          eval::extract_records(*ctx->handle, ctx->test, candidates);
      std::map<std::string, std::vector<size_t>> by_sentence;
      for (size_t i = 0; i < recs.size(); ++i)
        by_sentence[recs[i].sentence_id].push_back(i);
      for (const auto& [sid, idx] : by_sentence) {
        if (idx.size() != 2) continue;
        for (int k = 0; k < 2; ++k) {
          const auto& own = recs[idx[k]];
          const auto& other = recs[idx[1 - k]];
          eval::OutcomeRecord o;
          o.model = model;
          o.sentence_id = sid;
          o.tag = own.tag;
          o.role = own.role;
          o.noun = own.expected;
          o.correct =
              eval::position_accuracy_exp1(own, own.expected, other.expected);
          ctx->outcomes.push_back(std::move(o));
        }
      }
      break;
    }
    default:
      return false;  // two-PP probe has bare masks; analysis covers it
  }
  eval::write_outcomes(ctx->outcomes, spec.run_dir + "/outcomes.jsonl");
  add_artifact(m, "outcomes.jsonl");
  if (!ctx->confidences.empty()) {
    eval::write_confidences(ctx->confidences, spec.run_dir + "/confidences.jsonl");
    add_artifact(m, "confidences.jsonl");
  }
  if (cfg.experiment == Experiment::exp1) {
    eval::write_breakdown(eval::breakdown(ctx->outcomes, {"structure"}),
                          spec.run_dir + "/breakdown_structure.tsv");
    add_artifact(m, "breakdown_structure.tsv");
    std::vector<eval::OutcomeRecord> gate;
    for (const auto& o : ctx->outcomes)
      if (is_tuning_structure(o, ctx->cond.alternation)) gate.push_back(o);
    eval::write_breakdown(
        eval::conditional_accuracy(ctx->outcomes, gate, {"order_vs_tuning"}),
        spec.run_dir + "/conditional_order.tsv");
    add_artifact(m, "conditional_order.tsv");
    eval::write_breakdown(
        eval::conditional_accuracy(ctx->outcomes, gate, {"voice"}),
        spec.run_dir + "/conditional_voice.tsv");
    add_artifact(m, "conditional_voice.tsv");
  } else if (cfg.experiment == Experiment::exp2) {
    eval::write_breakdown(eval::breakdown(ctx->outcomes, {"voice", "arg_order"}),
                          spec.run_dir + "/breakdown_voice_order.tsv");
    add_artifact(m, "breakdown_voice_order.tsv");
  } else {
    eval::write_breakdown(eval::breakdown(ctx->outcomes, {"voice"}),
                          spec.run_dir + "/breakdown_voice.tsv");
    add_artifact(m, "breakdown_voice.tsv");
  }
  return true;
}

bool stage_analyze(const ExperimentConfig& cfg, const RunSpec& spec,
                   RunContext* ctx, RunManifest* m) {
  if (cfg.experiment == Experiment::probe_unpassivizable) return false;
  const auto corrected =
      geometry::all_but_the_top(geometry::embedding_matrix(*ctx->handle), 3);
  if (!cfg.data.noun_groups.empty()) {
    const auto groups =
        load_noun_groups(cfg.data.noun_groups, ctx->handle->tokenizer());
    if (!groups.empty() && !ctx->novel_ids.empty()) {
      const auto profiles =
          geometry::cosine_profile(corrected, ctx->novel_ids, groups);
      geometry::write_profile_table(profiles, spec.run_dir + "/cosine_profile.tsv");
      add_artifact(m, "cosine_profile.tsv");
    }
  }
  if (!cfg.data.refpool.empty()) {
    const auto pool = tuning::load_reference_pool(cfg.data.refpool);
    const auto sample = tuning::sample_reference_batch(
        pool, std::min(cfg.loss.kl_sample_size, static_cast<int>(pool.size())), spec.seed, 0);
    const auto audit = geometry::kl_audit(*ctx->handle, *ctx->pristine, sample);
    json j;
    j["mean"] = audit.mean;
    j["q25"] = audit.q25;
    j["q50"] = audit.q50;
    j["q75"] = audit.q75;
    j["n"] = audit.values.size();
    std::ofstream out(spec.run_dir + "/drift.json");
    out << j.dump(2) << '\n';
    add_artifact(m, "drift.json");
    geometry::write_strip_svg({{"kl", audit.values}}, spec.run_dir + "/drift.svg");
    add_artifact(m, "drift.svg");
  }
  if ((cfg.experiment == Experiment::exp1 ||
       cfg.experiment == Experiment::probe_two_pp) &&
      !cfg.data.noun_groups.empty() && ctx->novel_ids.size() >= 2) {
    const auto probe = paradigm::generate_probe_two_pp(ctx->pcfg);
    const auto groups =
        load_noun_groups(cfg.data.noun_groups, ctx->handle->tokenizer());
    std::vector<std::pair<geometry::NounGroup, int>> group_novel;
    for (const auto& g : groups) {
      // mass nouns pattern with the theme token, count nouns with the goal
      const int novel = g.label == "mass" ? ctx->novel_ids[0] : ctx->novel_ids[1];
      group_novel.emplace_back(g, novel);
    }
    if (!group_novel.empty()) {
      const auto rep = geometry::baseline_correlation_probe(
          *ctx->handle, *ctx->pristine, probe, group_novel);
      geometry::write_scatter_svg(rep, spec.run_dir + "/correlation.svg");
      add_artifact(m, "correlation.svg");
      json j;
      j["r"] = rep.r;
      j["p_value"] = rep.p_value;
      j["n"] = rep.n;
      std::ofstream out(spec.run_dir + "/correlation.json");
      out << j.dump(2) << '\n';
      add_artifact(m, "correlation.json");
    }
  }
  return true;
}

void stage_report(const ExperimentConfig& cfg, const RunSpec& spec,
                  RunContext* ctx, RunManifest* m) {
  std::ofstream out(spec.run_dir + "/summary.tsv");
  if (!out) fail(ErrorKind::io, "cannot write summary");
  out << "metric\tvalue\n";
  out << "sentences\t" << ctx->test.sentences.size() << '\n';
  if (!ctx->outcomes.empty()) {
    const auto overall = eval::breakdown(ctx->outcomes, {"model"});
    out << "accuracy\t" << overall.overall.mean << '\n';
    if (cfg.experiment == Experiment::exp1) {
      std::vector<eval::OutcomeRecord> gate;
      for (const auto& o : ctx->outcomes)
        if (is_tuning_structure(o, ctx->cond.alternation)) gate.push_back(o);
      const auto cond = eval::conditional_accuracy(ctx->outcomes, gate,
                                                   {"order_vs_tuning"});
      out << "conditional_accuracy\t" << cond.overall.mean << '\n';
      out << "order_penalty\t" << eval::order_penalty(cond) << '\n';
    }
  }
  add_artifact(m, "summary.tsv");
}

}  // namespace

std::vector<RunManifest> execute(const ExperimentConfig& cfg,
                                 const std::vector<RunSpec>& runs,
                                 Stage through) {
  validate(cfg);
  const std::uint64_t hash = config_hash(cfg);
  std::vector<RunManifest> out;
  for (const auto& spec : runs) {
    const std::string manifest_path = spec.run_dir + "/manifest.json";
    if (fs::exists(manifest_path)) {
      auto prior = read_manifest(manifest_path);
      if (prior.complete && prior.config_hash == hash) {
        prior.reused = true;
        out.push_back(std::move(prior));
        continue;
      }
    }
    RunManifest m;
    m.run_id = spec.run_id;
    m.backend = spec.backend;
    m.config_hash = hash;
    fs::create_directories(spec.run_dir);
    RunContext ctx;
    ctx.cond = parse_condition(cfg, spec.condition);
    bool aborted = false;
    for (Stage stage : kStages) {
      if (aborted || static_cast<int>(stage) > static_cast<int>(through)) {
        m.stages.push_back({to_string(stage), "skipped",
                            aborted ? "earlier stage failed" : "not requested"});
        continue;
      }
      try {
        bool ran = true;
        switch (stage) {
          case Stage::generate: stage_generate(cfg, spec, &ctx, &m); break;
          case Stage::verify: stage_verify(spec, &ctx, &m); break;
          case Stage::tune: ran = stage_tune(cfg, spec, &ctx, &m); break;
          case Stage::evaluate: ran = stage_evaluate(cfg, spec, &ctx, &m); break;
          case Stage::analyze: ran = stage_analyze(cfg, spec, &ctx, &m); break;
          case Stage::report: stage_report(cfg, spec, &ctx, &m); break;
        }
        m.stages.push_back({to_string(stage), ran ? "ok" : "skipped",
                            ran ? "" : "not applicable"});
      } catch (const std::exception& e) {
        m.stages.push_back({to_string(stage), "failed", e.what()});
        aborted = true;
      }
    }
    m.complete = !aborted && through == Stage::report;
    write_manifest(m, manifest_path);
    out.push_back(std::move(m));
  }
  return out;
}

AggregateReport report(const ExperimentConfig& cfg,
                       const std::vector<RunManifest>& manifests,
                       const TableSpec& spec) {
  if (manifests.empty())
    fail(ErrorKind::report, "empty manifest list; nothing to aggregate");
  AggregateReport agg;
  struct PerRun {
    std::string model;
    double accuracy = 0.0;
    double same = 0.0, reverse = 0.0;
    bool has_order = false;
  };
  std::vector<PerRun> per_run;
  std::vector<eval::ConfidenceRecord> all_confidences;
  for (const auto& m : manifests) {
    if (!m.ok())
      fail(ErrorKind::report, "run failed, cannot aggregate: " + m.run_id);
    const std::string run_dir = cfg.output_dir + "/runs/" + m.run_id;
    const std::string outcome_path = run_dir + "/outcomes.jsonl";
    if (!fs::exists(outcome_path))
      fail(ErrorKind::report, "missing artifact outcomes.jsonl for run " + m.run_id);
    const auto outcomes = eval::read_outcomes(outcome_path);
    if (outcomes.empty())
      fail(ErrorKind::report, "no persisted outcomes for run " + m.run_id);
    PerRun pr;
    pr.model = outcomes.front().model;
    if (cfg.experiment == Experiment::exp1) {
      // re-derive the run's tuning alternation from its run id
      const auto parts = m.run_id;
      const auto cond_start = parts.find('/', parts.find('/') + 1) + 1;
      const auto cond_end = parts.find('/', cond_start);
      const auto cond = parse_condition(cfg, parts.substr(cond_start, cond_end - cond_start));
      std::vector<eval::OutcomeRecord> gate;
      for (const auto& o : outcomes)
        if (is_tuning_structure(o, cond.alternation)) gate.push_back(o);
      const auto by_order =
          eval::conditional_accuracy(outcomes, gate, {"order_vs_tuning"});
      pr.accuracy = by_order.overall.mean;
      const auto same_it = by_order.groups.find("order_vs_tuning=same");
      const auto rev_it = by_order.groups.find("order_vs_tuning=reverse");
      if (same_it != by_order.groups.end() && rev_it != by_order.groups.end()) {
        pr.same = same_it->second.mean;
        pr.reverse = rev_it->second.mean;
        pr.has_order = true;
      }
    } else {
      pr.accuracy = eval::breakdown(outcomes, spec.keys).overall.mean;
    }
    per_run.push_back(std::move(pr));
    const std::string conf_path = run_dir + "/confidences.jsonl";
    if (fs::exists(conf_path)) {
      const auto c = eval::read_confidences(conf_path);
      all_confidences.insert(all_confidences.end(), c.begin(), c.end());
    }
  }
  // group means across runs
  std::map<std::string, std::vector<double>> by_model;
  for (const auto& pr : per_run) by_model["model=" + pr.model].push_back(pr.accuracy);
  by_model["overall"];
  for (const auto& pr : per_run) by_model["overall"].push_back(pr.accuracy);
  for (const auto& [label, vals] : by_model) {
    eval::GroupStat st;
    st.count = static_cast<int>(vals.size());
    for (double v : vals) st.mean += v;
    st.mean /= st.count;
    if (st.count > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - st.mean) * (v - st.mean);
      st.std_error = std::sqrt(ss / (st.count - 1)) / std::sqrt(double(st.count));
    }
    agg.groups[label] = st;
  }
  int n_order = 0;
  for (const auto& pr : per_run) {
    if (!pr.has_order) continue;
    agg.same += pr.same;
    agg.reverse += pr.reverse;
    ++n_order;
  }
  if (n_order > 0) {
    agg.same /= n_order;
    agg.reverse /= n_order;
    agg.penalty = agg.same - agg.reverse;
  }
  const std::string report_dir = cfg.output_dir + "/reports";
  fs::create_directories(report_dir);
  {
    std::ofstream out(report_dir + "/aggregate.tsv");
    out << "group\tmean\tcount\tstd_error\n";
    for (const auto& [label, st] : agg.groups)
      out << label << '\t' << st.mean << '\t' << st.count << '\t'
          << st.std_error << '\n';
    agg.artifacts.push_back(report_dir + "/aggregate.tsv");
  }
  if (n_order > 0) {
    std::ofstream out(report_dir + "/order_table.tsv");
    out << "same\treverse\tpenalty\n";
    out << agg.same << '\t' << agg.reverse << '\t' << agg.penalty << '\n';
    agg.artifacts.push_back(report_dir + "/order_table.tsv");
  }
  if (!all_confidences.empty()) {
    // active vs passive confidence per structure, paired by id
    std::map<std::string, std::pair<double, int>> means;
    for (const auto& c : all_confidences) {
      auto& [sum, n] = means[c.tag.structure_id];
      sum += c.confidence;
      ++n;
    }
    geometry::CorrelationReport scatter;
    for (const auto& [sid, acc] : means) {
      const auto pos = sid.find("active");
      if (pos == std::string::npos) continue;
      std::string sibling = sid;
      sibling.replace(pos, 6, "passive");
      const auto it = means.find(sibling);
      if (it == means.end()) continue;
      scatter.points.emplace_back(acc.first / acc.second,
                                  it->second.first / it->second.second);
    }
    if (!scatter.points.empty()) {
      scatter.n = static_cast<int>(scatter.points.size());
      try {
        std::vector<double> x, y;
        for (const auto& [a, b] : scatter.points) {
          x.push_back(a);
          y.push_back(b);
        }
        scatter.r = geometry::pearson_r(x, y);
        scatter.p_value = geometry::correlation_p_value(scatter.r, scatter.n);
      } catch (const Error&) {
        // too few or degenerate points: plot without a correlation
      }
      geometry::write_scatter_svg(scatter, report_dir + "/confidence_scatter.svg");
      agg.artifacts.push_back(report_dir + "/confidence_scatter.svg");
    }
  }
  return agg;
}

}  // namespace argprobe::runner
