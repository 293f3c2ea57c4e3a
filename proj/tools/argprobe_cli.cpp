// Command-line front end for the probing pipeline. Every subcommand loads a
// JSON experiment config, plans the run fan-out, and executes it up to the
// stage the subcommand names.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "argprobe/error.hpp"
#include "argprobe/runner.hpp"

using namespace argprobe;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string filter;
  std::int64_t seed = -1;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("-c,--config", opts->config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("-f,--filter", opts->filter,
                  "only runs whose id contains this substring");
  cmd->add_option("-s,--seed", opts->seed, "override the config's seed list");
  cmd->add_flag("-n,--dry-run", opts->dry_run,
                "plan and print runs without executing");
}

int run_through(const CommonOpts& opts, runner::Stage through,
                bool aggregate) {
  auto cfg = runner::load_experiment_config(opts.config_path);
  if (opts.seed >= 0) cfg.seeds = {static_cast<std::uint64_t>(opts.seed)};
  auto runs = runner::plan(cfg);
  if (!opts.filter.empty()) {
    std::vector<runner::RunSpec> kept;
    for (auto& r : runs)
      if (r.run_id.find(opts.filter) != std::string::npos)
        kept.push_back(std::move(r));
    runs = std::move(kept);
  }
  if (runs.empty()) {
    std::fprintf(stderr, "no runs match the filter\n");
    return 1;
  }
  if (opts.dry_run) {
    for (const auto& r : runs) std::printf("%s\n", r.run_id.c_str());
    return 0;
  }
  const auto manifests = runner::execute(cfg, runs, through);
  bool all_ok = true;
  for (const auto& m : manifests) {
    std::string line = m.run_id + (m.reused ? "  [cached]" : "");
    for (const auto& s : m.stages) {
      if (s.status == "failed") {
        line += "  FAILED at " + s.name + ": " + s.detail;
        all_ok = false;
        break;
      }
    }
    std::printf("%s\n", line.c_str());
  }
  if (aggregate && all_ok) {
    const auto agg = runner::report(cfg, manifests, runner::TableSpec{});
    for (const auto& [label, st] : agg.groups)
      std::printf("%-40s %.4f  (n=%d)\n", label.c_str(), st.mean, st.count);
    if (agg.penalty != 0.0)
      std::printf("order penalty: same %.4f  reverse %.4f  penalty %.4f\n",
                  agg.same, agg.reverse, agg.penalty);
    for (const auto& a : agg.artifacts) std::printf("wrote %s\n", a.c_str());
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"argument-structure generalization probe"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    runner::Stage through;
    bool aggregate;
  };
  const Sub subs[] = {
      {"generate", "emit fine-tuning, validation and test datasets",
       runner::Stage::generate, false},
      {"select-nouns", "select argument noun sets and write the lexicon manifest",
       runner::Stage::generate, false},
      {"verify", "run the tokenization invariance gate",
       runner::Stage::verify, false},
      {"tune", "fine-tune the novel-token embeddings",
       runner::Stage::tune, false},
      {"eval", "score the evaluation paradigms",
       runner::Stage::evaluate, false},
      {"analyze", "embedding geometry and drift analyses",
       runner::Stage::analyze, false},
      {"report", "full pipeline plus aggregate tables and plots",
       runner::Stage::report, true},
  };

  std::vector<CommonOpts> opts(std::size(subs));
  for (size_t i = 0; i < std::size(subs); ++i) {
    auto* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    add_common(cmd, &opts[i]);
  }

  CLI11_PARSE(app, argc, argv);

  for (size_t i = 0; i < std::size(subs); ++i) {
    if (!app.get_subcommand(subs[i].name)->parsed()) continue;
    try {
      return run_through(opts[i], subs[i].through, subs[i].aggregate);
    } catch (const Error& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
  }
  return 1;
}
