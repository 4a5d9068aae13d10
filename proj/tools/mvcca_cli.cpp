// Copyright 2026 The mvcca Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// mvcca: runs the simulated three-view experiments and the exact-moment
// oracle check, writing records.csv and summary.json to the output directory.
//
// Usage: mvcca <exp1|exp2|exp3|oracle-check> [--config FILE] [--seed N]
//              [--trials N] [--out DIR] [--eval population|holdout]
//              [--smoke] [--quiet]

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mvcca/error.hpp"
#include "mvcca/harness.hpp"
#include "mvcca/kernels.hpp"

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out_dir;
  std::string eval;
  bool smoke = false;
  bool quiet = false;
  bool save_projections = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--trials", o.trials, "trials (models) per group");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--eval", o.eval, "loss evaluation")->check(CLI::IsMember({"population", "holdout"}));
  cmd->add_flag("--smoke", o.smoke, "reduced trial counts");
  cmd->add_flag("--quiet", o.quiet, "suppress the summary table");
  cmd->add_flag("--save-projections", o.save_projections, "also write projections.jsonl");
}

mvcca::ExperimentConfig resolve(mvcca::Experiment experiment, const Options& o) {
  auto c = mvcca::default_config(experiment, o.smoke);
  if (!o.config_path.empty()) {
    c = mvcca::load_config(o.config_path, c);
    if (c.experiment != experiment) {
      mvcca::fail(mvcca::ErrorKind::invalid_config,
                  "config file names experiment " + std::string(mvcca::to_string(c.experiment)));
    }
  }
  if (o.seed) c.master_seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (!o.out_dir.empty()) c.output_dir = o.out_dir;
  if (!o.eval.empty()) c.eval_mode = o.eval == "holdout" ? mvcca::EvalMode::holdout : mvcca::EvalMode::population;
  if (o.save_projections) c.save_projections = true;
  c.validate();
  return c;
}

void print_groups(const std::vector<mvcca::TrialRecord>& records) {
  std::printf("%-18s %6s %10s %10s %10s %10s %10s\n", "group", "trials", "med S1", "med S2",
              "med S3", "S2/S1", "S3/S1");
  for (const auto& g : mvcca::summarize_groups(records)) {
    std::printf("%-18s %6ld %10.5f %10.5f %10.5f %10.5f %10.5f\n",
                g.label.empty() ? "all" : g.label.c_str(), static_cast<long>(g.s1.count),
                g.s1.median, g.s2.median, g.s3.median, g.ratio_s2_s1.median, g.ratio_s3_s1.median);
    if (g.failed > 0) std::printf("  (%d failed trials excluded)\n", g.failed);
  }
}

int run(mvcca::Experiment experiment, const Options& o) {
  const auto c = resolve(experiment, o);
  if (!o.quiet) {
    std::printf("%s: k=%ld trials=%d seed=%llu eval=%s threads=%d\n",
                std::string(mvcca::to_string(experiment)).c_str(), static_cast<long>(c.k), c.trials,
                static_cast<unsigned long long>(c.master_seed),
                std::string(mvcca::to_string(c.eval_mode)).c_str(), mvcca::kernels::max_threads());
  }
  if (experiment == mvcca::Experiment::oracle_check) {
    const auto summary = mvcca::run_oracle_check(c);
    mvcca::write_outputs(c, summary);
    if (!o.quiet) {
      std::printf("max principal angle        %.3e\n", summary.max_principal_angle);
      std::printf("max discarded covariance   %.3e\n", summary.max_discarded_hidden_covariance);
      std::printf("max loss gap               %.3e\n", summary.max_loss_gap);
      std::printf("failures %d, threshold %.1e: %s\n", summary.failures, summary.threshold,
                  summary.passed ? "PASS" : "FAIL");
    }
    return summary.passed ? 0 : 1;
  }
  std::vector<mvcca::TrialRecord> records;
  switch (experiment) {
    case mvcca::Experiment::exp1: records = mvcca::run_exp1(c); break;
    case mvcca::Experiment::exp2: records = mvcca::run_exp2(c); break;
    case mvcca::Experiment::exp3: records = mvcca::run_exp3(c); break;
    case mvcca::Experiment::oracle_check: break;
  }
  mvcca::write_outputs(c, records);
  if (!o.quiet) {
    print_groups(records);
    std::printf("wrote %s\n", (c.output_dir / "records.csv").string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-view CCA weighting experiments"};
  app.require_subcommand(1);

  Options opts;
  struct Sub {
    const char* name;
    mvcca::Experiment experiment;
    const char* help;
  };
  const Sub subs[] = {
      {"exp1", mvcca::Experiment::exp1, "loss of S1/S2/S3 at large labeled size"},
      {"exp2", mvcca::Experiment::exp2, "S2 loss across unlabeled sample sizes"},
      {"exp3", mvcca::Experiment::exp3, "S1 vs S2 with scarce labeled data"},
      {"oracle-check", mvcca::Experiment::oracle_check, "exact-moment correctness witnesses"},
  };
  std::vector<std::pair<CLI::App*, mvcca::Experiment>> commands;
  for (const auto& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, opts);
    commands.emplace_back(cmd, s.experiment);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [cmd, experiment] : commands) {
      if (cmd->parsed()) return run(experiment, opts);
    }
  } catch (const mvcca::Error& e) {
    std::cerr << "error (" << mvcca::to_string(e.kind()) << "): " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
