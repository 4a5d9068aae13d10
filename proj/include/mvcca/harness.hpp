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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mvcca/linalg.hpp"
#include "mvcca/model.hpp"

namespace mvcca {

enum class Experiment { exp1, exp2, exp3, oracle_check };
enum class EvalMode { population, holdout };

std::string_view to_string(Experiment e) noexcept;
std::string_view to_string(EvalMode e) noexcept;
Experiment parse_experiment(std::string_view name);

struct ExperimentConfig {
  Experiment experiment = Experiment::exp1;
  Index k = 10;
  std::array<double, 3> noise_sds{2.0, 0.5, 0.2};
  double y_noise_sd = 0.5;
  LoadingKind loading = LoadingKind::orthogonal;
  int trials = 100;
  std::uint64_t master_seed = 1;
  Index unlabeled_n = 50000;
  Index labeled_n = 5000;
  std::vector<Index> sample_size_groups{500, 1000, 2000, 4000, 8000, 10000, 20000};
  std::vector<Index> labeled_size_groups{40, 80, 150, 400};
  std::vector<Index> k_values{1, 2, 3, 5, 10};  // oracle_check only
  EvalMode eval_mode = EvalMode::population;
  Index holdout_n = 100000;
  double ols_ridge = 0.0;
  /// exp1 debug path: fit on exact moments and use exact optimal predictors.
  bool exact_moments = false;
  bool save_projections = false;
  double oracle_threshold = 1e-7;
  std::filesystem::path output_dir = "results";

  ModelOptions model_options() const;

  /// Throws invalid_config on any out-of-range field.
  void validate() const;
};

/// Full-size defaults per experiment; smoke caps trial counts at 10.
ExperimentConfig default_config(Experiment experiment, bool smoke = false);

/// Applies `key = value` lines ('#' starts a comment, lists are comma
/// separated) on top of base.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base);

struct TrialRecord {
  Experiment experiment = Experiment::exp1;
  std::string group_label;
  Index group_index = 0;
  int trial_index = 0;
  std::uint64_t model_seed = 0;
  Index k = 0;
  Index labeled_n = 0;
  Index unlabeled_n = 0;
  double loss_s1 = 0.0;
  double loss_s2 = 0.0;
  double loss_s3 = 0.0;
  double ratio_s2_s1 = 0.0;
  double ratio_s3_s1 = 0.0;
  double principal_angle_max = 0.0;
  bool failed = false;
  std::string failure;
  std::vector<double> projection;  // flat record, only with save_projections
};

struct OracleRecord {
  Index k = 0;
  int trial_index = 0;
  std::uint64_t model_seed = 0;
  double principal_angle_max = 0.0;
  double discarded_hidden_covariance_max = 0.0;
  double loss_full = 0.0;
  double loss_fused = 0.0;
  double loss_gap = 0.0;
  bool failed = false;
  std::string failure;
};

struct OracleSummary {
  std::vector<OracleRecord> records;
  double max_principal_angle = 0.0;
  double max_discarded_hidden_covariance = 0.0;
  double max_loss_gap = 0.0;
  int failures = 0;
  double threshold = 1e-7;
  bool passed = false;
};

/// Records are sorted by (group, trial) regardless of execution order.
std::vector<TrialRecord> run_exp1(const ExperimentConfig& config);
std::vector<TrialRecord> run_exp2(const ExperimentConfig& config);
std::vector<TrialRecord> run_exp3(const ExperimentConfig& config);
OracleSummary run_oracle_check(const ExperimentConfig& config);

// Summary statistics ------------------------------------------------------

struct Quantiles {
  Index count = 0;
  double mean = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Linear-interpolation quantiles (type 7). Empty input gives count 0.
Quantiles summarize(std::vector<double> values);

struct GroupSummary {
  std::string label;
  Index group_index = 0;
  int failed = 0;
  Quantiles s1, s2, s3, ratio_s2_s1, ratio_s3_s1, principal_angle_max;
};

/// One entry per group in group order; failed trials are excluded.
std::vector<GroupSummary> summarize_groups(const std::vector<TrialRecord>& records);

// Output ------------------------------------------------------------------

inline constexpr std::string_view kRecordsHeader =
    "experiment,group_label,trial_index,model_seed,feature_set,feature_dim,labeled_n,"
    "unlabeled_n,loss,ratio_to_s1,principal_angle_max,failed";

std::string records_csv(const std::vector<TrialRecord>& records);
std::string records_csv(const OracleSummary& summary);
std::string summary_json(const ExperimentConfig& config, const std::vector<TrialRecord>& records);
std::string summary_json(const ExperimentConfig& config, const OracleSummary& summary);
std::string projections_jsonl(const std::vector<TrialRecord>& records);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Writes records.csv and summary.json (and projections.jsonl when enabled)
/// into config.output_dir.
void write_outputs(const ExperimentConfig& config, const std::vector<TrialRecord>& records);
void write_outputs(const ExperimentConfig& config, const OracleSummary& summary);

/// Parses a records.csv back into rows (used to cross-check summaries).
struct CsvRow {
  std::string experiment;
  std::string group_label;
  int trial_index = 0;
  std::string feature_set;
  double loss = 0.0;
  double ratio_to_s1 = 0.0;
  bool failed = false;
};
std::vector<CsvRow> parse_records_csv(std::string_view text);

}  // namespace mvcca
