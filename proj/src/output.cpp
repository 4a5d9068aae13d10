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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "mvcca/error.hpp"
#include "mvcca/harness.hpp"

namespace mvcca {

namespace {

using nlohmann::ordered_json;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void csv_row(std::ostringstream& os, std::string_view experiment, const std::string& group,
             int trial, std::uint64_t seed, std::string_view set, Index dim, Index labeled,
             Index unlabeled, double loss, double ratio, double angle, bool failed) {
  os << experiment << ',' << group << ',' << trial << ',' << seed << ',' << set << ',' << dim << ','
     << labeled << ',' << unlabeled << ',' << num(loss) << ',' << num(ratio) << ',' << num(angle)
     << ',' << (failed ? 1 : 0) << '\n';
}

// JSON cannot hold NaN; empty groups report null statistics.
ordered_json quantiles_json(const Quantiles& q) {
  ordered_json j;
  j["count"] = q.count;
  if (q.count == 0) {
    for (const char* key : {"mean", "min", "q1", "median", "q3", "max"}) j[key] = nullptr;
    return j;
  }
  j["mean"] = q.mean;
  j["min"] = q.min;
  j["q1"] = q.q1;
  j["median"] = q.median;
  j["q3"] = q.q3;
  j["max"] = q.max;
  return j;
}

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["experiment"] = to_string(c.experiment);
  j["k"] = c.k;
  j["noise_sds"] = c.noise_sds;
  j["y_noise_sd"] = c.y_noise_sd;
  j["loading"] = c.loading == LoadingKind::orthogonal ? "orthogonal" : "gaussian";
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["unlabeled_n"] = c.unlabeled_n;
  j["labeled_n"] = c.labeled_n;
  switch (c.experiment) {
    case Experiment::exp2: j["sample_size_groups"] = c.sample_size_groups; break;
    case Experiment::exp3: j["labeled_size_groups"] = c.labeled_size_groups; break;
    case Experiment::oracle_check: j["k_values"] = c.k_values; break;
    case Experiment::exp1: break;
  }
  j["eval_mode"] = to_string(c.eval_mode);
  if (c.eval_mode == EvalMode::holdout) j["holdout_n"] = c.holdout_n;
  j["ols_ridge"] = c.ols_ridge;
  j["exact_moments"] = c.exact_moments;
  return j;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  return std::stod(s);
}

}  // namespace

std::string records_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << kRecordsHeader << '\n';
  for (const auto& r : records) {
    const auto exp = to_string(r.experiment);
    csv_row(os, exp, r.group_label, r.trial_index, r.model_seed, "S1", 3 * r.k, r.labeled_n,
            r.unlabeled_n, r.loss_s1, r.failed ? std::nan("") : 1.0, r.principal_angle_max, r.failed);
    csv_row(os, exp, r.group_label, r.trial_index, r.model_seed, "S2", r.k, r.labeled_n,
            r.unlabeled_n, r.loss_s2, r.ratio_s2_s1, r.principal_angle_max, r.failed);
    csv_row(os, exp, r.group_label, r.trial_index, r.model_seed, "S3", r.k, r.labeled_n,
            r.unlabeled_n, r.loss_s3, r.ratio_s3_s1, r.principal_angle_max, r.failed);
  }
  return os.str();
}

std::string records_csv(const OracleSummary& summary) {
  std::ostringstream os;
  os << kRecordsHeader << '\n';
  for (const auto& r : summary.records) {
    const std::string group = "k=" + std::to_string(r.k);
    const double nan = std::nan("");
    csv_row(os, "oracle_check", group, r.trial_index, r.model_seed, "S1", 3 * r.k, 0, 0,
            r.failed ? nan : r.loss_full, r.failed ? nan : 1.0, r.failed ? nan : r.principal_angle_max,
            r.failed);
    csv_row(os, "oracle_check", group, r.trial_index, r.model_seed, "S2", r.k, 0, 0,
            r.failed ? nan : r.loss_fused, r.failed ? nan : r.loss_fused / r.loss_full,
            r.failed ? nan : r.principal_angle_max, r.failed);
  }
  return os.str();
}

std::string summary_json(const ExperimentConfig& config, const std::vector<TrialRecord>& records) {
  ordered_json j;
  j["config"] = config_json(config);
  int failed = 0;
  ordered_json groups = ordered_json::array();
  for (const auto& g : summarize_groups(records)) {
    failed += g.failed;
    ordered_json gj;
    gj["group_label"] = g.label;
    gj["group_index"] = g.group_index;
    gj["trials"] = g.s1.count;
    gj["failed"] = g.failed;
    gj["loss"]["S1"] = quantiles_json(g.s1);
    gj["loss"]["S2"] = quantiles_json(g.s2);
    gj["loss"]["S3"] = quantiles_json(g.s3);
    gj["ratio_to_s1"]["S2"] = quantiles_json(g.ratio_s2_s1);
    gj["ratio_to_s1"]["S3"] = quantiles_json(g.ratio_s3_s1);
    gj["principal_angle_max"] = quantiles_json(g.principal_angle_max);
    groups.push_back(std::move(gj));
  }
  j["groups"] = std::move(groups);
  j["excluded_failed_trials"] = failed;
  ordered_json failures = ordered_json::array();
  for (const auto& r : records) {
    if (!r.failed) continue;
    failures.push_back({{"group_label", r.group_label}, {"trial_index", r.trial_index}, {"reason", r.failure}});
  }
  j["failures"] = std::move(failures);
  return j.dump(2) + "\n";
}

std::string summary_json(const ExperimentConfig& config, const OracleSummary& summary) {
  ordered_json j;
  j["config"] = config_json(config);
  j["threshold"] = summary.threshold;
  j["passed"] = summary.passed;
  j["failures"] = summary.failures;
  j["max_principal_angle"] = summary.max_principal_angle;
  j["max_discarded_hidden_covariance"] = summary.max_discarded_hidden_covariance;
  j["max_loss_gap"] = summary.max_loss_gap;
  ordered_json per_k = ordered_json::array();
  for (Index k : config.k_values) {
    double angle = 0.0, disc = 0.0, gap = 0.0;
    int n = 0, bad = 0;
    for (const auto& r : summary.records) {
      if (r.k != k) continue;
      if (r.failed) {
        ++bad;
        continue;
      }
      ++n;
      angle = std::max(angle, r.principal_angle_max);
      disc = std::max(disc, r.discarded_hidden_covariance_max);
      gap = std::max(gap, r.loss_gap);
    }
    per_k.push_back({{"k", k},
                     {"trials", n},
                     {"failed", bad},
                     {"max_principal_angle", angle},
                     {"max_discarded_hidden_covariance", disc},
                     {"max_loss_gap", gap}});
  }
  j["per_k"] = std::move(per_k);
  ordered_json failures = ordered_json::array();
  for (const auto& r : summary.records) {
    if (r.failed) failures.push_back({{"k", r.k}, {"trial_index", r.trial_index}, {"reason", r.failure}});
  }
  j["failure_reasons"] = std::move(failures);
  return j.dump(2) + "\n";
}

std::string projections_jsonl(const std::vector<TrialRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    if (r.failed || r.projection.empty()) continue;
    ordered_json j;
    j["group_label"] = r.group_label;
    j["trial_index"] = r.trial_index;
    j["record"] = r.projection;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorKind::io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorKind::io, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

void write_outputs(const ExperimentConfig& config, const std::vector<TrialRecord>& records) {
  write_file_atomic(config.output_dir / "records.csv", records_csv(records));
  write_file_atomic(config.output_dir / "summary.json", summary_json(config, records));
  if (config.save_projections) {
    write_file_atomic(config.output_dir / "projections.jsonl", projections_jsonl(records));
  }
}

void write_outputs(const ExperimentConfig& config, const OracleSummary& summary) {
  write_file_atomic(config.output_dir / "records.csv", records_csv(summary));
  write_file_atomic(config.output_dir / "summary.json", summary_json(config, summary));
}

std::vector<CsvRow> parse_records_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kRecordsHeader) {
    fail(ErrorKind::invalid_input, "records.csv header mismatch");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 12) fail(ErrorKind::invalid_input, "records.csv row has " + std::to_string(f.size()) + " fields");
    CsvRow r;
    r.experiment = f[0];
    r.group_label = f[1];
    r.trial_index = std::stoi(f[2]);
    r.feature_set = f[4];
    r.loss = parse_double(f[8]);
    r.ratio_to_s1 = parse_double(f[9]);
    r.failed = f[11] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace mvcca
