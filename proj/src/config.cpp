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
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mvcca/error.hpp"
#include "mvcca/harness.hpp"

namespace mvcca {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* expected) {
  fail(ErrorKind::invalid_config, "config key '" + key + "': cannot read '" + value + "' as " + expected);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) bad(key, value, "a number");
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<Index> parse_index_list(const std::string& key, const std::string& value) {
  std::vector<Index> out;
  for (const auto& item : split_list(value)) out.push_back(parse_number<Index>(key, item));
  if (out.empty()) bad(key, value, "a non-empty list");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad(key, value, "a boolean");
}

void apply(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "experiment") {
    c.experiment = parse_experiment(value);
  } else if (key == "k") {
    c.k = parse_number<Index>(key, value);
  } else if (key == "noise_sds") {
    const auto items = split_list(value);
    if (items.size() != 3) bad(key, value, "three noise scales");
    for (std::size_t i = 0; i < 3; ++i) c.noise_sds[i] = parse_number<double>(key, items[i]);
  } else if (key == "y_noise_sd") {
    c.y_noise_sd = parse_number<double>(key, value);
  } else if (key == "loading") {
    if (value == "orthogonal") {
      c.loading = LoadingKind::orthogonal;
    } else if (value == "gaussian") {
      c.loading = LoadingKind::gaussian;
    } else {
      bad(key, value, "orthogonal|gaussian");
    }
  } else if (key == "trials") {
    c.trials = parse_number<int>(key, value);
  } else if (key == "master_seed" || key == "seed") {
    c.master_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "unlabeled_n") {
    c.unlabeled_n = parse_number<Index>(key, value);
  } else if (key == "labeled_n") {
    // A list here is shorthand for the labeled-size groups.
    const auto items = parse_index_list(key, value);
    if (items.size() == 1) {
      c.labeled_n = items.front();
    } else {
      c.labeled_size_groups = items;
    }
  } else if (key == "sample_size_groups") {
    c.sample_size_groups = parse_index_list(key, value);
  } else if (key == "labeled_size_groups") {
    c.labeled_size_groups = parse_index_list(key, value);
  } else if (key == "k_values") {
    c.k_values = parse_index_list(key, value);
  } else if (key == "eval_mode") {
    if (value == "population") {
      c.eval_mode = EvalMode::population;
    } else if (value.rfind("holdout", 0) == 0) {
      c.eval_mode = EvalMode::holdout;
      if (value.size() > 7) {
        if (value[7] != ':') bad(key, value, "population|holdout[:m]");
        c.holdout_n = parse_number<Index>(key, value.substr(8));
      }
    } else {
      bad(key, value, "population|holdout[:m]");
    }
  } else if (key == "holdout_n") {
    c.holdout_n = parse_number<Index>(key, value);
  } else if (key == "ols_ridge") {
    c.ols_ridge = parse_number<double>(key, value);
  } else if (key == "exact_moments") {
    c.exact_moments = parse_bool(key, value);
  } else if (key == "save_projections") {
    c.save_projections = parse_bool(key, value);
  } else if (key == "oracle_threshold") {
    c.oracle_threshold = parse_number<double>(key, value);
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else {
    fail(ErrorKind::invalid_config, "unknown config key '" + key + "'");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::invalid_config, what);
}

}  // namespace

std::string_view to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::exp1: return "exp1";
    case Experiment::exp2: return "exp2";
    case Experiment::exp3: return "exp3";
    case Experiment::oracle_check: return "oracle_check";
  }
  return "unknown";
}

std::string_view to_string(EvalMode e) noexcept {
  return e == EvalMode::population ? "population" : "holdout";
}

Experiment parse_experiment(std::string_view name) {
  if (name == "exp1") return Experiment::exp1;
  if (name == "exp2") return Experiment::exp2;
  if (name == "exp3") return Experiment::exp3;
  if (name == "oracle_check" || name == "oracle-check") return Experiment::oracle_check;
  fail(ErrorKind::invalid_config, "unknown experiment '" + std::string(name) + "'");
}

ModelOptions ExperimentConfig::model_options() const {
  return ModelOptions{noise_sds, y_noise_sd, loading};
}

void ExperimentConfig::validate() const {
  require(k >= 1, "k must be positive");
  require(trials >= 1, "trials must be at least 1");
  for (double sd : noise_sds) require(sd > 0.0, "view noise scales must be positive");
  require(y_noise_sd > 0.0, "y_noise_sd must be positive");
  require(unlabeled_n >= 2, "unlabeled_n must be at least 2");
  require(labeled_n >= 2, "labeled_n must be at least 2");
  require(holdout_n >= 2, "holdout_n must be at least 2");
  require(ols_ridge >= 0.0, "ols_ridge must be nonnegative");
  require(oracle_threshold > 0.0, "oracle_threshold must be positive");
  require(!sample_size_groups.empty(), "sample_size_groups must not be empty");
  require(!labeled_size_groups.empty(), "labeled_size_groups must not be empty");
  for (Index n : sample_size_groups) require(n >= 2, "every sample size must be at least 2");
  for (Index n : labeled_size_groups) require(n >= 2, "every labeled size must be at least 2");
  require(!k_values.empty(), "k_values must not be empty");
  for (Index kv : k_values) require(kv >= 1, "every k value must be positive");
  require(!output_dir.empty(), "output_dir must not be empty");
}

ExperimentConfig default_config(Experiment experiment, bool smoke) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.output_dir = std::filesystem::path("results") / std::string(to_string(experiment));
  switch (experiment) {
    case Experiment::exp1:
    case Experiment::exp2:
      c.trials = 100;
      break;
    case Experiment::exp3:
      c.trials = 25;
      // 40 labeled rows against 30 raw features: keep both fits well posed.
      c.ols_ridge = 1e-8;
      break;
    case Experiment::oracle_check:
      c.trials = 20;
      break;
  }
  if (smoke) c.trials = std::min(c.trials, 10);
  return c;
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::invalid_config, "line " + std::to_string(line_no) + ": expected key = value");
    }
    apply(base, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::invalid_config, "cannot open config file " + path.string());
  return parse_config(in, std::move(base));
}

}  // namespace mvcca
