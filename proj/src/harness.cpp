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

#include "mvcca/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <tuple>
#include <limits>
#include <optional>

#include "mvcca/error.hpp"
#include "mvcca/regression.hpp"
#include "mvcca/rng.hpp"
#include "mvcca/three_view.hpp"

namespace mvcca {

namespace {

std::string stream_tag(Experiment e, std::string_view purpose) {
  std::string tag(to_string(e));
  tag += '/';
  tag += purpose;
  return tag;
}

// Everything a trial needs after the unsupervised fit.
struct FittedTrial {
  std::uint64_t model_seed = 0;
  GaussianThreeViewModel model;
  PopulationMoments moments;
  std::optional<ThreeViewProjection> projection;
  Vector center;
  double principal_angle_max = 0.0;
  Index unlabeled_n = 0;
};

FittedTrial fit_trial(const ExperimentConfig& c, int trial, Index group, Index unlabeled_n) {
  const auto t = static_cast<std::uint64_t>(trial);
  FittedTrial ft;
  ft.model_seed = derive_seed(c.master_seed, stream_tag(c.experiment, "model"), {t});
  ft.model = random_model(c.k, ft.model_seed, c.model_options());
  ft.moments = population_moments(ft.model);
  if (c.exact_moments) {
    ft.projection = fit(PsdMatrix(ft.moments.sigma_xx), c.k, 0.0);
    ft.center = Vector::Zero(3 * c.k);
    ft.unlabeled_n = 0;
  } else {
    const auto seed = derive_seed(c.master_seed, stream_tag(c.experiment, "unlabeled"),
                                  {t, static_cast<std::uint64_t>(group)});
    const Dataset unlabeled = sample(ft.model, unlabeled_n, seed);
    SampleFit sf = fit_samples(unlabeled.views, c.k);
    ft.projection = std::move(sf.projection);
    ft.center = std::move(sf.moments.mean);
    ft.unlabeled_n = unlabeled_n;
  }
  ft.principal_angle_max =
      max_principal_angle(orthonormal_basis(ft.projection->u1), oracle_subspace(ft.moments));
  return ft;
}

struct FeatureSet {
  Matrix map;
  std::optional<Vector> center;
};

Matrix apply_feature_set(const FeatureSet& fs, const Matrix& views) {
  if (!fs.center) return views * fs.map;
  return (views.rowwise() - fs.center->transpose()) * fs.map;
}

TrialRecord score_trial(const ExperimentConfig& c, const FittedTrial& ft, int trial, Index group,
                        const std::string& label, Index labeled_n) {
  const auto t = static_cast<std::uint64_t>(trial);
  const auto g = static_cast<std::uint64_t>(group);
  const Index k = c.k;

  TrialRecord rec;
  rec.experiment = c.experiment;
  rec.group_label = label;
  rec.group_index = group;
  rec.trial_index = trial;
  rec.model_seed = ft.model_seed;
  rec.k = k;
  rec.labeled_n = c.exact_moments ? 0 : labeled_n;
  rec.unlabeled_n = ft.unlabeled_n;
  rec.principal_angle_max = ft.principal_angle_max;
  if (c.save_projections) rec.projection = to_flat_record(*ft.projection);

  const std::array<FeatureSet, 3> sets{
      FeatureSet{Matrix::Identity(3 * k, 3 * k), std::nullopt},
      FeatureSet{ft.projection->u1, ft.center},
      FeatureSet{averaging_map(k), std::nullopt},
  };

  std::optional<Dataset> labeled;
  std::optional<Dataset> holdout;
  if (!c.exact_moments) {
    labeled = sample(ft.model, labeled_n,
                     derive_seed(c.master_seed, stream_tag(c.experiment, "labeled"), {t, g}));
  }
  if (c.eval_mode == EvalMode::holdout) {
    holdout = sample(ft.model, c.holdout_n,
                     derive_seed(c.master_seed, stream_tag(c.experiment, "holdout"), {t, g}));
  }

  std::array<double, 3> losses{};
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const FeatureSet& fs = sets[i];
    LinearPredictor pred;
    if (c.exact_moments) {
      pred = optimal_predictor(ft.moments, fs.map);
    } else {
      pred = ols_fit(apply_feature_set(fs, labeled->views), labeled->labels, c.ols_ridge);
      pred.feature_map = fs.map;
      pred.feature_center = fs.center;
    }
    if (c.eval_mode == EvalMode::population) {
      losses[i] = population_loss(pred, ft.moments).mean_squared_error;
    } else {
      losses[i] =
          empirical_loss(pred, apply_feature_set(fs, holdout->views), holdout->labels).mean_squared_error;
    }
  }
  rec.loss_s1 = losses[0];
  rec.loss_s2 = losses[1];
  rec.loss_s3 = losses[2];
  rec.ratio_s2_s1 = rec.loss_s2 / rec.loss_s1;
  rec.ratio_s3_s1 = rec.loss_s3 / rec.loss_s1;
  return rec;
}

TrialRecord failed_record(const ExperimentConfig& c, int trial, Index group, const std::string& label,
                          Index labeled_n, Index unlabeled_n, const std::string& why) {
  TrialRecord rec;
  rec.experiment = c.experiment;
  rec.group_label = label;
  rec.group_index = group;
  rec.trial_index = trial;
  rec.model_seed =
      derive_seed(c.master_seed, stream_tag(c.experiment, "model"), {static_cast<std::uint64_t>(trial)});
  rec.k = c.k;
  rec.labeled_n = labeled_n;
  rec.unlabeled_n = unlabeled_n;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.loss_s1 = rec.loss_s2 = rec.loss_s3 = nan;
  rec.ratio_s2_s1 = rec.ratio_s3_s1 = rec.principal_angle_max = nan;
  rec.failed = true;
  rec.failure = why;
  return rec;
}

// Runs body(task) for every task index, possibly in parallel, turning any
// exception into the failure text for that task.
template <typename Body>
void for_each_task(Index tasks, std::vector<std::string>& errors, Body&& body) {
  errors.assign(static_cast<std::size_t>(tasks), std::string());
#pragma omp parallel for schedule(dynamic, 1)
  for (Index i = 0; i < tasks; ++i) {
    try {
      body(i);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
      if (errors[static_cast<std::size_t>(i)].empty()) errors[static_cast<std::size_t>(i)] = "unknown error";
    }
  }
}

void sort_records(std::vector<TrialRecord>& records) {
  std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.group_index, a.trial_index) < std::tie(b.group_index, b.trial_index);
  });
}

void check_experiment(const ExperimentConfig& c, Experiment expected) {
  c.validate();
  if (c.experiment != expected) {
    fail(ErrorKind::invalid_config, "config is for " + std::string(to_string(c.experiment)) +
                                        ", not " + std::string(to_string(expected)));
  }
}

}  // namespace

std::vector<TrialRecord> run_exp1(const ExperimentConfig& config) {
  check_experiment(config, Experiment::exp1);
  std::vector<TrialRecord> records(static_cast<std::size_t>(config.trials));
  std::vector<std::string> errors;
  for_each_task(config.trials, errors, [&](Index i) {
    const int trial = static_cast<int>(i);
    const FittedTrial ft = fit_trial(config, trial, 0, config.unlabeled_n);
    records[static_cast<std::size_t>(i)] = score_trial(config, ft, trial, 0, "", config.labeled_n);
  });
  for (Index i = 0; i < config.trials; ++i) {
    const auto& err = errors[static_cast<std::size_t>(i)];
    if (!err.empty()) {
      records[static_cast<std::size_t>(i)] =
          failed_record(config, static_cast<int>(i), 0, "", config.labeled_n, config.unlabeled_n, err);
    }
  }
  sort_records(records);
  return records;
}

std::vector<TrialRecord> run_exp2(const ExperimentConfig& config) {
  check_experiment(config, Experiment::exp2);
  const auto groups = static_cast<Index>(config.sample_size_groups.size());
  const Index tasks = groups * config.trials;
  std::vector<TrialRecord> records(static_cast<std::size_t>(tasks));
  const auto label_of = [&](Index g) {
    return "unlabeled=" + std::to_string(config.sample_size_groups[static_cast<std::size_t>(g)]);
  };
  std::vector<std::string> errors;
  for_each_task(tasks, errors, [&](Index i) {
    const Index g = i / config.trials;
    const int trial = static_cast<int>(i % config.trials);
    const Index n = config.sample_size_groups[static_cast<std::size_t>(g)];
    const FittedTrial ft = fit_trial(config, trial, g, n);
    records[static_cast<std::size_t>(i)] = score_trial(config, ft, trial, g, label_of(g), config.labeled_n);
  });
  for (Index i = 0; i < tasks; ++i) {
    const auto& err = errors[static_cast<std::size_t>(i)];
    if (err.empty()) continue;
    const Index g = i / config.trials;
    records[static_cast<std::size_t>(i)] =
        failed_record(config, static_cast<int>(i % config.trials), g, label_of(g), config.labeled_n,
                      config.sample_size_groups[static_cast<std::size_t>(g)], err);
  }
  sort_records(records);
  return records;
}

std::vector<TrialRecord> run_exp3(const ExperimentConfig& config) {
  check_experiment(config, Experiment::exp3);
  const auto groups = static_cast<Index>(config.labeled_size_groups.size());
  std::vector<TrialRecord> records(static_cast<std::size_t>(groups * config.trials));
  const auto label_of = [&](Index g) {
    return "labeled=" + std::to_string(config.labeled_size_groups[static_cast<std::size_t>(g)]);
  };
  const auto slot = [&](Index g, Index trial) {
    return static_cast<std::size_t>(g * config.trials + trial);
  };
  // One unsupervised fit per model, shared by every labeled-size group.
  std::vector<std::string> errors;
  std::vector<std::vector<std::string>> group_errors(
      static_cast<std::size_t>(config.trials), std::vector<std::string>(static_cast<std::size_t>(groups)));
  for_each_task(config.trials, errors, [&](Index i) {
    const int trial = static_cast<int>(i);
    const FittedTrial ft = fit_trial(config, trial, 0, config.unlabeled_n);
    for (Index g = 0; g < groups; ++g) {
      const Index n = config.labeled_size_groups[static_cast<std::size_t>(g)];
      try {
        records[slot(g, i)] = score_trial(config, ft, trial, g, label_of(g), n);
      } catch (const std::exception& e) {
        group_errors[static_cast<std::size_t>(i)][static_cast<std::size_t>(g)] = e.what();
      }
    }
  });
  for (Index i = 0; i < config.trials; ++i) {
    for (Index g = 0; g < groups; ++g) {
      std::string err = errors[static_cast<std::size_t>(i)];
      if (err.empty()) err = group_errors[static_cast<std::size_t>(i)][static_cast<std::size_t>(g)];
      if (err.empty()) continue;
      records[slot(g, i)] = failed_record(config, static_cast<int>(i), g, label_of(g),
                                          config.labeled_size_groups[static_cast<std::size_t>(g)],
                                          config.unlabeled_n, err);
    }
  }
  sort_records(records);
  return records;
}

OracleSummary run_oracle_check(const ExperimentConfig& config) {
  check_experiment(config, Experiment::oracle_check);
  const auto ks = static_cast<Index>(config.k_values.size());
  const Index tasks = ks * config.trials;
  OracleSummary out;
  out.threshold = config.oracle_threshold;
  out.records.resize(static_cast<std::size_t>(tasks));
  std::vector<std::string> errors;
  for_each_task(tasks, errors, [&](Index i) {
    const Index k = config.k_values[static_cast<std::size_t>(i / config.trials)];
    const int trial = static_cast<int>(i % config.trials);
    OracleRecord& r = out.records[static_cast<std::size_t>(i)];
    r.k = k;
    r.trial_index = trial;
    r.model_seed = derive_seed(config.master_seed, stream_tag(config.experiment, "model"),
                               {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(trial)});
    const auto model = random_model(k, r.model_seed, config.model_options());
    const auto moments = population_moments(model);
    const auto proj = fit(PsdMatrix(moments.sigma_xx), k, 0.0);
    const auto diag = validate(proj, moments);
    r.principal_angle_max = diag.principal_angles_to_oracle->empty() ? 0.0 : diag.principal_angles_to_oracle->back();
    r.discarded_hidden_covariance_max = diag.discarded_hidden_covariance_max;
    r.loss_full = optimal_loss(moments);
    r.loss_fused = optimal_loss(moments, orthonormal_basis(proj.u1));
    r.loss_gap = std::abs(r.loss_fused - r.loss_full);
  });
  for (Index i = 0; i < tasks; ++i) {
    OracleRecord& r = out.records[static_cast<std::size_t>(i)];
    const auto& err = errors[static_cast<std::size_t>(i)];
    if (!err.empty()) {
      r.k = config.k_values[static_cast<std::size_t>(i / config.trials)];
      r.trial_index = static_cast<int>(i % config.trials);
      r.failed = true;
      r.failure = err;
      ++out.failures;
      continue;
    }
    out.max_principal_angle = std::max(out.max_principal_angle, r.principal_angle_max);
    out.max_discarded_hidden_covariance =
        std::max(out.max_discarded_hidden_covariance, r.discarded_hidden_covariance_max);
    out.max_loss_gap = std::max(out.max_loss_gap, r.loss_gap);
  }
  out.passed = out.failures == 0 && out.max_principal_angle < out.threshold &&
               out.max_discarded_hidden_covariance < out.threshold && out.max_loss_gap < out.threshold;
  return out;
}

Quantiles summarize(std::vector<double> values) {
  Quantiles q;
  q.count = static_cast<Index>(values.size());
  if (values.empty()) return q;
  std::sort(values.begin(), values.end());
  const auto at = [&values](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  double sum = 0.0;
  for (double v : values) sum += v;
  q.mean = sum / static_cast<double>(values.size());
  q.min = values.front();
  q.max = values.back();
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  return q;
}

std::vector<GroupSummary> summarize_groups(const std::vector<TrialRecord>& records) {
  std::vector<Index> order;
  for (const auto& r : records) {
    if (std::find(order.begin(), order.end(), r.group_index) == order.end()) order.push_back(r.group_index);
  }
  std::sort(order.begin(), order.end());
  std::vector<GroupSummary> out;
  for (Index g : order) {
    GroupSummary s;
    s.group_index = g;
    std::vector<double> l1, l2, l3, r2, r3, angle;
    for (const auto& r : records) {
      if (r.group_index != g) continue;
      s.label = r.group_label;
      if (r.failed) {
        ++s.failed;
        continue;
      }
      l1.push_back(r.loss_s1);
      l2.push_back(r.loss_s2);
      l3.push_back(r.loss_s3);
      r2.push_back(r.ratio_s2_s1);
      r3.push_back(r.ratio_s3_s1);
      angle.push_back(r.principal_angle_max);
    }
    s.s1 = summarize(l1);
    s.s2 = summarize(l2);
    s.s3 = summarize(l3);
    s.ratio_s2_s1 = summarize(r2);
    s.ratio_s3_s1 = summarize(r3);
    s.principal_angle_max = summarize(angle);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mvcca
