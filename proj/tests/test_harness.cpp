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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "mvcca/error.hpp"
#include "mvcca/harness.hpp"

using namespace mvcca;

namespace {

ExperimentConfig small(Experiment e) {
  auto c = default_config(e);
  c.k = 3;
  c.trials = 4;
  c.unlabeled_n = 4000;
  c.labeled_n = 300;
  c.sample_size_groups = {500, 4000};
  c.labeled_size_groups = {40, 400};
  c.k_values = {1, 2, 4};
  return c;
}

ExperimentConfig parse(const std::string& text, ExperimentConfig base = {}) {
  std::istringstream in(text);
  return parse_config(in, std::move(base));
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mvcca_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("experiment names") {
  CHECK(parse_experiment("exp2") == Experiment::exp2);
  CHECK(parse_experiment("oracle-check") == Experiment::oracle_check);
  CHECK(parse_experiment(to_string(Experiment::exp3)) == Experiment::exp3);
  CHECK_THROWS_AS(parse_experiment("exp9"), Error);
}

TEST_CASE("default configs") {
  const auto e1 = default_config(Experiment::exp1);
  CHECK(e1.k == 10);
  CHECK(e1.trials == 100);
  CHECK(e1.unlabeled_n == 50000);
  CHECK(e1.labeled_n == 5000);
  CHECK(e1.noise_sds == std::array<double, 3>{2.0, 0.5, 0.2});
  CHECK(e1.y_noise_sd == 0.5);
  CHECK(e1.eval_mode == EvalMode::population);
  CHECK(e1.output_dir == std::filesystem::path("results/exp1"));
  CHECK(default_config(Experiment::exp3).trials == 25);
  CHECK(default_config(Experiment::oracle_check).trials == 20);
  CHECK(default_config(Experiment::exp2, true).trials == 10);
  CHECK(default_config(Experiment::exp2).sample_size_groups ==
        std::vector<Index>{500, 1000, 2000, 4000, 8000, 10000, 20000});
  CHECK(default_config(Experiment::exp3).labeled_size_groups == std::vector<Index>{40, 80, 150, 400});
  for (auto e : {Experiment::exp1, Experiment::exp2, Experiment::exp3, Experiment::oracle_check}) {
    CHECK_NOTHROW(default_config(e).validate());
  }
}

TEST_CASE("parse_config") {
  SUBCASE("values, comments, and lists") {
    const auto c = parse(
        "# header comment\n"
        "experiment = exp2\n"
        "k = 4   # trailing\n"
        "\n"
        "noise_sds = 1, 0.5 ,0.25\n"
        "seed = 77\n"
        "sample_size_groups = 100,200\n"
        "eval_mode = holdout:5000\n"
        "loading = gaussian\n"
        "exact_moments = yes\n"
        "output_dir = out/x\n");
    CHECK(c.experiment == Experiment::exp2);
    CHECK(c.k == 4);
    CHECK(c.noise_sds == std::array<double, 3>{1.0, 0.5, 0.25});
    CHECK(c.master_seed == 77);
    CHECK(c.sample_size_groups == std::vector<Index>{100, 200});
    CHECK(c.eval_mode == EvalMode::holdout);
    CHECK(c.holdout_n == 5000);
    CHECK(c.loading == LoadingKind::gaussian);
    CHECK(c.exact_moments);
    CHECK(c.output_dir == std::filesystem::path("out/x"));
  }
  SUBCASE("labeled_n as a list sets the labeled groups") {
    const auto c = parse("labeled_n = 40, 5000\n");
    CHECK(c.labeled_size_groups == std::vector<Index>{40, 5000});
    CHECK(parse("labeled_n = 123\n").labeled_n == 123);
  }
  SUBCASE("keeps unspecified fields from the base") {
    auto base = default_config(Experiment::exp3);
    const auto c = parse("trials = 3\n", base);
    CHECK(c.trials == 3);
    CHECK(c.ols_ridge == base.ols_ridge);
    CHECK(c.experiment == Experiment::exp3);
  }
  SUBCASE("errors") {
    for (const char* text : {"bogus = 1\n", "k = ten\n", "k 10\n", "noise_sds = 1, 2\n",
                             "exact_moments = maybe\n", "eval_mode = sometimes\n", "loading = fancy\n",
                             "sample_size_groups = \n"}) {
      CAPTURE(text);
      try {
        parse(text);
        FAIL("expected an error");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_config);
      }
    }
  }
  SUBCASE("validate catches out-of-range values") {
    for (const char* text : {"trials = 0\n", "k = 0\n", "noise_sds = 1, 0, 1\n", "labeled_n = 1\n",
                             "ols_ridge = -1\n", "k_values = 0\n"}) {
      CAPTURE(text);
      CHECK_THROWS_AS(parse(text).validate(), Error);
    }
  }
  CHECK_THROWS_AS(load_config("/nonexistent/mvcca.conf", {}), Error);
}

TEST_CASE("summarize uses linear-interpolation quantiles") {
  const auto q = summarize({4.0, 1.0, 3.0, 2.0});
  CHECK(q.count == 4);
  CHECK(q.min == 1.0);
  CHECK(q.max == 4.0);
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.q1 == doctest::Approx(1.75));
  CHECK(q.q3 == doctest::Approx(3.25));
  CHECK(q.mean == doctest::Approx(2.5));
  CHECK(summarize({}).count == 0);
  CHECK(summarize({7.0}).median == 7.0);
}

TEST_CASE("exp1 records") {
  const auto c = small(Experiment::exp1);
  const auto recs = run_exp1(c);
  REQUIRE(recs.size() == 4);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    CHECK_FALSE(r.failed);
    CHECK(r.trial_index == static_cast<int>(i));
    CHECK(r.k == 3);
    CHECK(r.labeled_n == 300);
    CHECK(r.unlabeled_n == 4000);
    CHECK(r.loss_s1 > 0.0);
    CHECK(r.ratio_s2_s1 == doctest::Approx(r.loss_s2 / r.loss_s1));
    CHECK(r.ratio_s3_s1 > 1.0);
    CHECK(r.principal_angle_max >= 0.0);
  }
}

TEST_CASE("exact-moment exp1 matches the full predictor") {
  auto c = small(Experiment::exp1);
  c.exact_moments = true;
  for (const auto& r : run_exp1(c)) {
    CHECK_FALSE(r.failed);
    CHECK(std::abs(r.ratio_s2_s1 - 1.0) < 1e-8);
    CHECK(r.principal_angle_max < 1e-7);
    CHECK(r.labeled_n == 0);
  }
}

TEST_CASE("failed trials are recorded and excluded") {
  auto c = small(Experiment::exp1);
  c.labeled_n = 5;  // fewer rows than raw features
  const auto recs = run_exp1(c);
  for (const auto& r : recs) {
    CHECK(r.failed);
    CHECK(std::isnan(r.loss_s1));
    CHECK(r.failure.find("weights") != std::string::npos);
  }
  const auto groups = summarize_groups(recs);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].failed == 4);
  CHECK(groups[0].s1.count == 0);
  const auto j = nlohmann::json::parse(summary_json(c, recs));
  CHECK(j["excluded_failed_trials"] == 4);
  CHECK(j["groups"][0]["loss"]["S1"]["median"].is_null());
  CHECK(j["failures"].size() == 4);
}

TEST_CASE("exp2 and exp3 group structure") {
  const auto r2 = run_exp2(small(Experiment::exp2));
  REQUIRE(r2.size() == 8);
  CHECK(r2[0].group_label == "unlabeled=500");
  CHECK(r2[4].group_label == "unlabeled=4000");
  // paired design: the same model across groups
  CHECK(r2[1].model_seed == r2[5].model_seed);
  CHECK(r2[1].loss_s1 != r2[5].loss_s1);

  const auto r3 = run_exp3(small(Experiment::exp3));
  REQUIRE(r3.size() == 8);
  CHECK(r3[0].group_label == "labeled=40");
  CHECK(r3[7].labeled_n == 400);
  // one unsupervised fit per model
  CHECK(r3[2].principal_angle_max == r3[6].principal_angle_max);
  for (const auto& r : r3) CHECK_FALSE(r.failed);
}

TEST_CASE("extra large labeled group agrees with exp1") {
  auto c = small(Experiment::exp3);
  c.labeled_size_groups = {40, 5000};
  c.trials = 6;
  const auto groups = summarize_groups(run_exp3(c));
  REQUIRE(groups.size() == 2);
  CHECK(groups[1].s2.median == doctest::Approx(groups[1].s1.median).epsilon(0.02));
  CHECK(groups[0].s2.median < groups[0].s1.median);
}

TEST_CASE("holdout evaluation agrees with the population loss") {
  auto c = small(Experiment::exp1);
  c.trials = 2;
  const auto pop = run_exp1(c);
  c.eval_mode = EvalMode::holdout;
  c.holdout_n = 100000;
  const auto hold = run_exp1(c);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CHECK(hold[i].loss_s1 == doctest::Approx(pop[i].loss_s1).epsilon(0.03));
    CHECK(hold[i].loss_s2 == doctest::Approx(pop[i].loss_s2).epsilon(0.03));
    CHECK(hold[i].loss_s3 == doctest::Approx(pop[i].loss_s3).epsilon(0.03));
  }
}

TEST_CASE("oracle check") {
  const auto s = run_oracle_check(small(Experiment::oracle_check));
  CHECK(s.passed);
  CHECK(s.failures == 0);
  CHECK(s.records.size() == 12);
  CHECK(s.max_principal_angle < 1e-7);
  CHECK(s.max_loss_gap < 1e-8);
  const auto rows = parse_records_csv(records_csv(s));
  CHECK(rows.size() == 24);
  CHECK(rows[0].group_label == "k=1");
}

TEST_CASE("outputs are deterministic across reruns and thread counts") {
  auto c = small(Experiment::exp2);
  c.save_projections = true;
  const auto dir_a = scratch("det_a");
  const auto dir_b = scratch("det_b");

  c.output_dir = dir_a;
  write_outputs(c, run_exp2(c));
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(3);
#endif
  c.output_dir = dir_b;
  write_outputs(c, run_exp2(c));
#ifdef _OPENMP
  omp_set_num_threads(saved);
#endif
  for (const char* f : {"records.csv", "projections.jsonl"}) {
    CAPTURE(f);
    CHECK(slurp(dir_a / f) == slurp(dir_b / f));
    CHECK_FALSE(slurp(dir_a / f).empty());
  }
  // summaries differ only in output_dir, which is not recorded
  CHECK(slurp(dir_a / "summary.json") == slurp(dir_b / "summary.json"));

  for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
    CHECK(entry.path().extension() != ".tmp");
  }
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("summary statistics can be recomputed from records.csv") {
  const auto c = small(Experiment::exp2);
  const auto recs = run_exp2(c);
  const auto rows = parse_records_csv(records_csv(recs));
  REQUIRE(rows.size() == 3 * recs.size());

  std::map<std::pair<std::string, std::string>, std::vector<double>> by;
  for (const auto& r : rows) {
    if (!r.failed) by[{r.group_label, r.feature_set}].push_back(r.loss);
  }
  const auto j = nlohmann::json::parse(summary_json(c, recs));
  for (const auto& g : j["groups"]) {
    const std::string label = g["group_label"];
    for (const char* set : {"S1", "S2", "S3"}) {
      const auto q = summarize(by[{label, set}]);
      CHECK(std::abs(q.median - g["loss"][set]["median"].get<double>()) < 1e-12);
      CHECK(std::abs(q.mean - g["loss"][set]["mean"].get<double>()) < 1e-12);
    }
  }
  CHECK_THROWS_AS(parse_records_csv("not,a,header\n"), Error);
}

TEST_CASE("runners reject a config for another experiment") {
  CHECK_THROWS_AS(run_exp1(small(Experiment::exp2)), Error);
  auto bad = small(Experiment::exp1);
  bad.trials = 0;
  CHECK_THROWS_AS(run_exp1(bad), Error);
}
