// Copyright 2026 The feaslab Authors
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


#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "feaslab/error.hpp"
#include "feaslab/rf.hpp"
#include "feaslab/testbeds.hpp"
#include "oracles.hpp"

using namespace feaslab;

TEST_SUITE("rf") {

TEST_CASE("batch_means") {
  const std::uint8_t a[] = {1, 1, 0, 0};
  CHECK(batch_means(a, 2) == std::vector<double>{1.0, 0.0});
  CHECK(batch_means(a, 1) == std::vector<double>{1.0, 1.0, 0.0, 0.0});
  const std::uint8_t b[] = {0, 1, 1, 0};
  CHECK(batch_means(b, 4) == std::vector<double>{0.5});
  CHECK(batch_means(b, 3).size() == 1);
  CHECK_THROWS_AS(batch_means(b, 0), DomainError);
}

TEST_CASE("solve_eta") {
  CHECK(solve_eta(0.05, 20) == doctest::Approx(oracle::bisect_eta(0.05, 20)).epsilon(1e-10));
  CHECK(solve_eta(0.05, 20) == doctest::Approx(0.137137).epsilon(1e-6));
  CHECK(solve_eta(0.25, 3) == doctest::Approx(0.5));
  for (double beta : {0.001, 0.0125, 0.05, 0.2, 0.49}) {
    for (int n0 : {2, 5, 20, 50}) {
      CHECK(std::abs(rf_g(solve_eta(beta, n0), n0) - beta) < 1e-10);
    }
  }
  CHECK_THROWS_AS(solve_eta(0.5, 20), DomainError);
  CHECK_THROWS_AS(solve_eta(0.05, 1), DomainError);
}

TEST_CASE("continuation_radius") {
  CHECK(continuation_radius(1, 0.05, 0.13712, 0.01, 20) == doctest::Approx(0.49606).epsilon(1e-5));
  CHECK(continuation_radius(1, 0.05, 0.13712, 0.0, 20) == 0.0);
  const double r_star = 2.0 * 19 * 0.13712 * 0.01 / (0.05 * 0.05);
  CHECK(continuation_radius(r_star, 0.05, 0.13712, 0.01, 20) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(continuation_radius(r_star + 1, 0.05, 0.13712, 0.01, 20) == 0.0);
  double prev = 1e9;
  for (int r = 1; r < r_star; ++r) {
    const double now = continuation_radius(r, 0.05, 0.13712, 0.01, 20);
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("run_rf accounting and determinism") {
  ProblemSpec spec;
  spec.k = 2;
  spec.s = 1;
  spec.theta = {1.5};
  const SyntheticSource src({{0.1}, {0.4}}, Coupling::kIndependent);
  PassPlan plan;
  plan.thresholds = {{0.25}};
  for (auto mode : {ToleranceMode::kConservative, ToleranceMode::kAdjusted}) {
    const RfParams params{20, 8, mode};
    const auto a = run_rf(spec, plan, params, src, 4);
    const auto b = run_rf(spec, plan, params, src, 4);
    CHECK(a.decisions == b.decisions);
    CHECK(a.obs == b.obs);
    CHECK(a.decisions.pending_count() == 0);
    for (auto n : a.obs) {
      CHECK(n % 8 == 0);
      CHECK(n >= 160);
    }
    CHECK(a.decisions.at(0, 0, 0).decision == Decision::kFeasible);
    CHECK(a.decisions.at(1, 0, 0).decision == Decision::kInfeasible);
  }
  CHECK_THROWS_AS(run_rf(spec, plan, RfParams{1, 1, ToleranceMode::kConservative}, src, 1),
                  DomainError);
}

TEST_CASE("run_rf respects the observation cap") {
  ProblemSpec spec;
  spec.k = 1;
  spec.s = 1;
  spec.theta = {1.2};
  spec.obs_cap = 30;
  const SyntheticSource src({{0.3}}, Coupling::kIndependent);
  PassPlan plan;
  plan.thresholds = {{0.3}};
  const auto res = run_rf(spec, plan, RfParams{20, 1, ToleranceMode::kConservative}, src, 2);
  CHECK(res.obs[0] <= 30);
  if (res.capped) CHECK(res.decisions.pending_count() == 1);
}

TEST_CASE("adjusted tolerance samples less than conservative on SC thresholds") {
  std::uint64_t conservative = 0, adjusted = 0;
  for (double p : {0.1, 0.3, 0.5}) {
    ProblemSpec spec;
    spec.k = 1;
    spec.s = 1;
    spec.theta = {1.5};
    const SyntheticSource src({{p}}, Coupling::kIndependent);
    PassPlan plan;
    plan.thresholds = {{boundary_thresholds(p, OddsRatio(1.5)).lower}};
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
      conservative += run_rf(spec, plan, {20, 4, ToleranceMode::kConservative}, src, rep).obs[0];
      adjusted += run_rf(spec, plan, {20, 4, ToleranceMode::kAdjusted}, src, rep).obs[0];
    }
  }
  CHECK(adjusted < conservative);
}

}  // TEST_SUITE
