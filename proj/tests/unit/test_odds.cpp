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
#include <vector>

#include "doctest.h"
#include "feaslab/error.hpp"
#include "feaslab/odds.hpp"
#include "oracles.hpp"

using namespace feaslab;

namespace {

// h at which p(1-h)/((1-p)h) equals `ratio`.
double h_for_ratio(double p, double ratio) { return p / (p + (1.0 - p) * ratio); }

}  // namespace

TEST_SUITE("odds") {

TEST_CASE("error_split") {
  CHECK(error_split(0.05, 1, SamplingMode::kIndependent) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(error_split(0.05, 1, SamplingMode::kCrn) == 0.05);
  CHECK(error_split(0.05, 10, SamplingMode::kCrn) == doctest::Approx(0.005).epsilon(1e-15));
  const double beta = error_split(0.05, 10, SamplingMode::kIndependent);
  CHECK(beta == doctest::Approx(static_cast<double>(oracle::independent_beta(0.05L, 10))).epsilon(1e-13));
  CHECK(beta == doctest::Approx(0.0051162).epsilon(1e-5));
  CHECK_THROWS_AS(error_split(0.0, 3, SamplingMode::kCrn), DomainError);
  CHECK_THROWS_AS(error_split(1.0, 3, SamplingMode::kCrn), DomainError);
  CHECK_THROWS_AS(error_split(0.05, 0, SamplingMode::kCrn), DomainError);
}

TEST_CASE("per_constraint_error") {
  const std::vector<int> two{2, 2};
  auto i = per_constraint_error(0.05, two, ErrorSplit::kPerConstraint);
  auto ii = per_constraint_error(0.05, two, ErrorSplit::kPerEffectiveThreshold);
  REQUIRE(i.size() == 2);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(i[l] == doctest::Approx(0.0125));
    CHECK(ii[l] == doctest::Approx(i[l]));
  }
  const std::vector<int> mixed{1, 3, 5};
  for (double b : per_constraint_error(0.06, mixed, ErrorSplit::kPerEffectiveThreshold)) {
    CHECK(b == doctest::Approx(0.012));
  }
  auto mi = per_constraint_error(0.06, mixed, ErrorSplit::kPerConstraint);
  CHECK(mi[0] == doctest::Approx(0.02));
  CHECK(mi[1] == doctest::Approx(0.01));
  CHECK_THROWS_AS(per_constraint_error(0.05, std::vector<int>{}, ErrorSplit::kPerConstraint),
                  DomainError);
}

TEST_CASE("continuation_halfwidth") {
  CHECK(continuation_halfwidth(0.05, OddsRatio(1.2)) == 17);
  CHECK(continuation_halfwidth(0.05, OddsRatio(1.5)) == 8);
  CHECK(continuation_halfwidth(0.6, OddsRatio(2.0)) == 1);
  // Minimality on a grid, checked with an independent pow() evaluation.
  for (double theta : {1.05, 1.2, 1.5, 2.0, 3.0}) {
    for (double beta : {0.001, 0.0125, 0.025, 0.05, 0.1, 0.3}) {
      const int H = continuation_halfwidth(beta, OddsRatio(theta));
      CHECK(1.0L / (1.0L + std::pow(static_cast<long double>(theta), H)) <= beta);
      if (H > 1) {
        CHECK(1.0L / (1.0L + std::pow(static_cast<long double>(theta), H - 1)) > beta);
      }
    }
  }
}

TEST_CASE("odds ratio parameter rejects theta <= 1") {
  CHECK_THROWS_AS(OddsRatio(1.0), DomainError);
  CHECK_THROWS_AS(OddsRatio(0.9), DomainError);
  CHECK_NOTHROW(OddsRatio(1.0001));
}

TEST_CASE("classify") {
  const OddsRatio t12(1.2);
  // h = f_L(0.15, 1.2) ~ 0.1282 lies below p: the Unacceptable boundary.
  CHECK(classify(0.15, 0.1282, t12) == Classification::kUnacceptable);
  CHECK(classify(0.15, 0.15, t12) == Classification::kAcceptable);
  CHECK(classify(0.5, 0.25, OddsRatio(1.5)) == Classification::kUnacceptable);
  CHECK(classify(0.15, 0.1748, t12) == Classification::kDesirable);
  CHECK_THROWS_AS(classify(0.0, 0.5, t12), DomainError);
  CHECK_THROWS_AS(classify(0.5, 1.0, t12), DomainError);
}

TEST_CASE("boundary_thresholds") {
  const auto b = boundary_thresholds(0.15, OddsRatio(1.2));
  CHECK(b.lower == doctest::Approx(0.1282).epsilon(5e-4));
  CHECK(b.upper == doctest::Approx(0.1748).epsilon(5e-4));
  CHECK(boundary_thresholds(0.15, OddsRatio(1.5)).lower == doctest::Approx(0.10526).epsilon(1e-4));
  const auto near = boundary_thresholds(0.5, OddsRatio(1.0 + 1e-9));
  CHECK(near.lower == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(near.upper == doctest::Approx(0.5).epsilon(1e-8));
  // Boundaries sit exactly on the odds-ratio edges and classify onto them.
  for (double theta : {1.2, 1.5, 3.0}) {
    for (double p = 0.01; p < 1.0; p += 0.07) {
      const auto pair = boundary_thresholds(p, OddsRatio(theta));
      CHECK(pair.lower < p);
      CHECK(pair.upper > p);
      CHECK(1.0 / odds_ratio(p, pair.lower) == doctest::Approx(theta).epsilon(1e-12));
      CHECK(odds_ratio(p, pair.upper) == doctest::Approx(theta).epsilon(1e-12));
      CHECK(classify(p, pair.lower, OddsRatio(theta)) == Classification::kUnacceptable);
      CHECK(classify(p, pair.upper, OddsRatio(theta)) == Classification::kDesirable);
    }
  }
}

TEST_CASE("classification partitions the grid") {
  const OddsRatio theta(1.5);
  for (double p = 0.02; p < 1.0; p += 0.05) {
    for (double h = 0.02; h < 1.0; h += 0.05) {
      const double ratio = odds_ratio(p, h);
      const auto c = classify(p, h, theta);
      if (ratio >= 1.5 * (1 + 1e-9)) CHECK(c == Classification::kDesirable);
      if (1.0 / ratio >= 1.5 * (1 + 1e-9)) CHECK(c == Classification::kUnacceptable);
      if (ratio < 1.5 * (1 - 1e-9) && 1.0 / ratio < 1.5 * (1 - 1e-9)) {
        CHECK(c == Classification::kAcceptable);
      }
    }
  }
}

TEST_CASE("absorption_probability") {
  CHECK(absorption_probability(0.3, 0.3, 5) == 0.5);
  CHECK(absorption_probability(0.5, h_for_ratio(0.5, 1.0 / 1.5), 8) ==
        doctest::Approx(0.96244).epsilon(1e-5));
  CHECK(absorption_probability(0.15, h_for_ratio(0.15, 1.0 / 1.2), 17) ==
        doctest::Approx(0.95687).epsilon(1e-5));
  // Boundary anchor: at rho = theta^{+-1} the value is theta^H/(1+theta^H).
  for (double theta : {1.2, 1.5}) {
    const int H = continuation_halfwidth(0.05, OddsRatio(theta));
    const double anchor = std::pow(theta, H) / (1 + std::pow(theta, H));
    CHECK(anchor >= 0.95);
    CHECK(absorption_probability(0.4, h_for_ratio(0.4, 1.0 / theta), H) ==
          doctest::Approx(anchor).epsilon(1e-12));
    CHECK(1.0 - absorption_probability(0.4, h_for_ratio(0.4, theta), H) ==
          doctest::Approx(anchor).epsilon(1e-12));
  }
}

TEST_CASE("random-walk closed forms agree with the Markov-chain oracle") {
  for (int H : {1, 3, 8, 17}) {
    for (double p : {0.05, 0.15, 0.5, 0.8}) {
      for (double h : {0.03, 0.15, 0.3, 0.5, 0.79}) {
        const auto ref = oracle::solve_walk(p, h, H);
        CHECK(absorption_probability(p, h, H) == doctest::Approx(ref.lower_absorption).epsilon(1e-9));
        CHECK(expected_stopping_time(p, h, H) == doctest::Approx(ref.expected_steps).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("expected_stopping_time reproduces the stopping-time table") {
  struct Cell {
    double theta, p, ratio, expected;
  };
  // ratio = p(1-h)/((1-p)h); H = 17 at theta 1.2 and 8 at theta 1.5.
  const Cell cells[] = {
      {1.2, 0.15, 1, 1133.333}, {1.2, 0.15, 1.2, 712.718}, {1.2, 0.15, 2.4, 208.571},
      {1.2, 0.15, 6, 140.000},  {1.2, 0.15, 12, 125.455},  {1.2, 0.5, 1, 578.000},
      {1.2, 0.5, 1.2, 341.739}, {1.2, 0.5, 2.4, 82.571},   {1.2, 0.5, 6, 47.600},
      {1.2, 0.5, 12, 40.182},   {1.5, 0.15, 1, 250.980},   {1.5, 0.15, 1.5, 165.393},
      {1.5, 0.15, 3, 84.680},   {1.5, 0.15, 7.5, 62.986},  {1.5, 0.15, 15, 57.815},
      {1.5, 0.5, 1, 128.000},   {1.5, 0.5, 1.5, 73.991},   {1.5, 0.5, 3, 31.990},
      {1.5, 0.5, 7.5, 20.923},  {1.5, 0.5, 15, 18.286},
  };
  for (const auto& c : cells) {
    const int H = continuation_halfwidth(0.05, OddsRatio(c.theta));
    const double h = c.ratio == 1 ? c.p : h_for_ratio(c.p, c.ratio);
    CHECK(std::abs(expected_stopping_time(c.p, h, H) - c.expected) < 1e-3);
  }
}

TEST_CASE("expected_stopping_time peaks at h = p") {
  for (double p : {0.15, 0.5}) {
    const double peak = expected_stopping_time(p, p, 17);
    for (double h = 0.01; h < 0.99; h += 0.01) {
      if (std::abs(h - p) > 1e-12) CHECK(expected_stopping_time(p, h, 17) < peak);
    }
  }
}

TEST_CASE("tolerance_convert") {
  const OddsRatio t15(1.5);
  const double half[] = {0.5};
  auto mid = tolerance_convert(half, t15);
  CHECK(mid.epsilon == doctest::Approx(0.1));
  CHECK(mid.epsilon_tilde == doctest::Approx(0.1));
  CHECK(mid.per_threshold[0].h_tilde == doctest::Approx(0.5));

  const double quarter[] = {0.25};
  auto q = tolerance_convert(quarter, t15).per_threshold[0];
  CHECK(q.lb == doctest::Approx(0.181818).epsilon(1e-6));
  CHECK(q.ub == doctest::Approx(0.333333).epsilon(1e-6));
  CHECK(q.h_tilde == doctest::Approx(0.257576).epsilon(1e-6));
  CHECK(q.epsilon_tilde == doctest::Approx(0.075758).epsilon(1e-6));
  CHECK(q.epsilon == doctest::Approx(0.068182).epsilon(1e-6));
  // LB and UB are where the odds ratio to h equals theta exactly.
  const double lb_root = oracle::bisect(
      [](double p) { return p * 0.75 / ((1 - p) * 0.25) - 1.0 / 1.5; }, 1e-9, 0.25);
  const double ub_root = oracle::bisect(
      [](double p) { return p * 0.75 / ((1 - p) * 0.25) - 1.5; }, 0.25, 1 - 1e-9);
  CHECK(q.lb == doctest::Approx(lb_root).epsilon(1e-10));
  CHECK(q.ub == doctest::Approx(ub_root).epsilon(1e-10));

  const double grid[] = {0.1, 0.25, 0.5};
  auto g = tolerance_convert(grid, t15);
  CHECK(g.epsilon == doctest::Approx(g.per_threshold[0].epsilon));
  CHECK(g.h_tilde().size() == 3);

  for (double h : {1e-4, 1 - 1e-4}) {
    const double one[] = {h};
    auto e = tolerance_convert(one, t15);
    CHECK(e.epsilon < 1e-4);
    CHECK(e.epsilon_tilde < 1e-4);
  }
  const double bad[] = {0.3, 0.2};
  CHECK_THROWS_AS(tolerance_convert(bad, t15), DomainError);
  const double out_of_range[] = {0.0};
  CHECK_THROWS_AS(tolerance_convert(out_of_range, t15), DomainError);
}

}  // TEST_SUITE
