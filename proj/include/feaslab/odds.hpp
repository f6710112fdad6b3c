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

// Closed-form odds-ratio analytics: error allocation, continuation
// half-widths, indifference-zone classification, random-walk absorption and
// stopping times, and tolerance conversions for normal-theory procedures.
//
// Everything here is a pure function of its arguments.

#ifndef FEASLAB_ODDS_HPP_
#define FEASLAB_ODDS_HPP_

#include <span>
#include <string_view>
#include <vector>

namespace feaslab {

enum class SamplingMode { kIndependent, kCrn };

// How a system's error budget is divided among its constraints.
//   kPerConstraint:          beta/s when a constraint has one threshold,
//                            beta/(2s) otherwise.
//   kPerEffectiveThreshold:  beta/D, D = sum_l min(count_l, 2).
enum class ErrorSplit { kPerConstraint, kPerEffectiveThreshold };

enum class Classification { kDesirable, kAcceptable, kUnacceptable };

std::string_view to_string(SamplingMode mode);
std::string_view to_string(ErrorSplit split);
std::string_view to_string(Classification c);
SamplingMode parse_sampling_mode(std::string_view text);
ErrorSplit parse_error_split(std::string_view text);

// Odds-ratio indifference-zone parameter; always > 1.
class OddsRatio {
 public:
  explicit OddsRatio(double theta);
  double value() const { return theta_; }

 private:
  double theta_;
};

struct BoundaryPair {
  double lower;  // the threshold at which p sits on the Unacceptable boundary
  double upper;  // the threshold at which p sits on the Desirable boundary
};

struct ToleranceEntry {
  double threshold;
  double lb;  // largest probability of a Desirable system
  double ub;  // smallest probability of an Unacceptable system
  double epsilon;
  double epsilon_tilde;
  double h_tilde;
};

struct ToleranceConversion {
  double epsilon = 0.0;        // min over thresholds of epsilon_m
  double epsilon_tilde = 0.0;  // min over thresholds of epsilon_tilde_m
  std::vector<ToleranceEntry> per_threshold;

  std::vector<double> h_tilde() const;
};

// Per-system error from the overall error alpha across k systems.
double error_split(double alpha, int k, SamplingMode mode);

// Per-constraint error. `counts` holds the planned number of thresholds per
// constraint summed over all passes.
std::vector<double> per_constraint_error(double beta,
                                         std::span<const int> counts,
                                         ErrorSplit split);

// Smallest H >= 1 with beta_l >= 1 / (1 + theta^H).
int continuation_halfwidth(double beta_l, OddsRatio theta);

// Odds of h relative to p: (1-p)h / (p(1-h)).
double odds_ratio(double p, double h);

Classification classify(double p, double h, OddsRatio theta);

BoundaryPair boundary_thresholds(double p, OddsRatio theta);

// Probability that the walk sum(Y - I) hits -H before +H.
double absorption_probability(double p, double h, int H);

// Expected number of stages until sum(Y - I) leaves (-H, H).
double expected_stopping_time(double p, double h, int H);

ToleranceConversion tolerance_convert(std::span<const double> thresholds,
                                      OddsRatio theta);

}  // namespace feaslab

#endif  // FEASLAB_ODDS_HPP_
