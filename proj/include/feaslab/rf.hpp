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


// Batch-means feasibility baseline for normal data, applied to Bernoulli
// observations with region parameter c = 1.

#ifndef FEASLAB_RF_HPP_
#define FEASLAB_RF_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "feaslab/brf.hpp"
#include "feaslab/problem.hpp"

namespace feaslab {

enum class ToleranceMode { kConservative, kAdjusted };

std::string_view to_string(ToleranceMode mode);
ToleranceMode parse_tolerance_mode(std::string_view text);

struct RfParams {
  int n0 = 20;  // initial batches, >= 2
  int b = 1;    // batch size, >= 1
  ToleranceMode tolerance_mode = ToleranceMode::kConservative;

  void validate() const;
};

// Means of consecutive blocks of b bits; a trailing partial block is dropped.
std::vector<double> batch_means(std::span<const std::uint8_t> raw, int b);

// g(eta) for c = 1: (1 + 2 eta)^(-(n0-1)/2) / 2.
double rf_g(double eta, int n0);

// Solves g(eta) = beta_l; requires beta_l < 0.5.
double solve_eta(double beta_l, int n0);

// max{0, (n0-1) w z / v - v r / 2}.
double continuation_radius(double r, double v, double w, double z, int n0);

PassResult run_rf(const ProblemSpec& spec, const PassPlan& plan,
                  const RfParams& params, const ObservationSource& source,
                  std::uint64_t run_seed);

}  // namespace feaslab

#endif  // FEASLAB_RF_HPP_
