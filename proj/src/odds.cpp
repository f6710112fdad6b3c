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

#include "feaslab/odds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "feaslab/error.hpp"

namespace feaslab {

namespace {

// Boundary points computed in floating point should classify on the
// Desirable/Unacceptable side of ">=", not drift into Acceptable.
constexpr double kBoundaryRelTol = 1e-9;

// Cap on the minimal-H search; theta this close to 1 is not a usable IZ.
constexpr int kMaxHalfwidth = 10'000'000;

void require_open_unit(double x, const char* name) {
  if (!(x > 0.0 && x < 1.0)) {
    throw DomainError(std::string(name) + " must lie in (0,1), got " +
                          std::to_string(x),
                      name);
  }
}

long double int_pow(long double base, int exponent) {
  long double result = 1.0L;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}

}  // namespace

std::string_view to_string(SamplingMode mode) {
  return mode == SamplingMode::kCrn ? "crn" : "independent";
}

std::string_view to_string(ErrorSplit split) {
  return split == ErrorSplit::kPerConstraint ? "per_constraint"
                                             : "per_effective_threshold";
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::kDesirable:
      return "desirable";
    case Classification::kAcceptable:
      return "acceptable";
    case Classification::kUnacceptable:
      return "unacceptable";
  }
  return "?";
}

SamplingMode parse_sampling_mode(std::string_view text) {
  if (text == "independent") return SamplingMode::kIndependent;
  if (text == "crn") return SamplingMode::kCrn;
  throw DomainError("unknown sampling mode '" + std::string(text) + "'",
                    "sampling_mode");
}

ErrorSplit parse_error_split(std::string_view text) {
  if (text == "per_constraint" || text == "i") return ErrorSplit::kPerConstraint;
  if (text == "per_effective_threshold" || text == "ii") {
    return ErrorSplit::kPerEffectiveThreshold;
  }
  throw DomainError("unknown split scheme '" + std::string(text) + "'",
                    "split_scheme");
}

OddsRatio::OddsRatio(double theta) : theta_(theta) {
  if (!(theta > 1.0) || !std::isfinite(theta)) {
    throw DomainError("odds-ratio IZ parameter must be > 1, got " +
                          std::to_string(theta),
                      "theta");
  }
}

std::vector<double> ToleranceConversion::h_tilde() const {
  std::vector<double> out;
  out.reserve(per_threshold.size());
  for (const auto& e : per_threshold) out.push_back(e.h_tilde);
  return out;
}

double error_split(double alpha, int k, SamplingMode mode) {
  require_open_unit(alpha, "alpha");
  if (k < 1) throw DomainError("system count k must be >= 1", "k");
  if (mode == SamplingMode::kCrn) return alpha / k;
  // 1 - (1-alpha)^(1/k) without cancellation.
  return -std::expm1(std::log1p(-alpha) / k);
}

std::vector<double> per_constraint_error(double beta,
                                         std::span<const int> counts,
                                         ErrorSplit split) {
  require_open_unit(beta, "beta");
  if (counts.empty()) {
    throw DomainError("per-constraint threshold counts are empty", "counts");
  }
  for (int c : counts) {
    if (c < 1) throw DomainError("threshold counts must be >= 1", "counts");
  }
  const auto s = static_cast<double>(counts.size());
  std::vector<double> out;
  out.reserve(counts.size());
  if (split == ErrorSplit::kPerConstraint) {
    for (int c : counts) out.push_back(c == 1 ? beta / s : beta / (2.0 * s));
  } else {
    int d = 0;
    for (int c : counts) d += std::min(c, 2);
    out.assign(counts.size(), beta / d);
  }
  return out;
}

int continuation_halfwidth(double beta_l, OddsRatio theta) {
  require_open_unit(beta_l, "beta_l");
  const long double t = theta.value();
  const long double b = beta_l;
  long double power = 1.0L;
  for (int h = 1; h <= kMaxHalfwidth; ++h) {
    power *= t;
    // beta >= 1/(1+theta^H)  <=>  beta (1 + theta^H) >= 1
    if (b * (1.0L + power) >= 1.0L) return h;
  }
  throw DomainError("continuation half-width exceeds search cap", "theta");
}

double odds_ratio(double p, double h) {
  return ((1.0 - p) * h) / (p * (1.0 - h));
}

Classification classify(double p, double h, OddsRatio theta) {
  require_open_unit(p, "p");
  require_open_unit(h, "h");
  const double bar = theta.value() * (1.0 - kBoundaryRelTol);
  if ((1.0 - p) * h >= bar * p * (1.0 - h)) return Classification::kDesirable;
  if (p * (1.0 - h) >= bar * (1.0 - p) * h) {
    return Classification::kUnacceptable;
  }
  return Classification::kAcceptable;
}

BoundaryPair boundary_thresholds(double p, OddsRatio theta) {
  require_open_unit(p, "p");
  const double t = theta.value();
  return {p / (p + (1.0 - p) * t), p * t / (p * (t - 1.0) + 1.0)};
}

double absorption_probability(double p, double h, int H) {
  require_open_unit(p, "p");
  require_open_unit(h, "h");
  if (H < 1) throw DomainError("H must be >= 1", "H");
  const long double rho =
      (static_cast<long double>(1.0 - p) * h) /
      (static_cast<long double>(p) * (1.0 - h));
  if (rho == 1.0L) return 0.5;
  if (rho > 1.0L) {
    return static_cast<double>(1.0L / (1.0L + int_pow(1.0L / rho, H)));
  }
  const long double r = int_pow(rho, H);
  return static_cast<double>(r / (1.0L + r));
}

double expected_stopping_time(double p, double h, int H) {
  require_open_unit(p, "p");
  require_open_unit(h, "h");
  if (H < 1) throw DomainError("H must be >= 1", "H");
  const long double hh = H;
  if (p == h) return static_cast<double>(hh * hh / (2.0L * p * (1.0L - h)));
  const long double rho =
      (static_cast<long double>(1.0 - p) * h) /
      (static_cast<long double>(p) * (1.0 - h));
  // 2(1 - rho^H)/(1 - rho^2H) - 1 = (1 - rho^H)/(1 + rho^H), written in the
  // form that stays bounded for rho > 1.
  long double factor;
  if (rho > 1.0L) {
    const long double inv = int_pow(1.0L / rho, H);
    factor = (inv - 1.0L) / (inv + 1.0L);
  } else {
    const long double r = int_pow(rho, H);
    factor = (1.0L - r) / (1.0L + r);
  }
  return static_cast<double>(hh / (static_cast<long double>(p) - h) * factor);
}

ToleranceConversion tolerance_convert(std::span<const double> thresholds,
                                      OddsRatio theta) {
  if (thresholds.empty()) {
    throw DomainError("threshold list is empty", "thresholds");
  }
  const double t = theta.value();
  ToleranceConversion out;
  out.epsilon = std::numeric_limits<double>::infinity();
  out.epsilon_tilde = std::numeric_limits<double>::infinity();
  double previous = 0.0;
  for (double h : thresholds) {
    require_open_unit(h, "thresholds");
    if (!(h > previous)) {
      throw DomainError("thresholds must be strictly increasing", "thresholds");
    }
    previous = h;
    ToleranceEntry e{};
    e.threshold = h;
    e.lb = h / (h + t * (1.0 - h));
    e.ub = t * h / (h * (t - 1.0) + 1.0);
    e.epsilon = std::min(e.ub - h, h - e.lb);
    e.epsilon_tilde = (e.ub - e.lb) / 2.0;
    e.h_tilde = (e.lb + e.ub) / 2.0;
    out.epsilon = std::min(out.epsilon, e.epsilon);
    out.epsilon_tilde = std::min(out.epsilon_tilde, e.epsilon_tilde);
    out.per_threshold.push_back(e);
  }
  return out;
}

}  // namespace feaslab
