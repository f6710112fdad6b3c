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


#include "feaslab/json_io.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "feaslab/error.hpp"

namespace feaslab::json_io {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) throw SchemaError("expected an object", key);
  const auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError(std::string("missing field '") + key + "'", key);
  }
  return *it;
}

double number(const Json& j, std::string_view field) {
  if (!j.is_number()) {
    throw SchemaError("field '" + std::string(field) + "' must be a number",
                      std::string(field));
  }
  return j.get<double>();
}

int integer(const Json& j, std::string_view field) {
  if (!j.is_number_integer()) {
    throw SchemaError("field '" + std::string(field) + "' must be an integer",
                      std::string(field));
  }
  return j.get<int>();
}

std::string text(const Json& j, std::string_view field) {
  if (!j.is_string()) {
    throw SchemaError("field '" + std::string(field) + "' must be a string",
                      std::string(field));
  }
  return j.get<std::string>();
}

double optional_number(const Json& j, const char* key, double fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, key);
}

std::vector<double> number_list(const Json& j, std::string_view field) {
  if (!j.is_array()) {
    throw SchemaError("field '" + std::string(field) + "' must be an array",
                      std::string(field));
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(number(x, field));
  return out;
}

std::vector<double> expand_range(const Json& j) {
  const double from = number(require(j, "from"), "from");
  const double to = number(require(j, "to"), "to");
  const double step = number(require(j, "step"), "step");
  if (!(step > 0.0) || to < from) {
    throw DomainError("range needs step > 0 and to >= from", "thresholds");
  }
  const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
  if (count > 100000) throw DomainError("range is too long", "thresholds");
  std::vector<double> out;
  for (long i = 0; i < count; ++i) {
    out.push_back(std::round((from + i * step) * 1e10) / 1e10);
  }
  return out;
}

}  // namespace

Json parse(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

ProblemSpec spec_from_json(const Json& j, int k) {
  if (!j.is_object()) throw SchemaError("spec must be an object", "spec");
  ProblemSpec spec;
  spec.k = k;
  spec.alpha = number(require(j, "alpha"), "alpha");
  spec.theta = number_list(require(j, "theta"), "theta");
  spec.s = static_cast<int>(spec.theta.size());
  if (const auto it = j.find("sampling_mode"); it != j.end()) {
    spec.sampling_mode = parse_sampling_mode(text(*it, "sampling_mode"));
  }
  if (const auto it = j.find("split_scheme"); it != j.end()) {
    spec.split = parse_error_split(text(*it, "split_scheme"));
  }
  if (const auto it = j.find("expect_more_passes"); it != j.end()) {
    if (!it->is_boolean()) {
      throw SchemaError("expect_more_passes must be a boolean",
                        "expect_more_passes");
    }
    spec.expect_more_passes = it->get<bool>();
  }
  if (const auto it = j.find("obs_cap"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) {
      throw SchemaError("obs_cap must be an integer", "obs_cap");
    }
    if (it->get<long long>() <= 0) {
      throw DomainError("obs_cap must be positive", "obs_cap");
    }
    spec.obs_cap = it->get<std::uint64_t>();
  }
  spec.validate();
  return spec;
}

Json to_json(const ProblemSpec& spec) {
  Json j;
  j["alpha"] = spec.alpha;
  j["theta"] = spec.theta;
  j["sampling_mode"] = std::string(to_string(spec.sampling_mode));
  j["split_scheme"] = std::string(to_string(spec.split));
  j["expect_more_passes"] = spec.expect_more_passes;
  j["obs_cap"] = spec.obs_cap ? Json(*spec.obs_cap) : Json(nullptr);
  return j;
}

std::vector<std::vector<double>> thresholds_from_json(const Json& j) {
  if (!j.is_array()) {
    throw SchemaError("thresholds must be an array of per-constraint lists",
                      "thresholds");
  }
  std::vector<std::vector<double>> out;
  for (const auto& list : j) {
    if (list.is_object()) {
      out.push_back(expand_range(list));
    } else {
      out.push_back(number_list(list, "thresholds"));
    }
  }
  return out;
}

Json thresholds_to_json(const std::vector<std::vector<double>>& t) {
  Json j = Json::array();
  for (const auto& list : t) j.push_back(list);
  return j;
}

SourceDescriptor source_from_json(const Json& j) {
  const std::string type = text(require(j, "type"), "type");
  if (type == "synthetic") {
    SyntheticDescriptor d;
    d.p = matrix_from_json(require(j, "p"), "p");
    if (const auto it = j.find("coupling"); it != j.end()) {
      d.coupling = parse_coupling(text(*it, "coupling"));
    }
    SyntheticSource check(d.p, d.coupling);
    return d;
  }
  if (type == "inventory") {
    InventoryDescriptor d;
    if (const auto it = j.find("policies"); it != j.end()) {
      if (!it->is_array()) throw SchemaError("policies must be an array", "policies");
      for (const auto& pair : *it) {
        if (!pair.is_array() || pair.size() != 2) {
          throw SchemaError("each policy is an [s, S] pair", "policies");
        }
        d.policies.push_back({integer(pair[0], "policies"), integer(pair[1], "policies")});
      }
    } else {
      if (const auto g = j.find("grid"); g != j.end() && text(*g, "grid") != "standard") {
        throw DomainError("the only named grid is 'standard'", "grid");
      }
      d.policies = InventorySource::standard_grid();
    }
    if (const auto it = j.find("params"); it != j.end()) {
      const Json& p = *it;
      if (!p.is_object()) throw SchemaError("params must be an object", "params");
      InventoryParams& q = d.params;
      q.demand_mean = optional_number(p, "demand_mean", q.demand_mean);
      if (const auto per = p.find("periods"); per != p.end()) {
        q.periods = integer(*per, "periods");
      }
      q.unit_cost = optional_number(p, "unit_cost", q.unit_cost);
      q.fixed_order_cost = optional_number(p, "fixed_order_cost", q.fixed_order_cost);
      q.holding_cost = optional_number(p, "holding_cost", q.holding_cost);
      q.penalty_cost = optional_number(p, "penalty_cost", q.penalty_cost);
      q.cost_threshold = optional_number(p, "cost_threshold", q.cost_threshold);
    }
    InventorySource check(d.policies, d.params);
    return d;
  }
  throw DomainError("unknown source type '" + type + "'", "type");
}

Json to_json(const SourceDescriptor& desc) {
  Json j;
  if (const auto* syn = std::get_if<SyntheticDescriptor>(&desc)) {
    j["type"] = "synthetic";
    j["p"] = syn->p;
    j["coupling"] = std::string(to_string(syn->coupling));
    return j;
  }
  const auto& inv = std::get<InventoryDescriptor>(desc);
  j["type"] = "inventory";
  Json policies = Json::array();
  for (const auto& p : inv.policies) policies.push_back({p.s, p.S});
  j["policies"] = policies;
  const InventoryParams& q = inv.params;
  j["params"] = {{"demand_mean", q.demand_mean},
                 {"periods", q.periods},
                 {"unit_cost", q.unit_cost},
                 {"fixed_order_cost", q.fixed_order_cost},
                 {"holding_cost", q.holding_cost},
                 {"penalty_cost", q.penalty_cost},
                 {"cost_threshold", q.cost_threshold}};
  return j;
}

std::size_t source_systems(const SourceDescriptor& desc) {
  if (const auto* syn = std::get_if<SyntheticDescriptor>(&desc)) return syn->p.size();
  return std::get<InventoryDescriptor>(desc).policies.size();
}

std::size_t source_constraints(const SourceDescriptor& desc) {
  if (const auto* syn = std::get_if<SyntheticDescriptor>(&desc)) {
    return syn->p.empty() ? 0 : syn->p.front().size();
  }
  return 2;
}

std::uint64_t seed_from_json(const Json& j, std::string_view field) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(j.get<long long>());
  }
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return value;
  }
  throw SchemaError("field '" + std::string(field) +
                        "' must be a decimal 64-bit unsigned integer",
                    std::string(field));
}

Json seed_to_json(std::uint64_t seed) { return std::to_string(seed); }

std::vector<std::vector<double>> matrix_from_json(const Json& j,
                                                  std::string_view field) {
  if (!j.is_array()) {
    throw SchemaError("field '" + std::string(field) + "' must be a matrix",
                      std::string(field));
  }
  std::vector<std::vector<double>> out;
  for (const auto& row : j) out.push_back(number_list(row, field));
  return out;
}

}  // namespace feaslab::json_io
