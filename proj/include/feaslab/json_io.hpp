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


// JSON mapping for specs, plans, sources and seeds shared by the experiment
// config loader and the session service. Structural problems raise
// SchemaError; out-of-domain values raise DomainError.

#ifndef FEASLAB_JSON_IO_HPP_
#define FEASLAB_JSON_IO_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include "feaslab/multipass.hpp"
#include "feaslab/problem.hpp"
#include "feaslab/testbeds.hpp"
#include "json.hpp"

namespace feaslab::json_io {

using Json = nlohmann::json;

// Parses text into a document; malformed text raises SchemaError.
Json parse(std::string_view text);

// k is taken from the source, s from the length of theta.
ProblemSpec spec_from_json(const Json& j, int k);
Json to_json(const ProblemSpec& spec);

// Per-constraint threshold lists. Each list is an array of numbers or a
// {"from", "to", "step"} range; ranges are rounded to 10 decimals.
std::vector<std::vector<double>> thresholds_from_json(const Json& j);
Json thresholds_to_json(const std::vector<std::vector<double>>& t);

SourceDescriptor source_from_json(const Json& j);
Json to_json(const SourceDescriptor& desc);
std::size_t source_systems(const SourceDescriptor& desc);
std::size_t source_constraints(const SourceDescriptor& desc);

// 64-bit seeds travel as decimal strings; plain non-negative integers are
// also accepted on input.
std::uint64_t seed_from_json(const Json& j, std::string_view field);
Json seed_to_json(std::uint64_t seed);

// p matrix [system][constraint].
std::vector<std::vector<double>> matrix_from_json(const Json& j,
                                                  std::string_view field);

// Exact persisted form of a session: fractions as {num, den}, seeds as
// decimal strings, decisions as [code, stage] pairs. Round-trips bit for bit.
Json session_to_json(const Session& session);
Session session_from_json(const Json& j);

// Display form of one pass: decisions as strings in [system][constraint][m].
// When `truth` is given, adds the classification of every entry.
Json pass_view(const PassRecord& record, const ProblemSpec& spec,
               const std::vector<std::vector<double>>* truth);

}  // namespace feaslab::json_io

#endif  // FEASLAB_JSON_IO_HPP_
