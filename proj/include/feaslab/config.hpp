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


// Experiment configuration files. A file holds one document:
//   {"kind": "experiment", ...}     one ExperimentConfig
//   {"kind": "suite", "experiments": [...]}
//   {"kind": "stoptime_grid", ...}  single-system stopping-time grid
// The schema is documented in README.md.

#ifndef FEASLAB_CONFIG_HPP_
#define FEASLAB_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "feaslab/harness.hpp"
#include "feaslab/json_io.hpp"

namespace feaslab {

using ConfigFile = std::variant<std::vector<ExperimentConfig>, StoptimeGridConfig>;

// Relative truth CSV paths resolve against `base_dir`. Truth estimates with
// identical (source, n, seed) within one file are computed once.
ConfigFile load_config(const json_io::Json& doc,
                       const std::filesystem::path& base_dir);

ConfigFile load_config_file(const std::filesystem::path& path);

Procedure procedure_from_json(const json_io::Json& j);
json_io::Json to_json(const Procedure& procedure);

}  // namespace feaslab

#endif  // FEASLAB_CONFIG_HPP_
