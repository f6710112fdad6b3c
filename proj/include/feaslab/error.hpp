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

#ifndef FEASLAB_ERROR_HPP_
#define FEASLAB_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace feaslab {

// A value is outside the mathematical domain of an operation (theta <= 1,
// probability outside (0,1), unsorted thresholds, ...).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what, std::string field = {})
      : std::invalid_argument(what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// A document is structurally malformed: missing field, wrong JSON type.
class SchemaError : public std::invalid_argument {
 public:
  explicit SchemaError(const std::string& what, std::string field = {})
      : std::invalid_argument(what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// An operation was invoked in a state that does not permit it (stepping a
// decided system, running pass 2 before pass 1, ...).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace feaslab

#endif  // FEASLAB_ERROR_HPP_
