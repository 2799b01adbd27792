// Copyright 2026 The adpriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADPRIV_ERRORS_H_
#define ADPRIV_ERRORS_H_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adpriv {

// Two feature vectors or distributions with incompatible lengths were mixed.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// A mathematical object violates its model assumptions (non-PSD correlation,
// negative probability mass, parameter outside its valid regime).
class ModelError : public std::domain_error {
 public:
  explicit ModelError(const std::string& what) : std::domain_error(what) {}
};

// A request exceeds a hard enumeration or storage limit.
class CapacityError : public std::length_error {
 public:
  explicit CapacityError(const std::string& what) : std::length_error(what) {}
};

// Invalid configuration or API usage (missing parameter, unregistered
// campaign, malformed config file).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A quantity is undefined for the given inputs (H^2 = 0 bounds, A = 0
// expansion factor, indistinguishable distributions).
class DegenerateError : public std::domain_error {
 public:
  explicit DegenerateError(const std::string& what) : std::domain_error(what) {}
};

// A secret predicate has zero probability under every candidate prior.
class InfeasibleSecretError : public std::domain_error {
 public:
  explicit InfeasibleSecretError(const std::string& what) : std::domain_error(what) {}
};

// A sample-complexity search exceeded its configured ceiling. Carries the
// partial (n, power) trace accumulated before the search gave up.
class CeilingError : public std::runtime_error {
 public:
  CeilingError(const std::string& what, std::vector<std::pair<long long, double>> trace)
      : std::runtime_error(what), partial_trace_(std::move(trace)) {}

  const std::vector<std::pair<long long, double>>& partial_trace() const {
    return partial_trace_;
  }

 private:
  std::vector<std::pair<long long, double>> partial_trace_;
};

}  // namespace adpriv

#endif  // ADPRIV_ERRORS_H_
