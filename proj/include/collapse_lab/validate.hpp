// Copyright 2026 The collapse-lab Authors
//
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

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace collapse_lab {

struct ValidationCheck {
  std::string test;
  double expected;
  double got;
  double tolerance;
  bool pass;
};

struct ValidationOptions {
  /// Fault injection: perturbs every kernel matrix built by the suite.
  bool corrupt_kernel = false;
};

/// Oracle suite for the propagator and collapse modules.
std::vector<ValidationCheck> run_validation(const ValidationOptions& options = {});

nlohmann::json validation_report(const std::vector<ValidationCheck>& checks);

}  // namespace collapse_lab
