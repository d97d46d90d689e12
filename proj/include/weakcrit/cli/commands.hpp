// Copyright 2026 The weakcrit Authors
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

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "weakcrit/cli/config.hpp"

namespace weakcrit::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 2, kFitFailure = 3, kOracleMismatch = 4 };

/// CSV `phi,n,exp_<obs>...,abs_lambda_1,abs_lambda_2,im_weak_value,tau,is_infinite`.
void write_sweep(const RunConfig& config, std::ostream& out);

/// CSV `step,rx,ry,rz,purity` for qubit meters (`step,purity,pop_0,...`
/// otherwise); returns the sidecar document.
nlohmann::json write_trajectory(const RunConfig& config, std::ostream& out);

/// CSV `phi,tau,is_infinite`.
void write_relaxation(const RunConfig& config, std::ostream& out);

struct FitReport {
  nlohmann::json records = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  bool ok() const { return failures.empty(); }
};

/// One record per (critical angle, side) whose window fits inside [0, pi].
FitReport run_fit(const RunConfig& config);

nlohmann::json critical_angles_report(const RunConfig& config);

struct OracleReport {
  nlohmann::json report;
  nlohmann::json worst;
  bool pass = false;
};

/// Randomized exact-qubit and first-order suites compared step by step
/// against the bipartite oracle.
OracleReport run_oracle_check(const RunConfig& config);

/// Full command line (argv[0] excluded). Data goes to `out` or the --out
/// file; errors go to `err` as one JSON object.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace weakcrit::cli
