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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "weakcrit/criticality.hpp"
#include "weakcrit/protocol.hpp"
#include "weakcrit/state.hpp"
#include "weakcrit/tolerances.hpp"

namespace weakcrit::cli {

/// Bumped whenever a default or an output format changes.
inline constexpr int kConfigVersion = 1;

enum class InteractionKind { ExactQubit, FirstOrder, SyntheticQuadratic };

struct PhiGridSpec {
  double start = 0.0;
  double stop = 3.14159265358979323846;
  std::size_t points = 2001;
};

struct FitWindowSpec {
  double lo = 1e-4;
  double hi = 1e-2;
  int per_decade = 20;
};

/// Everything a subcommand needs. Field names in the JSON file carry their
/// units (theta_rad, gamma_per_time, ...).
struct RunConfig {
  double theta = 3.14159265358979323846 / 4.0;
  double alpha = 3.14159265358979323846 / 7.0;
  double gamma = 0.001;
  double t = 1.0;
  /// Single post-selection angle for `trajectory`.
  std::optional<double> phi;
  InteractionKind interaction = InteractionKind::ExactQubit;
  std::optional<std::size_t> meter_dim;
  /// Empty means sigma_x.
  std::vector<double> meter_obs_diagonal;
  /// Three reals are a Bloch vector (qubit meters); otherwise one amplitude
  /// per meter level. Empty: Bloch (0, 0, 1) for qubits, the uniform
  /// superposition for larger meters.
  std::vector<std::complex<double>> initial;
  std::vector<std::uint64_t> n{1};
  PhiGridSpec phi_grid;
  FitWindowSpec window;
  /// Empty selects sigma_x on qubit meters and meter_obs otherwise.
  std::vector<std::string> observables;
  std::string out;
  unsigned jobs = 0;
  std::uint64_t seed = 1;
  std::size_t trials = 200;
  std::size_t max_steps = 100;
  std::size_t critical_grid = 4096;
  bool debug_flip_d = false;
  Tolerances tol;

  double gt() const { return gamma * t; }
  std::size_t meter_dimension() const;
  MeterObservable meter_observable() const;
  std::vector<std::string> sweep_observables() const;
  ProtocolConfig protocol() const;
  /// Kraus operator at phi for the configured interaction.
  KrausFamily family() const;
  /// Initial meter state; Bloch vectors are scaled onto the unit sphere.
  MeterState initial_state() const;
  /// Whether the given Bloch vector had to be rescaled.
  bool initial_rescaled() const;
};

/// Throws UsageError on unknown fields, wrong types or invalid values.
void apply_json(RunConfig& config, const nlohmann::json& doc);
RunConfig load_config_file(const std::string& path);

/// Consistency checks across fields; throws UsageError.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

std::string_view to_string(InteractionKind kind);

PhiGridSpec parse_phi_grid(const std::string& text);
FitWindowSpec parse_window(const std::string& text);
std::vector<std::uint64_t> parse_counts(const std::string& text);
std::vector<double> parse_reals(const std::string& text);

}  // namespace weakcrit::cli
