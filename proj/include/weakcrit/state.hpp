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

// Meter states and trajectories. Kept free of any Kraus-operator types so
// the bipartite oracle can share them without seeing the protocol code.

#include <cstddef>
#include <optional>
#include <vector>

#include "weakcrit/linalg.hpp"
#include "weakcrit/tolerances.hpp"

namespace weakcrit {

struct BlochVector {
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;

  double norm() const;
};

/// Density operator of the N-level meter: Hermitian, unit trace, positive
/// semidefinite (checked at construction).
class MeterState {
 public:
  static MeterState from_density(const ComplexMatrix& rho, const Tolerances& tol = {});
  static MeterState from_bloch(const BlochVector& r, const Tolerances& tol = {});
  /// Pure state |v><v|; v must have unit norm to the verification tolerance.
  static MeterState from_amplitudes(const ComplexVector& amplitudes, const Tolerances& tol = {});
  /// Pure state |v><v| / <v|v> for any nonzero v.
  static MeterState projector(const ComplexVector& v);
  /// Hermitizes and divides by the trace; no positivity check. For states
  /// produced by trace-normalized maps of valid states.
  static MeterState normalized(const ComplexMatrix& unnormalized);

  const ComplexMatrix& rho() const { return rho_; }
  std::size_t dimension() const { return static_cast<std::size_t>(rho_.rows()); }
  double purity() const;
  /// Qubit only.
  BlochVector bloch() const;

 private:
  explicit MeterState(ComplexMatrix rho) : rho_(std::move(rho)) {}

  ComplexMatrix rho_;
};

double trace_distance(const MeterState& a, const MeterState& b);

/// Tr[obs rho] for Hermitian obs.
double expectation(const ComplexMatrix& observable, const MeterState& state, const Tolerances& tol = {});

struct TrajectoryRecord {
  /// steps[0] is the initial state.
  std::vector<MeterState> steps;
  /// Post-selection probability of the round that produced steps[i + 1].
  std::vector<double> probabilities;
  /// First k with trace_distance(steps[k], steps[k-1]) below the threshold.
  std::optional<std::size_t> converged_at;
  /// Round at which the post-selection probability underflowed; the
  /// trajectory stops before it.
  std::optional<std::size_t> starved_at;

  /// Throws PostSelectionStarved when the run was truncated.
  void require_complete() const;
  std::vector<BlochVector> bloch() const;
  const MeterState& final_state() const { return steps.back(); }
};

/// Appends `next` and updates converged_at.
void record_step(TrajectoryRecord& record, MeterState next, double probability, const Tolerances& tol);

}  // namespace weakcrit
