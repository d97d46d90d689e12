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
#include <string_view>
#include <vector>

#include "weakcrit/protocol.hpp"
#include "weakcrit/state.hpp"

namespace weakcrit {

/// rho_{i+1} = K rho_i K^dagger / Tr[K rho_i K^dagger], renormalized every
/// round. An underflowing post-selection probability truncates the record and
/// sets starved_at.
TrajectoryRecord iterate_matrix(const KrausOperator& k, const MeterState& initial, std::size_t n,
                                const Tolerances& tol = {});

/// The state after n normalized rounds, from K^n built by repeated squaring.
/// Same map as iterate_matrix without storing the path; O(log n) products.
MeterState propagate(const KrausOperator& k, const MeterState& initial, std::uint64_t n, const Tolerances& tol = {});

enum class AmplitudeWeights {
  /// |1 - i gt w o_j|^{2n}: the exact moduli of the first-order Kraus
  /// eigenvalues, identical to iterating the matrix.
  Exact,
  /// |1 + 2 gt Im(w) o_j|^n: the same weight expanded to first order in gt.
  FirstOrderExpansion,
};

/// Populations |c_j^{(n)}|^2 of the meter-observable eigenstates after n
/// rounds of a first-order Kraus operator. `amplitudes` are expressed in
/// the eigenbasis of k.meter_observable, in its spectrum order.
std::vector<double> iterate_amplitudes(const KrausOperator& k, const ComplexVector& amplitudes, std::size_t n,
                                       AmplitudeWeights weights = AmplitudeWeights::Exact, const Tolerances& tol = {});

/// One round of the exact qubit map written on the Bloch vector.
BlochVector bloch_step(const KrausOperator& k, const BlochVector& r, const Tolerances& tol = {});

enum class Stability { Stable, Unstable, MarginalUnitary };

struct FixedPoint {
  std::size_t index = 0;
  std::complex<double> eigenvalue;
  MeterState state = MeterState::projector(ComplexVector::Ones(1));
  Stability stability = Stability::MarginalUnitary;
};

struct FixedPointReport {
  std::vector<FixedPoint> fixed_points;
};

/// Fixed points are the Kraus eigenvectors; the one with strictly largest
/// eigenvalue modulus is stable. Degenerate leading moduli make every fixed
/// point marginal.
FixedPointReport classify_fixed_points(const KrausOperator& k, const Tolerances& tol = {});

/// Projector onto the dominant Kraus eigenvector, the n -> infinity limit
/// of the normalized map.
MeterState long_time_state(const KrausOperator& k, const MeterState& initial, const Tolerances& tol = {});

enum class Regime { Unitary, StableFlowLow, StableFlowHigh, NearUnitarySpiral };

std::string_view to_string(Regime regime);
std::string_view to_string(Stability stability);

/// Qubit meters only. Unitary when the leading moduli are degenerate; a
/// spiral when the rotation accumulated over one relaxation time reaches
/// tol.spiral_rotation_rad; otherwise a flow toward the stable sigma_x-side
/// pole (High: <sigma_x> > 0 at the stable point).
Regime classify_regime(const KrausOperator& k, const Tolerances& tol = {});

}  // namespace weakcrit
