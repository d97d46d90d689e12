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

namespace weakcrit {

/// Every numerical threshold used by the library, in one place. Defaults are
/// the documented values; the CLI can override individual fields.
struct Tolerances {
  double verification = 1e-10;
  double hermiticity = 1e-12;
  /// Floor on |<psi_f|psi_S>| below which weak values are refused.
  double overlap_floor = 1e-12;
  /// Largest gt accepted by the first-order Kraus constructor.
  double weakness_bound = 0.05;
  /// First-order moduli are degenerate when the relative gap is below
  /// marginal_band_factor * (gt)^2.
  double marginal_band_factor = 10.0;
  /// Relative modulus gap treated as exact degeneracy for non-truncated maps.
  double exact_degeneracy = 1e-12;
  /// Relative modulus equality below which tau is reported as infinite.
  double infinite_tau = 1e-14;
  double starvation_floor = 1e-300;
  /// Successive-step trace distance that marks a trajectory as converged.
  double convergence = 1e-10;
  /// Overlap <v1|rho0|v1> below which the start is on an unstable manifold.
  double unstable_start = 1e-12;
  double critical_zero = 1e-12;
  double bisection_width = 1e-12;
  double fit_r_squared = 0.999;
  /// Rotation about the fixed-point axis accumulated over one relaxation
  /// time above which a non-unitary qubit flow counts as a spiral.
  double spiral_rotation_rad = 3.14159265358979323846;
};

}  // namespace weakcrit
