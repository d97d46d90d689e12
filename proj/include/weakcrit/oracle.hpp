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

// Brute-force simulation of the full bipartite protocol: explicit
// system (x) meter vector, exact interaction unitary, projection of the system
// onto the post-selected state, renormalization. Used as ground truth for the
// Kraus-map path and deliberately built from first principles.

#include <cstddef>
#include <variant>

#include "weakcrit/linalg.hpp"
#include "weakcrit/parameters.hpp"
#include "weakcrit/state.hpp"
#include "weakcrit/tolerances.hpp"

namespace weakcrit::oracle {

/// exp(-i gt sigma_z (x) sigma_x) on a qubit meter, in closed form.
struct ExactQubitInteraction {};

/// exp(-i gt sigma_z (x) O_A) for a Hermitian meter observable, applied through
/// its exact eigenphases.
struct GeneralInteraction {
  ComplexMatrix meter_observable;
};

using Interaction = std::variant<ExactQubitInteraction, GeneralInteraction>;

/// Joint state of length 2N; entry s * N + j holds the amplitude of system
/// basis state s and meter basis state j.
struct BipartiteState {
  ComplexVector amplitudes;
  std::size_t meter_dimension = 0;

  static std::size_t index(std::size_t system, std::size_t meter, std::size_t meter_dimension) {
    return system * meter_dimension + meter;
  }
};

struct StepResult {
  MeterState state;
  double probability = 0.0;
};

/// One protocol round on a pure meter state. Mixed input within the
/// verification tolerance is replaced by its dominant eigenvector; anything
/// more mixed throws NotPure.
StepResult oracle_step(const SystemPreparation& prep, const PostSelection& post, const CouplingSpec& coupling,
                       const MeterState& meter, const Interaction& interaction, const Tolerances& tol = {});

/// n rounds, each with a freshly prepared system.
TrajectoryRecord oracle_run(const SystemPreparation& prep, const PostSelection& post, const CouplingSpec& coupling,
                            const MeterState& initial, std::size_t n, const Interaction& interaction,
                            const Tolerances& tol = {});

}  // namespace weakcrit::oracle
