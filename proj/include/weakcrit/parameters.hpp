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

// Plain protocol parameters shared by the Kraus-map path and the bipartite
// oracle. Nothing here builds states or operators.

namespace weakcrit {

/// System pre-selection cos(theta)|0> + sin(theta)|1>, theta in [0, pi/2].
struct SystemPreparation {
  double theta = 0.0;
};

/// Post-selection cos(phi)|0> + e^{i alpha} sin(phi)|1>.
struct PostSelection {
  double phi = 0.0;
  double alpha = 0.0;
};

/// Coupling strength g (or gamma) and interaction time t.
struct CouplingSpec {
  double strength = 0.0;
  double time = 1.0;

  double product() const { return strength * time; }
};

}  // namespace weakcrit
