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

#include <stdexcept>
#include <string>
#include <string_view>

namespace weakcrit {

enum class Errc {
  DimensionMismatch,
  NotHermitian,
  NotNormal,
  NotPure,
  InvalidState,
  InvalidArgument,
  DegenerateSpectrum,
  NoConvergence,
  VanishingOverlap,
  CouplingTooStrong,
  PostSelectionStarved,
  NoDominantEigenvalue,
  UnstableManifoldStart,
  DimensionTooSmall,
  DegenerateMeterObservable,
  WindowContainsCriticalPoint,
  PoorFit,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::NotNormal: return "NotNormal";
    case Errc::NotPure: return "NotPure";
    case Errc::InvalidState: return "InvalidState";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DegenerateSpectrum: return "DegenerateSpectrum";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::VanishingOverlap: return "VanishingOverlap";
    case Errc::CouplingTooStrong: return "CouplingTooStrong";
    case Errc::PostSelectionStarved: return "PostSelectionStarved";
    case Errc::NoDominantEigenvalue: return "NoDominantEigenvalue";
    case Errc::UnstableManifoldStart: return "UnstableManifoldStart";
    case Errc::DimensionTooSmall: return "DimensionTooSmall";
    case Errc::DegenerateMeterObservable: return "DegenerateMeterObservable";
    case Errc::WindowContainsCriticalPoint: return "WindowContainsCriticalPoint";
    case Errc::PoorFit: return "PoorFit";
  }
  return "Unknown";
}

/// The single exception type thrown by the library. `value()` carries the
/// offending scalar where one exists (overlap magnitude, step index, r²).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, double value = 0.0)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        value_(value) {}

  Errc code() const noexcept { return code_; }
  double value() const noexcept { return value_; }

 private:
  Errc code_;
  double value_;
};

}  // namespace weakcrit
