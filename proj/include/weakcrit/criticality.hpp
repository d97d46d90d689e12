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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weakcrit/dynamics.hpp"
#include "weakcrit/protocol.hpp"

namespace weakcrit {

/// Relaxation time in protocol rounds, or an explicit divergence marker.
class Tau {
 public:
  static Tau infinite() { return Tau(0.0, true); }
  static Tau finite(double value) { return Tau(value, false); }

  bool is_infinite() const { return infinite_; }
  /// Throws InvalidArgument when infinite.
  double value() const;

 private:
  Tau(double value, bool infinite) : value_(value), infinite_(infinite) {}

  double value_;
  bool infinite_;
};

/// tau = 1 / |ln(|lambda_1|^2 / |lambda_2|^2)|; infinite when the two leading
/// moduli agree to tol.infinite_tau (relative).
Tau relaxation_time(const KrausOperator& k, const Tolerances& tol = {});

/// 1 / |2 gt Im(w) (o1 - o2)|, the first-order closed form.
Tau analytic_tau_first_order(const WeakValue& wv, const CouplingSpec& coupling, double o1, double o2);

/// Closed form using the meter eigenvalues behind lambda_1 and lambda_2 of a
/// first-order Kraus operator.
Tau analytic_tau_first_order(const KrausOperator& k);

/// `points` values from start to stop inclusive; endpoints are exact.
std::vector<double> uniform_grid(double start, double stop, std::size_t points);

/// lo * 10^(k / per_decade) for k = 0, 1, ... while the value stays within hi
/// (hi itself included up to rounding).
std::vector<double> log_spaced_offsets(double lo, double hi, int per_decade);

struct RelaxationSample {
  double phi = 0.0;
  /// Empty when the Kraus operator could not be built at this phi.
  std::optional<Tau> tau;
};

struct RelaxationProfile {
  std::vector<RelaxationSample> samples;
};

using KrausFamily = std::function<KrausOperator(double phi)>;

RelaxationProfile relaxation_profile(const KrausFamily& family, std::span<const double> grid, unsigned jobs = 0,
                                     const Tolerances& tol = {});
RelaxationProfile relaxation_profile(const ProtocolConfig& config, std::span<const double> grid, unsigned jobs = 0);

struct NamedObservable {
  std::string name;
  ComplexMatrix matrix;
};

struct SweepConfig {
  ProtocolConfig protocol;
  MeterState initial = MeterState::from_bloch({0.0, 0.0, 1.0});
  std::vector<std::uint64_t> iterations{1};
  std::vector<NamedObservable> observables;
  unsigned jobs = 0;
};

struct SweepPoint {
  std::uint64_t n = 0;
  /// One entry per observable; empty where the evolution failed.
  std::vector<std::optional<double>> expectations;
};

struct SweepRow {
  double phi = 0.0;
  std::vector<SweepPoint> points;
  std::optional<double> abs_lambda_1;
  std::optional<double> abs_lambda_2;
  std::optional<double> im_weak_value;
  std::optional<Tau> tau;
  /// Name of the per-point error, if any value is missing.
  std::string error;
};

struct SweepResult {
  std::vector<std::string> observable_names;
  std::vector<SweepRow> rows;
};

/// Grid must be non-empty and strictly increasing inside [0, pi]. Per-point
/// failures become missing values; the sweep itself never aborts on them.
SweepResult sweep_phi(const SweepConfig& config, std::span<const double> grid);

enum class Side { Below, Above };

std::string_view to_string(Side side);

struct ExponentFit {
  double phi_c = 0.0;
  Side side = Side::Above;
  std::vector<double> offsets;
  std::vector<double> taus;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double nu = 0.0;
};

/// Samples tau at phi_c -/+ offset and regresses ln tau on ln offset by
/// ordinary least squares, with no acceptance checks. Throws
/// WindowContainsCriticalPoint if any sample diverges.
ExponentFit evaluate_exponent(const KrausFamily& family, double phi_c, Side side, std::span<const double> offsets,
                              const Tolerances& tol = {});

/// evaluate_exponent plus the r^2 acceptance threshold (PoorFit).
ExponentFit fit_exponent(const KrausFamily& family, double phi_c, Side side, std::span<const double> offsets,
                         const Tolerances& tol = {});

ExponentFit fit_exponent(const ProtocolConfig& config, double phi_c, Side side, std::span<const double> offsets);

/// Kraus family diag(sqrt(1 + delta^2), 1) with delta the distance from phi
/// to the nearest listed critical angle: R - 1 is exactly quadratic, so the
/// fitted exponent must be 2.
KrausFamily synthetic_quadratic_family(std::vector<double> critical_angles);

/// One-sided finite-difference slope of Im(sigma_z weak value) at phi_c,
/// the constant A of Im(w) ~ A (phi - phi_c).
double im_weak_value_slope(const SystemPreparation& prep, double alpha, double phi_c, Side side, double step = 1e-6);

}  // namespace weakcrit
