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

#include "weakcrit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "weakcrit/errors.hpp"

namespace weakcrit {

TrajectoryRecord iterate_matrix(const KrausOperator& k, const MeterState& initial, std::size_t n, const Tolerances& tol) {
  if (k.dimension() != initial.dimension()) throw Error(Errc::DimensionMismatch, "Kraus operator and meter state differ in dimension");
  TrajectoryRecord record;
  record.steps.reserve(n + 1);
  record.probabilities.reserve(n);
  record.steps.push_back(initial);
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexMatrix next = k.matrix * record.steps.back().rho() * k.matrix.adjoint();
    const double probability = next.trace().real();
    if (!(probability >= tol.starvation_floor)) {
      record.starved_at = i + 1;
      break;
    }
    record_step(record, MeterState::normalized(next), probability, tol);
  }
  return record;
}

MeterState propagate(const KrausOperator& k, const MeterState& initial, std::uint64_t n, const Tolerances& tol) {
  if (k.dimension() != initial.dimension()) throw Error(Errc::DimensionMismatch, "Kraus operator and meter state differ in dimension");
  if (n == 0) return initial;
  const auto dim = static_cast<Eigen::Index>(k.dimension());
  const double scale = k.matrix.norm();
  if (!(scale > 0.0)) throw Error(Errc::PostSelectionStarved, "Kraus operator is zero", 1.0);

  ComplexMatrix power = ComplexMatrix::Identity(dim, dim);
  ComplexMatrix base = k.matrix / scale;
  for (std::uint64_t remaining = n; remaining > 0; remaining >>= 1) {
    if (remaining & 1U) {
      power = power * base;
      const double norm = power.norm();
      if (!(norm > 0.0)) throw Error(Errc::PostSelectionStarved, "Kraus power vanished");
      power /= norm;
    }
    if (remaining > 1) {
      base = base * base;
      const double norm = base.norm();
      if (!(norm > 0.0)) throw Error(Errc::PostSelectionStarved, "Kraus power vanished");
      base /= norm;
    }
  }
  const ComplexMatrix next = power * initial.rho() * power.adjoint();
  const double weight = next.trace().real();
  if (!(weight >= tol.starvation_floor)) throw Error(Errc::PostSelectionStarved, "state annihilated by K^n");
  return MeterState::normalized(next);
}

std::vector<double> iterate_amplitudes(const KrausOperator& k, const ComplexVector& amplitudes, std::size_t n,
                                       AmplitudeWeights weights, const Tolerances& tol) {
  if (k.form != KrausForm::FirstOrderGeneral || !k.meter_observable || !k.weak_value)
    throw Error(Errc::InvalidArgument, "amplitude evolution needs a first-order Kraus operator");
  const MeterObservable& meter = *k.meter_observable;
  if (!meter.nondegenerate()) throw Error(Errc::DegenerateMeterObservable, "meter observable is degenerate");
  if (static_cast<std::size_t>(amplitudes.size()) != meter.dimension())
    throw Error(Errc::DimensionMismatch, "amplitude count differs from meter dimension");
  if (std::abs(amplitudes.squaredNorm() - 1.0) > tol.verification)
    throw Error(Errc::InvalidState, "initial amplitudes are not normalized", amplitudes.squaredNorm());

  const std::vector<double> o = meter.eigenvalues();
  const double gt = k.coupling_product;
  const std::complex<double> w = k.weak_value->value;
  const std::complex<double> i(0.0, 1.0);
  const double steps = static_cast<double>(n);

  // Work with logarithms: |overlap|^{2n} and the weights underflow long
  // before the normalized populations do.
  std::vector<double> log_p(o.size());
  for (std::size_t j = 0; j < o.size(); ++j) {
    const double p0 = std::norm(amplitudes(static_cast<Eigen::Index>(j)));
    double log_weight = 0.0;
    if (n > 0) {
      if (weights == AmplitudeWeights::Exact) {
        log_weight = steps * std::log(std::norm(1.0 - i * gt * w * o[j]));
      } else {
        log_weight = steps * std::log(std::abs(1.0 + 2.0 * gt * w.imag() * o[j]));
      }
    }
    log_p[j] = p0 > 0.0 ? std::log(p0) + log_weight : -std::numeric_limits<double>::infinity();
  }
  const double peak = *std::max_element(log_p.begin(), log_p.end());
  if (!std::isfinite(peak)) throw Error(Errc::PostSelectionStarved, "all component weights vanished");

  std::vector<double> p(o.size());
  double total = 0.0;
  for (std::size_t j = 0; j < o.size(); ++j) total += p[j] = std::exp(log_p[j] - peak);
  for (double& pj : p) pj /= total;
  return p;
}

BlochVector bloch_step(const KrausOperator& k, const BlochVector& r, const Tolerances& tol) {
  if (!k.qubit) throw Error(Errc::InvalidArgument, "Bloch recursion needs an exact qubit Kraus operator");
  const std::complex<double> c = k.qubit->c;
  const std::complex<double> d = k.qubit->d;
  const double a = std::norm(c) + std::norm(d);
  const double contrast = std::norm(c) - std::norm(d);
  const std::complex<double> b = c * std::conj(d);
  const std::complex<double> b_conj = std::conj(c) * d;
  const double cross = (b + b_conj).real();
  // i (b - b*) is real: -2 Im(c d*).
  const double twist = (std::complex<double>(0.0, 1.0) * (b - b_conj)).real();

  const double denominator = a + cross * r.rx;
  if (!(denominator >= tol.starvation_floor))
    throw Error(Errc::PostSelectionStarved, "Bloch recursion denominator underflowed", denominator);
  return BlochVector{(a * r.rx + cross) / denominator, (contrast * r.ry + twist * r.rz) / denominator,
                     (contrast * r.rz - twist * r.ry) / denominator};
}

FixedPointReport classify_fixed_points(const KrausOperator& k, const Tolerances& tol) {
  FixedPointReport report;
  const bool marginal = moduli_degenerate(k, tol);
  for (std::size_t j = 0; j < k.spectrum.size(); ++j) {
    FixedPoint fp;
    fp.index = j;
    fp.eigenvalue = k.spectrum.eigenvalues[j];
    fp.state = MeterState::projector(k.spectrum.eigenvector(j));
    fp.stability = marginal ? Stability::MarginalUnitary : (j == 0 ? Stability::Stable : Stability::Unstable);
    report.fixed_points.push_back(std::move(fp));
  }
  return report;
}

MeterState long_time_state(const KrausOperator& k, const MeterState& initial, const Tolerances& tol) {
  if (k.dimension() != initial.dimension()) throw Error(Errc::DimensionMismatch, "Kraus operator and meter state differ in dimension");
  if (moduli_degenerate(k, tol)) throw Error(Errc::NoDominantEigenvalue, "leading Kraus eigenvalue moduli are degenerate");
  const ComplexVector dominant = k.spectrum.eigenvector(0);
  const double weight = dominant.dot(initial.rho() * dominant).real();
  if (weight <= tol.unstable_start)
    throw Error(Errc::UnstableManifoldStart, "initial state has no weight on the dominant eigenvector", weight);
  return MeterState::projector(dominant);
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Unitary: return "Unitary";
    case Regime::StableFlowLow: return "StableFlowLow";
    case Regime::StableFlowHigh: return "StableFlowHigh";
    case Regime::NearUnitarySpiral: return "NearUnitarySpiral";
  }
  return "Unknown";
}

std::string_view to_string(Stability stability) {
  switch (stability) {
    case Stability::Stable: return "Stable";
    case Stability::Unstable: return "Unstable";
    case Stability::MarginalUnitary: return "MarginalUnitary";
  }
  return "Unknown";
}

Regime classify_regime(const KrausOperator& k, const Tolerances& tol) {
  if (k.dimension() != 2) throw Error(Errc::DimensionMismatch, "regimes are defined for qubit meters");
  if (moduli_degenerate(k, tol)) return Regime::Unitary;
  const auto& lambda = k.spectrum.eigenvalues;
  const double rotation = std::abs(std::arg(lambda[0] / lambda[1]));
  const double tau = 1.0 / (2.0 * std::log(std::abs(lambda[0]) / std::abs(lambda[1])));
  if (rotation * tau >= tol.spiral_rotation_rad) return Regime::NearUnitarySpiral;
  const MeterState stable = MeterState::projector(k.spectrum.eigenvector(0));
  return expectation(pauli::x(), stable, tol) > 0.0 ? Regime::StableFlowHigh : Regime::StableFlowLow;
}

}  // namespace weakcrit
