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

#include "weakcrit/state.hpp"

#include <cmath>
#include <string>

#include "weakcrit/errors.hpp"

namespace weakcrit {

double BlochVector::norm() const { return std::sqrt(rx * rx + ry * ry + rz * rz); }

MeterState MeterState::from_density(const ComplexMatrix& rho, const Tolerances& tol) {
  if (rho.rows() != rho.cols() || rho.rows() < 1) throw Error(Errc::DimensionMismatch, "density operator must be square");
  if (!is_hermitian(rho, tol.hermiticity)) throw Error(Errc::NotHermitian, "density operator is not Hermitian");
  const std::complex<double> trace = rho.trace();
  if (std::abs(trace - 1.0) > tol.hermiticity) throw Error(Errc::InvalidState, "density operator trace differs from 1");
  const auto spectrum = hermitian_eig<double>(rho, tol.hermiticity);
  for (const auto& lambda : spectrum.eigenvalues)
    if (lambda.real() < -tol.verification)
      throw Error(Errc::InvalidState, "density operator has a negative eigenvalue", lambda.real());
  return MeterState((rho + rho.adjoint()) / 2.0);
}

MeterState MeterState::from_bloch(const BlochVector& r, const Tolerances& tol) {
  if (r.norm() > 1.0 + tol.verification) throw Error(Errc::InvalidState, "Bloch vector lies outside the unit ball", r.norm());
  const std::complex<double> i(0.0, 1.0);
  ComplexMatrix rho(2, 2);
  rho << 0.5 * (1.0 + r.rz), 0.5 * (r.rx - i * r.ry), 0.5 * (r.rx + i * r.ry), 0.5 * (1.0 - r.rz);
  return MeterState(rho);
}

MeterState MeterState::from_amplitudes(const ComplexVector& amplitudes, const Tolerances& tol) {
  if (amplitudes.size() < 1) throw Error(Errc::DimensionMismatch, "amplitude vector is empty");
  if (std::abs(amplitudes.squaredNorm() - 1.0) > tol.verification)
    throw Error(Errc::InvalidState, "amplitudes are not normalized", amplitudes.squaredNorm());
  return projector(amplitudes);
}

MeterState MeterState::projector(const ComplexVector& v) {
  const double norm2 = v.squaredNorm();
  if (!(norm2 > 0.0)) throw Error(Errc::InvalidState, "cannot project onto the zero vector");
  return MeterState((v * v.adjoint()) / norm2);
}

MeterState MeterState::normalized(const ComplexMatrix& unnormalized) {
  const ComplexMatrix hermitian = (unnormalized + unnormalized.adjoint()) / 2.0;
  return MeterState(hermitian / hermitian.trace().real());
}

double MeterState::purity() const { return (rho_ * rho_).trace().real(); }

BlochVector MeterState::bloch() const {
  if (dimension() != 2) throw Error(Errc::DimensionMismatch, "Bloch vectors exist only for qubit meters");
  return BlochVector{2.0 * rho_(1, 0).real(), 2.0 * rho_(1, 0).imag(), (rho_(0, 0) - rho_(1, 1)).real()};
}

double trace_distance(const MeterState& a, const MeterState& b) { return trace_distance<double>(a.rho(), b.rho()); }

double expectation(const ComplexMatrix& observable, const MeterState& state, const Tolerances& tol) {
  if (observable.rows() != state.rho().rows() || observable.cols() != state.rho().cols())
    throw Error(Errc::DimensionMismatch, "observable and state dimensions differ");
  if (!is_hermitian(observable, tol.hermiticity)) throw Error(Errc::NotHermitian, "observable is not Hermitian");
  const std::complex<double> value = (observable * state.rho()).trace();
  if (std::abs(value.imag()) > tol.verification)
    throw Error(Errc::InvalidState, "expectation value has an imaginary residue", value.imag());
  return value.real();
}

void TrajectoryRecord::require_complete() const {
  if (starved_at)
    throw Error(Errc::PostSelectionStarved, "post-selection probability underflowed at step " + std::to_string(*starved_at),
                static_cast<double>(*starved_at));
}

std::vector<BlochVector> TrajectoryRecord::bloch() const {
  std::vector<BlochVector> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.bloch());
  return out;
}

void record_step(TrajectoryRecord& record, MeterState next, double probability, const Tolerances& tol) {
  if (!record.converged_at && !record.steps.empty() && trace_distance(record.steps.back(), next) < tol.convergence)
    record.converged_at = record.steps.size();
  record.steps.push_back(std::move(next));
  record.probabilities.push_back(probability);
}

}  // namespace weakcrit
