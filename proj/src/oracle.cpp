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

#include "weakcrit/oracle.hpp"

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "weakcrit/errors.hpp"

namespace weakcrit::oracle {

namespace {

const std::complex<double> kI{0.0, 1.0};

ComplexVector system_vector(double theta) {
  ComplexVector v(2);
  v << std::cos(theta), std::sin(theta);
  return v;
}

ComplexVector final_vector(double phi, double alpha) {
  ComplexVector v(2);
  v << std::cos(phi), std::exp(kI * alpha) * std::sin(phi);
  return v;
}

ComplexVector purify(const MeterState& meter, const Tolerances& tol) {
  const auto spectrum = hermitian_eig<double>(meter.rho(), tol.hermiticity);
  // Largest-modulus eigenvalue of a density operator is its largest one.
  if (spectrum.eigenvalues[0].real() < 1.0 - tol.verification)
    throw Error(Errc::NotPure, "oracle needs a pure meter state", spectrum.eigenvalues[0].real());
  return spectrum.eigenvector(0);
}

BipartiteState product_state(const ComplexVector& system, const ComplexVector& meter) {
  const auto n = static_cast<std::size_t>(meter.size());
  BipartiteState joint{ComplexVector::Zero(static_cast<Eigen::Index>(2 * n)), n};
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t j = 0; j < n; ++j)
      joint.amplitudes(static_cast<Eigen::Index>(BipartiteState::index(s, j, n))) =
          system(static_cast<Eigen::Index>(s)) * meter(static_cast<Eigen::Index>(j));
  return joint;
}

// sigma_z eigenvalue of system basis state s.
double z_sign(std::size_t s) { return s == 0 ? 1.0 : -1.0; }

BipartiteState apply_unitary(const BipartiteState& in, double gt, const ExactQubitInteraction&) {
  if (in.meter_dimension != 2) throw Error(Errc::DimensionMismatch, "exact qubit interaction needs a qubit meter");
  BipartiteState out = in;
  for (std::size_t s = 0; s < 2; ++s) {
    // (sigma_z (x) sigma_x) swaps the meter components and applies the z sign.
    const auto i0 = static_cast<Eigen::Index>(BipartiteState::index(s, 0, 2));
    const auto i1 = static_cast<Eigen::Index>(BipartiteState::index(s, 1, 2));
    const std::complex<double> a0 = in.amplitudes(i0), a1 = in.amplitudes(i1);
    out.amplitudes(i0) = std::cos(gt) * a0 - kI * std::sin(gt) * z_sign(s) * a1;
    out.amplitudes(i1) = std::cos(gt) * a1 - kI * std::sin(gt) * z_sign(s) * a0;
  }
  return out;
}

BipartiteState apply_unitary(const BipartiteState& in, double gt, const GeneralInteraction& interaction) {
  const std::size_t n = in.meter_dimension;
  if (static_cast<std::size_t>(interaction.meter_observable.rows()) != n)
    throw Error(Errc::DimensionMismatch, "meter observable dimension differs from the meter state");
  const auto eig = hermitian_eig<double>(interaction.meter_observable);
  const ComplexMatrix& basis = eig.eigenvectors;
  BipartiteState out = in;
  for (std::size_t s = 0; s < 2; ++s) {
    ComplexVector block = in.amplitudes.segment(static_cast<Eigen::Index>(s * n), static_cast<Eigen::Index>(n));
    ComplexVector coeffs = basis.adjoint() * block;
    for (std::size_t j = 0; j < n; ++j)
      coeffs(static_cast<Eigen::Index>(j)) *= std::exp(-kI * gt * z_sign(s) * eig.eigenvalues[j].real());
    out.amplitudes.segment(static_cast<Eigen::Index>(s * n), static_cast<Eigen::Index>(n)) = basis * coeffs;
  }
  return out;
}

struct VectorStep {
  ComplexVector meter;
  double probability;
};

std::optional<VectorStep> step_vector(const ComplexVector& meter, const ComplexVector& system, const ComplexVector& final_state,
                                      double gt, const Interaction& interaction, const Tolerances& tol) {
  const BipartiteState joint = product_state(system, meter);
  const BipartiteState evolved = std::visit([&](const auto& which) { return apply_unitary(joint, gt, which); }, interaction);
  const std::size_t n = evolved.meter_dimension;
  ComplexVector projected = ComplexVector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t j = 0; j < n; ++j)
      projected(static_cast<Eigen::Index>(j)) += std::conj(final_state(static_cast<Eigen::Index>(s))) *
                                                 evolved.amplitudes(static_cast<Eigen::Index>(BipartiteState::index(s, j, n)));
  const double probability = projected.squaredNorm();
  if (!(probability >= tol.starvation_floor)) return std::nullopt;
  return VectorStep{projected / std::sqrt(probability), probability};
}

}  // namespace

StepResult oracle_step(const SystemPreparation& prep, const PostSelection& post, const CouplingSpec& coupling,
                       const MeterState& meter, const Interaction& interaction, const Tolerances& tol) {
  const auto next = step_vector(purify(meter, tol), system_vector(prep.theta), final_vector(post.phi, post.alpha),
                                coupling.product(), interaction, tol);
  if (!next) throw Error(Errc::PostSelectionStarved, "post-selection probability underflowed");
  return StepResult{MeterState::projector(next->meter), next->probability};
}

TrajectoryRecord oracle_run(const SystemPreparation& prep, const PostSelection& post, const CouplingSpec& coupling,
                            const MeterState& initial, std::size_t n, const Interaction& interaction,
                            const Tolerances& tol) {
  const ComplexVector system = system_vector(prep.theta);
  const ComplexVector final_state = final_vector(post.phi, post.alpha);
  TrajectoryRecord record;
  record.steps.push_back(initial);
  ComplexVector meter = purify(initial, tol);
  for (std::size_t i = 0; i < n; ++i) {
    const auto next = step_vector(meter, system, final_state, coupling.product(), interaction, tol);
    if (!next) {
      record.starved_at = i + 1;
      break;
    }
    meter = next->meter;
    record_step(record, MeterState::projector(meter), next->probability, tol);
  }
  return record;
}

}  // namespace weakcrit::oracle
