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

#include "weakcrit/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "weakcrit/errors.hpp"

namespace weakcrit {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

bool distinct_eigenvalues(const std::vector<double>& values, double tol) {
  for (std::size_t a = 0; a < values.size(); ++a)
    for (std::size_t b = a + 1; b < values.size(); ++b)
      if (std::abs(values[a] - values[b]) <= tol) return false;
  return true;
}

}  // namespace

MeterObservable MeterObservable::from_matrix(const ComplexMatrix& matrix, const Tolerances& tol) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1)
    throw Error(Errc::DimensionMismatch, "meter observable must be a non-empty square matrix");
  if (!is_hermitian(matrix, tol.hermiticity)) throw Error(Errc::NotHermitian, "meter observable is not Hermitian");
  auto spectrum = hermitian_eig<double>(matrix, tol.hermiticity);
  std::vector<double> values;
  for (const auto& lambda : spectrum.eigenvalues) values.push_back(lambda.real());
  const bool nondegenerate = distinct_eigenvalues(values, tol.verification);
  return MeterObservable(matrix, std::move(spectrum), nondegenerate);
}

MeterObservable MeterObservable::sigma_x() { return from_matrix(pauli::x()); }

MeterObservable MeterObservable::diagonal(std::span<const double> values) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.size()));
  for (std::size_t j = 0; j < values.size(); ++j) m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = values[j];
  return from_matrix(m);
}

std::vector<double> MeterObservable::eigenvalues() const {
  std::vector<double> out;
  out.reserve(spectrum_.size());
  for (const auto& lambda : spectrum_.eigenvalues) out.push_back(lambda.real());
  return out;
}

ComplexVector preselected_state(const SystemPreparation& prep) {
  ComplexVector v(2);
  v << std::cos(prep.theta), std::sin(prep.theta);
  return v;
}

ComplexVector postselected_state(const PostSelection& post) {
  ComplexVector v(2);
  v << std::cos(post.phi), std::polar(1.0, post.alpha) * std::sin(post.phi);
  return v;
}

std::complex<double> selection_overlap(const SystemPreparation& prep, const PostSelection& post) {
  return postselected_state(post).dot(preselected_state(prep));
}

WeakValue weak_value(const SystemPreparation& prep, const PostSelection& post, const ComplexMatrix& system_observable,
                     const Tolerances& tol) {
  if (system_observable.rows() != 2 || system_observable.cols() != 2)
    throw Error(Errc::DimensionMismatch, "system observable must be 2x2");
  if (!is_hermitian(system_observable, tol.hermiticity))
    throw Error(Errc::NotHermitian, "system observable is not Hermitian");
  const ComplexVector pre = preselected_state(prep);
  const ComplexVector fin = postselected_state(post);
  const std::complex<double> overlap = fin.dot(pre);
  if (std::abs(overlap) <= tol.overlap_floor)
    throw Error(Errc::VanishingOverlap, "pre- and post-selected states are orthogonal", std::abs(overlap));
  return WeakValue{fin.dot(system_observable * pre) / overlap};
}

WeakValue sigma_z_weak_value(const SystemPreparation& prep, const PostSelection& post, const Tolerances& tol) {
  return weak_value(prep, post, pauli::z(), tol);
}

KrausOperator kraus_first_order(std::complex<double> overlap, const WeakValue& wv, const CouplingSpec& coupling,
                                const MeterObservable& meter, const Tolerances& tol) {
  const double gt = coupling.product();
  if (gt < 0.0) throw Error(Errc::InvalidArgument, "coupling product gt must be non-negative", gt);
  if (gt > tol.weakness_bound)
    throw Error(Errc::CouplingTooStrong, "gt exceeds the first-order weakness bound", gt);

  const auto n = static_cast<Eigen::Index>(meter.dimension());
  KrausOperator k;
  k.form = KrausForm::FirstOrderGeneral;
  k.overlap = overlap;
  k.coupling_product = gt;
  k.weak_value = wv;
  k.meter_observable = meter;
  k.matrix = overlap * (ComplexMatrix::Identity(n, n) - kI * gt * wv.value * meter.matrix());

  // Eigenpairs follow from those of O_A: lambda_j = overlap (1 - i gt w o_j).
  const std::vector<double> o = meter.eigenvalues();
  std::vector<std::complex<double>> values;
  values.reserve(o.size());
  for (double oj : o) values.push_back(overlap * (1.0 - kI * gt * wv.value * oj));
  k.spectrum = detail::finalize<double>(values, meter.spectrum().eigenvectors);

  // Recover which o_j sits behind each sorted eigenvalue.
  for (const auto& lambda : k.spectrum.eigenvalues) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < values.size(); ++j)
      if (std::abs(values[j] - lambda) < std::abs(values[best] - lambda)) best = j;
    k.meter_eigenvalues.push_back(o[best]);
  }
  return k;
}

KrausOperator kraus_first_order(const SystemPreparation& prep, const PostSelection& post, const CouplingSpec& coupling,
                                const MeterObservable& meter, const Tolerances& tol) {
  const WeakValue wv = sigma_z_weak_value(prep, post, tol);
  return kraus_first_order(selection_overlap(prep, post), wv, coupling, meter, tol);
}

KrausOperator kraus_exact_qubit(const SystemPreparation& prep, const PostSelection& post, const CouplingSpec& coupling,
                                DCoefficientSign sign) {
  const double gt = coupling.product();
  if (gt < 0.0) throw Error(Errc::InvalidArgument, "coupling product gt must be non-negative", gt);
  const ComplexVector pre = preselected_state(prep);
  const ComplexVector fin = postselected_state(post);
  const std::complex<double> overlap = fin.dot(pre);
  const std::complex<double> sigma_z_element = fin.dot(pauli::z() * pre);

  QubitCoefficients coeffs{std::cos(gt) * overlap, -kI * std::sin(gt) * sigma_z_element};
  if (sign == DCoefficientSign::Flipped) coeffs.d = -coeffs.d;

  KrausOperator k;
  k.form = KrausForm::ExactQubit;
  k.overlap = overlap;
  k.coupling_product = gt;
  k.qubit = coeffs;
  k.matrix = coeffs.c * pauli::identity() + coeffs.d * pauli::x();
  k.spectrum = eig2x2<double>(k.matrix);
  return k;
}

KrausOperator kraus_explicit(const ComplexMatrix& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1)
    throw Error(Errc::DimensionMismatch, "Kraus operator must be a non-empty square matrix");
  KrausOperator k;
  k.form = KrausForm::Explicit;
  k.matrix = matrix;
  k.spectrum = eig<double>(matrix);
  return k;
}

double eigenvalue_moduli_gap(const KrausOperator& k) { return k.spectrum.moduli_gap(); }

bool moduli_degenerate(const KrausOperator& k, const Tolerances& tol) {
  if (k.spectrum.size() < 2) return true;
  const double lead = std::abs(k.spectrum.eigenvalues[0]);
  if (lead == 0.0) return true;
  const double relative_gap = k.spectrum.moduli_gap() / lead;
  if (k.form == KrausForm::FirstOrderGeneral) {
    const double gt = k.coupling_product;
    return relative_gap < tol.marginal_band_factor * gt * gt || relative_gap <= tol.exact_degeneracy;
  }
  return relative_gap <= tol.exact_degeneracy;
}

CriticalAngles find_critical_angles(const SystemPreparation& prep, double alpha, std::size_t grid_size,
                                    const Tolerances& tol) {
  if (grid_size < 16) throw Error(Errc::InvalidArgument, "critical-angle grid needs at least 16 points");

  auto im_part = [&](double phi) -> std::optional<double> {
    try {
      return sigma_z_weak_value(prep, PostSelection{phi, alpha}, tol).imag();
    } catch (const Error& e) {
      if (e.code() != Errc::VanishingOverlap) throw;
      return std::nullopt;
    }
  };

  const double pi = std::numbers::pi;
  std::vector<double> grid(grid_size);
  std::vector<std::optional<double>> values(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    grid[i] = i + 1 == grid_size ? pi : pi * static_cast<double>(i) / static_cast<double>(grid_size - 1);
    values[i] = im_part(grid[i]);
  }

  CriticalAngles out;
  const bool any_valid = std::any_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
  out.all_critical = any_valid && std::all_of(values.begin(), values.end(), [&](const auto& v) {
                       return !v || std::abs(*v) <= tol.critical_zero;
                     });
  if (out.all_critical) return out;

  auto is_zero = [&](const std::optional<double>& v) { return v && std::abs(*v) <= tol.critical_zero; };

  std::optional<std::size_t> previous;
  for (std::size_t i = 0; i < grid_size; ++i) {
    if (!values[i]) continue;  // orthogonal post-selection: excluded, neighbours bracket around it
    if (is_zero(values[i])) out.angles.push_back(grid[i]);
    if (previous && !is_zero(values[*previous]) && !is_zero(values[i]) && (*values[*previous]) * (*values[i]) < 0.0) {
      double lo = grid[*previous], hi = grid[i];
      const bool rising = *values[*previous] < 0.0;
      while (hi - lo > tol.bisection_width) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const auto f = im_part(mid);
        if (!f) {
          // Nudge off an orthogonal post-selection point.
          const auto g = im_part(std::nextafter(mid, hi));
          if (!g) break;
          ((*g < 0.0) == rising ? lo : hi) = mid;
          continue;
        }
        if (*f == 0.0) {
          lo = hi = mid;
          break;
        }
        ((*f < 0.0) == rising ? lo : hi) = mid;
      }
      out.angles.push_back(0.5 * (lo + hi));
    }
    previous = i;
  }

  std::sort(out.angles.begin(), out.angles.end());
  out.angles.erase(std::unique(out.angles.begin(), out.angles.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                   out.angles.end());
  return out;
}

KrausOperator build_kraus(const ProtocolConfig& config, double phi) {
  const SystemPreparation prep{config.theta};
  const PostSelection post{phi, config.alpha};
  switch (config.form) {
    case KrausForm::ExactQubit:
      return kraus_exact_qubit(prep, post, config.coupling, config.sign);
    case KrausForm::FirstOrderGeneral:
      if (!config.meter) throw Error(Errc::InvalidArgument, "first-order Kraus operator needs a meter observable");
      return kraus_first_order(prep, post, config.coupling, *config.meter, config.tol);
    case KrausForm::Explicit:
      break;
  }
  throw Error(Errc::InvalidArgument, "explicit Kraus operators cannot be built from protocol parameters");
}

}  // namespace weakcrit
