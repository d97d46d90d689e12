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
#include <optional>
#include <span>
#include <vector>

#include "weakcrit/linalg.hpp"
#include "weakcrit/parameters.hpp"
#include "weakcrit/tolerances.hpp"

namespace weakcrit {

struct WeakValue {
  std::complex<double> value;

  double real() const { return value.real(); }
  double imag() const { return value.imag(); }
};

/// Hermitian observable on the N-level meter together with its spectrum.
class MeterObservable {
 public:
  static MeterObservable from_matrix(const ComplexMatrix& matrix, const Tolerances& tol = {});
  static MeterObservable sigma_x();
  static MeterObservable diagonal(std::span<const double> values);

  const ComplexMatrix& matrix() const { return matrix_; }
  const SpectralDecomposition<double>& spectrum() const { return spectrum_; }
  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
  /// Real eigenvalues in spectrum order.
  std::vector<double> eigenvalues() const;
  bool nondegenerate() const { return nondegenerate_; }

 private:
  MeterObservable(ComplexMatrix matrix, SpectralDecomposition<double> spectrum, bool nondegenerate)
      : matrix_(std::move(matrix)), spectrum_(std::move(spectrum)), nondegenerate_(nondegenerate) {}

  ComplexMatrix matrix_;
  SpectralDecomposition<double> spectrum_;
  bool nondegenerate_;
};

enum class KrausForm { FirstOrderGeneral, ExactQubit, Explicit };

/// Sign of the sigma_x coefficient of the exact qubit Kraus operator.
/// FromUnitary is <psi_f| exp(-i gt sz (x) sx) |psi_S>; Flipped negates it and
/// exists only as a negative control for the oracle harness.
enum class DCoefficientSign { FromUnitary, Flipped };

struct QubitCoefficients {
  std::complex<double> c;
  std::complex<double> d;
};

/// One protocol round as a linear map on the meter. `spectrum` is computed
/// at construction; first-order operators also record the weak value and the
/// meter eigenvalue o_j behind each Kraus eigenvalue.
struct KrausOperator {
  ComplexMatrix matrix;
  KrausForm form = KrausForm::Explicit;
  std::optional<QubitCoefficients> qubit;
  std::complex<double> overlap{1.0, 0.0};
  double coupling_product = 0.0;
  SpectralDecomposition<double> spectrum;
  std::optional<WeakValue> weak_value;
  std::optional<MeterObservable> meter_observable;
  std::vector<double> meter_eigenvalues;

  std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
};

ComplexVector preselected_state(const SystemPreparation& prep);
ComplexVector postselected_state(const PostSelection& post);

/// <psi_f|psi_S>
std::complex<double> selection_overlap(const SystemPreparation& prep, const PostSelection& post);

/// <psi_f|O|psi_S> / <psi_f|psi_S>. Throws VanishingOverlap (value() carries
/// the overlap magnitude) when |<psi_f|psi_S>| is at or below the floor.
WeakValue weak_value(const SystemPreparation& prep, const PostSelection& post, const ComplexMatrix& system_observable,
                     const Tolerances& tol = {});

/// Weak value of sigma_z, the system observable of the protocol.
WeakValue sigma_z_weak_value(const SystemPreparation& prep, const PostSelection& post, const Tolerances& tol = {});

/// overlap * (I - i gt w O_A), valid to first order in gt.
KrausOperator kraus_first_order(std::complex<double> overlap, const WeakValue& wv, const CouplingSpec& coupling,
                                const MeterObservable& meter, const Tolerances& tol = {});

/// First-order operator for the sigma_z system observable.
KrausOperator kraus_first_order(const SystemPreparation& prep, const PostSelection& post, const CouplingSpec& coupling,
                                const MeterObservable& meter, const Tolerances& tol = {});

/// c I + d sigma_x with c = cos(gt) <psi_f|psi_S> and
/// d = -i sin(gt) <psi_f|sigma_z|psi_S>, exact for any coupling.
KrausOperator kraus_exact_qubit(const SystemPreparation& prep, const PostSelection& post, const CouplingSpec& coupling,
                                DCoefficientSign sign = DCoefficientSign::FromUnitary);

/// Wraps an arbitrary square matrix (fixtures, synthetic families).
KrausOperator kraus_explicit(const ComplexMatrix& matrix);

/// |lambda_1| - |lambda_2| of the sorted Kraus spectrum.
double eigenvalue_moduli_gap(const KrausOperator& k);

/// True when the two leading moduli cannot be told apart: within the
/// first-order band (relative gap < factor * gt^2) for first-order
/// operators, within rounding for exact ones.
bool moduli_degenerate(const KrausOperator& k, const Tolerances& tol = {});

struct CriticalAngles {
  /// Im(weak value) vanishes on the whole grid (real weak value everywhere).
  bool all_critical = false;
  std::vector<double> angles;
};

/// Post-selection angles in [0, pi] where Im of the sigma_z weak value
/// crosses or touches zero: sign-change scan on a uniform grid, bisection to
/// the configured width, and explicit evaluation of both endpoints.
CriticalAngles find_critical_angles(const SystemPreparation& prep, double alpha, std::size_t grid_size,
                                    const Tolerances& tol = {});

/// Everything needed to build the Kraus operator at a given phi.
struct ProtocolConfig {
  double theta = 0.0;
  double alpha = 0.0;
  CouplingSpec coupling;
  KrausForm form = KrausForm::ExactQubit;
  std::optional<MeterObservable> meter;
  DCoefficientSign sign = DCoefficientSign::FromUnitary;
  Tolerances tol;
};

KrausOperator build_kraus(const ProtocolConfig& config, double phi);

}  // namespace weakcrit
