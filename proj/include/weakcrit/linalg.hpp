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

// Small dense complex linear algebra on top of Eigen: Pauli matrices,
// structural predicates, eigendecompositions with a fixed global ordering
// and phase convention, and the trace distance.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "weakcrit/errors.hpp"

namespace weakcrit {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using Matrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using Vector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

using ComplexMatrix = Matrix<double>;
using ComplexVector = Vector<double>;

namespace pauli {

template <typename Real = double>
Matrix<Real> identity() {
  return Matrix<Real>::Identity(2, 2);
}

template <typename Real = double>
Matrix<Real> x() {
  Matrix<Real> m(2, 2);
  m << Real(0), Real(1), Real(1), Real(0);
  return m;
}

template <typename Real = double>
Matrix<Real> y() {
  const Complex<Real> i(0, 1);
  Matrix<Real> m(2, 2);
  m << Real(0), -i, i, Real(0);
  return m;
}

template <typename Real = double>
Matrix<Real> z() {
  Matrix<Real> m(2, 2);
  m << Real(1), Real(0), Real(0), Real(-1);
  return m;
}

}  // namespace pauli

/// Largest entrywise deviation |m - m^dagger|, relative to max(1, ||m||_F).
template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, static_cast<double>(m.norm()));
  return static_cast<double>((m - m.adjoint()).cwiseAbs().maxCoeff()) <= tol * scale;
}

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  using Scalar = typename Derived::Scalar;
  const auto identity = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(m.rows(), m.cols());
  return static_cast<double>((m.adjoint() * m - identity).cwiseAbs().maxCoeff()) <= tol;
}

template <typename Derived>
bool is_normal(const Eigen::MatrixBase<Derived>& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, static_cast<double>(m.squaredNorm()));
  return static_cast<double>((m * m.adjoint() - m.adjoint() * m).norm()) <= tol * scale;
}

/// Eigenvalues sorted by descending modulus (ties: descending real part, then
/// descending imaginary part) with unit-norm eigenvectors stored as columns.
/// Each eigenvector's largest-modulus component is real and positive.
template <typename Real>
struct SpectralDecomposition {
  std::vector<Complex<Real>> eigenvalues;
  Matrix<Real> eigenvectors;

  std::size_t size() const { return eigenvalues.size(); }

  Vector<Real> eigenvector(std::size_t j) const { return eigenvectors.col(static_cast<Eigen::Index>(j)); }

  /// |lambda_1| - |lambda_2|; zero for one-dimensional spectra.
  Real moduli_gap() const {
    if (eigenvalues.size() < 2) return Real(0);
    return std::abs(std::abs(eigenvalues[0]) - std::abs(eigenvalues[1]));
  }

  /// sum_j lambda_j v_j v_j^dagger, the reconstruction valid for normal input.
  Matrix<Real> reconstruct() const {
    const auto n = eigenvectors.rows();
    Matrix<Real> out = Matrix<Real>::Zero(n, n);
    for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
      const Vector<Real> v = eigenvector(j);
      out += eigenvalues[j] * (v * v.adjoint());
    }
    return out;
  }
};

namespace detail {

template <typename Real>
constexpr Real tie_tolerance() {
  return Real(64) * std::numeric_limits<Real>::epsilon();
}

template <typename Real>
void fix_phase(Eigen::Ref<Vector<Real>> v) {
  const Real norm = v.norm();
  if (norm == Real(0)) return;
  v /= norm;
  const Real peak = v.cwiseAbs().maxCoeff();
  Eigen::Index pivot = 0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) >= peak * (Real(1) - tie_tolerance<Real>())) {
      pivot = k;
      break;
    }
  }
  const Complex<Real> p = v(pivot);
  v *= std::conj(p) / std::abs(p);
  v(pivot) = Complex<Real>(std::abs(v(pivot)), Real(0));
}

/// Applies the global ordering and phase convention to raw eigenpairs.
template <typename Real>
SpectralDecomposition<Real> finalize(const std::vector<Complex<Real>>& values, const Matrix<Real>& vectors) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  // Moduli equal up to rounding form a group ordered by real, then imaginary part.
  std::size_t start = 0;
  while (start < n) {
    std::size_t stop = start + 1;
    const Real lead = std::abs(values[order[start]]);
    while (stop < n && lead - std::abs(values[order[stop]]) <= tie_tolerance<Real>() * std::max(lead, Real(1))) ++stop;
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(stop),
                     [&](std::size_t a, std::size_t b) {
                       const Real tol = tie_tolerance<Real>() * std::max(lead, Real(1));
                       if (std::abs(values[a].real() - values[b].real()) > tol) return values[a].real() > values[b].real();
                       if (std::abs(values[a].imag() - values[b].imag()) > tol) return values[a].imag() > values[b].imag();
                       return false;
                     });
    start = stop;
  }

  SpectralDecomposition<Real> out;
  out.eigenvalues.reserve(n);
  out.eigenvectors.resize(vectors.rows(), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues.push_back(values[order[j]]);
    Vector<Real> v = vectors.col(static_cast<Eigen::Index>(order[j]));
    fix_phase<Real>(v);
    out.eigenvectors.col(static_cast<Eigen::Index>(j)) = v;
  }
  return out;
}

}  // namespace detail

/// Closed-form eigendecomposition of a 2x2 matrix from its characteristic
/// polynomial. Scalar matrices return the canonical basis; any other matrix
/// with a repeated eigenvalue is defective and throws DegenerateSpectrum.
template <typename Real>
SpectralDecomposition<Real> eig2x2(const Matrix<Real>& m) {
  if (m.rows() != 2 || m.cols() != 2) throw Error(Errc::DimensionMismatch, "eig2x2 requires a 2x2 matrix");
  const Complex<Real> a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  const Real scale = std::max(m.norm(), std::numeric_limits<Real>::min());
  const Real tol = detail::tie_tolerance<Real>() * scale;

  if (std::abs(b) <= tol && std::abs(c) <= tol && std::abs(a - d) <= tol) {
    return detail::finalize<Real>({a, d}, Matrix<Real>::Identity(2, 2));
  }

  // (a - d)^2 + 4bc avoids the cancellation in tr^2 - 4 det.
  const Complex<Real> root = std::sqrt((a - d) * (a - d) + Real(4) * b * c);
  if (std::abs(root) <= tol) throw Error(Errc::DegenerateSpectrum, "2x2 matrix is defective (single eigenvector)");

  const Complex<Real> half_trace = (a + d) / Real(2);
  const std::vector<Complex<Real>> values{half_trace + root / Real(2), half_trace - root / Real(2)};

  Matrix<Real> vectors(2, 2);
  for (int j = 0; j < 2; ++j) {
    const Complex<Real> lambda = values[static_cast<std::size_t>(j)];
    Vector<Real> first(2), second(2);
    first << b, lambda - a;
    second << lambda - d, c;
    vectors.col(j) = first.norm() >= second.norm() ? first : second;
  }
  return detail::finalize<Real>(values, vectors);
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Sweeps stop once every off-diagonal magnitude is below
/// 1e-13 * ||m||_F.
template <typename Real>
SpectralDecomposition<Real> hermitian_eig(const Matrix<Real>& m, double hermiticity_tol = 1e-12) {
  if (m.rows() != m.cols()) throw Error(Errc::DimensionMismatch, "hermitian_eig requires a square matrix");
  if (!is_hermitian(m, hermiticity_tol)) throw Error(Errc::NotHermitian, "hermitian_eig input is not Hermitian");

  const Eigen::Index n = m.rows();
  Matrix<Real> a = (m + m.adjoint()) / Real(2);
  Matrix<Real> v = Matrix<Real>::Identity(n, n);
  const Real threshold = Real(1e-13) * m.norm();

  constexpr int kMaxSweeps = 100;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    Real off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= threshold) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex<Real> apq = a(p, q);
        const Real magnitude = std::abs(apq);
        if (magnitude == Real(0)) continue;
        const Complex<Real> phase = apq / magnitude;
        const Real app = a(p, p).real();
        const Real aqq = a(q, q).real();
        const Real theta = (aqq - app) / (Real(2) * magnitude);
        const Real t = (theta >= 0 ? Real(1) : Real(-1)) / (std::abs(theta) + std::sqrt(theta * theta + Real(1)));
        const Real cs = Real(1) / std::sqrt(t * t + Real(1));
        const Real sn = t * cs;

        // G = diag(1, conj(phase)) * [[c, s], [-s, c]] acting on (p, q).
        const Complex<Real> g_pp = cs;
        const Complex<Real> g_pq = sn;
        const Complex<Real> g_qp = -sn * std::conj(phase);
        const Complex<Real> g_qq = cs * std::conj(phase);

        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex<Real> akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * g_pp + akq * g_qp;
          a(k, q) = akp * g_pq + akq * g_qq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex<Real> apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(g_pp) * apk + std::conj(g_qp) * aqk;
          a(q, k) = std::conj(g_pq) * apk + std::conj(g_qq) * aqk;
        }
        a(p, q) = a(q, p) = Complex<Real>(0);
        a(p, p) = Complex<Real>(a(p, p).real(), 0);
        a(q, q) = Complex<Real>(a(q, q).real(), 0);

        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex<Real> vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * g_pp + vkq * g_qp;
          v(k, q) = vkp * g_pq + vkq * g_qq;
        }
      }
    }
  }
  if (!converged) {
    Real off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off > threshold) throw Error(Errc::NoConvergence, "Jacobi sweeps did not converge");
  }

  std::vector<Complex<Real>> values;
  values.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) values.emplace_back(a(k, k).real(), Real(0));
  return detail::finalize<Real>(values, v);
}

/// Eigendecomposition of a normal matrix through its complex Schur form,
/// which is diagonal for normal input and has orthonormal Schur vectors.
template <typename Real>
SpectralDecomposition<Real> normal_eig(const Matrix<Real>& m, double normality_tol = 1e-10) {
  if (m.rows() != m.cols()) throw Error(Errc::DimensionMismatch, "normal_eig requires a square matrix");
  if (!is_normal(m, normality_tol)) throw Error(Errc::NotNormal, "normal_eig input is not normal");
  Eigen::ComplexSchur<Matrix<Real>> schur(m);
  if (schur.info() != Eigen::Success) throw Error(Errc::NoConvergence, "complex Schur decomposition failed");
  const Matrix<Real>& t = schur.matrixT();
  std::vector<Complex<Real>> values;
  values.reserve(static_cast<std::size_t>(t.rows()));
  for (Eigen::Index k = 0; k < t.rows(); ++k) values.push_back(t(k, k));
  return detail::finalize<Real>(values, schur.matrixU());
}

/// Chooses the route by structure: closed form for 2x2, Jacobi for
/// Hermitian input, Schur otherwise.
template <typename Real>
SpectralDecomposition<Real> eig(const Matrix<Real>& m) {
  if (m.rows() == 2 && m.cols() == 2) return eig2x2<Real>(m);
  if (is_hermitian(m)) return hermitian_eig<Real>(m);
  return normal_eig<Real>(m);
}

/// Half the sum of singular values of a - b, for Hermitian a and b.
template <typename Real>
Real trace_distance(const Matrix<Real>& a, const Matrix<Real>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(Errc::DimensionMismatch, "trace_distance operands differ in dimension");
  const Matrix<Real> diff = a - b;
  const Matrix<Real> hermitian_part = (diff + diff.adjoint()) / Real(2);
  if (hermitian_part.norm() == Real(0)) return Real(0);
  const auto spectrum = hermitian_eig<Real>(hermitian_part);
  Real sum = 0;
  for (const auto& lambda : spectrum.eigenvalues) sum += std::abs(lambda.real());
  return sum / Real(2);
}

}  // namespace weakcrit
