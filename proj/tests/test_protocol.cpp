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

#include <random>

#include "doctest.h"
#include "testutil.hpp"
#include "weakcrit/errors.hpp"
#include "weakcrit/protocol.hpp"

using namespace weakcrit;
using testutil::cd;
using testutil::kPi;

namespace {

Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::InvalidArgument;
}

cd sigma_z_element(double theta, double phi, double alpha) {
  return std::cos(phi) * std::cos(theta) - std::exp(cd(0, -alpha)) * std::sin(phi) * std::sin(theta);
}

}  // namespace

TEST_CASE("weak value examples") {
  const SystemPreparation prep{kPi / 4};
  CHECK(std::abs(sigma_z_weak_value(prep, {0.0, kPi / 7}).value - 1.0) < 1e-15);
  CHECK(std::abs(sigma_z_weak_value(prep, {kPi / 2, kPi / 7}).value + 1.0) < 1e-15);
  CHECK(std::abs(sigma_z_weak_value(prep, {kPi / 4, kPi / 2}).value - cd(0, 1)) < 1e-15);
}

TEST_CASE("weak value matches the closed form over a grid") {
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 17; ++j)
      for (int k = 0; k < 8; ++k) {
        const double theta = (i + 0.5) * kPi / 18, phi = (j + 0.5) * kPi / 17, alpha = k * kPi / 4;
        if (std::abs(testutil::overlap_closed_form(theta, phi, alpha)) < 1e-3) continue;
        const cd w = sigma_z_weak_value({theta}, {phi, alpha}).value;
        const cd ref = testutil::weak_value_closed_form(theta, phi, alpha);
        CHECK(std::abs(w - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
      }
}

TEST_CASE("weak value refuses orthogonal selections") {
  const SystemPreparation prep{kPi / 4};
  const PostSelection post{3 * kPi / 4, 0.0};
  try {
    sigma_z_weak_value(prep, post);
    FAIL("expected VanishingOverlap");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::VanishingOverlap);
    CHECK(e.value() < 1e-12);
  }
}

TEST_CASE("weak value ignores global phases of the selected states") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const SystemPreparation prep{u(rng) * kPi / 2};
    const PostSelection post{u(rng) * kPi, u(rng) * 2 * kPi};
    if (std::abs(selection_overlap(prep, post)) < 1e-2) continue;
    const cd a = std::exp(cd(0, 2 * kPi * u(rng)));
    const cd b = std::exp(cd(0, 2 * kPi * u(rng)));
    const ComplexVector s = a * preselected_state(prep);
    const ComplexVector f = b * postselected_state(post);
    const cd rotated = f.dot(pauli::z() * s) / f.dot(s);
    CHECK(std::abs(rotated - sigma_z_weak_value(prep, post).value) < 1e-12);
  }
}

TEST_CASE("first-order Kraus operator") {
  const auto sx = MeterObservable::sigma_x();
  SUBCASE("no interaction gives the overlap times identity") {
    const cd ov(0.3, -0.4);
    const auto k = kraus_first_order(ov, WeakValue{{0.7, 0.2}}, CouplingSpec{0.0, 1.0}, sx);
    CHECK((k.matrix - ov * ComplexMatrix::Identity(2, 2)).norm() == 0.0);
  }
  SUBCASE("real weak value keeps the moduli equal to second order") {
    const cd ov(0.6, 0.1);
    const double gt = 0.01;
    const auto k = kraus_first_order(ov, WeakValue{{1.7, 0.0}}, CouplingSpec{gt, 1.0}, sx);
    CHECK(std::abs(std::abs(k.spectrum.eigenvalues[0]) - std::abs(ov)) <= gt * gt * 1.7 * 1.7 * std::abs(ov));
    CHECK(eigenvalue_moduli_gap(k) <= 1e-15);
    CHECK(moduli_degenerate(k));
  }
  SUBCASE("imaginary weak value ratio") {
    const SystemPreparation prep{kPi / 4};
    const PostSelection post{kPi / 4, kPi / 2};
    const double gt = 0.01;
    const auto k = kraus_first_order(prep, post, CouplingSpec{gt, 1.0}, sx);
    const double ratio = std::norm(k.spectrum.eigenvalues[0]) / std::norm(k.spectrum.eigenvalues[1]);
    CHECK(ratio == doctest::Approx((1 + 0.02 + 1e-4) / (1 - 0.02 + 1e-4)).epsilon(1e-13));
    REQUIRE(k.weak_value);
    CHECK(std::abs(k.weak_value->value - cd(0, 1)) < 1e-15);
  }
  SUBCASE("matrix and spectrum follow the defining formula") {
    std::mt19937_64 rng(5);
    const ComplexMatrix h = testutil::random_hermitian(rng, 5);
    const auto meter = MeterObservable::from_matrix(h);
    const cd ov(0.4, 0.3);
    const WeakValue wv{{0.8, -1.3}};
    const double gt = 0.02;
    const auto k = kraus_first_order(ov, wv, CouplingSpec{0.04, 0.5}, meter);
    CHECK((k.matrix - ov * (ComplexMatrix::Identity(5, 5) - cd(0, 1) * gt * wv.value * h)).norm() < 1e-15);
    REQUIRE(k.meter_eigenvalues.size() == 5);
    for (std::size_t j = 0; j < 5; ++j) {
      const cd expected = ov * (1.0 - cd(0, 1) * gt * wv.value * k.meter_eigenvalues[j]);
      CHECK(std::abs(k.spectrum.eigenvalues[j] - expected) < 1e-15);
      const ComplexVector v = k.spectrum.eigenvector(j);
      CHECK((h * v - k.meter_eigenvalues[j] * v).norm() < 1e-10);
      CHECK((k.matrix * v - k.spectrum.eigenvalues[j] * v).norm() < 1e-10);
    }
  }
  SUBCASE("weakness bound") {
    CHECK(code_of([&] { kraus_first_order(cd(1.0), WeakValue{{0.0, 1.0}}, CouplingSpec{0.06, 1.0}, sx); }) ==
          Errc::CouplingTooStrong);
  }
}

TEST_CASE("first-order eigenvectors coincide with those of the meter observable") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 6;
    const auto meter = MeterObservable::from_matrix(testutil::random_hermitian(rng, n));
    const SystemPreparation prep{u(rng) * kPi / 2};
    const PostSelection post{u(rng) * kPi, u(rng) * 2 * kPi};
    if (std::abs(selection_overlap(prep, post)) < 0.05) continue;
    const auto k = kraus_first_order(prep, post, CouplingSpec{1e-3, 1.0}, meter);
    for (std::size_t j = 0; j < k.spectrum.size(); ++j) {
      const ComplexVector v = k.spectrum.eigenvector(j);
      CHECK((meter.matrix() * v - k.meter_eigenvalues[j] * v).norm() < 1e-10);
    }
  }
}

TEST_CASE("exact qubit Kraus operator") {
  SUBCASE("no interaction") {
    const auto k = kraus_exact_qubit({kPi / 4}, {1.0, kPi / 7}, CouplingSpec{0.0, 1.0});
    REQUIRE(k.qubit);
    CHECK(k.qubit->d == cd(0.0));
    CHECK((k.matrix - k.overlap * ComplexMatrix::Identity(2, 2)).norm() < 1e-16);
  }
  SUBCASE("coefficients and eigenvalues") {
    const double theta = kPi / 4, alpha = kPi / 7, gt = 0.1, phi = 1.0;
    const auto k = kraus_exact_qubit({theta}, {phi, alpha}, CouplingSpec{0.1, 1.0});
    const cd c = std::cos(gt) * testutil::overlap_closed_form(theta, phi, alpha);
    const cd d = cd(0, -1) * std::sin(gt) * sigma_z_element(theta, phi, alpha);
    REQUIRE(k.qubit);
    CHECK(std::abs(k.qubit->c - c) < 1e-15);
    CHECK(std::abs(k.qubit->d - d) < 1e-15);
    CHECK(k.matrix == (k.qubit->c * pauli::identity() + k.qubit->d * pauli::x()));
    const cd hi = std::abs(c + d) > std::abs(c - d) ? c + d : c - d;
    const cd lo = std::abs(c + d) > std::abs(c - d) ? c - d : c + d;
    CHECK(std::abs(k.spectrum.eigenvalues[0] - hi) < 1e-15);
    CHECK(std::abs(k.spectrum.eigenvalues[1] - lo) < 1e-15);
  }
  SUBCASE("flipped sign negates d only") {
    const auto a = kraus_exact_qubit({0.3}, {1.1, 0.4}, CouplingSpec{0.2, 1.0});
    const auto b = kraus_exact_qubit({0.3}, {1.1, 0.4}, CouplingSpec{0.2, 1.0}, DCoefficientSign::Flipped);
    CHECK(b.qubit->c == a.qubit->c);
    CHECK(b.qubit->d == -a.qubit->d);
  }
  SUBCASE("phi = pi/2 is proportional to a unitary") {
    const double theta = kPi / 4, alpha = kPi / 7, gt = 0.1;
    const auto k = kraus_exact_qubit({theta}, {kPi / 2, alpha}, CouplingSpec{gt, 1.0});
    const cd pref = std::exp(cd(0, -alpha)) * std::sin(theta);
    const ComplexMatrix expected = pref * (std::cos(gt) * pauli::identity() + cd(0, 1) * std::sin(gt) * pauli::x());
    CHECK((k.matrix - expected).norm() < 1e-15);
    CHECK(is_unitary(ComplexMatrix(k.matrix / std::abs(pref)), 1e-14));
    CHECK(std::abs(std::abs(k.spectrum.eigenvalues[0]) - std::abs(k.spectrum.eigenvalues[1])) < 1e-15);
  }
}

TEST_CASE("exact qubit eigenvectors are always |+> and |->") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ComplexVector plus(2), minus(2);
  plus << 1.0, 1.0;
  minus << 1.0, -1.0;
  plus /= std::sqrt(2.0);
  minus /= std::sqrt(2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto k = kraus_exact_qubit({u(rng) * kPi / 2}, {u(rng) * kPi, u(rng) * 2 * kPi}, CouplingSpec{u(rng), 1.0});
    for (std::size_t j = 0; j < 2; ++j) {
      const ComplexVector v = k.spectrum.eigenvector(j);
      CHECK(std::max(testutil::phase_free_overlap(v, plus), testutil::phase_free_overlap(v, minus)) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact and first-order operators agree to second order") {
  const double gt = 1e-3;
  const auto sx = MeterObservable::sigma_x();
  int compared = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k) {
        const SystemPreparation prep{(i + 0.5) * kPi / 8};
        const PostSelection post{(j + 0.5) * kPi / 5, (k + 0.5) * 2 * kPi / 5};
        if (std::abs(selection_overlap(prep, post)) < 1e-2) continue;
        const auto exact = kraus_exact_qubit(prep, post, CouplingSpec{gt, 1.0});
        const auto first = kraus_first_order(prep, post, CouplingSpec{gt, 1.0}, sx);
        CHECK((exact.matrix - first.matrix).norm() <= 10 * gt * gt);
        ++compared;
      }
  CHECK(compared >= 90);
}

TEST_CASE("moduli gap") {
  SUBCASE("degenerate meter observable gives an exactly zero gap") {
    const std::vector<double> diag{1.0, 1.0, -1.0};
    const auto meter = MeterObservable::diagonal(diag);
    CHECK_FALSE(meter.nondegenerate());
    const auto k = kraus_first_order(cd(0.7, 0.1), WeakValue{{0.3, 0.9}}, CouplingSpec{0.01, 1.0}, meter);
    CHECK(eigenvalue_moduli_gap(k) == 0.0);
  }
  SUBCASE("first-order gap follows |ov| |gt Im(w) (o1 - o2)|") {
    const std::vector<double> diag{2.0, 0.5, -1.0};
    const auto meter = MeterObservable::diagonal(diag);
    const cd ov(0.5, -0.2);
    const double gt = 1e-3;
    const WeakValue wv{{0.4, 0.6}};
    const auto k = kraus_first_order(ov, wv, CouplingSpec{gt, 1.0}, meter);
    const double predicted = std::abs(ov) * gt * wv.imag() * (2.0 - 0.5);
    CHECK(std::abs(eigenvalue_moduli_gap(k) - predicted) <= 10 * gt * gt * std::abs(ov));
  }
  SUBCASE("exact qubit gap vanishes only at the critical angles") {
    const SystemPreparation prep{kPi / 4};
    const std::size_t points = 2001;
    for (std::size_t i = 0; i < points; ++i) {
      const double phi = kPi * static_cast<double>(i) / (points - 1);
      const auto k = kraus_exact_qubit(prep, {phi, kPi / 7}, CouplingSpec{0.1, 1.0});
      const bool critical = i == 0 || i == 1000 || i == 2000;
      if (critical) CHECK(eigenvalue_moduli_gap(k) < 1e-15);
      else CHECK(eigenvalue_moduli_gap(k) > 1e-6);
    }
  }
}

TEST_CASE("first-order degeneracy coincides with a real weak value") {
  const auto sx = MeterObservable::sigma_x();
  const SystemPreparation prep{kPi / 4};
  const double gt = 1e-3;
  for (int j = 0; j <= 64; ++j) {
    const double phi = kPi * j / 64;
    const auto k = kraus_first_order(prep, {phi, kPi / 7}, CouplingSpec{gt, 1.0}, sx);
    const bool real_weak_value = std::abs(k.weak_value->imag()) < 1e-12;
    CHECK(moduli_degenerate(k) == real_weak_value);
  }
}

TEST_CASE("critical angles") {
  SUBCASE("theta = pi/4, alpha = pi/7") {
    const auto c = find_critical_angles({kPi / 4}, kPi / 7, 4096);
    CHECK_FALSE(c.all_critical);
    REQUIRE(c.angles.size() == 3);
    CHECK(std::abs(c.angles[0]) < 1e-9);
    CHECK(std::abs(c.angles[1] - kPi / 2) < 1e-9);
    CHECK(std::abs(c.angles[2] - kPi) < 1e-9);
  }
  SUBCASE("theta = pi/3, alpha = pi/5") {
    const auto c = find_critical_angles({kPi / 3}, kPi / 5, 97);
    REQUIRE(c.angles.size() == 3);
    CHECK(std::abs(c.angles[1] - kPi / 2) < 1e-9);
  }
  SUBCASE("real weak value everywhere") {
    const auto c = find_critical_angles({kPi / 4}, 0.0, 64);
    CHECK(c.all_critical);
    CHECK(c.angles.empty());
  }
  SUBCASE("grid too small") {
    CHECK(code_of([] { find_critical_angles({kPi / 4}, kPi / 7, 8); }) == Errc::InvalidArgument);
  }
  SUBCASE("orthogonal selection on the grid is skipped") {
    // theta = pi/4, alpha = 0: the overlap cos(phi - theta) vanishes at the grid point 3 pi / 4
    const auto c = find_critical_angles({kPi / 4}, 0.0, 4097);
    CHECK(c.all_critical);
  }
}

TEST_CASE("meter observable") {
  const std::vector<double> diag{2, 1, 0, -1, -2};
  const auto m = MeterObservable::diagonal(diag);
  CHECK(m.dimension() == 5);
  CHECK(m.nondegenerate());
  const auto values = m.eigenvalues();
  CHECK(values == std::vector<double>{2, -2, 1, -1, 0});
  ComplexMatrix bad = pauli::x();
  bad(0, 1) = cd(0, 1);
  CHECK(code_of([&] { MeterObservable::from_matrix(bad); }) == Errc::NotHermitian);
}
