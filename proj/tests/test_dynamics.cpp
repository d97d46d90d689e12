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
#include "weakcrit/criticality.hpp"
#include "weakcrit/dynamics.hpp"
#include "weakcrit/errors.hpp"
#include "weakcrit/oracle.hpp"

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

KrausOperator sample_kraus(double phi, double gt = 0.1) {
  return kraus_exact_qubit({kPi / 4}, {phi, kPi / 7}, CouplingSpec{gt, 1.0});
}

MeterState bloch_state(double rx, double ry, double rz) {
  const double n = std::sqrt(rx * rx + ry * ry + rz * rz);
  return MeterState::from_bloch({rx / n, ry / n, rz / n});
}

}  // namespace

TEST_CASE("iterate_matrix basics") {
  const auto k = sample_kraus(1.0);
  const auto start = bloch_state(0.3, -0.2, 0.9);
  SUBCASE("n = 0 returns the initial state") {
    const auto rec = iterate_matrix(k, start, 0);
    REQUIRE(rec.steps.size() == 1);
    CHECK(rec.steps[0].rho() == start.rho());
    CHECK(rec.probabilities.empty());
  }
  SUBCASE("eigenvectors are stationary") {
    for (std::size_t j = 0; j < 2; ++j) {
      const auto fixed = MeterState::projector(k.spectrum.eigenvector(j));
      // Rounding grows along the unstable direction, so that one runs shorter.
      const auto rec = iterate_matrix(k, fixed, j == 0 ? 200 : 20);
      for (const auto& s : rec.steps) CHECK(trace_distance(s, fixed) < 1e-12);
    }
  }
  SUBCASE("probabilities are the traces of the unnormalized steps") {
    const auto rec = iterate_matrix(k, start, 20);
    for (std::size_t i = 0; i < 20; ++i) {
      const ComplexMatrix next = k.matrix * rec.steps[i].rho() * k.matrix.adjoint();
      CHECK(rec.probabilities[i] == doctest::Approx(next.trace().real()).epsilon(1e-14));
    }
  }
  SUBCASE("starvation truncates the record") {
    const auto tiny = kraus_explicit(1e-200 * ComplexMatrix::Identity(2, 2));
    const auto rec = iterate_matrix(tiny, start, 5);
    CHECK(rec.steps.size() == 1);
    REQUIRE(rec.starved_at);
    CHECK(*rec.starved_at == 1);
    CHECK(code_of([&] { rec.require_complete(); }) == Errc::PostSelectionStarved);
  }
}

TEST_CASE("unitary regime keeps rx and the radius fixed") {
  const auto k = sample_kraus(kPi / 2);
  const auto rec = iterate_matrix(k, bloch_state(1, 0, 1), 10000);
  const auto path = rec.bloch();
  const double rx0 = path.front().rx;
  for (const auto& r : path) {
    CHECK(std::abs(r.rx - rx0) < 1e-10);
    CHECK(std::abs(r.norm() - 1.0) < 1e-10);
  }
  CHECK_FALSE(rec.converged_at);
}

TEST_CASE("propagate matches step-by-step iteration") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto k = kraus_exact_qubit({u(rng) * kPi / 2}, {u(rng) * kPi, u(rng) * 2 * kPi}, CouplingSpec{u(rng), 1.0});
    const auto start = MeterState::projector(testutil::random_vector(rng, 2));
    const std::size_t n = 1 + static_cast<std::size_t>(u(rng) * 300);
    const auto rec = iterate_matrix(k, start, n);
    if (rec.starved_at) continue;
    CHECK(trace_distance(propagate(k, start, n), rec.final_state()) < 1e-10);
  }
}

TEST_CASE("amplitude evolution") {
  const auto sx = MeterObservable::sigma_x();
  ComplexVector equal(2);
  equal << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);

  SUBCASE("n = 0 leaves the populations unchanged") {
    ComplexVector c(2);
    c << cd(0.6, 0.0), cd(0.0, 0.8);
    const auto k = kraus_first_order(cd(0.5, 0.5), WeakValue{{0.2, 0.7}}, CouplingSpec{0.01, 1.0}, sx);
    const auto p = iterate_amplitudes(k, c, 0);
    CHECK(p[0] == doctest::Approx(0.36).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.64).epsilon(1e-14));
  }
  SUBCASE("real weak value leaves the populations unchanged") {
    ComplexVector c(2);
    c << cd(0.6, 0.0), cd(0.0, 0.8);
    const auto k = kraus_first_order(cd(0.5, 0.5), WeakValue{{1.3, 0.0}}, CouplingSpec{0.01, 1.0}, sx);
    const auto p = iterate_amplitudes(k, c, 500);
    CHECK(p[0] == doctest::Approx(0.36).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.64).epsilon(1e-12));
  }
  SUBCASE("two-level ratio against the normalized matrix map") {
    // gt Im(w) = 0.01 with w = i, meter eigenvalues +1 and -1.
    const double gt = 0.01;
    const std::size_t n = 100;
    const auto k = kraus_first_order(cd(1.0), WeakValue{{0.0, 1.0}}, CouplingSpec{gt, 1.0}, sx);
    const auto exact = iterate_amplitudes(k, equal, n);
    const double ratio = std::pow(1.01 / 0.99, 2.0 * n);
    CHECK(exact[0] == doctest::Approx(ratio / (1 + ratio)).epsilon(1e-12));

    const auto start = MeterState::projector(k.spectrum.eigenvector(0) * equal(0) + k.spectrum.eigenvector(1) * equal(1));
    const auto rho = iterate_matrix(k, start, n).final_state().rho();
    const ComplexVector plus = k.spectrum.eigenvector(0);
    const double p_plus = plus.dot(rho * plus).real();
    CHECK(std::abs(exact[0] - p_plus) < 1e-10);

    const auto expanded = iterate_amplitudes(k, equal, n, AmplitudeWeights::FirstOrderExpansion);
    const double expanded_ratio = std::pow(1.02 / 0.98, static_cast<double>(n));
    CHECK(expanded[0] / expanded[1] == doctest::Approx(expanded_ratio).epsilon(1e-12));
    CHECK(std::abs(expanded[0] - p_plus) < 1e-4);

    // Doubling the exponent of the expanded weight overshoots the map.
    const double doubled = std::pow(1.02 / 0.98, 2.0 * n);
    CHECK(std::abs(doubled / (1 + doubled) - p_plus) > 1e-3);
  }
  SUBCASE("input validation") {
    const auto exact_k = sample_kraus(1.0);
    CHECK(code_of([&] { iterate_amplitudes(exact_k, equal, 3); }) == Errc::InvalidArgument);
    const auto k = kraus_first_order(cd(1.0), WeakValue{{0.0, 1.0}}, CouplingSpec{0.01, 1.0}, sx);
    CHECK(code_of([&] { iterate_amplitudes(k, ComplexVector(equal * 2.0), 3); }) == Errc::InvalidState);
    const std::vector<double> deg{1.0, 1.0};
    const auto kd = kraus_first_order(cd(1.0), WeakValue{{0.0, 1.0}}, CouplingSpec{0.01, 1.0},
                                      MeterObservable::diagonal(deg));
    CHECK(code_of([&] { iterate_amplitudes(kd, equal, 3); }) == Errc::DegenerateMeterObservable);
  }
}

TEST_CASE("Bloch recursion") {
  SUBCASE("no coupling leaves r unchanged") {
    const auto k = sample_kraus(1.0, 0.0);
    const BlochVector r{0.3, -0.4, std::sqrt(1 - 0.25)};
    const auto next = bloch_step(k, r);
    CHECK(std::abs(next.rx - r.rx) < 1e-15);
    CHECK(std::abs(next.ry - r.ry) < 1e-15);
    CHECK(std::abs(next.rz - r.rz) < 1e-15);
  }
  SUBCASE("sigma_x poles are fixed for all parameters") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const auto k = kraus_exact_qubit({u(rng) * kPi / 2}, {u(rng) * kPi, u(rng) * 2 * kPi}, CouplingSpec{u(rng), 1.0});
      for (double s : {1.0, -1.0}) {
        const auto next = bloch_step(k, {s, 0.0, 0.0});
        if (std::abs(k.qubit->c + s * k.qubit->d) < 1e-6) continue;  // annihilated pole
        CHECK(std::abs(next.rx - s) < 1e-12);
        CHECK(std::abs(next.ry) < 1e-12);
        CHECK(std::abs(next.rz) < 1e-12);
      }
    }
  }
  SUBCASE("one step equals one matrix step") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const auto k = kraus_exact_qubit({u(rng) * kPi / 2}, {u(rng) * kPi, u(rng) * 2 * kPi}, CouplingSpec{u(rng), 1.0});
      const auto start = MeterState::projector(testutil::random_vector(rng, 2));
      const auto via_matrix = iterate_matrix(k, start, 1).final_state().bloch();
      const auto via_bloch = bloch_step(k, start.bloch());
      CHECK(std::abs(via_matrix.rx - via_bloch.rx) < 1e-12);
      CHECK(std::abs(via_matrix.ry - via_bloch.ry) < 1e-12);
      CHECK(std::abs(via_matrix.rz - via_bloch.rz) < 1e-12);
    }
  }
  SUBCASE("flow from near a pole ends on the dominant eigenvector") {
    const auto k = sample_kraus(1.0);
    BlochVector r{std::sqrt(0.99), 0.0, std::sqrt(0.01)};
    for (int i = 0; i < 2000; ++i) r = bloch_step(k, r);
    const auto dominant = MeterState::projector(k.spectrum.eigenvector(0)).bloch();
    CHECK(std::abs(std::abs(r.rx) - 1.0) < 1e-12);
    CHECK(std::abs(r.rx - dominant.rx) < 1e-12);
  }
}

TEST_CASE("fixed points") {
  const auto sx = MeterObservable::sigma_x();
  SUBCASE("real weak value: all marginal") {
    const auto k = kraus_first_order(cd(0.8), WeakValue{{0.5, 0.0}}, CouplingSpec{1e-3, 1.0}, sx);
    for (const auto& fp : classify_fixed_points(k).fixed_points) CHECK(fp.stability == Stability::MarginalUnitary);
  }
  SUBCASE("positive Im(w): the largest meter eigenvalue is stable") {
    const auto k = kraus_first_order(cd(0.8), WeakValue{{0.5, 0.3}}, CouplingSpec{1e-3, 1.0}, sx);
    const auto report = classify_fixed_points(k);
    REQUIRE(report.fixed_points.size() == 2);
    CHECK(report.fixed_points[0].stability == Stability::Stable);
    CHECK(report.fixed_points[1].stability == Stability::Unstable);
    CHECK(report.fixed_points[0].state.bloch().rx == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("exact qubit at phi = 1: stable pole read off the oracle") {
    const auto k = sample_kraus(1.0);
    const auto report = classify_fixed_points(k);
    REQUIRE(report.fixed_points.size() == 2);
    CHECK(report.fixed_points[0].stability == Stability::Stable);
    CHECK(report.fixed_points[1].stability == Stability::Unstable);
    const auto limit = oracle::oracle_run({kPi / 4}, {1.0, kPi / 7}, CouplingSpec{0.1, 1.0}, bloch_state(0.2, 0.5, -0.6),
                                          10000, oracle::ExactQubitInteraction{});
    CHECK(trace_distance(limit.final_state(), report.fixed_points[0].state) < 1e-10);
    CHECK(std::abs(std::abs(report.fixed_points[0].state.bloch().rx) - 1.0) < 1e-12);
  }
}

TEST_CASE("long-time state") {
  SUBCASE("generic start converges to the dominant projector") {
    const auto k = sample_kraus(1.0);
    const auto start = bloch_state(0.1, 0.7, 0.2);
    const auto limit = long_time_state(k, start);
    CHECK(trace_distance(limit, MeterState::projector(k.spectrum.eigenvector(0))) < 1e-14);
    CHECK(trace_distance(propagate(k, start, 5000), limit) < 1e-10);
  }
  SUBCASE("near-unitary spiral converges to a sigma_x pole") {
    const auto k = sample_kraus(kPi / 2 + 0.1);
    const auto start = bloch_state(1, 0, 1);
    const auto limit = long_time_state(k, start);
    CHECK(std::abs(std::abs(limit.bloch().rx) - 1.0) < 1e-12);
    const auto rec = iterate_matrix(k, start, 3000);
    CHECK(trace_distance(rec.final_state(), limit) < 1e-8);
    const auto oracle_rec = oracle::oracle_run({kPi / 4}, {kPi / 2 + 0.1, kPi / 7}, CouplingSpec{0.1, 1.0}, start,
                                               3000, oracle::ExactQubitInteraction{});
    CHECK(trace_distance(oracle_rec.final_state(), limit) < 1e-8);
  }
  SUBCASE("start on the unstable eigenvector") {
    const auto k = sample_kraus(1.0);
    const auto unstable = MeterState::projector(k.spectrum.eigenvector(1));
    CHECK(code_of([&] { long_time_state(k, unstable); }) == Errc::UnstableManifoldStart);
  }
  SUBCASE("degenerate moduli") {
    CHECK(code_of([&] { long_time_state(sample_kraus(kPi / 2), bloch_state(0, 0, 1)); }) == Errc::NoDominantEigenvalue);
  }
}

TEST_CASE("regimes") {
  CHECK(classify_regime(sample_kraus(kPi / 2)) == Regime::Unitary);
  CHECK(classify_regime(sample_kraus(0.0)) == Regime::Unitary);
  CHECK(classify_regime(sample_kraus(kPi / 2 + 0.1)) == Regime::NearUnitarySpiral);
  const Regime flow = classify_regime(sample_kraus(1.0));
  CHECK((flow == Regime::StableFlowHigh || flow == Regime::StableFlowLow));
  const double stable_rx = MeterState::projector(sample_kraus(1.0).spectrum.eigenvector(0)).bloch().rx;
  CHECK((flow == Regime::StableFlowHigh) == (stable_rx > 0));
  CHECK(code_of([] {
          const std::vector<double> diag{1, 0, -1};
          classify_regime(kraus_first_order(cd(1.0), WeakValue{{0.0, 1.0}}, CouplingSpec{0.01, 1.0},
                                            MeterObservable::diagonal(diag)));
        }) == Errc::DimensionMismatch);
}

TEST_CASE("stable pole flips across pi/2") {
  const double low = MeterState::projector(sample_kraus(1.0).spectrum.eigenvector(0)).bloch().rx;
  const double high = MeterState::projector(sample_kraus(kPi / 2 + 0.1).spectrum.eigenvector(0)).bloch().rx;
  CHECK(low * high < 0.0);
}

TEST_CASE("expectation values") {
  CHECK(expectation(pauli::z(), MeterState::from_bloch({0, 0, 1})) == doctest::Approx(1.0));
  const MeterState mixed = MeterState::from_density(ComplexMatrix::Identity(2, 2) / 2.0);
  CHECK(expectation(pauli::x(), mixed) == 0.0);
  ComplexMatrix bad = pauli::x();
  bad(0, 1) = cd(0, 1);
  CHECK(code_of([&] { expectation(bad, mixed); }) == Errc::NotHermitian);

  const SystemPreparation prep{kPi / 4};
  const PostSelection post{0.3, kPi / 7};
  const CouplingSpec coupling{0.001, 1.0};
  const auto start = MeterState::from_bloch({0, 0, 1});
  const auto k = kraus_exact_qubit(prep, post, coupling);
  const double kraus_value = expectation(pauli::x(), iterate_matrix(k, start, 1).final_state());
  const auto oracle_state = oracle::oracle_step(prep, post, coupling, start, oracle::ExactQubitInteraction{}).state;
  CHECK(std::abs(kraus_value - expectation(pauli::x(), oracle_state)) < 1e-12);
}

TEST_CASE("purity is preserved along trajectories") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto k = kraus_exact_qubit({u(rng) * kPi / 2}, {u(rng) * kPi, u(rng) * 2 * kPi}, CouplingSpec{u(rng), 1.0});
    const auto rec = iterate_matrix(k, MeterState::projector(testutil::random_vector(rng, 2)), 10000);
    for (const auto& r : rec.bloch()) CHECK(std::abs(r.norm() - 1.0) < 1e-8);
  }
}

TEST_CASE("convergence within 50 relaxation times") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    const PostSelection post{u(rng) * kPi, u(rng) * 2 * kPi};
    const auto k = kraus_exact_qubit({u(rng) * kPi / 2}, post, CouplingSpec{0.05 + u(rng), 1.0});
    const Tau tau = relaxation_time(k);
    if (tau.is_infinite() || tau.value() > 2000) continue;
    const auto start = MeterState::projector(testutil::random_vector(rng, 2));
    const auto limit = long_time_state(k, start);
    const ComplexVector dominant = k.spectrum.eigenvector(0);
    if (dominant.dot(start.rho() * dominant).real() < 1e-3) continue;
    const auto n = static_cast<std::uint64_t>(std::ceil(50 * tau.value()));
    CHECK(trace_distance(propagate(k, start, n), limit) < 1e-8);
    ++checked;
  }
}

TEST_CASE("at a critical angle rx does not drift") {
  const auto k = sample_kraus(0.0, 1e-3);
  const auto rec = iterate_matrix(k, bloch_state(0.4, 0.3, 0.5), 10000);
  const double rx0 = rec.steps.front().bloch().rx;
  for (const auto& r : rec.bloch()) CHECK(std::abs(r.rx - rx0) < 1e-10);
}
