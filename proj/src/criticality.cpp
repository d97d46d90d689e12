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

#include "weakcrit/criticality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "weakcrit/errors.hpp"
#include "weakcrit/parallel.hpp"

namespace weakcrit {

double Tau::value() const {
  if (infinite_) throw Error(Errc::InvalidArgument, "relaxation time is infinite");
  return value_;
}

Tau relaxation_time(const KrausOperator& k, const Tolerances& tol) {
  if (k.spectrum.size() < 2) throw Error(Errc::DimensionTooSmall, "relaxation time needs at least two eigenvalues");
  const double a = std::abs(k.spectrum.eigenvalues[0]);
  const double b = std::abs(k.spectrum.eigenvalues[1]);
  const double hi = std::max(a, b), lo = std::min(a, b);
  if (hi - lo <= tol.infinite_tau * hi) return Tau::infinite();
  if (lo == 0.0) return Tau::finite(0.0);
  // ln(hi^2 / lo^2) = 2 ln(1 + (hi - lo) / lo), accurate for tiny gaps.
  return Tau::finite(1.0 / (2.0 * std::log1p((hi - lo) / lo)));
}

Tau analytic_tau_first_order(const WeakValue& wv, const CouplingSpec& coupling, double o1, double o2) {
  if (o1 == o2) throw Error(Errc::DegenerateMeterObservable, "analytic relaxation time needs o1 != o2");
  const double rate = std::abs(2.0 * coupling.product() * wv.imag() * (o1 - o2));
  if (rate == 0.0) return Tau::infinite();
  return Tau::finite(1.0 / rate);
}

Tau analytic_tau_first_order(const KrausOperator& k) {
  if (k.form != KrausForm::FirstOrderGeneral || !k.weak_value || k.meter_eigenvalues.size() < 2)
    throw Error(Errc::InvalidArgument, "analytic relaxation time needs a first-order Kraus operator");
  return analytic_tau_first_order(*k.weak_value, CouplingSpec{k.coupling_product, 1.0}, k.meter_eigenvalues[0],
                                  k.meter_eigenvalues[1]);
}

std::vector<double> uniform_grid(double start, double stop, std::size_t points) {
  if (points == 0) throw Error(Errc::InvalidArgument, "grid needs at least one point");
  if (points == 1) return {start};
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = start + (stop - start) * (static_cast<double>(i) / static_cast<double>(points - 1));
  grid.back() = stop;
  return grid;
}

std::vector<double> log_spaced_offsets(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi >= lo) || per_decade < 1)
    throw Error(Errc::InvalidArgument, "window needs 0 < lo <= hi and a positive density");
  const double decades = std::log10(hi / lo);
  const auto count = static_cast<std::size_t>(std::floor(decades * per_decade + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = lo * std::pow(10.0, static_cast<double>(k) / per_decade);
  return out;
}

RelaxationProfile relaxation_profile(const KrausFamily& family, std::span<const double> grid, unsigned jobs,
                                     const Tolerances& tol) {
  RelaxationProfile profile;
  profile.samples.resize(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    profile.samples[i].phi = grid[i];
    try {
      profile.samples[i].tau = relaxation_time(family(grid[i]), tol);
    } catch (const Error&) {
      profile.samples[i].tau.reset();
    }
  });
  return profile;
}

RelaxationProfile relaxation_profile(const ProtocolConfig& config, std::span<const double> grid, unsigned jobs) {
  return relaxation_profile([&config](double phi) { return build_kraus(config, phi); }, grid, jobs, config.tol);
}

namespace {

void validate_grid(std::span<const double> grid) {
  if (grid.empty()) throw Error(Errc::InvalidArgument, "phi grid is empty");
  constexpr double kSlack = 1e-12;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < -kSlack || grid[i] > std::numbers::pi + kSlack)
      throw Error(Errc::InvalidArgument, "phi grid leaves [0, pi]", grid[i]);
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(Errc::InvalidArgument, "phi grid is not strictly increasing", grid[i]);
  }
}

}  // namespace

SweepResult sweep_phi(const SweepConfig& config, std::span<const double> grid) {
  validate_grid(grid);
  std::vector<NamedObservable> observables = config.observables;
  if (observables.empty()) observables.push_back({"sigma_x", pauli::x()});

  SweepResult result;
  for (const auto& obs : observables) result.observable_names.push_back(obs.name);
  result.rows.resize(grid.size());

  const SystemPreparation prep{config.protocol.theta};
  parallel_for(grid.size(), config.jobs, [&](std::size_t i) {
    SweepRow& row = result.rows[i];
    row.phi = grid[i];
    for (std::uint64_t n : config.iterations)
      row.points.push_back(SweepPoint{n, std::vector<std::optional<double>>(observables.size())});

    try {
      row.im_weak_value = sigma_z_weak_value(prep, PostSelection{grid[i], config.protocol.alpha}, config.protocol.tol).imag();
    } catch (const Error& e) {
      row.error = std::string(to_string(e.code()));
    }

    std::optional<KrausOperator> k;
    try {
      k = build_kraus(config.protocol, grid[i]);
    } catch (const Error& e) {
      row.error = std::string(to_string(e.code()));
      return;
    }
    if (k->spectrum.size() >= 1) row.abs_lambda_1 = std::abs(k->spectrum.eigenvalues[0]);
    if (k->spectrum.size() >= 2) {
      row.abs_lambda_2 = std::abs(k->spectrum.eigenvalues[1]);
      row.tau = relaxation_time(*k, config.protocol.tol);
    }

    for (auto& point : row.points) {
      try {
        const MeterState state = propagate(*k, config.initial, point.n, config.protocol.tol);
        for (std::size_t o = 0; o < observables.size(); ++o)
          point.expectations[o] = expectation(observables[o].matrix, state, config.protocol.tol);
      } catch (const Error& e) {
        row.error = std::string(to_string(e.code()));
      }
    }
  });
  return result;
}

std::string_view to_string(Side side) { return side == Side::Below ? "below" : "above"; }

ExponentFit evaluate_exponent(const KrausFamily& family, double phi_c, Side side, std::span<const double> offsets,
                              const Tolerances& tol) {
  if (offsets.size() < 2) throw Error(Errc::InvalidArgument, "fit window needs at least two offsets");
  ExponentFit fit;
  fit.phi_c = phi_c;
  fit.side = side;
  const double direction = side == Side::Above ? 1.0 : -1.0;
  for (double offset : offsets) {
    if (!(offset > 0.0)) throw Error(Errc::InvalidArgument, "fit offsets must be positive", offset);
    const double phi = phi_c + direction * offset;
    const Tau tau = relaxation_time(family(phi), tol);
    if (tau.is_infinite())
      throw Error(Errc::WindowContainsCriticalPoint, "relaxation time diverges inside the fit window", phi);
    fit.offsets.push_back(offset);
    fit.taus.push_back(tau.value());
  }

  const auto n = static_cast<double>(fit.offsets.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < fit.offsets.size(); ++i) {
    mean_x += std::log(fit.offsets[i]);
    mean_y += std::log(fit.taus[i]);
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < fit.offsets.size(); ++i) {
    const double dx = std::log(fit.offsets[i]) - mean_x;
    const double dy = std::log(fit.taus[i]) - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
  fit.nu = -fit.slope;
  return fit;
}

ExponentFit fit_exponent(const KrausFamily& family, double phi_c, Side side, std::span<const double> offsets,
                         const Tolerances& tol) {
  ExponentFit fit = evaluate_exponent(family, phi_c, side, offsets, tol);
  if (fit.r_squared < tol.fit_r_squared) {
    std::ostringstream msg;
    msg << "log-log fit below r^2 threshold (phi_c=" << fit.phi_c << ", side=" << to_string(side)
        << ", slope=" << fit.slope << ", r_squared=" << fit.r_squared << ")";
    throw Error(Errc::PoorFit, msg.str(), fit.r_squared);
  }
  return fit;
}

ExponentFit fit_exponent(const ProtocolConfig& config, double phi_c, Side side, std::span<const double> offsets) {
  constexpr double kSlack = 1e-12;
  if (offsets.empty()) throw Error(Errc::InvalidArgument, "fit window needs at least two offsets");
  const double reach = side == Side::Above ? phi_c + offsets.back() : phi_c - offsets.back();
  if (reach < -kSlack || reach > std::numbers::pi + kSlack)
    throw Error(Errc::InvalidArgument, "fit window leaves [0, pi]; use the one-sided window", reach);
  return fit_exponent([&config](double phi) { return build_kraus(config, phi); }, phi_c, side, offsets, config.tol);
}

KrausFamily synthetic_quadratic_family(std::vector<double> critical_angles) {
  if (critical_angles.empty()) throw Error(Errc::InvalidArgument, "synthetic family needs at least one critical angle");
  return [angles = std::move(critical_angles)](double phi) {
    double delta = std::numeric_limits<double>::infinity();
    for (double c : angles) delta = std::min(delta, std::abs(phi - c));
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = std::sqrt(1.0 + delta * delta);
    m(1, 1) = 1.0;
    return kraus_explicit(m);
  };
}

double im_weak_value_slope(const SystemPreparation& prep, double alpha, double phi_c, Side side, double step) {
  const double h = side == Side::Above ? step : -step;
  const double at = sigma_z_weak_value(prep, PostSelection{phi_c, alpha}).imag();
  const double moved = sigma_z_weak_value(prep, PostSelection{phi_c + h, alpha}).imag();
  return (moved - at) / h;
}

}  // namespace weakcrit
