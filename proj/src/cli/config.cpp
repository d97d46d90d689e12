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

#include "weakcrit/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "weakcrit/cli/angle_expr.hpp"
#include "weakcrit/errors.hpp"

namespace weakcrit::cli {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream in(text);
  while (std::getline(in, current, sep)) parts.push_back(current);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& raw, const char* what) {
  const std::string s = trim(raw);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError(std::string("invalid ") + what + ": '" + raw + "'");
  return value;
}

double parse_real(const std::string& raw, const char* what) {
  const std::string s = trim(raw);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value))
    throw UsageError(std::string("invalid ") + what + ": '" + raw + "'");
  return value;
}

double angle_field(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_angle(v.get<std::string>());
  throw UsageError("field '" + key + "' must be a number or an angle expression");
}

double real_field(const json& v, const std::string& key) {
  if (!v.is_number()) throw UsageError("field '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t count_field(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw UsageError("field '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double* tolerance_slot(Tolerances& tol, const std::string& name) {
  static const std::map<std::string, double Tolerances::*> slots = {
      {"verification", &Tolerances::verification},
      {"hermiticity", &Tolerances::hermiticity},
      {"overlap_floor", &Tolerances::overlap_floor},
      {"weakness_bound", &Tolerances::weakness_bound},
      {"marginal_band_factor", &Tolerances::marginal_band_factor},
      {"exact_degeneracy", &Tolerances::exact_degeneracy},
      {"infinite_tau", &Tolerances::infinite_tau},
      {"starvation_floor", &Tolerances::starvation_floor},
      {"convergence", &Tolerances::convergence},
      {"unstable_start", &Tolerances::unstable_start},
      {"critical_zero", &Tolerances::critical_zero},
      {"bisection_width", &Tolerances::bisection_width},
      {"fit_r_squared", &Tolerances::fit_r_squared},
      {"spiral_rotation_rad", &Tolerances::spiral_rotation_rad},
  };
  const auto it = slots.find(name);
  return it == slots.end() ? nullptr : &(tol.*(it->second));
}

const char* const kToleranceNames[] = {
    "verification",     "hermiticity",     "overlap_floor", "weakness_bound", "marginal_band_factor",
    "exact_degeneracy", "infinite_tau",    "starvation_floor", "convergence", "unstable_start",
    "critical_zero",    "bisection_width", "fit_r_squared",    "spiral_rotation_rad",
};

InteractionKind parse_interaction(const std::string& s) {
  if (s == "exact_qubit") return InteractionKind::ExactQubit;
  if (s == "first_order") return InteractionKind::FirstOrder;
  if (s == "synthetic_quadratic") return InteractionKind::SyntheticQuadratic;
  throw UsageError("unknown interaction '" + s + "' (exact_qubit, first_order, synthetic_quadratic)");
}

std::vector<std::complex<double>> initial_from_json(const json& v) {
  if (v.is_string()) {
    std::vector<std::complex<double>> out;
    for (double x : parse_reals(v.get<std::string>())) out.emplace_back(x, 0.0);
    return out;
  }
  if (!v.is_array()) throw UsageError("field 'initial' must be an array or a comma list");
  std::vector<std::complex<double>> out;
  for (const auto& e : v) {
    if (e.is_number()) {
      out.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      out.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      throw UsageError("entries of 'initial' must be numbers or [re, im] pairs");
    }
  }
  return out;
}

bool all_real(const std::vector<std::complex<double>>& v) {
  for (const auto& z : v)
    if (z.imag() != 0.0) return false;
  return true;
}

bool is_bloch(const RunConfig& c) { return c.meter_dimension() == 2 && c.initial.size() == 3 && all_real(c.initial); }

}  // namespace

std::string_view to_string(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::ExactQubit: return "exact_qubit";
    case InteractionKind::FirstOrder: return "first_order";
    case InteractionKind::SyntheticQuadratic: return "synthetic_quadratic";
  }
  return "unknown";
}

PhiGridSpec parse_phi_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw UsageError("phi grid must be start:stop:points, got '" + text + "'");
  PhiGridSpec spec;
  spec.start = parse_angle(trim(parts[0]));
  spec.stop = parse_angle(trim(parts[1]));
  spec.points = parse_u64(parts[2], "phi grid point count");
  return spec;
}

FitWindowSpec parse_window(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw UsageError("window must be lo:hi:per-decade, got '" + text + "'");
  FitWindowSpec spec;
  spec.lo = parse_real(parts[0], "window lower offset");
  spec.hi = parse_real(parts[1], "window upper offset");
  const auto per = parse_u64(parts[2], "window density");
  if (per > 100000) throw UsageError("window density too large");
  spec.per_decade = static_cast<int>(per);
  return spec;
}

std::vector<std::uint64_t> parse_counts(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& p : split(text, ',')) out.push_back(parse_u64(p, "iteration count"));
  if (out.empty()) throw UsageError("empty iteration list");
  return out;
}

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(parse_real(p, "number"));
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

void apply_json(RunConfig& c, const json& doc) {
  if (!doc.is_object()) throw UsageError("configuration must be a JSON object");
  const bool has_gt = doc.contains("gt");
  if (has_gt && (doc.contains("gamma_per_time") || doc.contains("t_time")))
    throw UsageError("give either 'gt' or 'gamma_per_time'/'t_time', not both");
  for (const auto& [key, v] : doc.items()) {
    if (key == "config_version") {
      if (!v.is_number_integer() || v.get<int>() != kConfigVersion)
        throw UsageError("unsupported config_version (expected " + std::to_string(kConfigVersion) + ")");
    } else if (key == "theta_rad") {
      c.theta = angle_field(v, key);
    } else if (key == "alpha_rad") {
      c.alpha = angle_field(v, key);
    } else if (key == "phi_rad") {
      c.phi = angle_field(v, key);
    } else if (key == "gamma_per_time") {
      c.gamma = real_field(v, key);
    } else if (key == "t_time") {
      c.t = real_field(v, key);
    } else if (key == "gt") {
      c.gamma = real_field(v, key);
      c.t = 1.0;
    } else if (key == "interaction") {
      if (!v.is_string()) throw UsageError("field 'interaction' must be a string");
      c.interaction = parse_interaction(v.get<std::string>());
    } else if (key == "meter_dim") {
      c.meter_dim = static_cast<std::size_t>(count_field(v, key));
    } else if (key == "meter_obs") {
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        c.meter_obs_diagonal = s == "sigma_x" ? std::vector<double>{} : parse_reals(s);
      } else if (v.is_array()) {
        c.meter_obs_diagonal.clear();
        for (const auto& e : v) c.meter_obs_diagonal.push_back(real_field(e, key));
        if (c.meter_obs_diagonal.empty()) throw UsageError("field 'meter_obs' must not be empty");
      } else {
        throw UsageError("field 'meter_obs' must be \"sigma_x\" or a list of diagonal entries");
      }
    } else if (key == "initial") {
      c.initial = initial_from_json(v);
    } else if (key == "n") {
      c.n.clear();
      if (v.is_array()) {
        for (const auto& e : v) c.n.push_back(count_field(e, key));
      } else if (v.is_string()) {
        c.n = parse_counts(v.get<std::string>());
      } else {
        c.n.push_back(count_field(v, key));
      }
    } else if (key == "phi_grid") {
      if (v.is_string()) {
        c.phi_grid = parse_phi_grid(v.get<std::string>());
      } else if (v.is_object()) {
        for (const auto& [k2, v2] : v.items()) {
          if (k2 == "start_rad") c.phi_grid.start = angle_field(v2, k2);
          else if (k2 == "stop_rad") c.phi_grid.stop = angle_field(v2, k2);
          else if (k2 == "points") c.phi_grid.points = static_cast<std::size_t>(count_field(v2, k2));
          else throw UsageError("unknown field 'phi_grid." + k2 + "'");
        }
      } else {
        throw UsageError("field 'phi_grid' must be \"start:stop:points\" or an object");
      }
    } else if (key == "window") {
      if (v.is_string()) {
        c.window = parse_window(v.get<std::string>());
      } else if (v.is_object()) {
        for (const auto& [k2, v2] : v.items()) {
          if (k2 == "lo_rad") c.window.lo = real_field(v2, k2);
          else if (k2 == "hi_rad") c.window.hi = real_field(v2, k2);
          else if (k2 == "per_decade") c.window.per_decade = static_cast<int>(count_field(v2, k2));
          else throw UsageError("unknown field 'window." + k2 + "'");
        }
      } else {
        throw UsageError("field 'window' must be \"lo:hi:per-decade\" or an object");
      }
    } else if (key == "observables") {
      if (!v.is_array()) throw UsageError("field 'observables' must be an array of names");
      c.observables.clear();
      for (const auto& e : v) {
        if (!e.is_string()) throw UsageError("observable names must be strings");
        c.observables.push_back(e.get<std::string>());
      }
    } else if (key == "out") {
      if (!v.is_string()) throw UsageError("field 'out' must be a path");
      c.out = v.get<std::string>();
    } else if (key == "jobs") {
      c.jobs = static_cast<unsigned>(count_field(v, key));
    } else if (key == "seed") {
      c.seed = count_field(v, key);
    } else if (key == "trials") {
      c.trials = static_cast<std::size_t>(count_field(v, key));
    } else if (key == "max_steps") {
      c.max_steps = static_cast<std::size_t>(count_field(v, key));
    } else if (key == "critical_grid") {
      c.critical_grid = static_cast<std::size_t>(count_field(v, key));
    } else if (key == "debug_flip_d") {
      if (!v.is_boolean()) throw UsageError("field 'debug_flip_d' must be a boolean");
      c.debug_flip_d = v.get<bool>();
    } else if (key == "tolerances") {
      if (!v.is_object()) throw UsageError("field 'tolerances' must be an object");
      for (const auto& [k2, v2] : v.items()) {
        double* slot = tolerance_slot(c.tol, k2);
        if (!slot) throw UsageError("unknown tolerance '" + k2 + "'");
        *slot = real_field(v2, k2);
      }
    } else {
      throw UsageError("unknown field '" + key + "'");
    }
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  RunConfig config;
  apply_json(config, doc);
  return config;
}

std::size_t RunConfig::meter_dimension() const {
  if (meter_dim) return *meter_dim;
  return meter_obs_diagonal.empty() ? 2 : meter_obs_diagonal.size();
}

MeterObservable RunConfig::meter_observable() const {
  if (meter_obs_diagonal.empty()) return MeterObservable::sigma_x();
  return MeterObservable::diagonal(meter_obs_diagonal);
}

std::vector<std::string> RunConfig::sweep_observables() const {
  if (!observables.empty()) return observables;
  return {meter_dimension() == 2 && meter_obs_diagonal.empty() ? "sigma_x" : "meter_obs"};
}

ProtocolConfig RunConfig::protocol() const {
  ProtocolConfig p;
  p.theta = theta;
  p.alpha = alpha;
  p.coupling = CouplingSpec{gamma, t};
  p.tol = tol;
  p.sign = debug_flip_d ? DCoefficientSign::Flipped : DCoefficientSign::FromUnitary;
  if (interaction == InteractionKind::FirstOrder) {
    p.form = KrausForm::FirstOrderGeneral;
    p.meter = meter_observable();
  } else {
    p.form = KrausForm::ExactQubit;
  }
  return p;
}

KrausFamily RunConfig::family() const {
  if (interaction == InteractionKind::SyntheticQuadratic) {
    const auto crit = find_critical_angles(SystemPreparation{theta}, alpha, critical_grid, tol);
    if (crit.all_critical || crit.angles.empty())
      throw UsageError("synthetic_quadratic needs isolated critical angles of the configured weak value");
    return synthetic_quadratic_family(crit.angles);
  }
  return [p = protocol()](double phi) { return build_kraus(p, phi); };
}

MeterState RunConfig::initial_state() const {
  const std::size_t dim = meter_dimension();
  if (initial.empty()) {
    if (dim == 2) return MeterState::from_bloch({0.0, 0.0, 1.0}, tol);
    return MeterState::projector(ComplexVector::Ones(static_cast<Eigen::Index>(dim)));
  }
  if (is_bloch(*this)) {
    BlochVector r{initial[0].real(), initial[1].real(), initial[2].real()};
    const double norm = r.norm();
    if (!(norm > 0.0)) throw UsageError("initial Bloch vector must be nonzero");
    return MeterState::from_bloch({r.rx / norm, r.ry / norm, r.rz / norm}, tol);
  }
  if (initial.size() != dim)
    throw UsageError("initial state needs " + std::to_string(dim) + " amplitudes" +
                     (dim == 2 ? " or a 3-component Bloch vector" : ""));
  ComplexVector v(static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < dim; ++j) v(static_cast<Eigen::Index>(j)) = initial[j];
  if (!(v.norm() > 0.0)) throw UsageError("initial amplitudes must not all vanish");
  return MeterState::projector(v);
}

bool RunConfig::initial_rescaled() const {
  if (initial.empty()) return false;
  double sq = 0.0;
  for (const auto& z : initial) sq += std::norm(z);
  return std::abs(std::sqrt(sq) - 1.0) > tol.verification;
}

void validate(const RunConfig& c) {
  if (!std::isfinite(c.theta) || !std::isfinite(c.alpha)) throw UsageError("theta and alpha must be finite");
  if (!std::isfinite(c.gamma) || !std::isfinite(c.t) || c.gamma < 0.0 || c.t < 0.0)
    throw UsageError("gamma and t must be finite and non-negative");
  if (c.phi && !std::isfinite(*c.phi)) throw UsageError("phi must be finite");
  const std::size_t dim = c.meter_dimension();
  if (dim < 2) throw UsageError("meter_dim must be at least 2");
  if (!c.meter_obs_diagonal.empty() && c.meter_obs_diagonal.size() != dim)
    throw UsageError("meter_obs has " + std::to_string(c.meter_obs_diagonal.size()) + " entries but meter_dim is " +
                     std::to_string(dim));
  if (c.meter_obs_diagonal.empty() && dim != 2) throw UsageError("sigma_x meter observable needs meter_dim 2");
  for (double o : c.meter_obs_diagonal)
    if (!std::isfinite(o)) throw UsageError("meter_obs entries must be finite");
  if (c.interaction == InteractionKind::ExactQubit && (dim != 2 || !c.meter_obs_diagonal.empty()))
    throw UsageError("exact_qubit interaction needs a qubit meter with sigma_x");
  if (c.interaction == InteractionKind::FirstOrder && c.gt() > c.tol.weakness_bound)
    throw UsageError("gt exceeds the weakness bound of the first_order interaction");
  if (c.phi_grid.points == 0) throw UsageError("phi grid is empty");
  if (!std::isfinite(c.phi_grid.start) || !std::isfinite(c.phi_grid.stop) || c.phi_grid.start > c.phi_grid.stop)
    throw UsageError("phi grid needs start <= stop");
  if (c.phi_grid.points == 1 && c.phi_grid.start != c.phi_grid.stop)
    throw UsageError("a single-point phi grid needs start == stop");
  if (c.phi_grid.points > 1 && c.phi_grid.start == c.phi_grid.stop)
    throw UsageError("phi grid with several points needs start < stop");
  if (c.phi_grid.start < 0.0 || c.phi_grid.stop > std::numbers::pi + 1e-12)
    throw UsageError("phi grid must lie inside [0, pi]");
  if (!(c.window.lo > 0.0) || !(c.window.hi > c.window.lo) || c.window.per_decade < 1)
    throw UsageError("window needs 0 < lo < hi and per-decade >= 1");
  if (c.n.empty()) throw UsageError("iteration list is empty");
  for (const auto& name : c.observables) {
    if (name == "meter_obs") continue;
    if (name == "sigma_x" || name == "sigma_y" || name == "sigma_z") {
      if (dim != 2) throw UsageError("observable '" + name + "' needs a qubit meter");
      continue;
    }
    throw UsageError("unknown observable '" + name + "' (sigma_x, sigma_y, sigma_z, meter_obs)");
  }
  if (c.trials == 0) throw UsageError("trials must be positive");
  if (c.max_steps == 0) throw UsageError("max_steps must be positive");
  if (c.critical_grid < 16) throw UsageError("critical_grid must be at least 16");
  if (!c.initial.empty() && !is_bloch(c) && c.initial.size() != dim)
    throw UsageError("initial state needs " + std::to_string(dim) + " amplitudes" +
                     (dim == 2 ? " or a 3-component Bloch vector" : ""));
}

json to_json(const RunConfig& c) {
  json j;
  j["config_version"] = kConfigVersion;
  j["theta_rad"] = c.theta;
  j["alpha_rad"] = c.alpha;
  if (c.phi) j["phi_rad"] = *c.phi;
  j["gamma_per_time"] = c.gamma;
  j["t_time"] = c.t;
  j["interaction"] = std::string(to_string(c.interaction));
  j["meter_dim"] = c.meter_dimension();
  if (c.meter_obs_diagonal.empty()) j["meter_obs"] = "sigma_x";
  else j["meter_obs"] = c.meter_obs_diagonal;
  json init = json::array();
  for (const auto& z : c.initial) {
    if (z.imag() == 0.0) init.push_back(z.real());
    else init.push_back(json::array({z.real(), z.imag()}));
  }
  j["initial"] = init;
  j["n"] = c.n;
  j["phi_grid"] = {{"start_rad", c.phi_grid.start}, {"stop_rad", c.phi_grid.stop}, {"points", c.phi_grid.points}};
  j["window"] = {{"lo_rad", c.window.lo}, {"hi_rad", c.window.hi}, {"per_decade", c.window.per_decade}};
  j["observables"] = c.sweep_observables();
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["max_steps"] = c.max_steps;
  j["critical_grid"] = c.critical_grid;
  j["debug_flip_d"] = c.debug_flip_d;
  json tol = json::object();
  Tolerances copy = c.tol;
  for (const char* name : kToleranceNames) tol[name] = *tolerance_slot(copy, name);
  j["tolerances"] = tol;
  return j;
}

}  // namespace weakcrit::cli
