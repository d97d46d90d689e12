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

#include "weakcrit/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "weakcrit/cli/angle_expr.hpp"
#include "weakcrit/cli/csv.hpp"
#include "weakcrit/criticality.hpp"
#include "weakcrit/dynamics.hpp"
#include "weakcrit/errors.hpp"
#include "weakcrit/oracle.hpp"
#include "weakcrit/parallel.hpp"

namespace weakcrit::cli {

using nlohmann::json;

namespace {

void require_kraus_interaction(const RunConfig& c, const char* command) {
  if (c.interaction == InteractionKind::SyntheticQuadratic)
    throw UsageError(std::string(command) + " needs the exact_qubit or first_order interaction");
}

std::vector<double> phi_grid(const RunConfig& c) {
  return uniform_grid(c.phi_grid.start, c.phi_grid.stop, c.phi_grid.points);
}

json bloch_json(const BlochVector& r) { return json::array({r.rx, r.ry, r.rz}); }

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

double trajectory_phi(const RunConfig& c) {
  if (c.phi) return *c.phi;
  if (c.phi_grid.points == 1) return c.phi_grid.start;
  throw UsageError("trajectory needs phi_rad (or --phi) or a single-point phi grid");
}

}  // namespace

void write_sweep(const RunConfig& c, std::ostream& out) {
  require_kraus_interaction(c, "sweep");
  SweepConfig sc;
  sc.protocol = c.protocol();
  sc.initial = c.initial_state();
  sc.iterations = c.n;
  sc.jobs = c.jobs;
  for (const auto& name : c.sweep_observables()) {
    ComplexMatrix m;
    if (name == "sigma_x") m = pauli::x<double>();
    else if (name == "sigma_y") m = pauli::y<double>();
    else if (name == "sigma_z") m = pauli::z<double>();
    else m = c.meter_observable().matrix();
    sc.observables.push_back({name, m});
  }
  const auto grid = phi_grid(c);
  const SweepResult result = sweep_phi(sc, grid);

  CsvWriter csv(out);
  std::vector<std::string> header{"phi", "n"};
  for (const auto& name : result.observable_names) header.push_back("exp_" + name);
  for (const char* h : {"abs_lambda_1", "abs_lambda_2", "im_weak_value", "tau", "is_infinite"}) header.emplace_back(h);
  csv.header(header);
  for (const auto& row : result.rows) {
    for (const auto& point : row.points) {
      csv.field(row.phi).integer(point.n);
      for (const auto& e : point.expectations) csv.field(e);
      csv.field(row.abs_lambda_1).field(row.abs_lambda_2).field(row.im_weak_value);
      if (!row.tau) {
        csv.field(std::optional<double>{}).field(std::string_view{});
      } else if (row.tau->is_infinite()) {
        csv.field(std::optional<double>{}).integer(1);
      } else {
        csv.field(row.tau->value()).integer(0);
      }
      csv.end_row();
    }
  }
}

json write_trajectory(const RunConfig& c, std::ostream& out) {
  require_kraus_interaction(c, "trajectory");
  const double phi = trajectory_phi(c);
  const std::uint64_t n = *std::max_element(c.n.begin(), c.n.end());
  if (n > 100'000'000) throw UsageError("trajectory length is limited to 1e8 steps");
  const KrausOperator k = build_kraus(c.protocol(), phi);
  const MeterState initial = c.initial_state();
  const TrajectoryRecord record = iterate_matrix(k, initial, static_cast<std::size_t>(n), c.tol);

  CsvWriter csv(out);
  const std::size_t dim = k.dimension();
  if (dim == 2) {
    csv.header({"step", "rx", "ry", "rz", "purity"});
    for (std::size_t s = 0; s < record.steps.size(); ++s) {
      const auto r = record.steps[s].bloch();
      csv.integer(s).field(r.rx).field(r.ry).field(r.rz).field(record.steps[s].purity());
      csv.end_row();
    }
  } else {
    std::vector<std::string> header{"step", "purity"};
    for (std::size_t j = 0; j < dim; ++j) header.push_back("pop_" + std::to_string(j));
    csv.header(header);
    for (std::size_t s = 0; s < record.steps.size(); ++s) {
      const auto& rho = record.steps[s].rho();
      csv.integer(s).field(record.steps[s].purity());
      for (std::size_t j = 0; j < dim; ++j)
        csv.field(rho(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)).real());
      csv.end_row();
    }
  }

  json side;
  side["phi_rad"] = phi;
  side["steps"] = record.steps.size() - 1;
  side["converged_at"] = record.converged_at ? json(*record.converged_at) : json(nullptr);
  side["starved_at"] = record.starved_at ? json(*record.starved_at) : json(nullptr);
  side["d_sign"] = c.debug_flip_d ? "flipped" : "from_unitary";
  side["initial_rescaled"] = c.initial_rescaled();
  json fps = json::array();
  for (const auto& fp : classify_fixed_points(k, c.tol).fixed_points) {
    json f;
    f["index"] = fp.index;
    f["eigenvalue"] = complex_json(fp.eigenvalue);
    f["abs_eigenvalue"] = std::abs(fp.eigenvalue);
    f["stability"] = std::string(to_string(fp.stability));
    if (dim == 2) f["bloch"] = bloch_json(fp.state.bloch());
    fps.push_back(f);
  }
  side["fixed_points"] = fps;
  if (dim == 2) {
    side["final_bloch"] = bloch_json(record.final_state().bloch());
    try {
      side["regime"] = std::string(to_string(classify_regime(k, c.tol)));
    } catch (const Error& e) {
      side["regime"] = nullptr;
    }
  }
  try {
    const MeterState limit = long_time_state(k, initial, c.tol);
    json lim;
    if (dim == 2) lim["bloch"] = bloch_json(limit.bloch());
    lim["trace_distance_to_final"] = trace_distance(limit, record.final_state());
    side["long_time_state"] = lim;
  } catch (const Error& e) {
    side["long_time_state"] = {{"error", std::string(to_string(e.code()))}};
  }
  side["config"] = to_json(c);
  return side;
}

void write_relaxation(const RunConfig& c, std::ostream& out) {
  const auto grid = phi_grid(c);
  const RelaxationProfile profile = relaxation_profile(c.family(), grid, c.jobs, c.tol);
  CsvWriter csv(out);
  csv.header({"phi", "tau", "is_infinite"});
  for (const auto& s : profile.samples) {
    csv.field(s.phi);
    if (!s.tau) csv.field(std::optional<double>{}).field(std::string_view{});
    else if (s.tau->is_infinite()) csv.field(std::optional<double>{}).integer(1);
    else csv.field(s.tau->value()).integer(0);
    csv.end_row();
  }
}

FitReport run_fit(const RunConfig& c) {
  const auto crit = find_critical_angles(SystemPreparation{c.theta}, c.alpha, c.critical_grid, c.tol);
  FitReport report;
  if (crit.all_critical) {
    report.failures.push_back({{"error", "AllCritical"}, {"message", "Im of the weak value vanishes for every phi"}});
    return report;
  }
  const KrausFamily family = c.family();
  const auto offsets = log_spaced_offsets(c.window.lo, c.window.hi, c.window.per_decade);
  struct Job {
    double phi_c;
    Side side;
  };
  std::vector<Job> jobs;
  for (double phi_c : crit.angles) {
    if (phi_c - c.window.hi >= 0.0) jobs.push_back({phi_c, Side::Below});
    if (phi_c + c.window.hi <= std::numbers::pi) jobs.push_back({phi_c, Side::Above});
  }
  const json window = {{"lo_rad", c.window.lo}, {"hi_rad", c.window.hi}, {"per_decade", c.window.per_decade}};
  std::vector<json> records(jobs.size());
  std::vector<bool> failed(jobs.size(), false);
  parallel_for(jobs.size(), c.jobs, [&](std::size_t i) {
    json r;
    r["phi_c"] = jobs[i].phi_c;
    r["side"] = std::string(to_string(jobs[i].side));
    r["window"] = window;
    const auto fill = [&r](const ExponentFit& fit) {
      r["slope"] = fit.slope;
      r["intercept"] = fit.intercept;
      r["r_squared"] = fit.r_squared;
      r["nu"] = fit.nu;
      json pts = json::array();
      for (std::size_t p = 0; p < fit.offsets.size(); ++p) pts.push_back(json::array({fit.offsets[p], fit.taus[p]}));
      r["points"] = pts;
    };
    try {
      fill(fit_exponent(family, jobs[i].phi_c, jobs[i].side, offsets, c.tol));
      r["status"] = "ok";
    } catch (const Error& e) {
      failed[i] = true;
      r["status"] = std::string(to_string(e.code()));
      r["message"] = e.what();
      if (e.code() == Errc::PoorFit) fill(evaluate_exponent(family, jobs[i].phi_c, jobs[i].side, offsets, c.tol));
    }
    records[i] = std::move(r);
  });
  for (std::size_t i = 0; i < records.size(); ++i) {
    report.records.push_back(records[i]);
    if (failed[i]) report.failures.push_back(records[i]);
  }
  if (jobs.empty())
    report.failures.push_back({{"error", "WindowContainsCriticalPoint"}, {"message", "no side of any critical angle fits the window"}});
  return report;
}

json critical_angles_report(const RunConfig& c) {
  const auto crit = find_critical_angles(SystemPreparation{c.theta}, c.alpha, c.critical_grid, c.tol);
  return {{"theta_rad", c.theta}, {"alpha_rad", c.alpha}, {"all_critical", crit.all_critical}, {"angles", crit.angles}};
}

namespace {

struct Trial {
  double theta = 0.0;
  double phi = 0.0;
  double alpha = 0.0;
  double gt = 0.0;
  std::size_t n = 0;
  ComplexVector initial;
};

json trial_json(const Trial& t) {
  json amps = json::array();
  for (Eigen::Index j = 0; j < t.initial.size(); ++j) amps.push_back(complex_json(t.initial(j)));
  return {{"theta_rad", t.theta}, {"phi_rad", t.phi}, {"alpha_rad", t.alpha}, {"gt", t.gt}, {"n", t.n}, {"initial", amps}};
}

/// Largest per-step trace distance; a length mismatch counts as 1.
double compare(const TrajectoryRecord& a, const TrajectoryRecord& b) {
  double worst = a.steps.size() == b.steps.size() ? 0.0 : 1.0;
  const std::size_t len = std::min(a.steps.size(), b.steps.size());
  for (std::size_t s = 0; s < len; ++s) worst = std::max(worst, trace_distance(a.steps[s], b.steps[s]));
  return worst;
}

struct SuiteOutcome {
  json summary;
  json worst;
  bool pass = false;
};

template <typename Draw, typename Run>
SuiteOutcome run_suite(const char* name, std::size_t trials, double threshold, Draw&& draw, Run&& run) {
  double worst_distance = -1.0;
  Trial worst_trial;
  for (std::size_t i = 0; i < trials; ++i) {
    const Trial t = draw();
    const double d = run(t);
    if (!(d <= worst_distance)) {  // NaN also becomes the worst
      worst_distance = d;
      worst_trial = t;
    }
  }
  SuiteOutcome o;
  o.pass = worst_distance <= threshold;
  o.worst = trial_json(worst_trial);
  o.summary = {{"name", name},
               {"trials", trials},
               {"threshold", threshold},
               {"max_trace_distance", std::isfinite(worst_distance) ? json(worst_distance) : json(nullptr)},
               {"pass", o.pass},
               {"worst", o.worst}};
  return o;
}

}  // namespace

OracleReport run_oracle_check(const RunConfig& c) {
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr double kOverlapReject = 0.05;
  constexpr double kExactThreshold = 1e-12;
  const double pi = std::numbers::pi;

  const auto draw_angles = [&](Trial& t) {
    do {
      t.theta = unit(rng) * pi / 2.0;
      t.phi = unit(rng) * pi;
      t.alpha = unit(rng) * 2.0 * pi;
    } while (std::abs(selection_overlap({t.theta}, {t.phi, t.alpha})) < kOverlapReject);
  };
  const auto draw_state = [&](std::size_t dim) {
    ComplexVector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = {gauss(rng), gauss(rng)};
    return ComplexVector(v / v.norm());
  };
  const auto draw_steps = [&] {
    return 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(c.max_steps)) % c.max_steps;
  };
  const DCoefficientSign sign = c.debug_flip_d ? DCoefficientSign::Flipped : DCoefficientSign::FromUnitary;

  const SuiteOutcome exact = run_suite(
      "exact_qubit", c.trials, kExactThreshold,
      [&] {
        Trial t;
        draw_angles(t);
        t.gt = 0.001 + unit(rng) * (1.0 - 0.001);
        t.n = draw_steps();
        t.initial = draw_state(2);
        return t;
      },
      [&](const Trial& t) {
        const SystemPreparation prep{t.theta};
        const PostSelection post{t.phi, t.alpha};
        const CouplingSpec coupling{t.gt, 1.0};
        const MeterState start = MeterState::projector(t.initial);
        const auto k = kraus_exact_qubit(prep, post, coupling, sign);
        return compare(iterate_matrix(k, start, t.n, c.tol),
                       oracle::oracle_run(prep, post, coupling, start, t.n, oracle::ExactQubitInteraction{}, c.tol));
      });

  const double gt = c.gt();
  const MeterObservable meter = c.meter_observable();
  const SuiteOutcome first = run_suite(
      "first_order", c.trials, c.tol.marginal_band_factor * gt * gt,
      [&] {
        Trial t;
        draw_angles(t);
        t.gt = gt;
        t.n = draw_steps();
        t.initial = draw_state(meter.dimension());
        return t;
      },
      [&](const Trial& t) {
        const SystemPreparation prep{t.theta};
        const PostSelection post{t.phi, t.alpha};
        const CouplingSpec coupling{t.gt, 1.0};
        const MeterState start = MeterState::projector(t.initial);
        const auto k = kraus_first_order(prep, post, coupling, meter, c.tol);
        return compare(iterate_matrix(k, start, t.n, c.tol),
                       oracle::oracle_run(prep, post, coupling, start, t.n,
                                          oracle::GeneralInteraction{meter.matrix()}, c.tol));
      });

  OracleReport out;
  out.pass = exact.pass && first.pass;
  out.worst = !exact.pass ? exact.worst : first.worst;
  out.report = {{"seed", c.seed},
                {"d_sign", c.debug_flip_d ? "flipped" : "from_unitary"},
                {"suites", json::array({exact.summary, first.summary})},
                {"pass", out.pass}};
  return out;
}

namespace {

struct Flags {
  std::string config, out, theta, alpha, gamma, t, gt, phi, phi_grid, n, meter_dim, meter_obs, initial, window,
      interaction;
  std::optional<unsigned> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials, max_steps;
  bool debug_flip_d = false;
};

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "JSON configuration file");
  app.add_option("--out", f.out, "Output path (default: standard output)");
  app.add_option("--theta", f.theta, "Pre-selection angle, e.g. pi/4");
  app.add_option("--alpha", f.alpha, "Post-selection phase, e.g. pi/7");
  app.add_option("--phi", f.phi, "Post-selection angle for trajectory");
  app.add_option("--gamma", f.gamma, "Coupling strength");
  app.add_option("--t", f.t, "Interaction time");
  app.add_option("--gt", f.gt, "Coupling product gamma*t (sets t = 1)");
  app.add_option("--phi-grid", f.phi_grid, "start:stop:points");
  app.add_option("--n", f.n, "Comma list of iteration counts");
  app.add_option("--interaction", f.interaction, "exact_qubit | first_order | synthetic_quadratic");
  app.add_option("--meter-dim", f.meter_dim, "Meter dimension N");
  app.add_option("--meter-obs", f.meter_obs, "sigma_x or comma list of diagonal entries");
  app.add_option("--initial", f.initial, "rx,ry,rz or comma list of real amplitudes");
  app.add_option("--window", f.window, "Fit window lo:hi:per-decade");
  app.add_option("--jobs", f.jobs, "Worker threads (0: available parallelism)");
  app.add_option("--seed", f.seed, "Seed of the randomized suites");
  app.add_option("--trials", f.trials, "Trials per randomized suite");
  app.add_option("--max-steps", f.max_steps, "Longest randomized trajectory");
  app.add_flag("--debug-flip-d", f.debug_flip_d, "Negate the sigma_x coefficient of the exact Kraus operator");
}

RunConfig build_config(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config_file(f.config);
  json overrides = json::object();
  if (!f.theta.empty()) overrides["theta_rad"] = f.theta;
  if (!f.alpha.empty()) overrides["alpha_rad"] = f.alpha;
  if (!f.phi.empty()) overrides["phi_rad"] = f.phi;
  if (!f.phi_grid.empty()) overrides["phi_grid"] = f.phi_grid;
  if (!f.n.empty()) overrides["n"] = f.n;
  if (!f.interaction.empty()) overrides["interaction"] = f.interaction;
  if (!f.meter_obs.empty()) overrides["meter_obs"] = f.meter_obs;
  if (!f.initial.empty()) overrides["initial"] = f.initial;
  if (!f.window.empty()) overrides["window"] = f.window;
  apply_json(c, overrides);
  if (!f.gt.empty() && (!f.gamma.empty() || !f.t.empty())) throw UsageError("give either --gt or --gamma/--t, not both");
  if (!f.gt.empty()) {
    c.gamma = parse_reals(f.gt).at(0);
    c.t = 1.0;
  }
  if (!f.gamma.empty()) c.gamma = parse_reals(f.gamma).at(0);
  if (!f.t.empty()) c.t = parse_reals(f.t).at(0);
  if (!f.meter_dim.empty()) {
    const auto v = parse_counts(f.meter_dim);
    if (v.size() != 1) throw UsageError("--meter-dim takes one value");
    c.meter_dim = static_cast<std::size_t>(v[0]);
  }
  if (!f.out.empty()) c.out = f.out;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.seed) c.seed = *f.seed;
  if (f.trials) c.trials = *f.trials;
  if (f.max_steps) c.max_steps = *f.max_steps;
  if (f.debug_flip_d) c.debug_flip_d = true;
  validate(c);
  return c;
}

json error_json(std::string_view kind, std::string_view message) {
  return {{"error", kind}, {"message", message}};
}

int emit_error(std::ostream& err, const json& doc, int code) {
  err << doc.dump() << '\n';
  return code;
}

/// Writes `text` to the configured path or to `out`.
void deliver(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.out, std::ios::binary);
  if (!file) throw UsageError("cannot write '" + c.out + "'");
  file << text;
  if (!file) throw UsageError("failed writing '" + c.out + "'");
}

void deliver_sidecar(const RunConfig& c, const json& doc) {
  if (c.out.empty()) return;
  const std::string path = c.out + ".json";
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot write '" + path + "'");
  file << doc.dump(2) << '\n';
}

int dispatch(const std::string& command, const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::ostringstream data;
  if (command == "sweep") {
    write_sweep(c, data);
  } else if (command == "trajectory") {
    const json side = write_trajectory(c, data);
    deliver(c, data.str(), out);
    deliver_sidecar(c, side);
    return kSuccess;
  } else if (command == "relaxation") {
    write_relaxation(c, data);
  } else if (command == "critical-angles") {
    data << critical_angles_report(c).dump(2) << '\n';
  } else if (command == "fit") {
    const FitReport r = run_fit(c);
    data << r.records.dump(2) << '\n';
    deliver(c, data.str(), out);
    if (!r.ok()) {
      json e = error_json("FitFailure", "one or more exponent fits failed");
      e["failures"] = r.failures;
      return emit_error(err, e, kFitFailure);
    }
    return kSuccess;
  } else if (command == "oracle-check") {
    const OracleReport r = run_oracle_check(c);
    data << r.report.dump(2) << '\n';
    deliver(c, data.str(), out);
    if (!r.pass) {
      json e = error_json("OracleMismatch", "Kraus path and oracle disagree beyond tolerance");
      e["worst"] = r.worst;
      e["suites"] = r.report["suites"];
      return emit_error(err, e, kOracleMismatch);
    }
    return kSuccess;
  }
  deliver(c, data.str(), out);
  return kSuccess;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Repeated weak measurements with post-selection: sweeps, trajectories, relaxation times, fits."};
  app.name("weakcrit");
  app.require_subcommand(1, 1);
  Flags flags;
  const char* commands[][2] = {
      {"sweep", "Expectation values and Kraus spectrum over a phi grid"},
      {"trajectory", "Meter trajectory at one phi, with a JSON sidecar"},
      {"relaxation", "Relaxation time over a phi grid"},
      {"fit", "Critical exponent fits around each critical angle"},
      {"critical-angles", "Angles where Im of the weak value vanishes"},
      {"oracle-check", "Randomized comparison against the bipartite oracle"},
  };
  for (const auto& [name, help] : commands) add_flags(*app.add_subcommand(name, help), flags);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    return emit_error(err, error_json("usage", e.what()), kUsage);
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const RunConfig config = build_config(flags);
    return dispatch(command, config, out, err);
  } catch (const UsageError& e) {
    return emit_error(err, error_json("usage", e.what()), kUsage);
  } catch (const Error& e) {
    json doc = error_json(to_string(e.code()), e.what());
    doc["value"] = e.value();
    return emit_error(err, doc, e.code() == Errc::PoorFit || e.code() == Errc::WindowContainsCriticalPoint ? kFitFailure
                                                                                                            : kUsage);
  } catch (const std::exception& e) {
    return emit_error(err, error_json("internal", e.what()), kUsage);
  }
}

}  // namespace weakcrit::cli
