// Copyright 2026 The qsl Authors
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

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsl/evolve.hpp"
#include "qsl/gatefid.hpp"
#include "qsl/io.hpp"
#include "qsl/kak.hpp"
#include "qsl/leakage3.hpp"
#include "qsl/optctrl.hpp"
#include "qsl/tomo.hpp"

namespace qsl::cli {

namespace {

using io::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Globals {
  std::string device_path;
  int threads = 0;
  bool json_output = false;
  std::string manifest_path;
};

struct Run {
  const Globals& globals;
  std::ostream& out;
  std::ostream& err;
  io::RunManifest manifest;
  std::string primary_output;  // manifest lands next to it

  void wrote(const std::string& path) {
    manifest.outputs.push_back(path);
    if (primary_output.empty()) primary_output = path;
  }
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDidNotConverge:
    case ErrorCode::kBracketNotFound:
      return kExitNotConverged;
    default:
      return kExitInvalid;
  }
}

DeviceSpec load_device(const Globals& g) {
  if (g.device_path.empty()) return DeviceSpec::chip_default();
  return io::device_from_json(io::read_json(g.device_path));
}

template <class Derived>
json complex_matrix_json(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

// NaN is not representable in JSON.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct TargetOptions {
  std::string gate;
  std::string matrix_path;
};

struct Target {
  Mat4 u = Mat4::Identity();
  std::optional<NamedGate> tag;
  std::string label;
  bool custom = false;
};

Target named_target(const std::string& name) {
  const auto tag = parse_named_gate(name);
  if (!tag) throw Error(ErrorCode::kInvalidArgument, "unknown gate '" + name + "'");
  return Target{gate_matrix(*tag), tag, to_string(*tag), false};
}

Target matrix_target(const Mat4& u, std::string label) {
  require_unitary(u, "target matrix");
  return Target{u, std::nullopt, std::move(label), true};
}

// --gate / --matrix first, then whatever the pulse file recorded.
std::optional<Target> resolve_target(const TargetOptions& t, const json* pulse = nullptr) {
  if (!t.gate.empty()) return named_target(t.gate);
  if (!t.matrix_path.empty()) {
    return matrix_target(io::matrix_from_json(io::read_json(t.matrix_path)), t.matrix_path);
  }
  if (pulse != nullptr) {
    if (pulse->contains("target_matrix")) {
      return matrix_target(io::matrix_from_json(pulse->at("target_matrix")), "custom");
    }
    if (pulse->contains("target") && pulse->at("target").is_string()) {
      return named_target(pulse->at("target").get<std::string>());
    }
  }
  return std::nullopt;
}

Target require_target(const TargetOptions& t, const json* pulse = nullptr) {
  auto target = resolve_target(t, pulse);
  if (!target) throw Error(ErrorCode::kInvalidArgument, "a target gate is required (--gate or --matrix)");
  return *target;
}

void add_target_options(CLI::App* app, TargetOptions& t) {
  auto* gate = app->add_option("--gate", t.gate, "Named target: CNOT, CZ, SWAP, SQRT_SWAP, ISWAP");
  auto* matrix = app->add_option("--matrix", t.matrix_path, "4x4 target matrix JSON ([re, im] pairs)");
  gate->excludes(matrix);
}

std::optional<double> analytic_t_min(const Target& target, const DeviceSpec& spec) {
  try {
    return t_min(kak_decompose(target.u).content, spec, target.tag);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnsupportedGateForInteraction) throw;
    return std::nullopt;
  }
}

struct OptimizerOptions {
  TargetOptions target;
  double t_ns = kNaN;
  double omega_max_mhz = kNaN;
  int segments = 16;
  int restarts = 20;
  std::uint64_t seed = 1;
  double epsilon = 0.01;
  int max_iterations = 5000;
  bool ideal_drives = false;
  std::string out;
};

CLI::Option* add_optimizer_options(CLI::App* app, OptimizerOptions& o) {
  add_target_options(app, o.target);
  auto* omega = app->add_option("--omega-max-mhz", o.omega_max_mhz, "Amplitude bound (MHz)");
  app->add_option("--segments", o.segments, "Piecewise-constant segments M")->capture_default_str();
  app->add_option("--restarts", o.restarts, "Random restarts")->capture_default_str();
  app->add_option("--seed", o.seed, "Base seed")->capture_default_str();
  app->add_option("--epsilon", o.epsilon, "Target infidelity")->capture_default_str();
  app->add_option("--max-iterations", o.max_iterations, "Iterations per restart")->capture_default_str();
  app->add_flag("--ideal-drives", o.ideal_drives, "Force r1 = r2 = 1");
  return omega;
}

DeviceSpec optimizer_device(const Globals& g, const OptimizerOptions& o) {
  DeviceSpec spec = load_device(g);
  if (o.ideal_drives) spec.r1 = spec.r2 = 1.0;
  if (!std::isnan(o.omega_max_mhz)) spec.omega_max = mhz_to_angular(o.omega_max_mhz);
  spec.validate();
  return spec;
}

OptimizerConfig optimizer_config(const Globals& g, const OptimizerOptions& o) {
  OptimizerConfig c;
  c.segments = o.segments;
  c.restarts = o.restarts;
  c.seed = o.seed;
  c.epsilon = o.epsilon;
  c.max_iterations = o.max_iterations;
  c.threads = g.threads;
  c.validate();
  return c;
}

void emit(Run& run, const json& report, const std::string& text) {
  if (run.globals.json_output) {
    run.out << report.dump(2) << '\n';
  } else {
    run.out << text;
  }
}

void write_json_output(Run& run, const std::string& path, const json& value) {
  if (path.empty()) return;
  io::write_json(path, value);
  run.wrote(path);
}

// Pulse files carry the schedule plus enough context to be replayed.
json pulse_document(const PulseSchedule& schedule, const Target& target, const DeviceSpec& spec,
                    double fidelity, bool converged) {
  json j = io::pulse_to_json(schedule);
  j["target"] = target.label;
  if (target.custom) j["target_matrix"] = io::matrix_to_json(target.u);
  j["omega_max_mhz"] = angular_to_mhz(spec.omega_max);
  j["fidelity"] = fidelity;
  j["converged"] = converged;
  return j;
}

struct LoadedPulse {
  json doc;
  PulseSchedule schedule;
};

LoadedPulse load_pulse(const std::string& path) {
  LoadedPulse p;
  p.doc = io::read_json(path);
  p.schedule = io::pulse_from_json(p.doc);
  return p;
}

// A pulse optimized under a different bound still replays under that bound.
void adopt_pulse_bound(DeviceSpec& spec, const json& doc) {
  if (doc.contains("omega_max_mhz") && doc.at("omega_max_mhz").is_number()) {
    spec.omega_max = mhz_to_angular(doc.at("omega_max_mhz").get<double>());
  }
  spec.validate();
}

// ---------------------------------------------------------------- kak

struct KakOptions {
  std::string gate;
  std::string matrix_path;
  std::string out;
};

int cmd_kak(Run& run, const KakOptions& o) {
  const DeviceSpec spec = load_device(run.globals);
  const Target target = require_target(TargetOptions{o.gate, o.matrix_path});
  const KakDecomposition d = kak_decompose(target.u);
  const auto tmin = analytic_t_min(target, spec);
  const auto& l = d.content.lambda;

  json report = {{"target", target.label},
                 {"lambda", {l[0], l[1], l[2]}},
                 {"sum_abs_lambda", d.content.sum_abs()},
                 {"interaction", to_string(spec.interaction)},
                 {"g_mhz", angular_to_mhz(spec.g)},
                 {"t_min_ns", tmin ? json(*tmin) : json(nullptr)},
                 {"locals",
                  {{"u1", complex_matrix_json(d.locals.u1)},
                   {"u2", complex_matrix_json(d.locals.u2)},
                   {"v1", complex_matrix_json(d.locals.v1)},
                   {"v2", complex_matrix_json(d.locals.v2)},
                   {"global_phase", d.locals.global_phase}}}};
  write_json_output(run, o.out, report);

  std::ostringstream text;
  text << std::setprecision(10);
  text << "target: " << target.label << '\n';
  text << "lambda: " << l[0] << ' ' << l[1] << ' ' << l[2] << '\n';
  text << "sum |lambda|: " << d.content.sum_abs() << '\n';
  if (tmin) {
    text << "t_min_ns: " << *tmin << '\n';
  } else {
    text << "t_min_ns: unavailable for " << to_string(spec.interaction) << " without a tabulated gate\n";
  }
  const auto print2 = [&](const char* name, const Mat2& m) {
    text << name << ": [[" << m(0, 0) << ", " << m(0, 1) << "], [" << m(1, 0) << ", " << m(1, 1) << "]]\n";
  };
  print2("u1", d.locals.u1);
  print2("u2", d.locals.u2);
  print2("v1", d.locals.v1);
  print2("v2", d.locals.v2);
  text << "global phase: " << d.locals.global_phase << '\n';
  emit(run, report, text.str());
  return kExitOk;
}

// ---------------------------------------------------------------- optimize

int cmd_optimize(Run& run, const OptimizerOptions& o) {
  const DeviceSpec spec = optimizer_device(run.globals, o);
  const OptimizerConfig config = optimizer_config(run.globals, o);
  const Target target = require_target(o.target);
  run.manifest.seed = o.seed;
  if (std::isnan(o.t_ns)) throw Error(ErrorCode::kInvalidArgument, "optimize: --t-ns is required");

  const OptimResult r = optimize_pulse(spec, target.u, o.t_ns, config);
  write_json_output(run, o.out, pulse_document(r.best_schedule, target, spec, r.best_fidelity, r.converged));

  json report = {{"target", target.label},      {"t_ns", o.t_ns},
                 {"fidelity", r.best_fidelity}, {"infidelity", 1.0 - r.best_fidelity},
                 {"converged", r.converged},    {"best_seed", r.best_seed()},
                 {"restarts", r.per_restart.size()}};
  std::ostringstream text;
  text << std::setprecision(10) << "target: " << target.label << "\nt_ns: " << o.t_ns
       << "\nfidelity: " << r.best_fidelity << "\nconverged: " << (r.converged ? "yes" : "no")
       << "\nbest_seed: " << r.best_seed() << '\n';
  emit(run, report, text.str());
  return r.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------- speedlimit

struct SpeedLimitOptions {
  OptimizerOptions opt;
  std::vector<double> omega_over_g;
  std::string csv;
};

int cmd_speedlimit(Run& run, const SpeedLimitOptions& s) {
  const OptimizerOptions& o = s.opt;
  DeviceSpec spec = optimizer_device(run.globals, o);
  const OptimizerConfig config = optimizer_config(run.globals, o);
  const Target target = o.target.gate.empty() && o.target.matrix_path.empty()
                            ? named_target("CNOT")
                            : require_target(o.target);
  const TargetGate tg{target.u, target.tag};
  run.manifest.seed = o.seed;

  if (s.omega_over_g.empty()) {
    json report;
    int code = kExitOk;
    try {
      const SpeedLimitResult r = find_speed_limit(spec, tg, config);
      report = io::speed_limit_to_json(r, target.label, spec.omega_max, o.epsilon);
    } catch (const Error& e) {
      if (exit_code_for(e.code()) != kExitNotConverged) throw;
      run.err << "speedlimit: " << e.what() << '\n';
      report = {{"target", target.label}, {"omega_max_mhz", angular_to_mhz(spec.omega_max)},
                {"epsilon", o.epsilon},   {"error", e.what()}};
      code = kExitNotConverged;
    }
    write_json_output(run, o.out, report);
    std::ostringstream text;
    text << std::setprecision(10) << "target: " << target.label
         << "\nomega_max_mhz: " << angular_to_mhz(spec.omega_max) << '\n';
    if (code == kExitOk) {
      text << "t_min_ns: " << report["t_min_ns"].get<double>() << "\nt_f_ns: " << report["t_f_ns"].get<double>()
           << "\nratio: " << report["ratio"].get<double>() << '\n';
    } else {
      text << "no speed limit found\n";
    }
    emit(run, report, text.str());
    return code;
  }

  std::vector<io::SpeedLimitRow> rows;
  int code = kExitOk;
  for (const double x : s.omega_over_g) {
    if (!(x >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "--omega-over-g values must be non-negative");
    spec.omega_max = x * spec.g;
    io::SpeedLimitRow row;
    row.omega_over_g = x;
    row.omega_max_mhz = angular_to_mhz(spec.omega_max);
    try {
      const SpeedLimitResult r = find_speed_limit(spec, tg, config);
      row.t_min_ns = r.t_min_ns;
      row.t_f_ns = r.t_f_ns;
      row.ratio = r.ratio;
      row.converged = r.at_t_f.converged;
    } catch (const Error& e) {
      if (exit_code_for(e.code()) != kExitNotConverged) throw;
      run.err << "speedlimit at omega/g = " << x << ": " << e.what() << '\n';
      row.t_min_ns = analytic_t_min(target, spec).value_or(kNaN);
      row.t_f_ns = row.ratio = kNaN;
      code = kExitNotConverged;
    }
    rows.push_back(row);
  }
  const std::string csv = io::speed_limit_rows_to_csv(rows);
  if (!s.csv.empty()) {
    io::write_text(s.csv, csv);
    run.wrote(s.csv);
  }
  json jrows = json::array();
  for (const auto& r : rows) {
    jrows.push_back({{"omega_over_g", r.omega_over_g},
                     {"omega_max_mhz", r.omega_max_mhz},
                     {"t_min_ns", number_or_null(r.t_min_ns)},
                     {"t_f_ns", number_or_null(r.t_f_ns)},
                     {"ratio", number_or_null(r.ratio)},
                     {"converged", r.converged}});
  }
  const json report = {{"target", target.label}, {"epsilon", o.epsilon}, {"rows", jrows}};
  write_json_output(run, o.out, report);
  emit(run, report, csv);
  return code;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  OptimizerOptions opt;
  int points = 20;
  double t_max_ns = kNaN;
};

int cmd_sweep(Run& run, const SweepOptions& s) {
  const OptimizerOptions& o = s.opt;
  const DeviceSpec spec = optimizer_device(run.globals, o);
  const OptimizerConfig config = optimizer_config(run.globals, o);
  const Target target = require_target(o.target);
  run.manifest.seed = o.seed;
  if (s.points < 1) throw Error(ErrorCode::kInvalidArgument, "sweep: --points must be >= 1");
  double t_max = s.t_max_ns;
  if (std::isnan(t_max)) {
    const auto tmin = analytic_t_min(target, spec);
    if (!tmin || *tmin <= 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "sweep: --t-max-ns is required for this target");
    }
    t_max = 1.25 * *tmin;
  }
  if (!(t_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sweep: --t-max-ns must be positive");

  std::vector<double> grid;
  for (int i = 1; i <= s.points; ++i) grid.push_back(t_max * i / s.points);
  const auto rows = sweep_fidelity_vs_time(spec, target.u, config, grid);
  for (const auto& r : rows) {
    if (r.failed) run.err << "sweep at t = " << r.t_ns << " ns: " << r.message << '\n';
  }
  const std::string csv = io::sweep_to_csv(rows);
  if (!o.out.empty()) {
    io::write_text(o.out, csv);
    run.wrote(o.out);
  }
  json jrows = json::array();
  for (const auto& r : rows) {
    jrows.push_back({{"t_ns", r.t_ns}, {"best_fidelity", r.best_fidelity}, {"converged", r.converged},
                     {"best_seed", r.best_seed}, {"wall_ms", r.wall_ms}});
  }
  emit(run, json{{"target", target.label}, {"rows", jrows}}, csv);
  // Short times are expected to fall short; only the longest one counts.
  return rows.back().converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------- qpt

struct ConfusionOptions {
  std::vector<double> readout_error;
  std::string confusion_path;
};

void add_confusion_options(CLI::App* app, ConfusionOptions& c) {
  auto* e = app->add_option("--readout-error", c.readout_error, "Symmetric bit-flip errors e1 e2")
                ->expected(2);
  auto* f = app->add_option("--confusion", c.confusion_path, "Confusion matrix JSON");
  e->excludes(f);
}

std::optional<ConfusionMatrix> confusion_from_options(const ConfusionOptions& c) {
  if (!c.readout_error.empty()) {
    const double e1 = c.readout_error[0], e2 = c.readout_error[1];
    if (!(e1 >= 0.0 && e1 <= 0.5 && e2 >= 0.0 && e2 <= 0.5)) {
      throw Error(ErrorCode::kInvalidArgument, "--readout-error values must lie in [0, 0.5]");
    }
    return ConfusionMatrix::symmetric_readout(e1, e2);
  }
  if (!c.confusion_path.empty()) return io::confusion_from_json(io::read_json(c.confusion_path));
  return std::nullopt;
}

struct QptSimulateOptions {
  TargetOptions target;
  std::string pulse;
  bool identity = false;
  ConfusionOptions confusion;
  int shots = 500;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_qpt_simulate(Run& run, const QptSimulateOptions& o) {
  run.manifest.seed = o.seed;
  if (o.shots < 1) throw Error(ErrorCode::kInvalidArgument, "qpt simulate: --shots must be >= 1");
  const int sources = (!o.target.gate.empty() || !o.target.matrix_path.empty()) + !o.pulse.empty() + o.identity;
  if (sources != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "qpt simulate: give exactly one of --gate/--matrix, --pulse or --identity");
  }
  PTM channel;
  std::string label;
  if (o.identity) {
    label = "identity";
  } else if (!o.pulse.empty()) {
    DeviceSpec spec = load_device(run.globals);
    const LoadedPulse p = load_pulse(o.pulse);
    adopt_pulse_bound(spec, p.doc);
    channel = ptm_of_unitary(propagate(spec, p.schedule).u);
    label = o.pulse;
  } else {
    const Target t = require_target(o.target);
    channel = ptm_of_unitary(t.u);
    label = t.label;
  }
  const ConfusionMatrix confusion = confusion_from_options(o.confusion).value_or(ConfusionMatrix::ideal());
  const CountsTensor counts = simulate_qpt(channel, confusion, o.shots, o.seed);

  json doc = io::counts_to_json(counts);
  doc["confusion"] = io::confusion_to_json(confusion)["confusion"];
  doc["source"] = label;
  doc["seed"] = o.seed;
  write_json_output(run, o.out, doc);

  const json report = {{"source", label}, {"shots", o.shots}, {"seed", o.seed}, {"settings", kPreRotations * kPostRotations}};
  std::ostringstream text;
  text << "simulated " << kPreRotations * kPostRotations << " settings x " << o.shots << " shots of " << label
       << '\n';
  emit(run, report, text.str());
  return kExitOk;
}

struct QptReconstructOptions {
  TargetOptions target;
  std::string counts;
  std::string identity_counts;
  ConfusionOptions confusion;
  int stat_trials = 0;
  bool unity_noise = false;
  std::uint64_t seed = 1;
  int max_iterations = 5000;
  std::string out;
};

int cmd_qpt_reconstruct(Run& run, const QptReconstructOptions& o) {
  run.manifest.seed = o.seed;
  const json doc = io::read_json(o.counts);
  const CountsTensor counts = io::counts_from_json(doc);
  ConfusionMatrix confusion = ConfusionMatrix::ideal();
  if (auto c = confusion_from_options(o.confusion)) {
    confusion = *c;
  } else if (doc.contains("confusion")) {
    confusion = io::confusion_from_json(json{{"confusion", doc.at("confusion")}});
  }
  const auto target = resolve_target(o.target);
  if (!target && (!o.identity_counts.empty() || o.stat_trials > 0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "qpt reconstruct: SPAM correction and error bars need a target (--gate or --matrix)");
  }
  if (o.stat_trials == 1 || o.stat_trials < 0) {
    throw Error(ErrorCode::kInvalidArgument, "qpt reconstruct: --stat-trials must be 0 or >= 2");
  }
  MleConfig mle_config;
  mle_config.max_iterations = o.max_iterations;

  const MleResult mle = mle_reconstruct(counts, confusion, mle_config);
  bool converged = mle.converged;
  json report = io::ptm_to_json(mle.ptm);
  report["chi"] = io::chi_to_json(chi_of_ptm(mle.ptm))["chi"];
  report["converged"] = mle.converged;
  report["iterations"] = mle.iterations;
  report["negative_log_likelihood"] = mle.negative_log_likelihood;
  report["min_choi_eigenvalue"] = min_choi_eigenvalue(mle.ptm);

  std::ostringstream text;
  text << std::setprecision(10) << "mle: " << (mle.converged ? "converged" : "not converged") << " after "
       << mle.iterations << " iterations\n";
  if (target) {
    const double f = avg_fidelity_from_ptm(mle.ptm, target->u);
    report["target"] = target->label;
    report["fidelity"] = f;
    text << "fidelity vs " << target->label << ": " << f << '\n';
  }
  if (!o.identity_counts.empty()) {
    const MleResult idle = mle_reconstruct(io::counts_from_json(io::read_json(o.identity_counts)), confusion,
                                           mle_config);
    converged = converged && idle.converged;
    const ChiMatrix corrected = spam_correct(chi_of_ptm(mle.ptm), chi_of_ptm(idle.ptm), target->u);
    const double f = avg_fidelity_from_ptm(ptm_of_chi(corrected), target->u);
    report["fidelity_spam_corrected"] = f;
    report["chi_spam_corrected"] = io::chi_to_json(corrected)["chi"];
    text << "spam-corrected fidelity: " << f << '\n';
  }
  if (o.stat_trials > 0) {
    const std::optional<double> noise = o.unity_noise ? std::optional<double>(1.0) : std::nullopt;
    const StatisticalError se =
        estimate_statistical_error(counts, target->u, confusion, o.stat_trials, o.seed, noise, mle_config);
    report["statistical_error"] = {{"std_fidelity", se.std_fidelity},
                                   {"mean_fidelity", se.mean_fidelity},
                                   {"trials", o.stat_trials},
                                   {"noise_std", o.unity_noise ? 1.0 : 1.0 / std::sqrt(counts.shots)}};
    text << "statistical error (std of F): " << se.std_fidelity << '\n';
  }
  write_json_output(run, o.out, report);
  json summary = report;
  summary.erase("ptm");
  summary.erase("chi");
  summary.erase("chi_spam_corrected");
  emit(run, summary, text.str());
  return converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------- leakage

struct LeakageOptions {
  TargetOptions target;
  std::string pulse;
  double crosstalk = kNaN;
  double edge_ns = kNaN;
  double dt_ps = kNaN;
  std::string out;
};

int cmd_leakage(Run& run, const LeakageOptions& o) {
  DeviceSpec spec = load_device(run.globals);
  const LoadedPulse p = load_pulse(o.pulse);
  adopt_pulse_bound(spec, p.doc);
  const Target target = require_target(o.target, &p.doc);
  if (!spec.qutrit) throw Error(ErrorCode::kInvalidArgument, "leakage: device has no qutrit section");
  QutritParams q = *spec.qutrit;
  if (!std::isnan(o.crosstalk)) q.crosstalk = o.crosstalk;
  if (!std::isnan(o.edge_ns)) q.edge_ns = o.edge_ns;
  if (!std::isnan(o.dt_ps)) q.dt_ns = 1e-3 * o.dt_ps;
  q.validate();
  spec.qutrit = q;

  const QutritModel model = build_device(q, spec.g, DipoleRatios{spec.r1, spec.r2});
  const LeakageReport r = simulate_leakage(spec, p.schedule, model);
  // Ideal rotating-frame performance of the same pulse, for comparison.
  const double f_qubit = avg_gate_fidelity(target.u, propagate(spec, p.schedule).u);
  const double f_lab = avg_gate_fidelity_closed_form(target.u, r.block);

  const json report = {{"target", target.label},
                       {"fidelity_vs_reference", r.fidelity},
                       {"fidelity_z_optimized", r.fidelity_z_optimized},
                       {"infidelity", 1.0 - r.fidelity},
                       {"leakage", r.leakage},
                       {"fidelity_vs_target", f_lab},
                       {"qubit_model_fidelity", f_qubit},
                       {"exchange_mhz", angular_to_mhz(model.exchange)},
                       {"zz_shift_mhz", angular_to_mhz(model.zz_shift())},
                       {"crosstalk", q.crosstalk},
                       {"edge_ns", q.edge_ns},
                       {"dt_ps", 1e3 * q.dt_ns},
                       {"block", complex_matrix_json(r.block)}};
  write_json_output(run, o.out, report);
  std::ostringstream text;
  text << std::setprecision(8) << "target: " << target.label << "\nfidelity vs qubit-model evolution: "
       << r.fidelity << "\ninfidelity: " << 1.0 - r.fidelity << "\nz-optimized fidelity: "
       << r.fidelity_z_optimized << "\nleakage: " << r.leakage << "\nexchange J: "
       << angular_to_mhz(model.exchange) << " MHz\n";
  json summary = report;
  summary.erase("block");
  emit(run, summary, text.str());
  return kExitOk;
}

// ---------------------------------------------------------------- robustness

struct RobustnessOptions {
  TargetOptions target;
  std::string pulse;
  double sigma = 0.01;
  int trials = 100;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_robustness(Run& run, const RobustnessOptions& o) {
  run.manifest.seed = o.seed;
  DeviceSpec spec = load_device(run.globals);
  const LoadedPulse p = load_pulse(o.pulse);
  adopt_pulse_bound(spec, p.doc);
  const Target target = require_target(o.target, &p.doc);
  const RobustnessResult r = robustness_study(spec, p.schedule, target.u, o.sigma, o.trials, o.seed);

  const json report = {{"target", target.label},
                       {"sigma_fraction", o.sigma},
                       {"trials", o.trials},
                       {"seed", o.seed},
                       {"noiseless_infidelity", r.noiseless_infidelity},
                       {"mean_infidelity", r.mean_infidelity},
                       {"std_infidelity", r.std_infidelity},
                       {"mean_fidelity", 1.0 - r.mean_infidelity},
                       {"samples", r.samples}};
  write_json_output(run, o.out, report);
  std::ostringstream text;
  text << std::setprecision(8) << "target: " << target.label << "\nsigma: " << o.sigma << " x omega_max"
       << "\nnoiseless infidelity: " << r.noiseless_infidelity << "\nmean fidelity: " << 1.0 - r.mean_infidelity
       << "\nstd infidelity: " << r.std_infidelity << '\n';
  json summary = report;
  summary.erase("samples");
  emit(run, summary, text.str());
  return kExitOk;
}

std::string default_manifest_path(const Run& run) {
  if (!run.primary_output.empty()) return run.primary_output + ".manifest.json";
  std::string name = run.manifest.command;
  for (char& c : name) {
    if (c == ' ') c = '_';
  }
  return name + ".manifest.json";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-qubit gate speed limits, bounded-amplitude pulse optimization and verification", "qsl"};
  app.set_version_flag("--version", std::string(io::kToolVersion));
  app.require_subcommand(1);

  Globals globals;
  app.add_option("--device", globals.device_path, "Device config JSON (default: built-in chip values)");
  app.add_option("--threads", globals.threads, "Worker threads for restarts (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--json", globals.json_output, "Print reports as JSON");
  app.add_option("--manifest", globals.manifest_path, "Manifest path (default: next to the main output)");

  std::vector<std::pair<CLI::App*, std::function<int(Run&)>>> actions;

  KakOptions kak;
  auto* kak_cmd = app.add_subcommand("kak", "Cartan coefficients, local gates and analytical T_min");
  auto* kak_gate = kak_cmd->add_option("gate", kak.gate, "Named gate");
  kak_cmd->add_option("--matrix", kak.matrix_path, "4x4 matrix JSON")->excludes(kak_gate);
  kak_cmd->add_option("--out", kak.out, "Write the report as JSON");
  actions.emplace_back(kak_cmd, [&](Run& r) { return cmd_kak(r, kak); });

  OptimizerOptions optimize;
  auto* opt_cmd = app.add_subcommand("optimize", "Optimize a pulse at fixed duration");
  add_optimizer_options(opt_cmd, optimize);
  opt_cmd->add_option("--t-ns", optimize.t_ns, "Gate duration (ns)")->required();
  opt_cmd->add_option("--out", optimize.out, "Pulse schedule JSON");
  actions.emplace_back(opt_cmd, [&](Run& r) { return cmd_optimize(r, optimize); });

  SpeedLimitOptions speed;
  auto* sl_cmd = app.add_subcommand("speedlimit", "Shortest duration reaching 1 - epsilon");
  auto* sl_omega = add_optimizer_options(sl_cmd, speed.opt);
  auto* sl_list = sl_cmd->add_option("--omega-over-g", speed.omega_over_g, "Bounds in units of g (ratio curve)");
  sl_list->excludes(sl_omega);
  sl_cmd->add_option("--csv", speed.csv, "Ratio-vs-bound CSV (with --omega-over-g)")->needs(sl_list);
  sl_cmd->add_option("--out", speed.opt.out, "Speed-limit JSON");
  actions.emplace_back(sl_cmd, [&](Run& r) { return cmd_speedlimit(r, speed); });

  SweepOptions sweep;
  auto* sw_cmd = app.add_subcommand("sweep", "Best fidelity versus duration");
  add_optimizer_options(sw_cmd, sweep.opt);
  sw_cmd->add_option("--points", sweep.points, "Grid points in (0, t-max]")->capture_default_str();
  sw_cmd->add_option("--t-max-ns", sweep.t_max_ns, "Longest duration (default 1.25 T_min)");
  sw_cmd->add_option("--out", sweep.opt.out, "Sweep CSV");
  actions.emplace_back(sw_cmd, [&](Run& r) { return cmd_sweep(r, sweep); });

  auto* qpt_cmd = app.add_subcommand("qpt", "Simulated process tomography");
  qpt_cmd->require_subcommand(1);
  QptSimulateOptions qsim;
  auto* qsim_cmd = qpt_cmd->add_subcommand("simulate", "Sample tomography counts");
  add_target_options(qsim_cmd, qsim.target);
  qsim_cmd->add_option("--pulse", qsim.pulse, "Use the propagator of this pulse");
  qsim_cmd->add_flag("--identity", qsim.identity, "Idle channel (for SPAM correction)");
  add_confusion_options(qsim_cmd, qsim.confusion);
  qsim_cmd->add_option("--shots", qsim.shots, "Shots per setting")->capture_default_str();
  qsim_cmd->add_option("--seed", qsim.seed, "Sampling seed")->capture_default_str();
  qsim_cmd->add_option("--out", qsim.out, "Counts JSON")->required();
  actions.emplace_back(qsim_cmd, [&](Run& r) { return cmd_qpt_simulate(r, qsim); });

  QptReconstructOptions qrec;
  auto* qrec_cmd = qpt_cmd->add_subcommand("reconstruct", "Maximum-likelihood process reconstruction");
  add_target_options(qrec_cmd, qrec.target);
  qrec_cmd->add_option("--counts", qrec.counts, "Counts JSON")->required();
  qrec_cmd->add_option("--identity-counts", qrec.identity_counts, "Idle-channel counts for SPAM correction");
  add_confusion_options(qrec_cmd, qrec.confusion);
  qrec_cmd->add_option("--stat-trials", qrec.stat_trials, "Trials for the statistical error (0: off)");
  qrec_cmd->add_flag("--unity-noise", qrec.unity_noise, "Perturb expectation values with std 1");
  qrec_cmd->add_option("--seed", qrec.seed, "Seed for error trials")->capture_default_str();
  qrec_cmd->add_option("--max-iterations", qrec.max_iterations, "MLE iteration cap")->capture_default_str();
  qrec_cmd->add_option("--out", qrec.out, "Reconstruction JSON (PTM and chi)");
  actions.emplace_back(qrec_cmd, [&](Run& r) { return cmd_qpt_reconstruct(r, qrec); });

  LeakageOptions leak;
  auto* leak_cmd = app.add_subcommand("leakage", "Replay a pulse on the two-qutrit lab-frame model");
  add_target_options(leak_cmd, leak.target);
  leak_cmd->add_option("--pulse", leak.pulse, "Pulse schedule JSON")->required();
  leak_cmd->add_option("--crosstalk", leak.crosstalk, "Dipole crosstalk weight in [0, 1]");
  leak_cmd->add_option("--edge-ns", leak.edge_ns, "Ramp length between segments");
  leak_cmd->add_option("--dt-ps", leak.dt_ps, "Integration step");
  leak_cmd->add_option("--out", leak.out, "Leakage report JSON");
  actions.emplace_back(leak_cmd, [&](Run& r) { return cmd_leakage(r, leak); });

  RobustnessOptions robust;
  auto* rob_cmd = app.add_subcommand("robustness", "Infidelity under Gaussian amplitude noise");
  add_target_options(rob_cmd, robust.target);
  rob_cmd->add_option("--pulse", robust.pulse, "Pulse schedule JSON")->required();
  rob_cmd->add_option("--sigma", robust.sigma, "Noise std as a fraction of omega_max")->capture_default_str();
  rob_cmd->add_option("--trials", robust.trials, "Noise realizations")->capture_default_str();
  rob_cmd->add_option("--seed", robust.seed, "Noise seed")->capture_default_str();
  rob_cmd->add_option("--out", robust.out, "Robustness report JSON");
  actions.emplace_back(rob_cmd, [&](Run& r) { return cmd_robustness(r, robust); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInvalid;
  }

  Run run{globals, out, err, {}, {}};
  run.manifest.device_path = globals.device_path;
  for (int i = 0; i < argc; ++i) run.manifest.arguments.emplace_back(argv[i]);
  std::function<int(Run&)> action;
  for (auto& [sub, fn] : actions) {
    if (sub->parsed()) {
      run.manifest.command = sub->get_parent() == qpt_cmd ? "qpt " + sub->get_name() : sub->get_name();
      action = fn;
    }
  }

  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    code = action(run);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    code = exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = kExitFailure;
  }
  run.manifest.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  run.manifest.exit_code = code;
  const std::string manifest_path = globals.manifest_path.empty() ? default_manifest_path(run) : globals.manifest_path;
  try {
    io::write_json(manifest_path, io::manifest_to_json(run.manifest));
  } catch (const std::exception& e) {
    err << "error: cannot write manifest: " << e.what() << '\n';
    if (code == kExitOk) code = kExitFailure;
  }
  return code;
}

}  // namespace qsl::cli
