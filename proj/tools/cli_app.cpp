#include "cli_app.hpp"

#include "report.hpp"

#include "swctrl/errors.hpp"
#include "swctrl/fixtures.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

namespace swctrl::cli {

using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string fixture;
  std::optional<std::string> gamma0;
  std::optional<double> T;
  std::optional<int> M;
  std::optional<double> lambda;
  std::vector<double> eps_schedule;
  int grid_steps = 2000;
  double eps = 1e-3;
  int sim_steps = 2000;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  std::string level_M_mode = "gramian";
  std::optional<double> delta_pd;
  double stagnation = 1e-2;
  std::string output;
  std::string format = "json";
  std::string dump_curves;
  std::string dump_paths;
  bool skip_gramian = false;
};

void add_common(CLI::App& cmd, Options& o) {
  auto* config = cmd.add_option("--config", o.config, "system config (JSON)");
  auto* fixture = cmd.add_option("--fixture", o.fixture, "built-in system name");
  config->excludes(fixture);
  cmd.add_option("--gamma0", o.gamma0, "initial mode label");
  cmd.add_option("--T", o.T, "horizon");
  cmd.add_option("--M", o.M, "jump cap");
  cmd.add_option("--lambda", o.lambda, "uniform jump rate for every mode");
  cmd.add_option("--eps-schedule", o.eps_schedule, "comma-separated, strictly decreasing")
      ->delimiter(',');
  cmd.add_option("--grid-steps", o.grid_steps, "Riccati grid steps on [0, T]");
  cmd.add_option("--eps", o.eps, "regularization for single Riccati solves");
  cmd.add_option("--sim-steps", o.sim_steps, "simulator RK4 steps on [0, T]");
  cmd.add_option("--samples", o.samples, "Monte-Carlo sample count");
  cmd.add_option("--seed", o.seed, "base seed");
  cmd.add_option("--level-M-mode", o.level_M_mode, "gramian|zero")
      ->check(CLI::IsMember({"gramian", "zero"}));
  cmd.add_option("--delta-pd", o.delta_pd, "positive-definiteness threshold for k0");
  cmd.add_option("--stagnation", o.stagnation, "relative settling threshold");
  cmd.add_option("--output", o.output, "JSON report path (stdout if absent)");
  cmd.add_option("--format", o.format, "report format")->check(CLI::IsMember({"json"}));
  cmd.add_option("--dump-curves", o.dump_curves, "CSV of K(level, mode, t)");
  cmd.add_option("--dump-paths", o.dump_paths, "CSV of simulated primal paths");
  cmd.add_flag("--skip-gramian", o.skip_gramian, "skip the Gramian control check");
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Loaded {
  SwitchSystem system;
  std::string source;
  json overrides;
};

Loaded load_system(const Options& o) {
  std::optional<SwitchSystem> system;
  std::string source;
  json overrides = json::object();
  if (!o.fixture.empty()) {
    system = fixture(o.fixture);
    source = "fixture:" + o.fixture;
    overrides["fixture_defaults"] = {{"lambda", system->lambda(0)},
                                     {"M", system->M()},
                                     {"T", system->T()},
                                     {"gamma0", system->mode_name(system->gamma0())}};
  } else if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw InputError("config", "cannot read '" + o.config + "'");
    std::ostringstream text;
    text << in.rdbuf();
    system = parse_system_text(text.str());
    source = "config:" + o.config;
  } else {
    throw InputError("config", "one of --config or --fixture is required");
  }
  if (o.gamma0) {
    system = system->with_gamma0(*o.gamma0);
    overrides["gamma0"] = *o.gamma0;
  }
  if (o.T) {
    system = system->with_horizon(*o.T);
    overrides["T"] = *o.T;
  }
  if (o.M) {
    system = system->with_jump_cap(*o.M);
    overrides["M"] = *o.M;
  }
  if (o.lambda) {
    system = system->with_uniform_rate(*o.lambda);
    overrides["lambda"] = *o.lambda;
  }
  return {std::move(*system), std::move(source), std::move(overrides)};
}

std::ofstream open_output(const std::string& path, const char* field) {
  std::ofstream out(path);
  if (!out) throw InputError(field, "cannot write '" + path + "'");
  return out;
}

json thresholds_json(const Options& o, const K0Diagnostics* diag) {
  json t = {{"rank_tol", kRankTol},
            {"psd_tolerance", 1e-6},
            {"gramian_condition_limit", 1e12},
            {"stagnation", o.stagnation},
            {"decay_per_decade", VerdictThresholds{}.decay_per_decade}};
  if (diag)
    t["delta_pd"] = diag->delta_pd;
  else if (o.delta_pd)
    t["delta_pd"] = *o.delta_pd;
  else
    t["delta_pd"] = "1e-4 (1 + trace(k0) / N)";
  return t;
}

SimulationSummary run_simulation(const SwitchSystem& system, const Options& o,
                                 const RiccatiSolution& feedback_solution,
                                 std::vector<SamplePath>* dumped) {
  SimulationSummary s;
  s.samples = o.samples;
  s.seed = o.seed;
  s.grid_steps = o.sim_steps;
  const Index N = system.N();
  s.x0 = Vector::Ones(N);
  s.y0 = Vector::Unit(N, 0);

  s.policy_seed = o.seed + 1;
  const auto [primal, dual] = random_linear_policies(system, s.policy_seed);
  s.duality = duality_check(system, s.x0, s.y0, primal, dual, o.samples, o.seed, o.sim_steps);

  s.feedback_epsilon = feedback_solution.params().epsilon;
  s.feedback_y0 = s.y0;
  s.feedback_cost = mc_cost_dual(system, s.y0, riccati_feedback_policy(system, feedback_solution),
                                 o.samples, o.seed, o.sim_steps);
  s.riccati_form = s.y0.dot(K0(feedback_solution, system.gamma0()) * s.y0);

  PrimalPolicy control = [](double, const ModeTrajectory&, const Vector&, Vector& u) {
    u.setZero();
  };
  s.gramian_skipped = o.skip_gramian;
  if (!o.skip_gramian) {
    const auto g = gramian_control(pre_jump_drift(system), system.B(system.gamma0()),
                                   system.T(), s.x0, o.grid_steps);
    s.gramian = g.gramian;
    s.gramian_condition = g.condition;
    control = g.pre_jump_policy();
    for (const auto& x : primal_terminal_states(system, s.x0, control, o.samples, o.seed,
                                                o.sim_steps))
      s.max_terminal_norm = std::max(s.max_terminal_norm, x.norm());
  }
  if (dumped) {
    const std::size_t count = std::min<std::size_t>(o.samples, 100);
    for (std::size_t i = 0; i < count; ++i)
      dumped->push_back(simulate_primal(system, s.x0, control, sample_seed(o.seed, i),
                                        o.sim_steps));
  }
  return s;
}

int execute(const std::string& command, const Options& o, std::ostream& out) {
  const auto total_start = Clock::now();
  json timing = json::object();
  json report;
  report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  report["command"] = command;

  auto start = Clock::now();
  const Loaded loaded = load_system(o);
  const SwitchSystem& system = loaded.system;
  report["system"] = system_section(system, loaded.source, loaded.overrides);
  timing["validate"] = seconds_since(start);

  const bool all = command == "certify";
  const LevelMMode level_M_mode = parse_level_M_mode(o.level_M_mode);
  std::optional<K0Diagnostics> diag;
  json verdicts = json::object();

  if (command == "invariance" || all) {
    start = Clock::now();
    if (!system.B_mode_independent() && all) {
      report["invariance"] = {{"skipped", "B depends on the mode"}};
    } else {
      const VLadder ladder = v_ladder(system);
      const bool approx = approx_null_verdict(system, ladder);
      const auto sufficiency = approx_ctrl_sufficient(system);
      report["invariance"] = invariance_section(system, ladder, approx, sufficiency);
      verdicts["approx_null_controllable"] = approx;
      verdicts["approx_ctrl_sufficient"] = to_string(sufficiency.verdict);
    }
    timing["invariance"] = seconds_since(start);
  }

  std::optional<RiccatiSolution> solution;
  auto single_solve = [&]() -> const RiccatiSolution& {
    if (!solution)
      solution = solve(system, RiccatiParams::control_cost(system, o.eps, o.grid_steps,
                                                           level_M_mode));
    return *solution;
  };

  if (command == "riccati" || all) {
    start = Clock::now();
    report["riccati"] = riccati_section(system, single_solve());
    if (!o.dump_curves.empty()) {
      auto csv = open_output(o.dump_curves, "dump-curves");
      write_csv(csv, system, *solution);
    }
    timing["riccati"] = seconds_since(start);
  }

  if (command == "metric" || all) {
    start = Clock::now();
    const EpsilonSchedule schedule = o.eps_schedule.empty()
                                         ? EpsilonSchedule::standard()
                                         : EpsilonSchedule(o.eps_schedule);
    VerdictThresholds thresholds;
    thresholds.delta_pd = o.delta_pd;
    thresholds.stagnation = o.stagnation;
    diag = k0_estimate(system, schedule, o.grid_steps, level_M_mode, thresholds);
    report["metric"] = to_json(*diag);
    verdicts["exact_null"] = to_string(diag->verdict);
    timing["metric"] = seconds_since(start);
  }

  if (command == "simulate" || all) {
    start = Clock::now();
    if (o.samples < 100) throw InputError("samples", "at least 100 samples are required");
    std::vector<SamplePath> paths;
    const auto summary =
        run_simulation(system, o, single_solve(), o.dump_paths.empty() ? nullptr : &paths);
    report["simulation"] = simulation_section(summary);
    if (!o.dump_paths.empty()) {
      auto csv = open_output(o.dump_paths, "dump-paths");
      write_paths_csv(csv, system, paths);
    }
    timing["simulation"] = seconds_since(start);
  }

  if (!verdicts.empty()) report["verdicts"] = verdicts;
  report["thresholds"] = thresholds_json(o, diag ? &*diag : nullptr);
  timing["total"] = seconds_since(total_start);
  report["timing"] = timing;

  if (o.output.empty()) {
    out << report.dump(2) << "\n";
  } else {
    auto file = open_output(o.output, "output");
    file << report.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Controllability analysis for Markov switch systems", "swctrl"};
  app.set_version_flag("--version", kToolVersion);
  Options options;
  std::string show_fixture;
  app.add_option("--show-fixture", show_fixture, "print a built-in system and exit");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"validate", "parse and validate the system"},
      {"invariance", "subspace ladder and approximate controllability verdicts"},
      {"riccati", "solve the Riccati family at --eps"},
      {"metric", "k0 over the epsilon schedule and the exact-null verdict"},
      {"simulate", "Monte-Carlo cross-checks"},
      {"certify", "all of the above"}};
  for (const auto& [name, help] : commands) add_common(*app.add_subcommand(name, help), options);
  app.require_subcommand(0, 1);

  std::vector<const char*> argv = {"swctrl"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (!show_fixture.empty()) {
      const auto doc = fixture_document(show_fixture);
      if (!doc) throw InputError("fixture", "unknown fixture '" + show_fixture + "'");
      out << json::parse(*doc).dump(2) << "\n";
      return 0;
    }
    const auto chosen = app.get_subcommands();
    if (chosen.empty()) {
      err << "error: a command is required\n" << app.help();
      return 1;
    }
    return execute(chosen.front()->get_name(), options, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace swctrl::cli
