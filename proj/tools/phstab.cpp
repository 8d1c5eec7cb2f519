#include "phstab/analysis.hpp"
#include "phstab/fixtures.hpp"
#include "phstab/spec_loader.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace phstab;

namespace {

struct Source {
  std::string spec_path;
  std::string fixture_name;
};

void add_source(CLI::App* cmd, Source& src) {
  auto* file = cmd->add_option("spec", src.spec_path, "problem file (TOML)");
  auto* fix = cmd->add_option("--fixture", src.fixture_name, "built-in fixture name");
  file->excludes(fix);
  fix->excludes(file);
}

ProblemSpec load(const Source& src) {
  if (!src.fixture_name.empty()) return fixture(src.fixture_name).problem;
  if (src.spec_path.empty()) throw Error(ErrorCode::InvalidArgument, "give a spec file or --fixture <name>");
  return load_spec(src.spec_path);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::NotFound, "cannot write " + path.string());
  out << text;
}

void print_error(const Error& e, bool json_only) {
  if (json_only) {
    Analysis failed;
    failed.error = error_info(e);
    std::cout << report_json(failed, true);
  } else {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& d : e.details()) std::cerr << "  " << d << '\n';
  }
}

void print_summary(const Analysis& a) {
  std::cout << "problem: " << a.problem_name << '\n';
  std::cout << "verdict: " << verdict_label(a) << '\n';
  if (a.error) {
    std::cout << "error: " << a.error->message << '\n';
    for (const auto& d : a.error->details) std::cout << "  " << d << '\n';
    return;
  }
  for (const auto& line : a.stability->trail) std::cout << "  - " << line << '\n';
  const auto& s = a.stability->summary;
  std::cout << "sweep: " << s.n_samples << " samples on [0, " << s.t_max << "], min sigma_min = " << s.min_sigma
            << " at t = " << s.argmin_t << '\n';
  if (a.simulation) {
    std::cout << "simulation: N = " << a.simulation->n_cells << ", fitted rate = " << a.simulation->fitted_rate
              << " (r^2 = " << a.simulation->fit_r2 << ")\n";
  } else if (a.simulation_error) {
    std::cout << "simulation skipped: " << a.simulation_error->message << '\n';
  }
  for (const auto& c : a.stability->caveats) std::cout << "note: " << c << '\n';
}

int run_analyze(const Source& src, const AnalysisOptions& opts, const std::string& out_dir, bool reproducible,
                bool json_only) {
  const Analysis a = analyze(load(src), opts);
  const std::string report = report_json(a, reproducible);
  if (json_only) {
    std::cout << report;
  } else {
    print_summary(a);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "report.json", report);
    if (a.stability) {
      std::ofstream sweep(fs::path(out_dir) / "sweep.csv");
      write_sweep_csv(a.stability->sweep, sweep);
    }
    if (a.simulation) {
      std::ofstream energy(fs::path(out_dir) / "energy.csv");
      write_energy_csv(a.simulation->trajectory, energy);
    }
  }
  return exit_code(a);
}

int run_sweep(const Source& src, const AnalysisOptions& opts, const std::string& out_dir) {
  const ProblemSpec problem = load(src);
  if (auto errors = validate(problem); !errors.empty()) {
    throw Error(ErrorCode::ValidationError, "problem specification is invalid", errors);
  }
  const SweepParams params = effective_sweep(problem, opts);
  const double t_max = params.t_max.value_or(default_t_max(problem.hamiltonian, problem.p1));
  const Propagator prop(problem.hamiltonian, problem.p1, problem.p0);
  const SweepResult result =
      sweep_t_matrix(prop, boundary_matrix(problem), sweep_grid(t_max, params.n_samples), params.threads);
  if (out_dir.empty()) {
    write_sweep_csv(result, std::cout);
  } else {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "sweep.csv");
    write_sweep_csv(result, out);
  }
  return 0;
}

int run_simulate(const Source& src, std::optional<SimParams> override_params, std::uint64_t seed,
                 const std::string& out_dir, const std::string& triplets) {
  const ProblemSpec problem = load(src);
  if (auto errors = validate(problem); !errors.empty()) {
    throw Error(ErrorCode::ValidationError, "problem specification is invalid", errors);
  }
  const SimParams params = override_params.value_or(problem.sim.value_or(SimParams{}));
  const SimulationSummary s = simulate(problem, params, seed);
  if (!triplets.empty()) {
    std::ofstream out(triplets);
    write_triplets(discretize(problem, params.n_cells), out);
  }
  if (out_dir.empty()) {
    write_energy_csv(s.trajectory, std::cout);
  } else {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "energy.csv");
    write_energy_csv(s.trajectory, out);
  }
  std::cerr << "fitted rate " << s.fitted_rate << " (r^2 = " << s.fit_r2 << ")";
  if (s.eigen_abscissa) std::cerr << ", eigen abscissa " << *s.eigen_abscissa;
  std::cerr << '\n';
  return 0;
}

int run_fixtures(const std::string& write_dir) {
  for (const auto& name : list_fixtures()) {
    if (name == "random_<seed>") {
      std::cout << name << "\tseeded random problem, e.g. random_7\n";
      continue;
    }
    const Fixture f = fixture(name);
    std::cout << name << '\t' << f.description << '\n';
    if (!write_dir.empty()) {
      fs::create_directories(write_dir);
      write_file(fs::path(write_dir) / (name + ".toml"), to_toml(f.problem));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponential stability analysis for linear port-Hamiltonian systems on an interval"};
  app.require_subcommand(1);

  Source src;
  AnalysisOptions opts;
  std::string out_dir;
  bool reproducible = false;
  bool json_only = false;
  bool no_sim = false;
  double t_max = 0.0;
  int samples = 0;

  auto add_sweep_flags = [&](CLI::App* cmd) {
    cmd->add_option("--t-max", t_max, "largest frequency swept")->check(CLI::PositiveNumber);
    cmd->add_option("--samples", samples, "base sweep samples")->check(CLI::Range(2, 1 << 24));
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
  };

  auto* analyze_cmd = app.add_subcommand("analyze", "certify or refute exponential stability");
  add_source(analyze_cmd, src);
  add_sweep_flags(analyze_cmd);
  analyze_cmd->add_option("--seed", opts.seed, "seed for the simulator's initial state");
  analyze_cmd->add_flag("--reproducible", reproducible, "omit timestamps from report.json");
  analyze_cmd->add_option("--out", out_dir, "directory for report.json, sweep.csv and energy.csv");
  analyze_cmd->add_flag("--json-only", json_only, "print report.json to stdout instead of a summary");
  analyze_cmd->add_flag("--no-sim", no_sim, "skip the simulator cross-check");

  auto* sweep_cmd = app.add_subcommand("sweep", "write the T_t sweep as CSV");
  add_source(sweep_cmd, src);
  add_sweep_flags(sweep_cmd);
  sweep_cmd->add_option("--out", out_dir, "directory for sweep.csv (default stdout)");

  SimParams sim;
  bool sim_override = false;
  std::string triplets;
  auto* sim_cmd = app.add_subcommand("simulate", "evolve the discretised system and write energy.csv");
  add_source(sim_cmd, src);
  sim_cmd->add_option("--cells", sim.n_cells, "number of cells")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--t-final", sim.t_final, "final time")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--dt", sim.dt, "time step")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", opts.seed, "seed for the initial state");
  sim_cmd->add_option("--out", out_dir, "directory for energy.csv (default stdout)");
  sim_cmd->add_option("--triplets", triplets, "also dump the generator matrix as triplets");

  std::string write_dir;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "list built-in fixtures");
  fixtures_cmd->add_option("--write", write_dir, "write each fixture as a TOML file into this directory");

  CLI11_PARSE(app, argc, argv);

  if (t_max > 0.0) opts.t_max = t_max;
  if (samples > 0) opts.samples = samples;
  opts.simulate = !no_sim;
  sim_override = sim_cmd->count("--cells") + sim_cmd->count("--t-final") + sim_cmd->count("--dt") > 0;

  try {
    if (*analyze_cmd) return run_analyze(src, opts, out_dir, reproducible, json_only);
    if (*sweep_cmd) return run_sweep(src, opts, out_dir);
    if (*sim_cmd) {
      std::optional<SimParams> params;
      if (sim_override) {
        const ProblemSpec p = load(src);
        SimParams base = p.sim.value_or(SimParams{});
        if (sim_cmd->count("--cells")) base.n_cells = sim.n_cells;
        if (sim_cmd->count("--t-final")) base.t_final = sim.t_final;
        if (sim_cmd->count("--dt")) base.dt = sim.dt;
        params = base;
      }
      return run_simulate(src, params, opts.seed, out_dir, triplets);
    }
    if (*fixtures_cmd) return run_fixtures(write_dir);
  } catch (const Error& e) {
    print_error(e, json_only);
    return 1;
  } catch (const std::exception& e) {
    print_error(Error(ErrorCode::InvalidArgument, e.what()), json_only);
    return 1;
  }
  return 1;
}
