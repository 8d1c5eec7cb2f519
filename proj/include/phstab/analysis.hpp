#pragma once

#include "phstab/error.hpp"
#include "phstab/problem.hpp"
#include "phstab/semigroup_sim.hpp"
#include "phstab/stability.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace phstab {

struct AnalysisOptions {
  std::optional<double> t_max;
  std::optional<int> samples;
  std::uint64_t seed = 0;
  bool simulate = true;
  unsigned threads = 0;
};

struct ErrorInfo {
  std::string code;
  std::string message;
  std::vector<std::string> details;
};

ErrorInfo error_info(const Error& e);

struct SimulationSummary {
  int n_cells = 0;
  double t_final = 0.0;
  double dt = 0.0;
  double energy_initial = 0.0;
  double energy_final = 0.0;
  double fitted_rate = 0.0;
  double fit_r2 = 0.0;
  std::optional<double> eigen_abscissa;  // only for small grids
  EnergyTrajectory trajectory;
};

/// Grids above this many unknowns skip the dense abscissa inside an analysis run.
inline constexpr Eigen::Index kAnalysisAbscissaBudget = 1000;

SimulationSummary simulate(const ProblemSpec& problem, const SimParams& params, std::uint64_t seed);

struct Analysis {
  std::string problem_name;
  SweepParams sweep;
  std::optional<StabilityReport> stability;
  std::optional<SimulationSummary> simulation;
  std::optional<ErrorInfo> simulation_error;
  std::optional<ErrorInfo> error;
};

/// Accretivity, uniform bound, certification or sweep, then the optional simulator run.
/// Library errors are captured in the result rather than thrown.
Analysis analyze(const ProblemSpec& problem, const AnalysisOptions& options);

/// Sweep parameters after command-line overrides.
SweepParams effective_sweep(const ProblemSpec& problem, const AnalysisOptions& options);

/// "NotAGenerator" or "Error" for failed runs, otherwise the verdict name.
std::string verdict_label(const Analysis& analysis);

/// 0 stable (certified or numerical), 2 unstable, 3 inconclusive or evidence, 1 otherwise.
int exit_code(const Analysis& analysis);

std::string report_json(const Analysis& analysis, bool reproducible);

void write_sweep_csv(const SweepResult& sweep, std::ostream& out);
void write_energy_csv(const EnergyTrajectory& trajectory, std::ostream& out);

inline constexpr const char* kSimulatorCaveat =
    "The simulator uses upwind fluxes, which add numerical dissipation: it can confirm decay, "
    "but a non-decaying mode only shows up approximately.";

}  // namespace phstab
