#include "phstab/analysis.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>

namespace phstab {

namespace {

using nlohmann::json;

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json to_json(const ErrorInfo& e) {
  return {{"code", e.code}, {"message", e.message}, {"details", e.details}};
}

std::string to_string(Definiteness d) {
  switch (d) {
    case Definiteness::StrictlyPositive: return "StrictlyPositive";
    case Definiteness::PositiveSemidefinite: return "PositiveSemidefinite";
    case Definiteness::Indefinite: return "Indefinite";
  }
  return "Indefinite";
}

json to_json(const StabilityReport& r) {
  json out;
  const Verdict& v = r.verdict;
  out["verdict"] = {
      {"kind", to_string(v.kind)},
      {"description", v.description},
      {"witness_t", opt(v.witness_t)},
      {"sigma_min_at_witness", opt(v.sigma_min_at_witness)},
      {"min_sigma", v.min_sigma},
      {"argmin_t", v.argmin_t},
      {"t_max", v.t_max},
  };
  if (v.criterion) {
    const auto& c = *v.criterion;
    json cj = {{"kind", c.kind == CriterionKind::StrictContraction ? "StrictContraction" : "DissipationRate"},
               {"label", c.label},
               {"m_norm", c.m_norm}};
    if (c.endpoint) {
      cj["endpoint"] = *c.endpoint == Endpoint::A ? "a" : "b";
      cj["rate"] = c.rate.unbounded ? json("unbounded") : json(c.rate.value);
    }
    out["verdict"]["criterion"] = std::move(cj);
  } else {
    out["verdict"]["criterion"] = nullptr;
  }
  out["accretivity"] = {{"classification", to_string(r.accretivity.classification)},
                        {"min_eigenvalue", r.accretivity.min_eigenvalue},
                        {"m_norm", opt(r.accretivity.m_norm)}};
  out["contraction"] = {{"M", to_json(r.contraction.m)}, {"K", to_json(r.contraction.k)}};
  const auto& b = r.condition_b;
  json also = json::array();
  for (auto c : b.also_satisfied) also.push_back(to_string(c));
  out["uniform_bound"] = {{"certified", to_string(b.certified)},
                          {"bound", opt(b.certified_bound)},
                          {"also_satisfied", std::move(also)},
                          {"swept_sup", b.swept_sup},
                          {"swept_sup_doubled", b.swept_sup_doubled},
                          {"growth_flag", b.growth_flag},
                          {"t_max", b.t_max},
                          {"total_variation", b.total_variation},
                          {"inverse_total_variation", b.inverse_total_variation},
                          {"gronwall_factor", b.gronwall_factor},
                          {"note", b.note}};
  const auto& s = r.summary;
  json rounds = json::array();
  for (const auto& rm : s.rounds) {
    rounds.push_back({{"t_max", rm.t_max}, {"running_min", rm.running_min}, {"argmin_t", rm.argmin_t}});
  }
  out["sweep"] = {{"n_samples", s.n_samples},
                  {"t_max", s.t_max},
                  {"min_sigma", s.min_sigma},
                  {"argmin_t", s.argmin_t},
                  {"min_abs_det", s.min_abs_det},
                  {"max_phi_norm", s.max_phi_norm},
                  {"unstable_threshold", s.unstable_threshold},
                  {"rounds", std::move(rounds)}};
  out["trail"] = r.trail;
  out["caveats"] = r.caveats;
  return out;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ErrorInfo error_info(const Error& e) {
  return {std::string(to_string(e.code())), e.what(), e.details()};
}

SimulationSummary simulate(const ProblemSpec& problem, const SimParams& params, std::uint64_t seed) {
  const DiscreteGenerator gen = discretize(problem, params.n_cells);
  const Vector u0 = bump_initial_state(gen, seed);
  SimulationSummary out;
  out.n_cells = params.n_cells;
  out.t_final = params.t_final;
  out.dt = params.dt;
  out.trajectory = evolve(gen, u0, params.t_final, params.dt);
  out.energy_initial = out.trajectory.energy.front();
  out.energy_final = out.trajectory.energy.back();
  out.fitted_rate = out.trajectory.fitted_rate;
  out.fit_r2 = out.trajectory.fit_r2;
  if (gen.size() <= kAnalysisAbscissaBudget) out.eigen_abscissa = eigen_abscissa(gen);
  return out;
}

SweepParams effective_sweep(const ProblemSpec& problem, const AnalysisOptions& options) {
  SweepParams p = problem.sweep;
  if (options.t_max) p.t_max = options.t_max;
  if (options.samples) p.n_samples = *options.samples;
  p.threads = options.threads;
  return p;
}

Analysis analyze(const ProblemSpec& problem, const AnalysisOptions& options) {
  Analysis out;
  out.problem_name = problem.name;
  out.sweep = effective_sweep(problem, options);
  try {
    out.stability = sweep_and_verdict(problem, out.sweep);
  } catch (const Error& e) {
    out.error = error_info(e);
    return out;
  }
  if (options.simulate && problem.sim) {
    try {
      out.simulation = simulate(problem, *problem.sim, options.seed);
      out.stability->caveats.push_back(kSimulatorCaveat);
    } catch (const Error& e) {
      out.simulation_error = error_info(e);
    }
  }
  return out;
}

std::string verdict_label(const Analysis& analysis) {
  if (analysis.error) return analysis.error->code == "NotAGenerator" ? "NotAGenerator" : "Error";
  return to_string(analysis.stability->verdict.kind);
}

int exit_code(const Analysis& analysis) {
  if (analysis.error || !analysis.stability) return 1;
  switch (analysis.stability->verdict.kind) {
    case VerdictKind::CertifiedStable:
    case VerdictKind::NumericallyStable:
      return 0;
    case VerdictKind::Unstable:
      return 2;
    case VerdictKind::Inconclusive:
    case VerdictKind::NotExponentiallyStableEvidence:
      return 3;
  }
  return 1;
}

std::string report_json(const Analysis& analysis, bool reproducible) {
  json out;
  out["tool"] = "phstab";
  out["problem"] = analysis.problem_name;
  out["verdict_label"] = verdict_label(analysis);
  out["exit_code"] = exit_code(analysis);
  out["reproducible"] = reproducible;
  if (!reproducible) out["generated_at"] = timestamp();
  out["time_convention"] =
      "Phi_t solves u' = -P1^{-1}(i t H^{-1} + P0) u with Phi_t(a) = I; sweeps cover t >= 0 since "
      "Phi_{-t} is the complex conjugate of Phi_t";
  out["sweep_params"] = {{"t_max", opt(analysis.sweep.t_max)},
                         {"n_samples", analysis.sweep.n_samples},
                         {"doubling_rounds", analysis.sweep.doubling_rounds},
                         {"evidence_drop", analysis.sweep.evidence_drop}};
  if (analysis.error) {
    out["error"] = to_json(*analysis.error);
  } else {
    out["error"] = nullptr;
    out["analysis"] = to_json(*analysis.stability);
  }
  if (analysis.simulation) {
    const auto& s = *analysis.simulation;
    out["simulation"] = {{"n_cells", s.n_cells},
                         {"t_final", s.t_final},
                         {"dt", s.dt},
                         {"energy_initial", s.energy_initial},
                         {"energy_final", s.energy_final},
                         {"fitted_rate", s.fitted_rate},
                         {"fit_r2", s.fit_r2},
                         {"eigen_abscissa", opt(s.eigen_abscissa)}};
  } else {
    out["simulation"] = nullptr;
  }
  if (analysis.simulation_error) out["simulation_error"] = to_json(*analysis.simulation_error);
  return out.dump(2) + "\n";
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
  out << "t,abs_det,sigma_min,inv_norm,phi_norm\n";
  out.precision(17);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    out << sweep.ts[i] << ',' << sweep.det_abs[i] << ',' << sweep.sigma_min[i] << ',';
    if (std::isfinite(sweep.inv_norm[i])) out << sweep.inv_norm[i];
    out << ',' << sweep.phi_norm[i] << '\n';
  }
}

void write_energy_csv(const EnergyTrajectory& trajectory, std::ostream& out) {
  out << "t,E\n";
  out.precision(17);
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    out << trajectory.times[i] << ',' << trajectory.energy[i] << '\n';
  }
}

}  // namespace phstab
