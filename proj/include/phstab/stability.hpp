#pragma once

#include "phstab/boundary.hpp"
#include "phstab/problem.hpp"
#include "phstab/propagator.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace phstab {

/// T_t = W1 Phi_t(b) + W2.
CMatrix t_matrix(const Matrix& w, const CMatrix& phi_b);

struct VUFactorization {
  CMatrix v;
  CMatrix u;
  double v_inv_norm = 0.0;
  /// Bound on ||V^{-1}|| as stated in the literature; see v_inv_bound_corrected.
  double v_inv_bound = 0.0;
  /// Same block estimate keeping the ||(P1-)^{-1/2}|| factor of the lower-right block.
  double v_inv_bound_corrected = 0.0;
  double unitarity_defect = 0.0;  // ||U U^* - I||
};

VUFactorization vu_factorization(const CMatrix& phi_b, const SpectralSplit& split);

enum class CriterionKind { StrictContraction, DissipationRate };

struct SufficientCriterion {
  CriterionKind kind = CriterionKind::StrictContraction;
  double m_norm = 0.0;
  std::optional<Endpoint> endpoint;
  DissipationRate rate;
  std::string label;
};

/// Certified sufficient criteria for exponential stability; both require a certified
/// uniform bound on the fundamental matrices.
std::optional<SufficientCriterion> certify_sufficient(const Matrix& m, const SpectralSplit& split,
                                                      const ConditionBReport& condition_b);

struct SweepResult {
  std::vector<double> ts;
  std::vector<double> det_abs;
  std::vector<double> sigma_min;
  std::vector<double> inv_norm;  // NaN where sigma_min < 1e-14
  std::vector<double> phi_norm;

  std::size_t size() const noexcept { return ts.size(); }
};

struct TSample {
  double t = 0.0;
  double det_abs = 0.0;
  double sigma_min = 0.0;
  double inv_norm = 0.0;
  double phi_norm = 0.0;
};

TSample sample_t(const Propagator& prop, const Matrix& w, double t);

SweepResult sweep_t_matrix(const Propagator& prop, const Matrix& w, const std::vector<double>& ts,
                           unsigned threads = 0);

/// Golden-section minimisation of sigma_min(T_t) on [lo, hi].
TSample refine_minimum(const Propagator& prop, const Matrix& w, double lo, double hi, double tol);

enum class VerdictKind {
  CertifiedStable,
  Unstable,
  NumericallyStable,
  NotExponentiallyStableEvidence,
  Inconclusive,
};

std::string to_string(VerdictKind kind);

struct RoundMinimum {
  double t_max = 0.0;
  double running_min = 0.0;
  double argmin_t = 0.0;
};

struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  std::optional<SufficientCriterion> criterion;
  std::optional<double> witness_t;
  std::optional<double> sigma_min_at_witness;
  double min_sigma = 0.0;
  double argmin_t = 0.0;
  double t_max = 0.0;
  std::string description;
};

struct SweepSummary {
  std::size_t n_samples = 0;
  double t_max = 0.0;
  double min_sigma = 0.0;
  double argmin_t = 0.0;
  double min_abs_det = 0.0;
  double max_phi_norm = 0.0;
  double unstable_threshold = 0.0;
  std::vector<RoundMinimum> rounds;
};

struct StabilityReport {
  Verdict verdict;
  DissipativityReport accretivity;
  ContractionForm contraction;
  ConditionBReport condition_b;
  SweepSummary summary;
  SweepResult sweep;
  std::vector<std::string> trail;
  std::vector<std::string> caveats;
};

StabilityReport sweep_and_verdict(const ProblemSpec& problem, const SweepParams& params);

/// A family t_k with a closed form for det(-T_{t_k}) in the closed form's own time convention.
struct DiophantineFixture {
  std::function<double(long)> t_of_k;
  std::function<double(long)> closed_form_at_k;    // det(-T_{t_k}), reduced to a real number
  std::function<Complex(double)> closed_form_det;  // det(-T_t) at closed-form time t
  std::function<double(double)> internal_t;       // closed-form time to internal time
  ProblemSpec problem;
};

struct DiophantineHit {
  long k = 0;
  double t = 0.0;
  double abs_det_closed = 0.0;
  double abs_det_numeric = 0.0;
};

/// Smallest k <= k_max with |det(-T_{t_k})| < eps, cross-checked against the numeric pipeline.
DiophantineHit diophantine_probe(const DiophantineFixture& fixture, long k_max, double eps);

}  // namespace phstab
