#include "phstab/stability.hpp"

#include "parallel.hpp"
#include "phstab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace phstab {

namespace {

constexpr std::size_t kRefineCandidates = 512;
constexpr double kInvNormFloor = 1e-14;
constexpr std::size_t kEvidenceMaxGap = 2;

double max_inverse_diag(const Matrix& diag_matrix) {
  if (diag_matrix.size() == 0) return 0.0;
  return diag_matrix.diagonal().cwiseInverse().maxCoeff();
}

double max_diag(const Matrix& diag_matrix) {
  if (diag_matrix.size() == 0) return 0.0;
  return diag_matrix.diagonal().maxCoeff();
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool is_generator_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::SSingular:
    case ErrorCode::DissipativityViolated:
    case ErrorCode::MNotContraction:
    case ErrorCode::KSingular:
      return true;
    default:
      return false;
  }
}

// Indices of local minima of values along the (sorted) grid.
std::vector<std::size_t> local_minima(const std::vector<double>& values) {
  std::vector<std::size_t> out;
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || values[i] <= values[i - 1];
    const bool right_ok = i + 1 == n || values[i] <= values[i + 1];
    if (left_ok && right_ok) out.push_back(i);
  }
  return out;
}

}  // namespace

CMatrix t_matrix(const Matrix& w, const CMatrix& phi_b) {
  const auto d = phi_b.rows();
  if (w.rows() != d || w.cols() != 2 * d || phi_b.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "W and Phi shapes disagree");
  }
  return w.leftCols(d).cast<Complex>() * phi_b + w.rightCols(d).cast<Complex>();
}

VUFactorization vu_factorization(const CMatrix& phi_b, const SpectralSplit& split) {
  const int d = split.dim;
  if (phi_b.rows() != d || phi_b.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "Phi must be d x d");
  }
  const CMatrix qp = split.q_plus.cast<Complex>();
  const CMatrix qm = split.q_minus.cast<Complex>();
  VUFactorization out;
  out.v = qp + qm * phi_b;
  Eigen::JacobiSVD<CMatrix> svd(out.v);
  const auto& s = svd.singularValues();
  if (!(s(d - 1) > 1e-14 * s(0))) {
    throw Error(ErrorCode::VSingular, "V = Q+ + Q- Phi(b) is numerically singular");
  }
  const CMatrix v_inv = out.v.fullPivLu().inverse();
  out.u = (qp * phi_b + qm) * v_inv;
  out.v_inv_norm = 1.0 / s(d - 1);
  out.unitarity_defect = norm2(CMatrix(out.u * out.u.adjoint() - CMatrix::Identity(d, d)));

  const double plus_inv = max_inverse_diag(split.p1_plus);
  const double minus = max_diag(split.p1_minus);
  const double minus_inv = max_inverse_diag(split.p1_minus);
  const double head = std::sqrt(plus_inv) * (1.0 + std::sqrt(minus * minus_inv) * norm2(phi_b));
  out.v_inv_bound = head + std::sqrt(minus * minus_inv);
  out.v_inv_bound_corrected = head + std::sqrt(minus_inv);
  return out;
}

std::optional<SufficientCriterion> certify_sufficient(const Matrix& m, const SpectralSplit& split,
                                                      const ConditionBReport& condition_b) {
  if (condition_b.certified == BCertificate::None) return std::nullopt;
  SufficientCriterion out;
  out.m_norm = norm2(m);
  if (out.m_norm <= 1.0 - 1e-8) {
    out.kind = CriterionKind::StrictContraction;
    out.label = "strict boundary contraction: ||M|| = " + format_double(out.m_norm) + " < 1";
    return out;
  }
  for (Endpoint eta : {Endpoint::A, Endpoint::B}) {
    const DissipationRate rate = dissipation_rate(m, split, eta);
    if (rate.positive()) {
      out.kind = CriterionKind::DissipationRate;
      out.endpoint = eta;
      out.rate = rate;
      out.label = std::string("boundary dissipation at endpoint ") +
                  (eta == Endpoint::A ? "a" : "b") + ": c = " +
                  (rate.unbounded ? std::string("unbounded") : format_double(rate.value));
      return out;
    }
  }
  return std::nullopt;
}

TSample sample_t(const Propagator& prop, const Matrix& w, double t) {
  const CMatrix phi = prop.phi_b(t);
  const CMatrix tm = t_matrix(w, phi);
  TSample out;
  out.t = t;
  out.phi_norm = norm2(phi);
  Eigen::JacobiSVD<CMatrix> svd(tm);
  const auto& s = svd.singularValues();
  out.sigma_min = s(s.size() - 1);
  Eigen::FullPivLU<CMatrix> lu(tm);
  out.det_abs = std::abs(lu.determinant());
  if (out.sigma_min < kInvNormFloor) {
    out.inv_norm = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.inv_norm = norm2(CMatrix(lu.inverse()));
  }
  return out;
}

SweepResult sweep_t_matrix(const Propagator& prop, const Matrix& w, const std::vector<double>& ts,
                           unsigned threads) {
  std::vector<TSample> samples(ts.size());
  detail::parallel_for(ts.size(), threads, [&](std::size_t i) { samples[i] = sample_t(prop, w, ts[i]); });
  SweepResult out;
  for (const auto& s : samples) {
    out.ts.push_back(s.t);
    out.det_abs.push_back(s.det_abs);
    out.sigma_min.push_back(s.sigma_min);
    out.inv_norm.push_back(s.inv_norm);
    out.phi_norm.push_back(s.phi_norm);
  }
  return out;
}

TSample refine_minimum(const Propagator& prop, const Matrix& w, double lo, double hi, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  TSample f1 = sample_t(prop, w, x1);
  TSample f2 = sample_t(prop, w, x2);
  TSample best = f1.sigma_min <= f2.sigma_min ? f1 : f2;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    if (f1.sigma_min <= f2.sigma_min) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = sample_t(prop, w, x1);
      if (f1.sigma_min < best.sigma_min) best = f1;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = sample_t(prop, w, x2);
      if (f2.sigma_min < best.sigma_min) best = f2;
    }
  }
  return best;
}

std::string to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::CertifiedStable: return "CertifiedStable";
    case VerdictKind::Unstable: return "Unstable";
    case VerdictKind::NumericallyStable: return "NumericallyStable";
    case VerdictKind::NotExponentiallyStableEvidence: return "NotExponentiallyStableEvidence";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

StabilityReport sweep_and_verdict(const ProblemSpec& problem, const SweepParams& params) {
  if (auto errors = validate(problem); !errors.empty()) {
    throw Error(ErrorCode::ValidationError, "problem specification is invalid", std::move(errors));
  }
  StabilityReport report;
  const SpectralSplit split = spectral_split(problem.p1);
  Matrix w;
  try {
    w = boundary_matrix(problem);
    report.accretivity = dissipativity_check(w, problem.p1);
    if (report.accretivity.classification == Definiteness::Indefinite) {
      throw Error(ErrorCode::NotAGenerator,
                  "boundary gram matrix is indefinite (min eigenvalue " +
                      format_double(report.accretivity.min_eigenvalue) + ")");
    }
    report.contraction = w_to_mk(w, split);
  } catch (const Error& e) {
    if (is_generator_failure(e.code())) throw Error(ErrorCode::NotAGenerator, e.what());
    throw;
  }
  report.trail.push_back(
      std::string("accretivity: boundary gram matrix ") +
      (report.accretivity.classification == Definiteness::StrictlyPositive ? "positive definite"
                                                                           : "positive semidefinite") +
      ", so -A generates a contraction semigroup; ||M|| = " +
      format_double(norm2(report.contraction.m)));

  report.condition_b = condition_b_estimate(problem.hamiltonian, problem.p1, problem.p0, params);
  if (report.condition_b.certified != BCertificate::None) {
    report.trail.push_back("uniform bound on fundamental matrices certified (" +
                           to_string(report.condition_b.certified) +
                           "), bound = " + format_double(*report.condition_b.certified_bound));
  } else {
    report.trail.push_back("uniform bound on fundamental matrices not certified; " +
                           report.condition_b.note);
    report.caveats.push_back(
        "The frequency-domain characterisation assumes uniformly bounded fundamental matrices; "
        "without a certificate every sweep-based verdict is a heuristic, even in principle.");
  }

  const auto criterion = certify_sufficient(report.contraction.m, split, report.condition_b);

  const Propagator prop(problem.hamiltonian, problem.p1, problem.p0);
  const double t_max0 = params.t_max.value_or(default_t_max(problem.hamiltonian, problem.p1));
  double running_min = std::numeric_limits<double>::infinity();
  double argmin_t = 0.0;
  double previous_edge = 0.0;
  for (int round = 0; round <= params.doubling_rounds; ++round) {
    const double t_hi = std::ldexp(t_max0, round);
    std::vector<double> grid = round == 0 ? sweep_grid(t_max0, params.n_samples)
                                          : extension_grid(previous_edge, t_hi, t_max0, params.n_samples);
    SweepResult part = sweep_t_matrix(prop, w, grid, params.threads);

    // Bracket local minima with the neighbouring samples; include the previous edge.
    std::vector<double> ts = part.ts;
    std::vector<double> sig = part.sigma_min;
    if (round > 0 && !report.sweep.ts.empty()) {
      ts.insert(ts.begin(), report.sweep.ts.back());
      sig.insert(sig.begin(), report.sweep.sigma_min.back());
    }
    for (std::size_t i = 0; i < sig.size(); ++i) {
      if (sig[i] < running_min) {
        running_min = sig[i];
        argmin_t = ts[i];
      }
    }
    std::vector<std::size_t> minima = local_minima(sig);
    std::sort(minima.begin(), minima.end(), [&](auto l, auto r) { return sig[l] < sig[r]; });
    if (minima.size() > kRefineCandidates) minima.resize(kRefineCandidates);
    std::vector<TSample> refined(minima.size());
    detail::parallel_for(minima.size(), params.threads, [&](std::size_t c) {
      const std::size_t i = minima[c];
      const double lo = ts[i == 0 ? 0 : i - 1];
      const double hi = ts[std::min(i + 1, ts.size() - 1)];
      const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi));
      refined[c] = refine_minimum(prop, w, lo, hi, tol);
    });
    for (const auto& s : refined) {
      if (s.sigma_min < running_min) {
        running_min = s.sigma_min;
        argmin_t = s.t;
      }
    }

    for (std::size_t i = 0; i < part.size(); ++i) {
      report.sweep.ts.push_back(part.ts[i]);
      report.sweep.det_abs.push_back(part.det_abs[i]);
      report.sweep.sigma_min.push_back(part.sigma_min[i]);
      report.sweep.inv_norm.push_back(part.inv_norm[i]);
      report.sweep.phi_norm.push_back(part.phi_norm[i]);
    }
    report.summary.rounds.push_back({t_hi, running_min, argmin_t});
    previous_edge = t_hi;
  }

  auto& summary = report.summary;
  summary.n_samples = report.sweep.size();
  summary.t_max = previous_edge;
  summary.min_sigma = running_min;
  summary.argmin_t = argmin_t;
  summary.min_abs_det = *std::min_element(report.sweep.det_abs.begin(), report.sweep.det_abs.end());
  summary.max_phi_norm = *std::max_element(report.sweep.phi_norm.begin(), report.sweep.phi_norm.end());
  summary.unstable_threshold = 1e-10 * norm2(w) * std::max(1.0, sample_t(prop, w, argmin_t).phi_norm);

  Verdict& verdict = report.verdict;
  verdict.min_sigma = running_min;
  verdict.argmin_t = argmin_t;
  verdict.t_max = summary.t_max;

  // Two drops of more than evidence_drop with at most one flat doubling in between. Near-zeros
  // of almost periodic determinants can be spaced by more than a factor of 4 in t.
  bool evidence = false;
  std::optional<std::size_t> last_drop;
  for (std::size_t k = 1; k < summary.rounds.size(); ++k) {
    const bool drop =
        summary.rounds[k].running_min < (1.0 - params.evidence_drop) * summary.rounds[k - 1].running_min;
    if (!drop) continue;
    if (last_drop && k - *last_drop <= kEvidenceMaxGap) evidence = true;
    last_drop = k;
  }

  if (criterion) {
    verdict.kind = VerdictKind::CertifiedStable;
    verdict.criterion = criterion;
    verdict.description = "certified: " + criterion->label;
    report.trail.push_back(verdict.description);
    if (running_min < summary.unstable_threshold) {
      report.trail.push_back("warning: sweep found a near-singular T_t despite the certificate");
    }
  } else if (running_min < summary.unstable_threshold) {
    verdict.kind = VerdictKind::Unstable;
    verdict.witness_t = argmin_t;
    verdict.sigma_min_at_witness = running_min;
    verdict.description = "refuted: T_t is singular at t = " + format_double(argmin_t) +
                          " (sigma_min = " + format_double(running_min) +
                          "), so i t lies in the spectrum of A";
    report.trail.push_back(verdict.description);
  } else if (report.condition_b.certified == BCertificate::None && report.condition_b.growth_flag) {
    verdict.kind = VerdictKind::Inconclusive;
    verdict.description =
        "inconclusive: fundamental matrices not certified bounded and the sweep shows growth";
    report.trail.push_back(verdict.description);
  } else if (evidence) {
    verdict.kind = VerdictKind::NotExponentiallyStableEvidence;
    std::ostringstream os;
    os << "evidence (not certified): running minimum of sigma_min over doubling windows";
    for (const auto& r : summary.rounds) {
      os << " [t <= " << format_double(r.t_max) << ": " << format_double(r.running_min) << "]";
    }
    verdict.description = os.str();
    report.trail.push_back(verdict.description);
  } else {
    verdict.kind = VerdictKind::NumericallyStable;
    verdict.description = "numerically stable (not certified): min sigma_min = " +
                          format_double(running_min) + " over t <= " + format_double(summary.t_max);
    report.trail.push_back(verdict.description);
  }
  return report;
}

DiophantineHit diophantine_probe(const DiophantineFixture& fixture, long k_max, double eps) {
  const Matrix w = boundary_matrix(fixture.problem);
  const Propagator prop(fixture.problem.hamiltonian, fixture.problem.p1, fixture.problem.p0);
  for (long k = 1; k <= k_max; ++k) {
    const double closed = fixture.closed_form_at_k(k);
    if (!(std::abs(closed) < eps)) continue;
    DiophantineHit hit;
    hit.k = k;
    hit.t = fixture.t_of_k(k);
    hit.abs_det_closed = std::abs(closed);
    const CMatrix tm = t_matrix(w, prop.phi_b(fixture.internal_t(hit.t)));
    const Complex numeric = CMatrix(-tm).determinant();
    hit.abs_det_numeric = std::abs(numeric);
    const Complex general = fixture.closed_form_det(hit.t);
    if (std::abs(numeric - closed) > 1e-9 || std::abs(general - closed) > 1e-9) {
      throw Error(ErrorCode::InternalConsistency,
                  "closed form and numeric determinant disagree at k = " + std::to_string(k));
    }
    return hit;
  }
  throw Error(ErrorCode::NotFound, "no k <= " + std::to_string(k_max) + " with |det| < eps");
}

}  // namespace phstab
