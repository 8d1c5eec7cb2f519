#include "phstab/propagator.hpp"

#include "parallel.hpp"
#include "phstab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace phstab {

void require_skew(const Matrix& p0) {
  if (p0.rows() != p0.cols()) throw Error(ErrorCode::DimensionMismatch, "P0 must be square");
  const double residual = (p0 + p0.transpose()).norm();
  if (residual > 1e-12 * std::max(1.0, p0.norm())) {
    throw Error(ErrorCode::InvalidP0, "P0 is not skew-symmetric");
  }
}

Propagator::Propagator(HamiltonianDensity h, const Matrix& p1, const Matrix& p0)
    : h_(std::move(h)), p1_(p1), p0_(p0) {
  const int d = h_.dim();
  if (p1_.rows() != d || p1_.cols() != d || p0_.rows() != d || p0_.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "P1, P0 and H differ in dimension");
  }
  require_skew(p0_);
  Eigen::FullPivLU<Matrix> lu(p1_);
  if (!lu.isInvertible()) throw Error(ErrorCode::NearSingular, "P1 is singular");
  p1_inv_ = lu.inverse();
  drift_ = p1_inv_ * p0_;
  phase_.reserve(h_.num_pieces());
  for (std::size_t j = 0; j < h_.num_pieces(); ++j) phase_.push_back(p1_inv_ * h_.piece_inverse(j));
}

PropagatorResult Propagator::evaluate(double t, int interior_points) const {
  const int d = h_.dim();
  PropagatorResult out;
  out.t = t;
  CMatrix phi = CMatrix::Identity(d, d);
  double sup = 1.0;
  const Complex it(0.0, t);
  for (std::size_t j = 0; j < phase_.size(); ++j) {
    const CMatrix g = -(it * phase_[j].cast<Complex>() + drift_.cast<Complex>());
    const double width = h_.piece_width(j);
    if (interior_points > 0) {
      const CMatrix step = expm(g * (width / (interior_points + 1)));
      CMatrix partial = phi;
      for (int k = 0; k < interior_points; ++k) {
        partial = step * partial;
        sup = std::max(sup, norm2(partial));
      }
    }
    phi = expm(g * width) * phi;
    sup = std::max(sup, norm2(phi));
  }
  out.phi_b = std::move(phi);
  out.sup_norm = sup;
  out.inverse_residual = inverse_identity_residual(out, p1_);
  return out;
}

CMatrix Propagator::phi_b(double t) const {
  const int d = h_.dim();
  CMatrix phi = CMatrix::Identity(d, d);
  const Complex it(0.0, t);
  for (std::size_t j = 0; j < phase_.size(); ++j) {
    const CMatrix g = -(it * phase_[j].cast<Complex>() + drift_.cast<Complex>());
    phi = expm(g * h_.piece_width(j)) * phi;
  }
  return phi;
}

PropagatorResult fundamental_matrix(const HamiltonianDensity& h, const Matrix& p1, const Matrix& p0,
                                    double t) {
  return Propagator(h, p1, p0).evaluate(t);
}

double inverse_identity_residual(const PropagatorResult& result, const Matrix& p1) {
  const CMatrix& phi = result.phi_b;
  const CMatrix p1c = p1.cast<Complex>();
  const CMatrix phi_inv = phi.partialPivLu().inverse();
  const CMatrix identity_form = p1c.partialPivLu().solve(phi.adjoint() * p1c);
  return norm2(CMatrix(phi_inv - identity_form));
}

double default_t_max(const HamiltonianDensity& h, const Matrix& p1) {
  const double p1_inv_norm = norm2(Matrix(p1.inverse()));
  return 200.0 * std::numbers::pi * h.lower_bound() / ((h.b() - h.a()) * p1_inv_norm);
}

std::vector<double> sweep_grid(double t_max, int n_samples) {
  if (!(t_max > 0.0) || n_samples < 2) {
    throw Error(ErrorCode::InvalidArgument, "sweep needs t_max > 0 and at least 2 samples");
  }
  const int n_lin = std::max(2, n_samples / 2);
  const int n_log = n_samples - n_lin;
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_lin; ++i) ts.push_back(t_max * i / (n_lin - 1));
  const double lo = std::log(1e-3 * t_max);
  const double hi = std::log(t_max);
  for (int i = 0; i < n_log; ++i) {
    const double s = n_log == 1 ? 0.0 : static_cast<double>(i) / (n_log - 1);
    ts.push_back(std::exp(lo + s * (hi - lo)));
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

std::vector<double> extension_grid(double lo, double hi, double t_max, int n_samples) {
  const int n_lin = std::max(2, n_samples / 2);
  const double spacing = t_max / (n_lin - 1);
  const auto count = static_cast<long>(std::ceil((hi - lo) / spacing));
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(count));
  for (long i = 1; i <= count; ++i) ts.push_back(lo + (hi - lo) * static_cast<double>(i) / count);
  return ts;
}

std::string to_string(BCertificate c) {
  switch (c) {
    case BCertificate::Scalar: return "Scalar";
    case BCertificate::InvariantSubspace: return "InvariantSubspace";
    case BCertificate::BoundedVariation: return "BoundedVariation";
    case BCertificate::None: return "None";
  }
  return "None";
}

double swept_sup(const Propagator& prop, const std::vector<double>& ts, unsigned threads) {
  std::vector<double> sups(ts.size(), 0.0);
  detail::parallel_for(ts.size(), threads, [&](std::size_t i) {
    sups[i] = prop.evaluate(ts[i]).sup_norm;
  });
  return sups.empty() ? 0.0 : *std::max_element(sups.begin(), sups.end());
}

double bv_bound(const HamiltonianDensity& h) {
  const double mu = inverse_total_variation(h);
  const double ratio = h.upper_bound() / h.lower_bound();
  const double half = 0.5 * h.upper_bound() * mu;
  const double squared = ratio * (1.0 + half * std::exp(half));
  return std::sqrt(squared);
}

double gronwall_factor(double interval_length, double bound, const Matrix& p1, const Matrix& p0) {
  const double p0_norm = norm2(p0);
  if (p0_norm == 0.0) return 1.0;
  const double p1_inv_norm = norm2(Matrix(p1.inverse()));
  return std::exp(interval_length * bound * bound * norm2(p1) * p1_inv_norm * p1_inv_norm * p0_norm);
}

ConditionBReport condition_b_estimate(const HamiltonianDensity& h, const Matrix& p1,
                                      const Matrix& p0, const SweepParams& sweep) {
  const SpectralSplit split = spectral_split(p1);
  const Propagator prop(h, p1, p0);
  ConditionBReport out;
  out.total_variation = total_variation(h);
  out.inverse_total_variation = inverse_total_variation(h);
  out.t_max = sweep.t_max.value_or(default_t_max(h, p1));

  const double length = h.b() - h.a();
  const double p1_cond = norm2(p1) * norm2(Matrix(p1.inverse()));
  const bool has_p0 = p0.norm() > 0.0;

  struct Candidate {
    BCertificate kind;
    double bound;
    double factor = 1.0;
  };
  std::vector<Candidate> candidates;
  if (h.is_scalar()) candidates.push_back({BCertificate::Scalar, std::sqrt(p1_cond)});
  if (invariance_check(h, split).invariant) {
    const double c_plus = condition_number(split.p1_plus);
    const double c_minus = condition_number(split.p1_minus);
    candidates.push_back({BCertificate::InvariantSubspace, std::sqrt(std::max(c_plus, c_minus))});
  }
  candidates.push_back({BCertificate::BoundedVariation, bv_bound(h)});

  std::vector<Candidate> valid;
  for (auto c : candidates) {
    double factor = 1.0;
    if (has_p0 && std::isfinite(c.bound)) factor = gronwall_factor(length, c.bound, p1, p0);
    const double bound = c.bound * factor;
    if (std::isfinite(bound)) valid.push_back({c.kind, bound, factor});
  }

  const std::vector<double> base = sweep_grid(out.t_max, sweep.n_samples);
  const std::vector<double> ext =
      extension_grid(out.t_max, 2.0 * out.t_max, out.t_max, sweep.n_samples);
  out.swept_sup = swept_sup(prop, base, sweep.threads);
  out.swept_sup_doubled = std::max(out.swept_sup, swept_sup(prop, ext, sweep.threads));
  out.growth_flag = out.swept_sup_doubled > 1.05 * out.swept_sup;

  for (const auto& c : valid) {
    if (out.swept_sup_doubled > c.bound * (1.0 + 1e-6)) {
      out.note += "sweep exceeds the " + to_string(c.kind) + " bound; certificate withheld. ";
      continue;
    }
    if (out.certified == BCertificate::None) {
      out.certified = c.kind;
      out.certified_bound = c.bound;
      out.gronwall_factor = c.factor;
    } else {
      out.also_satisfied.push_back(c.kind);
    }
  }
  if (valid.empty()) out.note += "every certified bound overflowed. ";
  if (out.certified == BCertificate::None) {
    out.note += out.growth_flag ? "not certified; sweep growth detected."
                                : "not certified; no sweep growth detected.";
  }
  return out;
}

P0Probe p0_invariance_probe(const HamiltonianDensity& h, const Matrix& p1, const Matrix& p0,
                            const SweepParams& sweep) {
  const double t_max = sweep.t_max.value_or(default_t_max(h, p1));
  const std::vector<double> ts = sweep_grid(t_max, sweep.n_samples);
  P0Probe out;
  out.sup_with_p0 = swept_sup(Propagator(h, p1, p0), ts, sweep.threads);
  out.sup_without_p0 = swept_sup(Propagator(h, p1, Matrix::Zero(p1.rows(), p1.cols())), ts,
                                 sweep.threads);
  return out;
}

}  // namespace phstab
