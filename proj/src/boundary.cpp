#include "phstab/boundary.hpp"

#include "phstab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace phstab {

namespace {

void require_shape(const Matrix& w, int d) {
  if (w.rows() != d || w.cols() != 2 * d) {
    throw Error(ErrorCode::DimensionMismatch, "W must be d x 2d");
  }
}

bool well_conditioned(const Matrix& a, double tol) {
  if (a.size() == 0) return true;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  return s(0) > 0.0 && s(s.size() - 1) >= tol * s(0);
}

bool is_psd(const Matrix& g, double scale) {
  return lambda_min(g) >= -1e-12 * std::max(scale, 1e-300);
}

Matrix symmetrize(const Matrix& a) {
  return 0.5 * (a + a.transpose());
}

}  // namespace

bool has_full_row_rank(const Matrix& w) {
  if (w.rows() == 0 || w.rows() > w.cols()) return false;
  Eigen::JacobiSVD<Matrix> svd(w);
  const auto& s = svd.singularValues();
  return s(0) > 0.0 && s(w.rows() - 1) / s(0) >= kRankTolerance;
}

DissipativityReport dissipativity_check(const Matrix& w, const Matrix& p1) {
  const auto d = static_cast<int>(p1.rows());
  require_shape(w, d);
  if (!has_full_row_rank(w)) throw Error(ErrorCode::RankDeficient, "W does not have rank d");

  Matrix z(2 * d, 2 * d);
  z << -p1, p1, Matrix::Identity(d, d), Matrix::Identity(d, d);
  Eigen::FullPivLU<Matrix> lu(z.transpose());
  if (!lu.isInvertible() || !well_conditioned(z, 1e-14)) {
    throw Error(ErrorCode::ZSingular, "boundary transformation matrix is singular");
  }
  Matrix j = Matrix::Zero(2 * d, 2 * d);
  j.topRightCorner(d, d).setIdentity();
  j.bottomLeftCorner(d, d).setIdentity();

  const Matrix wz = lu.solve(w.transpose()).transpose();  // (Z^{-T} W^T)^T = W Z^{-1}
  DissipativityReport out;
  out.gram = symmetrize(wz * j * wz.transpose());
  out.min_eigenvalue = lambda_min(out.gram);
  // Scale by ||W Z^{-1}||^2 too: the gram matrix itself vanishes for d = 1 with |M| = 1.
  const double tol = 1e-10 * std::max(norm2(out.gram), norm2(wz) * norm2(wz));
  if (out.min_eigenvalue > tol) {
    out.classification = Definiteness::StrictlyPositive;
  } else if (out.min_eigenvalue >= -tol) {
    out.classification = Definiteness::PositiveSemidefinite;
  } else {
    out.classification = Definiteness::Indefinite;
  }
  if (out.classification != Definiteness::Indefinite) {
    const SpectralSplit split = spectral_split(p1);
    out.m_norm = norm2(w_to_mk(w, split).m);
  }
  return out;
}

ContractionForm w_to_mk(const Matrix& w, const SpectralSplit& split) {
  const int d = split.dim;
  require_shape(w, d);
  if (!has_full_row_rank(w)) throw Error(ErrorCode::RankDeficient, "W does not have rank d");

  const Matrix w1 = w.leftCols(d);
  const Matrix w2 = w.rightCols(d);
  const Matrix s = split.p_minus * w1.transpose() + split.p_plus * w2.transpose();
  if (!well_conditioned(s, 1e-12)) {
    throw Error(ErrorCode::SSingular, "W violates the admissibility structure (S singular)");
  }
  const Matrix c = (split.p_plus * w1.transpose() + split.p_minus * w2.transpose()) *
                   s.partialPivLu().inverse();
  const Matrix r = split.r_plus + split.r_minus;
  ContractionForm out;
  out.m = -(split.q_plus + split.q_minus) * c.transpose() * r;

  const double m_norm = norm2(out.m);
  if (m_norm > 1.0 + 1e-10) {
    throw Error(ErrorCode::DissipativityViolated,
                "recovered M has norm " + std::to_string(m_norm) + " > 1");
  }

  Matrix w_tilde(d, 2 * d);
  w_tilde << split.q_minus - out.m * split.q_plus, split.q_plus - out.m * split.q_minus;
  const Matrix gram = w_tilde * w_tilde.transpose();
  out.k = (w * w_tilde.transpose()) * gram.ldlt().solve(Matrix::Identity(d, d));
  const double residual = (w - out.k * w_tilde).norm();
  if (residual > 1e-8 * w.norm()) {
    throw Error(ErrorCode::InternalConsistency,
                "W is not reproduced by K (Q- - M Q+, Q+ - M Q-); residual " +
                    std::to_string(residual));
  }
  return out;
}

Matrix mk_to_w(const Matrix& m, const Matrix& k, const SpectralSplit& split) {
  const int d = split.dim;
  if (m.rows() != d || m.cols() != d || k.rows() != d || k.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "M and K must be d x d");
  }
  if (norm2(m) > 1.0 + 1e-10) throw Error(ErrorCode::MNotContraction, "||M|| exceeds 1");
  if (!well_conditioned(k, 1e-12)) throw Error(ErrorCode::KSingular, "K is singular");
  Matrix w(d, 2 * d);
  w << k * (split.q_minus - m * split.q_plus), k * (split.q_plus - m * split.q_minus);
  return w;
}

DissipationRate dissipation_rate(const Matrix& m, const SpectralSplit& split, Endpoint endpoint) {
  const int d = split.dim;
  if (m.rows() != d || m.cols() != d) throw Error(ErrorCode::DimensionMismatch, "M must be d x d");
  const Matrix g0 = symmetrize(Matrix::Identity(d, d) - m.transpose() * m);
  const Matrix g_eta =
      endpoint == Endpoint::A
          ? symmetrize(m.transpose() * split.g_plus * m + split.g_minus)
          : symmetrize(split.g_plus + m.transpose() * split.g_minus * m);

  const double scale_eta = std::max(split.g_plus.norm(), split.g_minus.norm());
  const double norm_eta = norm2(g_eta);
  if (norm_eta <= 1e-14 * std::max(scale_eta, 1.0)) return {true, 0.0};

  const double norm0 = std::max(norm2(g0), 1.0);
  if (!is_psd(g0, norm0)) return {false, 0.0};

  Eigen::SelfAdjointEigenSolver<Matrix> es0(g0);
  for (int i = 0; i < d; ++i) {
    if (es0.eigenvalues()(i) <= 1e-12 * norm0) {
      const Vector v = es0.eigenvectors().col(i);
      if (v.dot(g_eta * v) > 1e-12 * norm_eta) return {false, 0.0};
    }
  }

  const Vector ev_eta = sym_eigenvalues(g_eta);
  double smallest_positive = norm_eta;
  for (int i = 0; i < d; ++i) {
    if (ev_eta(i) > 1e-12 * norm_eta) smallest_positive = std::min(smallest_positive, ev_eta(i));
  }
  double lo = 0.0;
  double hi = lambda_max(g0) / (2.0 * smallest_positive);
  const auto feasible = [&](double c) {
    return is_psd(g0 - 2.0 * c * g_eta, std::max(norm0, 2.0 * c * norm_eta));
  };
  if (feasible(hi)) return {false, hi};
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {false, lo};
}

double boundary_energy_rate(const Vector& trace_b, const Vector& trace_a, const Matrix& m,
                            const SpectralSplit& split) {
  const int d = split.dim;
  if (trace_b.size() != d || trace_a.size() != d || m.rows() != d || m.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "trace or M dimension mismatch");
  }
  const Vector tau = split.q_plus * trace_b + split.q_minus * trace_a;
  const Vector lhs = split.q_plus * trace_a + split.q_minus * trace_b;
  const Vector m_tau = m * tau;
  const double residual = (lhs - m_tau).norm();
  if (residual > 1e-6 * std::max(tau.norm(), lhs.norm())) {
    throw Error(ErrorCode::DomainViolation,
                "traces violate the boundary relation; residual " + std::to_string(residual));
  }
  return 0.5 * (tau.squaredNorm() - m_tau.squaredNorm());
}

Matrix resolve_w(const BoundarySpec& spec, const SpectralSplit& split) {
  if (const auto* wf = std::get_if<WForm>(&spec)) {
    require_shape(wf->w, split.dim);
    return wf->w;
  }
  const auto& mk = std::get<MKForm>(spec);
  const Matrix k = mk.k.value_or(Matrix::Identity(split.dim, split.dim));
  return mk_to_w(mk.m, k, split);
}

}  // namespace phstab
