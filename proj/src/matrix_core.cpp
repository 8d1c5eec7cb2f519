#include "phstab/matrix_core.hpp"

#include "phstab/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace phstab {

namespace {

Matrix orthonormal_row_basis(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a.transpose(), Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  const double tol = s.size() > 0 ? s(0) * 1e-10 : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

// Diagonal Pade coefficients b_0..b_m for m in {3, 5, 7, 9, 13}.
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// Backward error thresholds for the 1-norm (Higham 2005).
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N>
CMatrix pade_low(const CMatrix& a, const std::array<double, N>& b) {
  const auto n = a.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix a2 = a * a;
  CMatrix power = id;
  CMatrix u_inner = CMatrix::Zero(n, n);
  CMatrix v = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k + 1 < N; k += 2) {
    v += b[k] * power;
    u_inner += b[k + 1] * power;
    power = power * a2;
  }
  const CMatrix u = a * u_inner;
  return (v - u).partialPivLu().solve(v + u);
}

CMatrix pade13(const CMatrix& a) {
  const auto n = a.rows();
  const auto& b = kPade13;
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix a2 = a * a;
  const CMatrix a4 = a2 * a2;
  const CMatrix a6 = a4 * a2;
  const CMatrix u_high = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
  const CMatrix u = a * (u_high + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const CMatrix v_high = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
  const CMatrix v = v_high + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

bool all_finite(const CMatrix& a) {
  return a.allFinite();
}

bool all_finite(const Matrix& a) {
  return a.allFinite();
}

double symmetry_residual(const Matrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return (a - a.transpose()).norm();
}

void require_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  }
  const double residual = symmetry_residual(a);
  if (residual > tol * std::max(1.0, a.norm())) {
    throw Error(ErrorCode::NotSymmetric,
                "symmetry residual " + std::to_string(residual) + " exceeds tolerance");
  }
}

Vector sym_eigenvalues(const Matrix& a) {
  if (a.size() == 0) return Vector();
  const Matrix s = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Matrix sym_function(const Matrix& a, double (*f)(double)) {
  if (a.size() == 0) return a;
  const Matrix s = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  Vector mapped = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().transpose();
}

double lambda_min(const Matrix& a) {
  const Vector ev = sym_eigenvalues(a);
  return ev.size() == 0 ? 0.0 : ev(0);
}

double lambda_max(const Matrix& a) {
  const Vector ev = sym_eigenvalues(a);
  return ev.size() == 0 ? 0.0 : ev(ev.size() - 1);
}

double condition_number(const Matrix& spd) {
  if (spd.size() == 0) return 1.0;
  const Vector ev = sym_eigenvalues(spd);
  return ev(ev.size() - 1) / ev(0);
}

double norm2(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double norm2(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

double sigma_min(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

double norm1(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

SpectralSplit spectral_split(const Matrix& p1) {
  require_symmetric(p1);
  const auto d = p1.rows();
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "P1 must be non-empty");
  const Matrix s = 0.5 * (p1 + p1.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Vector& lambda = es.eigenvalues();
  const Matrix& vecs = es.eigenvectors();
  const double scale = lambda.cwiseAbs().maxCoeff();
  if (scale == 0.0 || lambda.cwiseAbs().minCoeff() < kSingularityTolerance * scale) {
    throw Error(ErrorCode::NearSingular, "P1 has an eigenvalue within tolerance of zero");
  }

  std::vector<Eigen::Index> plus;
  std::vector<Eigen::Index> minus;
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    if (lambda(i) > 0) plus.push_back(i);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (lambda(i) < 0) minus.push_back(i);
  }

  SpectralSplit out;
  out.dim = static_cast<int>(d);
  out.dim_plus = static_cast<int>(plus.size());
  out.dim_minus = static_cast<int>(minus.size());
  out.p1 = s;
  out.iota_plus = Matrix(d, out.dim_plus);
  out.iota_minus = Matrix(d, out.dim_minus);
  Vector lp(out.dim_plus);
  Vector lm(out.dim_minus);
  for (int k = 0; k < out.dim_plus; ++k) {
    out.iota_plus.col(k) = vecs.col(plus[k]);
    lp(k) = lambda(plus[k]);
  }
  for (int k = 0; k < out.dim_minus; ++k) {
    out.iota_minus.col(k) = vecs.col(minus[k]);
    lm(k) = -lambda(minus[k]);
  }
  out.p1_plus = lp.asDiagonal();
  out.p1_minus = lm.asDiagonal();

  const auto assemble = [](const Matrix& iota, const Vector& diag) -> Matrix {
    return iota * diag.asDiagonal() * iota.transpose();
  };
  out.q_plus = assemble(out.iota_plus, lp.cwiseSqrt());
  out.q_minus = assemble(out.iota_minus, lm.cwiseSqrt());
  out.p_plus = out.iota_plus * out.iota_plus.transpose();
  out.p_minus = out.iota_minus * out.iota_minus.transpose();
  out.r_plus = assemble(out.iota_plus, lp.cwiseSqrt().cwiseInverse());
  out.r_minus = assemble(out.iota_minus, lm.cwiseSqrt().cwiseInverse());
  out.g_plus = assemble(out.iota_plus, lp.cwiseInverse());
  out.g_minus = assemble(out.iota_minus, lm.cwiseInverse());
  return out;
}

double e_norm(const SpectralSplit& split, Sign sign, const Vector& x) {
  const bool plus = sign == Sign::Plus;
  const Matrix& weight = plus ? split.p1_plus : split.p1_minus;
  if (x.size() != weight.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "vector dimension does not match E+-");
  }
  if (x.size() == 0) return 0.0;
  return (weight.diagonal().cwiseSqrt().cwiseInverse().asDiagonal() * x).norm();
}

CMatrix expm(const CMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "expm needs a square matrix");
  if (!all_finite(a)) throw Error(ErrorCode::Overflow, "expm input has non-finite entries");
  if (a.size() == 0) return a;

  const double norm = norm1(a);
  CMatrix result;
  if (norm <= kTheta3) {
    result = pade_low(a, kPade3);
  } else if (norm <= kTheta5) {
    result = pade_low(a, kPade5);
  } else if (norm <= kTheta7) {
    result = pade_low(a, kPade7);
  } else if (norm <= kTheta9) {
    result = pade_low(a, kPade9);
  } else {
    const int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
    if (s > 1000) throw Error(ErrorCode::Overflow, "expm argument norm out of range");
    result = pade13(a / std::ldexp(1.0, s));
    for (int k = 0; k < s; ++k) result = result * result;
  }
  if (!all_finite(result)) throw Error(ErrorCode::Overflow, "expm result is not representable");
  return result;
}

double row_space_angle(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, "column counts differ");
  const Matrix qa = orthonormal_row_basis(a);
  const Matrix qb = orthonormal_row_basis(b);
  if (qa.cols() != qb.cols()) return M_PI / 2;
  const Matrix residual = qb - qa * (qa.transpose() * qb);
  const double s = std::min(1.0, norm2(residual));
  return std::asin(s);
}

}  // namespace phstab
