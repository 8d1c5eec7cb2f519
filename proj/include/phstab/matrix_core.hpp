#pragma once

#include <Eigen/Dense>

#include <complex>

namespace phstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

enum class Sign { Plus, Minus };

/// Orthogonal splitting of R^d into the positive and negative eigenspaces of P1.
struct SpectralSplit {
  int dim = 0;
  int dim_plus = 0;
  int dim_minus = 0;
  Matrix p1;
  Matrix iota_plus;   // d x d+, orthonormal columns spanning E+
  Matrix iota_minus;  // d x d-, orthonormal columns spanning E-
  Matrix p1_plus;     // iota_plus^T P1 iota_plus
  Matrix p1_minus;    // -iota_minus^T P1 iota_minus
  Matrix q_plus;      // iota_plus (P1+)^{1/2} iota_plus^T
  Matrix q_minus;     // iota_minus (P1-)^{1/2} iota_minus^T
  Matrix p_plus;
  Matrix p_minus;
  Matrix r_plus;      // iota_plus (P1+)^{-1/2} iota_plus^T
  Matrix r_minus;     // iota_minus (P1-)^{-1/2} iota_minus^T
  Matrix g_plus;      // iota_plus (P1+)^{-1} iota_plus^T
  Matrix g_minus;     // iota_minus (P1-)^{-1} iota_minus^T
};

/// Relative tolerance below which an eigenvalue of P1 counts as zero.
inline constexpr double kSingularityTolerance = 1e-10;
/// Relative tolerance for symmetry checks.
inline constexpr double kSymmetryTolerance = 1e-12;

SpectralSplit spectral_split(const Matrix& p1);

/// ||(P1^+-)^{-1/2} x|| for x given in E+- coordinates.
double e_norm(const SpectralSplit& split, Sign sign, const Vector& x);

/// Matrix exponential by scaling and squaring with diagonal Pade approximants.
CMatrix expm(const CMatrix& a);

double norm2(const Matrix& a);
double norm2(const CMatrix& a);
double sigma_min(const CMatrix& a);
double norm1(const CMatrix& a);

/// Throws NotSymmetric if ||A - A^T|| exceeds tol * max(1, ||A||).
void require_symmetric(const Matrix& a, double tol = kSymmetryTolerance);
double symmetry_residual(const Matrix& a);

/// Eigenvalues of a symmetric matrix in ascending order.
Vector sym_eigenvalues(const Matrix& a);
/// f(A) for symmetric A through its eigendecomposition.
Matrix sym_function(const Matrix& a, double (*f)(double));
double lambda_min(const Matrix& a);
double lambda_max(const Matrix& a);
double condition_number(const Matrix& spd);

/// Largest principal angle between the row spaces of two full row rank matrices.
double row_space_angle(const Matrix& a, const Matrix& b);

bool all_finite(const CMatrix& a);
bool all_finite(const Matrix& a);

}  // namespace phstab
