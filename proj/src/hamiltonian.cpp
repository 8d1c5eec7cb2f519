#include "phstab/hamiltonian.hpp"

#include "phstab/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace phstab {

HamiltonianDensity::HamiltonianDensity(DensityKind kind, std::vector<double> breakpoints,
                                       std::vector<Matrix> pieces)
    : kind_(kind), breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw Error(ErrorCode::InvalidArgument, "density needs at least one piece");
  if (breakpoints_.size() != pieces_.size() + 1) {
    throw Error(ErrorCode::DimensionMismatch, "need one more breakpoint than pieces");
  }
  for (std::size_t j = 0; j + 1 < breakpoints_.size(); ++j) {
    if (!std::isfinite(breakpoints_[j]) || !std::isfinite(breakpoints_[j + 1]) ||
        !(breakpoints_[j] < breakpoints_[j + 1])) {
      throw Error(ErrorCode::InvalidArgument, "breakpoints must be finite and strictly increasing");
    }
  }
  const auto d = pieces_.front().rows();
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "density pieces must be non-empty");
  m_ = std::numeric_limits<double>::infinity();
  mbound_ = 0.0;
  inverses_.reserve(pieces_.size());
  for (auto& piece : pieces_) {
    if (piece.rows() != d || piece.cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "density pieces differ in size");
    }
    require_symmetric(piece);
    piece = 0.5 * (piece + piece.transpose());
    const Vector ev = sym_eigenvalues(piece);
    if (!(ev(0) > 0.0)) {
      throw Error(ErrorCode::NotPositiveDefinite, "density piece is not positive definite");
    }
    m_ = std::min(m_, ev(0));
    mbound_ = std::max(mbound_, ev(d - 1));
    Matrix inv = piece.llt().solve(Matrix::Identity(d, d));
    inverses_.push_back(0.5 * (inv + inv.transpose()));
  }
}

HamiltonianDensity::HamiltonianDensity()
    : HamiltonianDensity(DensityKind::Constant, {0.0, 1.0}, {Matrix::Identity(1, 1)}) {}

HamiltonianDensity HamiltonianDensity::constant(double a, double b, const Matrix& h0) {
  return HamiltonianDensity(DensityKind::Constant, {a, b}, {h0});
}

HamiltonianDensity HamiltonianDensity::scalar(std::vector<double> breakpoints,
                                              std::vector<double> values, int dim) {
  if (dim <= 0) throw Error(ErrorCode::DimensionMismatch, "scalar density needs dim > 0");
  std::vector<Matrix> pieces;
  pieces.reserve(values.size());
  for (double h : values) {
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw Error(ErrorCode::NotPositiveDefinite, "scalar density value must be positive");
    }
    pieces.push_back(h * Matrix::Identity(dim, dim));
  }
  return HamiltonianDensity(DensityKind::Scalar, std::move(breakpoints), std::move(pieces));
}

HamiltonianDensity HamiltonianDensity::piecewise(std::vector<double> breakpoints,
                                                 std::vector<Matrix> pieces) {
  return HamiltonianDensity(DensityKind::PiecewiseConstant, std::move(breakpoints),
                            std::move(pieces));
}

HamiltonianDensity HamiltonianDensity::sampled(double a, double b, std::vector<Matrix> cells) {
  if (cells.empty()) throw Error(ErrorCode::InvalidArgument, "sampled density needs cells");
  const std::size_t n = cells.size();
  std::vector<double> breakpoints(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    breakpoints[j] = a + (b - a) * static_cast<double>(j) / static_cast<double>(n);
  }
  breakpoints.back() = b;
  return HamiltonianDensity(DensityKind::Sampled, std::move(breakpoints), std::move(cells));
}

std::size_t HamiltonianDensity::piece_index(double x) const {
  if (!(x >= a() && x <= b())) throw Error(ErrorCode::OutOfInterval, "x outside [a, b]");
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  const auto idx = static_cast<std::size_t>(it - breakpoints_.begin());
  return std::min(idx == 0 ? 0 : idx - 1, pieces_.size() - 1);
}

bool HamiltonianDensity::is_scalar() const {
  const auto d = dim();
  for (const auto& piece : pieces_) {
    const double h = piece(0, 0);
    if ((piece - h * Matrix::Identity(d, d)).norm() > 1e-12 * std::abs(h)) return false;
  }
  return true;
}

HamiltonianDensity HamiltonianDensity::refined(double x) const {
  const std::size_t j = piece_index(x);
  if (x == breakpoints_[j] || x == b()) return *this;
  std::vector<double> bp = breakpoints_;
  std::vector<Matrix> pieces = pieces_;
  bp.insert(bp.begin() + static_cast<std::ptrdiff_t>(j) + 1, x);
  pieces.insert(pieces.begin() + static_cast<std::ptrdiff_t>(j), pieces_[j]);
  return HamiltonianDensity(kind_ == DensityKind::Constant ? DensityKind::PiecewiseConstant : kind_,
                            std::move(bp), std::move(pieces));
}

HamiltonianDensity HamiltonianDensity::restricted(double lo, double hi) const {
  if (!(lo < hi) || lo < a() || hi > b()) {
    throw Error(ErrorCode::OutOfInterval, "restriction interval not inside [a, b]");
  }
  std::vector<double> bp{lo};
  std::vector<Matrix> pieces;
  for (std::size_t j = 0; j < pieces_.size(); ++j) {
    const double left = std::max(lo, breakpoints_[j]);
    const double right = std::min(hi, breakpoints_[j + 1]);
    if (right > left) {
      if (bp.back() != left) bp.push_back(left);
      pieces.push_back(pieces_[j]);
      bp.push_back(right);
    }
  }
  const DensityKind kind = kind_ == DensityKind::Sampled ? DensityKind::PiecewiseConstant : kind_;
  return HamiltonianDensity(kind, std::move(bp), std::move(pieces));
}

DensityBounds bounds(const HamiltonianDensity& h) {
  return {h.lower_bound(), h.upper_bound()};
}

double total_variation(const HamiltonianDensity& h) {
  double tv = 0.0;
  for (std::size_t j = 1; j < h.num_pieces(); ++j) {
    tv += (h.piece(j) - h.piece(j - 1)).cwiseAbs().sum();
  }
  return tv;
}

double inverse_total_variation(const HamiltonianDensity& h) {
  double tv = 0.0;
  for (std::size_t j = 1; j < h.num_pieces(); ++j) {
    tv += (h.piece_inverse(j) - h.piece_inverse(j - 1)).cwiseAbs().sum();
  }
  return tv;
}

InvarianceResult invariance_check(const HamiltonianDensity& h, const SpectralSplit& split) {
  if (split.dim != h.dim()) throw Error(ErrorCode::DimensionMismatch, "split and density differ in dim");
  InvarianceResult out{true, 0.0};
  for (std::size_t j = 0; j < h.num_pieces(); ++j) {
    const Matrix& hj = h.piece(j);
    const double residual = norm2(Matrix(split.p_minus * hj * split.p_plus));
    out.max_residual = std::max(out.max_residual, residual);
    if (residual > 1e-10 * norm2(hj)) out.invariant = false;
  }
  return out;
}

Matrix inverse_at(const HamiltonianDensity& h, double x) {
  return h.piece_inverse(h.piece_index(x));
}

HamiltonianDensity load_density_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open density file " + path.string());
  std::vector<double> xs;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty() && xs.empty()) continue;  // header
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(line_no) + ": non-numeric entry");
    }
    if (values.size() < 2) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(line_no) + ": too few columns");
    }
    xs.push_back(values.front());
    rows.emplace_back(values.begin() + 1, values.end());
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, path.string() + ": no data rows");

  const std::size_t entries = rows.front().size();
  int d = 0;
  while (static_cast<std::size_t>(d * (d + 1) / 2) < entries) ++d;
  if (static_cast<std::size_t>(d * (d + 1) / 2) != entries) {
    throw Error(ErrorCode::ParseError, path.string() + ": column count is not an upper triangle");
  }
  std::vector<Matrix> cells;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != entries) {
      throw Error(ErrorCode::ParseError, path.string() + ": ragged rows");
    }
    Matrix h(d, d);
    std::size_t k = 0;
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        h(i, j) = rows[r][k];
        h(j, i) = rows[r][k];
        ++k;
      }
    }
    cells.push_back(h);
  }
  double dx = 1.0;
  if (xs.size() > 1) {
    dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double expected = xs.front() + dx * static_cast<double>(j);
      if (std::abs(xs[j] - expected) > 1e-9 * std::max(1.0, std::abs(dx) * xs.size())) {
        throw Error(ErrorCode::ParseError, path.string() + ": x column is not a uniform grid");
      }
    }
  }
  if (!(dx > 0.0)) throw Error(ErrorCode::ParseError, path.string() + ": x must increase");
  return HamiltonianDensity::sampled(xs.front() - 0.5 * dx, xs.back() + 0.5 * dx, std::move(cells));
}

}  // namespace phstab
