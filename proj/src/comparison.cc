#include "bsdd/comparison.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bsdd/error.h"

namespace bsdd {

bool ComparisonMatrix::is_hurwitz(double margin) const {
  return bsdd::is_hurwitz(matrix, margin);
}

ComparisonMatrix scalar_comparison(const Eigen::Ref<const Matrix>& a) {
  require_square(a, "matrix");
  require_finite(a, "matrix");
  const Index n = a.rows();
  ComparisonMatrix out;
  out.kind = ComparisonKind::kScalar;
  out.matrix = a.cwiseAbs();
  out.offdiag_sigma = a.cwiseAbs();
  out.structural_zero = (a.array() == 0.0);
  out.diagonal.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double aii = a(i, i);
    out.matrix(i, i) = -std::max(-aii, 0.0);
    out.offdiag_sigma(i, i) = 0.0;
    out.structural_zero(i, i) = false;
    auto& prov = out.diagonal[static_cast<std::size_t>(i)];
    prov.source = DiagonalSource::kClippedDiagonal;
    prov.block_hurwitz = aii < 0.0;
    prov.hinf_norm = aii < 0.0 ? 1.0 / -aii
                               : std::numeric_limits<double>::infinity();
  }
  return out;
}

ComparisonMatrix block_comparison(const PartitionedMatrix& p,
                                  const HinfOptions& options) {
  const Index n = p.num_blocks();
  ComparisonMatrix out;
  out.kind = ComparisonKind::kBlock;
  out.matrix = Matrix::Zero(n, n);
  out.offdiag_sigma = Matrix::Zero(n, n);
  out.structural_zero.setConstant(n, n, false);
  out.diagonal.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) {
        const HinfResult h = hinf_norm_resolvent(p.block(i, i), options);
        out.matrix(i, i) = -h.inverse_norm;
        auto& prov = out.diagonal[static_cast<std::size_t>(i)];
        prov.source = DiagonalSource::kInverseHinfNorm;
        prov.block_hurwitz = !h.is_infinite();
        prov.hinf_norm = h.norm;
        prov.peak_frequency = h.peak_frequency;
      } else if (p.is_zero_block(i, j)) {
        out.structural_zero(i, j) = true;
      } else {
        const double s = max_singular_value(p.block(i, j));
        out.matrix(i, j) = s;
        out.offdiag_sigma(i, j) = s;
      }
    }
  }
  return out;
}

bool is_metzler(const Eigen::Ref<const Matrix>& m) {
  require_square(m, "matrix");
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (i != j && !(m(i, j) >= 0.0)) return false;
    }
  }
  return true;
}

std::optional<ScalingPair> metzler_scalings(const Eigen::Ref<const Matrix>& m,
                                            double margin) {
  require_square(m, "matrix");
  require_finite(m, "matrix");
  if (!is_metzler(m)) {
    throw Error(ErrorCode::kNotMetzler, "scalings need a Metzler matrix");
  }
  const Index n = m.rows();
  if (n == 0) return std::nullopt;
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) return std::nullopt;
  const Vector ones = Vector::Ones(n);
  ScalingPair out;
  out.d = -lu.solve(ones);
  out.e = -Eigen::FullPivLU<Matrix>(m.transpose()).solve(ones);
  if (!out.d.allFinite() || !out.e.allFinite()) {
    throw Error(ErrorCode::kSolverFailure, "scaling solve produced NaN/Inf");
  }
  if (!(out.d.minCoeff() > 0.0) || !(out.e.minCoeff() > 0.0)) {
    return std::nullopt;
  }
  const Vector row_slack = -(m * out.d);
  const Vector col_slack = -(m.transpose() * out.e);
  if (!(row_slack.array() > margin * out.d.array()).all() ||
      !(col_slack.array() > margin * out.e.array()).all()) {
    return std::nullopt;
  }
  return out;
}

bool check_scaled_dominance(const Eigen::Ref<const Matrix>& a,
                            const Eigen::Ref<const Vector>& d,
                            DominanceMode mode) {
  require_square(a, "matrix");
  if (d.size() != a.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "scaling has length " + std::to_string(d.size()) +
                    ", matrix order " + std::to_string(a.rows()));
  }
  if (!(d.array() > 0.0).all()) return false;
  const Matrix abs = mode == DominanceMode::kRow
                         ? Matrix(a.cwiseAbs())
                         : Matrix(a.transpose().cwiseAbs());
  for (Index i = 0; i < abs.rows(); ++i) {
    double off = 0.0;
    for (Index j = 0; j < abs.cols(); ++j) {
      if (j != i) off += d(j) * abs(i, j);
    }
    if (!(d(i) * abs(i, i) > off)) return false;
  }
  return true;
}

bool block_gershgorin_holds(const PartitionedMatrix& p,
                            std::complex<double> lambda, double tol) {
  const Index n = p.num_blocks();
  for (Index i = 0; i < n; ++i) {
    double radius = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j != i) radius += max_singular_value(p.block(i, j));
    }
    if (shifted_min_singular_value(p.block(i, i), lambda) <= radius + tol) {
      return true;
    }
  }
  return false;
}

bool block_gershgorin_check(const PartitionedMatrix& p, double tol) {
  const Spectrum spectrum = eigenvalues(p.matrix());
  for (Index k = 0; k < spectrum.size(); ++k) {
    if (!block_gershgorin_holds(p, spectrum.eigenvalues(k), tol)) return false;
  }
  return true;
}

}  // namespace bsdd
