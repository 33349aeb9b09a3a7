#pragma once

// Scalar and block comparison matrices, Metzler structure, and the scaling
// vectors that certify scaled diagonal dominance.

#include <complex>
#include <optional>
#include <vector>

#include "bsdd/linalg.h"
#include "bsdd/partition.h"

namespace bsdd {

/// Absolute floor on -max Re(lambda) used when deciding that a comparison
/// matrix is Hurwitz.
inline constexpr double kComparisonHurwitzMargin = 1e-9;

enum class ComparisonKind { kScalar, kBlock };

enum class DiagonalSource {
  kClippedDiagonal,   // -max{-a_ii, 0}
  kInverseHinfNorm,   // -||(sI - A_ii)^-1||_Hinf^-1, 0 for non-Hurwitz A_ii
};

struct DiagonalProvenance {
  DiagonalSource source = DiagonalSource::kClippedDiagonal;
  bool block_hurwitz = false;
  double hinf_norm = 0.0;  // +inf when the block is not Hurwitz
  double peak_frequency = 0.0;
};

struct ComparisonMatrix {
  Matrix matrix;
  ComparisonKind kind = ComparisonKind::kScalar;
  std::vector<DiagonalProvenance> diagonal;
  /// sigma_max of each off-diagonal source block; zero on the diagonal.
  Matrix offdiag_sigma;
  /// Off-diagonal source blocks that are identically zero.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> structural_zero;

  Index order() const { return matrix.rows(); }
  bool is_hurwitz(double margin = kComparisonHurwitzMargin) const;
};

/// d certifies row dominance (-M d > 0), e column dominance (-e^T M > 0).
struct ScalingPair {
  Vector d;
  Vector e;
};

enum class DominanceMode { kRow, kColumn };

ComparisonMatrix scalar_comparison(const Eigen::Ref<const Matrix>& a);

ComparisonMatrix block_comparison(const PartitionedMatrix& p,
                                  const HinfOptions& options = {});

bool is_metzler(const Eigen::Ref<const Matrix>& m);

/// d = -m^-1 1 and e = -m^-T 1. Returned only if both are positive and
/// (-m d)_i > margin d_i, (-e^T m)_i > margin e_i for every i, which
/// certifies that the spectral abscissa of m is below -margin. Empty for
/// non-Hurwitz m. Throws kNotMetzler.
std::optional<ScalingPair> metzler_scalings(
    const Eigen::Ref<const Matrix>& m,
    double margin = kComparisonHurwitzMargin);

/// Strict row (d_i |a_ii| > sum_j d_j |a_ij|) or column
/// (d_i |a_ii| > sum_j d_j |a_ji|) scaled diagonal dominance.
bool check_scaled_dominance(const Eigen::Ref<const Matrix>& a,
                            const Eigen::Ref<const Vector>& d,
                            DominanceMode mode);

/// Block Gershgorin inclusion at lambda: some i has
/// sigma_min(lambda I - A_ii) <= sum_{j != i} ||A_ij||_2 + tol.
bool block_gershgorin_holds(const PartitionedMatrix& p,
                            std::complex<double> lambda, double tol = 1e-6);

/// block_gershgorin_holds for every eigenvalue of p.matrix().
bool block_gershgorin_check(const PartitionedMatrix& p, double tol = 1e-6);

}  // namespace bsdd
