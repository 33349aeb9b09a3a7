#pragma once

// Dense kernels shared by the comparison and certificate layers: spectra,
// singular values, Lyapunov and Riccati solvers, and the H-infinity norm of
// the resolvent (sI - A)^-1.

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace bsdd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Throws kNonFinite if any entry is NaN or Inf.
void require_finite(const Eigen::Ref<const Matrix>& m, const char* what);
/// Throws kNonSquare unless m is square.
void require_square(const Eigen::Ref<const Matrix>& m, const char* what);

struct Spectrum {
  Eigen::VectorXcd eigenvalues;

  Index size() const { return eigenvalues.size(); }
  /// -inf for an empty spectrum.
  double max_real_part() const;
};

Spectrum eigenvalues(const Eigen::Ref<const Matrix>& m);

/// True iff every eigenvalue has real part < -margin.
bool is_hurwitz(const Eigen::Ref<const Matrix>& m, double margin = 0.0);

double max_singular_value(const Eigen::Ref<const Matrix>& m);
double min_singular_value(const Eigen::Ref<const Matrix>& m);

/// Extreme eigenvalues of the symmetric part (m + m^T)/2.
double lambda_max_sym(const Eigen::Ref<const Matrix>& m);
double lambda_min_sym(const Eigen::Ref<const Matrix>& m);

/// ||m - m^T||_F <= rel_tol * ||m||_F.
bool is_symmetric(const Eigen::Ref<const Matrix>& m, double rel_tol = 1e-10);

Matrix block_diagonal(const std::vector<Matrix>& blocks);

enum class LyapunovMethod { kAuto, kKronecker, kSchur };

struct LyapunovOptions {
  LyapunovMethod method = LyapunovMethod::kAuto;
  /// kAuto uses the vectorized solve up to this order, Bartels-Stewart above.
  Index kronecker_max_order = 8;
  /// Residual acceptance: ||X a^T + a X + q||_F <= rtol (||a|| ||X|| + ||q||).
  double rtol = 1e-10;
};

/// Solves X a^T + a X + q = 0 for Hurwitz a.
Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& a,
                      const Eigen::Ref<const Matrix>& q,
                      const LyapunovOptions& options = {});

struct RiccatiOptions {
  /// Relative residual bound, see riccati_relative_residual().
  double tol = 1e-8;
  /// One Newton (defect-correction) step after the Schur solve.
  bool refine = false;
  /// Hamiltonian eigenvalue lambda counts as imaginary when
  /// |Re lambda| <= imag_axis_tol * (1 + |lambda|).
  double imag_axis_tol = 1e-8;
};

/// ||P a + a^T P + P r P + q||_F divided by the sum of the term norms.
double riccati_relative_residual(const Eigen::Ref<const Matrix>& a,
                                 const Eigen::Ref<const Matrix>& r,
                                 const Eigen::Ref<const Matrix>& q,
                                 const Eigen::Ref<const Matrix>& p);

/// Stabilizing solution of P a + a^T P + P r P + q = 0 (so a + r P is
/// Hurwitz), returned only if it is positive definite. Empty when the
/// Hamiltonian [[a, r], [-q, -a^T]] has imaginary-axis eigenvalues or the
/// stabilizing solution is not positive definite.
std::optional<Matrix> solve_care_positive(const Eigen::Ref<const Matrix>& a,
                                          const Eigen::Ref<const Matrix>& r,
                                          const Eigen::Ref<const Matrix>& q,
                                          const RiccatiOptions& options = {});

struct HinfOptions {
  /// Stop when (hi - lo) / lo <= tol.
  double tol = 1e-8;
  int max_iterations = 200;
  double imag_axis_tol = 1e-8;
};

struct HinfResult {
  /// +inf when a is not Hurwitz.
  double norm = 0.0;
  /// 1 / norm, continuously extended to 0 for non-Hurwitz a.
  double inverse_norm = 0.0;
  double peak_frequency = 0.0;
  int iterations = 0;

  bool is_infinite() const;
};

/// sigma_max((i w I - a)^-1), evaluated through the real 2n embedding.
double resolvent_gain(const Eigen::Ref<const Matrix>& a, double omega);

/// sigma_min(lambda I - a) for complex lambda.
double shifted_min_singular_value(const Eigen::Ref<const Matrix>& a,
                                  std::complex<double> lambda);

/// ||(sI - a)^-1||_Hinf by Hamiltonian bisection (bounded real lemma).
HinfResult hinf_norm_resolvent(const Eigen::Ref<const Matrix>& a,
                               const HinfOptions& options = {});

}  // namespace bsdd
