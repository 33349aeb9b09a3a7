#include "bsdd/linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "bsdd/error.h"

namespace bsdd {

namespace {

std::string shape(const Eigen::Ref<const Matrix>& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_nonempty(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (m.size() == 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " must be nonempty");
  }
}

// Jacobi rather than BDCSVD: the divide-and-conquer path loses the smallest
// singular value of the complex embedding below, where every value is doubled.
Eigen::VectorXd singular_values(const Eigen::Ref<const Matrix>& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::kIterationFailure, "SVD did not converge");
  }
  return svd.singularValues();
}

// Real 2n embedding [[X, -Y], [Y, X]] of X + iY. Its singular values are
// those of the complex matrix, each repeated twice.
Matrix complex_embedding(const Eigen::Ref<const Matrix>& x,
                         const Eigen::Ref<const Matrix>& y) {
  const Index n = x.rows();
  const Index m = x.cols();
  Matrix e(2 * n, 2 * m);
  e.topLeftCorner(n, m) = x;
  e.topRightCorner(n, m) = -y;
  e.bottomLeftCorner(n, m) = y;
  e.bottomRightCorner(n, m) = x;
  return e;
}

Matrix kronecker_lyapunov(const Eigen::Ref<const Matrix>& a,
                          const Eigen::Ref<const Matrix>& q) {
  const Index n = a.rows();
  // vec(a X) = (I (x) a) vec X, vec(X a^T) = (a (x) I) vec X.
  Matrix k = Matrix::Zero(n * n, n * n);
  for (Index j = 0; j < n; ++j) {
    k.block(j * n, j * n, n, n) += a;
    for (Index i = 0; i < n; ++i) {
      k.block(i * n, j * n, n, n).diagonal().array() += a(i, j);
    }
  }
  Eigen::FullPivLU<Matrix> lu(k);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::kSolverFailure, "singular Lyapunov operator");
  }
  const Matrix qm = q;
  const Vector rhs = -Eigen::Map<const Vector>(qm.data(), n * n);
  const Vector x = lu.solve(rhs);
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

Matrix schur_lyapunov(const Eigen::Ref<const Matrix>& a,
                      const Eigen::Ref<const Matrix>& q) {
  const Index n = a.rows();
  Eigen::ComplexSchur<Matrix> schur(a);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::kSolverFailure, "Schur decomposition failed");
  }
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd& u = schur.matrixU();
  // With a = U T U^*, Y = U^* X U solves T Y + Y T^* + F = 0.
  const Eigen::MatrixXcd f = u.adjoint() * q.cast<std::complex<double>>() * u;
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd shifted = t;
  for (Index k = n - 1; k >= 0; --k) {
    Eigen::VectorXcd rhs = -f.col(k);
    for (Index j = k + 1; j < n; ++j) {
      rhs -= std::conj(t(k, j)) * y.col(j);
    }
    shifted.diagonal() = t.diagonal().array() + std::conj(t(k, k));
    y.col(k) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (u * y * u.adjoint()).real();
}

Matrix riccati_residual(const Eigen::Ref<const Matrix>& a,
                        const Eigen::Ref<const Matrix>& r,
                        const Eigen::Ref<const Matrix>& q,
                        const Eigen::Ref<const Matrix>& p) {
  return p * a + a.transpose() * p + p * r * p + q;
}

lapack_logical select_open_left_half_plane(const double* re, const double*) {
  return *re < 0.0;
}

bool on_imaginary_axis(std::complex<double> lambda, double tol) {
  return std::abs(lambda.real()) <= tol * (1.0 + std::abs(lambda));
}

}  // namespace

void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonFinite,
                std::string(what) + " contains NaN or Inf entries");
  }
}

void require_square(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kNonSquare,
                std::string(what) + " is " + shape(m) + ", expected square");
  }
}

double Spectrum::max_real_part() const {
  if (eigenvalues.size() == 0) return -std::numeric_limits<double>::infinity();
  return eigenvalues.real().maxCoeff();
}

Spectrum eigenvalues(const Eigen::Ref<const Matrix>& m) {
  require_square(m, "matrix");
  require_finite(m, "matrix");
  if (m.size() == 0) return {};
  Eigen::EigenSolver<Matrix> solver(m, /* computeEigenvectors = */ false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kIterationFailure,
                "real Schur iteration did not converge");
  }
  return Spectrum{solver.eigenvalues()};
}

bool is_hurwitz(const Eigen::Ref<const Matrix>& m, double margin) {
  return eigenvalues(m).max_real_part() < -margin;
}

double max_singular_value(const Eigen::Ref<const Matrix>& m) {
  require_nonempty(m, "matrix");
  require_finite(m, "matrix");
  return singular_values(m)(0);
}

double min_singular_value(const Eigen::Ref<const Matrix>& m) {
  require_nonempty(m, "matrix");
  require_finite(m, "matrix");
  const Eigen::VectorXd s = singular_values(m);
  return s(s.size() - 1);
}

double lambda_max_sym(const Eigen::Ref<const Matrix>& m) {
  require_square(m, "matrix");
  require_nonempty(m, "matrix");
  const Matrix s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kIterationFailure, "symmetric eigensolver failed");
  }
  return solver.eigenvalues()(s.rows() - 1);
}

double lambda_min_sym(const Eigen::Ref<const Matrix>& m) {
  return -lambda_max_sym(-m);
}

bool is_symmetric(const Eigen::Ref<const Matrix>& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).norm() <= rel_tol * m.norm();
}

Matrix block_diagonal(const std::vector<Matrix>& blocks) {
  Index rows = 0;
  Index cols = 0;
  for (const Matrix& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Index r = 0;
  Index c = 0;
  for (const Matrix& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& a,
                      const Eigen::Ref<const Matrix>& q,
                      const LyapunovOptions& options) {
  require_square(a, "a");
  require_square(q, "q");
  if (a.rows() != q.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "a is " + shape(a) + " but q is " + shape(q));
  }
  require_nonempty(a, "a");
  require_finite(q, "q");
  if (!is_hurwitz(a)) {
    throw Error(ErrorCode::kNotHurwitz,
                "Lyapunov equation needs a Hurwitz coefficient");
  }

  bool use_kronecker = false;
  switch (options.method) {
    case LyapunovMethod::kAuto:
      use_kronecker = a.rows() <= options.kronecker_max_order;
      break;
    case LyapunovMethod::kKronecker:
      use_kronecker = true;
      break;
    case LyapunovMethod::kSchur:
      break;
  }
  Matrix x = use_kronecker ? kronecker_lyapunov(a, q) : schur_lyapunov(a, q);
  if (is_symmetric(q, 1e-14)) x = 0.5 * (x + x.transpose());

  const double residual = (x * a.transpose() + a * x + q).norm();
  const double scale = a.norm() * x.norm() + q.norm();
  if (!(residual <= options.rtol * scale)) {
    throw Error(ErrorCode::kSolverFailure,
                "Lyapunov residual " + std::to_string(residual) +
                    " exceeds tolerance");
  }
  return x;
}

double riccati_relative_residual(const Eigen::Ref<const Matrix>& a,
                                 const Eigen::Ref<const Matrix>& r,
                                 const Eigen::Ref<const Matrix>& q,
                                 const Eigen::Ref<const Matrix>& p) {
  const double residual = riccati_residual(a, r, q, p).norm();
  const double scale =
      2.0 * (p * a).norm() + (p * r * p).norm() + q.norm();
  return scale > 0.0 ? residual / scale : residual;
}

std::optional<Matrix> solve_care_positive(const Eigen::Ref<const Matrix>& a,
                                          const Eigen::Ref<const Matrix>& r,
                                          const Eigen::Ref<const Matrix>& q,
                                          const RiccatiOptions& options) {
  require_square(a, "a");
  require_square(r, "r");
  require_square(q, "q");
  const Index n = a.rows();
  if (r.rows() != n || q.rows() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "a " + shape(a) + ", r " + shape(r) + ", q " + shape(q));
  }
  require_nonempty(a, "a");
  require_finite(a, "a");
  require_finite(r, "r");
  require_finite(q, "q");
  const Matrix rs = 0.5 * (r + r.transpose());
  const Matrix qs = 0.5 * (q + q.transpose());

  const Index n2 = 2 * n;
  Matrix h(n2, n2);
  h << a, rs, -qs, -a.transpose();

  Matrix z(n2, n2);
  Eigen::VectorXd wr(n2);
  Eigen::VectorXd wi(n2);
  lapack_int sdim = 0;
  const lapack_int info = LAPACKE_dgees(
      LAPACK_COL_MAJOR, 'V', 'S', select_open_left_half_plane,
      static_cast<lapack_int>(n2), h.data(), static_cast<lapack_int>(n2),
      &sdim, wr.data(), wi.data(), z.data(), static_cast<lapack_int>(n2));
  // info n2 + 1 or n2 + 2 means the reordering failed, but wr/wi still hold
  // the eigenvalues: an eigenvalue on the axis is the usual cause.
  const bool reorder_failed = info == n2 + 1 || info == n2 + 2;
  if (info != 0 && !reorder_failed) {
    throw Error(ErrorCode::kNumericalFailure,
                "dgees failed with info " + std::to_string(info));
  }
  for (Index k = 0; k < n2; ++k) {
    if (on_imaginary_axis({wr(k), wi(k)}, options.imag_axis_tol)) {
      return std::nullopt;
    }
  }
  if (reorder_failed) {
    throw Error(ErrorCode::kNumericalFailure,
                "could not order the Hamiltonian Schur form (eigenvalues "
                "too close to the imaginary axis)");
  }
  if (sdim != n) return std::nullopt;

  const Matrix u1 = z.topLeftCorner(n, n);
  const Matrix u2 = z.bottomLeftCorner(n, n);
  Eigen::PartialPivLU<Matrix> lu(u1.transpose());
  if (!(lu.rcond() > 1e-13)) {
    throw Error(ErrorCode::kNumericalFailure,
                "stable invariant subspace is not a graph (rcond " +
                    std::to_string(lu.rcond()) + ")");
  }
  Matrix p = lu.solve(u2.transpose()).transpose();
  p = 0.5 * (p + p.transpose());

  if (options.refine) {
    const Matrix closed_loop = a + rs * p;
    if (is_hurwitz(closed_loop)) {
      const Matrix defect = riccati_residual(a, rs, qs, p);
      Matrix delta = solve_lyapunov(closed_loop.transpose(), defect);
      p += 0.5 * (delta + delta.transpose());
    }
  }

  if (riccati_relative_residual(a, rs, qs, p) > options.tol) {
    throw Error(ErrorCode::kNumericalFailure,
                "Riccati residual " +
                    std::to_string(riccati_relative_residual(a, rs, qs, p)) +
                    " exceeds tolerance");
  }
  if (!is_hurwitz(a + rs * p)) {
    throw Error(ErrorCode::kNumericalFailure,
                "extracted Riccati solution is not stabilizing");
  }
  if (!(lambda_min_sym(p) > 0.0)) return std::nullopt;
  return p;
}

bool HinfResult::is_infinite() const { return std::isinf(norm); }

double resolvent_gain(const Eigen::Ref<const Matrix>& a, double omega) {
  const Index n = a.rows();
  const Matrix y = omega * Matrix::Identity(n, n);
  const double smin = min_singular_value(complex_embedding(-a, y));
  return smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
}

double shifted_min_singular_value(const Eigen::Ref<const Matrix>& a,
                                  std::complex<double> lambda) {
  require_square(a, "a");
  const Index n = a.rows();
  const Matrix x = lambda.real() * Matrix::Identity(n, n) - a;
  const Matrix y = lambda.imag() * Matrix::Identity(n, n);
  return min_singular_value(complex_embedding(x, y));
}

namespace {

// Nonnegative frequencies w for which i w is an eigenvalue of the Hamiltonian
// [[a, I/g], [-I/g, -a^T]]; empty iff g > ||(sI - a)^-1||_Hinf.
std::vector<double> imaginary_frequencies(const Eigen::Ref<const Matrix>& a,
                                          double gamma, double tol) {
  const Index n = a.rows();
  Matrix h(2 * n, 2 * n);
  h << a, Matrix::Identity(n, n) / gamma, -Matrix::Identity(n, n) / gamma,
      -a.transpose();
  Eigen::EigenSolver<Matrix> solver(h, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kIterationFailure,
                "Hamiltonian eigenvalues did not converge");
  }
  std::vector<double> out;
  for (const auto& lambda : solver.eigenvalues()) {
    if (on_imaginary_axis(lambda, tol)) out.push_back(std::abs(lambda.imag()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

HinfResult hinf_norm_resolvent(const Eigen::Ref<const Matrix>& a,
                               const HinfOptions& options) {
  require_square(a, "a");
  require_nonempty(a, "a");
  require_finite(a, "a");
  const Spectrum spectrum = eigenvalues(a);
  if (!(spectrum.max_real_part() < 0.0)) {
    return HinfResult{std::numeric_limits<double>::infinity(), 0.0, 0.0, 0};
  }

  double lo = 0.0;
  double peak = 0.0;
  auto probe = [&](double omega) {
    const double g = resolvent_gain(a, omega);
    if (g > lo) {
      lo = g;
      peak = omega;
    }
  };

  // Seed the lower bound at w = 0 (||a^-1||_2), at the modal frequencies,
  // and on a coarse log grid spanning the spectrum.
  probe(0.0);
  const Eigen::ArrayXd magnitudes = spectrum.eigenvalues.array().abs();
  for (Index k = 0; k < spectrum.size(); ++k) {
    probe(std::abs(spectrum.eigenvalues(k).imag()));
    probe(magnitudes(k));
  }
  const double w_min = std::max(magnitudes.minCoeff(), 1e-12) * 1e-2;
  const double w_max = std::max(magnitudes.maxCoeff(), 1e-12) * 1e2;
  constexpr int kGridPoints = 48;
  for (int k = 0; k < kGridPoints; ++k) {
    probe(w_min * std::pow(w_max / w_min, k / double(kGridPoints - 1)));
  }

  int iterations = 0;
  auto refine_lower_bound = [&](const std::vector<double>& freqs) {
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      probe(freqs[k]);
      if (k + 1 < freqs.size()) probe(0.5 * (freqs[k] + freqs[k + 1]));
    }
    if (!freqs.empty()) probe(0.5 * freqs.front());
  };

  double hi = lo * (1.0 + 1e-3);
  for (;;) {
    const auto freqs = imaginary_frequencies(a, hi, options.imag_axis_tol);
    if (freqs.empty()) break;
    refine_lower_bound(freqs);
    lo = std::max(lo, hi);
    hi *= 2.0;
    if (++iterations > options.max_iterations) {
      throw Error(ErrorCode::kIterationBudgetExceeded,
                  "could not bracket the Hinf norm");
    }
  }

  while ((hi - lo) > options.tol * lo) {
    if (++iterations > options.max_iterations) {
      throw Error(ErrorCode::kIterationBudgetExceeded,
                  "Hinf bisection exceeded " +
                      std::to_string(options.max_iterations) + " iterations");
    }
    const double mid = 0.5 * (lo + hi);
    const auto freqs = imaginary_frequencies(a, mid, options.imag_axis_tol);
    if (freqs.empty()) {
      hi = mid;
    } else {
      lo = std::max(lo, mid);
      refine_lower_bound(freqs);
    }
  }
  // The evaluated lower bound can pass a hi that was accepted on a
  // misclassified eigenvalue very close to the axis.
  hi = std::max(hi, lo);
  return HinfResult{hi, 1.0 / hi, peak, iterations};
}

}  // namespace bsdd
