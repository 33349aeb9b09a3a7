#include "bsdd/certificate.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "bsdd/error.h"

namespace bsdd {

namespace {

// Round-off allowance for non-strict (<= 0, >= 0) matrix inequalities,
// relative to the size of the operands.
constexpr double kNonStrictTol = 1e-11;

std::string block_name(Index i, Index j) {
  std::ostringstream os;
  os << "(" << i + 1 << "," << j + 1 << ")";
  return os.str();
}

Matrix identity(Index k) { return Matrix::Identity(k, k); }

void require_dims(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kDimensionMismatch, what);
}

// Coupling term sum_{j != i, gamma_ij > 0} A_ij A_ij^T / gamma_ij.
Matrix coupling_gramian(const PartitionedMatrix& p, const Matrix& gamma,
                        Index i) {
  const Index k = p.partition().size(i);
  Matrix r = Matrix::Zero(k, k);
  for (Index j = 0; j < p.num_blocks(); ++j) {
    if (j == i || gamma(i, j) == 0.0) continue;
    const Matrix aij = p.block(i, j);
    r += aij * aij.transpose() / gamma(i, j);
  }
  return 0.5 * (r + r.transpose());
}

double column_sum_offdiag(const Matrix& gamma, Index i) {
  double s = 0.0;
  for (Index j = 0; j < gamma.rows(); ++j) {
    if (j != i) s += gamma(j, i);
  }
  return s;
}

void check_gamma_structure(const PartitionedMatrix& p, const Matrix& gamma) {
  const Index n = p.num_blocks();
  require_dims(gamma.rows() == n && gamma.cols() == n,
               "gamma must be " + std::to_string(n) + "x" + std::to_string(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!(gamma(i, j) >= 0.0) || !std::isfinite(gamma(i, j))) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "gamma" + block_name(i, j) + " must be finite and >= 0");
      }
      if (gamma(i, j) == 0.0 && !p.is_zero_block(i, j)) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "gamma" + block_name(i, j) +
                        " is zero but the coupling block is not");
      }
    }
  }
}

std::optional<DecoupledSolution> solve_decoupled(
    const PartitionedMatrix& p, const Matrix& gamma,
    const Eigen::Ref<const Vector>& eps, const RiccatiOptions& options,
    Index* failed_block) {
  const Index n = p.num_blocks();
  check_gamma_structure(p, gamma);
  require_dims(eps.size() == n, "epsilon must have one entry per block");
  if (!(eps.array() > 0.0).all()) {
    throw Error(ErrorCode::kDimensionMismatch, "epsilon entries must be > 0");
  }
  DecoupledSolution out;
  for (Index i = 0; i < n; ++i) {
    const Index k = p.partition().size(i);
    const Matrix r = coupling_gramian(p, gamma, i);
    const Matrix q = (eps(i) + column_sum_offdiag(gamma, i)) * identity(k);
    const Matrix aii = p.block(i, i);
    auto pi = solve_care_positive(aii, r, q, options);
    if (!pi) {
      if (failed_block) *failed_block = i;
      return std::nullopt;
    }
    out.residuals.push_back(riccati_relative_residual(aii, r, q, *pi));
    out.blocks.push_back(std::move(*pi));
  }
  return out;
}

// Block row i of diag(P) A + A^T diag(P), without forming the N x N product
// twice.
Matrix lyapunov_operator(const PartitionedMatrix& p,
                         const std::vector<Matrix>& blocks) {
  const BlockPartition& part = p.partition();
  const Matrix& a = p.matrix();
  Matrix pa(a.rows(), a.cols());
  for (Index i = 0; i < part.num_blocks(); ++i) {
    pa.middleRows(part.offset(i), part.size(i)).noalias() =
        blocks[static_cast<std::size_t>(i)] *
        a.middleRows(part.offset(i), part.size(i));
  }
  return pa + pa.transpose();
}

std::vector<std::vector<Matrix>> zero_grid(const BlockPartition& part,
                                           bool w_shape) {
  const Index n = part.num_blocks();
  std::vector<std::vector<Matrix>> g(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Index k = w_shape ? part.size(i) : part.size(j);
      g[static_cast<std::size_t>(i)].push_back(Matrix::Zero(k, k));
    }
  }
  return g;
}

}  // namespace

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kAuto: return "auto";
    case Strategy::kTestA: return "a";
    case Strategy::kTestB: return "b";
    case Strategy::kTestC: return "c";
    case Strategy::kProp4: return "prop4";
    case Strategy::kCustom: return "custom";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (Strategy s : {Strategy::kAuto, Strategy::kTestA, Strategy::kTestB,
                     Strategy::kTestC, Strategy::kProp4, Strategy::kCustom}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kPass: return "pass";
    case Outcome::kFail: return "fail";
    case Outcome::kError: return "error";
  }
  return "unknown";
}

GammaMatrix gamma_for_test(const PartitionedMatrix& p, StabilityTest test,
                           const std::optional<ScalingPair>& scalings) {
  const Index n = p.num_blocks();
  if (test == StabilityTest::kC) {
    if (!scalings) {
      throw Error(ErrorCode::kMissingScalings,
                  "test C needs scalings of the block comparison matrix");
    }
    require_dims(scalings->d.size() == n && scalings->e.size() == n,
                 "scalings must have one entry per block");
  }
  GammaMatrix g;
  g.gamma = Matrix::Zero(n, n);
  switch (test) {
    case StabilityTest::kA: g.strategy = Strategy::kTestA; break;
    case StabilityTest::kB: g.strategy = Strategy::kTestB; break;
    case StabilityTest::kC: g.strategy = Strategy::kTestC; break;
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j || p.is_zero_block(i, j)) continue;
      const double sigma = max_singular_value(p.block(i, j));
      switch (test) {
        case StabilityTest::kA:
          g.gamma(i, j) = sigma;
          break;
        case StabilityTest::kB:
          g.gamma(i, j) = 1.0;
          break;
        case StabilityTest::kC:
          g.gamma(i, j) = sigma * scalings->e(i) / scalings->d(j);
          break;
      }
    }
  }
  return g;
}

Vector default_epsilon(const GammaMatrix& g) {
  const Index n = g.gamma.rows();
  Vector eps(n);
  for (Index i = 0; i < n; ++i) {
    eps(i) = 1e-6 * (1.0 + column_sum_offdiag(g.gamma, i));
  }
  return eps;
}

std::optional<DecoupledSolution> decoupled_riccati_test(
    const PartitionedMatrix& p, const GammaMatrix& g,
    const Eigen::Ref<const Vector>& eps, const RiccatiOptions& options) {
  return solve_decoupled(p, g.gamma, eps, options, nullptr);
}

WitnessSet prop4_construct(const PartitionedMatrix& p,
                           const ScalingPair& scalings,
                           const HinfOptions& hinf,
                           const RiccatiOptions& riccati) {
  const Index n = p.num_blocks();
  const BlockPartition& part = p.partition();
  require_dims(scalings.d.size() == n && scalings.e.size() == n,
               "scalings must have one entry per block");
  const ComparisonMatrix cmp = block_comparison(p, hinf);
  const Vector& d = scalings.d;
  const Vector& e = scalings.e;
  if (!check_scaled_dominance(cmp.matrix, d, DominanceMode::kRow) ||
      !check_scaled_dominance(cmp.matrix, e, DominanceMode::kColumn)) {
    throw Error(ErrorCode::kComparisonNotHurwitz,
                "scalings do not certify block scaled diagonal dominance");
  }

  // gamma_ii = inv_i e_i / d_i, gamma_ij = sigma(A_ij) e_i / d_j.
  Matrix gamma = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    gamma(i, i) = -cmp.matrix(i, i) * e(i) / d(i);
    for (Index j = 0; j < n; ++j) {
      if (j != i) gamma(i, j) = cmp.offdiag_sigma(i, j) * e(i) / d(j);
    }
  }

  WitnessSet out;
  out.w = zero_grid(part, /* w_shape = */ true);
  out.v = zero_grid(part, /* w_shape = */ false);
  for (Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const Index k = part.size(i);
    const double inv = -cmp.matrix(i, i);
    const Matrix r = coupling_gramian(p, gamma, i);
    const double ratio = lambda_max_sym(r) * e(i) / (inv * d(i));
    out.coupling_ratio.push_back(ratio);
    if (!(ratio < 1.0)) {
      throw Error(ErrorCode::kRiccatiFailure,
                  "coupling bound violated for block " + std::to_string(i + 1) +
                      " (ratio " + std::to_string(ratio) + ")");
    }
    // Solve with q = (1 + theta) gamma_ii I; theta < 1/ratio - 1 keeps the
    // bounded-real condition strict.
    const double theta =
        ratio > 0.0 ? std::min(1.0, 0.5 * (1.0 / ratio - 1.0)) : 1.0;
    const double extra = theta * gamma(i, i);
    const Matrix aii = p.block(i, i);
    auto pi = solve_care_positive(aii, r, (gamma(i, i) + extra) * identity(k),
                                  riccati);
    if (!pi) {
      throw Error(ErrorCode::kRiccatiFailure,
                  "no stabilizing Riccati solution for block " +
                      std::to_string(i + 1));
    }

    std::vector<Index> coupled;
    for (Index j = 0; j < n; ++j) {
      if (j != i && gamma(i, j) > 0.0) coupled.push_back(j);
    }
    const double tau =
        coupled.empty() ? 0.0 : extra / (4.0 * double(coupled.size()));
    Matrix w_sum = Matrix::Zero(k, k);
    for (Index j : coupled) {
      const auto sj = static_cast<std::size_t>(j);
      const Matrix pa = *pi * p.block(i, j);
      Matrix wij = pa * pa.transpose() / gamma(i, j) + tau * identity(k);
      wij = 0.5 * (wij + wij.transpose());
      w_sum += wij;
      out.w[si][sj] = std::move(wij);
      out.v[si][sj] = gamma(i, j) * identity(part.size(j));
    }
    out.w[si][si] = w_sum + 0.25 * extra * identity(k);
    out.v[si][si] = gamma(i, i) * identity(k);
    out.p.push_back(std::move(*pi));
  }

  WitnessCheck check = verify_general_witnesses(p, out, 0.0);
  out.slack = std::move(check.slack);
  if (!check.ok) {
    throw Error(ErrorCode::kRiccatiFailure,
                "constructed witnesses failed verification: " + check.failure);
  }
  return out;
}

WitnessCheck verify_general_witnesses(const PartitionedMatrix& p,
                                      const WitnessSet& w, double margin) {
  const Index n = p.num_blocks();
  const BlockPartition& part = p.partition();
  const auto un = static_cast<std::size_t>(n);
  require_dims(w.p.size() == un && w.w.size() == un && w.v.size() == un,
               "witness set does not match the partition");
  for (Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    require_dims(w.w[si].size() == un && w.v[si].size() == un,
                 "witness grid row has the wrong length");
    require_dims(w.p[si].rows() == part.size(i) && w.p[si].cols() == part.size(i),
                 "P block " + std::to_string(i + 1) + " has the wrong size");
    for (Index j = 0; j < n; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      require_dims(w.w[si][sj].rows() == part.size(i) &&
                       w.w[si][sj].cols() == part.size(i),
                   "W" + block_name(i, j) + " must be k_i x k_i");
      require_dims(w.v[si][sj].rows() == part.size(j) &&
                       w.v[si][sj].cols() == part.size(j),
                   "V" + block_name(i, j) + " must be k_j x k_j");
    }
  }

  WitnessCheck out;
  out.ok = true;
  out.slack.coupling = Matrix::Zero(n, n);
  auto fail = [&](const std::string& msg) {
    if (out.ok) out.failure = msg;
    out.ok = false;
  };

  for (Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const Matrix& pi = w.p[si];
    if (!(lambda_min_sym(pi) > 0.0)) {
      fail("P" + std::to_string(i + 1) + " is not positive definite");
    }
    const Matrix aii = p.block(i, i);
    const Matrix diag_lmi = pi * aii + aii.transpose() * pi + w.v[si][si] +
                            w.w[si][si];
    const double diag_scale =
        2.0 * (pi * aii).norm() + w.v[si][si].norm() + w.w[si][si].norm();
    const double diag_slack = -lambda_max_sym(diag_lmi);
    out.slack.diagonal.push_back(diag_slack);
    if (diag_slack < -kNonStrictTol * (1.0 + diag_scale)) {
      fail("diagonal LMI " + std::to_string(i + 1) + " violated");
    }

    Matrix w_rest = w.w[si][si];
    Matrix v_rest = w.v[si][si];
    double w_scale = w.w[si][si].norm();
    double v_scale = w.v[si][si].norm();
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto sj = static_cast<std::size_t>(j);
      w_rest -= w.w[si][sj];
      v_rest -= w.v[sj][si];
      w_scale += w.w[si][sj].norm();
      v_scale += w.v[sj][si].norm();

      const Index ki = part.size(i);
      const Index kj = part.size(j);
      const Matrix pa = pi * p.block(i, j);
      Matrix lmi(ki + kj, ki + kj);
      lmi << w.w[si][sj], -pa, -pa.transpose(), w.v[si][sj];
      const double s = lambda_min_sym(lmi);
      out.slack.coupling(i, j) = s;
      if (s < -kNonStrictTol * (1.0 + lmi.norm())) {
        fail("coupling LMI " + block_name(i, j) + " violated");
      }
    }
    const double ws = lambda_min_sym(w_rest);
    const double vs = lambda_min_sym(v_rest);
    out.slack.w_dominance.push_back(ws);
    out.slack.v_dominance.push_back(vs);
    if (!(ws > margin * (1.0 + w_scale))) {
      fail("W dominance " + std::to_string(i + 1) + " violated");
    }
    if (!(vs > margin * (1.0 + v_scale))) {
      fail("V dominance " + std::to_string(i + 1) + " violated");
    }
  }
  return out;
}

LyapunovDecomposition lyapunov_decomposition(const PartitionedMatrix& p,
                                             const WitnessSet& w) {
  const BlockPartition& part = p.partition();
  const Index n = part.num_blocks();
  const Index big = part.total();
  require_dims(w.p.size() == static_cast<std::size_t>(n) &&
                   w.w.size() == static_cast<std::size_t>(n) &&
                   w.v.size() == static_cast<std::size_t>(n),
               "witness set does not match the partition");
  LyapunovDecomposition out{Matrix::Zero(big, big), Matrix::Zero(big, big),
                            Matrix::Zero(big, big)};
  for (Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const Index oi = part.offset(i);
    const Index ki = part.size(i);
    const Matrix& pi = w.p[si];
    const Matrix aii = p.block(i, i);
    const Matrix vw = w.v[si][si] + w.w[si][si];
    out.diagonal_terms.block(oi, oi, ki, ki) +=
        pi * aii + aii.transpose() * pi + vw;

    Matrix rest = vw;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto sj = static_cast<std::size_t>(j);
      rest -= w.w[si][sj] + w.v[sj][si];

      const Index oj = part.offset(j);
      const Index kj = part.size(j);
      const Matrix pa = pi * p.block(i, j);
      out.coupling_terms.block(oi, oi, ki, ki) -= w.w[si][sj];
      out.coupling_terms.block(oj, oj, kj, kj) -= w.v[si][sj];
      out.coupling_terms.block(oi, oj, ki, kj) += pa;
      out.coupling_terms.block(oj, oi, kj, ki) += pa.transpose();
    }
    out.dominance_terms.block(oi, oi, ki, ki) -= rest;
  }
  return out;
}

std::optional<Certificate> assemble_and_verify(const PartitionedMatrix& p,
                                               const std::vector<Matrix>& blocks,
                                               double margin) {
  const BlockPartition& part = p.partition();
  require_dims(blocks.size() == static_cast<std::size_t>(part.num_blocks()),
               "expected " + std::to_string(part.num_blocks()) + " blocks, got " +
                   std::to_string(blocks.size()));
  double min_eig = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < part.num_blocks(); ++i) {
    const Matrix& b = blocks[static_cast<std::size_t>(i)];
    require_dims(b.rows() == part.size(i) && b.cols() == part.size(i),
                 "block " + std::to_string(i + 1) + " must be " +
                     std::to_string(part.size(i)) + "x" +
                     std::to_string(part.size(i)));
    require_finite(b, "certificate block");
    if (!is_symmetric(b, 1e-10)) return std::nullopt;
    min_eig = std::min(min_eig, lambda_min_sym(b));
  }
  if (!(min_eig > 0.0)) return std::nullopt;

  const double lmax = lambda_max_sym(lyapunov_operator(p, blocks));
  if (!(lmax < -margin)) return std::nullopt;

  Certificate cert{blocks, part, Strategy::kCustom, {}, 0.0, 0.0, {}};
  cert.lyapunov_margin = -lmax;
  cert.min_eigenvalue = min_eig;
  return cert;
}

const Certificate* TestReport::certificate() const {
  for (const RouteResult& r : routes) {
    if (r.outcome == Outcome::kPass && r.certificate) return &*r.certificate;
  }
  return nullptr;
}

const RouteResult* TestReport::find(Strategy route) const {
  for (const RouteResult& r : routes) {
    if (r.route == route) return &r;
  }
  return nullptr;
}

bool TestReport::any_error() const {
  return std::any_of(routes.begin(), routes.end(), [](const RouteResult& r) {
    return r.outcome == Outcome::kError;
  });
}

namespace {

struct ComparisonState {
  std::optional<ComparisonMatrix> matrix;
  std::optional<ScalingPair> scalings;
  std::string reason;
};

const ComparisonState& comparison_state(const PartitionedMatrix& p,
                                        const CertifyOptions& options,
                                        std::optional<ComparisonState>& cache) {
  if (cache) return *cache;
  ComparisonState s;
  s.matrix = block_comparison(p, options.hinf);
  s.scalings = metzler_scalings(s.matrix->matrix);
  if (!s.scalings) {
    std::ostringstream os;
    os << "block comparison matrix is not Hurwitz (max Re lambda = "
       << eigenvalues(s.matrix->matrix).max_real_part() << ")";
    s.reason = os.str();
  }
  cache = std::move(s);
  return *cache;
}

RouteResult run_prop4(const PartitionedMatrix& p, const CertifyOptions& options,
                      std::optional<ComparisonState>& cache) {
  RouteResult out;
  out.route = Strategy::kProp4;
  const ComparisonState& cs = comparison_state(p, options, cache);
  if (!cs.scalings) {
    out.reason = cs.reason;
    return out;
  }
  const WitnessSet w =
      prop4_construct(p, *cs.scalings, options.hinf, options.riccati);
  auto cert = assemble_and_verify(p, w.p, options.margin);
  if (!cert) {
    out.outcome = Outcome::kError;
    out.reason = "witness blocks did not pass the independent Lyapunov check";
    return out;
  }
  cert->strategy = Strategy::kProp4;
  out.outcome = Outcome::kPass;
  out.reason = "block comparison matrix is Hurwitz";
  out.certificate = std::move(cert);
  return out;
}

RouteResult run_test(const PartitionedMatrix& p, StabilityTest test,
                     const CertifyOptions& options,
                     std::optional<ComparisonState>& cache) {
  RouteResult out;
  std::optional<ScalingPair> scalings;
  if (test == StabilityTest::kC) {
    const ComparisonState& cs = comparison_state(p, options, cache);
    if (!cs.scalings) {
      out.route = Strategy::kTestC;
      out.reason = cs.reason;
      return out;
    }
    scalings = cs.scalings;
  }
  const GammaMatrix g = gamma_for_test(p, test, scalings);
  out.route = g.strategy;
  const Vector eps = options.epsilon
                         ? Vector::Constant(p.num_blocks(), *options.epsilon)
                         : default_epsilon(g);
  Index failed = -1;
  auto sol = solve_decoupled(p, g.gamma, eps, options.riccati, &failed);
  if (!sol) {
    out.reason = "block " + std::to_string(failed + 1) +
                 ": Riccati equation has no stabilizing positive definite "
                 "solution";
    return out;
  }
  auto cert = assemble_and_verify(p, sol->blocks, options.margin);
  if (!cert) {
    out.outcome = Outcome::kError;
    out.reason = "Riccati blocks did not pass the independent Lyapunov check";
    return out;
  }
  cert->strategy = g.strategy;
  cert->epsilon.assign(eps.data(), eps.data() + eps.size());
  cert->riccati_residuals = sol->residuals;
  out.outcome = Outcome::kPass;
  out.reason = "all decoupled Riccati equations solved";
  out.certificate = std::move(cert);
  return out;
}

}  // namespace

TestReport certify(const PartitionedMatrix& p, const CertifyOptions& options) {
  std::vector<Strategy> order;
  switch (options.strategy) {
    case Strategy::kAuto:
      order = {Strategy::kProp4, Strategy::kTestC, Strategy::kTestA,
               Strategy::kTestB};
      break;
    case Strategy::kCustom:
      throw Error(ErrorCode::kParseError,
                  "custom gains go through decoupled_riccati_test directly");
    default:
      order = {options.strategy};
  }

  TestReport report;
  std::optional<ComparisonState> cache;
  for (Strategy route : order) {
    const auto start = std::chrono::steady_clock::now();
    RouteResult result;
    try {
      switch (route) {
        case Strategy::kProp4:
          result = run_prop4(p, options, cache);
          break;
        case Strategy::kTestA:
          result = run_test(p, StabilityTest::kA, options, cache);
          break;
        case Strategy::kTestB:
          result = run_test(p, StabilityTest::kB, options, cache);
          break;
        case Strategy::kTestC:
          result = run_test(p, StabilityTest::kC, options, cache);
          break;
        default:
          break;
      }
    } catch (const Error& e) {
      result = RouteResult{};
      result.outcome = Outcome::kError;
      result.reason = e.what();
    }
    result.route = route;
    result.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    const bool passed = result.outcome == Outcome::kPass;
    report.routes.push_back(std::move(result));
    if (passed && !options.run_all_routes) break;
  }
  return report;
}

std::optional<ScalarWitnesses> scalar_witnesses(const Eigen::Ref<const Matrix>& a) {
  const ComparisonMatrix cmp = scalar_comparison(a);
  const auto scalings = metzler_scalings(cmp.matrix);
  if (!scalings) return std::nullopt;
  const Vector& d = scalings->d;
  const Vector& e = scalings->e;
  const Index n = a.rows();

  ScalarWitnesses s{Matrix::Zero(n, n), Matrix::Zero(n, n), Vector(n)};
  for (Index i = 0; i < n; ++i) {
    s.p(i) = e(i) / d(i);
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double aij = std::abs(a(i, j));
      s.w(i, j) = aij * e(i) * d(j) / (d(i) * d(i));
      s.v(i, j) = aij * e(i) / d(j);
    }
  }
  // Row and column dominance leave room below -a_ii e_i / d_i; put the
  // diagonal witnesses halfway into it.
  for (Index i = 0; i < n; ++i) {
    const double bound = -a(i, i) * e(i) / d(i);
    double w_off = 0.0;
    double v_off = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      w_off += s.w(i, j);
      v_off += s.v(j, i);
    }
    s.w(i, i) = 0.5 * (w_off + bound);
    s.v(i, i) = 0.5 * (v_off + bound);
  }
  if (!verify_scalar_conditions(a, s)) return std::nullopt;
  return s;
}

bool verify_scalar_conditions(const Eigen::Ref<const Matrix>& a,
                              const ScalarWitnesses& s, double margin) {
  require_square(a, "matrix");
  const Index n = a.rows();
  require_dims(s.w.rows() == n && s.w.cols() == n && s.v.rows() == n &&
                   s.v.cols() == n && s.p.size() == n,
               "scalar witnesses do not match the matrix order");
  if (!(s.p.array() > 0.0).all()) return false;
  if (!(s.w.array() >= 0.0).all() || !(s.v.array() >= 0.0).all()) return false;
  for (Index i = 0; i < n; ++i) {
    const double lhs = -a(i, i) * 2.0 * s.p(i);
    const double rhs = s.w(i, i) + s.v(i, i);
    if (lhs < rhs - kNonStrictTol * (1.0 + std::abs(rhs))) return false;

    double w_off = 0.0;
    double v_off = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      w_off += s.w(i, j);
      v_off += s.v(j, i);
      const double coupling = std::abs(a(i, j)) * s.p(i);
      const double bound = std::sqrt(s.w(i, j) * s.v(i, j));
      if (coupling > bound + kNonStrictTol * (1.0 + bound)) return false;
    }
    if (!(s.w(i, i) - w_off > margin * (1.0 + s.w(i, i) + w_off))) return false;
    if (!(s.v(i, i) - v_off > margin * (1.0 + s.v(i, i) + v_off))) return false;
  }
  return true;
}

bool is_border_block_diagonal(const PartitionedMatrix& p) {
  for (Index i = 1; i < p.num_blocks(); ++i) {
    for (Index j = 1; j < p.num_blocks(); ++j) {
      if (i != j && !p.is_zero_block(i, j)) return false;
    }
  }
  return true;
}

BbdWitnesses bbd_from_witnesses(const PartitionedMatrix& p, const WitnessSet& w) {
  const Index n = p.num_blocks();
  require_dims(w.p.size() == static_cast<std::size_t>(n) &&
                   w.w.size() == static_cast<std::size_t>(n) &&
                   w.v.size() == static_cast<std::size_t>(n),
               "witness set does not match the partition");
  BbdWitnesses out;
  out.q = w.p;
  for (std::size_t j = 1; j < static_cast<std::size_t>(n); ++j) {
    out.y.push_back(w.w[0][j] + w.v[j][0]);
    out.z.push_back(w.w[j][0] + w.v[0][j]);
  }
  return out;
}

bool verify_bbd_witnesses(const PartitionedMatrix& p, const BbdWitnesses& bbd,
                          double margin) {
  if (!is_border_block_diagonal(p)) {
    throw Error(ErrorCode::kNotBorderBlockDiagonal,
                "couplings outside block row/column 1");
  }
  const BlockPartition& part = p.partition();
  const Index n = part.num_blocks();
  const auto un = static_cast<std::size_t>(n);
  require_dims(bbd.q.size() == un && bbd.y.size() + 1 == un &&
                   bbd.z.size() + 1 == un,
               "expected n Q blocks and n-1 Y, Z blocks");
  const Index k0 = part.size(0);
  for (Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    require_dims(bbd.q[si].rows() == part.size(i) &&
                     bbd.q[si].cols() == part.size(i),
                 "Q" + std::to_string(i + 1) + " has the wrong size");
    if (i > 0) {
      require_dims(bbd.y[si - 1].rows() == k0 && bbd.y[si - 1].cols() == k0,
                   "Y" + std::to_string(i + 1) + " must be k_1 x k_1");
      require_dims(bbd.z[si - 1].rows() == part.size(i) &&
                       bbd.z[si - 1].cols() == part.size(i),
                   "Z" + std::to_string(i + 1) + " must be k_j x k_j");
    }
    if (!(lambda_min_sym(bbd.q[si]) > 0.0)) return false;
  }

  const Matrix& q0 = bbd.q[0];
  const Matrix a00 = p.block(0, 0);
  Matrix head = q0 * a00 + a00.transpose() * q0;
  double head_scale = 2.0 * (q0 * a00).norm();
  for (const Matrix& y : bbd.y) {
    head += y;
    head_scale += y.norm();
  }
  if (!(lambda_max_sym(head) < -margin * (1.0 + head_scale))) return false;

  for (Index j = 1; j < n; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    const Matrix& qj = bbd.q[sj];
    const Matrix& y = bbd.y[sj - 1];
    const Matrix& z = bbd.z[sj - 1];
    const Matrix ajj = p.block(j, j);
    const Matrix tail = qj * ajj + ajj.transpose() * qj + z;
    const double tail_scale = 2.0 * (qj * ajj).norm() + z.norm();
    if (lambda_max_sym(tail) > kNonStrictTol * (1.0 + tail_scale)) return false;

    const Matrix off = -q0 * p.block(0, j) - p.block(j, 0).transpose() * qj;
    const Index kj = part.size(j);
    Matrix lmi(k0 + kj, k0 + kj);
    lmi << y, off, off.transpose(), z;
    if (!(lambda_min_sym(lmi) > margin * (1.0 + lmi.norm()))) return false;
  }
  return true;
}

CounterexampleConditions counterexample_conditions(
    const Eigen::Ref<const Matrix>& b, double delta, const HinfOptions& hinf) {
  require_square(b, "B");
  require_finite(b, "B");
  if (!is_hurwitz(b)) {
    throw Error(ErrorCode::kNotHurwitz, "B must be Hurwitz");
  }
  if (!(delta > 0.0)) {
    throw Error(ErrorCode::kDimensionMismatch, "delta must be positive");
  }
  const Index k = b.rows();
  CounterexampleConditions out;
  out.sigma_min_b = min_singular_value(b);
  out.cond_a = out.sigma_min_b >= 1.0;

  const Matrix x0 = solve_lyapunov(b, identity(k));
  out.sigma_max_x0 = max_singular_value(x0);
  out.delta_threshold = 0.5 / out.sigma_max_x0;
  out.cond_b = out.sigma_max_x0 * delta >= 0.5;

  Matrix a(2 * k, 2 * k);
  a << b, delta * identity(k), delta * identity(k), b;
  out.comparison =
      block_comparison(PartitionedMatrix(a, BlockPartition({k, k})), hinf);
  out.cond_c = out.comparison.is_hurwitz();
  return out;
}

}  // namespace bsdd
