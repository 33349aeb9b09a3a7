#pragma once

// Construction and verification of block-diagonal Lyapunov certificates:
// decoupled Riccati tests, the comparison-matrix witness construction, the
// block LMI witness checks, and the counterexample conditions for the
// two-block family [[B, dI], [dI, B]].

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bsdd/comparison.h"
#include "bsdd/linalg.h"
#include "bsdd/partition.h"

namespace bsdd {

enum class Strategy { kAuto, kTestA, kTestB, kTestC, kProp4, kCustom };

std::string_view to_string(Strategy strategy);
/// Accepts "auto", "a", "b", "c", "prop4", "custom".
std::optional<Strategy> parse_strategy(std::string_view text);

enum class StabilityTest { kA, kB, kC };

/// Off-diagonal gains gamma_ij; zero on the diagonal and wherever A_ij = 0.
struct GammaMatrix {
  Matrix gamma;
  Strategy strategy = Strategy::kCustom;
};

/// Test A: sigma(A_ij). Test B: 1 for nonzero blocks. Test C:
/// sigma(A_ij) e_i / d_j, which needs the scalings of the block comparison
/// matrix (kMissingScalings otherwise).
GammaMatrix gamma_for_test(const PartitionedMatrix& p, StabilityTest test,
                           const std::optional<ScalingPair>& scalings = {});

/// eps_i = 1e-6 (1 + sum_{j != i} gamma_ji).
Vector default_epsilon(const GammaMatrix& g);

struct DecoupledSolution {
  std::vector<Matrix> blocks;
  std::vector<double> residuals;
};

/// Solves, independently for each block row i,
///   P_i A_ii + A_ii^T P_i + P_i (sum_j A_ij A_ij^T / gamma_ij) P_i
///       + (eps_i + sum_j gamma_ji) I = 0
/// for a stabilizing P_i > 0. Empty when any block has no such solution.
std::optional<DecoupledSolution> decoupled_riccati_test(
    const PartitionedMatrix& p, const GammaMatrix& g,
    const Eigen::Ref<const Vector>& eps, const RiccatiOptions& options = {});

/// Per-constraint margins of the block LMI system. Positive means the
/// constraint holds with room to spare.
struct WitnessSlacks {
  /// -lambda_max(P_i A_ii + A_ii^T P_i + V_ii + W_ii).
  std::vector<double> diagonal;
  /// lambda_min of [[W_ij, -P_i A_ij], [-A_ij^T P_i, V_ij]]; 0 on the
  /// diagonal and for uncoupled pairs.
  Matrix coupling;
  /// lambda_min(W_ii - sum_j W_ij) and lambda_min(V_ii - sum_j V_ji).
  std::vector<double> w_dominance;
  std::vector<double> v_dominance;
};

/// P_i, W_ij (k_i x k_i) and V_ij (k_j x k_j). Uncoupled pairs carry zero
/// matrices.
struct WitnessSet {
  std::vector<Matrix> p;
  std::vector<std::vector<Matrix>> w;
  std::vector<std::vector<Matrix>> v;
  WitnessSlacks slack;
  /// ||sum_j A_ij A_ij^T / gamma_ij||_2 e_i / (inverse_norm_i d_i); below 1
  /// for every block of a successful construction.
  std::vector<double> coupling_ratio;
};

/// Builds a witness set from a Hurwitz block comparison matrix and its
/// scalings. Throws kComparisonNotHurwitz when the scalings do not certify
/// block dominance, kRiccatiFailure on an unexpected Riccati breakdown.
WitnessSet prop4_construct(const PartitionedMatrix& p,
                           const ScalingPair& scalings,
                           const HinfOptions& hinf = {},
                           const RiccatiOptions& riccati = {});

struct WitnessCheck {
  bool ok = false;
  WitnessSlacks slack;
  std::string failure;
};

/// Strict constraints need slack > margin (1 + operand norm); non-strict
/// ones tolerate round-off of 1e-11 (1 + operand norm).
WitnessCheck verify_general_witnesses(const PartitionedMatrix& p,
                                      const WitnessSet& w,
                                      double margin = 1e-9);

/// The three structured terms whose sum is P A + A^T P for P = diag(P_i),
/// for any witness set of matching dimensions.
struct LyapunovDecomposition {
  Matrix diagonal_terms;
  Matrix dominance_terms;
  Matrix coupling_terms;

  Matrix sum() const { return diagonal_terms + dominance_terms + coupling_terms; }
};

LyapunovDecomposition lyapunov_decomposition(const PartitionedMatrix& p,
                                             const WitnessSet& w);

struct Certificate {
  std::vector<Matrix> blocks;
  BlockPartition partition;
  Strategy strategy = Strategy::kCustom;
  std::vector<double> epsilon;
  /// -lambda_max(P A + A^T P).
  double lyapunov_margin = 0.0;
  /// min_i lambda_min(P_i).
  double min_eigenvalue = 0.0;
  std::vector<double> riccati_residuals;
};

/// Independent check of P = diag(blocks): each block symmetric and positive
/// definite, and P A + A^T P < -margin I. Throws kDimensionMismatch.
std::optional<Certificate> assemble_and_verify(const PartitionedMatrix& p,
                                               const std::vector<Matrix>& blocks,
                                               double margin = 1e-9);

enum class Outcome { kPass, kFail, kError };
std::string_view to_string(Outcome outcome);

struct RouteResult {
  Strategy route = Strategy::kAuto;
  Outcome outcome = Outcome::kFail;
  std::string reason;
  double seconds = 0.0;
  std::optional<Certificate> certificate;
};

struct TestReport {
  std::vector<RouteResult> routes;

  bool certified() const { return certificate() != nullptr; }
  /// First passing route's certificate, if any.
  const Certificate* certificate() const;
  const RouteResult* find(Strategy route) const;
  bool any_error() const;
};

struct CertifyOptions {
  Strategy strategy = Strategy::kAuto;
  /// Keep going after the first success (report mode).
  bool run_all_routes = false;
  /// Uniform eps_i override; default_epsilon() otherwise.
  std::optional<double> epsilon;
  HinfOptions hinf;
  RiccatiOptions riccati;
  double margin = 1e-9;
};

/// Runs the requested route, or for kAuto the comparison/prop4 route and
/// then tests C, A and B. A failed route means "not certified", never
/// "unstable".
TestReport certify(const PartitionedMatrix& p,
                   const CertifyOptions& options = {});

struct ScalarWitnesses {
  Matrix w;
  Matrix v;
  Vector p;
};

/// Diagonal witnesses for the scalar conditions, built from the scalings of
/// scalar_comparison(a); empty when that matrix is not Hurwitz.
std::optional<ScalarWitnesses> scalar_witnesses(const Eigen::Ref<const Matrix>& a);

/// -a_ii >= (w_ii + v_ii) / (2 p_i), |a_ij| <= sqrt(w_ij v_ij) / p_i,
/// w_ii > sum_j w_ij, v_ii > sum_j v_ji, with p > 0 and w, v >= 0.
bool verify_scalar_conditions(const Eigen::Ref<const Matrix>& a,
                              const ScalarWitnesses& s, double margin = 1e-9);

/// Witnesses for a border-block-diagonal matrix (couplings only in block
/// row and column 0). y[j-1] is k_0 x k_0 and z[j-1] is k_j x k_j.
struct BbdWitnesses {
  std::vector<Matrix> q;
  std::vector<Matrix> y;
  std::vector<Matrix> z;
};

bool is_border_block_diagonal(const PartitionedMatrix& p);

/// Y_j = W_0j + V_j0, Z_j = W_j0 + V_0j, Q_i = P_i.
BbdWitnesses bbd_from_witnesses(const PartitionedMatrix& p, const WitnessSet& w);

/// Checks Q_0 A_00 + A_00^T Q_0 + sum_j Y_j < 0,
/// Q_j A_jj + A_jj^T Q_j + Z_j <= 0 and
/// [[Y_j, -Q_0 A_0j - A_j0^T Q_j], [., Z_j]] > 0.
/// Throws kNotBorderBlockDiagonal or kDimensionMismatch.
bool verify_bbd_witnesses(const PartitionedMatrix& p, const BbdWitnesses& bbd,
                          double margin = 1e-9);

struct CounterexampleConditions {
  bool cond_a = false;  // sigma_min(B) >= 1
  bool cond_b = false;  // sigma_max(X0) delta >= 1/2
  bool cond_c = false;  // M^a([[B, dI], [dI, B]]) Hurwitz, a = {k, k}
  double sigma_min_b = 0.0;
  double sigma_max_x0 = 0.0;
  /// delta at which cond_b switches on: 1 / (2 sigma_max(X0)).
  double delta_threshold = 0.0;
  ComparisonMatrix comparison;

  bool all() const { return cond_a && cond_b && cond_c; }
};

/// X0 solves X0 B^T + B X0 + I = 0. When all three hold, no block-diagonal
/// P > 0 makes M^a(P A + A^T P) Hurwitz. Throws kNotHurwitz.
CounterexampleConditions counterexample_conditions(
    const Eigen::Ref<const Matrix>& b, double delta,
    const HinfOptions& hinf = {});

}  // namespace bsdd
