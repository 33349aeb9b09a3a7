#include "bsdd/certificate.h"

#include <gtest/gtest.h>

#include "bsdd/error.h"
#include "bsdd/problem_io.h"
#include "test_util.h"

namespace bsdd {
namespace {

using testing::Rng;

PartitionedMatrix load(const std::string& name) {
  return load_problem(testing::fixture(name)).partitioned();
}

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix twin_coupled(double delta) {
  const Matrix b = m2(-8, 8, 5, -8);
  Matrix a(4, 4);
  a << b, delta * Matrix::Identity(2, 2), delta * Matrix::Identity(2, 2), b;
  return a;
}

/// Test-side Lyapunov check of a block-diagonal P.
void expect_sound(const PartitionedMatrix& p, const std::vector<Matrix>& blocks) {
  const Matrix big = testing::block_diagonal_of(p.partition().sizes(), blocks);
  Eigen::SelfAdjointEigenSolver<Matrix> pe(big);
  EXPECT_GT(pe.eigenvalues().minCoeff(), 0.0);
  const Matrix l = big * p.matrix() + p.matrix().transpose() * big;
  Eigen::SelfAdjointEigenSolver<Matrix> le(0.5 * (l + l.transpose()));
  EXPECT_LT(le.eigenvalues().maxCoeff(), 0.0);
}

TEST(GammaForTest, Rules) {
  const PartitionedMatrix a = load("coupled_a.json");
  const GammaMatrix ga = gamma_for_test(a, StabilityTest::kA);
  EXPECT_NEAR(ga.gamma(0, 1), Eigen::JacobiSVD<Matrix>(m2(2, 8, 2, 5)).singularValues()(0),
              1e-12);
  EXPECT_EQ(ga.gamma(0, 0), 0.0);
  const GammaMatrix gb = gamma_for_test(a, StabilityTest::kB);
  EXPECT_EQ(gb.gamma(0, 1), 1.0);
  EXPECT_EQ(gb.gamma(1, 0), 1.0);
  EXPECT_THROW(gamma_for_test(a, StabilityTest::kC), Error);

  const PartitionedMatrix tri = load("triangular6.json");
  for (StabilityTest t : {StabilityTest::kA, StabilityTest::kB}) {
    const GammaMatrix g = gamma_for_test(tri, t);
    EXPECT_EQ(g.gamma(0, 1), 0.0);
    EXPECT_EQ(g.gamma(1, 2), 0.0);
  }
  const auto s = metzler_scalings(block_comparison(tri).matrix);
  ASSERT_TRUE(s);
  const GammaMatrix gc = gamma_for_test(tri, StabilityTest::kC, s);
  EXPECT_EQ(gc.gamma(0, 2), 0.0);
  EXPECT_NEAR(gc.gamma(2, 0), std::sqrt(50.0) * s->e(2) / s->d(0), 1e-12);
}

TEST(DecoupledRiccati, SingleTestPatterns) {
  // Matrix B passes only Test B, matrix C only Test C.
  for (const auto& [name, only] :
       {std::pair{"coupled_b.json", StabilityTest::kB},
        std::pair{"coupled_c.json", StabilityTest::kC}}) {
    const PartitionedMatrix p = load(name);
    const ComparisonMatrix c = block_comparison(p);
    const auto s = c.is_hurwitz() ? metzler_scalings(c.matrix) : std::nullopt;
    for (StabilityTest t : {StabilityTest::kA, StabilityTest::kB, StabilityTest::kC}) {
      if (t == StabilityTest::kC && !s) {
        EXPECT_NE(only, t);
        continue;
      }
      const GammaMatrix g = gamma_for_test(p, t, s);
      const auto sol = decoupled_riccati_test(p, g, default_epsilon(g));
      EXPECT_EQ(static_cast<bool>(sol), t == only) << name;
      if (sol) expect_sound(p, sol->blocks);
    }
  }
}

TEST(DecoupledRiccati, NonHurwitzMatrixFailsEveryTest) {
  // The first matrix of the three-matrix fixture set has an eigenvalue with
  // positive real part, so no test can pass on it.
  const PartitionedMatrix p = load("coupled_a.json");
  EXPECT_FALSE(testing::oracle_hurwitz(p.matrix()));
  const TestReport r = certify(p, {.run_all_routes = true});
  EXPECT_FALSE(r.certified());
  for (const RouteResult& route : r.routes) EXPECT_NE(route.outcome, Outcome::kPass);
}

TEST(DecoupledRiccati, SingleBlockIsLyapunov) {
  Matrix a(3, 3);
  a << -2, 1, 0, 0, -3, 1, 0.5, 0, -1;
  const PartitionedMatrix p = make_partitioned(a, {3});
  const GammaMatrix g = gamma_for_test(p, StabilityTest::kA);
  const Vector eps = Vector::Constant(1, 0.25);
  const auto sol = decoupled_riccati_test(p, g, eps);
  ASSERT_TRUE(sol);
  const Matrix oracle = testing::lyapunov_oracle(a.transpose(), 0.25 * Matrix::Identity(3, 3));
  EXPECT_TRUE(sol->blocks[0].isApprox(oracle, 1e-10));
}

TEST(DecoupledRiccati, SmallerEpsilonStillPasses) {
  for (const char* name : {"coupled_b.json", "coupled_c.json", "triangular6.json",
                           "twin_coupled.json"}) {
    const PartitionedMatrix p = load(name);
    const TestReport r = certify(p);
    ASSERT_TRUE(r.certified()) << name;
    const ComparisonMatrix c = block_comparison(p);
    const auto s = c.is_hurwitz() ? metzler_scalings(c.matrix) : std::nullopt;
    for (StabilityTest t : {StabilityTest::kA, StabilityTest::kB, StabilityTest::kC}) {
      if (t == StabilityTest::kC && !s) continue;
      const GammaMatrix g = gamma_for_test(p, t, s);
      Vector eps = Vector::Constant(p.num_blocks(), 0.1);
      if (!decoupled_riccati_test(p, g, eps)) continue;
      for (int k = 0; k < 6; ++k) {
        eps /= 2;
        EXPECT_TRUE(decoupled_riccati_test(p, g, eps)) << name;
      }
    }
  }
}

TEST(Prop4, FixturePipelines) {
  for (const char* name : {"triangular6.json", "twin_coupled.json", "single_block.json",
                           "coupled_c.json"}) {
    const PartitionedMatrix p = load(name);
    const ComparisonMatrix c = block_comparison(p);
    ASSERT_TRUE(c.is_hurwitz()) << name;
    const auto s = metzler_scalings(c.matrix);
    ASSERT_TRUE(s);
    const WitnessSet w = prop4_construct(p, *s);
    const WitnessCheck check = verify_general_witnesses(p, w);
    EXPECT_TRUE(check.ok) << name << ": " << check.failure;
    const auto cert = assemble_and_verify(p, w.p);
    ASSERT_TRUE(cert) << name;
    EXPECT_GT(cert->lyapunov_margin, 0.0);
    expect_sound(p, cert->blocks);
  }
}

TEST(Prop4, RejectsNonHurwitzComparison) {
  const PartitionedMatrix p = load("coupled_b.json");
  ScalingPair s{Vector::Ones(2), Vector::Ones(2)};
  try {
    prop4_construct(p, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kComparisonNotHurwitz);
  }
}

TEST(Prop4, SingleBlockHasEmptyCoupling) {
  const PartitionedMatrix p = load("single_block.json");
  const auto s = metzler_scalings(block_comparison(p).matrix);
  ASSERT_TRUE(s);
  const WitnessSet w = prop4_construct(p, *s);
  ASSERT_EQ(w.p.size(), 1u);
  EXPECT_EQ(w.coupling_ratio[0], 0.0);
}

TEST(VerifyWitnesses, PerturbedDominanceFails) {
  const PartitionedMatrix p = load("triangular6.json");
  const auto s = metzler_scalings(block_comparison(p).matrix);
  WitnessSet w = prop4_construct(p, *s);
  const WitnessCheck ok = verify_general_witnesses(p, w);
  ASSERT_TRUE(ok.ok);
  const double slack = ok.slack.w_dominance[1];
  ASSERT_GT(slack, 0.0);
  w.w[1][1] -= 2.0 * slack * Matrix::Identity(3, 3);
  EXPECT_FALSE(verify_general_witnesses(p, w).ok);
}

TEST(VerifyWitnesses, ZeroCouplings) {
  const std::vector<Index> sizes{2, 3};
  Rng rng(301);
  std::vector<Matrix> diag{testing::random_hurwitz(2, rng), testing::random_hurwitz(3, rng)};
  const PartitionedMatrix p(testing::block_diagonal_of(sizes, diag), BlockPartition(sizes));
  const double eps = 1e-3;
  WitnessSet w;
  w.w.assign(2, std::vector<Matrix>(2));
  w.v.assign(2, std::vector<Matrix>(2));
  for (std::size_t i = 0; i < 2; ++i) {
    const Index ki = sizes[i];
    w.p.push_back(testing::lyapunov_oracle(diag[i].transpose(), Matrix::Identity(ki, ki)));
    for (std::size_t j = 0; j < 2; ++j) {
      w.w[i][j] = Matrix::Zero(ki, ki);
      w.v[i][j] = Matrix::Zero(sizes[j], sizes[j]);
    }
    w.w[i][i] = eps * Matrix::Identity(ki, ki);
    w.v[i][i] = eps * Matrix::Identity(ki, ki);
  }
  EXPECT_TRUE(verify_general_witnesses(p, w).ok);
  EXPECT_THROW(verify_general_witnesses(p, WitnessSet{}), Error);
}

TEST(LyapunovDecomposition, IdentityOnRandomWitnesses) {
  Rng rng(311);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<Index> sizes = testing::random_sizes(rng);
    const BlockPartition part(sizes);
    const PartitionedMatrix p(testing::gaussian(part.total(), part.total(), rng), part);
    const std::size_t n = sizes.size();
    auto sym = [&](Index k) {
      const Matrix g = testing::gaussian(k, k, rng);
      return Matrix(g + g.transpose());
    };
    WitnessSet w;
    w.w.assign(n, std::vector<Matrix>(n));
    w.v.assign(n, std::vector<Matrix>(n));
    for (std::size_t i = 0; i < n; ++i) {
      w.p.push_back(sym(sizes[i]));
      for (std::size_t j = 0; j < n; ++j) {
        w.w[i][j] = sym(sizes[i]);
        w.v[i][j] = sym(sizes[j]);
      }
    }
    const Matrix big = testing::block_diagonal_of(sizes, w.p);
    const Matrix lhs = big * p.matrix() + p.matrix().transpose() * big;
    const LyapunovDecomposition d = lyapunov_decomposition(p, w);
    EXPECT_LE((lhs - d.sum()).norm(), 1e-12 * (1 + lhs.norm()));
  }
}

TEST(AssembleAndVerify, TwinCoupledBlocks) {
  const PartitionedMatrix p = make_partitioned(twin_coupled(1.63), {2, 2});
  const Matrix q1 = m2(7, 7, 7, 11);
  const auto cert = assemble_and_verify(p, {q1, q1});
  ASSERT_TRUE(cert);
  EXPECT_GT(cert->lyapunov_margin, 0.0);

  Eigen::SelfAdjointEigenSolver<Matrix> es(p.matrix() + p.matrix().transpose());
  const bool identity_works = es.eigenvalues().maxCoeff() < -1e-9;
  const Matrix id = Matrix::Identity(2, 2);
  EXPECT_EQ(static_cast<bool>(assemble_and_verify(p, {id, id})), identity_works);
}

TEST(AssembleAndVerify, RejectsBadBlocks) {
  const PartitionedMatrix unstable = load("coupled_a.json");
  const Matrix id = Matrix::Identity(2, 2);
  EXPECT_FALSE(assemble_and_verify(unstable, {id, id}));
  EXPECT_FALSE(assemble_and_verify(unstable, {3 * id, id}));
  const PartitionedMatrix p = load("coupled_c.json");
  EXPECT_FALSE(assemble_and_verify(p, {-id, id}));
  EXPECT_FALSE(assemble_and_verify(p, {m2(1, 0.5, 0, 1), id}));
  EXPECT_THROW(assemble_and_verify(p, {id}), Error);
}

TEST(Certify, AutoOrderAndReasons) {
  const TestReport r = certify(load("triangular6.json"));
  ASSERT_TRUE(r.certified());
  EXPECT_EQ(r.certificate()->strategy, Strategy::kProp4);
  EXPECT_EQ(r.routes.size(), 1u);

  const TestReport all = certify(load("coupled_b.json"), {.run_all_routes = true});
  ASSERT_EQ(all.routes.size(), 4u);
  EXPECT_EQ(all.routes[0].route, Strategy::kProp4);
  EXPECT_EQ(all.routes[1].route, Strategy::kTestC);
  EXPECT_NE(all.routes[0].reason.find("not Hurwitz"), std::string::npos);
  EXPECT_NE(all.find(Strategy::kTestA)->reason.find("block 1"), std::string::npos);
  EXPECT_EQ(all.certificate()->strategy, Strategy::kTestB);

  const TestReport only_c = certify(load("coupled_b.json"), {.strategy = Strategy::kTestC});
  EXPECT_FALSE(only_c.certified());
  EXPECT_EQ(only_c.routes.size(), 1u);
}

TEST(Certify, SoundnessOnRandomInstances) {
  Rng rng(321);
  int certified = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<Index> sizes = testing::random_sizes(rng, 4, 3);
    const PartitionedMatrix p =
        testing::random_coupled(sizes, testing::uniform(0.3, 1.6, rng), rng);
    const TestReport r = certify(p, {.run_all_routes = true});
    for (const RouteResult& route : r.routes) {
      if (route.outcome != Outcome::kPass) continue;
      ASSERT_TRUE(route.certificate);
      ++certified;
      expect_sound(p, route.certificate->blocks);
    }
  }
  EXPECT_GT(certified, 500);
}

TEST(Prop4Properties, PipelineAndInequalityChain) {
  Rng rng(331);
  for (int trial = 0; trial < 200; ++trial) {
    const PartitionedMatrix p = testing::random_coupled(
        testing::random_sizes(rng), testing::uniform(0.05, 0.999, rng), rng);
    const ComparisonMatrix c = block_comparison(p);
    ASSERT_TRUE(c.is_hurwitz());
    const auto s = metzler_scalings(c.matrix);
    ASSERT_TRUE(s);
    const WitnessSet w = prop4_construct(p, *s);
    EXPECT_TRUE(verify_general_witnesses(p, w).ok);
    EXPECT_TRUE(assemble_and_verify(p, w.p));

    // ||[A_ij gamma_ij^-1/2]_j||^2 < inv_i d_i / e_i, from the raw blocks.
    for (Index i = 0; i < p.num_blocks(); ++i) {
      const Index ki = p.partition().size(i);
      Matrix sum = Matrix::Zero(ki, ki);
      for (Index j = 0; j < p.num_blocks(); ++j) {
        if (j == i) continue;
        const Matrix aij = p.block(i, j);
        const double sigma = aij.size() ? Eigen::JacobiSVD<Matrix>(aij).singularValues()(0) : 0.0;
        if (sigma == 0.0) continue;
        const double gamma = sigma * s->e(i) / s->d(j);
        sum += aij * aij.transpose() / gamma;
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(sum);
      const double inv = -c.matrix(i, i);
      EXPECT_LT(es.eigenvalues().maxCoeff(), inv * s->d(i) / s->e(i));
      EXPECT_LT(w.coupling_ratio[static_cast<std::size_t>(i)], 1.0);
    }
  }
}

TEST(ScalarWitnesses, Examples) {
  const auto s = scalar_witnesses(m2(-3, 1, 1, -3));
  ASSERT_TRUE(s);
  EXPECT_TRUE(verify_scalar_conditions(m2(-3, 1, 1, -3), *s));
  ScalarWitnesses doubled = *s;
  doubled.p *= 2.0;
  EXPECT_FALSE(verify_scalar_conditions(m2(-3, 1, 1, -3), doubled));
  EXPECT_FALSE(scalar_witnesses(m2(-1, 2, 2, -1)));
  const auto one = scalar_witnesses(Matrix::Constant(1, 1, -5.0));
  ASSERT_TRUE(one);
  EXPECT_GT(one->p(0), 0.0);

  ScalarWitnesses diag{Matrix::Zero(2, 2), Matrix::Zero(2, 2), Vector::Ones(2)};
  diag.w.diagonal().setConstant(0.01);
  diag.v.diagonal().setConstant(0.01);
  EXPECT_TRUE(verify_scalar_conditions(m2(-1, 0, 0, -2), diag));
}

TEST(ScalarWitnesses, EquivalentToComparison) {
  Rng rng(341);
  int yes = 0, no = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = testing::uniform_int(2, 8, rng);
    Matrix a = testing::gaussian(n, n, rng) * testing::uniform(0.05, 0.6, rng);
    for (Index i = 0; i < n; ++i) a(i, i) = -testing::uniform(0.5, 2.0, rng);
    const bool hurwitz =
        testing::abscissa(scalar_comparison(a).matrix) < -kComparisonHurwitzMargin;
    const auto s = scalar_witnesses(a);
    ASSERT_EQ(static_cast<bool>(s), hurwitz);
    if (s) {
      ++yes;
      EXPECT_TRUE(verify_scalar_conditions(a, *s));
    } else {
      ++no;
    }
  }
  EXPECT_GT(yes, 30);
  EXPECT_GT(no, 30);
}

PartitionedMatrix random_bbd(Rng& rng, double fraction) {
  const std::vector<Index> sizes = testing::random_sizes(rng, 5, 3);
  return testing::random_coupled(sizes, fraction, rng,
                                 [](Index i, Index j) { return i == 0 || j == 0; });
}

TEST(Bbd, FromProp4Witnesses) {
  Rng rng(351);
  for (int trial = 0; trial < 50; ++trial) {
    const PartitionedMatrix p = random_bbd(rng, testing::uniform(0.1, 0.99, rng));
    ASSERT_TRUE(is_border_block_diagonal(p));
    const auto s = metzler_scalings(block_comparison(p).matrix);
    ASSERT_TRUE(s);
    const WitnessSet w = prop4_construct(p, *s);
    BbdWitnesses bbd = bbd_from_witnesses(p, w);
    EXPECT_TRUE(verify_bbd_witnesses(p, bbd));
    bbd.z[0] = -bbd.z[0];
    EXPECT_FALSE(verify_bbd_witnesses(p, bbd));
  }
}

TEST(Bbd, ZeroCoupling) {
  Rng rng(361);
  const std::vector<Index> sizes{2, 1, 3};
  std::vector<Matrix> diag;
  for (Index k : sizes) diag.push_back(testing::random_hurwitz(k, rng));
  const PartitionedMatrix p(testing::block_diagonal_of(sizes, diag), BlockPartition(sizes));
  BbdWitnesses bbd;
  for (std::size_t i = 0; i < 3; ++i) {
    bbd.q.push_back(testing::lyapunov_oracle(diag[i].transpose(),
                                             Matrix::Identity(sizes[i], sizes[i])));
  }
  const double eps = 1e-3;
  for (std::size_t j = 1; j < 3; ++j) {
    bbd.y.push_back(eps * Matrix::Identity(2, 2));
    bbd.z.push_back(eps * Matrix::Identity(sizes[j], sizes[j]));
  }
  EXPECT_TRUE(verify_bbd_witnesses(p, bbd));
}

TEST(Bbd, RejectsOtherStructure) {
  const PartitionedMatrix p = make_partitioned(Matrix::Ones(3, 3), {1, 1, 1});
  EXPECT_FALSE(is_border_block_diagonal(p));
  EXPECT_THROW(verify_bbd_witnesses(p, BbdWitnesses{}), Error);
}

TEST(Counterexample, TwinCoupledThreshold) {
  const Matrix b = m2(-8, 8, 5, -8);
  const CounterexampleConditions c = counterexample_conditions(b, 1.63);
  EXPECT_TRUE(c.cond_a);
  EXPECT_TRUE(c.cond_b);
  EXPECT_TRUE(c.cond_c);
  EXPECT_TRUE(c.all());

  const Matrix x0 = testing::lyapunov_oracle(b, Matrix::Identity(2, 2));
  const double smax = Eigen::JacobiSVD<Matrix>(x0).singularValues()(0);
  EXPECT_NEAR(c.sigma_max_x0, smax, 1e-10 * smax);
  EXPECT_NEAR(c.delta_threshold, 0.5 / smax, 1e-10);
  EXPECT_FALSE(counterexample_conditions(b, 0.99 * c.delta_threshold).cond_b);
  EXPECT_TRUE(counterexample_conditions(b, 1.01 * c.delta_threshold).cond_b);
  EXPECT_THROW(counterexample_conditions(m2(1, 0, 0, -1), 1.0), Error);
}

TEST(Counterexample, ScalarBlocksNeverSatisfyAll) {
  for (double b0 = 1.0; b0 <= 5.0; b0 += 0.25) {
    for (double delta = 0.1; delta <= 3 * b0; delta += 0.1) {
      const CounterexampleConditions c =
          counterexample_conditions(Matrix::Constant(1, 1, -b0), delta);
      if (c.cond_a && c.cond_b) {
        EXPECT_FALSE(c.cond_c) << "b0=" << b0 << " delta=" << delta;
      }
    }
  }
}

}  // namespace
}  // namespace bsdd
