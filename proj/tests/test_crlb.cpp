#include "support.hpp"

namespace wavelock {
namespace {

using testing::random_instance;

struct CrlbFixture {
  testing::SmallInstance inst;
  Problem problem;
  CMatrix S;
  Eigen::VectorXd var;

  explicit CrlbFixture(unsigned seed, int M = 7, int N = 1, int L = 1)
      : inst(random_instance(seed, M, N, L, 1, 6)),
        problem(inst.scenario, inst.data, inst.scenario.model),
        S(recover_spectrum(problem, inst.theta)),
        var(Eigen::VectorXd::LinSpaced(M, 0.5, 2.0)) {}
};

// Independent assembly: whitened G = Ktilde S, derivative columns by finite
// differences, and the S columns written out directly.
Eigen::MatrixXd oracle_fisher(const CrlbFixture& fx, double scale) {
  const auto& sc = fx.inst.scenario;
  const ParamLayout& l = fx.problem.layout();
  const auto& bins = fx.problem.bins();
  const int M = fx.problem.sensors(), N = l.sources, D = l.size();
  const auto B = static_cast<Eigen::Index>(bins.size());
  const Eigen::VectorXd w = fx.var.cwiseSqrt().cwiseInverse();
  auto G = [&](const Eigen::VectorXd& t) {
    CMatrix g(M, B);
    for (Eigen::Index k = 0; k < B; ++k)
      g.col(k) = w.asDiagonal() * (build_Ktilde(sc, l, t, bins[static_cast<std::size_t>(k)]) * fx.S.col(k));
    return g;
  };
  const CMatrix dG = finite_difference_jacobian(G, fx.inst.theta);
  CMatrix A = CMatrix::Zero(M * B, 2 * N * B + D);
  for (Eigen::Index k = 0; k < B; ++k) {
    const CMatrix K = w.asDiagonal() * build_Ktilde(sc, l, fx.inst.theta, bins[static_cast<std::size_t>(k)]);
    for (int n = 0; n < N; ++n) {
      A.block(k * M, 2 * (k * N + n), M, 1) = K.col(n);
      A.block(k * M, 2 * (k * N + n) + 1, M, 1) = cplx(0.0, 1.0) * K.col(n);
    }
  }
  A.rightCols(D) = dG;
  return scale * (A.adjoint() * A).real();
}

TEST(Crlb, FullMatrixMatchesFiniteDifferenceOracle) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const CrlbFixture fx(seed, 6, 2, 1);
    const FisherMatrix fm = fisher_full(fx.problem, fx.inst.theta, fx.S, fx.var);
    const Eigen::MatrixXd oracle = oracle_fisher(fx, 1.0);
    EXPECT_LT((fm.F - oracle).norm(), 1e-6 * oracle.norm()) << "seed " << seed;
    EXPECT_EQ(fm.names.size(), static_cast<std::size_t>(fm.F.rows()));
  }
}

TEST(Crlb, ReducedEqualsSchurOfFull) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const CrlbFixture fx(seed + 10);
    const FisherMatrix full = fisher_full(fx.problem, fx.inst.theta, fx.S, fx.var);
    const FisherMatrix red = fisher(fx.problem, fx.inst.theta, fx.S, fx.var);
    const Eigen::Index o = full.theta_offset, D = red.F.rows();
    const Eigen::MatrixXd Fss = full.F.topLeftCorner(o, o);
    const Eigen::MatrixXd Fst = full.F.topRightCorner(o, D);
    const Eigen::MatrixXd schur = full.F.bottomRightCorner(D, D) - Fst.transpose() * Fss.ldlt().solve(Fst);
    EXPECT_LT((schur - red.F).norm(), 1e-8 * red.F.norm());

    const CrlbResult a = crlb_positions(full), b = crlb_positions(red);
    ASSERT_FALSE(b.singular);
    EXPECT_NEAR(a.positions[0].var_x, b.positions[0].var_x, 1e-6 * b.positions[0].var_x);
    EXPECT_NEAR(a.positions[0].var_y, b.positions[0].var_y, 1e-6 * b.positions[0].var_y);
  }
}

TEST(Crlb, SymmetricPositiveSemidefinite) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const CrlbFixture fx(seed + 20, 8, 2, 2);
    const FisherMatrix fm = fisher(fx.problem, fx.inst.theta, fx.S, fx.var);
    EXPECT_EQ(fm.F, fm.F.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fm.F);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * eig.eigenvalues().maxCoeff());
  }
}

TEST(Crlb, NoiseScaleLaw) {
  const CrlbFixture fx(31);
  const CrlbResult base = crlb_positions(fisher(fx.problem, fx.inst.theta, fx.S, fx.var));
  for (double k : {0.1, 4.0, 250.0}) {
    const Eigen::VectorXd v = k * fx.var;
    const CrlbResult r = crlb_positions(fisher(fx.problem, fx.inst.theta, fx.S, v));
    EXPECT_NEAR(r.positions[0].var_x, k * base.positions[0].var_x, 1e-10 * k * base.positions[0].var_x);
    EXPECT_NEAR(r.positions[0].var_y, k * base.positions[0].var_y, 1e-10 * k * base.positions[0].var_y);
  }
  const CrlbResult circ =
      crlb_positions(fisher(fx.problem, fx.inst.theta, fx.S, fx.var, FisherConvention::circular));
  EXPECT_NEAR(circ.positions[0].var_x, 0.5 * base.positions[0].var_x, 1e-12 * base.positions[0].var_x);
}

TEST(Crlb, UniformVarianceOverloadAgrees) {
  const CrlbFixture fx(32);
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(fx.problem.sensors(), 0.7);
  EXPECT_EQ(fisher(fx.problem, fx.inst.theta, fx.S, v).F, fisher(fx.problem, fx.inst.theta, fx.S, 0.7).F);
  EXPECT_THROW(fisher(fx.problem, fx.inst.theta, fx.S, Eigen::VectorXd::Ones(3)), ConfigError);
  EXPECT_THROW(fisher(fx.problem, fx.inst.theta, fx.S, 0.0), ConfigError);
  EXPECT_THROW(fisher(fx.problem, fx.inst.theta, CMatrix::Ones(1, 2), fx.var), ConfigError);
}

TEST(Crlb, DiagonalInformationInverts) {
  FisherMatrix fm;
  fm.layout.sources = 1;
  fm.layout.order = 0;
  fm.F = Eigen::MatrixXd::Zero(2, 2);
  fm.F.diagonal() << 4.0, 0.25;
  const CrlbResult r = crlb_positions(fm);
  EXPECT_FALSE(r.singular);
  EXPECT_DOUBLE_EQ(r.positions[0].var_x, 0.25);
  EXPECT_DOUBLE_EQ(r.positions[0].var_y, 4.0);

  fm.F(1, 1) = 0.0;
  const CrlbResult s = crlb_positions(fm);
  EXPECT_TRUE(s.singular);
  ASSERT_EQ(s.null_directions.size(), 1u);
  EXPECT_NEAR(std::abs(s.null_directions[0](1)), 1.0, 1e-12);
}

TEST(Crlb, SensorPermutationInvariance) {
  const CrlbFixture fx(40, 7, 2, 1);
  Scenario sc = fx.inst.scenario;
  SpectrumData d = fx.inst.data;
  std::vector<int> perm = {6, 2, 0, 4, 1, 5, 3};
  Eigen::VectorXd var(7);
  for (int m = 0; m < 7; ++m) {
    sc.array.positions[static_cast<std::size_t>(m)] = fx.inst.scenario.array.positions[static_cast<std::size_t>(perm[m])];
    sc.array.cluster_ids[static_cast<std::size_t>(m)] = fx.inst.scenario.array.cluster_ids[static_cast<std::size_t>(perm[m])];
    d.X.row(m) = fx.inst.data.X.row(perm[m]);
    var(m) = fx.var(perm[m]);
  }
  const Problem p(sc, d, sc.model);
  const FisherMatrix a = fisher(fx.problem, fx.inst.theta, fx.S, fx.var);
  const FisherMatrix b = fisher(p, fx.inst.theta, fx.S, var);
  EXPECT_LT((a.F - b.F).norm(), 1e-10 * a.F.norm());
}

TEST(Crlb, ExtraSensorNeverHurts) {
  const CrlbFixture fx(41, 6, 1, 1);
  Scenario sc = fx.inst.scenario;
  sc.array.positions.push_back({fx.inst.theta(0) + 1.7, fx.inst.theta(1) - 0.9});
  sc.array.cluster_ids.push_back(sc.array.cluster_ids.front());
  SpectrumData d = fx.inst.data;
  d.X.conservativeResize(7, Eigen::NoChange);
  d.X.row(6) = d.X.row(0);
  const Problem p(sc, d, sc.model);
  Eigen::VectorXd var(7);
  var << fx.var, 1.0;
  const CrlbResult a = crlb_positions(fisher(fx.problem, fx.inst.theta, fx.S, fx.var));
  const CrlbResult b = crlb_positions(fisher(p, fx.inst.theta, fx.S, var));
  EXPECT_LE(b.positions[0].var_x, a.positions[0].var_x * (1.0 + 1e-10));
  EXPECT_LE(b.positions[0].var_y, a.positions[0].var_y * (1.0 + 1e-10));
}

TEST(Crlb, BoundFallsTenfoldPerTenDecibels) {
  Scenario sc = example1_scenario(Example1Variant::single_at_12_10);
  sc.signal.snr_db = 10.0;
  const CrlbReport lo = crlb_report(sc, FisherConvention::circular);
  sc.signal.snr_db = 20.0;
  const CrlbReport hi = crlb_report(sc, FisherConvention::circular);
  ASSERT_FALSE(hi.singular);
  EXPECT_NEAR(std::log10(lo.bounds[0].var_x / hi.bounds[0].var_x), 1.0, 1e-6);
  EXPECT_NEAR(std::log10(lo.bounds[0].var_y / hi.bounds[0].var_y), 1.0, 1e-6);
  EXPECT_LT(std::hypot(hi.theta(0) - 12.0, hi.theta(1) - 10.0), 0.05);
  sc.signal.snr_db.reset();
  EXPECT_THROW(crlb_report(sc), ConfigError);
}

}  // namespace
}  // namespace wavelock
