#include "support.hpp"

namespace wavelock {
namespace {

using testing::max_column_rel_error;
using testing::random_instance;

TEST(Layout, SizeAndOrdering) {
  const auto inst = random_instance(1);
  const ParamLayout l = ParamLayout::from(inst.scenario, inst.scenario.model);
  EXPECT_EQ(l.size(), 2 * 2 + 2 + 2 * (2 * 2 * 1));
  EXPECT_EQ(l.x(1), 1);
  EXPECT_EQ(l.y(0), 2);
  EXPECT_EQ(l.beta(0), 4);
  EXPECT_EQ(l.gamma(0, 0, 0), 6);
  EXPECT_EQ(l.gamma(1, 1, 0), 9);
  EXPECT_EQ(l.delay(0, 0, 0), 10);
  EXPECT_EQ(l.name(9), "gamma_c1_s1_p0");
  EXPECT_EQ(l.name(13), "delay_c1_s1_p0");
  for (int i = 0; i < l.size(); ++i) {
    const auto s = l.slot(i);
    switch (s.kind) {
      case ParamKind::x: EXPECT_EQ(l.x(s.a), i); break;
      case ParamKind::y: EXPECT_EQ(l.y(s.a), i); break;
      case ParamKind::beta: EXPECT_EQ(l.beta(s.a), i); break;
      case ParamKind::gamma: EXPECT_EQ(l.gamma(s.a, s.b, s.c), i); break;
      case ParamKind::delay: EXPECT_EQ(l.delay(s.a, s.b, s.c), i); break;
    }
  }
  EXPECT_THROW(l.slot(l.size()), std::out_of_range);
}

TEST(Layout, DecodeEncodeIdentity) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto inst = random_instance(seed);
    const ParamLayout l = ParamLayout::from(inst.scenario, inst.scenario.model);
    EXPECT_EQ(encode(l, decode(l, inst.theta)), inst.theta);
  }
  const auto inst = random_instance(3);
  const ParamLayout l = ParamLayout::from(inst.scenario, inst.scenario.model);
  EXPECT_THROW(decode(l, Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST(Layout, DelayOnlyDropsExtraUnknowns) {
  const auto inst = random_instance(2);
  ModelConfig m = inst.scenario.model;
  m.delay_only = true;
  const ParamLayout l = ParamLayout::from(inst.scenario, m);
  EXPECT_EQ(l.size(), 4);
}

TEST(Steering, RAtDcIsRealPositive) {
  const auto inst = random_instance(4);
  const ParamLayout l = ParamLayout::from(inst.scenario, inst.scenario.model);
  const SteeringModel model(inst.scenario, l, inst.theta);
  const auto R = build_R(inst.scenario, l, inst.theta, 0);
  ASSERT_EQ(R.size(), 3u);
  for (int ell = 1; ell <= 3; ++ell)
    for (int m = 0; m < 5; ++m)
      for (int n = 0; n < 2; ++n) {
        EXPECT_EQ(R[ell - 1](m, n).imag(), 0.0);
        EXPECT_NEAR(R[ell - 1](m, n).real(), std::pow(model.rho()(m, n), -ell), 1e-15);
      }
}

TEST(Steering, QuarterTurnPhase) {
  Scenario sc;
  sc.array.positions = {{0.0, 0.0}};
  sc.array.cluster_ids = {0};
  const double rho = 345.0 / 4000.0;
  sc.sources = {{{rho, 0.0}, 1}};
  sc.model.attenuation_order = 1;
  const ParamLayout l = ParamLayout::from(sc, sc.model);
  Eigen::VectorXd theta(3);
  theta << rho, 0.0, 0.0;
  const int f = sc.signal.n_f / 4;
  const auto R = build_R(sc, l, theta, f);
  for (int ell = 1; ell <= 2; ++ell) {
    const cplx expect = std::pow(rho, -ell) * cplx(0.0, -1.0);
    EXPECT_LT(std::abs(R[ell - 1](0, 0) - expect), 1e-12 * std::abs(expect));
  }
}

TEST(Steering, RModulus) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const auto inst = random_instance(seed);
    const ParamLayout l = ParamLayout::from(inst.scenario, inst.scenario.model);
    const SteeringModel model(inst.scenario, l, inst.theta);
    for (int f = 0; f < 8; ++f)
      for (int ell = 1; ell <= 3; ++ell) {
        const CMatrix R = model.R(ell, f);
        for (int m = 0; m < 5; ++m)
          for (int n = 0; n < 2; ++n) {
            const double want = std::pow(model.rho()(m, n), -ell);
            EXPECT_NEAR(std::abs(R(m, n)), want, 1e-12 * want);
          }
      }
  }
}

TEST(Steering, KFactorsAsAttenuationTimesPhase) {
  const auto inst = random_instance(6);
  const ParamLayout l = ParamLayout::from(inst.scenario, inst.scenario.model);
  const SteeringModel model(inst.scenario, l, inst.theta);
  const AttenuationModel att{model.params().beta};
  for (int f = 0; f < 8; ++f) {
    const CMatrix K = build_K(inst.scenario, l, inst.theta, f);
    const auto R = build_R(inst.scenario, l, inst.theta, f);
    const CMatrix raw = R[0] + att.coeffs[0] * R[1] + att.coeffs[1] * R[2];
    EXPECT_LT((K - raw).norm(), 1e-14 * raw.norm());
    for (int m = 0; m < 5; ++m)
      for (int n = 0; n < 2; ++n) {
        const double rho = model.rho()(m, n);
        const double a = -model.kappa() * f * rho;
        const cplx expect = evaluate(att, rho) * cplx(std::cos(a), std::sin(a));
        EXPECT_LT(std::abs(K(m, n) - expect), 1e-13);
      }
  }
  Eigen::VectorXd zero_beta = inst.theta;
  zero_beta(l.beta(0)) = zero_beta(l.beta(1)) = 0.0;
  EXPECT_LT((build_K(inst.scenario, l, zero_beta, 5) - build_R(inst.scenario, l, zero_beta, 5)[0]).norm(), 1e-15);
}

TEST(Steering, HExamples) {
  auto inst = random_instance(7);
  ModelConfig none = inst.scenario.model;
  none.paths = 0;
  const ParamLayout l0 = ParamLayout::from(inst.scenario, none);
  const Eigen::VectorXd t0 = inst.theta.head(l0.size());
  EXPECT_EQ(build_H(inst.scenario, l0, t0, 3), CMatrix::Zero(5, 2));

  const ParamLayout l = ParamLayout::from(inst.scenario, inst.scenario.model);
  Eigen::VectorXd t = inst.theta;
  t(l.gamma(1, 0, 0)) = 0.5;
  t(l.delay(1, 0, 0)) = 0.0;
  for (int f = 0; f < 8; ++f) {
    const CMatrix H = build_H(inst.scenario, l, t, f);
    for (int m = 0; m < 5; ++m) {
      if (inst.scenario.array.cluster_ids[m] == 1) {
        EXPECT_LT(std::abs(H(m, 0) - 0.5), 1e-15);
      }
    }
  }
  const CMatrix H0 = build_H(inst.scenario, l, inst.theta, 0);
  for (int m = 0; m < 5; ++m)
    for (int n = 0; n < 2; ++n) {
      const int c = inst.scenario.array.cluster_ids[m];
      EXPECT_LT(std::abs(H0(m, n) - inst.theta(l.gamma(c, n, 0))), 1e-15);
    }
  EXPECT_LT((build_Ktilde(inst.scenario, l, inst.theta, 4) - build_K(inst.scenario, l, inst.theta, 4) -
             build_H(inst.scenario, l, inst.theta, 4))
                .norm(),
            1e-15);
}

TEST(Steering, DelayOnlyIsUnitModulus) {
  const auto inst = random_instance(8);
  ModelConfig m = inst.scenario.model;
  m.delay_only = true;
  const ParamLayout l = ParamLayout::from(inst.scenario, m);
  const CMatrix K = build_Ktilde(inst.scenario, l, inst.theta.head(l.size()), 5);
  for (Eigen::Index i = 0; i < K.size(); ++i) EXPECT_NEAR(std::abs(K(i)), 1.0, 1e-15);
}

// -- parameter sensitivities of the steering matrices ---------------------------------

CMatrix fd_ktilde(const Scenario& sc, const ParamLayout& l, const Eigen::VectorXd& theta, int f, int i) {
  const double h = 1e-6 * (1.0 + std::abs(theta(i)));
  Eigen::VectorXd p = theta, q = theta;
  p(i) += h;
  q(i) -= h;
  return (build_Ktilde(sc, l, p, f) - build_Ktilde(sc, l, q, f)) / (2.0 * h);
}

TEST(Steering, DerivativesMatchFiniteDifferences) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto inst = random_instance(seed);
    const ParamLayout l = ParamLayout::from(inst.scenario, inst.scenario.model);
    const SteeringModel model(inst.scenario, l, inst.theta);
    for (int f : {0, 3, 7})
      for (int i = 0; i < l.size(); ++i) {
        const CMatrix an = model.dKtilde(f, i);
        const CMatrix fd = fd_ktilde(inst.scenario, l, inst.theta, f, i);
        if (an.norm() == 0.0) {
          EXPECT_LT(fd.norm(), 1e-9) << l.name(i) << " f=" << f;
          continue;
        }
        EXPECT_LT((an - fd).norm() / an.norm(), 1e-7) << l.name(i) << " f=" << f << " seed=" << seed;
      }
  }
}

TEST(Steering, BetaDerivativeIsIndependentOfBeta) {
  const auto inst = random_instance(9);
  const ParamLayout l = ParamLayout::from(inst.scenario, inst.scenario.model);
  Eigen::VectorXd other = inst.theta;
  other(l.beta(0)) += 3.0;
  other(l.beta(1)) -= 7.0;
  const SteeringModel a(inst.scenario, l, inst.theta), b(inst.scenario, l, other);
  for (int ell = 1; ell <= 2; ++ell) {
    EXPECT_EQ(dK_dbeta(a, 4, ell), dK_dbeta(b, 4, ell));
    const CMatrix dc = dK_dbeta(a, 0, ell);
    for (int m = 0; m < 5; ++m)
      for (int n = 0; n < 2; ++n) {
        EXPECT_EQ(dc(m, n).imag(), 0.0);
        EXPECT_NEAR(dc(m, n).real(), std::pow(a.rho()(m, n), -ell - 1), 1e-15);
      }
  }
  EXPECT_THROW(a.dK_dbeta(0, 3), std::out_of_range);
}

TEST(Steering, PositionDerivativeGeometry) {
  // sensors on the x axis west of the source
  Scenario sc;
  sc.array.positions = {{0.0, 0.0}, {1.0, 0.0}, {2.5, 0.0}};
  sc.array.cluster_ids = {0, 0, 0};
  sc.sources = {{{10.0, 0.0}, 1}};
  sc.model.attenuation_order = 0;
  const ParamLayout l = ParamLayout::from(sc, sc.model);
  Eigen::VectorXd theta(2);
  theta << 10.0, 0.0;
  const SteeringModel model(sc, l, theta);
  const CMatrix dx = dK_dx(model, 0, 0), dy = dK_dy(model, 0, 0);
  for (int m = 0; m < 3; ++m) {
    const double rho = model.rho()(m, 0);
    const double d = sc.array.positions[m].x() - 10.0;
    EXPECT_NEAR(dx(m, 0).real(), (d / rho) * (1.0 / rho) / rho, 1e-15);
    EXPECT_EQ(dx(m, 0).imag(), 0.0);
    EXPECT_LT(dx(m, 0).real(), 0.0);
    EXPECT_EQ(dy(m, 0), cplx(0.0, 0.0));
  }
}

TEST(Steering, MultipathDerivativeExamples) {
  auto inst = random_instance(11);
  const ParamLayout l = ParamLayout::from(inst.scenario, inst.scenario.model);
  const SteeringModel model(inst.scenario, l, inst.theta);
  const CMatrix g0 = dH_dgamma(model, 0, 1, 0, 0);
  const CMatrix t0 = dH_dtau(model, 0, 1, 0, 0);
  for (int m = 0; m < 5; ++m) {
    const bool in = inst.scenario.array.cluster_ids[m] == 1;
    EXPECT_EQ(g0(m, 0), in ? cplx(1.0, 0.0) : cplx(0.0, 0.0));
    EXPECT_EQ(g0(m, 1), cplx(0.0, 0.0));
  }
  EXPECT_EQ(t0.norm(), 0.0);

  Eigen::VectorXd zero_gain = inst.theta;
  zero_gain(l.gamma(0, 1, 0)) = 0.0;
  const SteeringModel z(inst.scenario, l, zero_gain);
  for (int f = 0; f < 8; ++f) EXPECT_EQ(dH_dtau(z, f, 0, 1, 0).norm(), 0.0);
  EXPECT_THROW(model.dH_dgamma(0, 2, 0, 0), std::out_of_range);
}

}  // namespace
}  // namespace wavelock
