#include "support.hpp"

namespace wavelock {
namespace {

TEST(Scene, SpiralPaperLayout) {
  const SensorArray a = spiral_array(40, {4.0, 4.0}, {2.0 * std::numbers::pi, 4.0 * std::numbers::pi});
  ASSERT_EQ(a.size(), 40u);
  EXPECT_EQ(a.cluster_count(), 1);
  EXPECT_NEAR(a.positions.front().x(), 6.0, 1e-12);
  EXPECT_NEAR(a.positions.front().y(), 4.0, 1e-12);
  EXPECT_NEAR(a.positions.back().x(), 8.0, 1e-12);
  EXPECT_NEAR(a.positions.back().y(), 4.0, 1e-12);
  // reference coordinates from an independent script
  EXPECT_NEAR(a.positions[10].x(), 3.8988189197250605, 1e-12);
  EXPECT_NEAR(a.positions[10].y(), 6.510782610790098, 1e-12);
}

TEST(Scene, SpiralSmallCases) {
  const SensorArray one = spiral_array(1, {0.0, 0.0}, {2.0 * std::numbers::pi, 2.0 * std::numbers::pi});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_NEAR(one.positions[0].x(), 2.0, 1e-12);
  EXPECT_NEAR(one.positions[0].y(), 0.0, 1e-12);

  const SensorArray three = spiral_array(3, {0.0, 0.0}, {2.0 * std::numbers::pi, 4.0 * std::numbers::pi});
  const double expect[3][2] = {{2.0, 0.0}, {-3.0, 0.0}, {4.0, 0.0}};
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(three.positions[k].x(), expect[k][0], 1e-12);
    EXPECT_NEAR(three.positions[k].y(), expect[k][1], 1e-12);
  }
  EXPECT_THROW(spiral_array(0, {0.0, 0.0}, {0.0, 1.0}), ConfigError);
}

TEST(Scene, CircularArrays) {
  const SensorArray a = circular_arrays({{15.0, 5.0}, {2.0, 15.0}, {5.0, 28.0}}, 25, 1.5);
  EXPECT_EQ(a.size(), 75u);
  EXPECT_EQ(a.cluster_count(), 3);
  EXPECT_EQ(a.cluster_ids[24], 0);
  EXPECT_EQ(a.cluster_ids[25], 1);
  EXPECT_NO_THROW(a.validate());

  const SensorArray one = circular_arrays({{0.0, 0.0}}, 1, 1.0);
  EXPECT_NEAR(one.positions[0].x(), 1.0, 1e-15);
  EXPECT_NEAR(one.positions[0].y(), 0.0, 1e-15);

  const SensorArray four = circular_arrays({{0.0, 0.0}}, 4, 2.0);
  const double expect[4][2] = {{2, 0}, {0, 2}, {-2, 0}, {0, -2}};
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(four.positions[k].x(), expect[k][0], 1e-12);
    EXPECT_NEAR(four.positions[k].y(), expect[k][1], 1e-12);
  }
  EXPECT_THROW(circular_arrays({}, 4, 1.0), ConfigError);
  EXPECT_THROW(circular_arrays({{0.0, 0.0}}, 0, 1.0), ConfigError);
  EXPECT_THROW(circular_arrays({{0.0, 0.0}}, 4, 0.0), ConfigError);
}

TEST(Scene, GeneratorsAreDeterministic) {
  const auto a = spiral_array(40, {4.0, 4.0}, {2.0 * std::numbers::pi, 4.0 * std::numbers::pi});
  const auto b = spiral_array(40, {4.0, 4.0}, {2.0 * std::numbers::pi, 4.0 * std::numbers::pi});
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.positions[k].x(), b.positions[k].x());
    EXPECT_EQ(a.positions[k].y(), b.positions[k].y());
  }
}

TEST(Scene, DistanceAndDelay) {
  EXPECT_DOUBLE_EQ(distance({0.0, 0.0}, {3.0, 4.0}), 5.0);
  SignalConfig cfg;
  EXPECT_DOUBLE_EQ(delay_samples(345.0, cfg), 4000.0);
  EXPECT_THROW(delay_samples(0.0, cfg), DomainError);
  EXPECT_THROW(checked_distance({1.0, 1.0}, {1.0, 1.0}, 0, 0), DegenerateGeometryError);

  const auto a = spiral_array(40, {4.0, 4.0}, {2.0 * std::numbers::pi, 4.0 * std::numbers::pi});
  EXPECT_NEAR(distance(a.positions[0], {12.0, 10.0}), 8.48528137423857, 1e-12);
  EXPECT_NEAR(distance(a.positions[10], {12.0, 10.0}), 8.820644697785383, 1e-12);
  EXPECT_NEAR(distance(a.positions[39], {12.0, 10.0}), 7.21110255092798, 1e-12);
}

TEST(Scene, DistanceMetricProperties) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int t = 0; t < 200; ++t) {
    const Point2 a(u(gen), u(gen)), b(u(gen), u(gen)), c(u(gen), u(gen));
    EXPECT_EQ(distance(a, b), distance(b, a));
    EXPECT_LE(distance(a, c), distance(a, b) + distance(b, c) + 1e-12);
  }
}

TEST(Scene, DelayIsLinear) {
  SignalConfig cfg;
  for (double rho : {0.1, 1.0, 7.3, 120.0})
    for (double a : {0.5, 2.0, 10.0}) EXPECT_NEAR(delay_samples(a * rho, cfg), a * delay_samples(rho, cfg), 1e-9);
}

TEST(Scene, SignalValidation) {
  SignalConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  SignalConfig bad = cfg;
  bad.n_f = bad.n_t;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.center_freq = 1950.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.bandwidth = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.center_freq = 90.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Scene, ArrayAndScenarioValidation) {
  SensorArray a;
  EXPECT_THROW(a.validate(), ConfigError);
  a.positions = {{0, 0}, {1, 0}};
  a.cluster_ids = {0, 2};
  EXPECT_THROW(a.validate(), ConfigError);
  a.cluster_ids = {0, 1};
  EXPECT_NO_THROW(a.validate());
  a.positions[1] = {std::nan(""), 0.0};
  EXPECT_THROW(a.validate(), ConfigError);

  Scenario sc = example1_scenario(Example1Variant::two_sources);
  EXPECT_NO_THROW(sc.validate());
  sc.array = spiral_array(1, {0.0, 0.0}, {1.0, 1.0});
  EXPECT_THROW(sc.validate(), ConfigError);  // M < N

  Scenario mp = example2_scenario(0.0, true);
  EXPECT_NO_THROW(mp.validate());
  mp.channels.taps[{0, 0}].push_back({0.1, -1.0});
  EXPECT_THROW(mp.validate(), ConfigError);
}

}  // namespace
}  // namespace wavelock
