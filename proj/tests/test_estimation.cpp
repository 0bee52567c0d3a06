#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ctrlid/errors.hpp"
#include "ctrlid/estimation.hpp"
#include "ctrlid/simulation.hpp"
#include "oracles.hpp"

using namespace ctrlid;
using namespace ctrlid::estimation;

namespace {

ScatterData scatter(std::vector<double> w, std::vector<double> z) {
  ScatterData s;
  for (double v : w) s.w.push_back({v});
  s.z = std::move(z);
  return s;
}

ScatterData noisy_sine(std::size_t n, std::uint64_t seed) {
  ScatterData s;
  Rng rng(seed);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = rng.uniform(0.0, 2.0 * std::numbers::pi);
    s.w.push_back({w});
    s.z.push_back(std::sin(w) + rng.uniform(-0.05, 0.05));
  }
  return s;
}

// Trajectory with y(k+1) = next(y(k), u(k)) and no noise.
Dataset trajectory(double y0, const std::vector<double>& u, double (*next)(double, double)) {
  Dataset d;
  d.is_trajectory = true;
  double y = y0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    d.samples.push_back({static_cast<std::int64_t>(k), {y}, u[k]});
    y = next(y, u[k]);
  }
  return d;
}

}  // namespace

TEST(NoiseBound, ConstantDataGivesZero) {
  const auto nb = estimate_noise_bound(scatter({0.0, 0.001, 0.002, 1.0}, {3.0, 3.0, 3.0, 3.0}));
  EXPECT_EQ(nb.epsilon_hat, 0.0);
}

TEST(NoiseBound, CoincidentPairWithOppositeValues) {
  const auto nb = estimate_noise_bound(scatter({0.0, 0.0}, {1.0, -1.0}));
  EXPECT_EQ(nb.epsilon_hat, 1.0);
  EXPECT_EQ(nb.covered, 2u);
  EXPECT_EQ(nb.rho_used, 1.0);  // zero diameter
}

TEST(NoiseBound, AutomaticRadiusIsOnePercentOfDiameter) {
  const auto nb = estimate_noise_bound(scatter({0.0, 0.005, 10.0}, {0.0, 0.4, 0.0}));
  EXPECT_DOUBLE_EQ(nb.rho_used, 0.1);
  EXPECT_EQ(nb.covered, 2u);
  EXPECT_NEAR(nb.epsilon_hat, 0.2, 1e-15);
}

TEST(NoiseBound, AutomaticRadiusDoublesUntilSomeNeighbour) {
  const auto nb = estimate_noise_bound(scatter({0.0, 0.3, 10.0}, {0.0, 1.0, 0.0}));
  EXPECT_EQ(nb.doublings, 2u);
  EXPECT_DOUBLE_EQ(nb.rho_used, 0.4);
}

TEST(NoiseBound, FixedRadiusTooSmallReportsDistance) {
  try {
    estimate_noise_bound(scatter({0.0, 0.3, 10.0}, {0.0, 1.0, 0.0}), RhoSetting::fixed(0.1));
    FAIL() << "expected EstimationError";
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("rho too small"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("smallest pairwise distance is 0.29999999999999999"), std::string::npos);
  }
}

TEST(NoiseBound, ScaledRadiusConvergesOnNoisySine) {
  const auto nb = estimate_noise_bound(noisy_sine(5000, 7), RhoSetting::scaled());
  EXPECT_GE(nb.epsilon_hat, 0.040);
  EXPECT_LE(nb.epsilon_hat, 0.060);
}

TEST(NoiseBound, PermutationInvariant) {
  ScatterData s = noisy_sine(300, 3);
  const auto a = estimate_noise_bound(s);
  std::reverse(s.w.begin(), s.w.end());
  std::reverse(s.z.begin(), s.z.end());
  const auto b = estimate_noise_bound(s);
  EXPECT_NEAR(a.epsilon_hat, b.epsilon_hat, 1e-15);
  EXPECT_EQ(a.covered, b.covered);
}

TEST(NoiseBound, RejectsSinglePoint) {
  EXPECT_THROW(estimate_noise_bound(scatter({0.0}, {1.0})), DataError);
}

TEST(Lipschitz, AffineDataIsExact) {
  EXPECT_DOUBLE_EQ(estimate_lipschitz(scatter({0, 1, 2}, {0, 2, 4}), 0.0), 2.0);
}

TEST(Lipschitz, LargeNoiseBoundGivesZero) {
  EXPECT_EQ(estimate_lipschitz(scatter({0, 1, 2}, {0, 2, 4}), 2.0), 0.0);
}

TEST(Lipschitz, CoincidentInputsAreUninformative) {
  try {
    estimate_lipschitz(scatter({1, 1, 1}, {0, 2, 4}), 0.0);
    FAIL() << "expected EstimationError";
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("no informative pairs"), std::string::npos);
  }
}

TEST(Lipschitz, NoiseFreeNeverOverestimates) {
  const double oracle = oracle::grid_lipschitz(oracle::example_kappa, -3.0, 3.0, 100000);
  Rng rng(21);
  ScatterData s;
  for (int k = 0; k < 400; ++k) {
    const double y = rng.uniform(-3.0, 3.0);
    s.w.push_back({y});
    s.z.push_back(oracle::example_kappa(y));
  }
  EXPECT_LE(estimate_lipschitz(s, 0.0), oracle + 1e-9);
}

TEST(Lipschitz, MonotoneInNoiseBound) {
  const ScatterData s = noisy_sine(200, 5);
  double prev = estimate_lipschitz(s, 0.0);
  for (double e : {0.01, 0.02, 0.05, 0.1, 0.5}) {
    const double g = estimate_lipschitz(s, e);
    EXPECT_LE(g, prev);
    prev = g;
  }
}

TEST(Lipschitz, MonotoneInSampleCount) {
  const ScatterData full = noisy_sine(200, 9);
  ScatterData part;
  double prev = 0.0;
  for (std::size_t k = 0; k < full.size(); ++k) {
    part.w.push_back(full.w[k]);
    part.z.push_back(full.z[k]);
    if (part.size() < 2) continue;
    const double g = estimate_lipschitz(part, 0.02);
    EXPECT_GE(g, prev);
    prev = g;
  }
}

TEST(Lipschitz, PermutationInvariant) {
  ScatterData s = noisy_sine(200, 4);
  const double a = estimate_lipschitz(s, 0.03);
  std::reverse(s.w.begin(), s.w.end());
  std::reverse(s.z.begin(), s.z.end());
  EXPECT_EQ(a, estimate_lipschitz(s, 0.03));
}

TEST(PlantGains, LinearInputGain) {
  const Dataset d = trajectory(0.0, {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0}, [](double, double u) { return 0.5 * u; });
  EXPECT_DOUBLE_EQ(estimate_gamma_f(d, 0.0), 0.5);
}

TEST(PlantGains, ConstantInputIsUninformative) {
  const Dataset d = trajectory(1.0, {0.2, 0.2, 0.2, 0.2}, [](double y, double u) { return 0.5 * y + u; });
  EXPECT_THROW(estimate_gamma_f(d, 0.0), EstimationError);
}

TEST(PlantGains, ContractingLoop) {
  const Dataset d = trajectory(1.0, std::vector<double>(8, 0.0), [](double y, double) { return 0.3 * y; });
  EXPECT_NEAR(estimate_gamma_gy(d, 0.0), 0.3, 1e-12);
}

TEST(PlantGains, FixedPointIsUninformative) {
  const Dataset d = trajectory(0.0, std::vector<double>(5, 0.0), [](double y, double) { return y; });
  EXPECT_THROW(estimate_gamma_gy(d, 0.0), EstimationError);
}

TEST(PlantGains, EpisodesDoNotFormPairsAcrossGaps) {
  Dataset d;
  d.is_trajectory = true;
  d.samples = {{0, {0.0}, 1.0}, {1, {0.5}, 0.0}, {5, {3.0}, -1.0}, {6, {-0.5}, 0.0}};
  const auto s = input_to_next_output(d);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].size(), 2u);
  EXPECT_DOUBLE_EQ(estimate_gamma_f(d, 0.0), 0.5);
}

TEST(PlantGains, TanhLoopInputGainFromStepLog) {
  const auto b = simulation::benchmark_plant("tanh-loop");
  const auto g = estimate_plant_gain_f(simulation::step_response_log(b, 1000, {}, 11));
  EXPECT_GE(g.gamma_hat, 0.35);
  EXPECT_LE(g.gamma_hat, 0.55);
}

TEST(PlantGains, TanhLoopOutputGainFromClosedLoopLog) {
  const auto b = simulation::benchmark_plant("tanh-loop");
  const auto g = estimate_plant_gain_gy(simulation::closed_loop_log(b, 400, 5, {}, 12));
  EXPECT_GE(g.gamma_hat, 0.2);
  EXPECT_LE(g.gamma_hat, 0.45);
}

TEST(RhoPolicy, RoundTripsNames) {
  for (RhoPolicy p : {RhoPolicy::automatic, RhoPolicy::fixed, RhoPolicy::scaled}) {
    EXPECT_EQ(rho_policy_from_string(to_string(p)), p);
  }
  EXPECT_THROW(rho_policy_from_string("median"), ParameterError);
}
