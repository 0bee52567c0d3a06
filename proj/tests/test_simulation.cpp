#include <gtest/gtest.h>

#include <cmath>

#include "ctrlid/errors.hpp"
#include "ctrlid/simulation.hpp"
#include "ctrlid/stability.hpp"

using namespace ctrlid;
using namespace ctrlid::simulation;

namespace {

// y⁺ = gain·y + input·u + e_s on Y = [-10, 10].
class LinearPlant final : public PlantInterface {
 public:
  LinearPlant(double gain, double input) : gain_(gain), input_(input) {}

  const Box& output_domain() const override { return y_; }
  Interval input_domain() const override { return {-10.0, 10.0}; }
  const Box& disturbance_domain() const override { return e_; }

 protected:
  Vector raw_step(std::span<const double> y, double u, std::span<const double> es) const override {
    return {gain_ * y[0] + input_ * u + es[0]};
  }

 private:
  double gain_;
  double input_;
  Box y_ = Box::uniform(1, -10.0, 10.0);
  Box e_ = Box::uniform(1, -0.1, 0.1);
};

std::shared_ptr<FunctionController> linear_law(double k) {
  return std::make_shared<FunctionController>([k](std::span<const double> y) { return k * y[0]; },
                                              Interval{-10.0, 10.0}, std::abs(k));
}

std::vector<Vector> zeros(std::size_t T) { return std::vector<Vector>(T, Vector{0.0}); }

}  // namespace

TEST(Simulate, ZeroPlantSettlesImmediately) {
  const LinearPlant plant(0.0, 0.0);
  const auto tr = simulate(plant, *linear_law(3.0), {2.0}, zeros(5), {}, 5);
  ASSERT_EQ(tr.y.size(), 6u);
  ASSERT_EQ(tr.u.size(), 5u);
  EXPECT_EQ(tr.y[0][0], 2.0);
  for (std::size_t t = 1; t <= 5; ++t) EXPECT_EQ(tr.y[t][0], 0.0);
}

TEST(Simulate, LinearLoopHalves) {
  const LinearPlant plant(0.5, 1.0);
  const auto tr = simulate(plant, *linear_law(0.0), {1.0}, zeros(3), {}, 3);
  const double expected[] = {1.0, 0.5, 0.25, 0.125};
  for (std::size_t t = 0; t < 4; ++t) EXPECT_EQ(tr.y[t][0], expected[t]);
}

TEST(Simulate, FeedbackNoiseReachesController) {
  const LinearPlant plant(0.0, 1.0);
  const std::vector<Vector> ey = {{0.5}, {0.0}};
  const auto tr = simulate(plant, *linear_law(1.0), {1.0}, zeros(2), ey, 2);
  EXPECT_EQ(tr.u[0], 1.5);
  EXPECT_EQ(tr.y[1][0], 1.5);
}

TEST(Simulate, ClampEventsRecorded) {
  const LinearPlant plant(4.0, 0.0);
  const auto tr = simulate(plant, *linear_law(0.0), {3.0}, zeros(2), {}, 2);
  EXPECT_EQ(tr.y[1][0], 10.0);
  EXPECT_EQ(tr.clamp_events, (std::vector<std::size_t>{1, 2}));
}

TEST(Simulate, RejectsBadInputs) {
  const LinearPlant plant(0.5, 1.0);
  EXPECT_THROW(simulate(plant, *linear_law(0.0), {11.0}, zeros(3), {}, 3), DomainError);
  EXPECT_THROW(simulate(plant, *linear_law(0.0), {1.0}, zeros(2), {}, 3), DomainError);
  EXPECT_THROW(simulate(plant, *linear_law(0.0), {1.0, 0.0}, zeros(3), {}, 3), DomainError);
}

TEST(Simulate, IdenticalControllersGiveIdenticalLoops) {
  const auto b = benchmark_plant("tanh-loop");
  const auto copy = linear_law(-0.4);
  Rng rng(3);
  std::vector<Vector> es;
  for (int t = 0; t < 50; ++t) es.push_back({rng.uniform(-0.01, 0.01)});
  const auto a = simulate(*b.plant, *b.kappa, {1.3}, es, {}, 50);
  const auto c = simulate(*b.plant, *copy, {1.3}, es, zeros(50), 50);
  for (std::size_t t = 0; t <= 50; ++t) EXPECT_EQ(a.y[t][0], c.y[t][0]);
}

TEST(Deviation, IdenticalLoopsHaveNoDeviation) {
  const auto b = benchmark_plant("tanh-loop");
  stability::CertificateInputs in;
  in.gamma_f = 0.5;
  in.gamma_gy = 0.3;
  in.gamma_ge = 1.0;
  const auto cert = stability::certify(in);
  NoiseSequences seqs;
  seqs.es = zeros(20);
  seqs.ey = zeros(20);
  const auto d = deviation_run(*b.plant, *b.kappa, *b.kappa, {1.0}, {0.0}, seqs, 20, cert);
  for (const auto& xi : d.xi) EXPECT_EQ(xi[0], 0.0);
  EXPECT_TRUE(d.dominated);
}

TEST(Deviation, OneStepExpansion) {
  const auto b = benchmark_plant("tanh-loop");
  // κ̂ = -0.4y + 0.1 sin(y): Δ(0) = 0 and γ_Δ = 0.1.
  const FunctionController khat([](std::span<const double> y) { return -0.4 * y[0] + 0.1 * std::sin(y[0]); },
                                Interval{-2.0, 2.0}, 0.5);
  stability::CertificateInputs in;
  in.gamma_f = 0.5;
  in.gamma_gy = 0.3;
  in.gamma_ge = 1.0;
  in.gamma_delta = 0.1;
  const auto cert = stability::certify(in);
  NoiseSequences seqs;
  seqs.es = zeros(1);
  seqs.ey = zeros(1);
  for (double y0 : {-2.0, -0.7, 0.3, 1.0, 2.0}) {
    const auto d = deviation_run(*b.plant, *b.kappa, khat, {y0}, {0.0}, seqs, 1, cert);
    EXPECT_LE(std::abs(d.xi[1][0]), 0.5 * 0.1 * std::abs(y0) + 1e-15) << y0;
  }
}

TEST(Deviation, NeedsCertifiedLoop) {
  const auto b = benchmark_plant("tanh-loop");
  stability::CertificateInputs in;
  in.gamma_f = 0.5;
  in.gamma_gy = 0.3;
  in.gamma_delta = 2.0;
  NoiseSequences seqs;
  seqs.es = zeros(5);
  EXPECT_THROW(deviation_run(*b.plant, *b.kappa, *b.kappa, {1.0}, {0.0}, seqs, 5, stability::certify(in)),
               CertificateError);
}

TEST(GridError, IdenticalControllers) {
  const auto k = linear_law(2.0);
  const auto g = grid_error_lipschitz(*k, *k, uniform_grid(-1.0, 1.0, 11));
  EXPECT_EQ(g.gamma_delta_measured, 0.0);
  EXPECT_EQ(g.delta0_abs, 0.0);
  EXPECT_EQ(g.max_abs_error, 0.0);
}

TEST(GridError, IdentityAgainstZero) {
  const auto g = grid_error_lipschitz(*linear_law(1.0), *linear_law(0.0), {0.0, 1.0});
  EXPECT_EQ(g.gamma_delta_measured, 1.0);
  EXPECT_EQ(g.delta0_abs, 0.0);
  EXPECT_EQ(g.max_abs_error, 1.0);
}

TEST(GridError, RefinementNeverDecreases) {
  const auto ex = generate_example_dataset(10, 1);
  const auto zero = linear_law(0.0);
  std::vector<double> coarse = uniform_grid(-3.0, 3.0, 31);
  double prev = grid_error_lipschitz(*ex.kappa, *zero, coarse).gamma_delta_measured;
  for (int level = 0; level < 5; ++level) {
    std::vector<double> fine;
    for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
      fine.push_back(coarse[i]);
      fine.push_back(0.5 * (coarse[i] + coarse[i + 1]));
    }
    fine.push_back(coarse.back());
    const double g = grid_error_lipschitz(*ex.kappa, *zero, fine).gamma_delta_measured;
    EXPECT_GE(g, prev - 1e-12);
    prev = g;
    coarse = fine;
  }
}

TEST(GridError, DegenerateGridRejected) {
  const auto k = linear_law(1.0);
  EXPECT_THROW(grid_error_lipschitz(*k, *k, {0.0}), ParameterError);
  EXPECT_THROW(grid_error_lipschitz(*k, *k, {0.0, 0.0}), ParameterError);
  EXPECT_THROW(uniform_grid(1.0, 1.0, 5), ParameterError);
}

TEST(SampledError, MatchesLinearSlope) {
  const auto g = sampled_error_lipschitz(*linear_law(1.5), *linear_law(0.5), {{-1.0}, {0.0}, {0.5}, {2.0}}, 200, 1);
  EXPECT_NEAR(g.gamma_delta_measured, 1.0, 1e-15);
  EXPECT_EQ(g.delta0_abs, 0.0);
  EXPECT_EQ(g.max_abs_error, 2.0);
}

TEST(ExampleData, NoiseFreeOverride) {
  const auto ex = generate_example_dataset(50, 2, 0.0);
  for (const auto& s : ex.data.samples) EXPECT_EQ(s.u, example_kappa(s.y[0]));
}

TEST(ExampleData, ShapeAndNoiseBand) {
  const auto ex = generate_example_dataset(170, 1);
  EXPECT_EQ(ex.data.size(), 170u);
  EXPECT_FALSE(ex.data.is_trajectory);
  EXPECT_TRUE(validate_dataset(ex.data).empty());
  for (const auto& s : ex.data.samples) {
    EXPECT_GE(s.y[0], -3.0);
    EXPECT_LE(s.y[0], 3.0);
    EXPECT_LE(std::abs(s.u - example_kappa(s.y[0])), 0.05);
  }
}

TEST(ExampleData, ReferenceController) {
  EXPECT_EQ(example_kappa(0.0), 0.0);
  const auto ex = generate_example_dataset(2, 1);
  const double y[1] = {0.7};
  EXPECT_EQ(ex.kappa->eval(y), 2.0 * 0.7 * std::exp(-0.49) * std::cos(5.6));
  EXPECT_GT(ex.kappa->lipschitz_constant(), 2.0);
}

TEST(ExampleData, SeedDeterminesData) {
  const auto a = generate_example_dataset(20, 9);
  const auto b = generate_example_dataset(20, 9);
  const auto c = generate_example_dataset(20, 10);
  for (std::size_t k = 0; k < 20; ++k) {
    EXPECT_EQ(a.data.samples[k].y, b.data.samples[k].y);
    EXPECT_EQ(a.data.samples[k].u, b.data.samples[k].u);
  }
  EXPECT_NE(a.data.samples[0].y, c.data.samples[0].y);
}

TEST(Benchmark, TanhLoopAtRest) {
  const auto b = benchmark_plant("tanh-loop");
  const Vector y0 = {0.0};
  const Vector e = {0.0};
  EXPECT_EQ(b.plant->step(y0, 0.0, e).y[0], 0.0);
}

TEST(Benchmark, TanhLoopContracts) {
  const auto b = benchmark_plant("tanh-loop");
  const auto tr = simulate(*b.plant, *b.kappa, {1.0}, zeros(20), {}, 20);
  EXPECT_LT(std::abs(tr.y[20][0]), 1e-2);
}

TEST(Benchmark, DeclaredConstantsMatchGrid) {
  const auto b = benchmark_plant("tanh-loop");
  const auto declared = b.plant->declared_constants();
  const Vector e0 = {0.0};
  const auto grid = uniform_grid(-2.0, 2.0, 4001);
  double gf = 0.0, ggy = 0.0, gge = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = grid[i] - grid[i - 1];
    const Vector y = {0.3};
    gf = std::max(gf, std::abs(b.plant->step(y, grid[i], e0).y[0] - b.plant->step(y, grid[i - 1], e0).y[0]) / h);
    const Vector ya = {grid[i]};
    const Vector yb = {grid[i - 1]};
    ggy = std::max(ggy, std::abs(b.plant->step(ya, b.kappa->eval(ya), e0).y[0] -
                                 b.plant->step(yb, b.kappa->eval(yb), e0).y[0]) / h);
  }
  for (double e : {-0.01, -0.005, 0.0, 0.005}) {
    const Vector y = {0.2};
    const Vector ea = {e};
    const Vector eb = {e + 0.005};
    gge = std::max(gge, std::abs(b.plant->step(y, 0.0, eb).y[0] - b.plant->step(y, 0.0, ea).y[0]) / 0.005);
  }
  EXPECT_NEAR(gf, *declared.gamma_f, 0.05 * *declared.gamma_f);
  EXPECT_NEAR(ggy, *declared.gamma_gy, 0.05 * *declared.gamma_gy);
  EXPECT_NEAR(gge, *declared.gamma_ge, 0.05 * *declared.gamma_ge);
}

TEST(Benchmark, UnknownKindRejected) {
  try {
    benchmark_plant("pendulum");
    FAIL() << "expected ParameterError";
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("tanh-loop"), std::string::npos);
  }
}

TEST(Logs, ClosedLoopEpisodesAreSeparated) {
  const auto b = benchmark_plant("tanh-loop");
  const auto d = closed_loop_log(b, 3, 4, {}, 1);
  EXPECT_EQ(d.size(), 12u);
  EXPECT_TRUE(d.is_trajectory);
  EXPECT_TRUE(validate_dataset(d).empty());
  EXPECT_EQ(d.successor_indices().size(), 9u);
}

TEST(Logs, NoiseFreeClosedLoopFollowsPlant) {
  const auto b = benchmark_plant("tanh-loop");
  const auto d = closed_loop_log(b, 2, 6, {0.0, 0.0, 0.0}, 4);
  for (std::size_t k : d.successor_indices()) {
    const auto& s = d.samples[k];
    EXPECT_EQ(s.u, b.kappa->eval(s.y));
    const Vector e = {0.0};
    EXPECT_EQ(d.samples[k + 1].y[0], b.plant->step(s.y, s.u, e).y[0]);
  }
}

TEST(Logs, StepResponsePairs) {
  const auto b = benchmark_plant("tanh-loop");
  const auto d = step_response_log(b, 5, {0.0, 0.0, 0.0}, 2);
  ASSERT_EQ(d.size(), 10u);
  EXPECT_EQ(d.successor_indices().size(), 5u);
  for (std::size_t e = 0; e < 5; ++e) {
    EXPECT_EQ(d.samples[2 * e].y[0], 0.0);
    EXPECT_EQ(d.samples[2 * e + 1].y[0], 0.5 * d.samples[2 * e].u);
  }
}
