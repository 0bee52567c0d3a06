#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ctrlid/core_types.hpp"
#include "ctrlid/errors.hpp"
#include "ctrlid/stability.hpp"

using namespace ctrlid;
using namespace ctrlid::stability;

namespace {

CertificateInputs inputs(double gf, double ggy, double gd) {
  CertificateInputs in;
  in.gamma_f = gf;
  in.gamma_gy = ggy;
  in.gamma_delta = gd;
  return in;
}

}  // namespace

TEST(Baseline, PureDecay) { EXPECT_DOUBLE_EQ(baseline_bound(0.5, 0.0, 0.0, 0.0, 1.0, 3), 0.125); }

TEST(Baseline, OffsetOnly) { EXPECT_DOUBLE_EQ(baseline_bound(0.5, 0.0, 1.0, 0.0, 0.0, 0), 2.0); }

TEST(Baseline, AllTerms) {
  const double expected = 0.01 / 0.7 + std::pow(0.3, 10) * 2.0 + 0.1 / 0.7;
  EXPECT_NEAR(baseline_bound(0.3, 1.0, 0.1, 0.01, 2.0, 10), expected, 1e-15);
  EXPECT_NEAR(expected, 0.157156, 2e-6);  // 0.15715466...
}

TEST(Baseline, UnstableLoopRejected) {
  EXPECT_THROW(baseline_bound(1.0, 1.0, 0.0, 0.0, 1.0, 0), CertificateError);
  EXPECT_THROW(baseline_bound(-0.1, 1.0, 0.0, 0.0, 1.0, 0), CertificateError);
}

TEST(Certify, WithinMargin) {
  const auto c = certify(inputs(1.0, 0.5, 0.4));
  EXPECT_DOUBLE_EQ(c.gamma, 0.9);
  EXPECT_TRUE(c.certified);
  EXPECT_DOUBLE_EQ(c.gamma_delta_limit(), 0.5);
}

TEST(Certify, BeyondMargin) {
  const auto c = certify(inputs(1.0, 0.5, 0.6));
  EXPECT_DOUBLE_EQ(c.gamma, 1.1);
  EXPECT_FALSE(c.certified);
  EXPECT_THROW(learned_loop_bound(c, 0.0, 1.0, 0), CertificateError);
  EXPECT_THROW(deviation_bound(c, 0.0, 1.0, 0.0, 0), CertificateError);
}

TEST(Certify, ZeroInputGainHasInfiniteLimit) {
  const auto c = certify(inputs(0.0, 0.5, 3.0));
  EXPECT_TRUE(c.certified);
  EXPECT_TRUE(std::isinf(c.gamma_delta_limit()));
}

TEST(Certify, RejectsBadInputs) {
  EXPECT_THROW(certify(inputs(-1.0, 0.5, 0.1)), ParameterError);
  EXPECT_THROW(certify(inputs(1.0, std::nan(""), 0.1)), ParameterError);
  EXPECT_THROW(certify(inputs(1.0, 0.5, INFINITY)), ParameterError);
}

TEST(LearnedLoop, DecayOnly) {
  const auto c = certify(inputs(1.0, 0.5, 0.4));
  EXPECT_DOUBLE_EQ(learned_loop_bound(c, 0.0, 1.0, 0), 1.0);
}

TEST(LearnedLoop, OffsetTerms) {
  CertificateInputs in = inputs(1.0, 0.25, 0.25);
  in.delta0_abs = 0.1;
  in.gamma_khat = 1.0;
  in.epsilon_y = 0.05;
  const auto c = certify(in);
  ASSERT_DOUBLE_EQ(c.gamma, 0.5);
  EXPECT_NEAR(learned_loop_bound(c, 0.0, 0.0, 7), 0.3, 1e-15);
}

TEST(LearnedLoop, MatchesRecomputation) {
  CertificateInputs in;
  in.gamma_f = 0.5;
  in.gamma_gy = 0.3;
  in.gamma_ge = 1.0;
  in.gamma_delta = 0.2;
  in.gamma_khat = 0.45;
  in.delta0_abs = 0.02;
  in.g0_norm = 0.0;
  in.epsilon_y = 0.01;
  const auto c = certify(in);
  const double g = 0.5 * 0.2 + 0.3;
  const double t = 50;
  const double expected = 1.0 / (1 - g) * 0.01 + std::pow(g, t) * 1.5 + (0.5 * 0.02 + 0.5 * 0.45 * 0.01) / (1 - g);
  EXPECT_NEAR(learned_loop_bound(c, 0.01, 1.5, 50), expected, 1e-12);
}

TEST(Deviation, ZeroEverywhereWithoutExcitation) {
  const auto c = certify(inputs(1.0, 0.5, 0.4));
  for (std::size_t t : {0u, 1u, 10u, 200u}) EXPECT_EQ(deviation_bound(c, 0.0, 0.0, 0.0, t), 0.0);
}

TEST(Deviation, InitialConditionTerms) {
  const auto c = certify(inputs(1.0, 0.5, 0.4));
  EXPECT_NEAR(deviation_bound(c, 1.0, 2.0, 0.0, 0), 9.0, 1e-12);
}

TEST(Deviation, DecaysTowardsOffset) {
  CertificateInputs in = inputs(1.0, 0.5, 0.4);
  in.delta0_abs = 0.01;
  const auto c = certify(in);
  double prev = deviation_bound(c, 1.0, 2.0, 0.0, 0);
  for (std::size_t t = 1; t < 400; ++t) {
    const double b = deviation_bound(c, 1.0, 2.0, 0.0, t);
    EXPECT_LE(b, prev);
    prev = b;
  }
  EXPECT_NEAR(prev, 0.01 / 0.1, 1e-12);
}

TEST(FormulaCollapse, LearnedLoopReducesToBaseline) {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    CertificateInputs in;
    in.gamma_f = rng.uniform(0.0, 3.0);
    in.gamma_gy = rng.uniform(0.0, 0.99);
    in.gamma_ge = rng.uniform(0.0, 2.0);
    in.gamma_khat = rng.uniform(0.0, 5.0);
    in.delta0_abs = 0.0;
    in.epsilon_y = 0.0;
    in.gamma_delta = 0.0;
    in.g0_norm = rng.uniform(0.0, 1.0);
    const double es = rng.uniform(0.0, 0.1);
    const double y0 = rng.uniform(0.0, 5.0);
    const auto t = static_cast<std::size_t>(rng.uniform(0.0, 100.0));
    const auto c = certify(in);
    const double a = learned_loop_bound(c, es, y0, t);
    const double b = baseline_bound(in.gamma_gy, in.gamma_ge, in.g0_norm, es, y0, t);
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(b)));
  }
}

TEST(CertificateFile, ListsEveryField) {
  CertificateInputs in = inputs(0.5, 0.3, 0.2);
  in.delta0_source = "reference";
  std::ostringstream os;
  write_certificate(os, certify(in));
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("ctrlid-certificate 1", 0), 0u);
  for (const char* key : {"gamma_f", "gamma_gy", "gamma_ge", "gamma_delta", "gamma_khat", "delta0_abs",
                          "delta0_source", "g0_norm", "epsilon_y", "gamma_delta_limit", "certified"}) {
    EXPECT_NE(s.find(std::string(key) + " = "), std::string::npos) << key;
  }
  EXPECT_NE(s.find("delta0_source = reference"), std::string::npos);
}
