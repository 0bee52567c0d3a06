#pragma once

// Two-stage sparse controller identification. Given logged pairs (ỹ(k), ũ(k))
// and a basis dictionary, the learner finds coefficients a such that
//
//   (a)  |ũ(k) - Φ_k a| <= α ε̂                                   for all k
//   (b)  |r(l) - r(k)| <= γ_Δ ||ỹ(l) - ỹ(k)||_∞ + 2 ε̂,  r = ũ - Φ a,  for all l < k
//
// Stage 1 minimises ||a||_1 under (a) and (b) with a fixed budget γ'_Δ; stage
// 2 freezes the support found there and minimises γ_Δ itself. Constraint (b)
// has O(N^2) rows. By default they are generated lazily: the LP is solved
// with a working subset, every pair is checked at the solution, violated
// pairs are added and the LP is solved again until none is violated. The
// result is the optimum of the full problem; the "full" mode assembles every
// row up front and is kept for cross-checking.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ctrlid/basis.hpp"
#include "ctrlid/core_types.hpp"
#include "ctrlid/estimation.hpp"
#include "ctrlid/lp.hpp"

namespace ctrlid::learner {

// Row-major N x M matrix Φ with Φ[k][i] = φ_i(ỹ(k)), plus ũ and ỹ.
struct Regressor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector phi;
  Vector u;
  std::vector<Vector> y;

  double at(std::size_t k, std::size_t i) const { return phi[k * cols + i]; }
};

// Raises DomainError naming the sample when some ỹ(k) lies outside the
// dictionary domain. A single sample is accepted.
Regressor build_regressor(const Dataset& d, const basis::Dictionary& dict);

struct AlphaChoice {
  double alpha = 1.0;
  double alpha_min = 0.0;
  double t_star = 0.0;
  // ε̂ = 0: constraint (a) becomes |ũ - Φa| <= t*(1 + margin) and α is 1.
  bool absolute_mode = false;
  double residual_bound = 0.0;
};

AlphaChoice select_alpha(const Regressor& reg, double epsilon_hat, double margin = 0.02,
                         const lp::SolverOptions& opt = {});

// θ (1 - γ̂_{g,y}) / γ̂_f when that is positive, nullopt otherwise (the caller
// then falls back to the smallest feasible budget). γ̂_f = 0 is rejected.
std::optional<double> select_gamma_delta_prime(double gamma_f_hat, double gamma_gy_hat, double theta = 0.95);

enum class PairMode { lazy, full };

struct PairOptions {
  PairMode mode = PairMode::lazy;
  // Pairs added per round at most (0 means N).
  std::size_t max_added_per_round = 0;
  lp::SolverOptions solver;
};

struct StageStats {
  std::size_t rounds = 0;
  std::size_t pair_rows = 0;  // pairs in the final working set
  std::size_t iterations = 0;
};

struct Stage1Result {
  Vector a_one;
  StageStats stats;
};

// Minimum-ℓ1 coefficients under (a) with bound residual_bound and, unless
// include_pairs is false, (b) with the fixed budget gamma_delta_prime.
// Raises InfeasibleError with remediation advice.
Stage1Result stage1_sparsify(const Regressor& reg, double epsilon_hat, double residual_bound,
                             double gamma_delta_prime, bool include_pairs = true, const PairOptions& opt = {});

// Indices with |a_i| > tau_rel * max(1, ||a||_∞); raises InfeasibleError
// ("dictionary cannot represent data") when nothing survives.
std::vector<std::size_t> extract_support(const Vector& a_one, double tau_rel = 1e-6);

struct Stage2Result {
  Vector a_hat;
  double gamma_delta_s = 0.0;
  StageStats stats;
};

// Minimum γ''_Δ >= 0 under (a) and (b), with a restricted to support. Among
// the minimisers the coefficients with the smallest l1 norm are returned;
// gamma_delta_s is the slope those coefficients actually need (at most 1e-9
// relative above the minimum).
Stage2Result stage2_tighten(const Regressor& reg, double epsilon_hat, double residual_bound,
                            const std::vector<std::size_t>& support, const PairOptions& opt = {});

// Stage 2 over the whole dictionary: the smallest budget for which stage 1
// is feasible. Raises InfeasibleError when (a) alone is infeasible.
double min_feasible_gamma_delta(const Regressor& reg, double epsilon_hat, double residual_bound,
                                const PairOptions& opt = {});

// Smallest γ >= 0 with |r_l - r_k| <= γ ||ỹ(l) - ỹ(k)||_∞ + 2ε̂ for every
// pair at a (infinite when two equal outputs violate the 2ε̂ band).
double implied_gamma_delta(const Regressor& reg, const Vector& a, double epsilon_hat);

struct ConstraintResiduals {
  double max_a_violation = 0.0;
  double max_b_violation = 0.0;
};

// Largest excess over the (a) and (b) bounds at a, checking every pair.
ConstraintResiduals constraint_residuals(const Regressor& reg, const Vector& a, double epsilon_hat,
                                         double residual_bound, double gamma_delta);

struct LearnerConfig {
  double margin = 0.02;
  double theta = 0.95;
  double tau_rel = 1e-6;
  estimation::RhoSetting rho;
  std::optional<double> epsilon_hat_override;
  // Plant constants: explicit values win, then estimates from the given
  // logs, then estimates from the learning data itself when it is a
  // trajectory.
  std::optional<double> gamma_f_override;
  std::optional<double> gamma_gy_override;
  std::optional<Dataset> gamma_f_data;
  std::optional<Dataset> gamma_gy_data;
  estimation::RhoSetting plant_rho;
  std::optional<double> gamma_delta_prime_override;
  // Diagnostic comparison mode: no pair constraints at all. Stage 1 runs
  // without them, no budget is chosen (source "none"), stage 2 is skipped
  // and a_hat = a_one; gamma_delta_s is then the smallest slope for which
  // a_hat satisfies every pair constraint.
  bool drop_pair_constraints = false;
  Interval output_range{-lp::kInf, lp::kInf};
  PairOptions pairs;
};

struct LearnedController {
  std::shared_ptr<const basis::Dictionary> dictionary;
  Vector a_hat;
  std::vector<std::size_t> support;
  double gamma_delta_s = 0.0;
  Vector a_one;
  estimation::EstimationReport report;
  ConstraintResiduals residuals;
  Interval output_range{-lp::kInf, lp::kInf};
  StageStats stage1;
  StageStats stage2;

  // Σ â_i φ_i(y) with y first clamped into the dictionary domain; the result
  // is clamped into output_range.
  double evaluate(std::span<const double> y) const;
  // Σ |â_i| L(φ_i).
  double lipschitz_bound() const;
};

LearnedController learn_controller(const Dataset& d, std::shared_ptr<const basis::Dictionary> dict,
                                   const LearnerConfig& config = {});

basis::Diagnosis diagnose_basis(const LearnedController& c, const basis::DiagnosisThresholds& t = {});

// ControllerInterface view of a learned controller.
class LearnedPolicy final : public ControllerInterface {
 public:
  explicit LearnedPolicy(std::shared_ptr<const LearnedController> c) : c_(std::move(c)) {}

  Interval output_range() const override { return c_->output_range; }
  double lipschitz_constant() const override { return c_->lipschitz_bound(); }

 protected:
  double raw_eval(std::span<const double> y) const override { return c_->evaluate(y); }

 private:
  std::shared_ptr<const LearnedController> c_;
};

// Versioned text format:
//
//   ctrlid-controller 1
//   dictionary = <path of the dictionary file, relative to the controller file>
//   size = <M>
//   support = <indices>
//   a_hat = <coefficients on the support, same order>
//   a_one = <M stage-1 coefficients>
//   gamma_delta_s, output_lo, output_hi
//   max_a_violation, max_b_violation
//   report.* keys (see write_report)
void write_controller(std::ostream& os, const LearnedController& c, const std::string& dictionary_path);
// dictionary_dir resolves a relative dictionary path.
LearnedController read_controller(std::istream& is, const std::string& dictionary_dir);

void write_report(std::ostream& os, const estimation::EstimationReport& r);

}  // namespace ctrlid::learner
