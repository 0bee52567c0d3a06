#pragma once

// Data-driven estimates of the quantities the learner needs: the noise bound
// ε̂ of a regression z̃ = 𝔣(w̃) + e from local output spread, and Lipschitz
// constants from noise-discounted secant slopes. The plant constants γ_f and
// γ_{g,y} are obtained by applying both to successor pairs of a trajectory.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ctrlid/core_types.hpp"

namespace ctrlid::estimation {

// Points (w̃(k), z̃(k)) of a generic regression sample.
struct ScatterData {
  std::vector<Vector> w;
  Vector z;

  std::size_t size() const { return z.size(); }
  // Throws DataError unless there are >= 2 points of one finite dimension.
  void validate() const;
};

enum class RhoPolicy {
  automatic,  // 1% of the largest pairwise ∞-distance of w
  fixed,      // caller-supplied radius; no retry
  scaled,     // automatic radius times sqrt(100 / max(N, 100)), shrinking with N
};

struct RhoSetting {
  RhoPolicy policy = RhoPolicy::automatic;
  double value = 0.0;  // radius for RhoPolicy::fixed

  static RhoSetting automatic() { return {}; }
  static RhoSetting fixed(double rho) { return {RhoPolicy::fixed, rho}; }
  static RhoSetting scaled() { return {RhoPolicy::scaled, 0.0}; }
};

std::string to_string(RhoPolicy p);
RhoPolicy rho_policy_from_string(const std::string& s);

struct NoiseBound {
  double epsilon_hat = 0.0;
  double rho_used = 0.0;
  std::size_t covered = 0;  // points with at least one neighbour within rho
  unsigned doublings = 0;
};

// Half the average local spread of z over neighbourhoods of radius rho. The
// neighbourhood of k is every other point within rho; the spread is taken
// over that set together with k itself. When no point has a neighbour the
// automatic and scaled policies double rho (at most kMaxDoublings times); a
// fixed rho raises EstimationError quoting the smallest pairwise distance.
NoiseBound estimate_noise_bound(const ScatterData& s, const RhoSetting& rho = {});

inline constexpr unsigned kMaxDoublings = 20;

// Largest noise-discounted secant slope (|Δz| - 2ε̂)/||Δw||_∞ over pairs with
// distinct w (pairs whose |Δz| does not exceed 2ε̂ count as 0). Raises
// EstimationError("no informative pairs") when all w coincide.
double estimate_lipschitz(const ScatterData& s, double epsilon_hat);

// Successor-pair regressions of a trajectory log, one per output component:
// w = ũ(k) (for γ_f) or ỹ(k) (for γ_{g,y}), z = component j of ỹ(k+1).
std::vector<ScatterData> input_to_next_output(const Dataset& d);
std::vector<ScatterData> output_to_next_output(const Dataset& d);

// Componentwise maximum of estimate_lipschitz over the regressions above,
// each evaluated with the shared epsilon_hat.
double estimate_gamma_f(const Dataset& d, double epsilon_hat);
double estimate_gamma_gy(const Dataset& d, double epsilon_hat);

struct GainEstimate {
  double gamma_hat = 0.0;
  NoiseBound noise;  // shared bound: the largest per-component estimate
};

// Estimates ε̂ from the same successor regressions, then the gain.
GainEstimate estimate_plant_gain_f(const Dataset& d, const RhoSetting& rho = {});
GainEstimate estimate_plant_gain_gy(const Dataset& d, const RhoSetting& rho = {});

// Everything estimated or chosen before the learning LPs run.
struct EstimationReport {
  double epsilon_hat = 0.0;
  double rho_used = 0.0;
  std::size_t covered_count = 0;
  std::optional<double> gamma_f_hat;
  std::optional<double> gamma_gy_hat;
  double alpha_min = 0.0;
  double alpha = 1.0;
  // Constraint (a) expressed as an absolute residual bound when ε̂ = 0.
  bool absolute_residual_mode = false;
  double residual_bound = 0.0;  // α ε̂, or t*(1 + margin) in absolute mode
  double gamma_delta_prime = 0.0;
  bool stability_margin_feasible = false;
  std::string gamma_delta_prime_source;  // "margin", "fallback", "override" or "none"
};

}  // namespace ctrlid::estimation
