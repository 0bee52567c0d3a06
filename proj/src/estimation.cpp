#include "ctrlid/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctrlid/errors.hpp"
#include "ctrlid/text_format.hpp"

namespace ctrlid::estimation {

void ScatterData::validate() const {
  if (w.size() != z.size()) throw DataError("scatter data has mismatched w and z lengths");
  if (z.size() < 2) throw DataError("N >= 2 required");
  const std::size_t dim = w.front().size();
  if (dim == 0) throw DataError("scatter data has empty w vectors");
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (w[k].size() != dim) throw DataError("point " + std::to_string(k) + " has inconsistent w dimension");
    if (!std::isfinite(z[k])) throw DataError("point " + std::to_string(k) + " has non-finite z");
    for (double v : w[k]) {
      if (!std::isfinite(v)) throw DataError("point " + std::to_string(k) + " has non-finite w");
    }
  }
}

std::string to_string(RhoPolicy p) {
  switch (p) {
    case RhoPolicy::automatic: return "auto";
    case RhoPolicy::fixed: return "fixed";
    case RhoPolicy::scaled: return "scaled";
  }
  return "unknown";
}

RhoPolicy rho_policy_from_string(const std::string& s) {
  if (s == "auto") return RhoPolicy::automatic;
  if (s == "fixed") return RhoPolicy::fixed;
  if (s == "scaled") return RhoPolicy::scaled;
  throw ParameterError("unknown rho policy '" + s + "' (expected auto, fixed or scaled)");
}

namespace {

double max_pairwise_distance(const ScatterData& s) {
  double d = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (std::size_t l = k + 1; l < s.size(); ++l) d = std::max(d, inf_distance(s.w[k], s.w[l]));
  }
  return d;
}

double min_pairwise_distance(const ScatterData& s) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (std::size_t l = k + 1; l < s.size(); ++l) d = std::min(d, inf_distance(s.w[k], s.w[l]));
  }
  return d;
}

struct Spread {
  double sum = 0.0;
  std::size_t covered = 0;
};

Spread local_spread(const ScatterData& s, double rho) {
  Spread out;
  const std::size_t n = s.size();
  for (std::size_t k = 0; k < n; ++k) {
    double lo = s.z[k];
    double hi = s.z[k];
    bool any = false;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == k || inf_distance(s.w[k], s.w[l]) > rho) continue;
      any = true;
      lo = std::min(lo, s.z[l]);
      hi = std::max(hi, s.z[l]);
    }
    if (!any) continue;
    out.sum += hi - lo;
    ++out.covered;
  }
  return out;
}

}  // namespace

NoiseBound estimate_noise_bound(const ScatterData& s, const RhoSetting& setting) {
  s.validate();
  double rho = 0.0;
  switch (setting.policy) {
    case RhoPolicy::fixed:
      if (!(setting.value > 0.0) || !std::isfinite(setting.value)) throw ParameterError("rho must be positive");
      rho = setting.value;
      break;
    case RhoPolicy::automatic:
    case RhoPolicy::scaled: {
      const double diameter = max_pairwise_distance(s);
      // All points coincide: any radius covers everything.
      rho = diameter > 0.0 ? 0.01 * diameter : 1.0;
      if (setting.policy == RhoPolicy::scaled) {
        rho *= std::sqrt(100.0 / std::max<double>(static_cast<double>(s.size()), 100.0));
      }
      break;
    }
  }

  NoiseBound nb;
  for (unsigned attempt = 0;; ++attempt) {
    const Spread sp = local_spread(s, rho);
    if (sp.covered > 0) {
      nb.epsilon_hat = sp.sum / (2.0 * static_cast<double>(sp.covered));
      nb.rho_used = rho;
      nb.covered = sp.covered;
      nb.doublings = attempt;
      return nb;
    }
    if (setting.policy == RhoPolicy::fixed) {
      throw EstimationError("rho too small: no point has a neighbour within " + text::format_double(rho) +
                            "; smallest pairwise distance is " + text::format_double(min_pairwise_distance(s)));
    }
    if (attempt == kMaxDoublings) {
      throw EstimationError("no point has a neighbour within " + text::format_double(rho) + " after " +
                            std::to_string(kMaxDoublings) + " doublings of rho");
    }
    rho *= 2.0;
  }
}

double estimate_lipschitz(const ScatterData& s, double epsilon_hat) {
  s.validate();
  if (!(epsilon_hat >= 0.0)) throw ParameterError("epsilon_hat must be >= 0");
  double best = 0.0;
  bool informative = false;
  const double band = 2.0 * epsilon_hat;
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (std::size_t l = k + 1; l < s.size(); ++l) {
      const double dw = inf_distance(s.w[k], s.w[l]);
      if (dw == 0.0) continue;
      informative = true;
      const double dz = std::abs(s.z[k] - s.z[l]);
      if (dz > band) best = std::max(best, (dz - band) / dw);
    }
  }
  if (!informative) throw EstimationError("no informative pairs: all regressor values coincide");
  return best;
}

namespace {

std::vector<ScatterData> successor_regressions(const Dataset& d, bool input_regressor) {
  require_valid(d);
  if (!d.is_trajectory) throw DataError("plant constants need a trajectory dataset");
  const auto succ = d.successor_indices();
  if (succ.size() < 2) throw DataError("N >= 2 successor pairs required");
  std::vector<ScatterData> out(d.n_y);
  for (std::size_t k : succ) {
    const Vector w = input_regressor ? Vector{d.samples[k].u} : d.samples[k].y;
    for (std::size_t j = 0; j < d.n_y; ++j) {
      out[j].w.push_back(w);
      out[j].z.push_back(d.samples[k + 1].y[j]);
    }
  }
  return out;
}

double componentwise_gain(const std::vector<ScatterData>& regs, double epsilon_hat) {
  double g = 0.0;
  for (const ScatterData& s : regs) g = std::max(g, estimate_lipschitz(s, epsilon_hat));
  return g;
}

GainEstimate gain_with_noise(const std::vector<ScatterData>& regs, const RhoSetting& rho) {
  GainEstimate out;
  for (const ScatterData& s : regs) {
    const NoiseBound nb = estimate_noise_bound(s, rho);
    if (nb.epsilon_hat >= out.noise.epsilon_hat) out.noise = nb;
  }
  out.gamma_hat = componentwise_gain(regs, out.noise.epsilon_hat);
  return out;
}

}  // namespace

std::vector<ScatterData> input_to_next_output(const Dataset& d) { return successor_regressions(d, true); }
std::vector<ScatterData> output_to_next_output(const Dataset& d) { return successor_regressions(d, false); }

double estimate_gamma_f(const Dataset& d, double epsilon_hat) {
  return componentwise_gain(input_to_next_output(d), epsilon_hat);
}

double estimate_gamma_gy(const Dataset& d, double epsilon_hat) {
  return componentwise_gain(output_to_next_output(d), epsilon_hat);
}

GainEstimate estimate_plant_gain_f(const Dataset& d, const RhoSetting& rho) {
  return gain_with_noise(input_to_next_output(d), rho);
}

GainEstimate estimate_plant_gain_gy(const Dataset& d, const RhoSetting& rho) {
  return gain_with_noise(output_to_next_output(d), rho);
}

}  // namespace ctrlid::estimation
