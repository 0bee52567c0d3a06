#include "ctrlid/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ctrlid/errors.hpp"

namespace ctrlid {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double inf_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double Interval::clamp(double v) const { return std::clamp(v, lo, hi); }

bool Interval::contains(double v, double tol) const { return v >= lo - tol && v <= hi + tol; }

Box Box::uniform(std::size_t dim, double lo, double hi) {
  return Box{Vector(dim, lo), Vector(dim, hi)};
}

bool Box::contains(std::span<const double> v, double tol) const {
  return !first_violation(v, tol).has_value();
}

std::optional<std::size_t> Box::first_violation(std::span<const double> v, double tol) const {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= lower[i] - tol && v[i] <= upper[i] + tol)) return i;
  }
  return std::nullopt;
}

Vector Box::clamp(std::span<const double> v) const {
  Vector out(v.begin(), v.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], lower[i], upper[i]);
  return out;
}

double Box::max_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    m = std::max({m, std::abs(lower[i]), std::abs(upper[i])});
  }
  return m;
}

std::vector<std::size_t> Dataset::successor_indices() const {
  std::vector<std::size_t> out;
  if (!is_trajectory) return out;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    if (samples[k + 1].t == samples[k].t + 1) out.push_back(k);
  }
  return out;
}

std::vector<Violation> validate_dataset(const Dataset& d) {
  std::vector<Violation> out;
  if (d.n_y == 0) out.push_back({std::nullopt, "n_y must be positive"});
  if (d.samples.size() < 2) out.push_back({std::nullopt, "N >= 2 required"});
  for (std::size_t k = 0; k < d.samples.size(); ++k) {
    const Sample& s = d.samples[k];
    if (s.y.size() != d.n_y) {
      std::ostringstream msg;
      msg << "y has length " << s.y.size() << ", expected n_y = " << d.n_y;
      out.push_back({k, msg.str()});
    }
    const bool finite = std::isfinite(s.u) &&
                        std::all_of(s.y.begin(), s.y.end(), [](double v) { return std::isfinite(v); });
    if (!finite) out.push_back({k, "non-finite value"});
    if (k > 0 && s.t <= d.samples[k - 1].t) out.push_back({k, "time index not strictly increasing"});
  }
  return out;
}

void require_valid(const Dataset& d) {
  const auto violations = validate_dataset(d);
  if (violations.empty()) return;
  const Violation& v = violations.front();
  std::ostringstream msg;
  msg << "invalid dataset";
  if (v.sample) msg << " at sample " << *v.sample;
  msg << ": " << v.rule;
  throw DataError(msg.str());
}

PlantInterface::StepResult PlantInterface::step(std::span<const double> y, double u,
                                                std::span<const double> es) const {
  const double u_applied = input_domain().clamp(u);
  Vector next = raw_step(y, u_applied, es);
  const Box& dom = output_domain();
  StepResult result{dom.clamp(next), false};
  for (std::size_t i = 0; i < next.size(); ++i) {
    if (result.y[i] != next[i]) result.clamped = true;
  }
  return result;
}

double ControllerInterface::eval(std::span<const double> y) const {
  return output_range().clamp(raw_eval(y));
}

FunctionController::FunctionController(Fn fn, Interval range, double lipschitz)
    : fn_(std::move(fn)), range_(range), lipschitz_(lipschitz) {
  if (!(range_.lo < range_.hi)) throw ParameterError("controller range requires lo < hi");
}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

void NoiseModel::validate() const {
  auto bad = [](double v) { return !(v >= 0.0) || !std::isfinite(v); };
  if (bad(eps_u)) throw ParameterError("noise amplitude eps_u must be >= 0");
  for (double v : eps_y) {
    if (bad(v)) throw ParameterError("noise amplitude eps_y must be >= 0");
  }
  for (double v : eps_s) {
    if (bad(v)) throw ParameterError("noise amplitude eps_s must be >= 0");
  }
}

NoiseSequences NoiseModel::generate(std::size_t horizon) const {
  validate();
  NoiseSequences out;
  out.es.assign(horizon, Vector(eps_s.size(), 0.0));
  out.ey.assign(horizon + 1, Vector(eps_y.size(), 0.0));
  out.eu.assign(horizon, 0.0);
  if (kind == NoiseKind::zero) return out;

  Rng rng(seed);
  for (auto& e : out.es) {
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = rng.uniform(-eps_s[i], eps_s[i]);
  }
  for (auto& e : out.ey) {
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = rng.uniform(-eps_y[i], eps_y[i]);
  }
  for (double& e : out.eu) e = rng.uniform(-eps_u, eps_u);
  return out;
}

}  // namespace ctrlid
