#include "ctrlid/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctrlid/errors.hpp"

namespace ctrlid::simulation {

Trajectory simulate(const PlantInterface& plant, const ControllerInterface& ctrl, const Vector& y0,
                    const std::vector<Vector>& es, const std::vector<Vector>& ey, std::size_t T) {
  const Box& Y = plant.output_domain();
  if (y0.size() != Y.dim()) throw DomainError("initial condition has wrong dimension");
  if (auto bad = Y.first_violation(y0, 1e-12)) {
    throw DomainError("step 0: initial condition component " + std::to_string(*bad) + " outside the output domain");
  }
  if (es.size() < T) throw DomainError("disturbance sequence shorter than the horizon");
  Trajectory tr;
  tr.y.reserve(T + 1);
  tr.y.push_back(y0);
  Vector fb(y0.size());
  for (std::size_t t = 0; t < T; ++t) {
    const Vector& y = tr.y.back();
    for (std::size_t i = 0; i < y.size(); ++i) {
      fb[i] = y[i] + (t < ey.size() && !ey[t].empty() ? ey[t][i] : 0.0);
    }
    const double u = ctrl.eval(fb);
    if (!std::isfinite(u)) throw DomainError("step " + std::to_string(t) + ": controller returned a non-finite input");
    auto step = plant.step(y, u, es[t]);
    if (step.clamped) tr.clamp_events.push_back(t + 1);
    tr.u.push_back(plant.input_domain().clamp(u));
    tr.y.push_back(std::move(step.y));
  }
  return tr;
}

DeviationSeries deviation_run(const PlantInterface& plant, const ControllerInterface& kappa_ref,
                              const ControllerInterface& kappa_hat, const Vector& y0, const Vector& xi0,
                              const NoiseSequences& seqs, std::size_t T,
                              const stability::StabilityCertificate& cert) {
  if (!cert.certified) throw CertificateError("deviation run needs a certified loop");
  Vector yhat0(y0);
  for (std::size_t i = 0; i < y0.size(); ++i) yhat0[i] += xi0.at(i);
  DeviationSeries out;
  out.reference = simulate(plant, kappa_ref, y0, seqs.es, {}, T);
  out.learned = simulate(plant, kappa_hat, yhat0, seqs.es, seqs.ey, T);
  double es_norm = 0.0;
  for (std::size_t t = 0; t < T; ++t) es_norm = std::max(es_norm, inf_norm(seqs.es[t]));
  const double xi0_norm = inf_norm(xi0);
  const double y0_norm = inf_norm(y0);
  for (std::size_t t = 0; t <= T; ++t) {
    Vector xi(out.learned.y[t]);
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] -= out.reference.y[t][i];
    const double b = stability::deviation_bound(cert, xi0_norm, y0_norm, es_norm, t);
    if (!(inf_norm(xi) <= b + 1e-9)) out.dominated = false;
    out.xi.push_back(std::move(xi));
    out.bound.push_back(b);
  }
  return out;
}

GridError grid_error_lipschitz(const ControllerInterface& kappa_ref, const ControllerInterface& kappa_hat,
                               const std::vector<double>& grid) {
  if (grid.size() < 2) throw ParameterError("grid needs at least two points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ParameterError("grid must be strictly increasing");
  }
  GridError g;
  Vector delta(grid.size());
  std::size_t nearest = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y[1] = {grid[i]};
    delta[i] = kappa_ref.eval(y) - kappa_hat.eval(y);
    g.max_abs_error = std::max(g.max_abs_error, std::abs(delta[i]));
    if (std::abs(grid[i]) < std::abs(grid[nearest])) nearest = i;
    if (i > 0) {
      g.gamma_delta_measured =
          std::max(g.gamma_delta_measured, std::abs(delta[i] - delta[i - 1]) / (grid[i] - grid[i - 1]));
    }
  }
  g.delta0_abs = std::abs(delta[nearest]);
  return g;
}

GridError sampled_error_lipschitz(const ControllerInterface& kappa_ref, const ControllerInterface& kappa_hat,
                                  const std::vector<Vector>& points, std::size_t pairs, std::uint64_t seed) {
  if (points.size() < 2) throw ParameterError("need at least two points");
  GridError g;
  Vector delta(points.size());
  std::size_t nearest = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    delta[i] = kappa_ref.eval(points[i]) - kappa_hat.eval(points[i]);
    g.max_abs_error = std::max(g.max_abs_error, std::abs(delta[i]));
    if (inf_norm(points[i]) < inf_norm(points[nearest])) nearest = i;
  }
  g.delta0_abs = std::abs(delta[nearest]);
  Rng rng(seed);
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t a = rng.next() % points.size();
    const std::size_t b = rng.next() % points.size();
    const double d = inf_distance(points[a], points[b]);
    if (d > 0.0) g.gamma_delta_measured = std::max(g.gamma_delta_measured, std::abs(delta[a] - delta[b]) / d);
  }
  return g;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) throw ParameterError("grid needs >= 2 points and hi > lo");
  std::vector<double> g(points);
  const double h = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo + h * static_cast<double>(i);
  g.back() = hi;
  return g;
}

double example_kappa(double y) { return 2.0 * y * std::exp(-y * y) * std::cos(8.0 * y); }

namespace {

// Largest adjacent secant slope of example_kappa on 10^5 points of [-3, 3].
double example_kappa_lipschitz() {
  const auto grid = uniform_grid(-3.0, 3.0, 100000);
  double best = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    best = std::max(best, std::abs(example_kappa(grid[i]) - example_kappa(grid[i - 1])) / (grid[i] - grid[i - 1]));
  }
  return best;
}

}  // namespace

ExampleData generate_example_dataset(std::size_t N, std::uint64_t seed, double noise) {
  if (N < 2) throw ParameterError("N >= 2 required");
  if (!(noise >= 0.0)) throw ParameterError("noise amplitude must be >= 0");
  ExampleData out;
  out.data.n_y = 1;
  out.data.is_trajectory = false;
  Rng rng(seed);
  for (std::size_t k = 0; k < N; ++k) {
    const double y = rng.uniform(-3.0, 3.0);
    const double d = rng.uniform(-noise, noise);
    out.data.samples.push_back({static_cast<std::int64_t>(k), {y}, example_kappa(y) + d});
  }
  static const double lipschitz = example_kappa_lipschitz();
  out.kappa = std::make_shared<FunctionController>([](std::span<const double> y) { return example_kappa(y[0]); },
                                                   Interval{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()}, lipschitz);
  return out;
}

namespace {

// y⁺ = 0.5 tanh(y) + 0.5 u + e_s.
class TanhLoop final : public PlantInterface {
 public:
  const Box& output_domain() const override { return y_; }
  Interval input_domain() const override { return {-2.0, 2.0}; }
  const Box& disturbance_domain() const override { return e_; }
  PlantConstants declared_constants() const override {
    // sup |d/dy (0.5 tanh y - 0.2 y)| = 0.3 at y = 0 under κ = -0.4 y.
    return {0.5, 0.3, 1.0};
  }

 protected:
  Vector raw_step(std::span<const double> y, double u, std::span<const double> es) const override {
    return {0.5 * std::tanh(y[0]) + 0.5 * u + es[0]};
  }

 private:
  Box y_ = Box::uniform(1, -2.0, 2.0);
  Box e_ = Box::uniform(1, -0.01, 0.01);
};

}  // namespace

Benchmark benchmark_plant(const std::string& kind) {
  if (kind == "tanh-loop") {
    Benchmark b;
    b.plant = std::make_shared<TanhLoop>();
    b.kappa = std::make_shared<FunctionController>([](std::span<const double> y) { return -0.4 * y[0]; },
                                                   Interval{-2.0, 2.0}, 0.4);
    b.g0_norm = 0.0;
    return b;
  }
  throw ParameterError("unknown benchmark plant '" + kind + "' (known: tanh-loop)");
}

namespace {

double clip_eps(double eps, const Box& box) {
  double e = eps;
  for (std::size_t i = 0; i < box.dim(); ++i) e = std::min({e, -box.lower[i], box.upper[i]});
  return std::max(e, 0.0);
}

}  // namespace

Dataset closed_loop_log(const Benchmark& b, std::size_t episodes, std::size_t length, const LogNoise& noise,
                        std::uint64_t seed) {
  if (length < 2) throw ParameterError("episodes need at least two samples");
  const PlantInterface& plant = *b.plant;
  const Box& Y = plant.output_domain();
  const std::size_t ny = Y.dim();
  const double es_amp = clip_eps(noise.eps_s, plant.disturbance_domain());
  Dataset d;
  d.n_y = ny;
  d.is_trajectory = true;
  Rng rng(seed);
  std::int64_t t = 0;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    Vector y(ny);
    for (std::size_t i = 0; i < ny; ++i) y[i] = rng.uniform(Y.lower[i], Y.upper[i]);
    for (std::size_t s = 0; s < length; ++s) {
      Vector ym(y);
      for (double& v : ym) v += rng.uniform(-noise.eps_y, noise.eps_y);
      const double u = b.kappa->eval(y);
      const double um = u + rng.uniform(-noise.eps_u, noise.eps_u);
      Vector es(plant.disturbance_domain().dim());
      for (double& v : es) v = rng.uniform(-es_amp, es_amp);
      d.samples.push_back({t++, ym, um});
      y = plant.step(y, u, es).y;
    }
    ++t;  // gap: the next episode is not a successor
  }
  return d;
}

Dataset step_response_log(const Benchmark& b, std::size_t episodes, const LogNoise& noise, std::uint64_t seed) {
  const PlantInterface& plant = *b.plant;
  const std::size_t ny = plant.output_domain().dim();
  const Interval U = plant.input_domain();
  const double es_amp = clip_eps(noise.eps_s, plant.disturbance_domain());
  Dataset d;
  d.n_y = ny;
  d.is_trajectory = true;
  Rng rng(seed);
  std::int64_t t = 0;
  const Vector rest(ny, 0.0);
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    const double u = rng.uniform(U.lo, U.hi);
    Vector es(plant.disturbance_domain().dim());
    for (double& v : es) v = rng.uniform(-es_amp, es_amp);
    Vector y0m(rest);
    for (double& v : y0m) v += rng.uniform(-noise.eps_y, noise.eps_y);
    const double um = u + rng.uniform(-noise.eps_u, noise.eps_u);
    Vector y1 = plant.step(rest, u, es).y;
    for (double& v : y1) v += rng.uniform(-noise.eps_y, noise.eps_y);
    d.samples.push_back({t, y0m, um});
    d.samples.push_back({t + 1, y1, 0.0});
    t += 3;
  }
  return d;
}

}  // namespace ctrlid::simulation
