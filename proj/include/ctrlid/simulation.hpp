#pragma once

// Closed-loop simulation, deviation runs between a reference and a learned
// loop, grid measurements of the error function κ - κ̂, and the synthetic
// data sources used by the experiments.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ctrlid/core_types.hpp"
#include "ctrlid/stability.hpp"

namespace ctrlid::simulation {

struct Trajectory {
  std::vector<Vector> y;  // T + 1 states
  Vector u;               // T inputs
  std::vector<std::size_t> clamp_events;
};

// y(t+1) = plant.step(y(t), κ(y(t) + e_y(t)), e_s(t)) for t < T. Pass empty
// e_y entries (or a zero sequence) for exact feedback. Raises DomainError
// when y0 lies outside the plant's output domain or a sequence is short.
Trajectory simulate(const PlantInterface& plant, const ControllerInterface& ctrl, const Vector& y0,
                    const std::vector<Vector>& es, const std::vector<Vector>& ey, std::size_t T);

struct DeviationSeries {
  std::vector<Vector> xi;  // ŷ(t) - y(t)
  Vector bound;
  bool dominated = true;
  Trajectory reference;  // κ loop, exact feedback
  Trajectory learned;    // κ̂ loop, noisy feedback
};

// Runs the κ loop from y0 with exact feedback and the κ̂ loop from y0 + ξ0
// with noisy feedback on the same disturbance sequence, and compares ξ(t)
// against the deviation bound (es_norm is the largest ||e_s(t)||_∞ used).
DeviationSeries deviation_run(const PlantInterface& plant, const ControllerInterface& kappa_ref,
                              const ControllerInterface& kappa_hat, const Vector& y0, const Vector& xi0,
                              const NoiseSequences& seqs, std::size_t T, const stability::StabilityCertificate& cert);

struct GridError {
  double gamma_delta_measured = 0.0;
  double delta0_abs = 0.0;
  double max_abs_error = 0.0;
};

// Error function Δ = κ - κ̂ on an increasing 1-D grid: the largest secant
// slope between adjacent points (which equals the largest over all pairs in
// one dimension), |Δ| at the grid point nearest 0, and max |Δ|.
GridError grid_error_lipschitz(const ControllerInterface& kappa_ref, const ControllerInterface& kappa_hat,
                               const std::vector<double>& grid);

// Multi-dimensional variant: secants over `pairs` uniformly drawn pairs of
// the given points (seeded), |Δ| at the point nearest the origin, max |Δ|.
GridError sampled_error_lipschitz(const ControllerInterface& kappa_ref, const ControllerInterface& kappa_hat,
                                  const std::vector<Vector>& points, std::size_t pairs, std::uint64_t seed);

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

// Reference controller of the example: u = 2y e^{-y^2} cos(8y).
double example_kappa(double y);

struct ExampleData {
  Dataset data;
  std::shared_ptr<const ControllerInterface> kappa;
};

// N scatter samples: for each k in turn, ỹ(k) ~ U[-3, 3] then d(k) ~
// U[-noise, noise], and ũ(k) = κ(ỹ(k)) + d(k). Not a trajectory.
ExampleData generate_example_dataset(std::size_t N, std::uint64_t seed, double noise = 0.05);

struct Benchmark {
  std::shared_ptr<const PlantInterface> plant;
  std::shared_ptr<const ControllerInterface> kappa;
  double g0_norm = 0.0;  // ||g(0, 0)||_∞ of the reference loop
};

// Registered kinds: "tanh-loop".
Benchmark benchmark_plant(const std::string& kind);

struct LogNoise {
  double eps_s = 0.01;  // clipped to the plant's disturbance box
  double eps_y = 0.01;
  double eps_u = 0.01;
};

// Closed-loop log of `episodes` independent runs of `length` samples, each
// from y(0) ~ U(Y), under the benchmark's reference controller with exact
// feedback. Logged values are ỹ = y + e_y and ũ = u + e_u. Episodes are
// separated by a gap of one in the time index. Per episode the draws are
// y(0), then for each sample e_y, e_u, e_s in that order.
Dataset closed_loop_log(const Benchmark& b, std::size_t episodes, std::size_t length, const LogNoise& noise,
                        std::uint64_t seed);

// Input-identification log: each episode starts at rest (y = 0), applies
// u ~ U(U) for one step, and logs (ỹ(0), ũ) and (ỹ(1), 0) as two consecutive
// samples; episodes are separated by a time gap. Draws per episode: u, e_s,
// e_y(0), e_u, e_y(1).
Dataset step_response_log(const Benchmark& b, std::size_t episodes, const LogNoise& noise, std::uint64_t seed);

}  // namespace ctrlid::simulation
