#pragma once

// Shared domain records for closed-loop controller identification: datasets
// of noisy (y, u) measurements, plant and controller interfaces, bounded
// noise models and the seeded random generator every experiment draws from.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ctrlid {

using Vector = std::vector<double>;

double inf_norm(std::span<const double> v);
double inf_distance(std::span<const double> a, std::span<const double> b);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double clamp(double v) const;
  bool contains(double v, double tol = 0.0) const;
};

// Axis-aligned box, one interval per component.
struct Box {
  Vector lower;
  Vector upper;

  static Box uniform(std::size_t dim, double lo, double hi);

  std::size_t dim() const { return lower.size(); }
  bool contains(std::span<const double> v, double tol = 0.0) const;
  // Index of the first component outside the box (with tolerance), if any.
  std::optional<std::size_t> first_violation(std::span<const double> v, double tol = 0.0) const;
  Vector clamp(std::span<const double> v) const;
  // Largest ∞-norm of any point of the box.
  double max_norm() const;
};

// One logged instant: measured output ỹ(t) and measured input ũ(t).
struct Sample {
  std::int64_t t = 0;
  Vector y;
  double u = 0.0;
};

// Time-indexed closed-loop log. When is_trajectory is set, a sample whose time
// index is exactly one past its predecessor's is that predecessor's temporal
// successor; larger gaps separate independent episodes.
struct Dataset {
  std::size_t n_y = 1;
  std::vector<Sample> samples;
  bool is_trajectory = false;

  std::size_t size() const { return samples.size(); }
  // Indices k such that sample k+1 is the successor of sample k.
  std::vector<std::size_t> successor_indices() const;
};

struct Violation {
  std::optional<std::size_t> sample;
  std::string rule;
};

// Empty iff every Dataset invariant holds.
std::vector<Violation> validate_dataset(const Dataset& d);

// Throws DataError carrying the first violation, if any.
void require_valid(const Dataset& d);

// Lipschitz constants a synthetic plant may declare: γ_f (w.r.t. u),
// γ_{g,y} and γ_{g,e} of the loop closed by its reference controller.
struct PlantConstants {
  std::optional<double> gamma_f;
  std::optional<double> gamma_gy;
  std::optional<double> gamma_ge;
};

// Single-step map y(t+1) = f(y(t), u(t), e_s(t)).
class PlantInterface {
 public:
  struct StepResult {
    Vector y;
    bool clamped = false;
  };

  virtual ~PlantInterface() = default;

  virtual const Box& output_domain() const = 0;
  virtual Interval input_domain() const = 0;
  virtual const Box& disturbance_domain() const = 0;
  virtual PlantConstants declared_constants() const { return {}; }

  // u is clamped into U before the map is applied; the result is clamped into
  // Y and the flag reports whether that changed anything.
  StepResult step(std::span<const double> y, double u, std::span<const double> es) const;

 protected:
  virtual Vector raw_step(std::span<const double> y, double u,
                          std::span<const double> es) const = 0;
};

// Static feedback u = κ(y); outputs are clamped into U.
class ControllerInterface {
 public:
  virtual ~ControllerInterface() = default;

  double eval(std::span<const double> y) const;
  virtual Interval output_range() const = 0;
  virtual double lipschitz_constant() const = 0;

 protected:
  virtual double raw_eval(std::span<const double> y) const = 0;
};

// Controller backed by a plain callable, used for reference laws.
class FunctionController final : public ControllerInterface {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  FunctionController(Fn fn, Interval range, double lipschitz);

  Interval output_range() const override { return range_; }
  double lipschitz_constant() const override { return lipschitz_; }

 protected:
  double raw_eval(std::span<const double> y) const override { return fn_(y); }

 private:
  Fn fn_;
  Interval range_;
  double lipschitz_;
};

// 64-bit Mersenne Twister (std::mt19937_64, whose output sequence the C++
// standard fixes) with a portable mapping to doubles: the top 53 bits of each
// draw scaled by 2^-53. Distribution objects from <random> are avoided because
// their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

enum class NoiseKind { uniform_box, zero };

// Realized noise for a horizon of T steps: e_s(t), e_u(t) for t < T and
// e_y(t) for t ≤ T.
struct NoiseSequences {
  std::vector<Vector> es;
  std::vector<Vector> ey;
  Vector eu;
};

struct NoiseModel {
  NoiseKind kind = NoiseKind::uniform_box;
  double eps_u = 0.0;
  Vector eps_y;
  Vector eps_s;
  std::uint64_t seed = 0;

  void validate() const;

  // Draw order: all e_s(t), then all e_y(t), then all e_u(t), each component
  // in index order, uniform on [-ε, ε].
  NoiseSequences generate(std::size_t horizon) const;
};

}  // namespace ctrlid
