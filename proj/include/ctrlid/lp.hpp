#pragma once

// Linear programs in inequality form
//
//   minimize c'x  subject to  A x <= b,  lower <= x <= upper
//
// and a deterministic reference solver. The solver runs a two-phase revised
// simplex with Bland's rule on the dual standard form
//
//   minimize b'y  subject to  A'y = -c,  y >= 0
//
// (finite variable bounds are first turned into rows). The simplex multipliers
// of an optimal dual basis are an optimal primal vertex, so x is read off the
// final basis directly. Basis solves use a dense LU with a product-form eta
// file that is refactored periodically.

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctrlid/core_types.hpp"

namespace ctrlid::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class LinearProgram {
 public:
  LinearProgram() = default;
  explicit LinearProgram(std::size_t n);

  std::size_t num_vars() const { return n_; }
  std::size_t num_rows() const { return rhs_.size(); }

  Vector& objective() { return c_; }
  const Vector& objective() const { return c_; }
  Vector& lower() { return lower_; }
  const Vector& lower() const { return lower_; }
  Vector& upper() { return upper_; }
  const Vector& upper() const { return upper_; }

  // Appends sum_k values[k] x[cols[k]] <= rhs. Zero coefficients are dropped.
  void add_row(std::span<const std::size_t> cols, std::span<const double> values, double rhs);
  // Dense convenience: coefficients for all n variables.
  void add_dense_row(std::span<const double> coeffs, double rhs);

  std::span<const std::size_t> row_cols(std::size_t r) const;
  std::span<const double> row_values(std::size_t r) const;
  double rhs(std::size_t r) const { return rhs_[r]; }
  double row_dot(std::size_t r, std::span<const double> x) const;

  // Throws ParameterError on non-finite coefficients or inconsistent sizes.
  void validate() const;

  // Largest violation of any row or bound at x (0 when feasible).
  double max_violation(std::span<const double> x) const;

 private:
  std::size_t n_ = 0;
  Vector c_;
  Vector lower_;
  Vector upper_;
  std::vector<std::size_t> row_start_{0};
  std::vector<std::size_t> cols_;
  Vector values_;
  Vector rhs_;
};

enum class Status { optimal, infeasible, unbounded, solver_failure };

std::string to_string(Status s);

enum class Pricing {
  bland,    // lowest-index improving column; finite in exact arithmetic
  dantzig,  // most negative reduced cost, falling back to Bland after a run of degenerate pivots
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  double pivot_tol = 1e-10;
  // Reduced-cost threshold; equals the largest primal row slack violation
  // tolerated at termination, so it must stay below feas_tol.
  double pricing_tol = 1e-9;
  std::size_t max_iterations = 500000;
  std::size_t refactor_interval = 64;
  Pricing pricing = Pricing::dantzig;
};

// One basic constraint of an optimal vertex: an explicit row, a variable's
// upper or lower bound, or an internal artificial on a redundant equation.
struct BasisEntry {
  enum class Kind { row, upper, lower, artificial };
  Kind kind = Kind::row;
  std::size_t index = 0;
  bool operator==(const BasisEntry&) const = default;
};
using Basis = std::vector<BasisEntry>;

struct Solution {
  Status status = Status::solver_failure;
  Vector x;
  double objective = 0.0;
  double max_violation = 0.0;
  std::size_t iterations = 0;
  std::string message;
  Basis basis;  // set when optimal
};

// `start`, when given, is the basis of an optimal solve of a program with the
// same variables, bounds and objective whose rows are a prefix of p's rows
// (a cutting-plane round). The solve then continues from that vertex; an
// unusable start falls back to a cold solve.
Solution solve(const LinearProgram& p, const SolverOptions& opt = {}, const Basis* start = nullptr);

// min ||a||_1 over {a : G a <= h}, given as an LP over a whose objective and
// bounds are ignored. The result has 2M variables x = (a+, a-) >= 0 with unit
// cost; recover a with l1_recover.
LinearProgram reformulate_l1_min(const LinearProgram& constraints_on_a);
Vector l1_recover(std::span<const double> x, std::size_t m);

struct ChebyshevFit {
  double t_star = 0.0;
  Vector a_star;
};

// min_a ||u - Phi a||_inf for a row-major N x M matrix.
ChebyshevFit chebyshev_residual(std::span<const double> phi, std::size_t rows, std::size_t cols,
                                std::span<const double> u, const SolverOptions& opt = {});

// Plain-text dump for cross-checking with other solvers:
//
//   lp <n> <m>
//   c <n numbers>
//   lower <n numbers>          (-inf allowed)
//   upper <n numbers>          (inf allowed)
//   row <rhs> <col>:<value> ...   (m lines, meaning sum value*x[col] <= rhs)
void dump(std::ostream& os, const LinearProgram& p);

}  // namespace ctrlid::lp
