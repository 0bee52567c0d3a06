#pragma once

// Command layer behind the ctrlid executable: dataset CSV files, the run
// configuration shared by flags and config files, and the four subcommands.
// Everything here is callable in-process; tools/ctrlid.cpp only parses
// arguments and maps errors onto exit codes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ctrlid/basis.hpp"
#include "ctrlid/core_types.hpp"
#include "ctrlid/estimation.hpp"
#include "ctrlid/learner.hpp"
#include "ctrlid/simulation.hpp"
#include "ctrlid/stability.hpp"

namespace ctrlid::cli {

// Exit codes of the executable.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,         // unexpected failure
  kInput = 2,            // parse, validation, domain or parameter error
  kEstimation = 3,       // nothing to estimate from
  kInfeasible = 4,       // learning LP infeasible
  kSolver = 5,           // simplex stopped without a verdict
  kUncertified = 6,      // --require-cert on an uncertified loop
  kBoundViolation = 7,   // a simulated trajectory left its bound
};

int exit_code_for(const std::exception& e);

// Dataset CSV: optional '#' comment lines, of which "# trajectory=true" or
// "# trajectory=false" sets the kind (default false), then the header
// "t,y1,...,y<n_y>,u" and one row per sample. Raises DataError naming the
// line on malformed input.
Dataset read_dataset_csv(std::istream& is);
Dataset load_dataset(const std::filesystem::path& path);
// 17 significant digits, "C" number format.
void write_dataset_csv(std::ostream& os, const Dataset& d);
void save_dataset(const std::filesystem::path& path, const Dataset& d);

struct RunConfig {
  // Paths.
  std::string data;
  std::string dictionary_file;
  std::string controller;
  std::string out_dir;
  std::string gamma_f_data;
  std::string gamma_gy_data;

  // Dictionary built when no dictionary file is given. The domain defaults
  // to the bounding box of the data.
  std::string basis = "gaussian";
  double width = 100.0;
  unsigned degree = 3;
  unsigned harmonics = 5;
  std::vector<double> centers;
  double slope = 1.0;
  std::optional<double> domain_lo;
  std::optional<double> domain_hi;

  // Learner thresholds.
  double margin = 0.02;
  double theta = 0.95;
  double tau_rel = 1e-6;
  double alpha_small = 1.2;
  double sparsity_max = 0.3;
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  std::size_t max_iterations = 500000;
  std::string pricing = "dantzig";
  std::string rho_policy = "scaled";
  double rho = 0.0;
  std::string plant_rho_policy = "auto";
  double plant_rho = 0.0;
  std::optional<double> epsilon_hat;
  std::optional<double> gamma_f;
  std::optional<double> gamma_gy;
  std::optional<double> gamma_ge;
  std::optional<double> gamma_delta_prime;
  bool no_pair_constraints = false;
  double output_lo = -lp::kInf;
  double output_hi = lp::kInf;
  std::string gains = "both";  // estimate: both, f, gy or none

  // Simulation.
  std::string plant = "tanh-loop";
  bool reference = false;
  bool require_cert = false;
  std::size_t runs = 100;
  std::size_t horizon = 200;
  double eps_y = 0.01;
  double eps_s = 0.01;
  double xi0_max = 0.1;
  std::size_t cert_grid_points = 4001;

  // Example reproduction.
  std::uint64_t seed = 1;
  std::size_t sweep_min = 10;
  std::size_t sweep_max = 250;
  std::size_t sweep_step = 40;
  bool full_sweep = false;  // step 10
  std::vector<std::size_t> sweep;  // explicit list, overrides the range
  std::size_t fit_n = 170;
  std::size_t grid_points = 601;
  double example_noise = 0.05;
};

// Subcommands a key applies to (bit mask).
enum Command : unsigned {
  kEstimate = 1u,
  kLearn = 2u,
  kSimulate = 4u,
  kReproduce = 8u,
};

struct OptionInfo {
  std::string key;  // config key; the flag is --key with '_' spelled '-'
  std::string help;
  bool is_flag;     // boolean switch
  unsigned commands;
};

const std::vector<OptionInfo>& option_table();

// Parses and stores one value; raises ParameterError for unknown keys or
// unparsable values. Flags accept true/false/1/0.
void set_option(RunConfig& cfg, const std::string& key, const std::string& value);

// "key = value" lines; blank lines and '#' comments ignored. Unknown keys
// are rejected with the line number.
void apply_config_file(std::istream& is, RunConfig& cfg);

// Range checks on every threshold; raises ParameterError.
void validate(const RunConfig& cfg);

// cfg.out_dir, else $CTRLID_OUT_DIR, else fallback.
std::filesystem::path output_dir(const RunConfig& cfg, const std::string& fallback);

learner::LearnerConfig learner_config(const RunConfig& cfg);

basis::Dictionary build_dictionary(const RunConfig& cfg, const Dataset& d);

// ε̂ from the (ỹ, ũ) scatter, plus γ̂_f and γ̂_{g,y} from the data when it
// is a trajectory (as selected by cfg.gains).
estimation::EstimationReport estimate(const Dataset& d, const RunConfig& cfg);

// Certificate inputs for a learned controller on a benchmark: plant
// constants from the config or the plant's declaration, γ_Δ the larger of
// gamma_delta_s and the Lipschitz constant of κ - κ̂ measured over Y, γ_κ̂
// from the controller, Δ0 = |κ(0) - κ̂(0)|, ε_y = cfg.eps_y.
stability::CertificateInputs certificate_inputs(const simulation::Benchmark& b, const ControllerInterface& khat,
                                                double gamma_delta_s, const RunConfig& cfg);

struct SoundnessReport {
  std::size_t runs = 0;
  std::size_t steps = 0;  // checked (run, t) pairs per bound
  std::size_t y_violations = 0;
  std::size_t xi_violations = 0;
  double worst_y_ratio = 0.0;   // max ||ŷ(t)|| / bound
  double worst_xi_ratio = 0.0;  // max ||ξ(t)|| / bound
};

// cfg.runs seeded runs of cfg.horizon steps: y(0) uniform in Y shrunk by
// xi0_max, ξ(0) uniform in [-xi0_max, xi0_max]^n_y, e_s uniform in the
// plant's disturbance box scaled to eps_s, feedback noise uniform with
// amplitude eps_y. Checks ||ŷ(t)|| against learned_loop_bound and ||ξ(t)||
// against deviation_bound at every step. When csv is given, writes one row
// per (run, t).
SoundnessReport soundness_experiment(const simulation::Benchmark& b, const ControllerInterface& khat,
                                     const stability::StabilityCertificate& cert, const RunConfig& cfg,
                                     std::ostream* csv = nullptr);

struct SweepRow {
  std::size_t n = 0;
  double gamma_delta = 0.0;     // grid-measured, constrained run
  double gamma_delta_nc = 0.0;  // grid-measured, run without pair constraints
  double gamma_delta_s = 0.0;
  double gamma_delta_s_nc = 0.0;
  std::size_t support = 0;
  std::size_t support_nc = 0;
  double epsilon_hat = 0.0;
  double max_abs_error = 0.0;
};

struct ExampleReproduction {
  std::vector<SweepRow> rows;
  std::size_t fit_n = 0;
  Dataset fit_data;
  std::shared_ptr<const learner::LearnedController> fit;
  std::vector<double> grid;
  Vector kappa;
  Vector kappa_hat;
  simulation::GridError fit_error;
};

std::vector<std::size_t> sweep_sizes(const RunConfig& cfg);

// Progress lines go to log when given.
ExampleReproduction reproduce_example(const RunConfig& cfg, std::ostream* log = nullptr);

// sweep.csv (N, measured γ_Δ constrained and without pair constraints, ...),
// fit.csv (grid, κ, κ̂ at fit_n), data.csv (the fit_n samples) and
// summary.txt.
void write_example_outputs(const ExampleReproduction& r, const std::filesystem::path& dir);

// Subcommands. Progress and summaries go to log; the return value is the
// exit code for outcomes that are not errors (uncertified, bound violated).
int cmd_estimate(const RunConfig& cfg, std::ostream& log);
int cmd_learn(const RunConfig& cfg, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_reproduce_example(const RunConfig& cfg, std::ostream& log);

}  // namespace ctrlid::cli
