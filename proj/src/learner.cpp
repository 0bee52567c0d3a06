#include "ctrlid/learner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <utility>

#include "ctrlid/errors.hpp"
#include "ctrlid/text_format.hpp"

namespace ctrlid::learner {

Regressor build_regressor(const Dataset& d, const basis::Dictionary& dict) {
  // A single sample is a valid regression problem; only estimation needs two.
  if (d.samples.empty()) throw DataError("invalid dataset: no samples");
  for (const Violation& v : validate_dataset(d)) {
    if (v.rule == "N >= 2 required") continue;
    throw DataError("invalid dataset" + (v.sample ? " at sample " + std::to_string(*v.sample) : std::string()) + ": " + v.rule);
  }
  if (d.n_y != dict.dim()) throw DataError("dataset n_y does not match the dictionary dimension");
  Regressor reg;
  reg.rows = d.size();
  reg.cols = dict.size();
  reg.phi.resize(reg.rows * reg.cols);
  for (std::size_t k = 0; k < reg.rows; ++k) {
    try {
      dict.evaluate_row(d.samples[k].y, std::span<double>(reg.phi.data() + k * reg.cols, reg.cols));
    } catch (const DomainError& e) {
      throw DomainError("sample " + std::to_string(k) + ": " + e.what());
    }
    reg.u.push_back(d.samples[k].u);
    reg.y.push_back(d.samples[k].y);
  }
  return reg;
}

AlphaChoice select_alpha(const Regressor& reg, double epsilon_hat, double margin, const lp::SolverOptions& opt) {
  if (!(epsilon_hat >= 0.0)) throw ParameterError("epsilon_hat must be >= 0");
  if (!(margin >= 0.0)) throw ParameterError("alpha margin must be >= 0");
  AlphaChoice c;
  c.t_star = lp::chebyshev_residual(reg.phi, reg.rows, reg.cols, reg.u, opt).t_star;
  if (epsilon_hat == 0.0) {
    c.absolute_mode = true;
    c.alpha = 1.0;
    c.alpha_min = c.t_star > 0.0 ? lp::kInf : 0.0;
    c.residual_bound = c.t_star * (1.0 + margin);
    return c;
  }
  c.alpha_min = c.t_star / epsilon_hat;
  c.alpha = std::max(1.0, c.alpha_min) * (1.0 + margin);
  c.residual_bound = c.alpha * epsilon_hat;
  return c;
}

std::optional<double> select_gamma_delta_prime(double gamma_f_hat, double gamma_gy_hat, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ParameterError("theta must lie in (0, 1)");
  if (!(gamma_f_hat > 0.0)) throw ParameterError("degenerate plant estimate: gamma_f_hat must be positive");
  const double budget = (1.0 - gamma_gy_hat) / gamma_f_hat;
  if (!(budget > 0.0)) return std::nullopt;
  return theta * budget;
}

namespace {

using Pair = std::pair<std::size_t, std::size_t>;  // (l, k), l < k

// One of the learning LPs with its pair rows generated on demand.
struct PairProblem {
  const Regressor& reg;
  std::vector<std::size_t> vars;  // dictionary indices that are free variables
  double residual_bound = 0.0;
  double two_eps = 0.0;
  bool include_pairs = true;
  bool gamma_variable = false;  // stage 2: γ is the last variable, minimised
  double gamma_fixed = 0.0;     // stage 1: the budget
  const PairOptions& opt;
};

struct PairSolution {
  Vector a;  // full length M
  double gamma = 0.0;
  StageStats stats;
};

Vector residual(const Regressor& reg, const Vector& a) {
  Vector r(reg.u);
  for (std::size_t k = 0; k < reg.rows; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < reg.cols; ++i) {
      if (a[i] != 0.0) s += reg.at(k, i) * a[i];
    }
    r[k] -= s;
  }
  return r;
}

// Pair rows in the order they were added, so that each round only appends
// rows to the previous round's program.
struct WorkingPairs {
  std::vector<Pair> order;
  std::set<Pair> members;

  void insert(const Pair& p) {
    if (members.insert(p).second) order.push_back(p);
  }
  std::size_t size() const { return order.size(); }
};

WorkingPairs initial_pairs(const Regressor& reg, PairMode mode) {
  WorkingPairs w;
  const std::size_t n = reg.rows;
  if (mode == PairMode::full) {
    for (std::size_t l = 0; l < n; ++l) {
      for (std::size_t k = l + 1; k < n; ++k) w.insert({l, k});
    }
    return w;
  }
  if (n == 0 || reg.y.front().size() != 1) return w;
  // Neighbours in output order carry the tightest pairs in one dimension.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return reg.y[a][0] < reg.y[b][0]; });
  for (std::size_t i = 0; i + 1 < n; ++i) w.insert({std::min(idx[i], idx[i + 1]), std::max(idx[i], idx[i + 1])});
  return w;
}

lp::LinearProgram assemble(const PairProblem& p, const std::vector<Pair>& pairs) {
  const std::size_t nv = p.vars.size() + (p.gamma_variable ? 1 : 0);
  lp::LinearProgram prog(nv);
  std::vector<std::size_t> cols(nv);
  std::iota(cols.begin(), cols.end(), 0);
  Vector row(nv, 0.0);
  const std::size_t gi = p.vars.size();

  for (std::size_t k = 0; k < p.reg.rows; ++k) {
    for (std::size_t j = 0; j < p.vars.size(); ++j) row[j] = p.reg.at(k, p.vars[j]);
    if (p.gamma_variable) row[gi] = 0.0;
    prog.add_row(cols, row, p.reg.u[k] + p.residual_bound);
    for (std::size_t j = 0; j < p.vars.size(); ++j) row[j] = -row[j];
    prog.add_row(cols, row, -p.reg.u[k] + p.residual_bound);
  }
  for (const auto& [l, k] : pairs) {
    const double d = inf_distance(p.reg.y[l], p.reg.y[k]);
    const double du = p.reg.u[l] - p.reg.u[k];
    for (std::size_t j = 0; j < p.vars.size(); ++j) row[j] = p.reg.at(k, p.vars[j]) - p.reg.at(l, p.vars[j]);
    double slack = p.two_eps;
    if (p.gamma_variable) {
      row[gi] = -d;
    } else {
      slack += p.gamma_fixed * d;
    }
    prog.add_row(cols, row, slack - du);
    for (std::size_t j = 0; j < p.vars.size(); ++j) row[j] = -row[j];
    prog.add_row(cols, row, slack + du);
  }
  if (p.gamma_variable) {
    prog.objective()[gi] = 1.0;
    prog.lower()[gi] = 0.0;
  }
  return prog;
}

// Pairs whose (b) bound is exceeded at (a, gamma), most violated first.
std::vector<Pair> violated_pairs(const PairProblem& p, const Vector& a, double gamma, double tol,
                                 const std::set<Pair>& have) {
  const Vector r = residual(p.reg, a);
  std::vector<std::pair<double, Pair>> found;
  for (std::size_t l = 0; l < p.reg.rows; ++l) {
    for (std::size_t k = l + 1; k < p.reg.rows; ++k) {
      const double excess = std::abs(r[l] - r[k]) - (gamma * inf_distance(p.reg.y[l], p.reg.y[k]) + p.two_eps);
      if (excess > tol && !have.count({l, k})) found.push_back({excess, {l, k}});
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<Pair> out;
  out.reserve(found.size());
  for (const auto& f : found) out.push_back(f.second);
  return out;
}

PairSolution solve_pairs(const PairProblem& p, const char* what) {
  WorkingPairs working = p.include_pairs ? initial_pairs(p.reg, p.opt.mode) : WorkingPairs{};
  const std::size_t max_add = p.opt.max_added_per_round ? p.opt.max_added_per_round : std::max<std::size_t>(p.reg.rows, 1);
  // Pairs are added when the bound is exceeded by more than the solver's own
  // slack tolerance, so the final point satisfies every pair to that level.
  const double add_tol = p.opt.solver.pricing_tol;
  PairSolution out;
  out.a.assign(p.reg.cols, 0.0);
  lp::Basis basis;

  while (true) {
    ++out.stats.rounds;
    lp::LinearProgram prog = assemble(p, working.order);
    const bool l1 = !p.gamma_variable;
    if (l1) prog = lp::reformulate_l1_min(prog);
    // Each round appends rows, so the previous optimal basis is a valid start.
    const lp::Solution s = lp::solve(prog, p.opt.solver, basis.empty() ? nullptr : &basis);
    basis = s.basis;
    out.stats.iterations += s.iterations;
    if (s.status == lp::Status::infeasible) {
      throw InfeasibleError(std::string(what) + " is infeasible");
    }
    if (s.status != lp::Status::optimal) {
      throw SolverError(std::string(what) + ": solver ended with status " + lp::to_string(s.status) +
                        (s.message.empty() ? "" : " (" + s.message + ")"));
    }
    const Vector x = l1 ? lp::l1_recover(s.x, p.vars.size()) : s.x;
    std::fill(out.a.begin(), out.a.end(), 0.0);
    for (std::size_t j = 0; j < p.vars.size(); ++j) out.a[p.vars[j]] = x[j];
    // gamma >= 0 holds only to the solver tolerance.
    out.gamma = p.gamma_variable ? std::max(0.0, s.x[p.vars.size()]) : p.gamma_fixed;
    if (!p.include_pairs) break;
    const auto extra = violated_pairs(p, out.a, out.gamma, add_tol, working.members);
    if (extra.empty()) break;
    for (std::size_t i = 0; i < extra.size() && i < max_add; ++i) working.insert(extra[i]);
  }
  out.stats.pair_rows = working.size();
  return out;
}

std::vector<std::size_t> all_indices(std::size_t m) {
  std::vector<std::size_t> v(m);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

Stage1Result stage1_sparsify(const Regressor& reg, double epsilon_hat, double residual_bound, double gamma_delta_prime,
                             bool include_pairs, const PairOptions& opt) {
  if (!(gamma_delta_prime >= 0.0)) throw ParameterError("gamma_delta_prime must be >= 0");
  PairProblem p{reg, all_indices(reg.cols), residual_bound, 2.0 * epsilon_hat, include_pairs, false,
                gamma_delta_prime, opt};
  try {
    PairSolution s = solve_pairs(p, "stage 1");
    return {std::move(s.a), s.stats};
  } catch (const InfeasibleError&) {
    throw InfeasibleError(
        "stage 1 is infeasible: choose a larger gamma_delta_prime or alpha, or collect a larger number of data");
  }
}

std::vector<std::size_t> extract_support(const Vector& a_one, double tau_rel) {
  double amax = 0.0;
  for (double v : a_one) amax = std::max(amax, std::abs(v));
  const double cut = tau_rel * std::max(1.0, amax);
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < a_one.size(); ++i) {
    if (std::abs(a_one[i]) > cut) s.push_back(i);
  }
  if (s.empty()) throw InfeasibleError("dictionary cannot represent data: stage-1 coefficients are all zero");
  return s;
}

Stage2Result stage2_tighten(const Regressor& reg, double epsilon_hat, double residual_bound,
                            const std::vector<std::size_t>& support, const PairOptions& opt) {
  if (support.empty()) throw ParameterError("stage 2 needs a non-empty support");
  PairProblem p{reg, support, residual_bound, 2.0 * epsilon_hat, true, true, 0.0, opt};
  PairSolution s = solve_pairs(p, "stage 2");
  // The minimiser is rarely unique. Among coefficient vectors that keep the
  // slope at its minimum, take the one with the smallest l1 norm.
  const double slope = s.gamma + 1e-9 * std::max(1.0, s.gamma);
  PairProblem q{reg, support, residual_bound, 2.0 * epsilon_hat, true, false, slope, opt};
  PairSolution t = solve_pairs(q, "stage 2 tie-break");
  StageStats stats = s.stats;
  stats.rounds += t.stats.rounds;
  stats.iterations += t.stats.iterations;
  stats.pair_rows = std::max(stats.pair_rows, t.stats.pair_rows);
  const double gamma = std::max(s.gamma, implied_gamma_delta(reg, t.a, epsilon_hat));
  return {std::move(t.a), gamma, stats};
}

double min_feasible_gamma_delta(const Regressor& reg, double epsilon_hat, double residual_bound,
                                const PairOptions& opt) {
  PairProblem p{reg, all_indices(reg.cols), residual_bound, 2.0 * epsilon_hat, true, true, 0.0, opt};
  try {
    return solve_pairs(p, "minimum budget").gamma;
  } catch (const InfeasibleError&) {
    throw InfeasibleError("constraint (a) is infeasible at this alpha: choose a larger alpha");
  }
}

double implied_gamma_delta(const Regressor& reg, const Vector& a, double epsilon_hat) {
  const Vector r = residual(reg, a);
  double g = 0.0;
  for (std::size_t k = 0; k < reg.rows; ++k) {
    for (std::size_t l = 0; l < k; ++l) {
      const double excess = std::abs(r[l] - r[k]) - 2.0 * epsilon_hat;
      if (excess <= 0.0) continue;
      const double d = inf_distance(reg.y[l], reg.y[k]);
      g = d > 0.0 ? std::max(g, excess / d) : lp::kInf;
    }
  }
  return g;
}

ConstraintResiduals constraint_residuals(const Regressor& reg, const Vector& a, double epsilon_hat,
                                         double residual_bound, double gamma_delta) {
  ConstraintResiduals out;
  const Vector r = residual(reg, a);
  for (std::size_t k = 0; k < reg.rows; ++k) {
    out.max_a_violation = std::max(out.max_a_violation, std::abs(r[k]) - residual_bound);
    for (std::size_t l = 0; l < k; ++l) {
      const double bound = gamma_delta * inf_distance(reg.y[l], reg.y[k]) + 2.0 * epsilon_hat;
      out.max_b_violation = std::max(out.max_b_violation, std::abs(r[l] - r[k]) - bound);
    }
  }
  return out;
}

namespace {

template <class F>
auto tagged(const char* stage, F&& f) -> decltype(f()) {
  const std::string tag = std::string(stage) + ": ";
  try {
    return f();
  } catch (const DataError& e) {
    throw DataError(tag + e.what());
  } catch (const DomainError& e) {
    throw DomainError(tag + e.what());
  } catch (const ParameterError& e) {
    throw ParameterError(tag + e.what());
  } catch (const EstimationError& e) {
    throw EstimationError(tag + e.what());
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(tag + e.what());
  } catch (const SolverError& e) {
    throw SolverError(tag + e.what());
  }
}

}  // namespace

LearnedController learn_controller(const Dataset& d, std::shared_ptr<const basis::Dictionary> dict,
                                   const LearnerConfig& cfg) {
  if (!dict) throw ParameterError("learn_controller needs a dictionary");
  LearnedController out;
  out.dictionary = dict;
  out.output_range = cfg.output_range;
  auto& rep = out.report;

  const Regressor reg = tagged("regressor", [&] { return build_regressor(d, *dict); });

  tagged("noise bound", [&] {
    if (cfg.epsilon_hat_override) {
      if (!(*cfg.epsilon_hat_override >= 0.0)) throw ParameterError("epsilon_hat override must be >= 0");
      rep.epsilon_hat = *cfg.epsilon_hat_override;
      return;
    }
    estimation::ScatterData s;
    for (const Sample& smp : d.samples) {
      s.w.push_back(smp.y);
      s.z.push_back(smp.u);
    }
    const auto nb = estimation::estimate_noise_bound(s, cfg.rho);
    rep.epsilon_hat = nb.epsilon_hat;
    rep.rho_used = nb.rho_used;
    rep.covered_count = nb.covered;
  });

  tagged("plant constants", [&] {
    if (cfg.gamma_f_override) {
      rep.gamma_f_hat = *cfg.gamma_f_override;
    } else if (cfg.gamma_f_data) {
      rep.gamma_f_hat = estimation::estimate_plant_gain_f(*cfg.gamma_f_data, cfg.plant_rho).gamma_hat;
    } else if (d.is_trajectory) {
      rep.gamma_f_hat = estimation::estimate_plant_gain_f(d, cfg.plant_rho).gamma_hat;
    }
    if (cfg.gamma_gy_override) {
      rep.gamma_gy_hat = *cfg.gamma_gy_override;
    } else if (cfg.gamma_gy_data) {
      rep.gamma_gy_hat = estimation::estimate_plant_gain_gy(*cfg.gamma_gy_data, cfg.plant_rho).gamma_hat;
    } else if (d.is_trajectory) {
      rep.gamma_gy_hat = estimation::estimate_plant_gain_gy(d, cfg.plant_rho).gamma_hat;
    }
  });

  const AlphaChoice ac = tagged("alpha", [&] { return select_alpha(reg, rep.epsilon_hat, cfg.margin, cfg.pairs.solver); });
  rep.alpha = ac.alpha;
  rep.alpha_min = ac.alpha_min;
  rep.absolute_residual_mode = ac.absolute_mode;
  rep.residual_bound = ac.residual_bound;

  tagged("budget", [&] {
    if (cfg.drop_pair_constraints) {
      rep.gamma_delta_prime = 0.0;
      rep.gamma_delta_prime_source = "none";
      return;
    }
    std::optional<double> budget;
    if (rep.gamma_f_hat && rep.gamma_gy_hat) {
      budget = select_gamma_delta_prime(*rep.gamma_f_hat, *rep.gamma_gy_hat, cfg.theta);
    }
    rep.stability_margin_feasible = budget.has_value();
    if (cfg.gamma_delta_prime_override) {
      if (!(*cfg.gamma_delta_prime_override >= 0.0)) throw ParameterError("gamma_delta_prime must be >= 0");
      rep.gamma_delta_prime = *cfg.gamma_delta_prime_override;
      rep.gamma_delta_prime_source = "override";
    } else if (budget) {
      rep.gamma_delta_prime = *budget;
      rep.gamma_delta_prime_source = "margin";
    } else {
      rep.gamma_delta_prime =
          (1.0 + cfg.margin) * min_feasible_gamma_delta(reg, rep.epsilon_hat, rep.residual_bound, cfg.pairs);
      rep.gamma_delta_prime_source = "fallback";
    }
  });

  const Stage1Result s1 = tagged("stage 1", [&] {
    return stage1_sparsify(reg, rep.epsilon_hat, rep.residual_bound, rep.gamma_delta_prime,
                           !cfg.drop_pair_constraints, cfg.pairs);
  });
  out.a_one = s1.a_one;
  out.stage1 = s1.stats;
  out.support = tagged("support", [&] { return extract_support(out.a_one, cfg.tau_rel); });

  if (cfg.drop_pair_constraints) {
    out.a_hat.assign(out.a_one.size(), 0.0);
    for (std::size_t i : out.support) out.a_hat[i] = out.a_one[i];
    out.gamma_delta_s = implied_gamma_delta(reg, out.a_hat, rep.epsilon_hat);
  } else {
    const Stage2Result s2 = tagged(
        "stage 2", [&] { return stage2_tighten(reg, rep.epsilon_hat, rep.residual_bound, out.support, cfg.pairs); });
    out.a_hat = s2.a_hat;
    out.gamma_delta_s = s2.gamma_delta_s;
    out.stage2 = s2.stats;
  }
  out.residuals = constraint_residuals(reg, out.a_hat, rep.epsilon_hat, rep.residual_bound, out.gamma_delta_s);
  return out;
}

double LearnedController::evaluate(std::span<const double> y) const {
  const Vector yc = dictionary->domain().clamp(y);
  double s = 0.0;
  for (std::size_t i : support) s += a_hat[i] * dictionary->value(i, yc);
  return output_range.clamp(s);
}

double LearnedController::lipschitz_bound() const {
  double g = 0.0;
  for (std::size_t i : support) g += std::abs(a_hat[i]) * dictionary->lipschitz(i);
  return g;
}

basis::Diagnosis diagnose_basis(const LearnedController& c, const basis::DiagnosisThresholds& t) {
  std::size_t nz = 0;
  for (std::size_t i : c.support) {
    if (c.a_hat[i] != 0.0) ++nz;
  }
  return basis::diagnose(c.report.alpha, nz, c.a_hat.size(), t);
}

namespace {

std::string optional_number(const std::optional<double>& v) { return v ? text::format_double(*v) : "none"; }

std::optional<double> read_optional(text::Reader& r, const std::string& key) {
  const std::string s = r.get_string(key);
  if (s == "none") return std::nullopt;
  return text::parse_double(s);
}

void put_report(text::Writer& w, const estimation::EstimationReport& r) {
  w.put("epsilon_hat", r.epsilon_hat);
  w.put("rho_used", r.rho_used);
  w.put("covered_count", r.covered_count);
  w.put("gamma_f_hat", optional_number(r.gamma_f_hat));
  w.put("gamma_gy_hat", optional_number(r.gamma_gy_hat));
  w.put("alpha_min", r.alpha_min);
  w.put("alpha", r.alpha);
  w.put("absolute_residual_mode", r.absolute_residual_mode);
  w.put("residual_bound", r.residual_bound);
  w.put("gamma_delta_prime", r.gamma_delta_prime);
  w.put("gamma_delta_prime_source", r.gamma_delta_prime_source.empty() ? "none" : r.gamma_delta_prime_source);
  w.put("stability_margin_feasible", r.stability_margin_feasible);
}

estimation::EstimationReport get_report(text::Reader& rd) {
  estimation::EstimationReport r;
  r.epsilon_hat = rd.get_double("epsilon_hat");
  r.rho_used = rd.get_double("rho_used");
  r.covered_count = rd.get_size("covered_count");
  r.gamma_f_hat = read_optional(rd, "gamma_f_hat");
  r.gamma_gy_hat = read_optional(rd, "gamma_gy_hat");
  r.alpha_min = rd.get_double("alpha_min");
  r.alpha = rd.get_double("alpha");
  r.absolute_residual_mode = rd.get_bool("absolute_residual_mode");
  r.residual_bound = rd.get_double("residual_bound");
  r.gamma_delta_prime = rd.get_double("gamma_delta_prime");
  r.gamma_delta_prime_source = rd.get_string("gamma_delta_prime_source");
  r.stability_margin_feasible = rd.get_bool("stability_margin_feasible");
  return r;
}

}  // namespace

void write_report(std::ostream& os, const estimation::EstimationReport& r) {
  text::Writer w(os, "ctrlid-report", 1);
  put_report(w, r);
}

void write_controller(std::ostream& os, const LearnedController& c, const std::string& dictionary_path) {
  text::Writer w(os, "ctrlid-controller", 1);
  w.put("dictionary", dictionary_path);
  w.put("size", c.a_hat.size());
  Vector support(c.support.begin(), c.support.end());
  Vector coef;
  for (std::size_t i : c.support) coef.push_back(c.a_hat[i]);
  w.put("support", support);
  w.put("a_hat", coef);
  w.put("a_one", c.a_one);
  w.put("gamma_delta_s", c.gamma_delta_s);
  w.put("output_lo", c.output_range.lo);
  w.put("output_hi", c.output_range.hi);
  w.put("max_a_violation", c.residuals.max_a_violation);
  w.put("max_b_violation", c.residuals.max_b_violation);
  put_report(w, c.report);
}

LearnedController read_controller(std::istream& is, const std::string& dictionary_dir) {
  text::Reader r(is, "ctrlid-controller", 1);
  LearnedController c;
  std::filesystem::path path = r.get_string("dictionary");
  if (path.is_relative()) path = std::filesystem::path(dictionary_dir) / path;
  std::ifstream dict_in(path);
  if (!dict_in) throw DataError("cannot open dictionary file " + path.string());
  c.dictionary = std::make_shared<const basis::Dictionary>(basis::read_dictionary(dict_in));
  const std::size_t m = r.get_size("size");
  if (m != c.dictionary->size()) throw DataError("controller size does not match its dictionary");
  const Vector support = r.get_vector("support");
  const Vector coef = r.get_vector("a_hat");
  if (support.size() != coef.size()) throw DataError("support and a_hat lengths differ");
  c.a_hat.assign(m, 0.0);
  for (std::size_t j = 0; j < support.size(); ++j) {
    const double idx = support[j];
    if (idx < 0 || idx >= static_cast<double>(m) || idx != std::floor(idx)) throw DataError("bad support index");
    c.support.push_back(static_cast<std::size_t>(idx));
    c.a_hat[c.support.back()] = coef[j];
  }
  c.a_one = r.get_vector("a_one");
  if (c.a_one.size() != m) throw DataError("a_one has wrong length");
  c.gamma_delta_s = r.get_double("gamma_delta_s");
  c.output_range.lo = r.get_double("output_lo");
  c.output_range.hi = r.get_double("output_hi");
  c.residuals.max_a_violation = r.get_double("max_a_violation");
  c.residuals.max_b_violation = r.get_double("max_b_violation");
  c.report = get_report(r);
  r.expect_end();
  return c;
}

}  // namespace ctrlid::learner
