#include "ctrlid/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ctrlid/errors.hpp"
#include "ctrlid/text_format.hpp"

namespace ctrlid::cli {
namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const ParameterError*>(&e)) {
    return kInput;
  }
  if (dynamic_cast<const EstimationError*>(&e)) return kEstimation;
  if (dynamic_cast<const InfeasibleError*>(&e)) return kInfeasible;
  if (dynamic_cast<const SolverError*>(&e)) return kSolver;
  if (dynamic_cast<const CertificateError*>(&e)) return kUncertified;
  return kInternal;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string line_tag(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

Dataset read_dataset_csv(std::istream& is) {
  Dataset d;
  std::string raw;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(is, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s[0] == '#') {
      std::string body = trim(s.substr(1));
      body.erase(std::remove(body.begin(), body.end(), ' '), body.end());
      if (body.rfind("trajectory=", 0) == 0) {
        const std::string v = body.substr(11);
        if (v == "true") {
          d.is_trajectory = true;
        } else if (v == "false") {
          d.is_trajectory = false;
        } else {
          throw DataError(line_tag(line) + "trajectory must be true or false");
        }
      }
      continue;
    }
    const auto fields = split(s, ',');
    if (!have_header) {
      if (fields.size() < 3 || fields.front() != "t" || fields.back() != "u") {
        throw DataError(line_tag(line) + "expected header t,y1,...,u");
      }
      for (std::size_t i = 1; i + 1 < fields.size(); ++i) {
        if (fields[i] != "y" + std::to_string(i)) {
          throw DataError(line_tag(line) + "header column " + std::to_string(i + 1) + " should be y" +
                          std::to_string(i));
        }
      }
      d.n_y = fields.size() - 2;
      have_header = true;
      continue;
    }
    if (fields.size() != d.n_y + 2) {
      throw DataError(line_tag(line) + "expected " + std::to_string(d.n_y + 2) + " fields, found " +
                      std::to_string(fields.size()));
    }
    Sample smp;
    const std::string& ts = fields[0];
    const auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), smp.t);
    if (ec != std::errc() || ptr != ts.data() + ts.size()) {
      throw DataError(line_tag(line) + "time index '" + ts + "' is not an integer");
    }
    try {
      for (std::size_t i = 0; i < d.n_y; ++i) smp.y.push_back(text::parse_double(fields[i + 1]));
      smp.u = text::parse_double(fields.back());
    } catch (const DataError& e) {
      throw DataError(line_tag(line) + e.what());
    }
    d.samples.push_back(std::move(smp));
  }
  if (!have_header) throw DataError("empty dataset file: no header line");
  if (d.samples.empty()) throw DataError("empty dataset file: no samples");
  require_valid(d);
  return d;
}

Dataset load_dataset(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open dataset file " + path.string());
  try {
    return read_dataset_csv(is);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_dataset_csv(std::ostream& os, const Dataset& d) {
  os << "# trajectory=" << (d.is_trajectory ? "true" : "false") << '\n';
  os << 't';
  for (std::size_t i = 1; i <= d.n_y; ++i) os << ",y" << i;
  os << ",u\n";
  for (const Sample& s : d.samples) {
    os << s.t;
    for (double v : s.y) os << ',' << text::format_double(v);
    os << ',' << text::format_double(s.u) << '\n';
  }
}

void save_dataset(const fs::path& path, const Dataset& d) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  write_dataset_csv(os, d);
}

const std::vector<OptionInfo>& option_table() {
  constexpr unsigned E = kEstimate, L = kLearn, S = kSimulate, R = kReproduce;
  static const std::vector<OptionInfo> table = {
      {"data", "dataset CSV (t,y1..,u)", false, E | L},
      {"dictionary_file", "dictionary file; when absent a dictionary is built from the basis options", false, L},
      {"controller", "controller file written by learn", false, S},
      {"out_dir", "output directory (default $CTRLID_OUT_DIR)", false, E | L | S | R},
      {"gamma_f_data", "trajectory CSV used to estimate gamma_f", false, L},
      {"gamma_gy_data", "trajectory CSV used to estimate gamma_gy", false, L},
      {"basis", "gaussian, polynomial, sigmoid or trigonometric", false, L},
      {"width", "gaussian width (exp(-width (y - c)^2))", false, L | R},
      {"degree", "polynomial total degree", false, L},
      {"harmonics", "trigonometric harmonics", false, L},
      {"centers", "sigmoid centres, comma separated", false, L},
      {"slope", "sigmoid slope", false, L},
      {"domain_lo", "lower edge of the dictionary domain in every coordinate", false, L},
      {"domain_hi", "upper edge of the dictionary domain in every coordinate", false, L},
      {"margin", "relative margin on alpha and on the fallback budget", false, L | R},
      {"theta", "fraction of the stability margin used as budget, in (0,1)", false, L | R},
      {"tau_rel", "relative support threshold", false, L | R},
      {"alpha_small", "basis diagnosis: largest accepted alpha", false, L},
      {"sparsity_max", "basis diagnosis: largest accepted support fraction", false, L},
      {"feas_tol", "LP feasibility tolerance", false, L | R},
      {"opt_tol", "LP optimality tolerance", false, L | R},
      {"max_iterations", "LP iteration limit", false, L | R},
      {"pricing", "LP pricing: dantzig or bland", false, L | R},
      {"rho_policy", "neighbourhood radius for the noise bound: auto, fixed or scaled", false, E | L | R},
      {"rho", "radius for rho_policy = fixed", false, E | L | R},
      {"plant_rho_policy", "radius policy for plant gain estimates", false, E | L},
      {"plant_rho", "radius for plant_rho_policy = fixed", false, E | L},
      {"epsilon_hat", "use this noise bound instead of estimating it", false, L},
      {"gamma_f", "plant input gain (overrides estimates and declarations)", false, L | S},
      {"gamma_gy", "closed-loop output gain (overrides estimates and declarations)", false, L | S},
      {"gamma_ge", "closed-loop disturbance gain (overrides the declaration)", false, S},
      {"gamma_delta_prime", "stage-1 budget (overrides the automatic choice)", false, L},
      {"no_pair_constraints", "diagnostic run without the pairwise constraints", true, L},
      {"output_lo", "lower clamp of the learned controller", false, L},
      {"output_hi", "upper clamp of the learned controller", false, L},
      {"gains", "plant gains to estimate: both, f, gy or none", false, E},
      {"plant", "benchmark plant (tanh-loop)", false, S},
      {"reference", "use the reference controller in both loops, with exact feedback and no initial deviation", true, S},
      {"require_cert", "fail when the loop is not certified", true, S},
      {"runs", "number of seeded runs", false, S},
      {"horizon", "steps per run", false, S},
      {"eps_y", "feedback noise amplitude", false, S},
      {"eps_s", "plant disturbance amplitude (clipped to the plant's box)", false, S},
      {"xi0_max", "largest initial deviation per coordinate", false, S},
      {"cert_grid_points", "grid points for measuring the error Lipschitz constant", false, S},
      {"seed", "random seed", false, S | R},
      {"sweep_min", "smallest N of the sweep", false, R},
      {"sweep_max", "largest N of the sweep", false, R},
      {"sweep_step", "N step of the sweep", false, R},
      {"full_sweep", "use step 10", true, R},
      {"sweep", "explicit N list, comma separated", false, R},
      {"fit_n", "N of the fitted controller written to fit.csv", false, R},
      {"grid_points", "evaluation grid points on [-3, 3]", false, R},
      {"example_noise", "noise amplitude of the example data", false, R},
  };
  return table;
}

namespace {

double to_double(const std::string& key, const std::string& v) {
  try {
    return text::parse_double(v);
  } catch (const DataError&) {
    throw ParameterError(key + ": '" + v + "' is not a number");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParameterError(key + ": '" + v + "' is not a non-negative integer");
  }
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) { return static_cast<std::size_t>(to_u64(key, v)); }

unsigned to_unsigned(const std::string& key, const std::string& v) {
  const std::uint64_t x = to_u64(key, v);
  if (x > 1000000) throw ParameterError(key + " is too large");
  return static_cast<unsigned>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ParameterError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> list_items(const std::string& v) {
  std::string s = v;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  auto str = [](std::string RunConfig::*m) {
    return Setter([m](RunConfig& c, const std::string&, const std::string& v) { c.*m = trim(v); });
  };
  auto dbl = [](double RunConfig::*m) {
    return Setter([m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_double(k, v); });
  };
  auto opt = [](std::optional<double> RunConfig::*m) {
    return Setter([m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_double(k, v); });
  };
  auto size = [](std::size_t RunConfig::*m) {
    return Setter([m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_size(k, v); });
  };
  auto uns = [](unsigned RunConfig::*m) {
    return Setter([m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_unsigned(k, v); });
  };
  auto flag = [](bool RunConfig::*m) {
    return Setter([m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_bool(k, v); });
  };
  static const std::map<std::string, Setter> table = {
      {"data", str(&RunConfig::data)},
      {"dictionary_file", str(&RunConfig::dictionary_file)},
      {"controller", str(&RunConfig::controller)},
      {"out_dir", str(&RunConfig::out_dir)},
      {"gamma_f_data", str(&RunConfig::gamma_f_data)},
      {"gamma_gy_data", str(&RunConfig::gamma_gy_data)},
      {"basis", str(&RunConfig::basis)},
      {"width", dbl(&RunConfig::width)},
      {"degree", uns(&RunConfig::degree)},
      {"harmonics", uns(&RunConfig::harmonics)},
      {"centers",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.centers.clear();
         for (const auto& item : list_items(v)) c.centers.push_back(to_double(k, item));
       }},
      {"slope", dbl(&RunConfig::slope)},
      {"domain_lo", opt(&RunConfig::domain_lo)},
      {"domain_hi", opt(&RunConfig::domain_hi)},
      {"margin", dbl(&RunConfig::margin)},
      {"theta", dbl(&RunConfig::theta)},
      {"tau_rel", dbl(&RunConfig::tau_rel)},
      {"alpha_small", dbl(&RunConfig::alpha_small)},
      {"sparsity_max", dbl(&RunConfig::sparsity_max)},
      {"feas_tol", dbl(&RunConfig::feas_tol)},
      {"opt_tol", dbl(&RunConfig::opt_tol)},
      {"max_iterations", size(&RunConfig::max_iterations)},
      {"pricing", str(&RunConfig::pricing)},
      {"rho_policy", str(&RunConfig::rho_policy)},
      {"rho", dbl(&RunConfig::rho)},
      {"plant_rho_policy", str(&RunConfig::plant_rho_policy)},
      {"plant_rho", dbl(&RunConfig::plant_rho)},
      {"epsilon_hat", opt(&RunConfig::epsilon_hat)},
      {"gamma_f", opt(&RunConfig::gamma_f)},
      {"gamma_gy", opt(&RunConfig::gamma_gy)},
      {"gamma_ge", opt(&RunConfig::gamma_ge)},
      {"gamma_delta_prime", opt(&RunConfig::gamma_delta_prime)},
      {"no_pair_constraints", flag(&RunConfig::no_pair_constraints)},
      {"output_lo", dbl(&RunConfig::output_lo)},
      {"output_hi", dbl(&RunConfig::output_hi)},
      {"gains", str(&RunConfig::gains)},
      {"plant", str(&RunConfig::plant)},
      {"reference", flag(&RunConfig::reference)},
      {"require_cert", flag(&RunConfig::require_cert)},
      {"runs", size(&RunConfig::runs)},
      {"horizon", size(&RunConfig::horizon)},
      {"eps_y", dbl(&RunConfig::eps_y)},
      {"eps_s", dbl(&RunConfig::eps_s)},
      {"xi0_max", dbl(&RunConfig::xi0_max)},
      {"cert_grid_points", size(&RunConfig::cert_grid_points)},
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); }},
      {"sweep_min", size(&RunConfig::sweep_min)},
      {"sweep_max", size(&RunConfig::sweep_max)},
      {"sweep_step", size(&RunConfig::sweep_step)},
      {"full_sweep", flag(&RunConfig::full_sweep)},
      {"sweep",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.sweep.clear();
         for (const auto& item : list_items(v)) c.sweep.push_back(to_size(k, item));
       }},
      {"fit_n", size(&RunConfig::fit_n)},
      {"grid_points", size(&RunConfig::grid_points)},
      {"example_noise", dbl(&RunConfig::example_noise)},
  };
  return table;
}

}  // namespace

void set_option(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& t = setters();
  const auto it = t.find(key);
  if (it == t.end()) throw ParameterError("unknown option '" + key + "'");
  it->second(cfg, key, value);
}

void apply_config_file(std::istream& is, RunConfig& cfg) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParameterError(line_tag(line) + "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!setters().count(key)) throw ParameterError(line_tag(line) + "unknown config key '" + key + "'");
    try {
      set_option(cfg, key, value);
    } catch (const ParameterError& e) {
      throw ParameterError(line_tag(line) + e.what());
    }
  }
}

void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw ParameterError(msg);
  };
  check(c.margin >= 0.0 && c.margin <= 1.0, "margin must lie in [0, 1]");
  check(c.theta > 0.0 && c.theta < 1.0, "theta must lie in (0, 1)");
  check(c.tau_rel > 0.0 && c.tau_rel < 1.0, "tau_rel must lie in (0, 1)");
  check(c.alpha_small >= 1.0, "alpha_small must be >= 1");
  check(c.sparsity_max > 0.0 && c.sparsity_max <= 1.0, "sparsity_max must lie in (0, 1]");
  check(c.feas_tol > 0.0 && c.feas_tol <= 1e-3, "feas_tol must lie in (0, 1e-3]");
  check(c.opt_tol > 0.0 && c.opt_tol <= 1e-3, "opt_tol must lie in (0, 1e-3]");
  check(c.max_iterations >= 1, "max_iterations must be >= 1");
  check(c.pricing == "dantzig" || c.pricing == "bland", "pricing must be dantzig or bland");
  estimation::rho_policy_from_string(c.rho_policy);
  estimation::rho_policy_from_string(c.plant_rho_policy);
  check(c.rho_policy != "fixed" || c.rho > 0.0, "rho must be > 0 with rho_policy = fixed");
  check(c.plant_rho_policy != "fixed" || c.plant_rho > 0.0, "plant_rho must be > 0 with plant_rho_policy = fixed");
  check(!c.epsilon_hat || *c.epsilon_hat >= 0.0, "epsilon_hat must be >= 0");
  check(!c.gamma_f || *c.gamma_f > 0.0, "gamma_f must be > 0");
  check(!c.gamma_gy || *c.gamma_gy >= 0.0, "gamma_gy must be >= 0");
  check(!c.gamma_ge || *c.gamma_ge >= 0.0, "gamma_ge must be >= 0");
  check(!c.gamma_delta_prime || *c.gamma_delta_prime >= 0.0, "gamma_delta_prime must be >= 0");
  check(c.output_lo <= c.output_hi, "output_lo must not exceed output_hi");
  check(c.gains == "both" || c.gains == "f" || c.gains == "gy" || c.gains == "none",
        "gains must be both, f, gy or none");
  basis::family_from_string(c.basis);
  check(c.width > 0.0, "width must be > 0");
  check(c.slope > 0.0, "slope must be > 0");
  check(!c.domain_lo || !c.domain_hi || *c.domain_lo < *c.domain_hi, "domain_lo must be below domain_hi");
  check(c.runs >= 1, "runs must be >= 1");
  check(c.horizon >= 1, "horizon must be >= 1");
  check(c.eps_y >= 0.0 && std::isfinite(c.eps_y), "eps_y must be >= 0");
  check(c.eps_s >= 0.0 && std::isfinite(c.eps_s), "eps_s must be >= 0");
  check(c.xi0_max >= 0.0 && std::isfinite(c.xi0_max), "xi0_max must be >= 0");
  check(c.cert_grid_points >= 2, "cert_grid_points must be >= 2");
  check(c.sweep_min >= 2 && c.sweep_min <= c.sweep_max, "need 2 <= sweep_min <= sweep_max");
  check(c.sweep_step >= 1, "sweep_step must be >= 1");
  for (std::size_t n : c.sweep) check(n >= 2, "sweep sizes must be >= 2");
  check(c.fit_n >= 2, "fit_n must be >= 2");
  check(c.grid_points >= 2, "grid_points must be >= 2");
  check(c.example_noise >= 0.0, "example_noise must be >= 0");
}

fs::path output_dir(const RunConfig& cfg, const std::string& fallback) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("CTRLID_OUT_DIR"); env && *env) return env;
  return fallback;
}

namespace {

estimation::RhoSetting rho_setting(const std::string& policy, double value) {
  return {estimation::rho_policy_from_string(policy), value};
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw DataError("cannot write " + p.string());
  return os;
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

}  // namespace

learner::LearnerConfig learner_config(const RunConfig& c) {
  learner::LearnerConfig l;
  l.margin = c.margin;
  l.theta = c.theta;
  l.tau_rel = c.tau_rel;
  l.rho = rho_setting(c.rho_policy, c.rho);
  l.plant_rho = rho_setting(c.plant_rho_policy, c.plant_rho);
  l.epsilon_hat_override = c.epsilon_hat;
  l.gamma_f_override = c.gamma_f;
  l.gamma_gy_override = c.gamma_gy;
  if (!c.gamma_f_data.empty()) l.gamma_f_data = load_dataset(c.gamma_f_data);
  if (!c.gamma_gy_data.empty()) l.gamma_gy_data = load_dataset(c.gamma_gy_data);
  l.gamma_delta_prime_override = c.gamma_delta_prime;
  l.drop_pair_constraints = c.no_pair_constraints;
  l.output_range = {c.output_lo, c.output_hi};
  l.pairs.solver.feas_tol = c.feas_tol;
  l.pairs.solver.opt_tol = c.opt_tol;
  l.pairs.solver.pricing_tol = std::min(l.pairs.solver.pricing_tol, 0.1 * c.feas_tol);
  l.pairs.solver.max_iterations = c.max_iterations;
  l.pairs.solver.pricing = c.pricing == "bland" ? lp::Pricing::bland : lp::Pricing::dantzig;
  return l;
}

basis::Dictionary build_dictionary(const RunConfig& c, const Dataset& d) {
  Box dom;
  if (c.domain_lo && c.domain_hi) {
    dom = Box::uniform(d.n_y, *c.domain_lo, *c.domain_hi);
  } else {
    dom.lower.assign(d.n_y, lp::kInf);
    dom.upper.assign(d.n_y, -lp::kInf);
    for (const Sample& s : d.samples) {
      for (std::size_t i = 0; i < d.n_y; ++i) {
        dom.lower[i] = std::min(dom.lower[i], s.y[i]);
        dom.upper[i] = std::max(dom.upper[i], s.y[i]);
      }
    }
    if (c.domain_lo) std::fill(dom.lower.begin(), dom.lower.end(), *c.domain_lo);
    if (c.domain_hi) std::fill(dom.upper.begin(), dom.upper.end(), *c.domain_hi);
  }
  switch (basis::family_from_string(c.basis)) {
    case basis::Family::gaussian: return basis::gaussian_from_data(d, c.width, dom);
    case basis::Family::polynomial: return basis::polynomial(dom, c.degree);
    case basis::Family::sigmoid: return basis::sigmoids(dom, c.centers, c.slope);
    case basis::Family::trigonometric: return basis::trigonometric(dom, c.harmonics);
  }
  throw ParameterError("unknown basis family");
}

estimation::EstimationReport estimate(const Dataset& d, const RunConfig& c) {
  require_valid(d);
  estimation::EstimationReport r;
  estimation::ScatterData s;
  for (const Sample& smp : d.samples) {
    s.w.push_back(smp.y);
    s.z.push_back(smp.u);
  }
  const auto nb = estimation::estimate_noise_bound(s, rho_setting(c.rho_policy, c.rho));
  r.epsilon_hat = nb.epsilon_hat;
  r.rho_used = nb.rho_used;
  r.covered_count = nb.covered;
  if (d.is_trajectory) {
    const auto plant_rho = rho_setting(c.plant_rho_policy, c.plant_rho);
    if (c.gains == "both" || c.gains == "f") r.gamma_f_hat = estimation::estimate_plant_gain_f(d, plant_rho).gamma_hat;
    if (c.gains == "both" || c.gains == "gy") {
      r.gamma_gy_hat = estimation::estimate_plant_gain_gy(d, plant_rho).gamma_hat;
    }
  }
  return r;
}

stability::CertificateInputs certificate_inputs(const simulation::Benchmark& b, const ControllerInterface& khat,
                                                double gamma_delta_s, const RunConfig& c) {
  const PlantInterface& plant = *b.plant;
  const PlantConstants declared = plant.declared_constants();
  auto pick = [](const std::optional<double>& over, const std::optional<double>& decl, const char* name) {
    if (over) return *over;
    if (decl) return *decl;
    throw ParameterError(std::string("plant declares no ") + name + "; pass it explicitly");
  };
  stability::CertificateInputs in;
  in.gamma_f = pick(c.gamma_f, declared.gamma_f, "gamma_f");
  in.gamma_gy = pick(c.gamma_gy, declared.gamma_gy, "gamma_gy");
  in.gamma_ge = pick(c.gamma_ge, declared.gamma_ge, "gamma_ge");
  const Box& Y = plant.output_domain();
  simulation::GridError g;
  if (Y.dim() == 1) {
    g = simulation::grid_error_lipschitz(*b.kappa, khat, simulation::uniform_grid(Y.lower[0], Y.upper[0],
                                                                                  c.cert_grid_points));
  } else {
    Rng rng(c.seed);
    std::vector<Vector> pts(c.cert_grid_points, Vector(Y.dim()));
    for (auto& p : pts) {
      for (std::size_t i = 0; i < Y.dim(); ++i) p[i] = rng.uniform(Y.lower[i], Y.upper[i]);
    }
    g = simulation::sampled_error_lipschitz(*b.kappa, khat, pts, 100 * c.cert_grid_points, c.seed);
  }
  in.gamma_delta = std::max(gamma_delta_s, g.gamma_delta_measured);
  in.gamma_khat = khat.lipschitz_constant();
  const Vector origin(Y.dim(), 0.0);
  in.delta0_abs = std::abs(b.kappa->eval(origin) - khat.eval(origin));
  in.delta0_source = "reference";
  in.g0_norm = b.g0_norm;
  in.epsilon_y = c.eps_y;
  return in;
}

SoundnessReport soundness_experiment(const simulation::Benchmark& b, const ControllerInterface& khat,
                                     const stability::StabilityCertificate& cert, const RunConfig& c,
                                     std::ostream* csv) {
  const PlantInterface& plant = *b.plant;
  const Box& Y = plant.output_domain();
  const Box& E = plant.disturbance_domain();
  const std::size_t ny = Y.dim();
  for (std::size_t i = 0; i < ny; ++i) {
    if (!(Y.upper[i] - Y.lower[i] > 2.0 * c.xi0_max)) throw ParameterError("xi0_max too large for the output domain");
  }
  NoiseModel noise;
  noise.eps_y.assign(ny, c.eps_y);
  noise.eps_s.resize(E.dim());
  for (std::size_t i = 0; i < E.dim(); ++i) noise.eps_s[i] = std::max(0.0, std::min({c.eps_s, -E.lower[i], E.upper[i]}));

  if (csv) {
    *csv << "run,t";
    for (std::size_t i = 1; i <= ny; ++i) *csv << ",y" << i;
    *csv << ",u";
    for (std::size_t i = 1; i <= ny; ++i) *csv << ",yhat" << i;
    *csv << ",uhat,xi_norm,xi_bound,yhat_norm,yhat_bound\n";
  }
  SoundnessReport rep;
  Rng rng(c.seed);
  for (std::size_t run = 0; run < c.runs; ++run) {
    Vector y0(ny), xi0(ny);
    for (std::size_t i = 0; i < ny; ++i) y0[i] = rng.uniform(Y.lower[i] + c.xi0_max, Y.upper[i] - c.xi0_max);
    for (std::size_t i = 0; i < ny; ++i) xi0[i] = rng.uniform(-c.xi0_max, c.xi0_max);
    noise.seed = rng.next();
    const NoiseSequences seqs = noise.generate(c.horizon);
    double es_norm = 0.0;
    for (const Vector& e : seqs.es) es_norm = std::max(es_norm, inf_norm(e));
    const auto dev = simulation::deviation_run(plant, *b.kappa, khat, y0, xi0, seqs, c.horizon, cert);
    const double yhat0 = inf_norm(dev.learned.y[0]);
    ++rep.runs;
    for (std::size_t t = 0; t <= c.horizon; ++t) {
      const double xi = inf_norm(dev.xi[t]);
      const double yh = inf_norm(dev.learned.y[t]);
      const double yb = stability::learned_loop_bound(cert, es_norm, yhat0, t);
      ++rep.steps;
      if (!(xi <= dev.bound[t] + 1e-9)) ++rep.xi_violations;
      if (!(yh <= yb + 1e-9)) ++rep.y_violations;
      if (dev.bound[t] > 0.0) rep.worst_xi_ratio = std::max(rep.worst_xi_ratio, xi / dev.bound[t]);
      if (yb > 0.0) rep.worst_y_ratio = std::max(rep.worst_y_ratio, yh / yb);
      if (csv) {
        *csv << run << ',' << t;
        for (double v : dev.reference.y[t]) *csv << ',' << text::format_double(v);
        *csv << ',' << (t < c.horizon ? text::format_double(dev.reference.u[t]) : "");
        for (double v : dev.learned.y[t]) *csv << ',' << text::format_double(v);
        *csv << ',' << (t < c.horizon ? text::format_double(dev.learned.u[t]) : "");
        *csv << ',' << text::format_double(xi) << ',' << text::format_double(dev.bound[t]) << ','
             << text::format_double(yh) << ',' << text::format_double(yb) << '\n';
      }
    }
  }
  return rep;
}

std::vector<std::size_t> sweep_sizes(const RunConfig& c) {
  if (!c.sweep.empty()) return c.sweep;
  const std::size_t step = c.full_sweep ? 10 : c.sweep_step;
  std::vector<std::size_t> out;
  for (std::size_t n = c.sweep_min; n <= c.sweep_max; n += step) out.push_back(n);
  return out;
}

namespace {

constexpr double kExampleLo = -3.0;
constexpr double kExampleHi = 3.0;

std::shared_ptr<const learner::LearnedController> learn_example(const Dataset& d, const RunConfig& c,
                                                                bool drop_pairs) {
  auto dict = std::make_shared<const basis::Dictionary>(
      basis::gaussian_from_data(d, c.width, Box::uniform(1, kExampleLo, kExampleHi)));
  learner::LearnerConfig l = learner_config(c);
  l.drop_pair_constraints = drop_pairs;
  return std::make_shared<const learner::LearnedController>(learner::learn_controller(d, dict, l));
}

}  // namespace

ExampleReproduction reproduce_example(const RunConfig& c, std::ostream* log) {
  ExampleReproduction out;
  out.fit_n = c.fit_n;
  out.grid = simulation::uniform_grid(kExampleLo, kExampleHi, c.grid_points);
  std::shared_ptr<const ControllerInterface> kappa;
  for (std::size_t n : sweep_sizes(c)) {
    const auto ex = simulation::generate_example_dataset(n, c.seed, c.example_noise);
    kappa = ex.kappa;
    const auto con = learn_example(ex.data, c, false);
    const auto nc = learn_example(ex.data, c, true);
    const auto gc = simulation::grid_error_lipschitz(*ex.kappa, learner::LearnedPolicy(con), out.grid);
    const auto gn = simulation::grid_error_lipschitz(*ex.kappa, learner::LearnedPolicy(nc), out.grid);
    SweepRow row;
    row.n = n;
    row.gamma_delta = gc.gamma_delta_measured;
    row.gamma_delta_nc = gn.gamma_delta_measured;
    row.gamma_delta_s = con->gamma_delta_s;
    row.gamma_delta_s_nc = nc->gamma_delta_s;
    row.support = con->support.size();
    row.support_nc = nc->support.size();
    row.epsilon_hat = con->report.epsilon_hat;
    row.max_abs_error = gc.max_abs_error;
    out.rows.push_back(row);
    if (n == c.fit_n) {
      out.fit = con;
      out.fit_data = ex.data;
    }
    if (log) {
      *log << "N = " << n << ": gamma_delta = " << text::format_double(row.gamma_delta)
           << ", without pair constraints = " << text::format_double(row.gamma_delta_nc)
           << ", support = " << row.support << '\n';
    }
  }
  if (!out.fit) {
    const auto ex = simulation::generate_example_dataset(c.fit_n, c.seed, c.example_noise);
    kappa = ex.kappa;
    out.fit = learn_example(ex.data, c, false);
    out.fit_data = ex.data;
  }
  const learner::LearnedPolicy fit(out.fit);
  out.fit_error = simulation::grid_error_lipschitz(*kappa, fit, out.grid);
  for (double y : out.grid) {
    const double v[1] = {y};
    out.kappa.push_back(kappa->eval(v));
    out.kappa_hat.push_back(fit.eval(v));
  }
  return out;
}

void write_example_outputs(const ExampleReproduction& r, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "sweep.csv");
    os << "N,gamma_delta,gamma_delta_nc,gamma_delta_s,gamma_delta_s_nc,support,support_nc,epsilon_hat,"
          "max_abs_error\n";
    for (const SweepRow& row : r.rows) {
      os << row.n << ',' << text::format_double(row.gamma_delta) << ',' << text::format_double(row.gamma_delta_nc)
         << ',' << text::format_double(row.gamma_delta_s) << ',' << text::format_double(row.gamma_delta_s_nc) << ','
         << row.support << ',' << row.support_nc << ',' << text::format_double(row.epsilon_hat) << ','
         << text::format_double(row.max_abs_error) << '\n';
    }
  }
  {
    auto os = open_out(dir / "fit.csv");
    os << "y,kappa,kappa_hat\n";
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
      os << text::format_double(r.grid[i]) << ',' << text::format_double(r.kappa[i]) << ','
         << text::format_double(r.kappa_hat[i]) << '\n';
    }
  }
  {
    auto os = open_out(dir / "data.csv");
    write_dataset_csv(os, r.fit_data);
  }
  {
    auto os = open_out(dir / "summary.txt");
    text::Writer w(os, "ctrlid-example", 1);
    w.put("sweep_size", r.rows.size());
    if (!r.rows.empty()) {
      w.put("first_n", r.rows.front().n);
      w.put("last_n", r.rows.back().n);
      w.put("gamma_delta_first", r.rows.front().gamma_delta);
      w.put("gamma_delta_last", r.rows.back().gamma_delta);
      w.put("gamma_delta_ratio", r.rows.back().gamma_delta / r.rows.front().gamma_delta);
      w.put("gamma_delta_nc_last", r.rows.back().gamma_delta_nc);
    }
    w.put("fit_n", r.fit_n);
    w.put("fit_support", r.fit->support.size());
    w.put("fit_gamma_delta_s", r.fit->gamma_delta_s);
    w.put("fit_max_abs_error", r.fit_error.max_abs_error);
    w.put("fit_gamma_delta_measured", r.fit_error.gamma_delta_measured);
  }
}

int cmd_estimate(const RunConfig& c, std::ostream& log) {
  if (c.data.empty()) throw ParameterError("estimate needs --data");
  const Dataset d = load_dataset(c.data);
  const auto r = estimate(d, c);
  auto put = [&](std::ostream& os) {
    text::Writer w(os, "ctrlid-estimate", 1);
    w.put("samples", d.size());
    w.put("trajectory", d.is_trajectory);
    w.put("epsilon_hat", r.epsilon_hat);
    w.put("rho_policy", c.rho_policy);
    w.put("rho_used", r.rho_used);
    w.put("covered_count", r.covered_count);
    w.put("gamma_f_hat", r.gamma_f_hat ? text::format_double(*r.gamma_f_hat) : "none");
    w.put("gamma_gy_hat", r.gamma_gy_hat ? text::format_double(*r.gamma_gy_hat) : "none");
  };
  const fs::path dir = output_dir(c, "");
  if (dir.empty()) {
    put(log);
  } else {
    fs::create_directories(dir);
    auto os = open_out(dir / "estimate.txt");
    put(os);
    log << "wrote " << (dir / "estimate.txt").string() << '\n';
  }
  return kOk;
}

int cmd_learn(const RunConfig& c, std::ostream& log) {
  if (c.data.empty()) throw ParameterError("learn needs --data");
  const Dataset d = load_dataset(c.data);
  std::shared_ptr<const basis::Dictionary> dict;
  if (!c.dictionary_file.empty()) {
    std::ifstream is(c.dictionary_file);
    if (!is) throw DataError("cannot open dictionary file " + c.dictionary_file);
    dict = std::make_shared<const basis::Dictionary>(basis::read_dictionary(is));
  } else {
    dict = std::make_shared<const basis::Dictionary>(build_dictionary(c, d));
  }
  const auto ctrl = learner::learn_controller(d, dict, learner_config(c));
  const fs::path dir = output_dir(c, "ctrlid-out");
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "dictionary.txt");
    basis::write_dictionary(os, *dict);
  }
  {
    auto os = open_out(dir / "controller.txt");
    learner::write_controller(os, ctrl, "dictionary.txt");
  }
  {
    auto os = open_out(dir / "report.txt");
    learner::write_report(os, ctrl.report);
  }
  const auto diag = learner::diagnose_basis(ctrl, {c.alpha_small, c.sparsity_max});
  {
    auto os = open_out(dir / "residuals.txt");
    text::Writer w(os, "ctrlid-residuals", 1);
    w.put("max_a_violation", ctrl.residuals.max_a_violation);
    w.put("max_b_violation", ctrl.residuals.max_b_violation);
    w.put("gamma_delta_s", ctrl.gamma_delta_s);
    w.put("support_size", ctrl.support.size());
    w.put("dictionary_size", dict->size());
    w.put("lipschitz_bound", ctrl.lipschitz_bound());
    w.put("verdict", basis::to_string(diag.verdict));
    w.put("stage1_rounds", ctrl.stage1.rounds);
    w.put("stage1_pair_rows", ctrl.stage1.pair_rows);
    w.put("stage2_rounds", ctrl.stage2.rounds);
    w.put("stage2_pair_rows", ctrl.stage2.pair_rows);
  }
  log << "epsilon_hat = " << text::format_double(ctrl.report.epsilon_hat) << '\n'
      << "alpha = " << text::format_double(ctrl.report.alpha) << '\n'
      << "gamma_delta_prime = " << text::format_double(ctrl.report.gamma_delta_prime) << " ("
      << ctrl.report.gamma_delta_prime_source << ")\n"
      << "support = " << ctrl.support.size() << " of " << dict->size() << '\n'
      << "gamma_delta_s = " << text::format_double(ctrl.gamma_delta_s) << '\n'
      << "basis verdict = " << basis::to_string(diag.verdict) << '\n'
      << "wrote " << (dir / "controller.txt").string() << '\n';
  return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  RunConfig c = cfg;
  if (c.reference) {
    // Both loops run κ from the same state with exact feedback.
    c.eps_y = 0.0;
    c.xi0_max = 0.0;
  }
  const auto b = simulation::benchmark_plant(c.plant);
  std::shared_ptr<const ControllerInterface> khat;
  double gamma_delta_s = 0.0;
  if (c.reference) {
    khat = b.kappa;
  } else {
    if (c.controller.empty()) throw ParameterError("simulate needs --controller or --reference");
    std::ifstream is(c.controller);
    if (!is) throw DataError("cannot open controller file " + c.controller);
    auto ctrl = std::make_shared<const learner::LearnedController>(
        learner::read_controller(is, fs::path(c.controller).parent_path().string()));
    gamma_delta_s = ctrl->gamma_delta_s;
    khat = std::make_shared<learner::LearnedPolicy>(ctrl);
  }
  const auto cert = stability::certify(certificate_inputs(b, *khat, gamma_delta_s, c));
  const fs::path dir = output_dir(c, "ctrlid-out");
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "certificate.txt");
    stability::write_certificate(os, cert);
  }
  log << "gamma = " << text::format_double(cert.gamma) << ", certified = " << yes_no(cert.certified) << '\n';
  if (!cert.certified) {
    log << "the loop is not certified (gamma_delta = " << text::format_double(cert.in.gamma_delta)
        << " exceeds the limit " << text::format_double(cert.gamma_delta_limit()) << ")\n";
    if (c.require_cert) return kUncertified;
    log << "bounds are undefined; no trajectories simulated\n";
    return kOk;
  }
  auto csv = open_out(dir / "trajectories.csv");
  const auto rep = soundness_experiment(b, *khat, cert, c, &csv);
  const bool dominated = rep.y_violations == 0 && rep.xi_violations == 0;
  log << "runs = " << rep.runs << ", steps checked = " << rep.steps << '\n'
      << "output bound violations = " << rep.y_violations << " (worst ratio "
      << text::format_double(rep.worst_y_ratio) << ")\n"
      << "deviation bound violations = " << rep.xi_violations << " (worst ratio "
      << text::format_double(rep.worst_xi_ratio) << ")\n"
      << "dominated = " << yes_no(dominated) << '\n';
  return dominated ? kOk : kBoundViolation;
}

int cmd_reproduce_example(const RunConfig& c, std::ostream& log) {
  const auto r = reproduce_example(c, &log);
  const fs::path dir = output_dir(c, "ctrlid-example");
  write_example_outputs(r, dir);
  log << "fit at N = " << r.fit_n << ": max |kappa - kappa_hat| = " << text::format_double(r.fit_error.max_abs_error)
      << '\n'
      << "wrote " << (dir / "sweep.csv").string() << ", fit.csv, data.csv, summary.txt\n";
  return kOk;
}

}  // namespace ctrlid::cli
