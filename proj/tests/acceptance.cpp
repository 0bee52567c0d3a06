// Acceptance run: one PASS/FAIL line per criterion, details after the verdict.
// Exits 1 when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ctrlid/cli.hpp"
#include "ctrlid/core_types.hpp"
#include "ctrlid/estimation.hpp"
#include "ctrlid/learner.hpp"
#include "ctrlid/lp.hpp"
#include "ctrlid/simulation.hpp"
#include "ctrlid/stability.hpp"
#include "oracles.hpp"

using namespace ctrlid;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr double kTrueEpsilon = 0.05;
constexpr double kExampleLo = -3.0;
constexpr double kExampleHi = 3.0;
const std::vector<std::size_t> kLadder = {100, 200, 500, 1000, 2000, 5000};
constexpr std::uint64_t kLadderSeeds = 10;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g(double v) { return fmt("%.6g", v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

estimation::ScatterData scatter_of(const Dataset& d) {
  estimation::ScatterData s;
  s.z.resize(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    s.w.push_back(d.samples[k].y);
    s.z[k] = d.samples[k].u;
  }
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Verdict lp_oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(kSeed);
  double worst = 0.0;
  int mismatches = 0;
  int infeasible = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const oracle::DenseLp d = oracle::random_lp(rng);
    const auto expected = oracle::vertex_enumeration(d);
    const lp::Solution s = lp::solve(d.to_lp());
    if (!expected) {
      ++infeasible;
      if (s.status != lp::Status::infeasible) ++mismatches;
      continue;
    }
    if (s.status != lp::Status::optimal) {
      ++mismatches;
      continue;
    }
    const double diff = std::abs(s.objective - *expected);
    worst = std::max(worst, diff);
    if (!(diff <= 1e-8)) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          "50 problems (" + std::to_string(infeasible) + " infeasible), " + std::to_string(mismatches) +
              " mismatches, max |objective diff| " + g(worst) + ", " + fmt("%.2f s", secs)};
}

Verdict constraint_satisfaction() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ex = simulation::generate_example_dataset(170, kSeed);
  const auto dict = std::make_shared<const basis::Dictionary>(
      basis::gaussian_from_data(ex.data, 100.0, Box::uniform(1, kExampleLo, kExampleHi)));
  learner::LearnerConfig cfg;
  cfg.rho = estimation::RhoSetting::scaled();
  const auto c = learner::learn_controller(ex.data, dict, cfg);
  const double secs = seconds_since(t0);

  const double bound = c.report.residual_bound;
  const double eps = c.report.epsilon_hat;
  const std::size_t n = ex.data.size();
  Vector r(n);
  double worst_a = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double y[1] = {ex.data.samples[k].y[0]};
    r[k] = ex.data.samples[k].u - c.evaluate(y);
    worst_a = std::max(worst_a, std::abs(r[k]) - bound);
  }
  double worst_b = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t k = l + 1; k < n; ++k) {
      const double dy = std::abs(ex.data.samples[l].y[0] - ex.data.samples[k].y[0]);
      worst_b = std::max(worst_b, std::abs(r[l] - r[k]) - c.gamma_delta_s * dy - 2.0 * eps);
    }
  }
  double a1_max = 0.0;
  for (double v : c.a_one) a1_max = std::max(a1_max, std::abs(v));
  std::size_t outside = 0;
  std::size_t nnz = 0;
  for (std::size_t i = 0; i < c.a_hat.size(); ++i) {
    if (c.a_hat[i] == 0.0) continue;
    ++nnz;
    if (!(std::abs(c.a_one[i]) > 1e-6 * a1_max)) ++outside;
  }
  const double budget = c.report.gamma_delta_prime;
  const bool pass = worst_a <= 1e-8 && worst_b <= 1e-8 && outside == 0 && c.gamma_delta_s <= budget + 1e-8 &&
                    secs < 60.0;
  return {pass, "max (a) excess " + g(worst_a) + ", max (b) excess " + g(worst_b) + ", " + std::to_string(nnz) +
                    " nonzeros with " + std::to_string(outside) + " outside supp(a1), gamma_delta_s " +
                    g(c.gamma_delta_s) + " vs budget " + g(budget) + ", " + fmt("%.2f s", secs)};
}

struct SweepOutcome {
  cli::ExampleReproduction r;
  double secs = 0.0;
};

Verdict sweep_trend(const SweepOutcome& s) {
  const auto& rows = s.r.rows;
  const auto& first = rows.front();
  const auto& last = rows.back();
  const double ratio = last.gamma_delta / first.gamma_delta;
  const bool pass = first.n == 10 && last.n == 250 && rows.size() == 25 && ratio <= 0.5 &&
                    last.gamma_delta <= last.gamma_delta_nc && s.secs < 600.0;
  return {pass, std::to_string(rows.size()) + " sizes, gamma_delta N=10 " + g(first.gamma_delta) + ", N=250 " +
                    g(last.gamma_delta) + " (ratio " + g(ratio) + "), without pair constraints N=250 " +
                    g(last.gamma_delta_nc) + ", " + fmt("%.1f s", s.secs)};
}

Verdict example_fit(const SweepOutcome& s) {
  const learner::LearnedPolicy khat(s.r.fit);
  double worst = 0.0;
  const std::size_t points = 601;
  for (std::size_t i = 0; i < points; ++i) {
    const double y = kExampleLo + (kExampleHi - kExampleLo) * static_cast<double>(i) / (points - 1);
    const double v[1] = {y};
    worst = std::max(worst, std::abs(oracle::example_kappa(y) - khat.eval(v)));
  }
  return {s.r.fit_n == 170 && worst <= 0.15,
          "N=" + std::to_string(s.r.fit_n) + ", max |kappa - kappa_hat| on 601 points " + g(worst) +
              " (threshold 0.15), support " + std::to_string(s.r.fit->support.size())};
}

Verdict noise_bound_convergence() {
  std::vector<double> med;
  std::string ladder;
  double at5000 = 0.0;
  for (std::size_t n : kLadder) {
    std::vector<double> err;
    for (std::uint64_t seed = 1; seed <= kLadderSeeds; ++seed) {
      const auto ex = simulation::generate_example_dataset(n, seed, kTrueEpsilon);
      const double e =
          estimation::estimate_noise_bound(scatter_of(ex.data), estimation::RhoSetting::scaled()).epsilon_hat;
      if (n == 5000 && seed == kSeed) at5000 = e;
      err.push_back(std::abs(e - kTrueEpsilon));
    }
    med.push_back(median(err));
    ladder += (ladder.empty() ? "" : ", ") + std::to_string(n) + ":" + fmt("%.5f", med.back());
  }
  bool monotone = true;
  for (std::size_t i = 1; i < med.size(); ++i) {
    if (med[i] > med[i - 1]) monotone = false;
  }
  const bool in_band = at5000 >= 0.040 && at5000 <= 0.060;
  return {in_band && monotone, "epsilon_hat at N=5000 " + fmt("%.5f", at5000) +
                                   (in_band ? " in" : " outside") + " [0.040, 0.060]; median |epsilon_hat - 0.05| " +
                                   (monotone ? "nonincreasing" : "not monotone") + " (" + ladder + ")"};
}

Verdict lipschitz_convergence() {
  const double oracle_l = oracle::grid_lipschitz(oracle::example_kappa, kExampleLo, kExampleHi, 600001);
  const auto ex = simulation::generate_example_dataset(5000, kSeed, kTrueEpsilon);
  const auto s = scatter_of(ex.data);
  const double eps = estimation::estimate_noise_bound(s, estimation::RhoSetting::scaled()).epsilon_hat;
  const double gamma = estimation::estimate_lipschitz(s, eps);
  const double rel = std::abs(gamma - oracle_l) / oracle_l;
  double worst_excess = -oracle_l;
  for (std::size_t n : kLadder) {
    for (std::uint64_t seed = 1; seed <= kLadderSeeds; ++seed) {
      const auto d = simulation::generate_example_dataset(n, seed, kTrueEpsilon);
      worst_excess = std::max(worst_excess, estimation::estimate_lipschitz(scatter_of(d.data), kTrueEpsilon) - oracle_l);
    }
  }
  return {rel <= 0.2 && worst_excess <= 1e-9,
          "grid oracle " + g(oracle_l) + ", gamma_hat at N=5000 " + g(gamma) + " (relative error " + g(rel) +
              "); with the true noise bound, max(gamma_hat - oracle) over " + std::to_string(kLadder.size()) +
              " sizes x " + std::to_string(kLadderSeeds) + " seeds " + g(worst_excess)};
}

// Closed forms of the output and deviation bounds, written out here.
double output_bound(const stability::StabilityCertificate& c, double es, double y0, std::size_t t) {
  const auto& in = c.in;
  const double gam = in.gamma_f * in.gamma_delta + in.gamma_gy;
  const double offset = (in.g0_norm + in.gamma_f * in.delta0_abs + in.gamma_f * in.gamma_khat * in.epsilon_y) / (1 - gam);
  return in.gamma_ge / (1 - gam) * es + std::pow(gam, static_cast<double>(t)) * y0 + offset;
}

double deviation_limit(const stability::StabilityCertificate& c, double xi0, double y0, double es, std::size_t t) {
  const auto& in = c.in;
  const double gam = in.gamma_f * in.gamma_delta + in.gamma_gy;
  const double offset = (in.g0_norm + in.gamma_f * in.delta0_abs + in.gamma_f * in.gamma_khat * in.epsilon_y) / (1 - gam);
  const double tt = static_cast<double>(t);
  return in.gamma_ge / (1 - gam) * es + std::pow(gam, tt) * xi0 +
         in.gamma_f * in.gamma_delta / (1 - gam) * std::pow(in.gamma_gy, tt) * y0 + offset;
}

double norm_inf(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Verdict certificate_soundness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = simulation::benchmark_plant("tanh-loop");
  cli::RunConfig cfg;
  cfg.basis = "polynomial";
  cfg.degree = 3;
  cfg.domain_lo = -2.0;
  cfg.domain_hi = 2.0;
  const Dataset data = simulation::closed_loop_log(b, 40, 5, {}, 3);
  learner::LearnerConfig lc = cli::learner_config(cfg);
  lc.gamma_f_data = simulation::step_response_log(b, 1000, {}, 11);
  lc.gamma_gy_data = simulation::closed_loop_log(b, 400, 5, {}, 12);
  const auto dict = std::make_shared<const basis::Dictionary>(cli::build_dictionary(cfg, data));
  const auto learned = std::make_shared<const learner::LearnedController>(learner::learn_controller(data, dict, lc));
  const learner::LearnedPolicy khat(learned);
  const auto cert = stability::certify(cli::certificate_inputs(b, khat, learned->gamma_delta_s, cfg));
  if (!cert.certified) {
    return {false, "learned controller not certified (gamma " + g(cert.gamma) + ")"};
  }
  const auto rep = cli::soundness_experiment(b, khat, cert, cfg);

  // Second experiment with rollouts, noise and bounds computed here.
  const PlantInterface& plant = *b.plant;
  const Box& Y = plant.output_domain();
  const Box& E = plant.disturbance_domain();
  const std::size_t ny = Y.dim();
  const std::size_t T = 200;
  Rng rng(kSeed + 1000);
  std::size_t violations = 0;
  std::size_t clamped = 0;
  double worst_ratio = 0.0;
  for (int run = 0; run < 100; ++run) {
    Vector y(ny), yh(ny), xi0(ny);
    for (std::size_t i = 0; i < ny; ++i) {
      y[i] = rng.uniform(Y.lower[i] + cfg.xi0_max, Y.upper[i] - cfg.xi0_max);
      xi0[i] = rng.uniform(-cfg.xi0_max, cfg.xi0_max);
      yh[i] = y[i] + xi0[i];
    }
    std::vector<Vector> es(T, Vector(E.dim()));
    std::vector<Vector> ey(T, Vector(ny));
    double es_norm = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < E.dim(); ++i) {
        const double amp = std::max(0.0, std::min({cfg.eps_s, -E.lower[i], E.upper[i]}));
        es[t][i] = rng.uniform(-amp, amp);
      }
      for (std::size_t i = 0; i < ny; ++i) ey[t][i] = rng.uniform(-cfg.eps_y, cfg.eps_y);
      es_norm = std::max(es_norm, norm_inf(es[t]));
    }
    const double y0n = norm_inf(y);
    const double yh0n = norm_inf(yh);
    const double xi0n = norm_inf(xi0);
    for (std::size_t t = 0;; ++t) {
      Vector xi(ny);
      for (std::size_t i = 0; i < ny; ++i) xi[i] = yh[i] - y[i];
      const double yb = output_bound(cert, es_norm, yh0n, t);
      const double xb = deviation_limit(cert, xi0n, y0n, es_norm, t);
      if (!(norm_inf(yh) <= yb + 1e-9)) ++violations;
      if (!(norm_inf(xi) <= xb + 1e-9)) ++violations;
      worst_ratio = std::max({worst_ratio, norm_inf(yh) / yb, xb > 0 ? norm_inf(xi) / xb : 0.0});
      if (t == T) break;
      Vector meas(yh);
      for (std::size_t i = 0; i < ny; ++i) meas[i] += ey[t][i];
      const auto ref = plant.step(y, b.kappa->eval(y), es[t]);
      const auto lrn = plant.step(yh, khat.eval(meas), es[t]);
      clamped += ref.clamped + lrn.clamped;
      y = ref.y;
      yh = lrn.y;
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = rep.runs == 100 && rep.y_violations == 0 && rep.xi_violations == 0 && violations == 0 && secs < 60.0;
  return {pass, "gamma " + g(cert.gamma) + ", support " + std::to_string(learned->support.size()) + "/" +
                    std::to_string(learned->a_hat.size()) + "; library run: " + std::to_string(rep.y_violations) +
                    " output and " + std::to_string(rep.xi_violations) + " deviation violations in " +
                    std::to_string(rep.steps) + " steps (worst ratios " + g(rep.worst_y_ratio) + ", " +
                    g(rep.worst_xi_ratio) + "); independent run: " + std::to_string(violations) +
                    " violations, worst ratio " + g(worst_ratio) + ", " + std::to_string(clamped) +
                    " clamped steps; " + fmt("%.2f s", secs)};
}

Verdict formula_collapse() {
  Rng rng(kSeed);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    stability::CertificateInputs in;
    in.gamma_f = rng.uniform(0.0, 3.0);
    in.gamma_gy = rng.uniform(0.0, 0.99);
    in.gamma_ge = rng.uniform(0.0, 2.0);
    in.gamma_khat = rng.uniform(0.0, 5.0);
    in.g0_norm = rng.uniform(0.0, 1.0);
    const double es = rng.uniform(0.0, 0.1);
    const double y0 = rng.uniform(0.0, 5.0);
    const auto t = static_cast<std::size_t>(rng.uniform(0.0, 100.0));
    const double a = stability::learned_loop_bound(stability::certify(in), es, y0, t);
    const double b = stability::baseline_bound(in.gamma_gy, in.gamma_ge, in.g0_norm, es, y0, t);
    worst = std::max(worst, std::abs(a - b));
  }
  return {worst <= 1e-12, "1000 tuples, max |difference| " + g(worst)};
}

Verdict determinism() {
  const fs::path base = fs::temp_directory_path() / "ctrlid_acceptance_determinism";
  fs::remove_all(base);
  std::ostringstream log;
  for (const char* run : {"a", "b"}) {
    cli::RunConfig cfg;
    cfg.out_dir = (base / run).string();
    cli::cmd_reproduce_example(cfg, log);
  }
  std::size_t compared = 0;
  std::string differing;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    const auto name = entry.path().filename();
    ++compared;
    if (read_bytes(entry.path()) != read_bytes(base / "b" / name)) differing += " " + name.string();
  }
  fs::remove_all(base);
  return {compared >= 4 && differing.empty(),
          std::to_string(compared) + " files compared" + (differing.empty() ? ", all identical" : ", differ:" + differing)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  SweepOutcome sweep;
  bool sweep_done = false;
  auto full_sweep = [&]() -> const SweepOutcome& {
    if (!sweep_done) {
      const auto t0 = std::chrono::steady_clock::now();
      cli::RunConfig cfg;
      cfg.full_sweep = true;
      sweep.r = cli::reproduce_example(cfg);
      sweep.secs = seconds_since(t0);
      sweep_done = true;
    }
    return sweep;
  };
  const std::vector<Criterion> criteria = {
      {1, "lp-oracle-equivalence", lp_oracle_equivalence},
      {2, "constraint-satisfaction", constraint_satisfaction},
      {3, "example-sweep-trend", [&] { return sweep_trend(full_sweep()); }},
      {4, "example-fit", [&] { return example_fit(full_sweep()); }},
      {5, "noise-bound-convergence", noise_bound_convergence},
      {6, "lipschitz-convergence", lipschitz_convergence},
      {7, "certificate-soundness", certificate_soundness},
      {8, "formula-collapse", formula_collapse},
      {9, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("criterion %d %s: %s (%s)\n", c.id, c.name, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
