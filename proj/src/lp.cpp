#include "ctrlid/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include "ctrlid/errors.hpp"
#include "ctrlid/text_format.hpp"

namespace ctrlid::lp {

LinearProgram::LinearProgram(std::size_t n) : n_(n), c_(n, 0.0), lower_(n, -kInf), upper_(n, kInf) {}

void LinearProgram::add_row(std::span<const std::size_t> cols, std::span<const double> values, double rhs) {
  if (cols.size() != values.size()) throw ParameterError("row has mismatched column/value lengths");
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] >= n_) throw ParameterError("row column index out of range");
    if (values[k] == 0.0) continue;
    cols_.push_back(cols[k]);
    values_.push_back(values[k]);
  }
  row_start_.push_back(cols_.size());
  rhs_.push_back(rhs);
}

void LinearProgram::add_dense_row(std::span<const double> coeffs, double rhs) {
  if (coeffs.size() != n_) throw ParameterError("dense row has wrong length");
  for (std::size_t j = 0; j < n_; ++j) {
    if (coeffs[j] == 0.0) continue;
    cols_.push_back(j);
    values_.push_back(coeffs[j]);
  }
  row_start_.push_back(cols_.size());
  rhs_.push_back(rhs);
}

std::span<const std::size_t> LinearProgram::row_cols(std::size_t r) const {
  return {cols_.data() + row_start_[r], row_start_[r + 1] - row_start_[r]};
}

std::span<const double> LinearProgram::row_values(std::size_t r) const {
  return {values_.data() + row_start_[r], row_start_[r + 1] - row_start_[r]};
}

double LinearProgram::row_dot(std::size_t r, std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) s += values_[k] * x[cols_[k]];
  return s;
}

void LinearProgram::validate() const {
  if (c_.size() != n_ || lower_.size() != n_ || upper_.size() != n_) {
    throw ParameterError("objective or bounds do not match the variable count");
  }
  for (double v : c_) {
    if (!std::isfinite(v)) throw ParameterError("objective coefficient is not finite");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ParameterError("constraint coefficient is not finite");
  }
  for (double v : rhs_) {
    if (!std::isfinite(v)) throw ParameterError("right-hand side is not finite");
  }
  for (std::size_t j = 0; j < n_; ++j) {
    if (std::isnan(lower_[j]) || std::isnan(upper_[j]) || lower_[j] == kInf || upper_[j] == -kInf) {
      throw ParameterError("invalid bound on variable " + std::to_string(j));
    }
  }
}

double LinearProgram::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t r = 0; r < num_rows(); ++r) worst = std::max(worst, row_dot(r, x) - rhs_[r]);
  for (std::size_t j = 0; j < n_; ++j) {
    worst = std::max({worst, lower_[j] - x[j], x[j] - upper_[j]});
  }
  return worst;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::solver_failure: return "solver_failure";
  }
  return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Rows of the primal after bounds have been appended: row j is column j of
// the dual equality system.
struct RowSystem {
  std::size_t n = 0;
  std::vector<std::size_t> start{0};
  std::vector<std::size_t> cols;
  Vector vals;
  Vector rhs;
  std::vector<BasisEntry> origin;
  std::vector<std::size_t> upper_row;
  std::vector<std::size_t> lower_row;

  std::size_t size() const { return rhs.size(); }

  void add(std::span<const std::size_t> c, std::span<const double> v, double b) {
    cols.insert(cols.end(), c.begin(), c.end());
    vals.insert(vals.end(), v.begin(), v.end());
    start.push_back(cols.size());
    rhs.push_back(b);
  }

  double dot(std::size_t r, const VectorXd& x) const {
    double s = 0.0;
    for (std::size_t k = start[r]; k < start[r + 1]; ++k) s += vals[k] * x[static_cast<Eigen::Index>(cols[k])];
    return s;
  }
};

RowSystem expand(const LinearProgram& p) {
  RowSystem rs;
  rs.n = p.num_vars();
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  rs.upper_row.assign(rs.n, none);
  rs.lower_row.assign(rs.n, none);
  for (std::size_t r = 0; r < p.num_rows(); ++r) {
    rs.add(p.row_cols(r), p.row_values(r), p.rhs(r));
    rs.origin.push_back({BasisEntry::Kind::row, r});
  }
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    const std::size_t col[1] = {j};
    if (std::isfinite(p.upper()[j])) {
      const double v[1] = {1.0};
      rs.upper_row[j] = rs.size();
      rs.add(col, v, p.upper()[j]);
      rs.origin.push_back({BasisEntry::Kind::upper, j});
    }
    if (std::isfinite(p.lower()[j])) {
      const double v[1] = {-1.0};
      rs.lower_row[j] = rs.size();
      rs.add(col, v, -p.lower()[j]);
      rs.origin.push_back({BasisEntry::Kind::lower, j});
    }
  }
  return rs;
}

constexpr double kCostShift = 1e-7;

enum class PhaseResult { optimal, unbounded, iteration_limit, breakdown };

// Primal simplex on  min g'y  s.t.  E y = h, y >= 0,  where column j < m of E
// is row j of the expanded primal system and columns m..m+n-1 are artificial
// unit columns sign_r e_r.
class DualFormSimplex {
 public:
  // `shift` perturbs the right-hand side h = -c to break ties between
  // degenerate vertices; it must keep h inside the dual-feasible cone.
  DualFormSimplex(const RowSystem& rows, const Vector& c, const Vector& shift, const SolverOptions& opt)
      : rows_(rows), opt_(opt), n_(rows.n), m_(rows.size()) {
    h_ = VectorXd(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) h_[idx(i)] = -c[i] + shift[i];
    sign_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) sign_[i] = h_[idx(i)] >= 0.0 ? 1.0 : -1.0;
    head_.resize(n_);
    pos_.assign(m_ + n_, npos);
    for (std::size_t i = 0; i < n_; ++i) {
      head_[i] = m_ + i;
      pos_[m_ + i] = i;
    }
    cost_.assign(m_ + n_, 0.0);
    rejected_.assign(m_ + n_, 0);
  }

  std::size_t iterations() const { return iterations_; }

  // Phase 1: minimise the sum of artificials. Returns the optimal sum, or
  // nullopt on numerical trouble / iteration limit.
  std::optional<double> phase1() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) cost_[m_ + i] = 1.0;
    allow_artificial_entering_ = false;
    if (!refactor()) return std::nullopt;
    const PhaseResult r = run();
    if (r != PhaseResult::optimal) {
      last_ = r;
      return std::nullopt;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (head_[i] >= m_) sum += std::max(0.0, y_[idx(i)]);
    }
    return sum;
  }

  // Installs the given basic columns. False unless they form a nonsingular
  // basis whose values are feasible, with artificials at zero.
  bool start_from(const std::vector<std::size_t>& heads) {
    if (heads.size() != n_) return false;
    std::fill(pos_.begin(), pos_.end(), npos);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j = heads[i];
      if (j >= m_ + n_ || pos_[j] != npos) return false;
      head_[i] = j;
      pos_[j] = i;
    }
    if (!refactor()) return false;
    for (std::size_t i = 0; i < n_; ++i) {
      const double v = y_[idx(i)];
      if (v < -opt_.feas_tol || (head_[i] >= m_ && std::abs(v) > opt_.feas_tol)) return false;
    }
    return true;
  }

  const std::vector<std::size_t>& heads() const { return head_; }

  // Pivot remaining artificials out of the basis where some real column can
  // replace them; the rest sit on redundant equality rows.
  bool drive_out_artificials() {
    for (std::size_t p = 0; p < n_; ++p) {
      if (head_[p] < m_) continue;
      if (etas_.size() >= opt_.refactor_interval && !refactor()) return false;
      VectorXd e = VectorXd::Zero(static_cast<Eigen::Index>(n_));
      e[idx(p)] = 1.0;
      const VectorXd rho = btran(e);
      std::size_t best = npos;
      double best_abs = 1e-7;
      for (std::size_t j = 0; j < m_; ++j) {
        if (pos_[j] != npos) continue;
        const double v = std::abs(rows_.dot(j, rho));
        if (v > best_abs) {
          best_abs = v;
          best = j;
        }
      }
      if (best == npos) continue;
      const VectorXd w = ftran(column(best));
      pivot(p, best, w, y_[idx(p)] / w[idx(p)]);
    }
    return refactor();
  }

  PhaseResult phase2() {
    for (std::size_t j = 0; j < m_; ++j) cost_[j] = rows_.rhs[j];
    for (std::size_t i = 0; i < n_; ++i) cost_[m_ + i] = 0.0;
    allow_artificial_entering_ = false;
    // A final fresh factorisation can expose reduced costs that drifted; a
    // few extra passes settle them.
    for (int attempt = 0; attempt < 4; ++attempt) {
      const PhaseResult r = run();
      if (r != PhaseResult::optimal) return r;
      if (!refactor()) return PhaseResult::breakdown;
      if (!entering_candidate(multipliers()).has_value()) return PhaseResult::optimal;
    }
    return PhaseResult::breakdown;
  }

  PhaseResult last_failure() const { return last_; }

  VectorXd multipliers() const {
    VectorXd cb(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) cb[idx(i)] = cost_[head_[i]];
    return btran(cb);
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

  struct Eta {
    std::size_t p;
    VectorXd w;
  };

  VectorXd column(std::size_t j) const {
    VectorXd out = VectorXd::Zero(static_cast<Eigen::Index>(n_));
    if (j < m_) {
      for (std::size_t k = rows_.start[j]; k < rows_.start[j + 1]; ++k) out[idx(rows_.cols[k])] = rows_.vals[k];
    } else {
      out[idx(j - m_)] = sign_[j - m_];
    }
    return out;
  }

  double column_dot(std::size_t j, const VectorXd& pi) const {
    if (j < m_) return rows_.dot(j, pi);
    return sign_[j - m_] * pi[idx(j - m_)];
  }

  bool refactor() {
    MatrixXd b = MatrixXd::Zero(idx(n_), idx(n_));
    for (std::size_t i = 0; i < n_; ++i) b.col(idx(i)) = column(head_[i]);
    lu_.compute(b);
    etas_.clear();
    if (n_ > 0 && !(lu_.rcond() > 1e-14)) return false;
    y_ = ftran(h_);
    return true;
  }

  VectorXd ftran(const VectorXd& v) const {
    VectorXd x = n_ > 0 ? VectorXd(lu_.solve(v)) : v;
    for (const Eta& e : etas_) {
      const double xp = x[idx(e.p)] / e.w[idx(e.p)];
      x -= xp * e.w;
      x[idx(e.p)] = xp;
    }
    return x;
  }

  VectorXd btran(VectorXd c) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const Eigen::Index p = idx(it->p);
      const double cp = c[p];
      c[p] = (cp - (it->w.dot(c) - it->w[p] * cp)) / it->w[p];
    }
    return n_ > 0 ? VectorXd(lu_.transpose().solve(c)) : c;
  }

  bool allowed(std::size_t j) const {
    return pos_[j] == npos && !rejected_[j] && (j < m_ || allow_artificial_entering_);
  }

  std::optional<std::size_t> entering_candidate(const VectorXd& pi) const {
    const std::size_t total = allow_artificial_entering_ ? m_ + n_ : m_;
    if (use_bland_) {
      for (std::size_t j = 0; j < total; ++j) {
        if (!allowed(j)) continue;
        if (cost_[j] - column_dot(j, pi) < -opt_.pricing_tol) return j;
      }
      return std::nullopt;
    }
    std::optional<std::size_t> best;
    double best_d = -opt_.pricing_tol;
    for (std::size_t j = 0; j < total; ++j) {
      if (!allowed(j)) continue;
      const double d = cost_[j] - column_dot(j, pi);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  }

  void pivot(std::size_t p, std::size_t entering, const VectorXd& w, double theta) {
    std::fill(rejected_.begin(), rejected_.end(), 0);
    y_ -= theta * w;
    y_[idx(p)] = theta;
    pos_[head_[p]] = npos;
    head_[p] = entering;
    pos_[entering] = p;
    etas_.push_back({p, w});
  }

  PhaseResult run() {
    std::size_t degenerate_run = 0;
    use_bland_ = opt_.pricing == Pricing::bland;
    while (true) {
      if (iterations_ >= opt_.max_iterations) return PhaseResult::iteration_limit;
      if (etas_.size() >= opt_.refactor_interval && !refactor()) return PhaseResult::breakdown;
      const VectorXd pi = multipliers();
      const auto entering = entering_candidate(pi);
      if (!entering) return PhaseResult::optimal;
      const VectorXd w = ftran(column(*entering));

      // The column-side reduced cost is what the step actually achieves.
      // When it disagrees with pricing (ill-conditioned basis), refactor
      // once; if a fresh factorisation still disagrees, set the column aside
      // until the basis changes.
      // Both are measured relative to the size of the transformed column.
      const double wmax = w.cwiseAbs().maxCoeff();
      double dw = cost_[*entering];
      for (std::size_t i = 0; i < n_; ++i) dw -= cost_[head_[i]] * w[idx(i)];
      if (!(dw < -opt_.pricing_tol * std::max(1.0, wmax))) {
        if (!etas_.empty()) {
          if (!refactor()) return PhaseResult::breakdown;
        } else {
          rejected_[*entering] = 1;
        }
        continue;
      }

      // Two-pass ratio test: bound the step with a small primal slack, then
      // take the largest pivot among rows within that bound (ties go to the
      // lowest basic variable index).
      const double ptol = std::max(opt_.pivot_tol, 1e-9 * wmax);
      ratios_.assign(n_, kInf);
      double theta = kInf;
      double relaxed = kInf;
      for (std::size_t i = 0; i < n_; ++i) {
        const double wi = w[idx(i)];
        if (head_[i] >= m_ && cost_[head_[i]] == 0.0) {
          // Artificial kept at zero on a redundant row.
          if (std::abs(wi) > ptol) ratios_[i] = 0.0;
        } else if (wi > ptol) {
          ratios_[i] = std::max(0.0, y_[idx(i)]) / wi;
          relaxed = std::min(relaxed, (std::max(0.0, y_[idx(i)]) + opt_.feas_tol * 0.1) / wi);
        }
        theta = std::min(theta, ratios_[i]);
      }
      relaxed = std::max(relaxed, theta);
      if (theta == kInf) {
        if (!etas_.empty()) {
          if (!refactor()) return PhaseResult::breakdown;
          continue;
        }
        // Only pivots too small relative to the column block the step: set
        // the column aside rather than pivot on noise.
        bool blocked = false;
        for (std::size_t i = 0; i < n_ && !blocked; ++i) blocked = w[idx(i)] > opt_.pivot_tol;
        if (!blocked) return PhaseResult::unbounded;
        rejected_[*entering] = 1;
        continue;
      }
      std::size_t leave = npos;
      {
        const double cutoff = relaxed * (1.0 + 1e-12);
        for (std::size_t i = 0; i < n_; ++i) {
          if (!(ratios_[i] <= cutoff)) continue;
          const double wi = std::abs(w[idx(i)]);
          const double wl = leave == npos ? 0.0 : std::abs(w[idx(leave)]);
          if (leave == npos || wi > wl || (wi == wl && head_[i] < head_[leave])) leave = i;
        }
      }
      ++iterations_;
      const double step = (head_[leave] >= m_ && cost_[head_[leave]] == 0.0) ? 0.0 : ratios_[leave];
      pivot(leave, *entering, w, step);

      if (opt_.pricing == Pricing::dantzig) {
        degenerate_run = step == 0.0 ? degenerate_run + 1 : 0;
        use_bland_ = degenerate_run > 50;
      }
    }
  }

  const RowSystem& rows_;
  const SolverOptions& opt_;
  std::size_t n_;
  std::size_t m_;
  VectorXd h_;
  Vector sign_;
  std::vector<std::size_t> head_;
  std::vector<std::size_t> pos_;
  Vector cost_;
  VectorXd y_;
  Eigen::PartialPivLU<MatrixXd> lu_;
  std::vector<Eta> etas_;
  Vector ratios_;
  std::vector<char> rejected_;
  std::size_t iterations_ = 0;
  bool allow_artificial_entering_ = false;
  bool use_bland_ = true;
  PhaseResult last_ = PhaseResult::optimal;
};

Solution failure(std::string why, std::size_t iterations) {
  Solution s;
  s.status = Status::solver_failure;
  s.message = std::move(why);
  s.iterations = iterations;
  return s;
}

Solution solve_expanded(const LinearProgram& p, const RowSystem& rows, const SolverOptions& opt,
                        bool feasibility_only, const Basis* start);

// Column indices of a stored basis in this row system, or empty when some
// entry does not exist here.
std::vector<std::size_t> locate(const RowSystem& rows, std::size_t num_rows, const Basis& basis) {
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> heads;
  for (const BasisEntry& e : basis) {
    std::size_t j = none;
    switch (e.kind) {
      case BasisEntry::Kind::row: j = e.index < num_rows ? e.index : none; break;
      case BasisEntry::Kind::upper: j = e.index < rows.n ? rows.upper_row[e.index] : none; break;
      case BasisEntry::Kind::lower: j = e.index < rows.n ? rows.lower_row[e.index] : none; break;
      case BasisEntry::Kind::artificial: j = e.index < rows.n ? rows.size() + e.index : none; break;
    }
    if (j == none) return {};
    heads.push_back(j);
  }
  return heads;
}

Solution solve_expanded(const LinearProgram& p, const RowSystem& rows, const SolverOptions& opt,
                        bool feasibility_only, const Basis* start) {
  const Vector c = feasibility_only ? Vector(p.num_vars(), 0.0) : p.objective();
  // Raising the cost of a variable bounded below (lowering it when bounded
  // above only) keeps a bounded problem bounded. The shift is small and
  // seeded, so the returned vertex is optimal for a cost within
  // kCostShift * max(1, ||c||_inf) of c in each component.
  double cscale = 1.0;
  for (double v : c) cscale = std::max(cscale, std::abs(v));
  Vector shift(p.num_vars());
  Rng rng(0x5eed);
  for (std::size_t j = 0; j < shift.size(); ++j) {
    const double mag = kCostShift * cscale * (0.5 + 0.5 * rng.uniform01());
    shift[j] = std::isfinite(p.lower()[j]) ? -mag : mag;
  }
  std::optional<DualFormSimplex> holder;
  holder.emplace(rows, c, shift, opt);
  bool warm = false;
  if (start != nullptr && !feasibility_only) {
    const auto heads = locate(rows, p.num_rows(), *start);
    warm = !heads.empty() && holder->start_from(heads);
    if (!warm) holder.emplace(rows, c, shift, opt);
  }
  DualFormSimplex& simplex = *holder;
  if (!warm) {
    const auto phase1 = simplex.phase1();
    if (!phase1) {
      return failure(simplex.last_failure() == PhaseResult::iteration_limit ? "iteration limit in phase 1"
                                                                              : "numerical breakdown in phase 1",
                     simplex.iterations());
    }
    if (*phase1 > opt.feas_tol * cscale) {
      // No dual feasible point: the primal is infeasible or unbounded. The
      // zero-objective problem tells which.
      if (feasibility_only) return failure("feasibility problem lost dual feasibility", simplex.iterations());
      Solution probe = solve_expanded(p, rows, opt, true, nullptr);
      probe.iterations += simplex.iterations();
      if (probe.status == Status::optimal) {
        Solution s;
        s.status = Status::unbounded;
        s.iterations = probe.iterations;
        s.message = "objective unbounded below";
        return s;
      }
      return probe;
    }
    if (!simplex.drive_out_artificials()) return failure("singular basis after phase 1", simplex.iterations());
  }

  const PhaseResult r = simplex.phase2();
  if (warm && r != PhaseResult::optimal && r != PhaseResult::unbounded) {
    return solve_expanded(p, rows, opt, feasibility_only, nullptr);
  }
  Solution s;
  s.iterations = simplex.iterations();
  switch (r) {
    case PhaseResult::unbounded:
      s.status = Status::infeasible;
      s.message = "constraints are infeasible";
      return s;
    case PhaseResult::iteration_limit: return failure("iteration limit in phase 2", s.iterations);
    case PhaseResult::breakdown: return failure("numerical breakdown in phase 2", s.iterations);
    case PhaseResult::optimal: break;
  }
  const VectorXd pi = simplex.multipliers();
  s.x.assign(pi.data(), pi.data() + pi.size());
  s.max_violation = p.max_violation(s.x);
  if (s.max_violation > opt.feas_tol) {
    return failure("final point violates constraints by " + text::format_double(s.max_violation), s.iterations);
  }
  s.status = Status::optimal;
  for (std::size_t j : simplex.heads()) {
    s.basis.push_back(j < rows.size() ? rows.origin[j] : BasisEntry{BasisEntry::Kind::artificial, j - rows.size()});
  }
  s.objective = 0.0;
  for (std::size_t j = 0; j < p.num_vars(); ++j) s.objective += p.objective()[j] * s.x[j];
  return s;
}

// Free variables become differences of two nonnegative ones. The dual form
// then always has bound rows available for its basis, which keeps bases
// well conditioned when free columns are nearly dependent.
LinearProgram split_free(const LinearProgram& p, std::vector<std::size_t>& negative_part) {
  const std::size_t n = p.num_vars();
  negative_part.assign(n, static_cast<std::size_t>(-1));
  std::size_t extra = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(p.lower()[j]) && !std::isfinite(p.upper()[j])) negative_part[j] = n + extra++;
  }
  LinearProgram q(n + extra);
  for (std::size_t j = 0; j < n; ++j) {
    q.objective()[j] = p.objective()[j];
    q.lower()[j] = p.lower()[j];
    q.upper()[j] = p.upper()[j];
    if (negative_part[j] != static_cast<std::size_t>(-1)) {
      q.lower()[j] = 0.0;
      q.objective()[negative_part[j]] = -p.objective()[j];
      q.lower()[negative_part[j]] = 0.0;
      q.upper()[negative_part[j]] = kInf;
    }
  }
  std::vector<std::size_t> cols;
  Vector vals;
  for (std::size_t r = 0; r < p.num_rows(); ++r) {
    const auto rc = p.row_cols(r);
    const auto rv = p.row_values(r);
    cols.assign(rc.begin(), rc.end());
    vals.assign(rv.begin(), rv.end());
    for (std::size_t k = 0; k < rc.size(); ++k) {
      if (negative_part[rc[k]] != static_cast<std::size_t>(-1)) {
        cols.push_back(negative_part[rc[k]]);
        vals.push_back(-rv[k]);
      }
    }
    q.add_row(cols, vals, p.rhs(r));
  }
  return q;
}

}  // namespace

Solution solve(const LinearProgram& p, const SolverOptions& opt, const Basis* start) {
  p.validate();
  if (!(opt.pricing_tol < opt.feas_tol)) throw ParameterError("pricing_tol must be below feas_tol");
  std::vector<std::size_t> negative_part;
  const LinearProgram q = split_free(p, negative_part);
  if (q.num_vars() > p.num_vars()) {
    Solution s = solve(q, opt, start);
    if (s.status != Status::optimal) return s;
    Vector x(p.num_vars());
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] = s.x[j];
      if (negative_part[j] != static_cast<std::size_t>(-1)) x[j] -= s.x[negative_part[j]];
    }
    s.x = std::move(x);
    s.max_violation = p.max_violation(s.x);
    if (s.max_violation > opt.feas_tol) {
      return failure("final point violates constraints by " + text::format_double(s.max_violation), s.iterations);
    }
    return s;
  }
  const RowSystem rows = expand(p);
  if (p.num_vars() == 0) {
    Solution s;
    s.status = Status::optimal;
    for (double b : rows.rhs) {
      if (b < -opt.feas_tol) s.status = Status::infeasible;
    }
    return s;
  }
  return solve_expanded(p, rows, opt, false, start);
}

LinearProgram reformulate_l1_min(const LinearProgram& g) {
  const std::size_t m = g.num_vars();
  LinearProgram out(2 * m);
  std::fill(out.objective().begin(), out.objective().end(), 1.0);
  std::fill(out.lower().begin(), out.lower().end(), 0.0);
  std::vector<std::size_t> cols;
  Vector vals;
  for (std::size_t r = 0; r < g.num_rows(); ++r) {
    cols.clear();
    vals.clear();
    const auto rc = g.row_cols(r);
    const auto rv = g.row_values(r);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      cols.push_back(rc[k]);
      vals.push_back(rv[k]);
    }
    for (std::size_t k = 0; k < rc.size(); ++k) {
      cols.push_back(m + rc[k]);
      vals.push_back(-rv[k]);
    }
    out.add_row(cols, vals, g.rhs(r));
  }
  return out;
}

Vector l1_recover(std::span<const double> x, std::size_t m) {
  Vector a(m);
  for (std::size_t i = 0; i < m; ++i) a[i] = x[i] - x[m + i];
  return a;
}

ChebyshevFit chebyshev_residual(std::span<const double> phi, std::size_t rows, std::size_t cols,
                                std::span<const double> u, const SolverOptions& opt) {
  if (phi.size() != rows * cols || u.size() != rows) throw ParameterError("chebyshev_residual: inconsistent sizes");
  // Variables (a_0..a_{M-1}, t); rows  ±(u_k - Phi_k a) <= t.
  LinearProgram p(cols + 1);
  p.objective()[cols] = 1.0;
  p.lower()[cols] = 0.0;
  Vector row(cols + 1);
  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t i = 0; i < cols; ++i) row[i] = phi[k * cols + i];
    row[cols] = -1.0;
    p.add_dense_row(row, u[k]);
    for (std::size_t i = 0; i < cols; ++i) row[i] = -phi[k * cols + i];
    p.add_dense_row(row, -u[k]);
  }
  const Solution s = solve(p, opt);
  if (s.status != Status::optimal) {
    throw SolverError("chebyshev residual LP ended with status " + to_string(s.status) +
                      (s.message.empty() ? "" : ": " + s.message));
  }
  ChebyshevFit fit;
  fit.a_star.assign(s.x.begin(), s.x.begin() + static_cast<std::ptrdiff_t>(cols));
  fit.t_star = s.x[cols];
  return fit;
}

void dump(std::ostream& os, const LinearProgram& p) {
  os << "lp " << p.num_vars() << ' ' << p.num_rows() << '\n';
  os << "c " << text::format_vector(p.objective()) << '\n';
  os << "lower " << text::format_vector(p.lower()) << '\n';
  os << "upper " << text::format_vector(p.upper()) << '\n';
  for (std::size_t r = 0; r < p.num_rows(); ++r) {
    os << "row " << text::format_double(p.rhs(r));
    const auto c = p.row_cols(r);
    const auto v = p.row_values(r);
    for (std::size_t k = 0; k < c.size(); ++k) os << ' ' << c[k] << ':' << text::format_double(v[k]);
    os << '\n';
  }
}

}  // namespace ctrlid::lp
