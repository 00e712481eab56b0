#pragma once

// Bounded-variable revised simplex with an explicit dense basis inverse.
//
// Internally the program is  min c'x  s.t.  A x - r = 0,  lo <= (x, r) <= hi,
// where r holds one logical variable per row. Nonbasic variables always sit
// at a finite bound. Cold starts use a phase 1 over artificial variables;
// warm starts go straight to primal (primal feasible basis) or dual
// (dual feasible basis) iterations. Dantzig pricing switches to Bland's rule
// after a run of degenerate pivots.

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <utility>
#include <vector>

#include "mbcg/lp/program.hpp"

namespace mbcg::lp::detail {

class Simplex {
 public:
  enum class Result { optimal, infeasible, unbounded, stalled };

  Simplex(const LinearProgram& lp, double feasibility_tol)
      : m_(lp.row_count()), n_(lp.variable_count()), feas_tol_(feasibility_tol),
        maximize_(lp.sense() == Sense::maximize) {
    const int total = n_ + m_;
    cols_.assign(total, {});
    lo_.assign(total, 0.0);
    hi_.assign(total, 0.0);
    cost_.assign(total, 0.0);
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp.row(i);
      for (const auto& t : row.terms) {
        if (t.coef != 0.0) cols_[t.var].push_back({i, t.coef});
      }
      cols_[n_ + i].push_back({i, -1.0});
      lo_[n_ + i] = row.relation == Relation::less_equal ? -kInf : row.rhs;
      hi_[n_ + i] = row.relation == Relation::greater_equal ? kInf : row.rhs;
    }
    for (int j = 0; j < n_; ++j) {
      const auto& v = lp.variable(j);
      lo_[j] = v.lower;
      hi_[j] = v.upper;
      cost_[j] = maximize_ ? -v.objective : v.objective;
    }
    // Merge duplicate (row, var) entries.
    for (int j = 0; j < n_; ++j) {
      auto& c = cols_[j];
      std::sort(c.begin(), c.end());
      std::vector<std::pair<int, double>> merged;
      for (const auto& e : c) {
        if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
        else merged.push_back(e);
      }
      c = std::move(merged);
    }
    phase2_cost_ = cost_;
    max_iterations_ = 2000L + 200L * (m_ + n_);
  }

  int rows() const { return m_; }
  int structurals() const { return n_; }
  long iterations() const { return iterations_; }

  double lower(int j) const { return lo_[j]; }
  double upper(int j) const { return hi_[j]; }
  void set_bounds(int j, double lo, double hi) {
    lo_[j] = lo;
    hi_[j] = hi;
  }

  /// Solve from scratch (phase 1 + phase 2).
  Result solve_cold() {
    cold_start();
    if (!run_phase1()) return Result::infeasible;
    return finish();
  }

  /// Solve starting from `basis` if it is usable, else cold.
  Result solve_warm(const Basis& basis) {
    if (!load_basis(basis)) return solve_cold();
    return resolve();
  }

  /// Re-optimize after bound changes, keeping the current basis.
  Result resolve() {
    if (!has_basis_) return solve_cold();
    snap_nonbasic();
    if (!factored_ && !refactor()) return solve_cold();
    compute_primal();
    if (!primal_feasible()) {
      compute_duals();
      if (!dual_feasible()) return solve_cold();
      auto r = dual_loop();
      if (r == Result::infeasible) return r;
      if (r != Result::optimal) return solve_cold();
    }
    return finish();
  }

  /// Structural values.
  std::vector<double> values() const { return {x_.begin(), x_.begin() + n_}; }

  double objective() const {
    double v = 0;
    for (int j = 0; j < n_; ++j) v += phase2_cost_[j] * x_[j];
    return maximize_ ? -v : v;
  }

  /// Row duals in the program's sense: d(objective)/d(rhs).
  std::vector<double> duals() const {
    std::vector<double> y(m_);
    for (int i = 0; i < m_; ++i) y[i] = maximize_ ? -pi_[i] : pi_[i];
    return y;
  }

  std::vector<double> reduced_costs() const {
    std::vector<double> rc(n_);
    for (int j = 0; j < n_; ++j) rc[j] = status_[j] == VarStatus::basic ? 0.0 : (maximize_ ? -d_[j] : d_[j]);
    return rc;
  }

  Basis basis() const {
    Basis b;
    b.variables.assign(status_.begin(), status_.begin() + n_);
    b.rows.assign(status_.begin() + n_, status_.begin() + n_ + m_);
    return b;
  }

 private:
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kDualTol = 1e-9;
  static constexpr int kRefactorEvery = 64;
  static constexpr int kMaxRepair = 16;
  static constexpr int kDegenerateBeforeBland = 50;
  static constexpr int kDegenerateBeforePerturb = 20;

  // -- bound perturbation against primal degeneracy ----------------------------

  // Widens the bounds of basic variables by small pseudo-random amounts so that
  // degenerate vertices split. The original bounds come back in restore_bounds.
  void perturb_basic_bounds() {
    if (saved_lo_.empty()) {
      saved_lo_ = lo_;
      saved_hi_ = hi_;
    }
    for (int r = 0; r < m_; ++r) {
      const int j = head_[r];
      if (j >= static_cast<int>(saved_lo_.size()) || lo_[j] != saved_lo_[j] || hi_[j] != saved_hi_[j]) continue;
      if (fixed(j)) continue;
      if (std::isfinite(lo_[j])) lo_[j] -= perturbation(lo_[j]);
      if (std::isfinite(hi_[j])) hi_[j] += perturbation(hi_[j]);
    }
  }

  // Pushes nonbasic reduced costs away from zero in their feasible direction.
  // finish() puts the true costs back before the primal clean-up.
  void perturb_nonbasic_costs() {
    for (int j = 0; j < total(); ++j) {
      if (status_[j] == VarStatus::basic || fixed(j)) continue;
      const double delta = perturbation(phase2_cost_[j]);
      cost_[j] += status_[j] == VarStatus::at_lower ? delta : -delta;
    }
  }

  double perturbation(double bound) {
    perturb_state_ = perturb_state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    const double u = 0.5 + 0.5 * static_cast<double>(perturb_state_ >> 11) / 9007199254740992.0;
    return 1e-6 * u * (1.0 + std::abs(bound));
  }

  bool perturbed() const { return !saved_lo_.empty(); }

  void restore_bounds() {
    for (std::size_t j = 0; j < saved_lo_.size() && j < lo_.size(); ++j) {
      lo_[j] = saved_lo_[j];
      hi_[j] = saved_hi_[j];
    }
    saved_lo_.clear();
    saved_hi_.clear();
    snap_nonbasic();
    compute_primal();
  }

  // -- basis bookkeeping -----------------------------------------------------

  double bound_value(int j, VarStatus s) const { return s == VarStatus::at_upper ? hi_[j] : lo_[j]; }

  VarStatus default_status(int j) const {
    return std::isfinite(lo_[j]) ? VarStatus::at_lower : VarStatus::at_upper;
  }

  void snap_nonbasic() {
    for (int j = 0; j < total(); ++j) {
      if (status_[j] == VarStatus::basic) continue;
      if (status_[j] == VarStatus::at_lower && !std::isfinite(lo_[j])) status_[j] = VarStatus::at_upper;
      if (status_[j] == VarStatus::at_upper && !std::isfinite(hi_[j])) status_[j] = VarStatus::at_lower;
      x_[j] = bound_value(j, status_[j]);
    }
  }

  int total() const { return static_cast<int>(cols_.size()); }

  bool load_basis(const Basis& b) {
    if (static_cast<int>(b.rows.size()) != m_ || static_cast<int>(b.variables.size()) > n_) return false;
    std::vector<VarStatus> wanted(n_ + m_);
    int basic = 0;
    for (int j = 0; j < n_ + m_; ++j) {
      wanted[j] = j < n_ ? (j < static_cast<int>(b.variables.size()) ? b.variables[j] : default_status(j))
                         : b.rows[j - n_];
      if (wanted[j] == VarStatus::basic) ++basic;
    }
    if (basic != m_) return false;
    const bool repaired = repair_basis(wanted);
    truncate_to(n_ + m_);
    status_ = std::move(wanted);
    if (!repaired) {
      head_.clear();
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == VarStatus::basic) head_.push_back(j);
      }
      factored_ = false;
      since_refactor_ = 0;
    }
    x_.assign(n_ + m_, 0.0);
    has_basis_ = true;
    return true;
  }

  // Moves the current factored basis to `wanted` with a few rank-one updates
  // when the two differ in only a handful of columns.
  bool repair_basis(const std::vector<VarStatus>& wanted) {
    if (!has_basis_ || !factored_ || static_cast<int>(head_.size()) != m_) return false;
    std::vector<int> leaving;
    std::vector<char> in_head(n_ + m_, 0);
    for (int r = 0; r < m_; ++r) {
      if (head_[r] >= n_ + m_) return false;
      in_head[head_[r]] = 1;
      if (wanted[head_[r]] != VarStatus::basic) leaving.push_back(r);
    }
    std::vector<int> entering;
    for (int j = 0; j < n_ + m_; ++j) {
      if (wanted[j] == VarStatus::basic && !in_head[j]) entering.push_back(j);
    }
    if (entering.size() != leaving.size() || static_cast<int>(entering.size()) > kMaxRepair ||
        since_refactor_ + static_cast<int>(entering.size()) >= kRefactorEvery) {
      return false;
    }
    auto saved_head = head_;
    auto saved_binv = binv_;
    std::vector<double> alpha(m_);
    for (int q : entering) {
      ftran(q, alpha);
      std::size_t pick = leaving.size();
      double best = 1e-7;
      for (std::size_t i = 0; i < leaving.size(); ++i) {
        if (std::abs(alpha[leaving[i]]) > best) {
          best = std::abs(alpha[leaving[i]]);
          pick = i;
        }
      }
      if (pick == leaving.size()) {
        head_ = std::move(saved_head);
        binv_ = std::move(saved_binv);
        return false;
      }
      head_[leaving[pick]] = q;
      update_inverse(leaving[pick], alpha);
      leaving.erase(leaving.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return true;
  }

  void cold_start() {
    cols_.resize(n_ + m_);
    lo_.resize(n_ + m_);
    hi_.resize(n_ + m_);
    phase2_cost_.resize(n_ + m_);
    status_.assign(n_ + m_, VarStatus::at_lower);
    x_.assign(n_ + m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      status_[j] = default_status(j);
      x_[j] = bound_value(j, status_[j]);
    }
    std::vector<double> activity(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for (const auto& [i, a] : cols_[j]) activity[i] += a * x_[j];
    }
    head_.assign(m_, -1);
    first_artificial_ = n_ + m_;
    cost_.assign(n_ + m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const int logical = n_ + i;
      const double a = activity[i];
      if (a >= lo_[logical] - feas_tol_ && a <= hi_[logical] + feas_tol_) {
        status_[logical] = VarStatus::basic;
        x_[logical] = a;
        head_[i] = logical;
        continue;
      }
      const bool below = a < lo_[logical];
      status_[logical] = below ? VarStatus::at_lower : VarStatus::at_upper;
      x_[logical] = below ? lo_[logical] : hi_[logical];
      // a x - r + sign * art = 0  =>  art = (r - a x) / sign >= 0
      const double residual = x_[logical] - a;
      const double sign = residual >= 0 ? 1.0 : -1.0;
      const int art = total();
      cols_.push_back({{i, sign}});
      lo_.push_back(0.0);
      hi_.push_back(kInf);
      cost_.push_back(1.0);
      phase2_cost_.push_back(0.0);
      status_.push_back(VarStatus::basic);
      x_.push_back(std::abs(residual));
      head_[i] = art;
    }
    has_basis_ = true;
    refactor();
  }

  bool run_phase1() {
    if (first_artificial_ == total()) {
      cost_ = phase2_cost_;
      return true;
    }
    auto r = primal_loop();
    if (r == Result::stalled) throw LpError("simplex stalled in phase 1");
    double infeasibility = 0;
    for (int j = first_artificial_; j < total(); ++j) infeasibility += x_[j];
    if (r != Result::optimal || infeasibility > std::max(1e-6, feas_tol_ * 10)) {
      remove_artificials_forcibly();
      return false;
    }
    drive_out_artificials();
    cost_ = phase2_cost_;
    return true;
  }

  void drive_out_artificials() {
    for (int j = first_artificial_; j < total(); ++j) {
      lo_[j] = hi_[j] = 0.0;
    }
    std::vector<double> alpha(m_);
    for (int r = 0; r < m_; ++r) {
      if (head_[r] < first_artificial_) continue;
      int best = -1;
      double best_abs = 1e-7;
      for (int j = 0; j < first_artificial_; ++j) {
        if (status_[j] == VarStatus::basic) continue;
        double v = row_times_column(r, j);
        if (std::abs(v) > best_abs) {
          best_abs = std::abs(v);
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row; artificial stays basic at zero
      ftran(best, alpha);
      const int leaving = head_[r];
      status_[leaving] = VarStatus::at_lower;
      x_[leaving] = 0.0;
      status_[best] = VarStatus::basic;
      head_[r] = best;
      update_inverse(r, alpha);
    }
    bool all_out = true;
    for (int r = 0; r < m_; ++r) all_out = all_out && head_[r] < first_artificial_;
    if (all_out) {
      truncate_to(first_artificial_);
    }
    refactor();
    compute_primal();
  }

  void remove_artificials_forcibly() {
    truncate_to(first_artificial_);
    has_basis_ = false;
    factored_ = false;
  }

  void truncate_to(int count) {
    cols_.resize(count);
    lo_.resize(count);
    hi_.resize(count);
    cost_.resize(count);
    phase2_cost_.resize(count);
    status_.resize(count);
    x_.resize(count);
    first_artificial_ = count;
  }

  Result finish() {
    cost_ = phase2_cost_;
    for (int attempt = 0; attempt < 4; ++attempt) {
      auto r = primal_loop(attempt == 0);
      if (perturbed()) restore_bounds();
      if (r == Result::stalled) throw LpError("simplex iteration limit exceeded");
      if (r != Result::optimal) return r;
      compute_primal();
      if (!primal_feasible() && since_refactor_ > 0) {
        refactor();
        compute_primal();
      }
      if (primal_feasible()) {
        compute_duals();
        if (dual_feasible()) return Result::optimal;
        continue;
      }
      compute_duals();
      r = dual_loop();
      cost_ = phase2_cost_;
      if (r == Result::infeasible) return r;
    }
    refactor();
    compute_primal();
    compute_duals();
    if (!primal_feasible()) throw LpError("simplex failed to reach a feasible basis");
    return Result::optimal;
  }

  // -- linear algebra --------------------------------------------------------

  bool refactor() {
    since_refactor_ = 0;
    std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      for (const auto& [i, a] : cols_[head_[r]]) b[static_cast<std::size_t>(i) * m_ + r] = a;
    }
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[static_cast<std::size_t>(i) * m_ + i] = 1.0;
    // Gauss-Jordan with partial pivoting on [B | I].
    std::vector<int> perm(m_);
    for (int c = 0; c < m_; ++c) {
      int piv = c;
      double best = std::abs(b[static_cast<std::size_t>(c) * m_ + c]);
      for (int i = c + 1; i < m_; ++i) {
        double v = std::abs(b[static_cast<std::size_t>(i) * m_ + c]);
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (best < 1e-11) {
        has_basis_ = false;
        factored_ = false;
        return false;
      }
      if (piv != c) {
        for (int k = 0; k < m_; ++k) {
          std::swap(b[static_cast<std::size_t>(c) * m_ + k], b[static_cast<std::size_t>(piv) * m_ + k]);
          std::swap(binv_[static_cast<std::size_t>(c) * m_ + k], binv_[static_cast<std::size_t>(piv) * m_ + k]);
        }
      }
      const double inv = 1.0 / b[static_cast<std::size_t>(c) * m_ + c];
      double* brow = &b[static_cast<std::size_t>(c) * m_];
      double* irow = &binv_[static_cast<std::size_t>(c) * m_];
      for (int k = c; k < m_; ++k) brow[k] *= inv;
      for (int k = 0; k < m_; ++k) irow[k] *= inv;
      for (int i = 0; i < m_; ++i) {
        if (i == c) continue;
        const double f = b[static_cast<std::size_t>(i) * m_ + c];
        if (f == 0.0) continue;
        double* bi = &b[static_cast<std::size_t>(i) * m_];
        double* ii = &binv_[static_cast<std::size_t>(i) * m_];
        for (int k = c; k < m_; ++k) bi[k] -= f * brow[k];
        for (int k = 0; k < m_; ++k) ii[k] -= f * irow[k];
      }
    }
    // After elimination [I | B^-1] where row r of B^-1 pairs with basic position r.
    factored_ = true;
    return true;
  }

  // alpha = B^-1 a_j
  void ftran(int j, std::vector<double>& alpha) const {
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (const auto& [i, a] : cols_[j]) {
      for (int r = 0; r < m_; ++r) alpha[r] += binv_[static_cast<std::size_t>(r) * m_ + i] * a;
    }
  }

  double row_times_column(int r, int j) const {
    double v = 0;
    const double* row = &binv_[static_cast<std::size_t>(r) * m_];
    for (const auto& [i, a] : cols_[j]) v += row[i] * a;
    return v;
  }

  void update_inverse(int r, const std::vector<double>& alpha) {
    double* prow = &binv_[static_cast<std::size_t>(r) * m_];
    const double inv = 1.0 / alpha[r];
    for (int k = 0; k < m_; ++k) prow[k] *= inv;
    for (int i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      double* row = &binv_[static_cast<std::size_t>(i) * m_];
      const double f = alpha[i];
      for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }
    ++since_refactor_;
  }

  void compute_primal() {
    std::vector<double> v(m_, 0.0);
    for (int j = 0; j < total(); ++j) {
      if (status_[j] == VarStatus::basic || x_[j] == 0.0) continue;
      for (const auto& [i, a] : cols_[j]) v[i] += a * x_[j];
    }
    for (int r = 0; r < m_; ++r) {
      const double* row = &binv_[static_cast<std::size_t>(r) * m_];
      double s = 0;
      for (int k = 0; k < m_; ++k) s += row[k] * v[k];
      x_[head_[r]] = -s;
    }
  }

  void compute_duals() {
    pi_.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const double c = cost_[head_[r]];
      if (c == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(r) * m_];
      for (int k = 0; k < m_; ++k) pi_[k] += c * row[k];
    }
    d_.assign(total(), 0.0);
    for (int j = 0; j < total(); ++j) {
      if (status_[j] == VarStatus::basic) continue;
      double v = cost_[j];
      for (const auto& [i, a] : cols_[j]) v -= pi_[i] * a;
      d_[j] = v;
    }
  }

  double infeasibility(int j) const {
    if (x_[j] < lo_[j] - feas_tol_) return lo_[j] - x_[j];
    if (x_[j] > hi_[j] + feas_tol_) return x_[j] - hi_[j];
    return 0.0;
  }

  bool primal_feasible() const {
    for (int r = 0; r < m_; ++r) {
      if (infeasibility(head_[r]) > 0) return false;
    }
    return true;
  }

  bool fixed(int j) const { return lo_[j] == hi_[j]; }

  bool dual_feasible() const {
    for (int j = 0; j < total(); ++j) {
      if (status_[j] == VarStatus::basic || fixed(j)) continue;
      if (status_[j] == VarStatus::at_lower && d_[j] < -kDualTol * 100) return false;
      if (status_[j] == VarStatus::at_upper && d_[j] > kDualTol * 100) return false;
    }
    return true;
  }

  bool within_iteration_budget() { return ++iterations_ <= max_iterations_ + total_iteration_base_; }

  // -- primal simplex --------------------------------------------------------

  Result primal_loop(bool allow_perturbation = false) {
    std::vector<double> alpha(m_);
    int degenerate_run = 0;
    int perturbations = 0;
    bool bland = false;
    total_iteration_base_ = iterations_;
    while (true) {
      if (!within_iteration_budget()) return Result::stalled;
      if (allow_perturbation && !bland && degenerate_run > kDegenerateBeforePerturb && perturbations < 8) {
        perturb_basic_bounds();
        ++perturbations;
        degenerate_run = 0;
      }
      if (since_refactor_ >= kRefactorEvery) {
        refactor();
        compute_primal();
      }
      compute_duals();
      int q = -1;
      double best = kDualTol;
      for (int j = 0; j < total(); ++j) {
        if (status_[j] == VarStatus::basic || fixed(j)) continue;
        double gain = status_[j] == VarStatus::at_lower ? -d_[j] : d_[j];
        if (gain > best) {
          q = j;
          best = gain;
          if (bland) break;
        }
      }
      if (q < 0) return Result::optimal;
      const double dir = status_[q] == VarStatus::at_lower ? 1.0 : -1.0;
      ftran(q, alpha);

      // Harris two-pass ratio test (plain min-ratio with index ties under Bland).
      double theta_max = kInf;
      for (int r = 0; r < m_; ++r) {
        const double g = dir * alpha[r];
        if (std::abs(g) <= kPivotTol) continue;
        const int b = head_[r];
        const double tol = bland ? 0.0 : feas_tol_;
        if (g > 0 && std::isfinite(lo_[b])) theta_max = std::min(theta_max, (x_[b] - lo_[b] + tol) / g);
        if (g < 0 && std::isfinite(hi_[b])) theta_max = std::min(theta_max, (hi_[b] - x_[b] + tol) / -g);
      }
      int leave = -1;
      double step = kInf;
      double best_pivot = 0;
      for (int r = 0; r < m_; ++r) {
        const double g = dir * alpha[r];
        if (std::abs(g) <= kPivotTol) continue;
        const int b = head_[r];
        double ratio = kInf;
        if (g > 0 && std::isfinite(lo_[b])) ratio = (x_[b] - lo_[b]) / g;
        if (g < 0 && std::isfinite(hi_[b])) ratio = (hi_[b] - x_[b]) / -g;
        if (!std::isfinite(ratio) || ratio > theta_max) continue;
        bool better = bland ? (leave < 0 || ratio < step - 1e-12 ||
                               (ratio <= step + 1e-12 && head_[r] < head_[leave]))
                            : std::abs(g) > best_pivot;
        if (better) {
          leave = r;
          step = ratio;
          best_pivot = std::abs(g);
        }
      }
      const double flip = hi_[q] - lo_[q];
      if (leave < 0 && !std::isfinite(flip)) return Result::unbounded;
      step = std::max(0.0, leave < 0 ? kInf : step);
      if (std::isfinite(flip) && flip <= step) {
        // Bound flip, no basis change.
        for (int r = 0; r < m_; ++r) x_[head_[r]] -= dir * flip * alpha[r];
        status_[q] = status_[q] == VarStatus::at_lower ? VarStatus::at_upper : VarStatus::at_lower;
        x_[q] = bound_value(q, status_[q]);
        degenerate_run = 0;
        continue;
      }
      for (int r = 0; r < m_; ++r) x_[head_[r]] -= dir * step * alpha[r];
      x_[q] += dir * step;
      const int out = head_[leave];
      const double g = dir * alpha[leave];
      status_[out] = g > 0 ? VarStatus::at_lower : VarStatus::at_upper;
      x_[out] = bound_value(out, status_[out]);
      status_[q] = VarStatus::basic;
      head_[leave] = q;
      update_inverse(leave, alpha);
      // Bland stays on until the objective moves noticeably.
      if (step * best < 1e-9) {
        if (++degenerate_run > kDegenerateBeforeBland + (allow_perturbation ? kDegenerateBeforePerturb : 0)) {
          bland = true;
        }
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  // -- dual simplex ----------------------------------------------------------

  Result dual_loop() {
    std::vector<double> alpha(m_);
    std::vector<double> row_alpha(total());
    total_iteration_base_ = iterations_;
    int degenerate_run = 0;
    int bad_pivots = 0;
    bool bland = false;
    bool costs_perturbed = false;
    while (true) {
      if (!within_iteration_budget()) return Result::stalled;
      if (!costs_perturbed && degenerate_run > kDegenerateBeforePerturb) {
        perturb_nonbasic_costs();
        costs_perturbed = true;
        degenerate_run = 0;
      }
      if (since_refactor_ >= kRefactorEvery) {
        refactor();
        compute_primal();
      }
      compute_duals();
      // Dual steepest edge: infeasibility^2 over the squared norm of the B^-1 row.
      int leave = -1;
      double worst = 0;
      for (int r = 0; r < m_; ++r) {
        const double inf = infeasibility(head_[r]);
        if (inf <= 0) continue;
        double score = 0;
        if (!bland) {
          double norm = 0;
          const double* row = &binv_[static_cast<std::size_t>(r) * m_];
          for (int i = 0; i < m_; ++i) norm += row[i] * row[i];
          score = inf * inf / std::max(norm, 1e-12);
        }
        if (bland ? (leave < 0 || head_[r] < head_[leave]) : score > worst) {
          worst = score;
          leave = r;
        }
      }
      if (leave < 0) return Result::optimal;
      const int out = head_[leave];
      const bool to_lower = x_[out] < lo_[out];
      const double target = to_lower ? lo_[out] : hi_[out];

      double theta_max = kInf;
      for (int j = 0; j < total(); ++j) {
        row_alpha[j] = 0;
        if (status_[j] == VarStatus::basic || fixed(j)) continue;
        const double a = row_times_column(leave, j);
        row_alpha[j] = a;
        if (!dual_eligible(j, a, to_lower)) continue;
        const double tol = bland ? 0.0 : kDualTol;
        theta_max = std::min(theta_max, (std::abs(d_[j]) + tol) / std::abs(a));
      }
      int q = -1;
      double best_pivot = 0;
      double q_ratio = kInf;
      for (int j = 0; j < total(); ++j) {
        if (status_[j] == VarStatus::basic || fixed(j)) continue;
        const double a = row_alpha[j];
        if (!dual_eligible(j, a, to_lower)) continue;
        const double ratio = std::abs(d_[j]) / std::abs(a);
        if (ratio > theta_max) continue;
        // Under Bland the first minimum-ratio index wins.
        const bool better = bland ? ratio < q_ratio - 1e-12 : std::abs(a) > best_pivot;
        if (better) {
          best_pivot = std::abs(a);
          q_ratio = ratio;
          q = j;
        }
      }
      if (q < 0) return Result::infeasible;
      ftran(q, alpha);
      if (std::abs(alpha[leave]) <= kPivotTol) {
        refactor();
        compute_primal();
        if (++bad_pivots > 5) return Result::stalled;
        continue;
      }
      const double delta = (x_[out] - target) / alpha[leave];
      for (int r = 0; r < m_; ++r) x_[head_[r]] -= delta * alpha[r];
      x_[q] += delta;
      status_[out] = to_lower ? VarStatus::at_lower : VarStatus::at_upper;
      x_[out] = target;
      status_[q] = VarStatus::basic;
      head_[leave] = q;
      update_inverse(leave, alpha);
      if (q_ratio < 1e-9 && !bland) {
        if (++degenerate_run > kDegenerateBeforeBland && costs_perturbed) bland = true;
      } else if (q_ratio >= 1e-9) {
        degenerate_run = 0;
      }
    }
  }

  bool dual_eligible(int j, double a, bool to_lower) const {
    if (std::abs(a) <= kPivotTol) return false;
    const bool at_lower = status_[j] == VarStatus::at_lower;
    return to_lower ? (at_lower ? a < 0 : a > 0) : (at_lower ? a > 0 : a < 0);
  }

  int m_;
  int n_;
  double feas_tol_;
  bool maximize_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lo_, hi_, cost_, phase2_cost_;
  std::vector<VarStatus> status_;
  std::vector<int> head_;
  std::vector<double> x_;
  std::vector<double> binv_;
  std::vector<double> pi_, d_;
  int first_artificial_{0};
  int since_refactor_{0};
  bool has_basis_{false};
  bool factored_{false};
  long iterations_{0};
  long total_iteration_base_{0};
  long max_iterations_{0};
  std::vector<double> saved_lo_, saved_hi_;
  std::uint64_t perturb_state_{0x9E3779B97F4A7C15ULL};
};

}  // namespace mbcg::lp::detail
