#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "mbcg/lp/program.hpp"
#include "mbcg/lp/simplex.hpp"

namespace mbcg::lp {

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline Status to_status(Simplex::Result r) {
  switch (r) {
    case Simplex::Result::optimal: return Status::optimal;
    case Simplex::Result::infeasible: return Status::infeasible;
    case Simplex::Result::unbounded: return Status::unbounded;
    case Simplex::Result::stalled: throw LpError("simplex stalled");
  }
  return Status::infeasible;
}

inline void fill_lp_solution(const Simplex& sx, LpSolution& out) {
  out.values = sx.values();
  out.objective = sx.objective();
  out.duals = sx.duals();
  out.reduced_costs = sx.reduced_costs();
  out.best_bound = out.objective;
  out.basis = sx.basis();
}

}  // namespace detail

/// Dual objective sum(y_i b_i) + sum(rc_j x_j) of an optimal LP exit.
inline double dual_objective(const LinearProgram& lp, const LpSolution& s) {
  double v = 0;
  for (int i = 0; i < lp.row_count(); ++i) v += s.duals.at(i) * lp.row(i).rhs;
  for (int j = 0; j < lp.variable_count(); ++j) {
    if (s.reduced_costs.at(j) != 0.0) v += s.reduced_costs[j] * s.values.at(j);
  }
  return v;
}

/// Solves the continuous relaxation. `warm` may come from a previous solve of a
/// program with the same rows and a prefix of the same variables.
inline LpSolution solve_lp(const LinearProgram& lp, const SolveOptions& options = {}, const Basis* warm = nullptr) {
  lp.validate();
  const auto start = std::chrono::steady_clock::now();
  detail::Simplex sx(lp, options.feasibility_tolerance);
  auto r = warm && !warm->empty() ? sx.solve_warm(*warm) : sx.solve_cold();
  LpSolution out;
  out.status = detail::to_status(r);
  if (r == detail::Simplex::Result::optimal) detail::fill_lp_solution(sx, out);
  out.iterations = sx.iterations();
  out.wall_seconds = detail::seconds_since(start);
  return out;
}

namespace detail {

struct BoundChange {
  int var;
  double lower;
  double upper;
};

struct Node {
  std::vector<BoundChange> changes;
  Basis basis;
  std::vector<double> values;
  double score;  // LP bound in maximization sense
  int depth{0};
};

class BranchAndBound {
 public:
  BranchAndBound(const LinearProgram& lp, const SolveOptions& options)
      : lp_(lp), opt_(options), sx_(lp, options.feasibility_tolerance),
        sign_(lp.sense() == Sense::maximize ? 1.0 : -1.0), start_(std::chrono::steady_clock::now()) {
    for (int j = 0; j < lp.variable_count(); ++j) {
      if (lp.variable(j).integer) integers_.push_back(j);
    }
    for (int side = 0; side < 2; ++side) {
      pc_sum_[side].assign(lp.variable_count(), 0.0);
      pc_count_[side].assign(lp.variable_count(), 0);
    }
  }

  LpSolution run(const Basis* warm, const std::vector<double>* start) {
    LpSolution out;
    if (start && static_cast<int>(start->size()) == lp_.variable_count() && integral(*start) &&
        lp_.max_violation(*start) <= 10 * opt_.feasibility_tolerance) {
      offer(*start);
    }
    auto root = warm && !warm->empty() ? sx_.solve_warm(*warm) : sx_.solve_cold();
    out.iterations = sx_.iterations();
    if (root != Simplex::Result::optimal) {
      out.status = to_status(root);
      return finish(out);
    }
    Node node{{}, sx_.basis(), sx_.values(), sign_ * sx_.objective(), 0};
    root_bound_ = node.score;
    try_incumbent(node.values, {}, node.basis);
    rounding_heuristic(node, {});
    dive(node);
    std::vector<Node> stack;
    stack.push_back(std::move(node));
    record_gap(stack);
    bool timed_out = false;
    while (!stack.empty()) {
      if (seconds_since(start_) > opt_.time_limit_seconds || (opt_.node_limit >= 0 && nodes_ >= opt_.node_limit)) {
        timed_out = true;
        break;
      }
      if (has_incumbent_ && relative_gap(global_bound(stack), incumbent_score_) <= opt_.relative_gap &&
          opt_.relative_gap > 0) {
        break;
      }
      Node cur = std::move(stack.back());
      stack.pop_back();
      ++nodes_;
      if (prunable(cur.score)) {
        note_pruned(cur.score);
        record_gap(stack);
        continue;
      }
      const int j = select_branch(cur.values);
      if (j < 0) {
        try_incumbent(cur.values, cur.changes, cur.basis);
        record_gap(stack);
        continue;
      }
      const double v = cur.values[j];
      auto [lo, hi] = current_bounds(cur.changes, j);
      std::vector<Node> kids;
      for (int side = 0; side < 2; ++side) {
        auto changes = cur.changes;
        if (side == 0) changes.push_back({j, lo, std::floor(v)});
        else changes.push_back({j, std::ceil(v), hi});
        auto kid = evaluate(changes, cur.basis, cur.depth + 1);
        if (kid) {
          const double dist = side == 0 ? v - std::floor(v) : std::ceil(v) - v;
          const double unit = std::max(0.0, cur.score - kid->score) / std::max(dist, 1e-6);
          if (pc_count_[side][j] == 0) ++pc_seen_[side];
          pc_unit_total_[side] += unit / (pc_count_[side][j] + 1) - pc_mean(side, j) / (pc_count_[side][j] + 1);
          pc_sum_[side][j] += unit;
          pc_count_[side][j] += 1;
          kids.push_back(std::move(*kid));
        }
      }
      // Worse child first so the better one is explored next.
      std::sort(kids.begin(), kids.end(), [](const Node& a, const Node& b) { return a.score < b.score; });
      for (auto& k : kids) {
        if (branching_variable(k.values) < 0) {
          try_incumbent(k.values, k.changes, k.basis);
        } else if (cur.depth < 2 || nodes_ % 16 == 0) {
          rounding_heuristic(k, k.changes);
          if (nodes_ % 64 == 0) dive(k);
        }
        if (prunable(k.score)) {
          note_pruned(k.score);
          continue;
        }
        if (branching_variable(k.values) >= 0) stack.push_back(std::move(k));
      }
      record_gap(stack);
    }
    out.iterations = sx_.iterations();
    if (!has_incumbent_) {
      out.status = timed_out ? Status::time_limit : Status::infeasible;
      if (timed_out) out.best_bound = sign_ * global_bound(stack);
      return finish(out);
    }
    const double bound = std::max(incumbent_score_, global_bound(stack));
    out.values = incumbent_;
    out.objective = lp_.objective_value(incumbent_);
    out.best_bound = sign_ * bound;
    out.relative_gap = relative_gap(bound, incumbent_score_);
    if (timed_out) out.status = Status::time_limit;
    else if (out.relative_gap <= 1e-9) out.status = Status::optimal;
    else out.status = Status::gap_reached;
    record_gap(stack);
    return finish(out);
  }

 private:
  LpSolution& finish(LpSolution& out) {
    out.nodes = nodes_;
    out.gap_history = gap_history_;
    out.wall_seconds = seconds_since(start_);
    return out;
  }

  double tol_abs() const { return 1e-9 * std::max(1.0, std::abs(incumbent_score_)); }

  bool prunable(double score) const {
    if (!has_incumbent_) return false;
    if (score <= incumbent_score_ + tol_abs()) return true;
    return opt_.relative_gap > 0 && relative_gap(score, incumbent_score_) <= opt_.relative_gap;
  }

  void note_pruned(double score) {
    if (score > incumbent_score_ + tol_abs()) pruned_bound_ = std::max(pruned_bound_, score);
  }

  double global_bound(const std::vector<Node>& stack) const {
    double b = has_incumbent_ ? std::max(incumbent_score_, pruned_bound_) : -kInf;
    for (const auto& n : stack) b = std::max(b, n.score);
    if (stack.empty() && !has_incumbent_) return root_bound_;
    return std::min(b, root_bound_);
  }

  void record_gap(const std::vector<Node>& stack) {
    if (!has_incumbent_) return;
    double g = relative_gap(std::max(incumbent_score_, global_bound(stack)), incumbent_score_);
    if (!gap_history_.empty()) g = std::min(g, gap_history_.back());
    if (gap_history_.empty() || g < gap_history_.back()) gap_history_.push_back(g);
  }

  std::pair<double, double> current_bounds(const std::vector<BoundChange>& changes, int j) const {
    double lo = lp_.variable(j).lower;
    double hi = lp_.variable(j).upper;
    for (const auto& c : changes) {
      if (c.var == j) {
        lo = c.lower;
        hi = c.upper;
      }
    }
    return {lo, hi};
  }

  void apply(const std::vector<BoundChange>& changes) {
    for (int j = 0; j < lp_.variable_count(); ++j) sx_.set_bounds(j, lp_.variable(j).lower, lp_.variable(j).upper);
    for (const auto& c : changes) sx_.set_bounds(c.var, c.lower, c.upper);
  }

  std::optional<Node> evaluate(const std::vector<BoundChange>& changes, const Basis& basis, int depth) {
    for (const auto& c : changes) {
      if (c.lower > c.upper) return std::nullopt;
    }
    apply(changes);
    auto r = sx_.solve_warm(basis);
    if (r != Simplex::Result::optimal) return std::nullopt;
    return Node{changes, sx_.basis(), sx_.values(), sign_ * sx_.objective(), depth};
  }

  bool integral(const std::vector<double>& x) const {
    for (int j : integers_) {
      if (std::abs(x[j] - std::round(x[j])) > opt_.integrality_tolerance) return false;
    }
    return true;
  }

  int branching_variable(const std::vector<double>& x) const {
    int best = -1;
    int best_priority = 0;
    double best_frac = opt_.integrality_tolerance;
    for (int j : integers_) {
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f <= opt_.integrality_tolerance) continue;
      const int pr = lp_.variable(j).priority;
      if (best < 0 || pr > best_priority || (pr == best_priority && f > best_frac + 1e-12)) {
        best_frac = f;
        best_priority = pr;
        best = j;
      }
    }
    return best;
  }

  // Product-rule pseudocost choice inside the highest fractional priority class;
  // variables without history count as the class average.
  double pc_mean(int side, int j) const {
    return pc_count_[side][j] > 0 ? pc_sum_[side][j] / pc_count_[side][j] : 0.0;
  }

  int select_branch(const std::vector<double>& x) const {
    const int first = branching_variable(x);
    if (first < 0) return -1;
    const int priority = lp_.variable(first).priority;
    std::array<double, 2> avg{1.0, 1.0};
    for (int side = 0; side < 2; ++side) {
      if (pc_seen_[side] > 0 && pc_unit_total_[side] > 0) avg[side] = pc_unit_total_[side] / pc_seen_[side];
    }
    int best = first;
    double best_score = -1;
    for (int j : integers_) {
      const double f = x[j] - std::floor(x[j]);
      if (f <= opt_.integrality_tolerance || f >= 1 - opt_.integrality_tolerance) continue;
      if (lp_.variable(j).priority != priority) continue;
      std::array<double, 2> unit = avg;
      for (int side = 0; side < 2; ++side) {
        if (pc_count_[side][j] > 0) unit[side] = pc_mean(side, j);
      }
      const double score = std::max(unit[0] * f, 1e-6) * std::max(unit[1] * (1 - f), 1e-6);
      if (score > best_score + 1e-12) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  // Accepts `x` if rounding the integer variables keeps it feasible; otherwise
  // fixes them and re-optimizes the continuous part.
  void try_incumbent(std::vector<double> x, const std::vector<BoundChange>& changes, const Basis& basis) {
    for (int j : integers_) x[j] = std::round(x[j]);
    if (lp_.max_violation(x) <= 10 * opt_.feasibility_tolerance) {
      offer(x);
      return;
    }
    polish(x, changes, basis);
  }

  void polish(const std::vector<double>& x, const std::vector<BoundChange>& changes, const Basis& basis) {
    auto fixed = changes;
    for (int j : integers_) {
      double v = std::round(x[j]);
      auto [lo, hi] = current_bounds(changes, j);
      v = std::clamp(v, lo, hi);
      fixed.push_back({j, v, v});
    }
    apply(fixed);
    if (sx_.solve_warm(basis) != Simplex::Result::optimal) return;
    auto y = sx_.values();
    for (int j : integers_) y[j] = std::round(y[j]);
    if (lp_.max_violation(y) <= 10 * opt_.feasibility_tolerance) offer(y);
  }

  void rounding_heuristic(const Node& node, const std::vector<BoundChange>& changes) {
    std::vector<double> x = node.values;
    for (int j : integers_) {
      auto [lo, hi] = current_bounds(changes, j);
      x[j] = std::clamp(std::floor(x[j] + opt_.integrality_tolerance), lo, hi);
    }
    polish(x, changes, node.basis);
  }

  // Fixes the least fractional integer to its nearest value and re-solves, until
  // the LP solution is integral or no direction stays feasible.
  void dive(const Node& start) {
    auto changes = start.changes;
    auto basis = start.basis;
    auto x = start.values;
    for (std::size_t step = 0; step <= integers_.size(); ++step) {
      int pick = -1;
      double best = 1.0;
      for (int j : integers_) {
        const double f = std::abs(x[j] - std::round(x[j]));
        if (f > opt_.integrality_tolerance && f < best) {
          best = f;
          pick = j;
        }
      }
      if (pick < 0) {
        try_incumbent(x, changes, basis);
        return;
      }
      auto [lo, hi] = current_bounds(changes, pick);
      const double near = std::round(x[pick]);
      const double far = near > x[pick] ? std::floor(x[pick]) : std::ceil(x[pick]);
      bool moved = false;
      for (double v : {near, far}) {
        if (v < lo || v > hi) continue;
        auto trial = changes;
        trial.push_back({pick, v, v});
        apply(trial);
        if (sx_.solve_warm(basis) != Simplex::Result::optimal) continue;
        if (has_incumbent_ && sign_ * sx_.objective() <= incumbent_score_ + tol_abs()) return;
        changes = std::move(trial);
        basis = sx_.basis();
        x = sx_.values();
        moved = true;
        break;
      }
      if (!moved) return;
    }
  }

  void offer(const std::vector<double>& x) {
    const double s = sign_ * lp_.objective_value(x);
    if (!has_incumbent_ || s > incumbent_score_ + 1e-12 * std::max(1.0, std::abs(s))) {
      incumbent_ = x;
      incumbent_score_ = s;
      has_incumbent_ = true;
    }
  }

  const LinearProgram& lp_;
  SolveOptions opt_;
  Simplex sx_;
  double sign_;
  std::chrono::steady_clock::time_point start_;
  std::vector<int> integers_;
  std::vector<double> incumbent_;
  double incumbent_score_{-kInf};
  bool has_incumbent_{false};
  double pruned_bound_{-kInf};
  double root_bound_{kInf};
  long nodes_{0};
  std::vector<double> gap_history_;
  // Per side (down, up): objective loss per unit change, summed over branchings.
  std::array<std::vector<double>, 2> pc_sum_;
  std::array<std::vector<long>, 2> pc_count_;
  // Sum of the per-variable means and number of variables with history.
  std::array<double, 2> pc_unit_total_{};
  std::array<long, 2> pc_seen_{};
};

}  // namespace detail

/// Branch and bound over the integer variables. Without integers this is solve_lp.
/// `warm` seeds the root relaxation; a feasible integral `start` becomes the
/// first incumbent.
inline LpSolution solve_milp(const LinearProgram& lp, const SolveOptions& options = {}, const Basis* warm = nullptr,
                             const std::vector<double>* start = nullptr) {
  if (!lp.has_integers()) return solve_lp(lp, options, warm);
  lp.validate();
  detail::BranchAndBound bb(lp, options);
  return bb.run(warm, start);
}

}  // namespace mbcg::lp
