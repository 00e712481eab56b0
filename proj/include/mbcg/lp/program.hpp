#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbcg::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Sense { maximize, minimize };
enum class Relation { less_equal, equal, greater_equal };

struct Term {
  int var;
  double coef;
};

struct Row {
  std::vector<Term> terms;
  Relation relation{Relation::less_equal};
  double rhs{0};
  std::string label;
};

struct Variable {
  double objective{0};
  double lower{0};
  double upper{kInf};
  bool integer{false};
  std::string label;
  /// Branch and bound branches on fractional variables of the highest priority first.
  int priority{0};
};

/// Sparse row-wise linear program. Variables need a finite lower or upper bound.
class LinearProgram {
 public:
  explicit LinearProgram(Sense sense = Sense::maximize) : sense_(sense) {}

  int add_variable(double objective, double lower = 0.0, double upper = kInf, bool integer = false,
                   std::string label = {}) {
    const int id = variable_count();
    if (!label.empty() && !var_labels_.emplace(label, id).second) {
      throw LpError("duplicate variable label '" + label + "'");
    }
    vars_.push_back({objective, lower, upper, integer, std::move(label), 0});
    return id;
  }

  int add_row(std::vector<Term> terms, Relation relation, double rhs, std::string label = {}) {
    const int id = row_count();
    if (!label.empty() && !row_labels_.emplace(label, id).second) {
      throw LpError("duplicate row label '" + label + "'");
    }
    rows_.push_back({std::move(terms), relation, rhs, std::move(label)});
    return id;
  }

  void add_term(int row, int var, double coef) { rows_.at(row).terms.push_back({var, coef}); }

  void set_bounds(int var, double lower, double upper) {
    vars_.at(var).lower = lower;
    vars_.at(var).upper = upper;
  }
  void set_integer(int var, bool integer = true) { vars_.at(var).integer = integer; }
  void set_priority(int var, int priority) { vars_.at(var).priority = priority; }
  void set_objective(int var, double c) { vars_.at(var).objective = c; }

  Sense sense() const { return sense_; }
  int variable_count() const { return static_cast<int>(vars_.size()); }
  int row_count() const { return static_cast<int>(rows_.size()); }
  const Variable& variable(int j) const { return vars_.at(j); }
  const std::vector<Variable>& variables() const { return vars_; }
  const Row& row(int i) const { return rows_.at(i); }
  const std::vector<Row>& rows() const { return rows_; }

  bool has_integers() const {
    for (const auto& v : vars_) {
      if (v.integer) return true;
    }
    return false;
  }

  std::optional<int> row_index(const std::string& label) const {
    auto it = row_labels_.find(label);
    if (it == row_labels_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<int> variable_index(const std::string& label) const {
    auto it = var_labels_.find(label);
    if (it == var_labels_.end()) return std::nullopt;
    return it->second;
  }

  double objective_value(const std::vector<double>& x) const {
    double v = 0;
    for (int j = 0; j < variable_count(); ++j) v += vars_[j].objective * x.at(j);
    return v;
  }

  double row_activity(int i, const std::vector<double>& x) const {
    double v = 0;
    for (const auto& t : rows_.at(i).terms) v += t.coef * x.at(t.var);
    return v;
  }

  /// Largest bound or row violation of `x`.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0;
    for (int j = 0; j < variable_count(); ++j) {
      worst = std::max({worst, vars_[j].lower - x[j], x[j] - vars_[j].upper});
    }
    for (int i = 0; i < row_count(); ++i) {
      const double a = row_activity(i, x);
      const auto& r = rows_[i];
      if (r.relation != Relation::greater_equal) worst = std::max(worst, a - r.rhs);
      if (r.relation != Relation::less_equal) worst = std::max(worst, r.rhs - a);
    }
    return worst;
  }

  /// Throws LpError on index or numeric problems.
  void validate() const {
    for (int j = 0; j < variable_count(); ++j) {
      const auto& v = vars_[j];
      if (std::isnan(v.objective) || !std::isfinite(v.objective)) throw LpError("objective coefficient of variable " + std::to_string(j) + " is not finite");
      if (std::isnan(v.lower) || std::isnan(v.upper)) throw LpError("NaN bound on variable " + std::to_string(j));
      if (v.lower > v.upper) throw LpError("empty bound interval on variable " + std::to_string(j));
      if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) {
        throw LpError("free variable " + std::to_string(j) + " is not supported");
      }
    }
    for (int i = 0; i < row_count(); ++i) {
      const auto& r = rows_[i];
      if (!std::isfinite(r.rhs)) throw LpError("right-hand side of row " + std::to_string(i) + " is not finite");
      for (const auto& t : r.terms) {
        if (t.var < 0 || t.var >= variable_count()) {
          throw LpError("row " + std::to_string(i) + " references variable " + std::to_string(t.var) + " out of range");
        }
        if (!std::isfinite(t.coef)) throw LpError("coefficient in row " + std::to_string(i) + " is not finite");
      }
    }
  }

  /// CPLEX LP text format, for cross-checking with external solvers.
  std::string to_lp_format() const {
    std::ostringstream out;
    out.precision(17);
    auto name = [&](int j) { return vars_[j].label.empty() ? "x" + std::to_string(j) : sanitize(vars_[j].label); };
    auto write_terms = [&](const auto& coefs) {
      bool first = true;
      for (const auto& [j, c] : coefs) {
        if (c == 0) continue;
        out << (c < 0 ? " - " : (first ? " " : " + ")) << std::abs(c) << ' ' << name(j);
        first = false;
      }
      if (first) out << " 0 " << name(0);
    };
    out << (sense_ == Sense::maximize ? "Maximize\n" : "Minimize\n") << " obj:";
    std::vector<std::pair<int, double>> obj;
    for (int j = 0; j < variable_count(); ++j) obj.emplace_back(j, vars_[j].objective);
    write_terms(obj);
    out << "\nSubject To\n";
    for (int i = 0; i < row_count(); ++i) {
      const auto& r = rows_[i];
      out << ' ' << (r.label.empty() ? "r" + std::to_string(i) : sanitize(r.label)) << ':';
      std::vector<std::pair<int, double>> coefs;
      for (const auto& t : r.terms) coefs.emplace_back(t.var, t.coef);
      write_terms(coefs);
      out << (r.relation == Relation::less_equal ? " <= " : r.relation == Relation::equal ? " = " : " >= ") << r.rhs << '\n';
    }
    out << "Bounds\n";
    for (int j = 0; j < variable_count(); ++j) {
      const auto& v = vars_[j];
      out << ' ';
      if (std::isfinite(v.lower)) out << v.lower << " <= "; else out << "-inf <= ";
      out << name(j);
      if (std::isfinite(v.upper)) out << " <= " << v.upper; else out << " <= +inf";
      out << '\n';
    }
    bool any_int = false;
    for (int j = 0; j < variable_count(); ++j) {
      if (!vars_[j].integer) continue;
      if (!any_int) out << "Generals\n";
      any_int = true;
      out << ' ' << name(j) << '\n';
    }
    out << "End\n";
    return out.str();
  }

 private:
  static std::string sanitize(std::string s) {
    for (char& c : s) {
      if (c == ' ' || c == ',' || c == ':' || c == '[' || c == ']' || c == '=' || c == '<' || c == '>') c = '_';
    }
    return s;
  }

  Sense sense_;
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  std::map<std::string, int> row_labels_;
  std::map<std::string, int> var_labels_;
};

enum class Status { optimal, infeasible, unbounded, gap_reached, time_limit };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::gap_reached: return "gap_reached";
    case Status::time_limit: return "time_limit";
  }
  return "unknown";
}

struct SolveOptions {
  double relative_gap{0.0};
  double time_limit_seconds{kInf};
  double feasibility_tolerance{1e-7};
  double integrality_tolerance{1e-6};
  /// Branch-and-bound node budget; reported as time_limit when exhausted.
  /// Unlike the wall-clock limit it gives reproducible results.
  long node_limit{-1};
};

enum class VarStatus : std::uint8_t { basic, at_lower, at_upper };

/// Simplex basis: one status per variable and per row (the row's slack).
struct Basis {
  std::vector<VarStatus> variables;
  std::vector<VarStatus> rows;
  bool empty() const { return rows.empty(); }
};

struct LpSolution {
  Status status{Status::infeasible};
  double objective{std::numeric_limits<double>::quiet_NaN()};
  std::vector<double> values;
  /// d(objective)/d(rhs) per row, in the program's own sense. LP only.
  std::vector<double> duals;
  /// Objective-sense reduced costs of the structural variables. LP only.
  std::vector<double> reduced_costs;
  double best_bound{std::numeric_limits<double>::quiet_NaN()};
  double relative_gap{0.0};
  /// Gap after each incumbent or bound improvement (MILP only).
  std::vector<double> gap_history;
  double wall_seconds{0.0};
  long iterations{0};
  long nodes{0};
  Basis basis;

  bool has_solution() const { return !values.empty(); }
};

/// (bound - incumbent) / max(1, |incumbent|).
inline double relative_gap(double bound, double incumbent) {
  return std::max(0.0, bound - incumbent) / std::max(1.0, std::abs(incumbent));
}

}  // namespace mbcg::lp
