#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tollcast/eps_rational.hpp"
#include "tollcast/rational.hpp"

namespace tollcast {

enum class RowSense { le, eq, ge };
enum class ObjSense { minimize, maximize };

/// Exact linear program over an ordered field T: an objective, rows tagged
/// with a sense, and per-variable bounds (absent bound = unbounded side).
template <typename T>
struct LinearProgram {
  struct Row {
    std::vector<std::pair<int, T>> coeffs;  // sparse (variable, coefficient)
    RowSense sense = RowSense::le;
    T rhs{0};
  };

  ObjSense sense = ObjSense::minimize;
  std::vector<T> objective;
  std::vector<std::optional<T>> lower;
  std::vector<std::optional<T>> upper;
  std::vector<Row> rows;

  int variable_count() const { return static_cast<int>(objective.size()); }

  int add_variable(std::optional<T> lo, std::optional<T> hi, T obj = T(0)) {
    objective.push_back(std::move(obj));
    lower.push_back(std::move(lo));
    upper.push_back(std::move(hi));
    return variable_count() - 1;
  }

  void add_row(std::vector<std::pair<int, T>> coeffs, RowSense s, T rhs) {
    rows.push_back(Row{std::move(coeffs), s, std::move(rhs)});
  }
};

template <typename T>
struct LpOptimal {
  std::vector<T> primal;
  std::vector<T> row_duals;      // one per row; see sign convention below
  std::vector<T> reduced_costs;  // one per variable (bound multipliers)
  T objective{0};
};

template <typename T>
struct LpInfeasible {
  // Row multipliers y proving emptiness: y >= 0 on ge rows, y <= 0 on le
  // rows, and sup of y^T A x over the variable box falls strictly below
  // y^T b.
  std::vector<T> farkas;
};

template <typename T>
struct LpUnbounded {
  std::vector<T> point;  // feasible point
  std::vector<T> ray;    // improving recession direction
};

/// Outcome of an exact solve. Row duals follow the Lagrangian convention of
/// the stated problem: for minimize, duals are >= 0 on ge rows and <= 0 on
/// le rows; for maximize the signs flip. Every outcome is self-checked
/// before being returned (exact feasibility, complementary slackness,
/// certificate validity); a failed check raises InternalError.
template <typename T>
struct LpOutcome {
  std::variant<LpOptimal<T>, LpInfeasible<T>, LpUnbounded<T>> result;

  bool is_optimal() const { return std::holds_alternative<LpOptimal<T>>(result); }
  bool is_infeasible() const { return std::holds_alternative<LpInfeasible<T>>(result); }
  bool is_unbounded() const { return std::holds_alternative<LpUnbounded<T>>(result); }
  const LpOptimal<T>& optimal() const { return std::get<LpOptimal<T>>(result); }
  const LpInfeasible<T>& infeasible() const { return std::get<LpInfeasible<T>>(result); }
  const LpUnbounded<T>& unbounded() const { return std::get<LpUnbounded<T>>(result); }

  // Pivot sequence (entering column, leaving column or -1 for a bound flip),
  // recorded for determinism checks and diagnostics.
  std::vector<std::pair<int, int>> pivots;
};

/// Primal simplex with Bland's least-index rule, native variable bounds and
/// a full artificial phase-1 basis. Deterministic: identical inputs produce
/// identical pivot sequences.
template <typename T>
LpOutcome<T> solve_lp(const LinearProgram<T>& lp);

extern template LpOutcome<Rational> solve_lp(const LinearProgram<Rational>&);
extern template LpOutcome<EpsRational> solve_lp(const LinearProgram<EpsRational>&);

}  // namespace tollcast
