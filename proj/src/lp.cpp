#include "tollcast/lp.hpp"

#include <cstdlib>
#include <iostream>

#include "tollcast/errors.hpp"
#include "tollcast/linalg.hpp"
#include "tollcast/scalar.hpp"

namespace tollcast {

namespace {

int verbosity() {
  static int level = [] {
    const char* v = std::getenv("TOLLCAST_VERBOSE");
    return v ? std::atoi(v) : 0;
  }();
  return level;
}

constexpr long kPivotCap = 2000000;

enum class VarState : unsigned char { basic, at_lower, at_upper, free_zero };

template <typename T>
class Simplex {
 public:
  explicit Simplex(const LinearProgram<T>& lp) : lp_(lp) { build(); }

  LpOutcome<T> run() {
    LpOutcome<T> out;
    if (!phase1(out)) {
      verify(out);
      return out;
    }
    phase2(out);
    verify(out);
    return out;
  }

 private:
  const LinearProgram<T>& lp_;
  int nv_ = 0;      // structural variables
  int nslack_ = 0;  // one per inequality row
  int m_ = 0;       // rows
  int ncols_ = 0;   // structural + slack + artificial
  std::vector<std::vector<T>> a_;     // original column data, m_ x ncols_
  std::vector<T> b_;                  // original rhs
  std::vector<std::optional<T>> lo_, hi_;
  std::vector<T> cost_;               // current phase costs
  std::vector<int> art_sign_;         // +-1 per row
  std::vector<int> slack_col_;        // per row, -1 for equality rows
  std::vector<int> art_col_;          // per row

  std::vector<std::vector<T>> tab_;   // basis-inverse times a_
  std::vector<T> zrow_;               // reduced costs for current phase
  std::vector<T> val_;                // current value of every column
  std::vector<int> basis_;            // basic column per row
  std::vector<VarState> state_;
  std::vector<std::pair<int, int>> pivots_;

  void build() {
    nv_ = lp_.variable_count();
    m_ = static_cast<int>(lp_.rows.size());
    nslack_ = 0;
    for (const auto& row : lp_.rows) {
      if (row.sense != RowSense::eq) ++nslack_;
    }
    ncols_ = nv_ + nslack_ + m_;
    a_.assign(m_, std::vector<T>(ncols_, T(0)));
    b_.resize(m_);
    lo_.assign(ncols_, std::nullopt);
    hi_.assign(ncols_, std::nullopt);
    for (int j = 0; j < nv_; ++j) {
      lo_[j] = lp_.lower[j];
      hi_[j] = lp_.upper[j];
      if (lo_[j] && hi_[j] && *hi_[j] < *lo_[j]) {
        throw ValidationError("", "variable with empty bound interval");
      }
    }
    slack_col_.assign(m_, -1);
    art_col_.assign(m_, -1);
    int next_slack = nv_;
    for (int r = 0; r < m_; ++r) {
      const auto& row = lp_.rows[r];
      b_[r] = row.rhs;
      for (const auto& [j, coef] : row.coeffs) {
        if (j < 0 || j >= nv_) throw ValidationError("", "row references unknown variable");
        a_[r][j] += coef;
      }
      if (row.sense != RowSense::eq) {
        int s = next_slack++;
        slack_col_[r] = s;
        a_[r][s] = T(1);
        if (row.sense == RowSense::le) {
          lo_[s] = T(0);  // a.x + s = b, s >= 0
        } else {
          hi_[s] = T(0);  // a.x + s = b, s <= 0
        }
      }
      art_col_[r] = nv_ + nslack_ + r;
    }

    // Nonbasic start: every structural and slack at a finite bound, free at 0.
    val_.assign(ncols_, T(0));
    state_.assign(ncols_, VarState::free_zero);
    for (int j = 0; j < nv_ + nslack_; ++j) {
      if (lo_[j]) {
        state_[j] = VarState::at_lower;
        val_[j] = *lo_[j];
      } else if (hi_[j]) {
        state_[j] = VarState::at_upper;
        val_[j] = *hi_[j];
      }
    }
    art_sign_.assign(m_, 1);
    basis_.resize(m_);
    tab_.assign(m_, std::vector<T>(ncols_, T(0)));
    for (int r = 0; r < m_; ++r) {
      T residual = b_[r];
      for (int j = 0; j < nv_ + nslack_; ++j) {
        if (!is_zero(a_[r][j]) && !is_zero(val_[j])) residual -= a_[r][j] * val_[j];
      }
      art_sign_[r] = sign_of(residual) < 0 ? -1 : 1;
      int ac = art_col_[r];
      a_[r][ac] = T(art_sign_[r]);
      lo_[ac] = T(0);
      basis_[r] = ac;
      state_[ac] = VarState::basic;
      val_[ac] = art_sign_[r] < 0 ? -residual : residual;
      for (int j = 0; j < ncols_; ++j) {
        tab_[r][j] = art_sign_[r] < 0 ? -a_[r][j] : a_[r][j];
      }
    }
  }

  void reset_zrow() {
    zrow_.assign(ncols_, T(0));
    for (int j = 0; j < ncols_; ++j) {
      T d = cost_[j];
      for (int r = 0; r < m_; ++r) {
        if (!is_zero(cost_[basis_[r]]) && !is_zero(tab_[r][j])) {
          d -= cost_[basis_[r]] * tab_[r][j];
        }
      }
      zrow_[j] = std::move(d);
    }
  }

  bool fixed(int j) const { return lo_[j] && hi_[j] && *lo_[j] == *hi_[j]; }

  // Returns entering column and direction, or -1 when optimal.
  std::pair<int, int> choose_entering() const {
    for (int j = 0; j < ncols_; ++j) {
      if (state_[j] == VarState::basic || fixed(j)) continue;
      int s = sign_of(zrow_[j]);
      if (s < 0 && (state_[j] == VarState::at_lower || state_[j] == VarState::free_zero)) {
        return {j, 1};
      }
      if (s > 0 && (state_[j] == VarState::at_upper || state_[j] == VarState::free_zero)) {
        return {j, -1};
      }
    }
    return {-1, 0};
  }

  // One simplex phase; returns false on unbounded (phase 2 only).
  bool iterate(long* counter) {
    while (true) {
      auto [enter, dir] = choose_entering();
      if (enter < 0) return true;
      if (++*counter > kPivotCap) throw InternalError("simplex cycling guard exhausted");

      // Ratio test: tightest limit on the step, Bland tie-break on the
      // limiting variable index. limit_var == enter means a bound flip.
      std::optional<T> best;
      int limit_var = -1;
      int limit_row = -1;
      if (lo_[enter] && hi_[enter]) {
        best = *hi_[enter] - *lo_[enter];
        limit_var = enter;
      }
      for (int r = 0; r < m_; ++r) {
        T rate = dir > 0 ? -tab_[r][enter] : tab_[r][enter];
        int s = sign_of(rate);
        if (s == 0) continue;
        int bvar = basis_[r];
        std::optional<T> cap;
        if (s < 0 && lo_[bvar]) cap = (val_[bvar] - *lo_[bvar]) / -rate;
        if (s > 0 && hi_[bvar]) cap = (*hi_[bvar] - val_[bvar]) / rate;
        if (!cap) continue;
        if (!best || *cap < *best || (*cap == *best && bvar < limit_var)) {
          best = std::move(*cap);
          limit_var = bvar;
          limit_row = r;
        }
      }
      if (!best) return false;  // unbounded direction

      const T& t = *best;
      // Update values along the direction.
      for (int r = 0; r < m_; ++r) {
        if (is_zero(tab_[r][enter]) || is_zero(t)) continue;
        T rate = dir > 0 ? -tab_[r][enter] : tab_[r][enter];
        val_[basis_[r]] += rate * t;
      }
      val_[enter] += dir > 0 ? t : -t;

      if (limit_var == enter) {
        state_[enter] = dir > 0 ? VarState::at_upper : VarState::at_lower;
        val_[enter] = dir > 0 ? *hi_[enter] : *lo_[enter];  // exact snap
        pivots_.emplace_back(enter, -1);
        if (verbosity() >= 1) {
          std::cerr << "[lp] flip col=" << enter << " t=" << t.str() << std::endl;
        }
        continue;
      }

      int r = limit_row;
      int leave = basis_[r];
      T rate = dir > 0 ? -tab_[r][enter] : tab_[r][enter];
      state_[leave] = sign_of(rate) < 0 ? VarState::at_lower : VarState::at_upper;
      val_[leave] = sign_of(rate) < 0 ? *lo_[leave] : *hi_[leave];
      basis_[r] = enter;
      state_[enter] = VarState::basic;
      pivots_.emplace_back(enter, leave);
      if (verbosity() >= 1) {
        std::cerr << "[lp] pivot enter=" << enter << " leave=" << leave << " row=" << r
                  << std::endl;
      }

      T piv = tab_[r][enter];
      for (int j = 0; j < ncols_; ++j) tab_[r][j] /= piv;
      for (int rr = 0; rr < m_; ++rr) {
        if (rr == r || is_zero(tab_[rr][enter])) continue;
        T f = tab_[rr][enter];
        for (int j = 0; j < ncols_; ++j) {
          if (!is_zero(tab_[r][j])) tab_[rr][j] -= f * tab_[r][j];
        }
      }
      if (!is_zero(zrow_[enter])) {
        T f = zrow_[enter];
        for (int j = 0; j < ncols_; ++j) {
          if (!is_zero(tab_[r][j])) zrow_[j] -= f * tab_[r][j];
        }
      }
      if (verbosity() >= 2) dump_tableau();
    }
  }

  void dump_tableau() const {
    std::cerr << "[lp] tableau:" << std::endl;
    for (int r = 0; r < m_; ++r) {
      std::cerr << "  b" << basis_[r] << " |";
      for (int j = 0; j < ncols_; ++j) std::cerr << " " << tab_[r][j].str();
      std::cerr << std::endl;
    }
  }

  // Row duals via the artificial columns, which track the basis inverse.
  std::vector<T> duals() const {
    std::vector<T> y(m_, T(0));
    for (int r = 0; r < m_; ++r) {
      int ac = art_col_[r];
      T d = cost_[ac] - zrow_[ac];
      y[r] = art_sign_[r] < 0 ? -d : d;
    }
    return y;
  }

  bool phase1(LpOutcome<T>& out) {
    cost_.assign(ncols_, T(0));
    for (int r = 0; r < m_; ++r) cost_[art_col_[r]] = T(1);
    reset_zrow();
    long counter = 0;
    if (!iterate(&counter)) throw InternalError("phase-1 objective cannot be unbounded");
    T infeasibility(0);
    for (int r = 0; r < m_; ++r) infeasibility += val_[art_col_[r]];
    if (sign_of(infeasibility) > 0) {
      LpInfeasible<T> inf;
      inf.farkas = duals();
      out.result = std::move(inf);
      out.pivots = pivots_;
      return false;
    }
    return true;
  }

  void phase2(LpOutcome<T>& out) {
    cost_.assign(ncols_, T(0));
    bool maximize = lp_.sense == ObjSense::maximize;
    for (int j = 0; j < nv_; ++j) cost_[j] = maximize ? -lp_.objective[j] : lp_.objective[j];
    for (int r = 0; r < m_; ++r) {
      int ac = art_col_[r];
      hi_[ac] = T(0);  // artificials are pinned for phase 2
    }
    reset_zrow();
    long counter = 0;
    if (!iterate(&counter)) {
      LpUnbounded<T> unb;
      unb.point.assign(val_.begin(), val_.begin() + nv_);
      unb.ray = current_ray();
      out.result = std::move(unb);
      out.pivots = pivots_;
      return;
    }
    LpOptimal<T> opt;
    opt.primal.assign(val_.begin(), val_.begin() + nv_);
    for (int j = 0; j < nv_; ++j) {
      opt.objective += lp_.objective[j] * opt.primal[j];
    }
    std::vector<T> y = duals();
    opt.row_duals.resize(m_);
    opt.reduced_costs.resize(nv_);
    for (int r = 0; r < m_; ++r) opt.row_duals[r] = maximize ? -y[r] : y[r];
    for (int j = 0; j < nv_; ++j) {
      opt.reduced_costs[j] = maximize ? -zrow_[j] : zrow_[j];
    }
    out.result = std::move(opt);
    out.pivots = pivots_;
  }

  // Recession direction for the entering column that had no blocking limit.
  std::vector<T> current_ray() {
    auto [enter, dir] = choose_entering();
    if (enter < 0) throw InternalError("ray requested at an optimal point");
    std::vector<T> ray(nv_, T(0));
    if (enter < nv_) ray[enter] = T(dir);
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] >= nv_ || is_zero(tab_[r][enter])) continue;
      T rate = dir > 0 ? -tab_[r][enter] : tab_[r][enter];
      ray[basis_[r]] = std::move(rate);
    }
    return ray;
  }

  // Exact self-check of the outcome against the original data.
  void verify(const LpOutcome<T>& out) const {
    if (out.is_optimal()) {
      const auto& opt = out.optimal();
      check_point_feasible(opt.primal, "optimal point");
      bool maximize = lp_.sense == ObjSense::maximize;
      // Stationarity: cost_j = y^T A_j + d_j over structural columns, with
      // d_j = 0 for basic columns, plus sign and slackness conditions.
      for (int r = 0; r < m_; ++r) {
        T activity(0);
        for (const auto& [j, coef] : lp_.rows[r].coeffs) activity += coef * opt.primal[j];
        const T& yr = opt.row_duals[r];
        int ys = sign_of(yr);
        bool tight = activity == lp_.rows[r].rhs;
        if (!tight && ys != 0) throw InternalError("lp dual violates complementary slackness");
        int want = maximize ? -1 : 1;  // ge rows: min -> y >= 0, max -> y <= 0
        if (lp_.rows[r].sense == RowSense::ge && ys * want < 0) {
          throw InternalError("lp dual sign violation on ge row");
        }
        if (lp_.rows[r].sense == RowSense::le && ys * want > 0) {
          throw InternalError("lp dual sign violation on le row");
        }
      }
      for (int j = 0; j < nv_; ++j) {
        T lhs = lp_.objective[j];
        for (int r = 0; r < m_; ++r) {
          if (!is_zero(a_[r][j]) && !is_zero(opt.row_duals[r])) {
            lhs -= opt.row_duals[r] * a_[r][j];
          }
        }
        if (!(lhs == opt.reduced_costs[j])) {
          throw InternalError("lp stationarity residual is nonzero");
        }
        int ds = sign_of(opt.reduced_costs[j]);
        if (ds != 0) {
          bool at_lo = lp_.lower[j] && opt.primal[j] == *lp_.lower[j];
          bool at_hi = lp_.upper[j] && opt.primal[j] == *lp_.upper[j];
          bool maxs = lp_.sense == ObjSense::maximize;
          // minimize: nonbasic at lower needs d >= 0, at upper d <= 0.
          int eff = maxs ? -ds : ds;
          if (!((at_lo && eff > 0) || (at_hi && eff < 0) || (at_lo && at_hi))) {
            throw InternalError("lp reduced-cost sign violation");
          }
        }
      }
    } else if (out.is_infeasible()) {
      if (!farkas_valid(out.infeasible().farkas)) {
        throw InternalError("lp infeasibility certificate failed verification");
      }
    } else {
      const auto& unb = out.unbounded();
      check_point_feasible(unb.point, "unbounded base point");
      if (!ray_valid(unb.point, unb.ray)) {
        throw InternalError("lp unbounded ray failed verification");
      }
    }
  }

  void check_point_feasible(const std::vector<T>& x, const char* what) const {
    for (int j = 0; j < nv_; ++j) {
      if (lp_.lower[j] && x[j] < *lp_.lower[j]) throw InternalError(std::string(what) + " below lower bound");
      if (lp_.upper[j] && *lp_.upper[j] < x[j]) throw InternalError(std::string(what) + " above upper bound");
    }
    for (const auto& row : lp_.rows) {
      T activity(0);
      for (const auto& [j, coef] : row.coeffs) activity += coef * x[j];
      int c = sign_of(activity - row.rhs);
      if ((row.sense == RowSense::eq && c != 0) || (row.sense == RowSense::le && c > 0) ||
          (row.sense == RowSense::ge && c < 0)) {
        throw InternalError(std::string(what) + " violates a row");
      }
    }
  }

  bool farkas_valid(const std::vector<T>& y) const {
    T lhs(0);  // y^T b
    for (int r = 0; r < m_; ++r) {
      int s = sign_of(y[r]);
      if (lp_.rows[r].sense == RowSense::le && s > 0) return false;
      if (lp_.rows[r].sense == RowSense::ge && s < 0) return false;
      lhs += y[r] * b_[r];
    }
    // sup over the box of (y^T A) x must stay strictly below y^T b.
    T sup(0);
    for (int j = 0; j < nv_; ++j) {
      T coef(0);
      for (int r = 0; r < m_; ++r) {
        if (!is_zero(y[r]) && !is_zero(a_[r][j])) coef += y[r] * a_[r][j];
      }
      int s = sign_of(coef);
      if (s > 0) {
        if (!lp_.upper[j]) return false;
        sup += coef * *lp_.upper[j];
      } else if (s < 0) {
        if (!lp_.lower[j]) return false;
        sup += coef * *lp_.lower[j];
      }
    }
    return sup < lhs;
  }

  bool ray_valid(const std::vector<T>& point, const std::vector<T>& ray) const {
    bool nonzero = false;
    for (const T& v : ray) nonzero = nonzero || !is_zero(v);
    if (!nonzero) return false;
    for (int j = 0; j < nv_; ++j) {
      int s = sign_of(ray[j]);
      if (s < 0 && lp_.lower[j]) return false;
      if (s > 0 && lp_.upper[j]) return false;
    }
    for (const auto& row : lp_.rows) {
      T delta(0);
      for (const auto& [j, coef] : row.coeffs) delta += coef * ray[j];
      int s = sign_of(delta);
      if ((row.sense == RowSense::eq && s != 0) || (row.sense == RowSense::le && s > 0) ||
          (row.sense == RowSense::ge && s < 0)) {
        return false;
      }
    }
    T improvement(0);
    for (int j = 0; j < nv_; ++j) improvement += lp_.objective[j] * ray[j];
    (void)point;
    return lp_.sense == ObjSense::maximize ? sign_of(improvement) > 0
                                           : sign_of(improvement) < 0;
  }
};

}  // namespace

template <typename T>
LpOutcome<T> solve_lp(const LinearProgram<T>& lp) {
  if (lp.lower.size() != lp.objective.size() || lp.upper.size() != lp.objective.size()) {
    throw ValidationError("", "linear program with inconsistent dimensions");
  }
  Simplex<T> solver(lp);
  return solver.run();
}

template LpOutcome<Rational> solve_lp(const LinearProgram<Rational>&);
template LpOutcome<EpsRational> solve_lp(const LinearProgram<EpsRational>&);

}  // namespace tollcast
