#include "tollcast/linalg.hpp"

#include "tollcast/eps_rational.hpp"

namespace tollcast {

namespace {

// Reduced row echelon form over an exact field. Pivots are chosen as the
// first row with a nonzero entry in the leftmost unresolved column.
template <typename T>
struct Echelon {
  Mat<T> m;                      // rows x (cols [+ augmented])
  std::vector<int> pivot_col;    // per pivot row, ascending
  std::vector<int> pivot_row_of  // per column, -1 when free
      ;
};

template <typename T>
Echelon<T> rref(Mat<T> m, int cols) {
  Echelon<T> e;
  e.pivot_row_of.assign(cols, -1);
  int row = 0;
  int rows = static_cast<int>(m.size());
  for (int col = 0; col < cols && row < rows; ++col) {
    int pr = -1;
    for (int r = row; r < rows; ++r) {
      if (!is_zero(m[r][col])) {
        pr = r;
        break;
      }
    }
    if (pr < 0) continue;
    std::swap(m[row], m[pr]);
    T inv = m[row][col];
    for (auto& v : m[row]) v /= inv;
    for (int r = 0; r < rows; ++r) {
      if (r == row || is_zero(m[r][col])) continue;
      T f = m[r][col];
      for (size_t c = col; c < m[r].size(); ++c) m[r][c] -= f * m[row][c];
    }
    e.pivot_col.push_back(col);
    e.pivot_row_of[col] = row;
    ++row;
  }
  e.m = std::move(m);
  return e;
}

}  // namespace

template <typename T>
LinearSolveResult<T> solve_linear_system(const Mat<T>& a, const Vec<T>& b) {
  size_t n = a.size();
  if (b.size() != n) throw ValidationError("", "linear system dimension mismatch");
  for (const auto& row : a) {
    if (row.size() != n) throw ValidationError("", "linear system matrix is not square");
  }
  Mat<T> aug(n, Vec<T>(n + 1, T(0)));
  for (size_t r = 0; r < n; ++r) {
    for (size_t c = 0; c < n; ++c) aug[r][c] = a[r][c];
    aug[r][n] = b[r];
  }
  Echelon<T> e = rref(std::move(aug), static_cast<int>(n));
  if (e.pivot_col.size() == n) {
    Vec<T> x(n, T(0));
    for (size_t r = 0; r < n; ++r) x[e.pivot_col[r]] = e.m[r][n];
    return {std::move(x), std::nullopt};
  }
  // Rank deficient: report the kernel vector of the first free column.
  int free_col = -1;
  for (size_t c = 0; c < n; ++c) {
    if (e.pivot_row_of[c] < 0) {
      free_col = static_cast<int>(c);
      break;
    }
  }
  Vec<T> k(n, T(0));
  k[free_col] = T(1);
  for (size_t r = 0; r < e.pivot_col.size(); ++r) {
    k[e.pivot_col[r]] = -e.m[r][free_col];
  }
  return {std::nullopt, std::move(k)};
}

template <typename T>
std::optional<Vec<T>> solve_affine(const Mat<T>& a, const Vec<T>& b) {
  size_t rows = a.size();
  if (b.size() != rows) throw ValidationError("", "linear system dimension mismatch");
  size_t cols = rows == 0 ? 0 : a[0].size();
  Mat<T> aug(rows, Vec<T>(cols + 1, T(0)));
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) aug[r][c] = a[r][c];
    aug[r][cols] = b[r];
  }
  Echelon<T> e = rref(std::move(aug), static_cast<int>(cols));
  for (size_t r = e.pivot_col.size(); r < rows; ++r) {
    if (!is_zero(e.m[r][cols])) return std::nullopt;
  }
  Vec<T> x(cols, T(0));
  for (size_t r = 0; r < e.pivot_col.size(); ++r) x[e.pivot_col[r]] = e.m[r][cols];
  return x;
}

template <typename T>
Mat<T> kernel_basis(const Mat<T>& a, int cols) {
  Echelon<T> e = rref(a, cols);
  Mat<T> basis;
  for (int c = 0; c < cols; ++c) {
    if (e.pivot_row_of[c] >= 0) continue;
    Vec<T> k(cols, T(0));
    k[c] = T(1);
    for (size_t r = 0; r < e.pivot_col.size(); ++r) k[e.pivot_col[r]] = -e.m[r][c];
    basis.push_back(std::move(k));
  }
  return basis;
}

Rational hadamard_bit_bound(const Rational& max_abs_coeff, long dimension) {
  if (dimension < 1) throw ValidationError("", "hadamard bound needs dimension >= 1");
  if (max_abs_coeff < Rational(1)) {
    throw ValidationError("", "hadamard bound needs max coefficient >= 1");
  }
  Rational base = Rational(dimension) * max_abs_coeff;
  mpz_class num = base.numerator();
  mpz_class den = base.denominator();
  mpz_class np, dp;
  unsigned long e = static_cast<unsigned long>(2 * dimension);
  mpz_pow_ui(np.get_mpz_t(), num.get_mpz_t(), e);
  mpz_pow_ui(dp.get_mpz_t(), den.get_mpz_t(), e);
  return Rational(dp, np);
}

template LinearSolveResult<Rational> solve_linear_system(const Mat<Rational>&, const Vec<Rational>&);
template LinearSolveResult<EpsRational> solve_linear_system(const Mat<EpsRational>&, const Vec<EpsRational>&);
template std::optional<Vec<Rational>> solve_affine(const Mat<Rational>&, const Vec<Rational>&);
template std::optional<Vec<EpsRational>> solve_affine(const Mat<EpsRational>&, const Vec<EpsRational>&);
template Mat<Rational> kernel_basis(const Mat<Rational>&, int);
template Mat<EpsRational> kernel_basis(const Mat<EpsRational>&, int);

}  // namespace tollcast
