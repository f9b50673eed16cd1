#pragma once

#include <optional>
#include <vector>

#include "tollcast/errors.hpp"
#include "tollcast/rational.hpp"
#include "tollcast/scalar.hpp"

namespace tollcast {

template <typename T>
using Vec = std::vector<T>;
template <typename T>
using Mat = std::vector<std::vector<T>>;

/// Result of solving a square system A x = b exactly. Exactly one of
/// `solution` (A nonsingular) and `kernel` (a nonzero vector with A k = 0)
/// is set.
template <typename T>
struct LinearSolveResult {
  std::optional<Vec<T>> solution;
  std::optional<Vec<T>> kernel;
};

/// Exact Gaussian elimination with pivoting by first nonzero entry; the
/// pivot order is therefore deterministic and magnitude-independent.
/// Throws ValidationError on dimension mismatch.
template <typename T>
LinearSolveResult<T> solve_linear_system(const Mat<T>& a, const Vec<T>& b);

/// Particular solution of a (possibly rectangular or rank-deficient) system
/// A x = b with free variables pinned to zero; nullopt when inconsistent.
template <typename T>
std::optional<Vec<T>> solve_affine(const Mat<T>& a, const Vec<T>& b);

/// Basis of the right kernel of A, one vector per free column, produced in
/// column order.
template <typename T>
Mat<T> kernel_basis(const Mat<T>& a, int cols);

/// Lower bound 1/(eta*mu)^(2*eta) on the gap between distinct basic solution
/// values of linear systems with at most `eta` rows and integer coefficients
/// of magnitude at most `mu`; follows from Cramer's rule and Hadamard's
/// inequality. Requires mu >= 1 (scale coefficients to integers first) and
/// eta >= 1.
Rational hadamard_bit_bound(const Rational& max_abs_coeff, long dimension);

}  // namespace tollcast
