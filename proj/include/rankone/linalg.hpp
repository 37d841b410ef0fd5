#pragma once

// Dense linear algebra helpers. Eigen backs the general routines; the
// tridiagonal solver is self-contained.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "rankone/common.hpp"

namespace rankone::linalg {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kSturmRelTol = 1e-12;

/// Number of eigenvalues of the symmetric tridiagonal (d, e) below x.
std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x);

/// All eigenvalues, ascending, by bisection on the Sturm count inside the
/// Gershgorin interval; absolute tolerance kSturmRelTol times the matrix scale.
std::vector<double> tridiagonal_eigenvalues(const std::vector<double>& d, const std::vector<double>& e);

/// Numerical rank via column-pivoted Householder QR with threshold rel_tol * max |R_ii|.
std::size_t numerical_rank(const Matrix& M, double rel_tol);

/// Numerical rank from singular values with threshold rel_tol * sigma_max.
std::size_t svd_rank(const Matrix& M, double rel_tol);

/// 2-norm condition estimate sigma_max / sigma_min (inf when singular).
double condition_number(const Matrix& M);

std::vector<Complex> eigenvalues(const Matrix& M);

/// Roots of sum_k coeffs[k] z^k via the companion matrix; leading coefficient nonzero.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs);

}  // namespace rankone::linalg
