#pragma once

// psi(z) = (2/(2 - z)) prod_{n >= 2} (2^n + i z)/(2^n - z), its residues and
// the perturbation determinant built from them.

#include <cstddef>
#include <vector>

#include "rankone/common.hpp"
#include "rankone/meromorphic.hpp"

namespace rankone::dyadic {

inline constexpr std::size_t kDefaultFactors = 120;
inline constexpr std::size_t kDefaultWindow = 40;

struct PsiValue {
  Complex value;
  double relative_tail_bound = 0.0;  // bound on |prod of dropped factors - 1|
};

/// Truncated product with factors n = 2..n_factors+1.
PsiValue psi_eval(Complex z, std::size_t n_factors = kDefaultFactors);

/// c_n = -Res_{2^n} psi for n = 1..count, from the truncated product.
std::vector<Complex> psi_residues(std::size_t count, std::size_t n_factors = kDefaultFactors);

/// Uniform bound |c_n| <= 4 sqrt(2) P^2 with P = prod_j sqrt(1 + 4^-j)/(1 - 2^-j).
double residue_bound();

/// beta = 1 + sum_{n <= window} c_n (1/(2^n - z) - 2^-n) with the tail model
/// weight K 4^-window / 3 and minimal dropped pole 2^(window+1).
MeromorphicSum beta(std::size_t window = kDefaultWindow, std::size_t n_factors = kDefaultFactors);

}  // namespace rankone::dyadic
