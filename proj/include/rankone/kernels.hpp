#pragma once

// Hot loops in two flavours: a serial reference and an OpenMP version.
// Every pair must return bit-identical results; each output element is
// produced by a fixed-order loop and reductions break ties by index.

#include <cstddef>
#include <span>
#include <vector>

#include "rankone/common.hpp"

namespace rankone::kernels {

struct PairMin {
  double value = kInf;
  std::size_t i = 0;
  std::size_t j = 0;
};

/// min over i < j of |v_i - v_j| / max(|v_i|, |v_j|), lexicographically
/// smallest (i, j) among ties.
PairMin pairwise_min_ratio_serial(std::span<const Complex> v);
PairMin pairwise_min_ratio_omp(std::span<const Complex> v);

/// sum_n c_n z / (t_n (t_n - z)) at each z, compensated, without kappa.
/// A z that coincides with a pole yields NaN in that slot.
std::vector<Complex> cauchy_sum_serial(std::span<const Complex> poles,
                                       std::span<const Complex> coeffs,
                                       std::span<const Complex> zs);
std::vector<Complex> cauchy_sum_omp(std::span<const Complex> poles,
                                    std::span<const Complex> coeffs,
                                    std::span<const Complex> zs);

/// Column-major m x k matrix V; returns the k x k Gram matrix V^* V, column-major.
std::vector<Complex> gram_serial(std::span<const Complex> V, std::size_t m, std::size_t k);
std::vector<Complex> gram_omp(std::span<const Complex> V, std::size_t m, std::size_t k);

/// For each x_n in a real point set: sum_{m != n} log|1 - x_n / x_m|.
std::vector<double> log_derivative_products_serial(std::span<const double> x);
std::vector<double> log_derivative_products_omp(std::span<const double> x);

}  // namespace rankone::kernels
