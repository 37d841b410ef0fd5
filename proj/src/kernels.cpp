#include "rankone/kernels.hpp"

#include <omp.h>

namespace rankone::kernels {

namespace {

double pair_ratio(Complex a, Complex b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

bool better(const PairMin& a, const PairMin& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.i != b.i) return a.i < b.i;
  return a.j < b.j;
}

PairMin row_min(std::span<const Complex> v, std::size_t i) {
  PairMin best;
  for (std::size_t j = i + 1; j < v.size(); ++j) {
    const double r = pair_ratio(v[i], v[j]);
    if (r < best.value) best = {r, i, j};
  }
  return best;
}

Complex cauchy_at(std::span<const Complex> poles, std::span<const Complex> coeffs, Complex z) {
  CompensatedSum<Complex> acc;
  for (std::size_t n = 0; n < poles.size(); ++n) {
    if (coeffs[n] == Complex{}) continue;
    const Complex d = poles[n] - z;
    if (d == Complex{}) return {std::nan(""), std::nan("")};
    acc.add(coeffs[n] * z / (poles[n] * d));
  }
  return acc.value();
}

Complex gram_entry(std::span<const Complex> V, std::size_t m, std::size_t a, std::size_t b) {
  CompensatedSum<Complex> acc;
  for (std::size_t r = 0; r < m; ++r) acc.add(std::conj(V[a * m + r]) * V[b * m + r]);
  return acc.value();
}

double log_deriv_at(std::span<const double> x, std::size_t n) {
  double s = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    if (m != n) s += std::log(std::abs(1.0 - x[n] / x[m]));
  }
  return s;
}

}  // namespace

PairMin pairwise_min_ratio_serial(std::span<const Complex> v) {
  PairMin best;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const PairMin r = row_min(v, i);
    if (better(r, best)) best = r;
  }
  return best;
}

PairMin pairwise_min_ratio_omp(std::span<const Complex> v) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
  std::vector<PairMin> rows(v.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n - 1; ++i) rows[i] = row_min(v, static_cast<std::size_t>(i));
  PairMin best;
  for (std::ptrdiff_t i = 0; i < n - 1; ++i) {
    if (better(rows[i], best)) best = rows[i];
  }
  return best;
}

std::vector<Complex> cauchy_sum_serial(std::span<const Complex> poles,
                                       std::span<const Complex> coeffs,
                                       std::span<const Complex> zs) {
  std::vector<Complex> out(zs.size());
  for (std::size_t k = 0; k < zs.size(); ++k) out[k] = cauchy_at(poles, coeffs, zs[k]);
  return out;
}

std::vector<Complex> cauchy_sum_omp(std::span<const Complex> poles,
                                    std::span<const Complex> coeffs,
                                    std::span<const Complex> zs) {
  std::vector<Complex> out(zs.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(zs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = cauchy_at(poles, coeffs, zs[k]);
  return out;
}

std::vector<Complex> gram_serial(std::span<const Complex> V, std::size_t m, std::size_t k) {
  std::vector<Complex> G(k * k);
  for (std::size_t b = 0; b < k; ++b)
    for (std::size_t a = 0; a < k; ++a) G[b * k + a] = gram_entry(V, m, a, b);
  return G;
}

std::vector<Complex> gram_omp(std::span<const Complex> V, std::size_t m, std::size_t k) {
  std::vector<Complex> G(k * k);
  const std::ptrdiff_t kk = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t b = 0; b < kk; ++b)
    for (std::size_t a = 0; a < k; ++a) G[b * k + a] = gram_entry(V, m, a, static_cast<std::size_t>(b));
  return G;
}

std::vector<double> log_derivative_products_serial(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) out[n] = log_deriv_at(x, n);
  return out;
}

std::vector<double> log_derivative_products_omp(std::span<const double> x) {
  std::vector<double> out(x.size());
  const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < nn; ++n) out[n] = log_deriv_at(x, static_cast<std::size_t>(n));
  return out;
}

}  // namespace rankone::kernels
