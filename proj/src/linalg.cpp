#include "rankone/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace rankone::linalg {

std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double off = i == 0 ? 0.0 : e[i - 1] * e[i - 1] / q;
    q = d[i] - x - off;
    if (q == 0.0) q = -std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> tridiagonal_eigenvalues(const std::vector<double>& d, const std::vector<double>& e) {
  const std::size_t n = d.size();
  if (n == 0) return {};
  if (e.size() + 1 < n) throw DomainError("off-diagonal too short");
  double lo = kInf, hi = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const double scale = std::max({std::abs(lo), std::abs(hi), std::numeric_limits<double>::min()});
  const double tol = kSturmRelTol * scale;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    // smallest x with count(x) > k
    double a = lo - tol, b = hi + tol;
    while (b - a > tol) {
      const double m = 0.5 * (a + b);
      if (m == a || m == b) break;
      if (sturm_count(d, e, m) > k) b = m; else a = m;
    }
    out[k] = 0.5 * (a + b);
  }
  return out;
}

std::size_t numerical_rank(const Matrix& M, double rel_tol) {
  if (M.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(M);
  const auto R = qr.matrixR();
  const Eigen::Index k = std::min(M.rows(), M.cols());
  double rmax = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) rmax = std::max(rmax, std::abs(R(i, i)));
  if (rmax == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < k; ++i)
    if (std::abs(R(i, i)) > rel_tol * rmax) ++r;
  return r;
}

std::size_t svd_rank(const Matrix& M, double rel_tol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

double condition_number(const Matrix& M) {
  if (M.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin == 0.0 ? kInf : s(0) / smin;
}

std::vector<Complex> eigenvalues(const Matrix& M) {
  Eigen::ComplexEigenSolver<Matrix> es(M, false);
  if (es.info() != Eigen::Success) throw Error("eigenvalue solver failed");
  const auto& ev = es.eigenvalues();
  return std::vector<Complex>(ev.data(), ev.data() + ev.size());
}

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs) {
  std::size_t deg = coeffs.size();
  while (deg > 0 && coeffs[deg - 1] == Complex{}) --deg;
  if (deg <= 1) return {};
  const std::size_t n = deg - 1;
  const Complex lead = coeffs[n];
  Matrix C = Matrix::Zero(n, n);
  for (std::size_t i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (std::size_t i = 0; i < n; ++i) C(i, n - 1) = -coeffs[i] / lead;
  return eigenvalues(C);
}

}  // namespace rankone::linalg
