#include "rankone/dyadic_product.hpp"

namespace rankone::dyadic {

namespace {

double two_pow(std::size_t n) { return std::ldexp(1.0, static_cast<int>(n)); }

// phi_m(z) = (2^m + i z)/(2^m - z)
LogComplex log_phi(std::size_t m, Complex z) {
  const double p = two_pow(m);
  return LogComplex::of(p + Complex(0.0, 1.0) * z) * LogComplex::of(p - z).inverse();
}

}  // namespace

PsiValue psi_eval(Complex z, std::size_t n_factors) {
  if (z == Complex(2.0)) throw PoleError(0, "psi has a pole at 2");
  for (std::size_t m = 2; m <= n_factors + 1; ++m)
    if (z == Complex(two_pow(m))) throw PoleError(m - 1, "psi has a pole at 2^n");
  LogComplex acc = LogComplex::of(2.0) * LogComplex::of(2.0 - z).inverse();
  CompensatedSum<double> la, ar;
  la.add(acc.log_abs);
  ar.add(acc.arg);
  for (std::size_t m = 2; m <= n_factors + 1; ++m) {
    const LogComplex f = log_phi(m, z);
    la.add(f.log_abs);
    ar.add(f.arg);
  }
  PsiValue out;
  out.value = LogComplex{la.value(), ar.value()}.value();
  const double az = std::abs(z);
  const double first_dropped = two_pow(n_factors + 2);
  if (az >= first_dropped) {
    out.relative_tail_bound = kInf;
  } else {
    // sum_{n > M+1} sqrt2 |z| / (2^n - |z|) <= sqrt2 |z| 2^{-(M+1)} / (1 - |z| 2^{-(M+2)})
    const double s = std::sqrt(2.0) * az / two_pow(n_factors + 1) / (1.0 - az / first_dropped);
    out.relative_tail_bound = std::expm1(s);
  }
  return out;
}

std::vector<Complex> psi_residues(std::size_t count, std::size_t n_factors) {
  if (count > n_factors + 1) throw DomainError("more residues than factors");
  std::vector<Complex> c(count);
  for (std::size_t n = 1; n <= count; ++n) {
    const Complex t = two_pow(n);
    CompensatedSum<double> la, ar;
    LogComplex head;
    if (n == 1) {
      head = LogComplex::of(2.0);
    } else {
      // -Res of phi_n at 2^n is 2^n (1 + i); the prefactor 2/(2 - z) is regular there
      head = LogComplex::of(t * Complex(1.0, 1.0)) * LogComplex::of(2.0) * LogComplex::of(2.0 - t).inverse();
    }
    la.add(head.log_abs);
    ar.add(head.arg);
    for (std::size_t m = 2; m <= n_factors + 1; ++m) {
      if (m == n) continue;
      const LogComplex f = log_phi(m, t);
      la.add(f.log_abs);
      ar.add(f.arg);
    }
    c[n - 1] = LogComplex{la.value(), ar.value()}.value();
  }
  return c;
}

double residue_bound() {
  double logp = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double x = std::ldexp(1.0, -j);
    logp += 0.5 * std::log1p(x * x) - std::log1p(-x);
  }
  return 4.0 * std::sqrt(2.0) * std::exp(2.0 * logp);
}

MeromorphicSum beta(std::size_t window, std::size_t n_factors) {
  std::vector<Complex> poles(window);
  for (std::size_t n = 1; n <= window; ++n) poles[n - 1] = two_pow(n);
  TailModel tail;
  tail.weight = residue_bound() * std::ldexp(1.0, -2 * static_cast<int>(window)) / 3.0;
  tail.min_pole_modulus = two_pow(window + 1);
  return MeromorphicSum(SpectrumSequence(std::move(poles), "psi-poles"), psi_residues(window, n_factors),
                        1.0, tail);
}

}  // namespace rankone::dyadic
