#include <random>

#include <doctest.h>

#include "rankone/dyadic_product.hpp"
#include "rankone/meromorphic.hpp"
#include "rankone/perturbation.hpp"
#include "rankone/probes.hpp"

using namespace rankone;

namespace {

MeromorphicSum two_pole(Complex t1, Complex t2, Complex c1, Complex c2) {
  return MeromorphicSum(SpectrumSequence::sorted({t1, t2}), std::abs(t1) <= std::abs(t2) ? std::vector<Complex>{c1, c2} : std::vector<Complex>{c2, c1}, 1.0);
}

std::vector<Complex> two_pole_roots(Complex t1, Complex t2, Complex c1, Complex c2) {
  const Complex K = 1.0 - c1 / t1 - c2 / t2;
  const Complex A = K, B = -(K * (t1 + t2) + c1 + c2), C = K * t1 * t2 + c1 * t2 + c2 * t1;
  const Complex disc = std::sqrt(B * B - 4.0 * A * C);
  return {(-B + disc) / (2.0 * A), (-B - disc) / (2.0 * A)};
}

double nearest(const std::vector<Complex>& zs, Complex w) {
  double best = kInf;
  for (const auto& z : zs) best = std::min(best, std::abs(z - w));
  return best;
}

}  // namespace

TEST_SUITE("meromorphic") {

TEST_CASE("beta_eval closed forms") {
  const MeromorphicSum f(SpectrumSequence({1.0}), {1.0}, 1.0);
  CHECK(std::abs(f.value(-1.0) - 0.5) < 1e-15);
  CHECK(f.value(0.0) == Complex(1.0));
  CHECK_THROWS_AS(f.value(1.0), PoleError);
  const MeromorphicSum g(SpectrumSequence({1.0, 2.0}), {1.0, 1.0}, 1.0);
  const Complex z(0, 1);
  const Complex oracle = 1.0 + (1.0 / (1.0 - z) - 1.0) + (1.0 / (2.0 - z) - 0.5);
  CHECK(std::abs(g.value(z) - oracle) < 1e-15);
  const MeromorphicSum h(SpectrumSequence::sorted({Complex(3, 4), Complex(-1, 2)}), {Complex(2, 1), 0.5}, Complex(0.2, 0.1));
  CHECK(h.value(0.0) == Complex(0.2, 0.1));
}

TEST_CASE("conjugate symmetry for real data") {
  const MeromorphicSum f(integer_sequence(1, 30), std::vector<Complex>(30, 0.7), 1.3);
  for (const Complex z : {Complex(0.3, 2.0), Complex(-4.0, 0.5), Complex(12.5, -3.0)}) {
    const Complex a = f.value(std::conj(z)), b = std::conj(f.value(z));
    CHECK(std::abs(a - b) <= 1e-14 * std::abs(a));
  }
}

TEST_CASE("truncation stays within the recorded tail bound") {
  const auto t = geometric_sequence(2.0, 40);
  std::vector<Complex> c;
  for (int n = 1; n <= 40; ++n) c.emplace_back(std::cos(n), std::sin(n));
  const MeromorphicSum full(t, c, 1.0);
  for (std::size_t n : {10u, 20u, 30u}) {
    const auto tr = full.truncated(n);
    for (const Complex z : {Complex(1.5, 0.5), Complex(-30.0, 7.0), Complex(0.0, 100.0)}) {
      const auto v = beta_eval(tr, z);
      CHECK(std::abs(v.value - full.value(z)) <= v.tail_bound * (1 + 1e-9) + 1e-14);
    }
  }
}

TEST_CASE("zero search basics") {
  const MeromorphicSum f(SpectrumSequence({1.0}), {1.0}, 1.0);
  CHECK(beta_zeros(f, {0.0, 10.0}, 1e-12).zeros.empty());
  CHECK_THROWS_AS(beta_zeros(f, {0.5, 1.0005}, 1e-12), DomainError);
  const auto t1 = Complex(2.0, 0.0), t2 = Complex(-3.0, 1.0);
  const auto c1 = Complex(1.0, 0.5), c2 = Complex(-2.0, 0.3);
  const auto zs = beta_zeros(two_pole(t1, t2, c1, c2), {0.01, 200.0}, 1e-13);
  const auto oracle = two_pole_roots(t1, t2, c1, c2);
  REQUIRE(zs.zeros.size() == 2);
  for (const auto& w : oracle) CHECK(nearest(zs.zeros, w) <= 1e-10 * std::abs(w));
  CHECK(zs.winding_total == zs.total_multiplicity() - zs.poles_enclosed);
}

TEST_CASE("argument-principle counts match closed-form roots on random two-pole data") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Annulus ann{0.2, 60.0};
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Complex t1 = std::polar(1.0 + 9.0 * std::abs(u(rng)), kPi * u(rng));
    const Complex t2 = std::polar(1.0 + 9.0 * std::abs(u(rng)), kPi * u(rng));
    const Complex c1(u(rng), u(rng)), c2(u(rng), u(rng));
    if (std::abs(t1 - t2) < 0.5) continue;
    const auto oracle = two_pole_roots(t1, t2, c1, c2);
    std::size_t inside = 0;
    bool near_edge = false;
    for (const auto& w : oracle) {
      const double m = std::abs(w);
      near_edge = near_edge || std::abs(m - ann.r_in) < 1e-3 || std::abs(m - ann.r_out) < 0.1;
      if (m > ann.r_in && m < ann.r_out) ++inside;
    }
    if (near_edge) continue;
    const auto zs = beta_zeros(two_pole(t1, t2, c1, c2), ann, 1e-12);
    CHECK(static_cast<std::size_t>(zs.total_multiplicity()) == inside);
    for (const auto& z : zs.zeros) CHECK(nearest(oracle, z) <= 1e-10 * std::max(1.0, std::abs(z)));
    ++checked;
  }
  CHECK(checked >= 40);
}

TEST_CASE("spectrum_from_beta") {
  ZeroSet zs;
  zs.zeros = {2.0};
  zs.multiplicities = {1};
  CHECK(spectrum_from_beta(zs)[0] == Complex(0.5));
  zs.zeros = {Complex(0, 4), Complex(0, 8)};
  zs.multiplicities = {1, 1};
  const auto s = spectrum_from_beta(zs);
  CHECK(std::abs(s[0] - Complex(0, -0.125)) < 1e-16);
  zs.zeros = {0.0};
  zs.multiplicities = {1};
  CHECK_THROWS_AS(spectrum_from_beta(zs), DomainError);
}

TEST_CASE("truncated matrix eigenvalues are reciprocals of beta zeros") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t N = 2 + static_cast<std::size_t>(trial) * 4;
    std::vector<Complex> t, a, b;
    for (std::size_t n = 0; n < N; ++n) {
      t.push_back(std::polar(1.0 + 20.0 * (n + 0.5 + 0.3 * u(rng)) / N, kPi * u(rng)));
      a.emplace_back(u(rng), u(rng));
      b.emplace_back(u(rng) / N, u(rng) / N);
    }
    const auto data = RankOneData::bounded(SpectrumSequence::sorted(t), a, b);
    const auto L = build_truncated_matrix(data, N);
    const auto ev = linalg::eigenvalues(L);
    const auto zs = beta_zeros(MeromorphicSum::from_data(data), {0.5 / L.norm(), 1e6}, 1e-12);
    const auto sp = spectrum_from_beta(zs);
    const std::vector<Complex> recip(sp.values().begin(), sp.values().end());
    std::size_t matched = 0;
    for (const auto& lam : ev) {
      if (std::abs(lam) < 1e-6) continue;
      CHECK(nearest(recip, lam) <= 1e-8 * std::max(1.0, std::abs(lam)));
      ++matched;
    }
    CHECK(matched == zs.zeros.size());
  }
}

TEST_CASE("example product: value at zero, residues and decay") {
  CHECK(std::abs(dyadic::psi_eval(0.0).value - 1.0) < 1e-14);
  CHECK_THROWS_AS(dyadic::psi_eval(8.0), PoleError);
  const auto c = dyadic::psi_residues(12);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double tn = std::ldexp(1.0, static_cast<int>(k + 1));
    // c_n = -Res psi at 2^n, by trapezoidal quadrature on a small circle
    const double rho = 0.1 * tn;
    const int M = 256;
    Complex integral = 0.0;
    for (int j = 0; j < M; ++j) {
      const Complex e = std::polar(1.0, 2.0 * kPi * (j + 0.5) / M);
      integral += dyadic::psi_eval(tn + rho * e).value * rho * e;
    }
    const Complex res = integral / static_cast<double>(M);
    CHECK(std::abs(-res - c[k]) <= 1e-9 * std::abs(c[k]));
    CHECK(std::abs(c[k]) <= dyadic::residue_bound());
    CHECK(std::abs(c[k]) >= 0.2);
  }
  CompensatedSum<Complex> m1;
  const auto c60 = dyadic::psi_residues(60);
  for (std::size_t k = 0; k < 60; ++k) m1.add(c60[k] / std::ldexp(1.0, static_cast<int>(k + 1)));
  CHECK(std::abs(m1.value() - 1.0) <= 1e-8);
}

TEST_CASE("example product: one zero per octave on the imaginary axis") {
  const auto f = dyadic::beta();
  for (int n = 2; n <= 12; ++n) {
    const double r = std::ldexp(1.0, n);
    const auto zs = beta_zeros(f, {r / std::sqrt(2.0), r * std::sqrt(2.0)}, 1e-10);
    REQUIRE(zs.zeros.size() == 1);
    CHECK(std::abs(zs.zeros[0] - Complex(0, r)) <= 1e-6 * r);
  }
  const auto all = beta_zeros(f, {3.0, 6000.0}, 1e-10);
  const auto s = spectrum_from_beta(all);
  REQUIRE(s.size() == 11);
  for (std::size_t k = 0; k < s.size(); ++k)
    CHECK(std::abs(s[s.size() - 1 - k]) == doctest::Approx(std::ldexp(1.0, -static_cast<int>(k) - 2)).epsilon(1e-8));
}

TEST_CASE("resolvent probe") {
  std::vector<double> grid;
  for (double r = 16.0; r < 16.0 * 512; r *= 1.03) grid.push_back(r);
  const auto lac = resolvent_norm_probe(SpectrumSequence::from_real([] {
                                          std::vector<double> v;
                                          for (int n = 40; n >= 1; --n) v.push_back(std::ldexp(1.0, -n));
                                          return v;
                                        }()),
                                        1.5, grid);
  REQUIRE(lac.blocks.size() >= 8);
  CHECK(lac.blocks[7].fraction() >= 0.9);
  for (std::size_t k = 1; k < lac.blocks.size(); ++k) CHECK(lac.blocks[k].fraction() + 1e-12 >= lac.blocks[k - 1].fraction() - 0.1);
  std::vector<double> dense;
  for (int n = 20000; n >= 1; --n) dense.push_back(1.0 / n);
  const auto den = resolvent_norm_probe(SpectrumSequence::from_real(dense), 1.01, grid);
  CHECK(*den.kept_fraction < *lac.kept_fraction);
  CHECK_FALSE(resolvent_norm_probe(SpectrumSequence::from_real({0.5}), 1.5, {}).kept_fraction);
}

TEST_CASE("limst probe: floor when the first moment equality fails") {
  std::vector<Complex> c;
  for (int n = 1; n <= 40; ++n) c.emplace_back(std::ldexp(1.0, -2 * n));
  const MeromorphicSum f(geometric_sequence(2.0, 40), c, 1.0 / 7.0);
  std::vector<double> grid;
  for (double r = 16.0; r < 16.0 * 256; r *= std::pow(2.0, 0.125)) grid.push_back(r);
  const auto p = limst_probe(f, 1, grid);
  REQUIRE(p.blocks.size() >= 8);
  CHECK(std::abs(p.blocks[7].max_value - 1.0 / 3.0) <= 0.02 / 3.0);
  const MeromorphicSum g(geometric_sequence(2.0, 40), c, 0.5);
  const auto q = limst_probe(g, 0, grid);
  CHECK(std::abs(q.blocks.back().max_value - std::abs(0.5 - 1.0 / 7.0)) <= 0.02);
}

TEST_CASE("limst probe: decay when moments vanish through order s") {
  const MeromorphicSum f(SpectrumSequence::from_real({1.0, 2.0, 3.0}), {1.0, -2.0, 1.0}, 1.0 / 3.0);
  std::vector<double> grid;
  for (int k = 0; k < 24; ++k) grid.push_back(16.0 * std::pow(2.0, k / 4.0));
  const auto p = limst_probe(f, 2, grid);
  REQUIRE(p.blocks.size() == 6);
  CHECK(p.blocks.front().max_value / p.blocks.back().max_value >= 10.0);
}

TEST_CASE("sector localisation") {
  const MeromorphicSum f(integer_sequence(1, 20), std::vector<Complex>(20, 1.0), 1.0);
  const auto rep = sector_localization_check(f, {0.0, kPi}, 0.3, {{1.5, 6.5}, {6.5, 19.5}});
  CHECK(!rep.zeros.empty());
  CHECK(rep.outliers.empty());
  const auto e = sector_localization_check(dyadic::beta(), {0.0, kPi}, 0.3, {{3.0, 100.0}});
  CHECK(e.outliers.size() == e.zeros.size());
  CHECK(sector_localization_check(f, {0.0}, 0.3, {}).zeros.empty());
}

}
