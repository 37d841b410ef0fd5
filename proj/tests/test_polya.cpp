#include <random>

#include <boost/multiprecision/cpp_int.hpp>
#include <doctest.h>

#include "rankone/polya.hpp"

using namespace rankone;
using boost::multiprecision::cpp_rational;

namespace {

PeakInput random_input(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PeakInput in;
  double a = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    in.p.push_back(std::floor(8.0 * u(rng)) * std::pow(1.3, static_cast<double>(k)));
    a *= 0.5 + 0.45 * u(rng);
    in.alpha.push_back(a);
  }
  return in;
}

template <class F>
std::vector<cpp_rational> sample(const cpp_rational& a, const cpp_rational& b, std::size_t K, F f) {
  std::vector<cpp_rational> out;
  for (std::size_t k = 0; k <= K; ++k) out.push_back(f(a + (b - a) * cpp_rational(k, K)));
  return out;
}

}  // namespace

TEST_SUITE("polya") {

TEST_CASE("peak examples") {
  CHECK(polya_peaks({{1, 2, 3}, {1, 0.5, 0.25}}).peak_indices == std::vector<std::size_t>{0, 1, 2});
  CHECK(polya_peaks({{3, 1, 2}, {1, 0.9, 0.8}}).peak_indices == std::vector<std::size_t>{0});
  CHECK(polya_peaks({{1, 1, 1, 1}, {1, 0.5, 0.25, 0.125}}).peak_indices.size() == 4);
  CHECK_THROWS_AS(polya_peaks({{1, 2}, {1, 1}}), DomainError);
  CHECK_THROWS_AS(polya_peaks({{}, {}}), DomainError);
  CHECK_THROWS_AS(polya_peaks({{-1.0}, {1.0}}), DomainError);
}

TEST_CASE("linear scan matches the brute-force scan") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto in = random_input(rng, 1 + trial % 40);
    CHECK(polya_peaks(in).peak_indices == polya_peaks_bruteforce(in));
  }
}

TEST_CASE("peaks are invariant under positive scaling of p and alpha") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    auto in = random_input(rng, 30);
    const auto base = polya_peaks(in).peak_indices;
    for (auto& x : in.p) x *= 8.0;
    for (auto& x : in.alpha) x *= 0.25;
    CHECK(polya_peaks(in).peak_indices == base);
  }
}

TEST_CASE("growth flags") {
  PeakInput in;
  for (int k = 0; k < 20; ++k) {
    in.p.push_back(std::pow(2.0, k));
    in.alpha.push_back(std::pow(3.0, -k));
  }
  const auto r = polya_peaks(in);
  CHECK(r.p_max_growing);
  CHECK(r.q_tail_shrinking);
}

TEST_CASE("divided interval on exact rational samples") {
  const cpp_rational a(-2), b(2);
  const auto s = sample(a, b, 9 * 4, [](const cpp_rational& x) { return x * x - 1; });
  const auto w = divided_interval<cpp_rational>(a, b, s, 2, cpp_rational(2));
  CHECK(w.bound == cpp_rational(8, 9));
  CHECK(w.leaf == 0);
  CHECK(w.c == cpp_rational(-2));
  CHECK(w.d == cpp_rational(-14, 9));
  CHECK(w.min_abs_value == cpp_rational(115, 81));
  CHECK(w.min_abs_value >= w.bound);
  CHECK(w.d - w.c == (b - a) / 9);

  const auto lin = sample(cpp_rational(0), cpp_rational(1), 3 * 5, [](const cpp_rational& x) { return x; });
  const auto v = divided_interval<cpp_rational>(0, 1, lin, 1, cpp_rational(1));
  CHECK(v.bound == cpp_rational(1, 6));
  CHECK(v.c == cpp_rational(2, 3));
  CHECK(v.min_abs_value == cpp_rational(2, 3));
}

TEST_CASE("divided interval guarantee holds for random quadratics") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> coef(-20, 20);
  for (int trial = 0; trial < 100; ++trial) {
    int lead = coef(rng);
    if (lead == 0) lead = 1;
    const cpp_rational A(lead, 4), B(coef(rng), 3), C(coef(rng), 5);
    const auto s = sample(cpp_rational(0), cpp_rational(3), 9 * 6,
                          [&](const cpp_rational& x) { return (A * x + B) * x + C; });
    const cpp_rational eps = 2 * abs(A);
    const auto w = divided_interval<cpp_rational>(0, 3, s, 2, eps);
    CHECK(w.min_abs_value >= w.bound);
    CHECK(w.bound == cpp_rational(1, 4) * eps);
  }
}

TEST_CASE("divided interval failures") {
  const auto s = sample(cpp_rational(-1), cpp_rational(1), 9, [](const cpp_rational& x) { return x * x; });
  CHECK_THROWS_AS(divided_interval<cpp_rational>(-1, 1, s, 2, cpp_rational(100)), SearchFailure);
  CHECK_THROWS_AS(divided_interval<cpp_rational>(-1, 1, s, 0, cpp_rational(1)), DomainError);
  CHECK_THROWS_AS(divided_interval<cpp_rational>(-1, 1, std::vector<cpp_rational>(9), 2, cpp_rational(1)), DomainError);
}

TEST_CASE("lower-bound probe on a lacunary sequence with divergent first moment") {
  std::vector<Complex> c;
  for (int n = 1; n <= 40; ++n) c.emplace_back(std::ldexp(1.0, n) / n);
  const MeromorphicSum f(geometric_sequence(2.0, 40), c, 1.0);
  const auto p = lacunary_lower_bound_probe(f);
  CHECK(p.precondition_met);
  CHECK(p.conclusive);
  CHECK(p.g == doctest::Approx(2.0));
  CHECK(p.gamma == doctest::Approx(0.5));
  REQUIRE(!p.rows.empty());
  for (const auto& row : p.rows) {
    CHECK(row.witness_found);
    CHECK(row.observed_min >= row.bound);
    CHECK(row.sub_hi - row.sub_lo == doctest::Approx((row.ring_hi - row.ring_lo) / 9.0));
  }

  std::vector<Complex> c2;
  for (int n = 1; n <= 40; ++n) c2.emplace_back(std::ldexp(1.0, n) / (double(n) * n));
  const auto q = lacunary_lower_bound_probe(MeromorphicSum(geometric_sequence(2.0, 40), c2, 1.0));
  CHECK_FALSE(q.precondition_met);
  CHECK_FALSE(q.conclusive);
}

}
