#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "rankone/counterexample.hpp"
#include "rankone/dyadic_product.hpp"
#include "rankone/meromorphic.hpp"
#include "rankone/perturbation.hpp"
#include "rankone/polya.hpp"
#include "rankone/probes.hpp"
#include "rankone/spectra.hpp"

using namespace rankone;
using boost::multiprecision::cpp_rational;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream notes;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes << " [" << what << "]";
    }
  }
};

double nearest(const std::vector<Complex>& zs, Complex w) {
  double best = kInf;
  for (const auto& z : zs) best = std::min(best, std::abs(z - w));
  return best;
}

// least-squares slope of y against x
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void example_reproduction(Verdict& v) {
  const auto f = dyadic::beta();
  for (int n = 2; n <= 12; ++n) {
    const double r = std::ldexp(1.0, n);
    const auto zs = beta_zeros(f, {r / std::sqrt(2.0), r * std::sqrt(2.0)}, 1e-10);
    v.require(zs.zeros.size() == 1, "one zero per octave");
    if (zs.zeros.size() != 1) continue;
    const Complex target(0, r);  // psi vanishes where 2^n + i z = 0
    v.require(std::abs(zs.zeros[0] - target) <= 1e-6 * r, "zero location");
    v.require(std::abs(std::abs(spectrum_from_beta(zs)[0]) - 1.0 / r) <= 1e-6 / r, "eigenvalue modulus");
  }
  const auto c = dyadic::psi_residues(60);
  CompensatedSum<Complex> m1;
  for (std::size_t k = 0; k < c.size(); ++k) m1.add(c[k] / std::ldexp(1.0, static_cast<int>(k + 1)));
  v.require(std::abs(-m1.value() + 1.0) <= 1e-8, "first moment");
  std::vector<double> ks, logs;
  for (int k = 3; k <= 10; ++k) {
    const double r = 3.0 * std::ldexp(1.0, k);
    double mx = 0.0;
    for (int j = 0; j < 512; ++j) mx = std::max(mx, std::abs(dyadic::psi_eval(std::polar(r, 2.0 * kPi * j / 512)).value));
    ks.push_back(k);
    logs.push_back(std::log2(mx));
  }
  const double e = -slope(ks, logs);
  v.notes << " decay_exponent=" << e;
  v.require(std::abs(e - 1.0) <= 0.05, "circle decay");
}

void oracle_equivalence(Verdict& v) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t nontrivial_chains = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t N = 1 + static_cast<std::size_t>(trial) % 50;
    std::vector<Complex> t, a, b;
    const bool moments = trial % 4 == 0 && N >= 3 && N <= 12;
    for (std::size_t n = 0; n < N; ++n) {
      if (moments)
        t.push_back(std::ldexp(1.0, static_cast<int>(n + 1)) * (1.0 + 0.1 * u(rng)));
      else
        t.push_back(std::polar(1.0 + 20.0 * (n + 0.5 + 0.3 * u(rng)) / N, kPi * u(rng)));
      a.emplace_back(u(rng), u(rng));
      b.emplace_back(u(rng) / N, u(rng) / N);
    }
    if (moments) {
      // a = 1 and the first two weights solve the first two moment equations
      std::fill(a.begin(), a.end(), Complex(1.0));
      Complex s1 = 0.0, s2 = 0.0;
      for (std::size_t n = 2; n < N; ++n) {
        const Complex w(u(rng) / (N * t[n].real()), u(rng) / (N * t[n].real()));
        b[n] = std::conj(w);
        s1 += t[n] * w;
        s2 += t[n] * t[n] * w;
      }
      const Complex t0 = t[0], t1 = t[1], det = t0 * t1 * (t1 - t0);
      const Complex w0 = ((-1.0 - s1) * t1 * t1 + t1 * s2) / det;
      const Complex w1 = (-t0 * s2 + t0 * t0 * (1.0 + s1)) / det;
      b[0] = std::conj(w0);
      b[1] = std::conj(w1);
    }
    const auto seq = SpectrumSequence::sorted(t);
    std::vector<std::size_t> order(N);
    for (std::size_t n = 0; n < N; ++n)
      order[n] = static_cast<std::size_t>(std::find(t.begin(), t.end(), seq[n]) - t.begin());
    std::vector<Complex> as, bs;
    for (std::size_t n : order) {
      as.push_back(a[n]);
      bs.push_back(b[n]);
    }
    const auto data = RankOneData::bounded(seq, as, bs);
    const auto L = build_truncated_matrix(data, N);
    const auto ev = linalg::eigenvalues(L);
    const double lnorm = L.norm();
    const auto zs = beta_zeros(MeromorphicSum::from_data(data), {0.25 / lnorm, 1e7}, 1e-12);
    std::vector<Complex> recip;
    for (const auto& z : zs.zeros) recip.push_back(1.0 / z);
    std::size_t nonzero = 0;
    for (const auto& lam : ev) {
      if (std::abs(lam) <= 1e-6 * lnorm) continue;
      ++nonzero;
      v.require(nearest(recip, lam) <= 1e-8 * std::max(1.0, std::abs(lam)), "eigenvalue reciprocal");
    }
    v.require(nonzero == static_cast<std::size_t>(zs.total_multiplicity()), "eigenvalue count");

    const std::size_t jmax = std::min<std::size_t>(N, 4);
    const auto chain = kernel_chain_dims(L, jmax);
    linalg::Matrix P = linalg::Matrix::Identity(N, N);
    const double norm = Eigen::JacobiSVD<linalg::Matrix>(L).singularValues()(0);
    for (std::size_t j = 1; j <= jmax; ++j) {
      P = P * L.adjoint();
      const auto sv = Eigen::JacobiSVD<linalg::Matrix>(P).singularValues();
      std::size_t rank = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > kChainRankTol * std::pow(norm, static_cast<double>(j))) ++rank;
      v.require(chain.dims[j - 1] == N - rank, "kernel chain");
    }
    if (!chain.dims.empty() && chain.dims[0] > 0) ++nontrivial_chains;
  }
  v.notes << " nontrivial_chains=" << nontrivial_chains;
}

void counterexample_pipeline(Verdict& v) {
  const auto seq = integer_sequence(1, 10000);
  const auto b = build_counterexample(seq, {.max_blocks = 6});
  v.notes << " blocks=" << b.blocks.size();
  v.require(b.blocks.size() >= 6, "at least six blocks");
  const auto s = verify_sums(b);
  v.notes << " s1=" << (s.s1_trace.empty() ? 0.0 : s.s1_trace.back());
  v.require(!s.s1_trace.empty() && s.s1_trace.back() >= 3.0, "S1 partial sum");
  v.require(s.s1_diverges_proxy, "S1 increments");
  v.require(s.s2_converges_proxy, "S2 increments");
  const auto g = greedy_block(seq, 39, CanonicalProduct());
  for (double r : removal_log_sums(seq, g.indices, CanonicalProduct())) v.require(r <= kLowerSumMargin, "minimality");
  std::vector<Complex> zs;
  for (int k = 0; k < 20; ++k) zs.push_back(std::polar(std::pow(2.0 * seq[seq.size() - 1].real(), (k + 1) / 20.0), 2.0 * kPi * 0.618 * (k + 1)));
  v.require(interpolation_residual(b.S, zs).max_residual < 1e-9, "interpolation");
  const auto d = defect_rank(b, seq, 0, 600, 1e-8);
  v.require(d.removed > 0 && d.deficiency == d.removed, "defect");
}

void minimality_within_blocks(Verdict& v) {
  // exact minimality of every block against the product of earlier blocks
  const auto seq = integer_sequence(1, 10000);
  const auto b = build_counterexample(seq, {.max_blocks = 6});
  CanonicalProduct U;
  for (const auto& blk : b.blocks) {
    for (double r : removal_log_sums(seq, blk.indices, U)) v.require(r <= kLowerSumMargin, "block minimality");
    std::vector<double> z = U.zeros();
    for (std::size_t i : blk.indices) z.push_back(seq[i].real());
    std::sort(z.begin(), z.end());
    U = CanonicalProduct(z);
  }
}

void lacunarity_gate(Verdict& v) {
  bool raised = false;
  try {
    build_counterexample(geometric_sequence(2.0, 60));
  } catch (const InsufficientSparseness&) {
    raised = true;
  }
  v.require(raised, "geometric sequence rejected");
  const auto b = build_counterexample(exp_power_sequence(1.0 / 3.0, 10000));
  v.notes << " anchors=" << b.blocks.size();
  v.require(b.blocks.size() >= 3, "three viable anchors");
}

void probe_consistency(Verdict& v) {
  const MeromorphicSum f(SpectrumSequence::from_real({1.0, 2.0, 3.0}), {1.0, -2.0, 1.0}, 1.0 / 3.0);
  std::vector<double> grid;
  for (int k = 0; k < 24; ++k) grid.push_back(16.0 * std::pow(2.0, k / 4.0));
  const auto p = limst_probe(f, 2, grid);
  v.require(p.blocks.size() == 6, "six blocks");
  if (!p.blocks.empty()) {
    const double drop = p.blocks.front().max_value / p.blocks.back().max_value;
    v.notes << " decay=" << drop;
    v.require(drop >= 10.0, "tenfold decay");
    for (std::size_t k = 1; k < p.blocks.size(); ++k) v.require(p.blocks[k].max_value < p.blocks[k - 1].max_value, "monotone decay");
  }
  std::vector<Complex> c;
  for (int n = 1; n <= 40; ++n) c.emplace_back(std::ldexp(1.0, -2 * n));
  const MeromorphicSum g(geometric_sequence(2.0, 40), c, 1.0 / 7.0);
  std::vector<double> grid2;
  for (double r = 16.0; r < 16.0 * 256; r *= std::pow(2.0, 0.125)) grid2.push_back(r);
  const auto q = limst_probe(g, 1, grid2);
  v.require(q.blocks.size() >= 8, "eight blocks");
  if (q.blocks.size() >= 8) {
    const double rel = std::abs(q.blocks[7].max_value - 1.0 / 3.0) / (1.0 / 3.0);
    v.notes << " gamma_rel_err=" << rel;
    v.require(rel <= 0.02, "limit");
  }
}

void polya_exactness(Verdict& v) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    PeakInput in;
    const std::size_t n = 1 + rng() % 60;
    double a = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      in.p.push_back(std::floor(10.0 * u(rng)) * std::pow(1.2, static_cast<double>(k)));
      a *= 0.4 + 0.55 * u(rng);
      in.alpha.push_back(a);
    }
    v.require(polya_peaks(in).peak_indices == polya_peaks_bruteforce(in), "peaks");
  }
  for (int r = 1; r <= 3; ++r) {
    std::size_t leaves = 1;
    for (int i = 0; i < r; ++i) leaves *= 3;
    const cpp_rational a(-3, 2), b(5, 2), eps(1);
    std::vector<cpp_rational> s;
    const std::size_t K = 4 * leaves;
    // f = x^r / r!, so f^(r) = 1
    for (std::size_t k = 0; k <= K; ++k) {
      const cpp_rational x = a + (b - a) * cpp_rational(k, K);
      cpp_rational p = 1;
      for (int i = 1; i <= r; ++i) p *= x / i;
      s.push_back(p);
    }
    try {
      const auto w = divided_interval<cpp_rational>(a, b, s, r, eps);
      cpp_rational bound = eps;
      for (int i = 0; i < r; ++i) bound *= (b - a) / 6;
      v.require(w.bound == bound, "bound formula");
      v.require(w.d - w.c == (b - a) / cpp_rational(static_cast<long long>(leaves)), "length formula");
      v.require(w.min_abs_value >= w.bound, "witness");
    } catch (const SearchFailure&) {
      v.require(false, "search failure");
    }
  }
}

void sparseness_suite(Verdict& v) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const double R = std::exp(std::uniform_real_distribution<double>(0.0, 8.0)(rng));
    const int pts = 2 + static_cast<int>(rng() % 40);
    std::vector<double> x;
    std::uniform_real_distribution<double> u(R, 2 * R);
    while (static_cast<int>(x.size()) < pts) {
      const double y = u(rng);
      if (std::find(x.begin(), x.end(), y) == x.end()) x.push_back(y);
    }
    std::sort(x.begin(), x.end());
    const auto w = bon_witness(SpectrumSequence::from_real(x), R);
    v.require(w.has_value(), "witness exists");
    if (w) v.require(w->product_value <= std::ldexp(1.0, 1 - static_cast<int>(w->half_count)), "witness bound");
  }
  std::vector<double> radii;
  for (int k = 8; k <= 32; ++k) radii.push_back(std::pow(10.0, k / 4.0));
  v.require(log2_density_test(exp_power_sequence(1.0 / 3.0, 10000), radii).satisfies_beglog2, "exp cube root dense");
  v.require(!log2_density_test(geometric_sequence(2.0, 60), radii).satisfies_beglog2, "geometric sparse");
  v.require(!log2_density_test(exp_power_sequence(0.5, 1000), radii).satisfies_beglog2, "exp sqrt borderline");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Verdict&)> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {"1 example reproduction", example_reproduction, 10.0},
      {"2 finite-dimensional oracle equivalence", oracle_equivalence, 120.0},
      {"3 counterexample pipeline on the integers",
       [](Verdict& v) {
         counterexample_pipeline(v);
         minimality_within_blocks(v);
       },
       60.0},
      {"4 lacunarity gate", lacunarity_gate, 120.0},
      {"5 probe consistency", probe_consistency, 120.0},
      {"6 peak and divided-difference exactness", polya_exactness, 120.0},
      {"7 sparseness suite", sparseness_suite, 120.0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(dt < c.budget_seconds, "runtime");
    std::printf("%s %s (%.2fs)%s\n", v.pass ? "PASS" : "FAIL", c.name, dt, v.notes.str().c_str());
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
