#include "rankone/spectra.hpp"

#include <algorithm>
#include <numeric>

#include "rankone/kernels.hpp"
#include "rankone/linalg.hpp"

namespace rankone {

namespace {

bool modulus_less(const Complex& x, const Complex& y) {
  const double ax = std::abs(x), ay = std::abs(y);
  if (ax != ay) return ax < ay;
  if (x.real() != y.real()) return x.real() < y.real();
  return x.imag() < y.imag();
}

}  // namespace

SpectrumSequence::SpectrumSequence(std::vector<Complex> values, std::string origin)
    : values_(std::move(values)), origin_(std::move(origin)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const Complex v = values_[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw DomainError("spectrum value is not finite");
    if (v == Complex{}) throw DomainError("spectrum value is zero");
    if (v.imag() != 0.0) is_real_ = false;
    if (i > 0 && std::abs(v) < std::abs(values_[i - 1]))
      throw DomainError("spectrum moduli are not nondecreasing");
  }
  // equal values can only sit inside a run of equal moduli
  for (std::size_t i = 0; i < values_.size();) {
    std::size_t j = i + 1;
    while (j < values_.size() && std::abs(values_[j]) == std::abs(values_[i])) ++j;
    for (std::size_t p = i; p < j; ++p)
      for (std::size_t q = p + 1; q < j; ++q)
        if (values_[p] == values_[q]) throw DomainError("spectrum values are not distinct");
    i = j;
  }
}

SpectrumSequence SpectrumSequence::sorted(std::vector<Complex> values, std::string origin) {
  std::sort(values.begin(), values.end(), modulus_less);
  return SpectrumSequence(std::move(values), std::move(origin));
}

SpectrumSequence SpectrumSequence::from_real(const std::vector<double>& values, std::string origin) {
  std::vector<Complex> v(values.begin(), values.end());
  return sorted(std::move(v), std::move(origin));
}

std::vector<double> SpectrumSequence::real_values() const {
  if (!is_real_) throw UnsupportedInput("sequence is not real");
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i].real();
  return out;
}

std::vector<double> SpectrumSequence::moduli() const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = std::abs(values_[i]);
  return out;
}

SpectrumSequence SpectrumSequence::prefix(std::size_t n) const {
  n = std::min(n, values_.size());
  return SpectrumSequence(std::vector<Complex>(values_.begin(), values_.begin() + n), origin_);
}

SpectrumSequence SpectrumSequence::reciprocals() const {
  std::vector<Complex> r(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) r[i] = 1.0 / values_[i];
  return sorted(std::move(r), origin_.empty() ? origin_ : origin_ + ":reciprocal");
}

SpectrumSequence geometric_sequence(double ratio, std::size_t count) {
  if (!(std::abs(ratio) > 1.0)) throw DomainError("geometric ratio must exceed 1 in modulus");
  std::vector<Complex> v(count);
  for (std::size_t n = 1; n <= count; ++n) v[n - 1] = std::pow(ratio, static_cast<double>(n));
  return SpectrumSequence::sorted(std::move(v), "geometric");
}

SpectrumSequence integer_sequence(std::size_t first, std::size_t count, double offset) {
  std::vector<Complex> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = static_cast<double>(first + i) + offset;
  return SpectrumSequence::sorted(std::move(v), "integer");
}

SpectrumSequence exp_power_sequence(double power, std::size_t count) {
  if (!(power > 0.0)) throw DomainError("exponent must be positive");
  std::vector<Complex> v(count);
  for (std::size_t n = 1; n <= count; ++n) v[n - 1] = std::exp(std::pow(static_cast<double>(n), power));
  return SpectrumSequence::sorted(std::move(v), "exp-power");
}

SpectrumSequence convolution_symbol_sequence(Complex tau1, Complex tau2, double r, double R,
                                             double a, std::size_t n_max, SymbolForm form) {
  if (tau1 == Complex{} || tau2 == Complex{}) throw DomainError("tau1 and tau2 must be nonzero");
  const Complex q = tau1 / tau2;
  if (q.imag() == 0.0 && q.real() > 0.0) throw DomainError("tau1/tau2 lies in (0, +inf)");
  if (!(r > 0.0 && r < 1.0) || !(R > 1.0) || !(a > 1.0))
    throw DomainError("need 0 < r < 1, R > 1, a > 1");
  const double lga = std::lgamma(a);
  auto shape = [&](double n) {
    if (form == SymbolForm::leading_order) return (a - 1.0) * std::log(n);
    return std::lgamma(n + a) - lga - std::lgamma(n + 1.0);
  };
  std::vector<Complex> v;
  v.reserve(2 * n_max);
  for (std::size_t k = 1; k <= n_max; ++k) {
    const double n = static_cast<double>(k);
    v.push_back(tau1 * std::exp((-a - n) * std::log(R) + shape(n)));
    v.push_back(tau2 * std::exp((a + n) * std::log(r) + shape(n)));
  }
  return SpectrumSequence::sorted(std::move(v), "convolution-symbol");
}

SpectrumSequence jacobi_truncated_eigenvalues(const std::vector<double>& diag,
                                              const std::vector<double>& offdiag, std::size_t N) {
  if (N < 1) throw DomainError("truncation size must be positive");
  if (diag.size() < N || offdiag.size() + 1 < N) throw DomainError("coefficient lists too short");
  std::vector<double> d(diag.begin(), diag.begin() + N);
  std::vector<double> e(offdiag.begin(), offdiag.begin() + (N - 1));
  const std::vector<double> eig = linalg::tridiagonal_eigenvalues(d, e);
  double scale = 0.0;
  for (double x : eig) scale = std::max(scale, std::abs(x));
  std::vector<Complex> kept;
  for (double x : eig) {
    if (std::abs(x) > linalg::kSturmRelTol * 10.0 * std::max(scale, 1.0)) kept.emplace_back(x);
  }
  return SpectrumSequence::sorted(std::move(kept), "jacobi");
}

std::vector<double> q_oscillator_offdiag(double q, std::size_t count) {
  if (!(q > 1.0)) throw DomainError("q must exceed 1");
  std::vector<double> a(count);
  for (std::size_t n = 1; n <= count; ++n)
    a[n - 1] = std::sqrt(std::expm1(static_cast<double>(n) * std::log(q)) / (q - 1.0));
  return a;
}

LacunarityReport check_lacunary(const SpectrumSequence& seq, double threshold) {
  if (seq.empty()) throw DomainError("lacunarity of an empty sequence");
  LacunarityReport rep;
  if (seq.size() == 1) {
    rep.best_epsilon = kInf;
    rep.is_lacunary = kInf > threshold;
    return rep;
  }
  const kernels::PairMin m = kernels::pairwise_min_ratio_omp(seq.values());
  rep.best_epsilon = m.value;
  rep.witness_pair = std::make_pair(m.i, m.j);
  rep.is_lacunary = m.value > threshold;
  return rep;
}

std::size_t counting_function(const SpectrumSequence& seq, double r) {
  const auto v = seq.values();
  auto it = std::partition_point(v.begin(), v.end(), [r](const Complex& t) { return std::abs(t) < r; });
  return static_cast<std::size_t>(it - v.begin());
}

DensityVerdict log2_density_test(const SpectrumSequence& seq, const std::vector<double>& radii,
                                 double divergence_threshold) {
  if (radii.size() < 3) throw DomainError("need at least three radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 1.0)) throw DomainError("radius must exceed 1");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw DomainError("radii must increase");
  }
  DensityVerdict out;
  for (double r : radii) {
    const double l = std::log(r);
    out.ratios.push_back(static_cast<double>(counting_function(seq, r)) / (l * l));
  }
  const std::size_t n = radii.size();
  for (std::size_t w = 0; w < 3; ++w) {
    const std::size_t lo = w * n / 3, hi = (w + 1) * n / 3;
    out.window_maxima.push_back(*std::max_element(out.ratios.begin() + lo, out.ratios.begin() + hi));
  }
  out.limsup_proxy = out.window_maxima[2];
  out.satisfies_beglog2 = out.limsup_proxy > divergence_threshold &&
                          out.window_maxima[0] <= out.window_maxima[1] &&
                          out.window_maxima[1] <= out.window_maxima[2];
  return out;
}

double sparseness_log_product(const SpectrumSequence& seq, std::size_t n, int N) {
  if (!seq.is_real()) throw UnsupportedInput("sparseness product needs a real sequence");
  if (n >= seq.size()) throw DomainError("index out of range");
  const auto v = seq.values();
  const double tn = v[n].real();
  const double an = std::abs(tn);
  auto lo = std::partition_point(v.begin(), v.end(), [&](const Complex& t) { return std::abs(t) < an / 2; });
  auto hi = std::partition_point(v.begin(), v.end(), [&](const Complex& t) { return std::abs(t) <= 2 * an; });
  double s = N * std::log(an);
  for (auto it = lo; it != hi; ++it) {
    const std::size_t k = static_cast<std::size_t>(it - v.begin());
    const double tk = it->real();
    if (k == n) continue;
    const double q = tk / tn;
    if (q < 0.5 || q > 2.0) continue;
    s += std::log(std::abs((tk - tn) / tk));
  }
  return s;
}

double sparseness_product(const SpectrumSequence& seq, std::size_t n, int N) {
  const double l = sparseness_log_product(seq, n, N);
  return l < kLogUnderflowFloor ? 0.0 : std::exp(l);
}

std::optional<BonWitness> bon_witness(const SpectrumSequence& seq, double R) {
  const std::vector<double> t = seq.real_values();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= R && t[i] <= 2 * R) idx.push_back(i);
  if (idx.size() < 2) return std::nullopt;
  BonWitness best;
  double best_log = kInf;
  for (std::size_t n : idx) {
    double s = 0.0;
    for (std::size_t k : idx)
      if (k != n) s += std::log(std::abs((t[k] - t[n]) / t[k]));
    if (s < best_log) {
      best_log = s;
      best.index = n;
    }
  }
  best.product_value = best_log < kLogUnderflowFloor ? 0.0 : std::exp(best_log);
  best.points_in_window = idx.size();
  best.half_count = idx.size() / 2;
  return best;
}

GrowthFit fit_growth(const SpectrumSequence& seq) {
  GrowthFit fit;
  if (seq.size() < 2) return fit;
  const std::vector<double> m = seq.moduli();
  const double lg = (std::log(m.back()) - std::log(m.front())) / static_cast<double>(m.size() - 1);
  fit.ratio = std::exp(lg);
  // h_i = |t_i| g^{-i}; B = max over i < j of h_i / h_j
  double prefix_max = -kInf, worst = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double lh = std::log(m[i]) - lg * static_cast<double>(i);
    if (i > 0) worst = std::max(worst, prefix_max - lh);
    prefix_max = std::max(prefix_max, lh);
  }
  fit.constant = std::exp(worst);
  return fit;
}

}  // namespace rankone
