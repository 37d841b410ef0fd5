#include "rankone/polya.hpp"

#include "rankone/perturbation.hpp"

namespace rankone {

std::vector<double> PeakInput::q() const {
  std::vector<double> out(p.size());
  for (std::size_t n = 0; n < p.size(); ++n) out[n] = alpha[n] * p[n];
  return out;
}

namespace {

void validate(const PeakInput& in) {
  if (in.p.empty()) throw DomainError("empty window");
  if (in.alpha.size() != in.p.size()) throw DomainError("p and alpha must align");
  for (std::size_t n = 0; n < in.p.size(); ++n) {
    if (!(in.alpha[n] > 0.0) || !(in.p[n] >= 0.0)) throw DomainError("need alpha > 0 and p >= 0");
    if (n > 0 && !(in.alpha[n] < in.alpha[n - 1])) throw DomainError("alpha must be strictly decreasing");
  }
}

}  // namespace

PeakReport polya_peaks(const PeakInput& in) {
  validate(in);
  const std::vector<double> q = in.q();
  const std::size_t n = q.size();
  std::vector<double> suffix(n);
  suffix[n - 1] = q[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) suffix[k] = std::max(q[k], suffix[k + 1]);
  PeakReport rep;
  double prefix = -kInf;
  for (std::size_t m = 0; m < n; ++m) {
    prefix = std::max(prefix, in.p[m]);
    if (in.p[m] == prefix && q[m] == suffix[m]) {
      rep.peak_indices.push_back(m);
      rep.p_at_peaks.push_back(in.p[m]);
      rep.q_at_peaks.push_back(q[m]);
    }
  }
  const std::size_t h = n / 2;
  if (h > 0) {
    const double p1 = *std::max_element(in.p.begin(), in.p.begin() + h);
    const double p2 = *std::max_element(in.p.begin() + h, in.p.end());
    const double q1 = *std::max_element(q.begin(), q.begin() + h);
    const double q2 = *std::max_element(q.begin() + h, q.end());
    rep.p_max_growing = p2 > p1;
    rep.q_tail_shrinking = q2 < q1;
  }
  return rep;
}

std::vector<std::size_t> polya_peaks_bruteforce(const PeakInput& in) {
  validate(in);
  const std::vector<double> q = in.q();
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < q.size(); ++m) {
    bool ok = true;
    for (std::size_t s = 0; s <= m && ok; ++s) ok = in.p[s] <= in.p[m];
    for (std::size_t s = m; s < q.size() && ok; ++s) ok = q[s] <= q[m];
    if (ok) out.push_back(m);
  }
  return out;
}

LowerBoundProbe lacunary_lower_bound_probe(const MeromorphicSum& f, const LowerBoundParams& params) {
  LowerBoundProbe out;
  const auto& idx = f.active_poles();
  if (idx.size() < 2) return out;
  std::vector<Complex> t;
  std::vector<Complex> c;
  for (std::size_t k : idx) {
    t.push_back(f.poles()[k]);
    c.push_back(f.coeffs()[k]);
  }
  const SpectrumSequence ts(t, "probe-poles");
  out.gamma = check_lacunary(ts).best_epsilon;
  out.g = fit_growth(ts).ratio;
  out.u = params.u.value_or(0.5 * (1.0 + out.g));
  if (!(out.u > 1.0)) throw DomainError("u must exceed 1");
  out.eps = std::min(0.1, out.gamma / 4.0);
  out.eps1 = 0.9 * out.eps;

  // divergence of sum |c_n / t_n| on the window, judged by the tail-share proxy
  CompensatedSum<double> all, tail;
  const std::size_t n = t.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double v = std::abs(c[k] / t[k]);
    all.add(v);
    if (k >= n - n / 4) tail.add(v);
  }
  out.precondition_met = all.value() > 0.0 && tail.value() > kTailShareLimit * all.value();

  PeakInput in;
  for (std::size_t k = 0; k < n; ++k) {
    const double lu = static_cast<double>(k + 1) * std::log(out.u);
    const double at = std::abs(t[k]);
    in.p.push_back(std::exp(lu) * std::abs(c[k]) / at);
    in.alpha.push_back(std::exp(-lu) / at);
  }
  out.peaks = polya_peaks(in);
  out.conclusive = out.precondition_met && !out.peaks.peak_indices.empty();

  const std::size_t K = 9 * params.grid_per_leaf;
  for (std::size_t m : out.peaks.peak_indices) {
    LowerBoundRow row;
    row.peak = idx[m];
    const double at = std::abs(t[m]);
    const Complex dir = t[m] / at;
    row.ring_lo = (1.0 + out.eps1) * at;
    row.ring_hi = (1.0 + out.eps) * at;
    const Complex lead = dir * dir * c[m] / std::pow(out.eps1 * at * dir, 3);
    const Complex zeta = std::abs(lead) > 0.0 ? std::conj(lead) / std::abs(lead) : Complex(1.0);
    const double h = (row.ring_hi - row.ring_lo) / static_cast<double>(K);
    std::vector<Complex> zs(K + 1);
    for (std::size_t k = 0; k <= K; ++k) zs[k] = (row.ring_lo + h * static_cast<double>(k)) * dir;
    const std::vector<Complex> beta = beta_eval_batch(f, zs);
    std::vector<double> fv(K + 1);
    for (std::size_t k = 0; k <= K; ++k) fv[k] = (zeta * beta[k]).real();
    double fd = kInf;
    for (std::size_t k = 1; k < K; ++k) fd = std::min(fd, std::abs(fv[k + 1] - 2.0 * fv[k] + fv[k - 1]) / (h * h));
    row.eps_fd = fd;
    if (fd > 0.0) {
      try {
        const auto w = divided_interval<double>(row.ring_lo, row.ring_hi, fv, 2, fd);
        row.witness_found = true;
        row.bound = w.bound;
        row.sub_lo = w.c;
        row.sub_hi = w.d;
        const std::size_t per = K / 9;
        double mn = kInf;
        for (std::size_t k = w.leaf * per; k <= (w.leaf + 1) * per; ++k) mn = std::min(mn, std::abs(zs[k] * beta[k]));
        row.observed_min = mn;
      } catch (const SearchFailure&) {
        row.bound = std::pow((row.ring_hi - row.ring_lo) / 6.0, 2) * fd;
      }
    }
    out.rows.push_back(row);
  }
  std::vector<double> mins;
  for (const auto& r : out.rows)
    if (r.witness_found) mins.push_back(r.observed_min);
  if (mins.size() >= 2) {
    const std::size_t half = mins.size() / 2;
    const double first = *std::min_element(mins.begin(), mins.begin() + half);
    const double second = *std::min_element(mins.begin() + half, mins.end());
    out.floor_holds = second >= 0.5 * first;
  }
  return out;
}

}  // namespace rankone
