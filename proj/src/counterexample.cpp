#include "rankone/counterexample.hpp"

#include <map>
#include <numeric>

#include "rankone/kernels.hpp"
#include "rankone/linalg.hpp"

namespace rankone {

CanonicalProduct::CanonicalProduct(std::vector<double> zeros, double scale)
    : zeros_(std::move(zeros)), scale_(scale) {
  if (scale_ == 0.0) throw DomainError("scale must be nonzero");
  std::vector<double> s = zeros_;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0)) throw DomainError("zeros must be positive");
    if (i > 0 && s[i] == s[i - 1]) throw DomainError("duplicate zero");
  }
  compute_derivs();
}

void CanonicalProduct::compute_derivs() {
  const std::vector<double> lp = kernels::log_derivative_products_omp(zeros_);
  log_dabs_.resize(zeros_.size());
  dsign_.resize(zeros_.size());
  for (std::size_t i = 0; i < zeros_.size(); ++i) {
    log_dabs_[i] = std::log(std::abs(scale_)) - std::log(zeros_[i]) + lp[i];
    int sign = scale_ > 0 ? -1 : 1;
    for (double t : zeros_)
      if (t < zeros_[i]) sign = -sign;  // factor 1 - t_i/t_m < 0 exactly when t_m < t_i
    dsign_[i] = sign;
  }
}

LogComplex CanonicalProduct::log_eval(Complex z) const {
  CompensatedSum<double> la, ar;
  la.add(std::log(std::abs(scale_)));
  ar.add(scale_ < 0 ? kPi : 0.0);
  for (double t : zeros_) {
    const Complex f = 1.0 - z / t;
    if (f == Complex{}) return {-kInf, 0.0};
    la.add(std::log(std::abs(f)));
    ar.add(std::arg(f));
  }
  return {la.value(), ar.value()};
}

double CanonicalProduct::log_abs(double x) const {
  double s = std::log(std::abs(scale_));
  for (double t : zeros_) {
    const double f = 1.0 - x / t;
    if (f == 0.0) return -kInf;
    s += std::log(std::abs(f));
  }
  return s;
}

double CanonicalProduct::derivative_at(std::size_t i) const {
  return dsign_[i] * std::exp(log_dabs_[i]);
}

CanonicalProduct CanonicalProduct::times_linear(double t1) const {
  std::vector<double> z = zeros_;
  z.push_back(t1);
  return CanonicalProduct(std::move(z), -t1 * scale_);
}

CanonicalProduct block_product(const SpectrumSequence& seq, const std::vector<std::size_t>& T) {
  if (T.empty()) throw DomainError("block must be nonempty");
  const std::vector<double> t = seq.real_values();
  std::vector<double> z;
  for (std::size_t i : T) {
    if (i >= t.size()) throw DomainError("block index out of range");
    z.push_back(t[i]);
  }
  return CanonicalProduct(std::move(z));
}

namespace {

// log of the lower-sum contributions -log t - log|U(t)| - log|S_T'(t)| for a block T.
std::vector<double> contributions(const std::vector<double>& x, const CanonicalProduct& U) {
  const std::vector<double> lp = kernels::log_derivative_products_omp(x);
  std::vector<double> L(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    // |t S_T'(t)| = prod_{m != n} |1 - t/t_m|
    L[i] = -U.log_abs(x[i]) - lp[i];
  }
  return L;
}

double lse_except(const std::vector<double>& L, const std::vector<char>& alive, std::size_t skip,
                  const std::vector<double>& delta) {
  double m = -kInf;
  for (std::size_t i = 0; i < L.size(); ++i)
    if (alive[i] && i != skip) m = std::max(m, L[i] + delta[i]);
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i)
    if (alive[i] && i != skip) s += std::exp(L[i] + delta[i] - m);
  return m + std::log(s);
}

}  // namespace

GreedyBlock greedy_block(const SpectrumSequence& seq, std::size_t anchor, const CanonicalProduct& U_prev) {
  const std::vector<double> t = seq.real_values();
  if (anchor == 0 || anchor >= t.size()) throw DomainError("anchor index out of range");
  const double ta = t[anchor];
  if (!(ta > 0.0)) throw DomainError("values must be positive");
  std::vector<double> used = U_prev.zeros();
  std::sort(used.begin(), used.end());
  std::vector<std::size_t> idx;
  for (std::size_t n = 1; n < t.size(); ++n) {
    if (t[n] < ta / 2 || t[n] > 2 * ta) continue;
    if (std::binary_search(used.begin(), used.end(), t[n])) continue;
    idx.push_back(n);
  }
  std::vector<double> x;
  for (std::size_t n : idx) x.push_back(t[n]);
  std::vector<double> L = contributions(x, U_prev);
  std::vector<char> alive(x.size(), 1);
  const std::vector<double> zero(x.size(), 0.0);
  GreedyBlock out;
  out.octave_size = x.size();
  double total = lse_except(L, alive, x.size(), zero);
  if (!(total > kLowerSumMargin)) throw AnchorUnsuitable("full octave sum does not exceed 1");

  std::vector<double> delta(x.size());
  std::size_t live = x.size();
  const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(x.size());
  for (;;) {
    if (live <= 1) break;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (alive[i]) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return L[a] < L[b]; });
    bool removed = false;
    for (std::size_t j : order) {
      // dropping t_j divides S_T'(t_n) by (1 - t_n/t_j)
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < nx; ++i)
        delta[i] = alive[i] && static_cast<std::size_t>(i) != j ? std::log(std::abs(x[j] - x[i]) / x[j]) : 0.0;
      const double s = lse_except(L, alive, j, delta);
      if (s > kLowerSumMargin) {
        alive[j] = 0;
        --live;
        for (std::size_t i = 0; i < x.size(); ++i)
          if (alive[i]) L[i] += delta[i];
        total = s;
        removed = true;
        break;
      }
    }
    if (!removed) break;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!alive[i]) continue;
    out.indices.push_back(idx[i]);
    out.weighted_sum += std::exp(L[i] - std::log(x[i]));
  }
  out.log_lower_sum = total;
  return out;
}

std::vector<double> removal_log_sums(const SpectrumSequence& seq, const std::vector<std::size_t>& T,
                                     const CanonicalProduct& U_prev) {
  const std::vector<double> t = seq.real_values();
  std::vector<double> out;
  for (std::size_t skip = 0; skip < T.size(); ++skip) {
    std::vector<double> x;
    for (std::size_t i = 0; i < T.size(); ++i)
      if (i != skip) x.push_back(t[T[i]]);
    out.push_back(x.empty() ? -kInf : log_sum_exp(contributions(x, U_prev)));
  }
  return out;
}

bool anchor_trigger(const SpectrumSequence& seq, std::size_t n, std::size_t prior_degree) {
  const double tn = seq[n].real();
  return sparseness_log_product(seq, n, static_cast<int>(prior_degree) + 1) < -std::log(tn);
}

namespace {

struct Point {
  std::size_t block;
  double t;
  double log_later;  // log prod over later blocks of |S_{T_j}(t)|
};

double budget_floor(SandwichRule rule, std::size_t gap) {
  if (rule == SandwichRule::plain) return -std::log(2.0);
  return -std::log(2.0) * (1.0 - std::ldexp(1.0, -static_cast<int>(gap)));
}

}  // namespace

CounterexampleBundle build_counterexample(const SpectrumSequence& seq, const CounterexampleOptions& opt) {
  CounterexampleBundle out;
  out.window_size = seq.size();
  if (opt.max_blocks == 0) return out;
  const std::vector<double> t = seq.real_values();
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!(t[i] > 0.0)) throw UnsupportedInput("pipeline needs positive real values");

  CanonicalProduct U;
  std::vector<Point> points;
  std::size_t n = 1;
  double t_floor = 0.0;
  while (out.blocks.size() < opt.max_blocks && n < t.size()) {
    if (t[n] < t_floor || !anchor_trigger(seq, n, U.degree())) {
      ++n;
      ++out.anchors_examined;
      continue;
    }
    ++out.anchors_examined;
    GreedyBlock gb;
    try {
      gb = greedy_block(seq, n, U);
    } catch (const AnchorUnsuitable&) {
      ++n;
      continue;
    }
    // sandwich against every earlier block
    const CanonicalProduct S_new = block_product(seq, gb.indices);
    const std::size_t k = out.blocks.size();
    bool ok = true;
    double worst_ratio = 0.0;
    std::vector<double> add(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
      add[p] = S_new.log_abs(points[p].t);
      const double after = points[p].log_later + add[p];
      const double floor = budget_floor(opt.sandwich, k - points[p].block);
      if (after < floor || after > std::log(2.0)) {
        ok = false;
        const double allowance = floor - points[p].log_later;
        if (allowance < 0.0 && add[p] < 0.0) worst_ratio = std::max(worst_ratio, add[p] / allowance);
        else worst_ratio = kInf;
      }
    }
    if (!ok) {
      // the shift log|S_{T_new}(t)| scales like 1/t_anchor: jump ahead accordingly
      const double jump = std::isfinite(worst_ratio) ? std::max(opt.advance_factor, 0.9 * worst_ratio)
                                                     : opt.advance_factor;
      const double target = t[n] * jump;
      while (n < t.size() && t[n] < target) ++n;
      continue;
    }
    for (std::size_t p = 0; p < points.size(); ++p) points[p].log_later += add[p];
    BlockRecord rec;
    rec.anchor = n;
    rec.indices = gb.indices;
    rec.log_lower_sum = gb.log_lower_sum;
    rec.weighted_sum = gb.weighted_sum;
    rec.octave_size = gb.octave_size;
    rec.prior_degree = U.degree();
    rec.log_prior_value = U.log_abs(t[n]);
    out.blocks.push_back(rec);
    std::vector<double> z = U.zeros();
    for (std::size_t i : gb.indices) {
      z.push_back(t[i]);
      points.push_back({k, t[i], 0.0});
    }
    U = CanonicalProduct(std::move(z));
    t_floor = opt.anchor_growth * t[n];
    ++n;
  }
  if (out.blocks.size() < std::min<std::size_t>(2, opt.max_blocks))
    throw InsufficientSparseness("fewer than two viable anchors in the window");

  for (std::size_t k = 0; k < out.blocks.size(); ++k) {
    double mn = kInf, mx = -kInf;
    for (const Point& p : points)
      if (p.block == k) {
        mn = std::min(mn, std::exp(p.log_later));
        mx = std::max(mx, std::exp(p.log_later));
      }
    out.sandwich_min.push_back(mn);
    out.sandwich_max.push_back(mx);
  }

  auto assemble = [&](const CanonicalProduct& S) {
    out.S = S;
    out.zero_indices.clear();
    for (const auto& b : out.blocks)
      for (std::size_t i : b.indices) out.zero_indices.push_back(i);
    if (S.degree() > out.zero_indices.size()) out.zero_indices.push_back(0);
    out.residues.clear();
    out.log_abs_residues.clear();
    out.residue_signs.clear();
    out.a.clear();
    out.b.clear();
    for (std::size_t i = 0; i < S.degree(); ++i) {
      const double la = -S.log_abs_derivs()[i];
      const int sg = -S.deriv_signs()[i];
      out.log_abs_residues.push_back(la);
      out.residue_signs.push_back(sg);
      const double c = sg * std::exp(la);
      out.residues.push_back(c);
      out.a.push_back(std::exp(0.5 * la));
      out.b.push_back(sg * std::exp(0.5 * la));
    }
    out.kappa = 1.0 / S.scale();
    out.s1_trace.clear();
    out.s2_trace.clear();
    double s1 = 0.0, s2 = 0.0;
    std::size_t pos = 0;
    for (const auto& b : out.blocks) {
      for (std::size_t j = 0; j < b.indices.size(); ++j, ++pos) {
        const double tn = S.zeros()[pos];
        s1 += std::exp(-S.log_abs_derivs()[pos] - std::log(tn));
        s2 += std::exp(-S.log_abs_derivs()[pos] - 2.0 * std::log(tn));
      }
      out.s1_trace.push_back(s1);
      out.s2_trace.push_back(s2);
    }
  };
  assemble(U);

  if (opt.allow_tilde && out.blocks.size() > opt.tilde_patience) {
    std::size_t run = 0, longest = 0;
    for (std::size_t k = 1; k < out.s2_trace.size(); ++k) {
      const double inc = out.s2_trace[k] - out.s2_trace[k - 1];
      const double prev = k == 1 ? out.s2_trace[0] : out.s2_trace[k - 1] - out.s2_trace[k - 2];
      run = inc >= prev ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    if (longest >= opt.tilde_patience) {
      out.used_tilde = true;
      assemble(U.times_linear(t[0]));
    }
  }
  return out;
}

SumVerification verify_sums(const CounterexampleBundle& bundle) {
  SumVerification v;
  v.s1_trace = bundle.s1_trace;
  v.s2_trace = bundle.s2_trace;
  const std::size_t K = bundle.blocks.size();
  for (std::size_t k = 0; k < K; ++k) {
    v.s1_increments.push_back(v.s1_trace[k] - (k ? v.s1_trace[k - 1] : 0.0));
    v.s2_increments.push_back(v.s2_trace[k] - (k ? v.s2_trace[k - 1] : 0.0));
  }
  v.insufficient_blocks = K < 2;
  if (v.insufficient_blocks) return v;
  std::vector<double> tk;
  const std::vector<double>& z = bundle.S.zeros();
  std::size_t pos = 0;
  for (const auto& b : bundle.blocks) {
    // anchor values are recovered from the zero list: the anchor lies in the block's octave
    double lo = kInf;
    for (std::size_t j = 0; j < b.indices.size(); ++j) lo = std::min(lo, z[pos + j]);
    pos += b.indices.size();
    tk.push_back(lo);
  }
  v.dominating_constant = 4.0 * v.s2_increments[0] * tk[0];
  double acc = 0.0;
  bool dominated = true, decreasing = true;
  for (std::size_t k = 0; k < K; ++k) {
    acc += 1.0 / tk[k];
    v.dominating.push_back(v.dominating_constant * acc);
    if (v.s2_trace[k] > v.dominating.back()) dominated = false;
    if (k > 0 && !(v.s2_increments[k] < v.s2_increments[k - 1])) decreasing = false;
  }
  for (const auto& b : bundle.blocks)
    if (b.weighted_sum > 4.0 * bundle.blocks[0].weighted_sum) v.weighted_sum_uniform = false;
  v.s1_diverges_proxy = std::all_of(v.s1_increments.begin(), v.s1_increments.end(), [](double x) { return x >= 0.5; });
  v.s2_converges_proxy = dominated && decreasing;
  return v;
}

InterpolationCheck interpolation_residual(const CanonicalProduct& S, const std::vector<Complex>& z_samples) {
  InterpolationCheck out;
  const auto& zs = S.zeros();
  for (const Complex& z : z_samples) {
    bool near = false;
    for (double t : zs)
      if (std::abs(z - t) <= 1e-6 * std::max(1.0, t)) near = true;
    out.rejected.push_back(near);
    if (near) {
      out.residuals.push_back(std::nan(""));
      continue;
    }
    const Complex lhs = S.log_eval(z).inverse().value();
    CompensatedSum<Complex> rhs;
    rhs.add(1.0 / S.scale());
    for (std::size_t i = 0; i < zs.size(); ++i) {
      // (1/S'(t)) z / (t (t - z))
      const LogComplex inv{-S.log_abs_derivs()[i], S.deriv_signs()[i] > 0 ? 0.0 : kPi};
      rhs.add(-inv.value() * z / (zs[i] * (zs[i] - z)));
    }
    const double r = std::abs(lhs - rhs.value());
    out.residuals.push_back(r);
    out.max_residual = std::max(out.max_residual, r);
  }
  return out;
}

DefectResult defect_rank(const CounterexampleBundle& bundle, const SpectrumSequence& seq, std::size_t lo,
                         std::size_t hi, double tol, const std::vector<double>& extra_points) {
  if (!(lo < hi && hi <= seq.size())) throw DomainError("bad window");
  const std::vector<double> t = seq.real_values();
  std::map<std::size_t, double> weight;
  for (std::size_t i = 0; i < bundle.zero_indices.size(); ++i) weight[bundle.zero_indices[i]] = std::abs(bundle.b[i]);
  DefectResult out;
  const std::size_t d = hi - lo;
  out.dimension = d;
  std::vector<Complex> V;
  std::size_t cols = 0;
  for (std::size_t m = lo; m < hi; ++m) {
    if (weight.count(m)) {
      ++out.removed;
      continue;
    }
    // normalised limit of w_n / (t_n - lambda) as lambda -> t_m
    for (std::size_t n = lo; n < hi; ++n) V.push_back(n == m ? 1.0 : 0.0);
    ++cols;
  }
  for (double lam : extra_points) {
    std::vector<Complex> col(d);
    double norm = 0.0;
    for (std::size_t n = lo; n < hi; ++n) {
      const auto it = weight.find(n);
      const double w = it == weight.end() ? 1.0 : it->second;
      col[n - lo] = w / (t[n] - lam);
      norm += std::norm(col[n - lo]);
    }
    norm = std::sqrt(norm);
    for (auto& x : col) V.push_back(x / norm);
    ++cols;
  }
  out.kernels = cols;
  if (cols == 0) {
    out.deficiency = d;
    return out;
  }
  const std::vector<Complex> G = kernels::gram_omp(V, d, cols);
  linalg::Matrix Gm(cols, cols);
  for (std::size_t b = 0; b < cols; ++b)
    for (std::size_t a = 0; a < cols; ++a) Gm(a, b) = G[b * cols + a];
  out.numerical_rank = linalg::numerical_rank(Gm, tol);
  out.deficiency = d - out.numerical_rank;
  out.condition_estimate = linalg::condition_number(Gm);
  out.precision_warning = out.condition_estimate > 1.0 / tol;
  return out;
}

}  // namespace rankone
