#pragma once

// Three-sequence peak extraction, the divided-difference interval witness and
// the lower-bound probe that combines them.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "rankone/common.hpp"
#include "rankone/meromorphic.hpp"

namespace rankone {

struct PeakInput {
  std::vector<double> p;
  std::vector<double> alpha;  // strictly decreasing, positive

  std::vector<double> q() const;  // q(n) = alpha(n) p(n)
};

struct PeakReport {
  std::vector<std::size_t> peak_indices;  // 0-based, increasing
  std::vector<double> p_at_peaks;
  std::vector<double> q_at_peaks;
  bool p_max_growing = false;   // max of p over the second half exceeds the first half's
  bool q_tail_shrinking = false;  // max of q over the second half is below the first half's
};

/// Indices m with p(m) = max_{s <= m} p(s) and q(m) = max_{s >= m} q(s), in O(n).
PeakReport polya_peaks(const PeakInput& in);

/// Same index set by direct double-window scan, O(n^2).
std::vector<std::size_t> polya_peaks_bruteforce(const PeakInput& in);

template <class Real>
struct DividedInterval {
  Real c, d;
  Real min_abs_value;
  Real bound;  // ((b - a)/6)^r eps
  std::size_t leaf = 0;
};

/// f sampled at a + k (b - a)/K, k = 0..K, with 3^r dividing K. All 3^r
/// leaves of the trisection tree are scanned and the one with the largest
/// sampled min |f| is returned when it reaches ((b - a)/6)^r eps.
template <class Real>
DividedInterval<Real> divided_interval(const Real& a, const Real& b, const std::vector<Real>& samples,
                                       int r, const Real& eps) {
  using std::abs;
  if (r < 1 || r > 4) throw DomainError("r must lie in 1..4");
  if (samples.size() < 2) throw DomainError("need at least two samples");
  std::size_t leaves = 1;
  for (int i = 0; i < r; ++i) leaves *= 3;
  const std::size_t K = samples.size() - 1;
  if (K % leaves != 0) throw DomainError("grid intervals must be divisible by 3^r");
  const std::size_t per = K / leaves;
  Real bound = eps;
  const Real sixth = (b - a) / Real(6);
  for (int i = 0; i < r; ++i) bound = bound * sixth;
  std::optional<DividedInterval<Real>> best;
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    Real m = abs(samples[leaf * per]);
    for (std::size_t k = leaf * per + 1; k <= (leaf + 1) * per; ++k)
      if (abs(samples[k]) < m) m = abs(samples[k]);
    if (!best || best->min_abs_value < m) {
      const Real width = (b - a) / Real(static_cast<long long>(leaves));
      best = DividedInterval<Real>{a + width * Real(static_cast<long long>(leaf)),
                                   a + width * Real(static_cast<long long>(leaf + 1)), m, bound, leaf};
    }
  }
  if (best->min_abs_value < bound) throw SearchFailure("no trisection leaf reaches the bound");
  return *best;
}

struct LowerBoundParams {
  std::optional<double> u;      // default (1 + g)/2
  std::size_t grid_per_leaf = 20;
};

struct LowerBoundRow {
  std::size_t peak = 0;  // 0-based pole index m_k
  double ring_lo = 0.0, ring_hi = 0.0;  // (1 + eps1)|t_m|, (1 + eps)|t_m|
  double eps_fd = 0.0;   // min |f''| on the ring from second differences
  double bound = 0.0;    // ((b - a)/6)^2 eps_fd, the witness bound on |f|
  double sub_lo = 0.0, sub_hi = 0.0;
  double observed_min = 0.0;  // min |z beta(z)| over the returned subinterval
  bool witness_found = false;
};

struct LowerBoundProbe {
  double gamma = 0.0, g = 1.0, u = 1.0, eps = 0.0, eps1 = 0.0;
  bool precondition_met = false;  // sum |c_n / t_n| fails the convergence proxy
  bool conclusive = false;
  bool floor_holds = false;       // min over later rows >= half the min over earlier rows
  PeakReport peaks;
  std::vector<LowerBoundRow> rows;
};

LowerBoundProbe lacunary_lower_bound_probe(const MeromorphicSum& f, const LowerBoundParams& params = {});

}  // namespace rankone
