#pragma once

// Rank-one perturbations L = A + <., b> a of a diagonal operator A and the
// moment diagnostics attached to them.

#include <cstddef>
#include <optional>
#include <vector>

#include "rankone/common.hpp"
#include "rankone/linalg.hpp"
#include "rankone/spectra.hpp"

namespace rankone {

enum class PerturbationKind {
  bounded,   // A = diag(1/t_n) compact, beta(0) = 1
  singular   // A = diag(t_n) unbounded, 1-data (a, b, kappa)
};

class RankOneData {
 public:
  /// Compact diagonal A with s_n = 1/t_n; kappa is 1.
  static RankOneData bounded(SpectrumSequence t, std::vector<Complex> a, std::vector<Complex> b);

  /// Singular perturbation of diag(t_n). When a_in_space is set, condition
  /// kappa != sum a_n conj(b_n) / t_n is enforced.
  static RankOneData singular(SpectrumSequence t, std::vector<Complex> a, std::vector<Complex> b,
                              Complex kappa, bool a_in_space = false);

  PerturbationKind kind() const { return kind_; }
  const SpectrumSequence& spectrum() const { return t_; }
  const std::vector<Complex>& a() const { return a_; }
  const std::vector<Complex>& b() const { return b_; }
  Complex kappa() const { return kappa_; }
  bool a_in_space() const { return a_in_space_; }
  std::size_t size() const { return t_.size(); }

  /// w_n = a_n conj(b_n).
  std::vector<Complex> weights() const;
  /// Coefficients c_n in beta = kappa + sum c_n (1/(t_n - z) - 1/t_n):
  /// -t_n^2 w_n for the bounded kind, w_n for the singular kind.
  std::vector<Complex> residues() const;

 private:
  RankOneData(PerturbationKind kind, SpectrumSequence t, std::vector<Complex> a,
              std::vector<Complex> b, Complex kappa, bool a_in_space);

  PerturbationKind kind_;
  SpectrumSequence t_;
  std::vector<Complex> a_, b_;
  Complex kappa_;
  bool a_in_space_;
};

inline constexpr double kMomentTol = 1e-8;
inline constexpr double kTailShareLimit = 0.01;

struct MomentReport {
  int k = 0;
  Complex target;
  Complex partial_sum;
  double abs_partial_sum = 0.0;
  bool converges_absolutely = false;  // proxy: last quarter carries at most 1% of sum |terms|
  bool satisfied = false;             // |partial_sum - target| <= tol (1 + |target|)
};

/// sum_{n < n_trunc} t_n^k w_n. Targets: bounded kind -1 at k = 1 and 0 for
/// k >= 2; singular kind kappa at k = -1 and 0 for k >= 0.
MomentReport moment_sum(const RankOneData& data, int k, std::size_t n_trunc, double tol = kMomentTol);

struct MomentCheck {
  std::vector<MomentReport> reports;
  /// Smallest k whose series passes the convergence proxy yet misses its target.
  std::optional<int> first_failing_convergent;
};

/// Reports for k = 1..k_max (bounded) or k = -1..k_max (singular) over the full window.
MomentCheck moment_equalities_check(const RankOneData& data, int k_max, double tol = kMomentTol);

/// Leading N x N block of diag(1/t_n) + a b^*. Bounded kind only.
linalg::Matrix build_truncated_matrix(const RankOneData& data, std::size_t N);

inline constexpr double kChainRankTol = 1e-8;

struct KernelChain {
  std::vector<std::size_t> dims;  // dims[j-1] = dim ker (L^*)^j
  bool precision_warning = false;
};

KernelChain kernel_chain_dims(const linalg::Matrix& L, std::size_t j_max, double tol = kChainRankTol);

/// Bounded data for L_0 = A_0 - kappa^{-1} A_0 a (A_0^* b)^*, the inverse of
/// the singular perturbation; output weights are -w_n / (kappa t_n^2).
RankOneData singular_to_bounded(const RankOneData& data);

enum class Degeneracy { degenerate, nondegenerate };

Degeneracy degeneracy_check(const RankOneData& data, double tol = 1e-14);

}  // namespace rankone
