#pragma once

// Greedy canonical products S = prod_k S_{T_k} whose zeros make
// sum 1/|t S'(t)| diverge while sum 1/(t^2 |S'(t)|) stays bounded, and the
// rank-one data assembled from them.

#include <cstddef>
#include <optional>
#include <vector>

#include "rankone/common.hpp"
#include "rankone/spectra.hpp"

namespace rankone {

/// S(z) = scale * prod_n (1 - z/t_n) over distinct positive zeros.
class CanonicalProduct {
 public:
  CanonicalProduct() = default;
  explicit CanonicalProduct(std::vector<double> zeros, double scale = 1.0);

  const std::vector<double>& zeros() const { return zeros_; }
  double scale() const { return scale_; }
  std::size_t degree() const { return zeros_.size(); }

  LogComplex log_eval(Complex z) const;
  Complex eval(Complex z) const { return log_eval(z).value(); }
  /// log |S(x)| at a real point; -inf at a zero.
  double log_abs(double x) const;

  /// S'(t_i) = scale (-1/t_i) prod_{m != i} (1 - t_i/t_m), held as log|.| and sign.
  const std::vector<double>& log_abs_derivs() const { return log_dabs_; }
  const std::vector<int>& deriv_signs() const { return dsign_; }
  double derivative_at(std::size_t i) const;

  /// (z - t1) S(z): scale becomes -t1 * scale and t1 joins the zeros.
  CanonicalProduct times_linear(double t1) const;

 private:
  void compute_derivs();

  std::vector<double> zeros_;
  double scale_ = 1.0;
  std::vector<double> log_dabs_;
  std::vector<int> dsign_;
};

/// S_T(z) = prod_{n in T} (1 - z/t_n).
CanonicalProduct block_product(const SpectrumSequence& seq, const std::vector<std::size_t>& T);

/// A set passes when the log of its lower sum exceeds this margin.
inline constexpr double kLowerSumMargin = 1e-12;

struct GreedyBlock {
  std::vector<std::size_t> indices;  // increasing
  double log_lower_sum = -kInf;      // log sum_{T} 1/|t U(t) S_T'(t)|
  double weighted_sum = 0.0;         // sum_{T} 1/(t^2 |U(t) S_T'(t)|)
  std::size_t octave_size = 0;
};

/// Start from the octave t_{n_k}/2 <= t_n <= 2 t_{n_k} (index 0 and zeros of
/// U_prev excluded); remove the smallest contribution whose removal keeps the
/// sum above 1, ties to the lower index, until no removal does.
GreedyBlock greedy_block(const SpectrumSequence& seq, std::size_t anchor, const CanonicalProduct& U_prev);

/// log of the lower sum after removing each member of T in turn.
std::vector<double> removal_log_sums(const SpectrumSequence& seq, const std::vector<std::size_t>& T,
                                     const CanonicalProduct& U_prev);

enum class SandwichRule {
  plain,           // 1/2 <= prod_{j > k} |S_{T_j}(t)| <= 2 for t in T_k
  geometric_budget // block j may move block k's product by at most a factor 2^{2^{-(j-k)}}
};

struct CounterexampleOptions {
  std::size_t max_blocks = 6;
  double anchor_growth = 4.0;
  double advance_factor = 1.125;
  SandwichRule sandwich = SandwichRule::plain;
  std::size_t tilde_patience = 3;
  bool allow_tilde = true;
};

struct BlockRecord {
  std::size_t anchor = 0;
  std::vector<std::size_t> indices;
  double log_lower_sum = 0.0;
  double weighted_sum = 0.0;
  std::size_t octave_size = 0;
  std::size_t prior_degree = 0;   // N_k
  double log_prior_value = 0.0;   // log |U_{k-1}(t_{n_k})|
  std::size_t anchors_tried = 0;
};

struct CounterexampleBundle {
  std::vector<BlockRecord> blocks;
  CanonicalProduct S;                 // tilde product when used_tilde
  std::vector<std::size_t> zero_indices;  // indices into the input sequence, Z_S order
  std::vector<double> residues;       // c_n = -1/S'(t_n)
  std::vector<double> log_abs_residues;
  std::vector<int> residue_signs;
  std::vector<double> a, b;
  double kappa = 1.0;                 // 1/S(0)
  std::vector<double> s1_trace, s2_trace;  // cumulative over blocks, final S'
  std::vector<double> sandwich_min, sandwich_max;  // per block, prod over later blocks
  bool used_tilde = false;
  std::size_t anchors_examined = 0;
  std::size_t window_size = 0;
};

/// Trigger: t_n >= growth * t_prev and |t_n|^{N+1} prod_{octave} |(t_k - t_n)/t_k| < 1/t_n.
bool anchor_trigger(const SpectrumSequence& seq, std::size_t n, std::size_t prior_degree);

CounterexampleBundle build_counterexample(const SpectrumSequence& seq, const CounterexampleOptions& opt = {});

struct SumVerification {
  std::vector<double> s1_trace, s2_trace;
  std::vector<double> s1_increments, s2_increments;
  std::vector<double> dominating;     // C sum_{j <= k} 1/t_{n_j}
  double dominating_constant = 0.0;
  bool insufficient_blocks = true;
  bool s1_diverges_proxy = false;      // every increment >= 1/2
  bool s2_converges_proxy = false;     // increments decrease and trace <= dominating
  bool weighted_sum_uniform = true;    // every block's weighted sum within 4x the first block's
};

SumVerification verify_sums(const CounterexampleBundle& bundle);

struct InterpolationCheck {
  double max_residual = 0.0;
  std::vector<double> residuals;
  std::vector<bool> rejected;  // sample too close to a zero of S
};

/// |1/S(z) - (1/S(0) - sum 1/S'(t_n) (1/(t_n - z) - 1/t_n))| at each sample.
InterpolationCheck interpolation_residual(const CanonicalProduct& S, const std::vector<Complex>& z_samples);

struct DefectResult {
  std::size_t dimension = 0;
  std::size_t kernels = 0;
  std::size_t numerical_rank = 0;
  std::size_t deficiency = 0;
  std::size_t removed = 0;      // |Z_S intersect window|
  double condition_estimate = 1.0;
  bool precision_warning = false;
};

inline constexpr double kDefectTol = 1e-8;

/// Kernels K_lambda for lambda in (window zeros of A) minus Z_S, plus any
/// extra off-spectrum points, in coordinates v(n) = w_n / (t_n - lambda)
/// over the window; a kernel at lambda = t_m is the basis vector e_m.
/// w_n = |b_n| on Z_S and 1 elsewhere.
DefectResult defect_rank(const CounterexampleBundle& bundle, const SpectrumSequence& seq, std::size_t lo,
                         std::size_t hi, double tol = kDefectTol, const std::vector<double>& extra_points = {});

}  // namespace rankone
