#pragma once

// Spectral sequences {t_n} and the sparseness tests run on them.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankone/common.hpp"

namespace rankone {

/// Finite window of a spectral sequence: nonzero, pairwise distinct values
/// ordered by nondecreasing modulus.
class SpectrumSequence {
 public:
  SpectrumSequence() = default;

  /// Validates the ordering invariant; throws DomainError when violated.
  explicit SpectrumSequence(std::vector<Complex> values, std::string origin = {});

  /// Sorts by modulus (ties by real part, then imaginary part) before validating.
  static SpectrumSequence sorted(std::vector<Complex> values, std::string origin = {});
  static SpectrumSequence from_real(const std::vector<double>& values, std::string origin = {});

  std::span<const Complex> values() const { return values_; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  bool is_real() const { return is_real_; }
  const std::string& origin() const { return origin_; }

  /// Real parts; throws UnsupportedInput when the sequence is not real.
  std::vector<double> real_values() const;
  std::vector<double> moduli() const;
  SpectrumSequence prefix(std::size_t n) const;
  SpectrumSequence reciprocals() const;

 private:
  std::vector<Complex> values_;
  bool is_real_ = true;
  std::string origin_;
};

// ---- generators ----------------------------------------------------------

/// t_n = ratio^n, n = 1..count.
SpectrumSequence geometric_sequence(double ratio, std::size_t count);
/// t_n = n + offset, n = first..first+count-1.
SpectrumSequence integer_sequence(std::size_t first, std::size_t count, double offset = 0.0);
/// t_n = exp(n^power), n = 1..count.
SpectrumSequence exp_power_sequence(double power, std::size_t count);

enum class SymbolForm {
  leading_order,  // tau R^{-a-n} n^{a-1}
  exact           // Taylor coefficients tau R^{-a-n} Gamma(n+a) / (Gamma(a) n!)
};

/// Fourier coefficients of tau1 (R - z)^{-a} + tau2 (1/r - 1/z)^{-a} for
/// 0 < |n| <= n_max, as the spectrum of the convolution operator.
SpectrumSequence convolution_symbol_sequence(Complex tau1, Complex tau2, double r, double R,
                                             double a, std::size_t n_max,
                                             SymbolForm form = SymbolForm::leading_order);

/// Eigenvalues of the leading N x N block of a symmetric tridiagonal matrix,
/// by Sturm-sequence bisection. Eigenvalues within the solver tolerance of
/// zero are omitted.
SpectrumSequence jacobi_truncated_eigenvalues(const std::vector<double>& diag,
                                              const std::vector<double>& offdiag, std::size_t N);

/// Off-diagonal entries a_n = ((q^n - 1)/(q - 1))^{1/2}, n = 1..count.
std::vector<double> q_oscillator_offdiag(double q, std::size_t count);

// ---- sparseness tests ----------------------------------------------------

struct LacunarityReport {
  bool is_lacunary = false;
  double best_epsilon = 0.0;  // min |t_n - t_m| / max(|t_n|, |t_m|); +inf for one point
  std::optional<std::pair<std::size_t, std::size_t>> witness_pair;
};

inline constexpr double kDefaultLacunarityThreshold = 1e-3;

LacunarityReport check_lacunary(const SpectrumSequence& seq,
                                double threshold = kDefaultLacunarityThreshold);

/// #{n : |t_n| < r}.
std::size_t counting_function(const SpectrumSequence& seq, double r);

struct DensityVerdict {
  std::vector<double> ratios;          // n_T(r) / log^2 r per radius
  std::vector<double> window_maxima;   // maxima over the three consecutive thirds of the grid
  double limsup_proxy = 0.0;           // maximum over the last third
  bool satisfies_beglog2 = false;
};

inline constexpr double kDefaultDivergenceThreshold = 4.0;

DensityVerdict log2_density_test(const SpectrumSequence& seq, const std::vector<double>& radii,
                                 double divergence_threshold = kDefaultDivergenceThreshold);

/// log( |t_n|^N prod_{k != n, 1/2 <= t_k/t_n <= 2} |(t_k - t_n)/t_k| ); may be -inf.
double sparseness_log_product(const SpectrumSequence& seq, std::size_t n, int N);
/// exp of the above, or 0 below the underflow floor.
double sparseness_product(const SpectrumSequence& seq, std::size_t n, int N);

struct BonWitness {
  std::size_t index = 0;
  double product_value = 0.0;
  std::size_t points_in_window = 0;
  std::size_t half_count = 0;  // M = floor(points / 2)
};

/// Witness in [R, 2R]: the index minimising the in-window
/// product; nullopt when fewer than two points lie in the window.
std::optional<BonWitness> bon_witness(const SpectrumSequence& seq, double R);

/// Geometric-growth fit |t_n| ~ g^n: g is the mean consecutive ratio and B
/// the smallest constant with |t_n / t_m| <= B g^{n-m} for all n < m.
struct GrowthFit {
  double ratio = 1.0;
  double constant = 1.0;
};
GrowthFit fit_growth(const SpectrumSequence& seq);

}  // namespace rankone
