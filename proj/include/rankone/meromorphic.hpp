#pragma once

// beta(z) = kappa + sum_n c_n (1/(t_n - z) - 1/t_n) over a finite window of
// poles, with a certified bound on the discarded tail.

#include <cstddef>
#include <vector>

#include "rankone/common.hpp"
#include "rankone/perturbation.hpp"
#include "rankone/spectra.hpp"

namespace rankone {

/// Bound data for the dropped tail: weight >= sum_{n > N} |c_n / t_n^2| and
/// min_pole_modulus <= inf_{n > N} |t_n|.
struct TailModel {
  double weight = 0.0;
  double min_pole_modulus = kInf;

  /// |z| W / (1 - |z|/T), +inf once |z| >= T.
  double bound(double abs_z) const;
};

struct BetaValue {
  Complex value;
  double tail_bound = 0.0;
};

class MeromorphicSum {
 public:
  MeromorphicSum() = default;
  MeromorphicSum(SpectrumSequence poles, std::vector<Complex> coeffs, Complex kappa, TailModel tail = {});

  /// beta of the perturbation determinant attached to the data.
  static MeromorphicSum from_data(const RankOneData& data, TailModel tail = {});

  const SpectrumSequence& poles() const { return poles_; }
  const std::vector<Complex>& coeffs() const { return coeffs_; }
  Complex kappa() const { return kappa_; }
  const TailModel& tail() const { return tail_; }
  std::size_t n_terms() const { return poles_.size(); }
  /// sum |c_n / t_n^2| over the window.
  double weight_sum() const { return weight_sum_; }

  /// Pole indices with c_n != 0.
  const std::vector<std::size_t>& active_poles() const { return active_; }

  /// Throws PoleError when |z - t_n| <= 1e-12 |t_n| for an active pole.
  BetaValue eval(Complex z) const;
  Complex value(Complex z) const { return eval(z).value; }
  Complex derivative(Complex z) const;
  /// |kappa| + sum |c_n z / (t_n (t_n - z))|, the scale against which |beta| is judged.
  double magnitude_scale(Complex z) const;

  /// Keep the first n terms; the dropped terms are folded into the tail model.
  MeromorphicSum truncated(std::size_t n) const;

  double nearest_pole_distance(Complex z) const;

 private:
  void check_pole(Complex z) const;

  SpectrumSequence poles_;
  std::vector<Complex> coeffs_;
  Complex kappa_ = 1.0;
  TailModel tail_;
  double weight_sum_ = 0.0;
  std::vector<std::size_t> active_;
};

BetaValue beta_eval(const MeromorphicSum& f, Complex z);

/// Batched evaluation through the parallel kernel; bit-identical to eval().
std::vector<Complex> beta_eval_batch(const MeromorphicSum& f, const std::vector<Complex>& zs);

struct Annulus {
  double r_in = 0.0;
  double r_out = 1.0;
};

struct ZeroSet {
  std::vector<Complex> zeros;
  std::vector<int> multiplicities;
  Annulus contour;
  int winding_total = 0;
  int poles_enclosed = 0;
  std::vector<double> polish_residuals;  // normalised |beta| / magnitude_scale after polishing
  double boundary_tail_bound = 0.0;
  std::size_t contour_points = 0;

  int total_multiplicity() const;
};

struct ZeroSearchOptions {
  std::size_t max_points_per_contour = std::size_t{1} << 16;
  int max_depth = 48;
  int newton_steps = 50;
  double pole_margin = 1e-3;
};

/// Zeros of the windowed beta in r_in < |z| < r_out by the argument principle
/// with recursive subdivision and damped Newton polishing.
ZeroSet beta_zeros(const MeromorphicSum& f, Annulus annulus, double tol,
                   const ZeroSearchOptions& opt = {});

/// Net argument increment of beta around the annulus boundary over 2 pi.
int winding_number(const MeromorphicSum& f, Annulus annulus, const ZeroSearchOptions& opt = {});

/// Reciprocals of the distinct zeros, sorted by modulus; multiplicities stay on the ZeroSet.
SpectrumSequence spectrum_from_beta(const ZeroSet& zs);

}  // namespace rankone
