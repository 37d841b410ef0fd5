#include "rankone/meromorphic.hpp"

#include "rankone/kernels.hpp"

namespace rankone {

double TailModel::bound(double abs_z) const {
  if (weight == 0.0) return 0.0;
  if (abs_z >= min_pole_modulus) return kInf;
  return abs_z * weight / (1.0 - abs_z / min_pole_modulus);
}

MeromorphicSum::MeromorphicSum(SpectrumSequence poles, std::vector<Complex> coeffs, Complex kappa,
                               TailModel tail)
    : poles_(std::move(poles)), coeffs_(std::move(coeffs)), kappa_(kappa), tail_(tail) {
  if (coeffs_.size() != poles_.size()) throw DomainError("coefficients must align with poles");
  CompensatedSum<double> w;
  for (std::size_t n = 0; n < poles_.size(); ++n) {
    if (coeffs_[n] == Complex{}) continue;
    active_.push_back(n);
    w.add(std::abs(coeffs_[n] / (poles_[n] * poles_[n])));
  }
  weight_sum_ = w.value();
}

MeromorphicSum MeromorphicSum::from_data(const RankOneData& data, TailModel tail) {
  return MeromorphicSum(data.spectrum(), data.residues(), data.kappa(), tail);
}

void MeromorphicSum::check_pole(Complex z) const {
  for (std::size_t n : active_)
    if (std::abs(z - poles_[n]) <= 1e-12 * std::abs(poles_[n]))
      throw PoleError(n, "evaluation point coincides with a pole");
}

BetaValue MeromorphicSum::eval(Complex z) const {
  check_pole(z);
  const auto v = kernels::cauchy_sum_serial(poles_.values(), coeffs_, std::span<const Complex>(&z, 1));
  return {kappa_ + v[0], tail_.bound(std::abs(z))};
}

Complex MeromorphicSum::derivative(Complex z) const {
  check_pole(z);
  CompensatedSum<Complex> s;
  for (std::size_t n : active_) {
    const Complex d = poles_[n] - z;
    s.add(coeffs_[n] / (d * d));
  }
  return s.value();
}

double MeromorphicSum::magnitude_scale(Complex z) const {
  double s = std::abs(kappa_);
  for (std::size_t n : active_) s += std::abs(coeffs_[n] * z / (poles_[n] * (poles_[n] - z)));
  return s;
}

MeromorphicSum MeromorphicSum::truncated(std::size_t n) const {
  n = std::min(n, poles_.size());
  TailModel t = tail_;
  for (std::size_t k = n; k < poles_.size(); ++k) {
    if (coeffs_[k] == Complex{}) continue;
    t.weight += std::abs(coeffs_[k] / (poles_[k] * poles_[k]));
    t.min_pole_modulus = std::min(t.min_pole_modulus, std::abs(poles_[k]));
  }
  return MeromorphicSum(poles_.prefix(n), std::vector<Complex>(coeffs_.begin(), coeffs_.begin() + n),
                        kappa_, t);
}

double MeromorphicSum::nearest_pole_distance(Complex z) const {
  double d = kInf;
  for (std::size_t n : active_) d = std::min(d, std::abs(z - poles_[n]));
  return d;
}

BetaValue beta_eval(const MeromorphicSum& f, Complex z) { return f.eval(z); }

std::vector<Complex> beta_eval_batch(const MeromorphicSum& f, const std::vector<Complex>& zs) {
  auto v = kernels::cauchy_sum_omp(f.poles().values(), f.coeffs(), zs);
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (std::isnan(v[k].real())) f.eval(zs[k]);  // raises the PoleError
    v[k] += f.kappa();
  }
  return v;
}

int ZeroSet::total_multiplicity() const {
  int s = 0;
  for (int m : multiplicities) s += m;
  return s;
}

SpectrumSequence spectrum_from_beta(const ZeroSet& zs) {
  std::vector<Complex> s;
  for (std::size_t i = 0; i < zs.zeros.size(); ++i) {
    if (zs.zeros[i] == Complex{}) throw DomainError("zero at the origin has no reciprocal");
    s.push_back(1.0 / zs.zeros[i]);
  }
  return SpectrumSequence::sorted(std::move(s), "beta-zeros");
}

}  // namespace rankone
