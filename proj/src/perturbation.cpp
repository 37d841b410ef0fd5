#include "rankone/perturbation.hpp"

#include <Eigen/SVD>

namespace rankone {

RankOneData::RankOneData(PerturbationKind kind, SpectrumSequence t, std::vector<Complex> a,
                         std::vector<Complex> b, Complex kappa, bool a_in_space)
    : kind_(kind), t_(std::move(t)), a_(std::move(a)), b_(std::move(b)), kappa_(kappa),
      a_in_space_(a_in_space) {
  if (a_.size() != t_.size() || b_.size() != t_.size())
    throw DomainError("a and b must align with the spectrum");
}

RankOneData RankOneData::bounded(SpectrumSequence t, std::vector<Complex> a, std::vector<Complex> b) {
  return RankOneData(PerturbationKind::bounded, std::move(t), std::move(a), std::move(b), 1.0, false);
}

RankOneData RankOneData::singular(SpectrumSequence t, std::vector<Complex> a, std::vector<Complex> b,
                                  Complex kappa, bool a_in_space) {
  RankOneData d(PerturbationKind::singular, std::move(t), std::move(a), std::move(b), kappa, a_in_space);
  if (a_in_space) {
    CompensatedSum<Complex> s;
    const auto w = d.weights();
    for (std::size_t n = 0; n < w.size(); ++n) s.add(w[n] / d.t_[n]);
    if (std::abs(kappa - s.value()) <= kMomentTol * (1.0 + std::abs(kappa)))
      throw DomainError("condition (A) fails: kappa equals <A^{-1}a, b>");
  }
  return d;
}

std::vector<Complex> RankOneData::weights() const {
  std::vector<Complex> w(a_.size());
  for (std::size_t n = 0; n < w.size(); ++n) w[n] = a_[n] * std::conj(b_[n]);
  return w;
}

std::vector<Complex> RankOneData::residues() const {
  std::vector<Complex> c = weights();
  if (kind_ == PerturbationKind::bounded)
    for (std::size_t n = 0; n < c.size(); ++n) c[n] *= -t_[n] * t_[n];
  return c;
}

namespace {

Complex moment_target(const RankOneData& data, int k) {
  if (data.kind() == PerturbationKind::bounded) return k == 1 ? Complex(-1.0) : Complex(0.0);
  return k == -1 ? data.kappa() : Complex(0.0);
}

}  // namespace

MomentReport moment_sum(const RankOneData& data, int k, std::size_t n_trunc, double tol) {
  if (n_trunc > data.size()) throw DomainError("truncation exceeds window");
  const auto w = data.weights();
  const auto t = data.spectrum().values();
  MomentReport rep;
  rep.k = k;
  rep.target = moment_target(data, k);
  CompensatedSum<Complex> s;
  CompensatedSum<double> abs_all, abs_tail;
  const std::size_t tail_from = n_trunc - n_trunc / 4;
  for (std::size_t n = 0; n < n_trunc; ++n) {
    const Complex term = std::pow(t[n], k) * w[n];
    s.add(term);
    abs_all.add(std::abs(term));
    if (n >= tail_from) abs_tail.add(std::abs(term));
  }
  rep.partial_sum = s.value();
  rep.abs_partial_sum = abs_all.value();
  rep.converges_absolutely =
      rep.abs_partial_sum == 0.0 || abs_tail.value() <= kTailShareLimit * rep.abs_partial_sum;
  rep.satisfied = std::abs(rep.partial_sum - rep.target) <= tol * (1.0 + std::abs(rep.target));
  return rep;
}

MomentCheck moment_equalities_check(const RankOneData& data, int k_max, double tol) {
  if (k_max < 1) throw DomainError("k_max must be positive");
  MomentCheck out;
  const int k0 = data.kind() == PerturbationKind::bounded ? 1 : -1;
  for (int k = k0; k <= k_max; ++k) {
    out.reports.push_back(moment_sum(data, k, data.size(), tol));
    const MomentReport& r = out.reports.back();
    if (!out.first_failing_convergent && r.converges_absolutely && !r.satisfied)
      out.first_failing_convergent = k;
  }
  return out;
}

linalg::Matrix build_truncated_matrix(const RankOneData& data, std::size_t N) {
  if (data.kind() != PerturbationKind::bounded)
    throw UnsupportedInput("truncated matrix needs bounded data; convert singular data first");
  if (N > data.size()) throw DomainError("truncation exceeds window");
  linalg::Matrix L(N, N);
  const auto t = data.spectrum().values();
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) L(i, j) = data.a()[i] * std::conj(data.b()[j]);
    L(i, i) += 1.0 / t[i];
  }
  return L;
}

KernelChain kernel_chain_dims(const linalg::Matrix& L, std::size_t j_max, double tol) {
  if (L.rows() != L.cols()) throw DomainError("matrix must be square");
  KernelChain out;
  const std::size_t n = static_cast<std::size_t>(L.rows());
  if (n == 0) {
    out.dims.assign(j_max, 0);
    return out;
  }
  Eigen::JacobiSVD<linalg::Matrix> svd(L);
  const auto& sv = svd.singularValues();
  const double norm = sv(0);
  double smallest_kept = norm;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * norm) smallest_kept = sv(i);
  const linalg::Matrix Ls = L.adjoint();
  linalg::Matrix P = linalg::Matrix::Identity(L.rows(), L.cols());
  for (std::size_t j = 1; j <= j_max; ++j) {
    P = P * Ls;
    const double threshold = tol * std::pow(norm, static_cast<double>(j));
    Eigen::ColPivHouseholderQR<linalg::Matrix> qr(P);
    const auto R = qr.matrixR();
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < R.rows(); ++i)
      if (std::abs(R(i, i)) > threshold) ++rank;
    out.dims.push_back(n - rank);
    if (norm > 0.0 && static_cast<double>(j) * std::log10(norm / smallest_kept) > 14.0)
      out.precision_warning = true;
  }
  return out;
}

RankOneData singular_to_bounded(const RankOneData& data) {
  if (data.kind() != PerturbationKind::singular) throw DomainError("data is already bounded");
  if (data.kappa() == Complex{}) throw DomainError("kappa must be nonzero to invert");
  const auto t = data.spectrum().values();
  std::vector<Complex> a0(t.size()), b0(t.size());
  for (std::size_t n = 0; n < t.size(); ++n) {
    a0[n] = -data.a()[n] / (data.kappa() * t[n]);
    b0[n] = data.b()[n] / std::conj(t[n]);
  }
  return RankOneData::bounded(data.spectrum(), std::move(a0), std::move(b0));
}

Degeneracy degeneracy_check(const RankOneData& data, double tol) {
  if (std::abs(data.kappa()) >= tol) return Degeneracy::nondegenerate;
  for (const Complex& w : data.weights())
    if (std::abs(w) >= tol) return Degeneracy::nondegenerate;
  return Degeneracy::degenerate;
}

}  // namespace rankone
