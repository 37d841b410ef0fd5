#include "rankone/probes.hpp"

#include <map>

namespace rankone {

namespace {

int dyadic_block(double r) { return static_cast<int>(std::floor(std::log2(r))); }

}  // namespace

ResolventProbe resolvent_norm_probe(const SpectrumSequence& s, double delta,
                                    const std::vector<double>& radius_grid, double tol) {
  if (!(delta > 1.0)) throw DomainError("delta must exceed 1");
  ResolventProbe out;
  const std::vector<double> m = s.moduli();
  std::map<int, BlockFraction> blocks;
  std::size_t kept_total = 0;
  for (double r : radius_grid) {
    if (!(r > 0.0)) throw DomainError("radius must be positive");
    const double w = 1.0 / r;
    // nearest modulus to 1/r by binary search on the sorted moduli
    auto it = std::lower_bound(m.begin(), m.end(), w);
    double dist = kInf;
    if (it != m.end()) dist = std::min(dist, std::abs(*it - w));
    if (it != m.begin()) dist = std::min(dist, std::abs(*(it - 1) - w));
    const double sup = std::pow(r, -delta) / dist;
    const bool keep = sup <= tol;
    out.radii.push_back(r);
    out.sup_values.push_back(sup);
    out.kept.push_back(keep);
    BlockFraction& b = blocks[dyadic_block(r)];
    b.block = dyadic_block(r);
    ++b.total;
    if (keep) {
      ++b.kept;
      ++kept_total;
    }
  }
  for (const auto& [k, b] : blocks) out.blocks.push_back(b);
  if (!radius_grid.empty())
    out.kept_fraction = static_cast<double>(kept_total) / static_cast<double>(radius_grid.size());
  return out;
}

LimstProbe limst_probe(const MeromorphicSum& f, int s, const std::vector<double>& radius_grid,
                       std::optional<double> tau, std::size_t circle_samples) {
  if (s < 0) throw DomainError("s must be nonnegative");
  LimstProbe out;
  std::vector<Complex> active;
  for (std::size_t k : f.active_poles()) active.push_back(f.poles()[k]);
  if (tau) {
    out.tau = *tau;
  } else if (active.size() >= 2) {
    out.tau = 0.1 * check_lacunary(SpectrumSequence::sorted(active)).best_epsilon;
  } else {
    out.tau = 0.1;
  }
  std::map<int, LimstBlock> blocks;
  for (double r : radius_grid) {
    LimstRow row;
    row.r = r;
    row.kept = true;
    for (const Complex& p : active)
      if (std::abs(r - std::abs(p)) <= out.tau * std::abs(p)) row.kept = false;
    if (row.kept) {
      std::vector<Complex> zs(circle_samples);
      for (std::size_t k = 0; k < circle_samples; ++k)
        zs[k] = std::polar(r, 2.0 * kPi * (static_cast<double>(k) + 0.5) / static_cast<double>(circle_samples));
      const auto v = beta_eval_batch(f, zs);
      double mx = 0.0;
      for (const Complex& b : v) mx = std::max(mx, std::abs(b));
      row.value = std::pow(r, s) * mx;
      LimstBlock& blk = blocks[dyadic_block(r)];
      blk.block = dyadic_block(r);
      blk.max_value = std::max(blk.max_value, row.value);
      ++blk.kept;
    }
    out.rows.push_back(row);
  }
  for (const auto& [k, b] : blocks) out.blocks.push_back(b);
  return out;
}

SectorReport sector_localization_check(const MeromorphicSum& f, const std::vector<double>& ray_angles,
                                       double eps, const std::vector<Annulus>& annuli, double tol) {
  SectorReport out;
  for (const Annulus& a : annuli) {
    const ZeroSet zs = beta_zeros(f, a, tol);
    for (const Complex& z : zs.zeros) {
      out.zeros.push_back(z);
      double best = kInf;
      for (double ray : ray_angles) {
        double d = std::remainder(std::arg(z) - ray, 2.0 * kPi);
        best = std::min(best, std::abs(d));
      }
      if (best > eps) out.outliers.push_back({z, best});
    }
  }
  return out;
}

}  // namespace rankone
