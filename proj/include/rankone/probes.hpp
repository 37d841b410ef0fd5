#pragma once

// Finite-window probes of limits taken along radii of density one.

#include <cstddef>
#include <optional>
#include <vector>

#include "rankone/common.hpp"
#include "rankone/meromorphic.hpp"
#include "rankone/spectra.hpp"

namespace rankone {

struct BlockFraction {
  int block = 0;  // floor(log2 r)
  std::size_t total = 0;
  std::size_t kept = 0;
  double fraction() const { return total == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(total); }
};

struct ResolventProbe {
  std::optional<double> kept_fraction;  // empty for an empty grid
  std::vector<double> radii;
  std::vector<double> sup_values;  // r^{-delta} / min_n | |s_n| - 1/r |
  std::vector<bool> kept;
  std::vector<BlockFraction> blocks;
};

/// s holds the eigenvalues s_n of the normal diagonal operator. A radius is
/// kept when the exact sup over |z| = r of |z|^{-delta} ||(A - 1/z)^{-1}|| is <= tol.
ResolventProbe resolvent_norm_probe(const SpectrumSequence& s, double delta,
                                    const std::vector<double>& radius_grid, double tol = 1.0);

struct LimstRow {
  double r = 0.0;
  double value = 0.0;  // max over the circle of |z|^s |beta(z)|
  bool kept = false;
};

struct LimstBlock {
  int block = 0;
  double max_value = 0.0;
  std::size_t kept = 0;
};

struct LimstProbe {
  double tau = 0.0;
  std::vector<LimstRow> rows;
  std::vector<LimstBlock> blocks;  // only blocks with at least one kept radius
};

inline constexpr std::size_t kLimstCircleSamples = 256;

/// Radii closer than tau |t_n| to some |t_n| are skipped; tau defaults to
/// 0.1 times the pole sequence's best lacunarity epsilon.
LimstProbe limst_probe(const MeromorphicSum& f, int s, const std::vector<double>& radius_grid,
                       std::optional<double> tau = std::nullopt,
                       std::size_t circle_samples = kLimstCircleSamples);

struct SectorOutlier {
  Complex zero;
  double arg_distance = 0.0;  // distance of arg z to the nearest ray
};

struct SectorReport {
  std::vector<Complex> zeros;
  std::vector<SectorOutlier> outliers;
};

/// Zeros in each annulus whose argument is farther than eps from every ray.
SectorReport sector_localization_check(const MeromorphicSum& f, const std::vector<double>& ray_angles,
                                       double eps, const std::vector<Annulus>& annuli,
                                       double tol = 1e-10);

}  // namespace rankone
