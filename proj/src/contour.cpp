#include <array>
#include <functional>

#include "rankone/kernels.hpp"
#include "rankone/linalg.hpp"
#include "rankone/meromorphic.hpp"

namespace rankone {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kFullOffset = 0.3183;

constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

struct Region {
  double r0, r1;
  double th0, th1;  // th1 - th0 == 2 pi for a full annulus
  bool full;

  bool contains(Complex z) const {
    const double r = std::abs(z);
    if (!(r > r0 && r < r1)) return false;
    if (full) return true;
    double d = std::fmod(std::arg(z) - th0, kTwoPi);
    if (d < 0) d += kTwoPi;
    return d > 0.0 && d < th1 - th0;
  }
  Complex center() const {
    const double rm = 0.5 * (r0 + r1);
    return full ? Complex{} : std::polar(rm, 0.5 * (th0 + th1));
  }
  double size() const { return full ? r1 : std::max(r1 - r0, 0.5 * (r0 + r1) * (th1 - th0)); }
};

// One oriented piece of a region boundary: an arc at fixed radius or a radial segment.
struct Path {
  bool arc;
  double fixed;   // radius for arcs, angle for radial segments
  double from, to;

  Complex at(double s) const {
    const double v = from + s * (to - from);
    return arc ? std::polar(fixed, v) : std::polar(v, fixed);
  }
  Complex velocity(double s) const {
    if (arc) return Complex(0.0, to - from) * at(s);
    return (to - from) * std::polar(1.0, fixed);
  }
};

std::vector<Path> boundary(const Region& g) {
  std::vector<Path> p;
  if (g.full) {
    p.push_back({true, g.r1, g.th0, g.th0 + kTwoPi});
    if (g.r0 > 0.0) p.push_back({true, g.r0, g.th0 + kTwoPi, g.th0});
    return p;
  }
  p.push_back({true, g.r1, g.th0, g.th1});
  p.push_back({false, g.th1, g.r1, g.r0});
  if (g.r0 > 0.0) p.push_back({true, g.r0, g.th1, g.th0});
  p.push_back({false, g.th0, g.r0, g.r1});
  return p;
}

struct Sample {
  double s;
  Complex z;
  Complex beta;
};

class ContourEngine {
 public:
  ContourEngine(const MeromorphicSum& f, const ZeroSearchOptions& opt) : f_(f), opt_(opt) {}

  // Samples of one closed boundary: each path adaptively refined.
  std::vector<std::vector<Sample>> sample(const Region& g) {
    std::vector<std::vector<Sample>> out;
    std::size_t total = 0;
    for (const Path& p : boundary(g)) {
      out.push_back(sample_path(p, total));
      total += out.back().size();
    }
    points_ += total;
    return out;
  }

  int winding(const std::vector<std::vector<Sample>>& samples) const {
    double total = 0.0;
    for (const auto& path : samples)
      for (std::size_t k = 0; k + 1 < path.size(); ++k) total += std::arg(path[k + 1].beta / path[k].beta);
    const double w = total / kTwoPi;
    const double r = std::round(w);
    if (std::abs(w - r) > 1e-3) throw ContourError("argument increment is not a multiple of 2 pi");
    return static_cast<int>(r);
  }

  // (1/2 pi i) * contour integral of (z - c)^k beta'/beta dz for k = 0..kmax
  std::vector<Complex> log_moments(const std::vector<std::vector<Sample>>& samples,
                                   const std::vector<Path>& paths, Complex c, double scale, int kmax) const {
    std::vector<CompensatedSum<Complex>> acc(static_cast<std::size_t>(kmax) + 1);
    for (std::size_t pi = 0; pi < paths.size(); ++pi) {
      const auto& path = samples[pi];
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const double a = path[k].s, b = path[k + 1].s;
        for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
          const double s = 0.5 * (a + b) + 0.5 * (b - a) * kGaussNodes[q];
          const Complex z = paths[pi].at(s);
          const Complex g = f_.derivative(z) / f_.value(z) * paths[pi].velocity(s) *
                            (0.5 * (b - a) * kGaussWeights[q]);
          const Complex w = (z - c) / scale;
          Complex wk = 1.0;
          for (int j = 0; j <= kmax; ++j) {
            acc[static_cast<std::size_t>(j)].add(wk * g);
            wk *= w;
          }
        }
      }
    }
    std::vector<Complex> out;
    for (auto& a : acc) out.push_back(a.value() / Complex(0.0, kTwoPi));
    return out;
  }

  std::size_t points() const { return points_; }

 private:
  std::vector<Sample> sample_path(const Path& p, std::size_t used) {
    const std::size_t initial = p.arc ? 64 : 16;
    std::vector<Sample> pts;
    std::vector<Complex> zs;
    for (std::size_t k = 0; k <= initial; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(initial);
      pts.push_back({s, p.at(s), {}});
      zs.push_back(pts.back().z);
    }
    const auto v0 = beta_eval_batch(f_, zs);
    for (std::size_t k = 0; k < v0.size(); ++k) set_beta(pts[k], v0[k]);
    for (;;) {
      std::vector<std::size_t> split;
      for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double darg = std::abs(std::arg(pts[k + 1].beta / pts[k].beta));
        const double len = std::abs(pts[k + 1].z - pts[k].z);
        const double clearance = f_.nearest_pole_distance(0.5 * (pts[k].z + pts[k + 1].z));
        if (darg >= 0.5 * kPi || len > 0.5 * clearance) split.push_back(k);
      }
      if (split.empty()) break;
      if (used + pts.size() + split.size() > opt_.max_points_per_contour)
        throw ContourError("contour refinement exceeded the point budget");
      std::vector<Sample> next;
      std::vector<std::size_t> fresh;
      std::vector<Complex> new_z;
      std::size_t si = 0;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        next.push_back(pts[k]);
        if (si < split.size() && split[si] == k) {
          const double s = 0.5 * (pts[k].s + pts[k + 1].s);
          fresh.push_back(next.size());
          next.push_back({s, p.at(s), {}});
          new_z.push_back(next.back().z);
          ++si;
        }
      }
      pts.swap(next);
      const auto v = beta_eval_batch(f_, new_z);
      for (std::size_t m = 0; m < fresh.size(); ++m) set_beta(pts[fresh[m]], v[m]);
    }
    return pts;
  }

  void set_beta(Sample& s, Complex b) const {
    if (!(std::abs(b) > 1e-300) || !std::isfinite(b.real()) || !std::isfinite(b.imag()))
      throw ContourError("beta vanishes on the contour");
    s.beta = b;
  }

  const MeromorphicSum& f_;
  const ZeroSearchOptions& opt_;
  std::size_t points_ = 0;
};

struct Polished {
  Complex z;
  double residual;
};

Polished newton_polish(const MeromorphicSum& f, Complex z, int steps) {
  auto resid = [&](Complex w) {
    try {
      return std::abs(f.value(w)) / f.magnitude_scale(w);
    } catch (const PoleError&) {
      return kInf;
    }
  };
  double r = resid(z);
  for (int it = 0; it < steps && r > 0.0; ++it) {
    if (!std::isfinite(r)) break;
    const Complex b = f.value(z);
    const Complex d = f.derivative(z);
    if (d == Complex{}) break;
    Complex step = b / d;
    bool improved = false;
    for (int h = 0; h < 40; ++h) {
      const Complex zn = z - step;
      const double rn = resid(zn);
      if (rn < r) {
        const double moved = std::abs(zn - z);
        z = zn;
        r = rn;
        improved = true;
        if (moved <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(z)) return {z, r};
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return {z, r};
}

int poles_inside(const MeromorphicSum& f, const Region& g, std::vector<Complex>* list = nullptr) {
  int n = 0;
  for (std::size_t k : f.active_poles()) {
    const Complex p = f.poles()[k];
    if (g.contains(p)) {
      ++n;
      if (list) list->push_back(p);
    }
  }
  return n;
}

// Smallest pole distance to a cut, relative to min(dim, radius of the
// nearest point on the cut).
double edge_clearance(const MeromorphicSum& f, bool radial_split, double value, const Region& g, double dim) {
  double best = kInf;
  for (std::size_t k : f.active_poles()) {
    const Complex p = f.poles()[k];
    double d, ref;
    if (radial_split) {
      d = std::abs(std::abs(p) - value);
      ref = value;
    } else {
      const Complex u = std::polar(1.0, value);
      const double proj = p.real() * u.real() + p.imag() * u.imag();
      const double along = std::clamp(proj, g.r0, g.r1);
      d = std::abs(p - along * u);
      ref = along;
    }
    best = std::min(best, d / std::max(std::min(dim, ref), 1e-300));
  }
  return best;
}

class Searcher {
 public:
  Searcher(const MeromorphicSum& f, double tol, const ZeroSearchOptions& opt)
      : f_(f), tol_(tol), opt_(opt), engine_(f, opt) {}

  int count(const Region& g) {
    const auto samples = engine_.sample(g);
    return engine_.winding(samples) + poles_inside(f_, g);
  }

  void solve(const Region& g, int n, int depth) {
    if (n <= 0) return;
    if (n == 1 && try_single(g)) return;
    if (n >= 2 && n <= 4 && try_cluster(g, n, false)) return;
    if (depth >= opt_.max_depth || g.size() <= 1e-9 * std::max(std::abs(g.center()), g.r1)) {
      try_cluster(g, n, true);
      return;
    }
    split(g, n, depth);
  }

  ZeroSet result;

 private:
  bool try_single(const Region& g) {
    const auto samples = engine_.sample(g);
    const auto paths = boundary(g);
    std::vector<Complex> poles;
    poles_inside(f_, g, &poles);
    const Complex c = g.center();
    const double scale = std::max(g.size(), 1e-300);
    const auto m = engine_.log_moments(samples, paths, c, scale, 1);
    Complex est = c + scale * m[1];
    for (const Complex& p : poles) est += p - c;
    const Polished z = newton_polish(f_, est, opt_.newton_steps);
    if (!g.contains(z.z) || !(z.residual <= tol_)) return false;
    record(z, 1);
    return true;
  }

  bool try_cluster(const Region& g, int n, bool force) {
    const auto samples = engine_.sample(g);
    const auto paths = boundary(g);
    std::vector<Complex> poles;
    poles_inside(f_, g, &poles);
    const Complex c = g.center();
    const double scale = std::max(g.size(), 1e-300);
    const auto m = engine_.log_moments(samples, paths, c, scale, n);
    // power sums of the scaled zeros w = (z - c)/scale
    std::vector<Complex> ps(static_cast<std::size_t>(n) + 1);
    for (int k = 1; k <= n; ++k) {
      Complex s = m[static_cast<std::size_t>(k)];
      for (const Complex& p : poles) s += std::pow((p - c) / scale, k);
      ps[static_cast<std::size_t>(k)] = s;
    }
    std::vector<Complex> e(static_cast<std::size_t>(n) + 1);
    e[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
      Complex s = 0.0;
      for (int i = 1; i <= k; ++i) {
        const double sign = (i % 2 == 1) ? 1.0 : -1.0;
        s += sign * e[static_cast<std::size_t>(k - i)] * ps[static_cast<std::size_t>(i)];
      }
      e[static_cast<std::size_t>(k)] = s / static_cast<double>(k);
    }
    // monic polynomial w^n - e1 w^{n-1} + e2 w^{n-2} - ...
    std::vector<Complex> coeffs(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      coeffs[static_cast<std::size_t>(n - k)] = sign * e[static_cast<std::size_t>(k)];
    }
    const auto roots = linalg::polynomial_roots(coeffs);
    std::vector<Polished> pol;
    for (const Complex& w : roots) pol.push_back(newton_polish(f_, c + scale * w, opt_.newton_steps));
    // merge coincident roots
    std::vector<Polished> uniq;
    std::vector<int> mult;
    for (const Polished& p : pol) {
      bool merged = false;
      for (std::size_t u = 0; u < uniq.size(); ++u) {
        if (std::abs(uniq[u].z - p.z) <= 1e-7 * std::max(std::abs(p.z), scale)) {
          ++mult[u];
          merged = true;
          break;
        }
      }
      if (!merged) {
        uniq.push_back(p);
        mult.push_back(1);
      }
    }
    if (!force) {
      if (uniq.size() != static_cast<std::size_t>(n)) return false;
      for (const Polished& p : uniq)
        if (!g.contains(p.z) || !(p.residual <= tol_)) return false;
    }
    for (std::size_t u = 0; u < uniq.size(); ++u) record(uniq[u], mult[u]);
    return true;
  }

  struct Cut {
    Region a, b;
    double clearance;
    bool meets;
  };

  std::vector<Cut> candidate_cuts(const Region& g) const {
    std::vector<Cut> cuts;
    if (g.full) {
      for (int k = 0; k < 20; ++k) {
        const double s0 = g.th0 + 0.1 * k;
        for (double frac : {0.5, 0.45, 0.55}) {
          const double mid = s0 + frac * kTwoPi;
          const double c = std::min(edge_clearance(f_, false, s0, g, g.r1), edge_clearance(f_, false, mid, g, g.r1));
          cuts.push_back({{g.r0, g.r1, s0, mid, false}, {g.r0, g.r1, mid, s0 + kTwoPi, false}, c, c >= 1e-3});
        }
      }
      return cuts;
    }
    const double rm = 0.5 * (g.r0 + g.r1);
    const double dim = std::min(g.r1 - g.r0, rm * (g.th1 - g.th0));
    const bool prefer_radial = (g.r1 - g.r0) >= rm * (g.th1 - g.th0);
    for (bool radial : {prefer_radial, !prefer_radial}) {
      for (int k = 0; k <= 24; ++k) {
        const double frac = 0.5 + ((k % 2) ? 1.0 : -1.0) * 0.01 * ((k + 1) / 2);
        Region a = g, b = g;
        double value;
        if (radial) {
          value = g.r0 > 0.0 ? g.r0 * std::pow(g.r1 / g.r0, frac) : frac * g.r1;
          a.r1 = value;
          b.r0 = value;
        } else {
          value = g.th0 + frac * (g.th1 - g.th0);
          a.th1 = value;
          b.th0 = value;
        }
        const double c = edge_clearance(f_, radial, value, g, dim);
        cuts.push_back({a, b, c, c >= 0.02 && radial == prefer_radial});
      }
    }
    return cuts;
  }

  void split(const Region& g, int n, int depth) {
    auto cuts = candidate_cuts(g);
    // cuts meeting the clearance keep their generation order; the rest follow by clearance
    std::stable_sort(cuts.begin(), cuts.end(), [](const Cut& x, const Cut& y) {
      if (x.meets != y.meets) return x.meets;
      return !x.meets && x.clearance > y.clearance;
    });
    const double floor = g.full ? 5e-5 : 1e-3;
    std::size_t tries = 0;
    for (const Cut& cut : cuts) {
      if (cut.clearance < floor || tries >= 16) break;
      ++tries;
      int na, nb;
      try {
        na = count(cut.a);
        nb = count(cut.b);
      } catch (const ContourError&) {
        continue;
      }
      if (na < 0 || nb < 0 || na + nb != n) continue;
      solve(cut.a, na, depth + 1);
      solve(cut.b, nb, depth + 1);
      return;
    }
    throw ContourError("no consistent subdivision found");
  }

  void record(const Polished& p, int mult) {
    result.zeros.push_back(p.z);
    result.multiplicities.push_back(mult);
    result.polish_residuals.push_back(p.residual);
  }

 public:
  const MeromorphicSum& f_;
  double tol_;
  const ZeroSearchOptions& opt_;
  ContourEngine engine_;
};

Region annulus_region(Annulus a) { return {a.r_in, a.r_out, kFullOffset, kFullOffset + kTwoPi, true}; }

void check_annulus(const MeromorphicSum& f, Annulus a, const ZeroSearchOptions& opt) {
  if (!(a.r_in >= 0.0 && a.r_out > a.r_in)) throw DomainError("annulus radii must satisfy 0 <= r_in < r_out");
  for (std::size_t k : f.active_poles()) {
    const double m = std::abs(f.poles()[k]);
    for (double r : {a.r_in, a.r_out})
      if (r > 0.0 && std::abs(m - r) <= opt.pole_margin * m)
        throw DomainError("annulus boundary passes too close to a pole");
  }
}

}  // namespace

int winding_number(const MeromorphicSum& f, Annulus annulus, const ZeroSearchOptions& opt) {
  check_annulus(f, annulus, opt);
  ContourEngine e(f, opt);
  return e.winding(e.sample(annulus_region(annulus)));
}

ZeroSet beta_zeros(const MeromorphicSum& f, Annulus annulus, double tol, const ZeroSearchOptions& opt) {
  check_annulus(f, annulus, opt);
  const Region g = annulus_region(annulus);
  Searcher s(f, tol, opt);
  const auto samples = s.engine_.sample(g);
  const int w = s.engine_.winding(samples);
  const int p = poles_inside(f, g);
  s.result.contour = annulus;
  s.result.winding_total = w;
  s.result.poles_enclosed = p;
  double tb = 0.0;
  for (const auto& path : samples)
    for (const Sample& q : path) tb = std::max(tb, f.tail().bound(std::abs(q.z)));
  s.result.boundary_tail_bound = tb;
  const int n = w + p;
  if (n < 0) throw ContourError("negative zero count");
  s.solve(g, n, 0);
  // order by modulus, then argument
  std::vector<std::size_t> order(s.result.zeros.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const Complex a = s.result.zeros[x], b = s.result.zeros[y];
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return std::arg(a) < std::arg(b);
  });
  ZeroSet out = s.result;
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.zeros[i] = s.result.zeros[order[i]];
    out.multiplicities[i] = s.result.multiplicities[order[i]];
    out.polish_residuals[i] = s.result.polish_residuals[order[i]];
  }
  out.contour_points = s.engine_.points();
  return out;
}

}  // namespace rankone
