#include "rankone/scenario.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>
#include <omp.h>

#include "rankone/counterexample.hpp"
#include "rankone/dyadic_product.hpp"
#include "rankone/meromorphic.hpp"
#include "rankone/perturbation.hpp"
#include "rankone/polya.hpp"
#include "rankone/probes.hpp"
#include "rankone/spectra.hpp"

namespace rankone {

using nlohmann::json;

namespace {

// ---- json helpers -----------------------------------------------------------

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  return j.at(key);
}

double num(const json& j, const char* what) {
  if (!j.is_number()) throw SchemaError(std::string("'") + what + "' must be a number");
  return j.get<double>();
}

double num_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? num(j.at(key), key) : fallback;
}

std::size_t count_of(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer() || v.get<long long>() < 0) throw SchemaError(std::string("'") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::size_t count_or(const json& j, const char* key, std::size_t fallback) {
  return j.contains(key) ? count_of(j, key) : fallback;
}

Complex cnum(const json& j, const char* what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return {j[0].get<double>(), j[1].get<double>()};
  throw SchemaError(std::string("'") + what + "' must be a number or [re, im]");
}

std::vector<double> reals(const json& j, const char* what) {
  if (!j.is_array()) throw SchemaError(std::string("'") + what + "' must be an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(num(x, what));
  return out;
}

std::vector<Complex> complexes(const json& j, const char* what) {
  if (!j.is_array()) throw SchemaError(std::string("'") + what + "' must be an array");
  std::vector<Complex> out;
  for (const auto& x : j) out.push_back(cnum(x, what));
  return out;
}

/// An explicit list, {start, ratio, count} or {start, step, count}.
std::vector<double> grid(const json& j, const char* what) {
  if (j.is_array()) return reals(j, what);
  if (!j.is_object()) throw SchemaError(std::string("'") + what + "' must be a list or a grid object");
  const double start = num(require(j, "start"), "start");
  const std::size_t n = count_of(j, "count");
  std::vector<double> out(n);
  if (j.contains("ratio")) {
    const double q = num(j.at("ratio"), "ratio");
    for (std::size_t k = 0; k < n; ++k) out[k] = start * std::pow(q, static_cast<double>(k));
  } else {
    const double h = num(require(j, "step"), "step");
    for (std::size_t k = 0; k < n; ++k) out[k] = start + h * static_cast<double>(k);
  }
  return out;
}

// ---- scenario state -----------------------------------------------------------

struct State {
  std::optional<SpectrumSequence> seq;
  std::optional<RankOneData> data;
  std::optional<CounterexampleBundle> bundle;
  double tol_scale = 1.0;
  std::uint64_t seed = 0;
};

SpectrumSequence make_sequence(const json& g) {
  const std::string type = require(g, "type").get<std::string>();
  if (type == "explicit") {
    std::vector<Complex> v = complexes(require(g, "values"), "values");
    return g.value("sort", true) ? SpectrumSequence::sorted(std::move(v), "explicit")
                                 : SpectrumSequence(std::move(v), "explicit");
  }
  if (type == "geometric") return geometric_sequence(num(require(g, "ratio"), "ratio"), count_of(g, "count"));
  if (type == "integer_shifted")
    return integer_sequence(count_or(g, "first", 1), count_of(g, "count"), num_or(g, "offset", 0.0));
  if (type == "exp_power") return exp_power_sequence(num(require(g, "power"), "power"), count_of(g, "count"));
  if (type == "jacobi") {
    const std::size_t N = count_of(g, "size");
    std::vector<double> d, e;
    if (g.contains("q")) {
      d.assign(N, num_or(g, "shift", 0.0));
      e = q_oscillator_offdiag(num(g.at("q"), "q"), N > 0 ? N - 1 : 0);
    } else {
      d = reals(require(g, "diag"), "diag");
      e = reals(require(g, "offdiag"), "offdiag");
    }
    return jacobi_truncated_eigenvalues(d, e, N);
  }
  if (type == "convolution_symbol") {
    const std::string form = g.value("form", std::string("exact"));
    if (form != "exact" && form != "leading_order") throw SchemaError("form must be exact or leading_order");
    return convolution_symbol_sequence(cnum(require(g, "tau1"), "tau1"), cnum(require(g, "tau2"), "tau2"),
                                       num(require(g, "r"), "r"), num(require(g, "R"), "R"),
                                       num(require(g, "a"), "a"), count_of(g, "n_max"),
                                       form == "exact" ? SymbolForm::exact : SymbolForm::leading_order);
  }
  throw SchemaError("unknown generator type '" + type + "'");
}

std::vector<Complex> fill(const json& j, const char* what, std::size_t n) {
  if (j.is_array() && !(j.size() == 2 && n != 2 && j[0].is_number() && j[1].is_number())) {
    std::vector<Complex> v = complexes(j, what);
    if (v.size() != n) throw SchemaError(std::string("'") + what + "' length must match the sequence");
    return v;
  }
  return std::vector<Complex>(n, cnum(j, what));
}

RankOneData make_data(const json& p, const SpectrumSequence& t) {
  const std::string kind = p.value("kind", std::string("bounded"));
  std::vector<Complex> a, b;
  if (p.contains("w")) {
    const std::vector<Complex> w = fill(p.at("w"), "w", t.size());
    a.assign(t.size(), 1.0);
    for (const Complex& x : w) b.push_back(std::conj(x));
  } else if (p.contains("c")) {
    // residues c_n of beta; w_n = -c_n / t_n^2 for the bounded kind
    const std::vector<Complex> c = fill(p.at("c"), "c", t.size());
    a.assign(t.size(), 1.0);
    for (std::size_t n = 0; n < t.size(); ++n)
      b.push_back(std::conj(kind == "bounded" ? -c[n] / (t[n] * t[n]) : c[n]));
  } else {
    a = fill(require(p, "a"), "a", t.size());
    b = fill(require(p, "b"), "b", t.size());
  }
  if (kind == "bounded") return RankOneData::bounded(t, a, b);
  if (kind == "singular")
    return RankOneData::singular(t, a, b, cnum(require(p, "kappa"), "kappa"), p.value("a_in_space", false));
  throw SchemaError("perturbation kind must be bounded or singular");
}

const SpectrumSequence& need_seq(const State& s) {
  if (!s.seq) throw SchemaError("command needs a generator");
  return *s.seq;
}

const RankOneData& need_data(const State& s) {
  if (!s.data) throw SchemaError("command needs a perturbation");
  return *s.data;
}

MeromorphicSum beta_source(const json& p, const State& s) {
  const std::string src = p.value("beta", std::string(s.data ? "perturbation" : "dyadic"));
  if (src == "dyadic")
    return dyadic::beta(count_or(p, "window", dyadic::kDefaultWindow),
                           count_or(p, "n_factors", dyadic::kDefaultFactors));
  if (src == "perturbation") {
    const RankOneData& d = need_data(s);
    if (p.contains("kappa")) {
      return MeromorphicSum(d.spectrum(), d.residues(), cnum(p.at("kappa"), "kappa"));
    }
    return MeromorphicSum::from_data(d);
  }
  throw SchemaError("beta must be dyadic or perturbation");
}

Value cval(double x) { return Value{x}; }
Value ival(std::size_t x) { return Value{static_cast<std::int64_t>(x)}; }

void add_sequence_table(Report& r, const std::string& name, const SpectrumSequence& seq) {
  Table& t = r.table(name, {"index", "re", "im", "modulus"});
  for (std::size_t i = 0; i < seq.size(); ++i)
    t.add_row({ival(i), cval(seq[i].real()), cval(seq[i].imag()), cval(std::abs(seq[i]))});
}

// ---- operations ---------------------------------------------------------------

using OpFn = std::function<void(const json&, State&, Report&)>;

void op_check_lacunary(const json& p, State& s, Report& r) {
  const auto rep = check_lacunary(need_seq(s), num_or(p, "threshold", kDefaultLacunarityThreshold));
  r.set("is_lacunary", rep.is_lacunary);
  r.set("best_epsilon", rep.best_epsilon);
  r.set("witness_i", rep.witness_pair ? ival(rep.witness_pair->first) : Value{});
  r.set("witness_j", rep.witness_pair ? ival(rep.witness_pair->second) : Value{});
}

void op_counting_function(const json& p, State& s, Report& r) {
  Table& t = r.table("counts", {"r", "count"});
  for (double x : grid(require(p, "radii"), "radii")) t.add_row({cval(x), ival(counting_function(need_seq(s), x))});
}

void op_log2_density(const json& p, State& s, Report& r) {
  const std::vector<double> radii = grid(require(p, "radii"), "radii");
  const auto v = log2_density_test(need_seq(s), radii, num_or(p, "threshold", kDefaultDivergenceThreshold));
  r.set("limsup_proxy", v.limsup_proxy);
  r.set("satisfies_beglog2", v.satisfies_beglog2);
  for (std::size_t i = 0; i < v.window_maxima.size(); ++i) r.set("window_max_" + std::to_string(i), v.window_maxima[i]);
  Table& t = r.table("ratios", {"r", "ratio"});
  for (std::size_t i = 0; i < radii.size(); ++i) t.add_row({cval(radii[i]), cval(v.ratios[i])});
}

void op_sparseness(const json& p, State& s, Report& r) {
  const std::size_t n = count_of(p, "n");
  const int N = static_cast<int>(count_of(p, "N"));
  const double lp = sparseness_log_product(need_seq(s), n, N);
  r.set("log_value", lp);
  r.set("value", std::exp(lp));
}

void op_bon_witness(const json& p, State& s, Report& r) {
  const auto w = bon_witness(need_seq(s), num(require(p, "R"), "R"));
  r.set("found", w.has_value());
  if (w) {
    r.set("index", ival(w->index));
    r.set("product_value", w->product_value);
    r.set("points_in_window", ival(w->points_in_window));
    r.set("half_count", ival(w->half_count));
    r.set("bound", std::ldexp(1.0, 1 - static_cast<int>(w->half_count)));
  }
}

void op_fit_growth(const json&, State& s, Report& r) {
  const auto g = fit_growth(need_seq(s));
  r.set("ratio", g.ratio);
  r.set("constant", g.constant);
}

void op_jacobi(const json& p, State&, Report& r) {
  const std::size_t N = count_of(p, "size");
  std::vector<double> d, e;
  if (p.contains("q")) {
    d.assign(N, num_or(p, "shift", 0.0));
    e = q_oscillator_offdiag(num(p.at("q"), "q"), N > 0 ? N - 1 : 0);
  } else {
    d = reals(require(p, "diag"), "diag");
    e = reals(require(p, "offdiag"), "offdiag");
  }
  const SpectrumSequence seq = jacobi_truncated_eigenvalues(d, e, N);
  r.set("count", ival(seq.size()));
  add_sequence_table(r, "eigenvalues", seq);
}

void op_convolution(const json& p, State&, Report& r) {
  json g = p;
  g["type"] = "convolution_symbol";
  const SpectrumSequence seq = make_sequence(g);
  r.set("count", ival(seq.size()));
  add_sequence_table(r, "values", seq);
}

void op_moment_sum(const json& p, State& s, Report& r) {
  const RankOneData& d = need_data(s);
  const int k = p.at("k").get<int>();
  const auto m = moment_sum(d, k, count_or(p, "n_trunc", d.size()), num_or(p, "tol", kMomentTol) * s.tol_scale);
  r.set("k", static_cast<std::int64_t>(m.k));
  r.set("partial_re", m.partial_sum.real());
  r.set("partial_im", m.partial_sum.imag());
  r.set("abs_partial_sum", m.abs_partial_sum);
  r.set("converges_absolutely", m.converges_absolutely);
  r.set("satisfied", m.satisfied);
}

void op_moments(const json& p, State& s, Report& r) {
  const auto c = moment_equalities_check(need_data(s), static_cast<int>(count_of(p, "k_max")),
                                         num_or(p, "tol", kMomentTol) * s.tol_scale);
  r.set("first_failing_convergent", c.first_failing_convergent ? Value{static_cast<std::int64_t>(*c.first_failing_convergent)} : Value{});
  bool all = true;
  Table& t = r.table("moments", {"k", "target_re", "target_im", "partial_re", "partial_im", "abs_partial_sum",
                                 "converges_absolutely", "satisfied"});
  for (const auto& m : c.reports) {
    all = all && m.satisfied;
    t.add_row({Value{static_cast<std::int64_t>(m.k)}, cval(m.target.real()), cval(m.target.imag()),
               cval(m.partial_sum.real()), cval(m.partial_sum.imag()), cval(m.abs_partial_sum),
               m.converges_absolutely, m.satisfied});
  }
  r.set("all_satisfied", all);
}

void op_kernel_chain(const json& p, State& s, Report& r) {
  const RankOneData& d = need_data(s);
  const auto L = build_truncated_matrix(d, count_or(p, "N", d.size()));
  const auto kc = kernel_chain_dims(L, count_of(p, "j_max"), num_or(p, "tol", kChainRankTol) * s.tol_scale);
  r.set("precision_warning", kc.precision_warning);
  Table& t = r.table("chain", {"j", "dim"});
  for (std::size_t j = 0; j < kc.dims.size(); ++j) t.add_row({ival(j + 1), ival(kc.dims[j])});
}

void op_singular_to_bounded(const json&, State& s, Report& r) {
  const RankOneData b = singular_to_bounded(need_data(s));
  const auto w = b.weights();
  r.set("kappa_re", b.kappa().real());
  r.set("kappa_im", b.kappa().imag());
  Table& t = r.table("bounded", {"index", "t_re", "t_im", "w_re", "w_im"});
  for (std::size_t n = 0; n < b.size(); ++n)
    t.add_row({ival(n), cval(b.spectrum()[n].real()), cval(b.spectrum()[n].imag()), cval(w[n].real()), cval(w[n].imag())});
}

void op_degeneracy(const json& p, State& s, Report& r) {
  const auto d = degeneracy_check(need_data(s), num_or(p, "tol", 1e-14));
  r.set("verdict", std::string(d == Degeneracy::degenerate ? "degenerate" : "nondegenerate"));
}

void zero_tables(Report& r, const ZeroSet& zs) {
  r.set("count", ival(zs.zeros.size()));
  r.set("winding_total", static_cast<std::int64_t>(zs.winding_total));
  r.set("poles_enclosed", static_cast<std::int64_t>(zs.poles_enclosed));
  r.set("boundary_tail_bound", zs.boundary_tail_bound);
  r.set("contour_points", ival(zs.contour_points));
  Table& t = r.table("zeros", {"index", "re", "im", "modulus", "multiplicity", "residual"});
  for (std::size_t i = 0; i < zs.zeros.size(); ++i)
    t.add_row({ival(i), cval(zs.zeros[i].real()), cval(zs.zeros[i].imag()), cval(std::abs(zs.zeros[i])),
               Value{static_cast<std::int64_t>(zs.multiplicities[i])}, cval(zs.polish_residuals[i])});
}

ZeroSet zeros_for(const json& p, const State& s) {
  const MeromorphicSum f = beta_source(p, s);
  return beta_zeros(f, Annulus{num(require(p, "r_in"), "r_in"), num(require(p, "r_out"), "r_out")},
                    num_or(p, "tol", 1e-10) * s.tol_scale);
}

void op_beta_zeros(const json& p, State& s, Report& r) { zero_tables(r, zeros_for(p, s)); }

void op_spectrum_from_beta(const json& p, State& s, Report& r) {
  const ZeroSet zs = zeros_for(p, s);
  zero_tables(r, zs);
  add_sequence_table(r, "spectrum", spectrum_from_beta(zs));
}

void op_beta_eval(const json& p, State& s, Report& r) {
  const MeromorphicSum f = beta_source(p, s);
  Table& t = r.table("values", {"z_re", "z_im", "re", "im", "tail_bound"});
  for (const Complex& z : complexes(require(p, "points"), "points")) {
    const auto v = beta_eval(f, z);
    t.add_row({cval(z.real()), cval(z.imag()), cval(v.value.real()), cval(v.value.imag()), cval(v.tail_bound)});
  }
}

void op_psi_eval(const json& p, State&, Report& r) {
  const std::size_t nf = count_or(p, "n_factors", dyadic::kDefaultFactors);
  Table& t = r.table("psi", {"z_re", "z_im", "re", "im", "modulus", "relative_tail_bound"});
  std::vector<Complex> pts;
  if (p.contains("points")) pts = complexes(p.at("points"), "points");
  if (p.contains("circle_radii")) {
    const std::size_t m = count_or(p, "circle_samples", 64);
    double best_k = 0.0;
    Table& c = r.table("circle_max", {"r", "max_modulus"});
    for (double rad : grid(p.at("circle_radii"), "circle_radii")) {
      double mx = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        mx = std::max(mx, std::abs(dyadic::psi_eval(std::polar(rad, 2.0 * kPi * (k + 0.5) / m), nf).value));
      c.add_row({cval(rad), cval(mx)});
      best_k = std::max(best_k, mx * rad);
    }
    r.set("max_r_times_modulus", best_k);
  }
  for (const Complex& z : pts) {
    const auto v = dyadic::psi_eval(z, nf);
    t.add_row({cval(z.real()), cval(z.imag()), cval(v.value.real()), cval(v.value.imag()), cval(std::abs(v.value)),
               cval(v.relative_tail_bound)});
  }
}

void op_psi_residues(const json& p, State&, Report& r) {
  const std::size_t count = count_or(p, "count", 20);
  const auto c = dyadic::psi_residues(count, count_or(p, "n_factors", dyadic::kDefaultFactors));
  CompensatedSum<Complex> m1;
  Table& t = r.table("residues", {"n", "t_re", "t_im", "c_re", "c_im"});
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double tn = std::ldexp(1.0, static_cast<int>(k + 1));
    m1.add(c[k] / tn);
    t.add_row({ival(k + 1), cval(tn), cval(0.0), cval(c[k].real()), cval(c[k].imag())});
  }
  r.set("sum_c_over_t_re", m1.value().real());
  r.set("sum_c_over_t_im", m1.value().imag());
  r.set("residue_bound", dyadic::residue_bound());
}

void op_resolvent(const json& p, State& s, Report& r) {
  const auto pr = resolvent_norm_probe(need_seq(s), num(require(p, "delta"), "delta"), grid(require(p, "radii"), "radii"),
                                       num_or(p, "tol", 1.0));
  r.set("kept_fraction", pr.kept_fraction ? Value{*pr.kept_fraction} : Value{});
  Table& t = r.table("radii", {"r", "sup", "kept"});
  for (std::size_t i = 0; i < pr.radii.size(); ++i) t.add_row({cval(pr.radii[i]), cval(pr.sup_values[i]), Value{bool(pr.kept[i])}});
  Table& b = r.table("blocks", {"block", "total", "kept", "fraction"});
  for (const auto& x : pr.blocks)
    b.add_row({Value{static_cast<std::int64_t>(x.block)}, ival(x.total), ival(x.kept), cval(x.fraction())});
  if (!pr.blocks.empty()) r.set("last_block_fraction", pr.blocks.back().fraction());
}

void op_limst(const json& p, State& s, Report& r) {
  const MeromorphicSum f = beta_source(p, s);
  std::optional<double> tau;
  if (p.contains("tau")) tau = num(p.at("tau"), "tau");
  const auto pr = limst_probe(f, static_cast<int>(count_of(p, "s")), grid(require(p, "radii"), "radii"), tau,
                              count_or(p, "circle_samples", kLimstCircleSamples));
  r.set("tau", pr.tau);
  Table& t = r.table("rows", {"r", "value", "kept"});
  for (const auto& x : pr.rows) t.add_row({cval(x.r), x.kept ? cval(x.value) : Value{}, x.kept});
  Table& b = r.table("blocks", {"block", "max_value", "kept"});
  for (const auto& x : pr.blocks) b.add_row({Value{static_cast<std::int64_t>(x.block)}, cval(x.max_value), ival(x.kept)});
  if (pr.blocks.size() >= 2) r.set("first_over_last", pr.blocks.front().max_value / pr.blocks.back().max_value);
  if (!pr.blocks.empty()) r.set("last_block_max", pr.blocks.back().max_value);
}

void op_sector(const json& p, State& s, Report& r) {
  const MeromorphicSum f = beta_source(p, s);
  std::vector<Annulus> ann;
  for (const auto& a : require(p, "annuli")) ann.push_back({num(a.at(0), "r_in"), num(a.at(1), "r_out")});
  const auto rep = sector_localization_check(f, reals(require(p, "rays"), "rays"), num(require(p, "eps"), "eps"), ann,
                                             num_or(p, "tol", 1e-10) * s.tol_scale);
  r.set("zeros", ival(rep.zeros.size()));
  r.set("outliers", ival(rep.outliers.size()));
  Table& t = r.table("outliers", {"re", "im", "arg_distance"});
  for (const auto& o : rep.outliers) t.add_row({cval(o.zero.real()), cval(o.zero.imag()), cval(o.arg_distance)});
}

void op_polya(const json& p, State&, Report& r) {
  PeakInput in{reals(require(p, "p"), "p"), reals(require(p, "alpha"), "alpha")};
  const auto rep = polya_peaks(in);
  r.set("peaks", ival(rep.peak_indices.size()));
  r.set("p_max_growing", rep.p_max_growing);
  r.set("q_tail_shrinking", rep.q_tail_shrinking);
  Table& t = r.table("peaks", {"index", "p", "q"});
  for (std::size_t i = 0; i < rep.peak_indices.size(); ++i)
    t.add_row({ival(rep.peak_indices[i]), cval(rep.p_at_peaks[i]), cval(rep.q_at_peaks[i])});
}

void op_divided_interval(const json& p, State&, Report& r) {
  const auto w = divided_interval<double>(num(require(p, "a"), "a"), num(require(p, "b"), "b"),
                                          reals(require(p, "samples"), "samples"),
                                          static_cast<int>(count_of(p, "r")), num(require(p, "eps"), "eps"));
  r.set("c", w.c);
  r.set("d", w.d);
  r.set("min_abs_value", w.min_abs_value);
  r.set("bound", w.bound);
  r.set("leaf", ival(w.leaf));
}

void op_lower_bound(const json& p, State& s, Report& r) {
  LowerBoundParams lp;
  if (p.contains("u")) lp.u = num(p.at("u"), "u");
  lp.grid_per_leaf = count_or(p, "grid_per_leaf", lp.grid_per_leaf);
  const auto pr = lacunary_lower_bound_probe(beta_source(p, s), lp);
  r.set("gamma", pr.gamma);
  r.set("g", pr.g);
  r.set("u", pr.u);
  r.set("eps", pr.eps);
  r.set("precondition_met", pr.precondition_met);
  r.set("conclusive", pr.conclusive);
  r.set("floor_holds", pr.floor_holds);
  Table& t = r.table("rings", {"peak", "ring_lo", "ring_hi", "eps_fd", "bound", "sub_lo", "sub_hi", "observed_min", "witness_found"});
  for (const auto& x : pr.rows)
    t.add_row({ival(x.peak), cval(x.ring_lo), cval(x.ring_hi), cval(x.eps_fd), cval(x.bound), cval(x.sub_lo),
               cval(x.sub_hi), cval(x.observed_min), x.witness_found});
}

CounterexampleOptions ce_options(const json& p) {
  CounterexampleOptions o;
  o.max_blocks = count_or(p, "max_blocks", o.max_blocks);
  o.anchor_growth = num_or(p, "anchor_growth", o.anchor_growth);
  o.allow_tilde = p.value("allow_tilde", o.allow_tilde);
  const std::string rule = p.value("sandwich", std::string("plain"));
  if (rule == "geometric_budget") o.sandwich = SandwichRule::geometric_budget;
  else if (rule != "plain") throw SchemaError("sandwich must be plain or geometric_budget");
  return o;
}

const CounterexampleBundle& need_bundle(const json& p, State& s) {
  if (!s.bundle) s.bundle = build_counterexample(need_seq(s), ce_options(p));
  return *s.bundle;
}

void op_greedy_block(const json& p, State& s, Report& r) {
  const SpectrumSequence& seq = need_seq(s);
  const auto gb = greedy_block(seq, count_of(p, "anchor"), CanonicalProduct{});
  const auto rem = removal_log_sums(seq, gb.indices, CanonicalProduct{});
  bool minimal = true;
  for (double x : rem) minimal = minimal && !(x > kLowerSumMargin);
  r.set("size", ival(gb.indices.size()));
  r.set("octave_size", ival(gb.octave_size));
  r.set("lower_sum", std::exp(gb.log_lower_sum));
  r.set("minimal", minimal);
  Table& t = r.table("block", {"index", "t", "sum_after_removal"});
  for (std::size_t i = 0; i < gb.indices.size(); ++i)
    t.add_row({ival(gb.indices[i]), cval(seq[gb.indices[i]].real()), cval(std::exp(rem[i]))});
}

void op_build_counterexample(const json& p, State& s, Report& r) {
  s.bundle = build_counterexample(need_seq(s), ce_options(p));
  const auto& b = *s.bundle;
  r.set("blocks", ival(b.blocks.size()));
  r.set("used_tilde", b.used_tilde);
  r.set("kappa", b.kappa);
  r.set("zeros", ival(b.S.degree()));
  r.set("anchors_examined", ival(b.anchors_examined));
  r.set("s1_total", b.s1_trace.empty() ? 0.0 : b.s1_trace.back());
  r.set("s2_total", b.s2_trace.empty() ? 0.0 : b.s2_trace.back());
  Table& t = r.table("blocks", {"block", "anchor", "anchor_t", "size", "octave_size", "lower_sum", "weighted_sum",
                                "sandwich_min", "sandwich_max"});
  for (std::size_t k = 0; k < b.blocks.size(); ++k) {
    const auto& x = b.blocks[k];
    t.add_row({ival(k), ival(x.anchor), cval(need_seq(s)[x.anchor].real()), ival(x.indices.size()), ival(x.octave_size),
               cval(std::exp(x.log_lower_sum)), cval(x.weighted_sum), cval(b.sandwich_min[k]), cval(b.sandwich_max[k])});
  }
  Table& z = r.table("data", {"index", "t", "c", "a", "b"});
  for (std::size_t i = 0; i < b.S.degree(); ++i)
    z.add_row({ival(b.zero_indices[i]), cval(b.S.zeros()[i]), cval(b.residues[i]), cval(b.a[i]), cval(b.b[i])});
}

void op_verify_sums(const json& p, State& s, Report& r) {
  const auto v = verify_sums(need_bundle(p, s));
  r.set("insufficient_blocks", v.insufficient_blocks);
  r.set("s1_diverges_proxy", v.s1_diverges_proxy);
  r.set("s2_converges_proxy", v.s2_converges_proxy);
  r.set("weighted_sum_uniform", v.weighted_sum_uniform);
  r.set("dominating_constant", v.dominating_constant);
  r.set("s1_total", v.s1_trace.empty() ? 0.0 : v.s1_trace.back());
  Table& t = r.table("traces", {"block", "s1", "s2", "s1_increment", "s2_increment", "dominating"});
  for (std::size_t k = 0; k < v.s1_trace.size(); ++k)
    t.add_row({ival(k), cval(v.s1_trace[k]), cval(v.s2_trace[k]), cval(v.s1_increments[k]), cval(v.s2_increments[k]),
               k < v.dominating.size() ? cval(v.dominating[k]) : Value{}});
}

std::vector<Complex> default_samples(const CanonicalProduct& S, std::size_t count, std::uint64_t seed, bool random) {
  const double top = S.zeros().empty() ? 10.0 : *std::max_element(S.zeros().begin(), S.zeros().end());
  std::vector<Complex> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k = 0; k < count; ++k) {
    const double f = random ? u(rng) : (k + 0.5) / static_cast<double>(count);
    const double ang = random ? 2.0 * kPi * u(rng) : 2.0 * kPi * 0.6180339887498949 * static_cast<double>(k + 1);
    out.push_back(std::polar(std::exp(f * std::log(2.0 * top)), ang));
  }
  return out;
}

void op_interpolation(const json& p, State& s, Report& r) {
  const auto& b = need_bundle(p, s);
  std::vector<Complex> zs = p.contains("samples")
                                ? complexes(p.at("samples"), "samples")
                                : default_samples(b.S, count_or(p, "count", 20), s.seed, p.value("random", false));
  const auto ic = interpolation_residual(b.S, zs);
  r.set("max_residual", ic.max_residual);
  Table& t = r.table("samples", {"re", "im", "residual", "rejected"});
  for (std::size_t i = 0; i < zs.size(); ++i)
    t.add_row({cval(zs[i].real()), cval(zs[i].imag()), ic.rejected[i] ? Value{} : cval(ic.residuals[i]), bool(ic.rejected[i])});
}

void op_defect(const json& p, State& s, Report& r) {
  const auto& b = need_bundle(p, s);
  const SpectrumSequence& seq = need_seq(s);
  const std::size_t lo = count_or(p, "lo", 0), hi = count_or(p, "hi", seq.size());
  const std::vector<double> extra = p.contains("extra_points") ? reals(p.at("extra_points"), "extra_points") : std::vector<double>{};
  const auto d = defect_rank(b, seq, lo, hi, num_or(p, "tol", kDefectTol) * s.tol_scale, extra);
  r.set("dimension", ival(d.dimension));
  r.set("kernels", ival(d.kernels));
  r.set("numerical_rank", ival(d.numerical_rank));
  r.set("deficiency", ival(d.deficiency));
  r.set("removed", ival(d.removed));
  r.set("deficiency_matches", d.deficiency == d.removed - std::min(d.removed, extra.size()));
  r.set("condition_estimate", d.condition_estimate);
  r.set("precision_warning", d.precision_warning);
}

const std::map<std::string, OpFn>& registry() {
  static const std::map<std::string, OpFn> ops = {
      {"check_lacunary", op_check_lacunary},
      {"counting_function", op_counting_function},
      {"log2_density_test", op_log2_density},
      {"sparseness_product", op_sparseness},
      {"bon_witness", op_bon_witness},
      {"fit_growth", op_fit_growth},
      {"jacobi_truncated_eigenvalues", op_jacobi},
      {"convolution_symbol_sequence", op_convolution},
      {"moment_sum", op_moment_sum},
      {"moment_equalities_check", op_moments},
      {"kernel_chain_dims", op_kernel_chain},
      {"singular_to_bounded", op_singular_to_bounded},
      {"degeneracy_check", op_degeneracy},
      {"beta_eval", op_beta_eval},
      {"beta_zeros", op_beta_zeros},
      {"spectrum_from_beta", op_spectrum_from_beta},
      {"psi_eval", op_psi_eval},
      {"psi_residues", op_psi_residues},
      {"resolvent_norm_probe", op_resolvent},
      {"limst_probe", op_limst},
      {"sector_localization_check", op_sector},
      {"polya_peaks", op_polya},
      {"divided_interval", op_divided_interval},
      {"lacunary_lower_bound_probe", op_lower_bound},
      {"greedy_block", op_greedy_block},
      {"build_counterexample", op_build_counterexample},
      {"verify_sums", op_verify_sums},
      {"interpolation_residual", op_interpolation},
      {"defect_rank", op_defect},
  };
  return ops;
}

// ---- assertions ---------------------------------------------------------------

std::string describe(const Value& v) {
  return to_json_text(v);
}

std::optional<double> as_number(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::nullopt;
}

Value lookup(const Report& r, const std::string& field) {
  if (field.rfind("rows:", 0) == 0) {
    for (const auto& t : r.tables)
      if (t.name == field.substr(5)) return ival(t.rows.size());
    throw SchemaError("no table '" + field.substr(5) + "'");
  }
  if (const Value* v = r.find(field)) return *v;
  throw SchemaError("no field '" + field + "' in " + r.command + " report");
}

std::vector<std::string> check(const json& expect, const Report& r) {
  std::vector<std::string> failed;
  if (!expect.is_array()) throw SchemaError("'expect' must be an array");
  for (const auto& e : expect) {
    const std::string field = require(e, "field").get<std::string>();
    const Value v = lookup(r, field);
    if (e.contains("equals")) {
      const json& want = e.at("equals");
      bool ok;
      if (want.is_boolean()) ok = std::holds_alternative<bool>(v) && std::get<bool>(v) == want.get<bool>();
      else if (want.is_string()) ok = std::holds_alternative<std::string>(v) && std::get<std::string>(v) == want.get<std::string>();
      else if (want.is_null()) ok = std::holds_alternative<std::monostate>(v);
      else ok = as_number(v) && *as_number(v) == want.get<double>();
      if (!ok) failed.push_back(field + " = " + describe(v) + ", expected " + want.dump());
    }
    if (e.contains("min") || e.contains("max")) {
      const auto x = as_number(v);
      if (!x) {
        failed.push_back(field + " is not numeric");
        continue;
      }
      if (e.contains("min") && !(*x >= num(e.at("min"), "min")))
        failed.push_back(field + " = " + describe(v) + " below " + e.at("min").dump());
      if (e.contains("max") && !(*x <= num(e.at("max"), "max")))
        failed.push_back(field + " = " + describe(v) + " above " + e.at("max").dump());
    }
  }
  return failed;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const InsufficientSparseness*>(&e)) return "insufficient_sparseness";
  if (dynamic_cast<const AnchorUnsuitable*>(&e)) return "anchor_unsuitable";
  if (dynamic_cast<const SearchFailure*>(&e)) return "search_failure";
  if (dynamic_cast<const PoleError*>(&e)) return "pole";
  if (dynamic_cast<const ContourError*>(&e)) return "contour";
  if (dynamic_cast<const UnsupportedInput*>(&e)) return "unsupported_input";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  return "error";
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

}  // namespace

const std::vector<std::string>& scenario_operations() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, f] : registry()) v.push_back(k);
    return v;
  }();
  return names;
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunResult run_scenario_text(const std::string& json_text, const RunOptions& opt) {
  RunResult res;
  res.scenario_hash = content_hash(json_text);
  json sc;
  std::filesystem::path out_dir;
  std::vector<json> commands;
  try {
    sc = json::parse(json_text);
    if (!sc.is_object()) throw SchemaError("scenario must be a JSON object");
    res.scenario_name = require(sc, "name").get<std::string>();
    const json& cmds = require(sc, "commands");
    if (!cmds.is_array()) throw SchemaError("'commands' must be an array");
    for (const auto& c : cmds) {
      const std::string op = require(c, "op").get<std::string>();
      if (!registry().count(op)) throw SchemaError("unknown operation '" + op + "'");
      if (c.contains("params") && !c.at("params").is_object()) throw SchemaError("'params' must be an object");
      const std::string fmt = c.value("format", std::string("json"));
      if (fmt != "json" && fmt != "csv") throw SchemaError("format must be json or csv");
      if (c.contains("expect") && !c.at("expect").is_array()) throw SchemaError("'expect' must be an array");
      commands.push_back(c);
    }
    out_dir = opt.out_dir ? *opt.out_dir : std::filesystem::path(sc.value("output_dir", "out/" + sanitize(res.scenario_name)));
  } catch (const std::exception& e) {
    res.exit_code = 2;
    res.diagnostics.push_back(std::string("schema: ") + e.what());
    return res;
  }

  if (opt.threads > 0) omp_set_num_threads(opt.threads);
  State st;
  st.tol_scale = opt.tol_scale;
  st.seed = opt.seed;
  try {
    if (sc.contains("generator")) st.seq = make_sequence(sc.at("generator"));
    if (sc.contains("perturbation")) st.data = make_data(sc.at("perturbation"), need_seq(st));
  } catch (const SchemaError& e) {
    res.exit_code = 2;
    res.diagnostics.push_back(std::string("schema: ") + e.what());
    return res;
  } catch (const nlohmann::json::exception& e) {
    res.exit_code = 2;
    res.diagnostics.push_back(std::string("schema: ") + e.what());
    return res;
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.diagnostics.push_back(std::string("setup: ") + e.what());
    return res;
  }

  bool all_ok = true;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const json& c = commands[i];
    CommandOutcome oc;
    oc.op = c.at("op").get<std::string>();
    Report rep;
    rep.command = oc.op;
    const json params = c.value("params", json::object());
    const auto t0 = std::chrono::steady_clock::now();
    try {
      try {
        registry().at(oc.op)(params, st, rep);
        if (c.contains("expect_error")) oc.failed_checks.push_back("expected error " + c.at("expect_error").dump());
      } catch (const SchemaError&) {
        throw;
      } catch (const nlohmann::json::exception&) {
        throw;
      } catch (const std::exception& e) {
        rep.set("error_kind", error_kind(e));
        rep.set("error", std::string(e.what()));
        if (!c.contains("expect_error")) throw;
        const std::string want = c.at("expect_error").get<std::string>();
        if (want != error_kind(e)) oc.failed_checks.push_back("error " + error_kind(e) + ", expected " + want);
      }
      if (c.contains("expect")) {
        auto f = check(c.at("expect"), rep);
        oc.failed_checks.insert(oc.failed_checks.end(), f.begin(), f.end());
      }
      oc.ok = oc.failed_checks.empty();
    } catch (const SchemaError& e) {
      res.exit_code = 2;
      oc.error = std::string("schema: ") + e.what();
    } catch (const nlohmann::json::exception& e) {
      res.exit_code = 2;
      oc.error = std::string("schema: ") + e.what();
    } catch (const std::exception& e) {
      oc.error = error_kind(e) + ": " + e.what();
    }
    oc.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char stem[32];
    std::snprintf(stem, sizeof stem, "%02zu_", i);
    const ReportFormat fmt = c.value("format", std::string("json")) == "csv" ? ReportFormat::csv : ReportFormat::json;
    if (opt.write_files) {
      try {
        oc.artifact = emit_report(rep, out_dir, stem + oc.op, fmt).filename().string();
      } catch (const IoError& e) {
        oc.ok = false;
        oc.error = e.what();
      }
    }
    for (const auto& f : oc.failed_checks) res.diagnostics.push_back(oc.op + ": " + f);
    if (!oc.error.empty()) res.diagnostics.push_back(oc.op + ": " + oc.error);
    all_ok = all_ok && oc.ok;
    res.reports.push_back(std::move(rep));
    res.outcomes.push_back(std::move(oc));
    if (res.exit_code == 2) break;
  }
  if (res.exit_code == 0 && !all_ok) res.exit_code = 1;

  if (opt.write_files) {
    json m = json::object();
    m["tool_version"] = kToolVersion;
    m["scenario"] = res.scenario_name;
    m["scenario_hash"] = res.scenario_hash;
    m["threads"] = opt.threads;
    m["tol_scale"] = opt.tol_scale;
    m["seed"] = opt.seed;
    m["exit_code"] = res.exit_code;
    json arr = json::array();
    for (std::size_t i = 0; i < res.outcomes.size(); ++i) {
      const auto& o = res.outcomes[i];
      arr.push_back({{"index", i}, {"op", o.op}, {"artifact", o.artifact}, {"ok", o.ok}, {"error", o.error},
                     {"failed_checks", o.failed_checks}, {"wall_seconds", o.wall_seconds}});
    }
    m["commands"] = arr;
    try {
      write_text(out_dir / "manifest.json", m.dump(2) + "\n");
    } catch (const IoError& e) {
      res.diagnostics.push_back(e.what());
      if (res.exit_code == 0) res.exit_code = 1;
    }
  }
  return res;
}

RunResult run_scenario(const std::filesystem::path& config, const RunOptions& opt) {
  std::ifstream f(config, std::ios::binary);
  if (!f) {
    RunResult r;
    r.exit_code = 2;
    r.diagnostics.push_back("cannot read " + config.string());
    return r;
  }
  std::ostringstream os;
  os << f.rdbuf();
  return run_scenario_text(os.str(), opt);
}

}  // namespace rankone
