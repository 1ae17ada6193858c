#include "qdlab/sjcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qdlab/error.hpp"
#include "qdlab/parallel.hpp"

namespace qdlab::sjcm {

namespace {

constexpr double kCoeffTol = 1e-12;
constexpr double kDivisionGuard = 1e-12;
constexpr double kUndefinedN = 1e-6;

// Accept rounding noise at the domain boundary, reject anything larger.
ConfigCoeffs checked(ConfigCoeffs c, const std::string& context) {
  std::vector<std::string> bad;
  auto check = [&](double& v, const char* name) {
    if (v < -kCoeffTol || v > 1.0 + kCoeffTol || !std::isfinite(v)) {
      std::ostringstream s;
      s << name << " = " << v;
      bad.push_back(s.str());
    }
    v = std::clamp(v, 0.0, 1.0);
  };
  check(c.G, "c_G");
  check(c.Xs, "c_Xs");
  check(c.plus, "c_plus");
  check(c.minus, "c_minus");
  if (!bad.empty()) {
    std::string msg = context + ": configuration coefficients outside [0, 1]:";
    for (const auto& b : bad) msg += " " + b;
    throw Error(msg);
  }
  return c;
}

}  // namespace

void Params::validate() const {
  if (!(g > 0.0)) throw Error("sjcm: g must be positive");
  if (n_max && *n_max < 1) throw Error("sjcm: n_max must be >= 1");
}

ConfigCoeffs config_coeffs_from_OCI(const OCI& oci) {
  ConfigCoeffs c;
  c.G = 0.5 * (oci.O - oci.I);
  c.Xs = 0.5 * (oci.O + oci.I);
  c.minus = 0.5 * (1.0 - oci.O - oci.C);
  c.plus = 1.0 - c.G - c.Xs - c.minus;
  std::ostringstream ctx;
  ctx << "(O, C, I) = (" << oci.O << ", " << oci.C << ", " << oci.I << ")";
  return checked(c, ctx.str());
}

OCI oci_from_coeffs(const ConfigCoeffs& c) { return {c.G + c.Xs, c.plus - c.minus, c.Xs - c.G}; }

ConfigCoeffs config_coeffs_from_occupations(const Occupations& occ) {
  ConfigCoeffs c;
  c.Xs = occ.f_e * occ.f_h + occ.delta;
  c.minus = occ.f_e - c.Xs;
  c.plus = occ.f_h - c.Xs;
  c.G = 1.0 - c.Xs - c.minus - c.plus;
  std::ostringstream ctx;
  ctx << "(f_e, f_h, delta) = (" << occ.f_e << ", " << occ.f_h << ", " << occ.delta << "); delta must lie in ["
      << -occ.f_e * occ.f_h << ", " << std::min(occ.f_e, occ.f_h) - occ.f_e * occ.f_h << "]";
  return checked(c, ctx.str());
}

ConfigCoeffs QdInitSpec::coefficients() const {
  if (photon_dist.empty()) throw Error("init spec: photon distribution is empty");
  double sum = 0.0;
  for (double p : photon_dist) {
    if (!(p >= 0.0)) throw Error("init spec: photon probabilities must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("init spec: photon distribution sums to " + std::to_string(sum));
  return std::visit(
      [](const auto& q) {
        if constexpr (std::is_same_v<std::decay_t<decltype(q)>, OCI>) {
          return config_coeffs_from_OCI(q);
        } else {
          return config_coeffs_from_occupations(q);
        }
      },
      qd);
}

int QdInitSpec::max_photon() const {
  for (std::size_t n = photon_dist.size(); n-- > 0;) {
    if (photon_dist[n] > 0.0) return static_cast<int>(n);
  }
  throw Error("init spec: photon distribution has no support");
}

int resolve_n_max(const QdInitSpec& spec, const Params& params) {
  params.validate();
  const int needed = spec.max_photon() + 1;
  if (!params.n_max) return needed;
  if (*params.n_max < needed) {
    throw Error("sjcm: n_max = " + std::to_string(*params.n_max) + " is below the required " +
                std::to_string(needed) + " (largest initial photon number + 1)");
  }
  return *params.n_max;
}

double HierarchyState::correlated(std::size_t n) const {
  if (closure == Closure::exact) return c_x[n];
  return p[n] > kDivisionGuard ? f_e[n] * f_h[n] / p[n] : 0.0;
}

State HierarchyState::pack() const {
  State y;
  y.reserve(5 * p.size());
  for (const auto* arr : {&p, &f_e, &f_h, &psi, &c_x}) y.insert(y.end(), arr->begin(), arr->end());
  return y;
}

HierarchyState HierarchyState::unpack(const State& y, int n_max, Closure closure) {
  const auto m = static_cast<std::size_t>(n_max) + 1;
  if (y.size() != 5 * m) throw Error("sjcm: packed state has the wrong size");
  HierarchyState s;
  s.closure = closure;
  auto slice = [&](std::size_t k) {
    return std::vector<double>(y.begin() + static_cast<long>(k * m), y.begin() + static_cast<long>((k + 1) * m));
  };
  s.p = slice(0);
  s.f_e = slice(1);
  s.f_h = slice(2);
  s.psi = slice(3);
  s.c_x = slice(4);
  return s;
}

HierarchyState hierarchy_init(const QdInitSpec& spec, Closure closure, int n_max) {
  const auto c = spec.coefficients();
  if (spec.max_photon() + 1 > n_max) throw Error("sjcm: n_max too small for the initial photon distribution");
  const auto m = static_cast<std::size_t>(n_max) + 1;
  HierarchyState s;
  s.closure = closure;
  s.p.assign(m, 0.0);
  std::copy(spec.photon_dist.begin(), spec.photon_dist.begin() + static_cast<long>(std::min(m, spec.photon_dist.size())),
            s.p.begin());
  s.f_e.resize(m);
  s.f_h.resize(m);
  s.psi.assign(m, 0.0);
  s.c_x.resize(m);
  const double fe = c.f_e();
  const double fh = c.f_h();
  for (std::size_t n = 0; n < m; ++n) {
    s.f_e[n] = s.p[n] * fe;
    s.f_h[n] = s.p[n] * fh;
    s.c_x[n] = s.p[n] * c.Xs;  // p_n (f_e f_h + delta)
  }
  return s;
}

HierarchyState hierarchy_rhs(const HierarchyState& s, const Params& params) {
  const double g = params.g;
  const std::size_t m = s.p.size();
  HierarchyState d;
  d.closure = s.closure;
  d.p.assign(m, 0.0);
  d.f_e.assign(m, 0.0);
  d.f_h.assign(m, 0.0);
  d.psi.assign(m, 0.0);
  d.c_x.assign(m, 0.0);
  for (std::size_t n = 0; n < m; ++n) {
    const double up = std::sqrt(static_cast<double>(n + 1));
    const double down = std::sqrt(static_cast<double>(n));
    const double emit = 2.0 * g * up * s.psi[n];
    d.f_e[n] = emit;
    d.f_h[n] = emit;
    d.p[n] = emit - (n > 0 ? 2.0 * g * down * s.psi[n - 1] : 0.0);
    if (s.closure == Closure::exact) d.c_x[n] = emit;
    // psi_n couples |n, Xs> to |n+1, G>; the top level has no partner.
    if (n + 1 < m) {
      const double ground_above = s.p[n + 1] - s.f_h[n + 1] - s.f_e[n + 1];
      d.psi[n] = g * up * ground_above + g * up * (s.correlated(n + 1) - s.correlated(n));
    }
  }
  return d;
}

Observables observables(const HierarchyState& s) {
  Observables o;
  double second = 0.0;
  double sum_cx = 0.0;
  for (std::size_t n = 0; n < s.p.size(); ++n) {
    const double dn = static_cast<double>(n);
    o.N += dn * s.p[n];
    second += (dn * dn - dn) * s.p[n];
    o.f_e += s.f_e[n];
    o.f_h += s.f_h[n];
    const double cx = s.correlated(n);
    sum_cx += cx;
    const double factorized = s.p[n] > kDivisionGuard ? s.f_e[n] * s.f_h[n] / s.p[n] : 0.0;
    o.delta_resolved += cx - factorized;
  }
  if (o.N > kUndefinedN) o.g2 = second / (o.N * o.N);
  o.C = o.f_h - o.f_e;
  o.delta = sum_cx - o.f_e * o.f_h;
  // P(G) + P(Xs) = (1 - f_e - f_h + C^X) + C^X
  if (s.closure == Closure::exact) o.O = 1.0 - o.f_e - o.f_h + 2.0 * sum_cx;
  return o;
}

const std::vector<std::string>& columns() {
  static const std::vector<std::string> names{"N", "g2", "f_e", "f_h", "C", "delta", "delta_resolved", "O"};
  return names;
}

std::vector<double> observable_row(const Observables& o) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return {o.N, o.g2.value_or(nan), o.f_e, o.f_h, o.C, o.delta, o.delta_resolved, o.O.value_or(nan)};
}

void hierarchy_evolve(const QdInitSpec& spec, const Params& params, Closure closure, const IntegratorConfig& cfg,
                      const StateObserver& observer) {
  const int n_max = resolve_n_max(spec, params);
  const auto init = hierarchy_init(spec, closure, n_max);
  auto rhs = [&](const State& y, State& dydt, double) {
    dydt = hierarchy_rhs(HierarchyState::unpack(y, n_max, closure), params).pack();
  };
  integrate_observed(rhs, init.pack(), cfg,
                     [&](double t, const State& y) { observer(t, HierarchyState::unpack(y, n_max, closure)); });
}

TimeSeries hierarchy_evolve(const QdInitSpec& spec, const Params& params, Closure closure,
                            const IntegratorConfig& cfg) {
  TimeSeries series(columns());
  hierarchy_evolve(spec, params, closure, cfg,
                   [&series](double t, const HierarchyState& s) { series.push_row(t, observable_row(observables(s))); });
  return series;
}

DensityMatrix oracle_initial_state(const QdInitSpec& spec, int n_max) {
  const auto c = spec.coefficients();
  return diagonal_product_state(sjcm_basis(n_max), c.as_vector(), spec.photon_dist);
}

Operator oracle_hamiltonian(const BasisSpec& basis, double g) {
  const Operator emit = transition_operator(basis, "G", "Xs") * photon_annihilator(basis).adjoint();
  return Operator(basis, -g * (emit.elements + emit.elements.adjoint()));
}

HierarchyState oracle_state(const DensityMatrix& rho) {
  const int n_max = rho.basis.n_max();
  const auto m = static_cast<std::size_t>(n_max) + 1;
  HierarchyState s;
  s.closure = Closure::exact;
  s.p.assign(m, 0.0);
  s.f_e.assign(m, 0.0);
  s.f_h.assign(m, 0.0);
  s.psi.assign(m, 0.0);
  s.c_x.assign(m, 0.0);
  for (int n = 0; n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const double g = population(rho, n, "G");
    const double xs = population(rho, n, "Xs");
    const double plus = population(rho, n, "+s");
    const double minus = population(rho, n, "-s");
    s.p[k] = g + xs + plus + minus;
    s.f_e[k] = xs + minus;
    s.f_h[k] = xs + plus;
    s.c_x[k] = xs;
    if (n < n_max) s.psi[k] = coherence(rho, n, "Xs", n + 1, "G").imag();
  }
  return s;
}

OracleRun oracle_evolve(const QdInitSpec& spec, const Params& params, const IntegratorConfig& cfg,
                        const StateObserver& observer) {
  const int n_max = resolve_n_max(spec, params);
  const auto rho0 = oracle_initial_state(spec, n_max);
  const MasterEquation eq(oracle_hamiltonian(rho0.basis, params.g), CollapseSpec::none());
  OracleRun run{TimeSeries(columns()), {}};
  run.health = evolve_density(
      rho0, eq, cfg,
      [&](double t, const DensityMatrix& rho) {
        const auto s = oracle_state(rho);
        run.series.push_row(t, observable_row(observables(s)));
        if (observer) observer(t, s);
      },
      HealthLimits{}, {"Xs"});
  return run;
}

double rabi_period(const Params& params) { return std::numbers::pi / params.g; }

IntegratorConfig sweep_config(const Params& params, double horizon, const IntegratorConfig& base) {
  IntegratorConfig cfg = base;
  cfg.t0 = 0.0;
  cfg.t1 = horizon;
  cfg.sample_every = rabi_period(params) / 200.0;
  return cfg;
}

double g2_max(const QdInitSpec& spec, const Params& params, Engine engine, const IntegratorConfig& cfg) {
  double best = -std::numeric_limits<double>::infinity();
  auto track = [&best](double, const HierarchyState& s) {
    if (const auto g2 = observables(s).g2) best = std::max(best, *g2);
  };
  switch (engine) {
    case Engine::exact:
      hierarchy_evolve(spec, params, Closure::exact, cfg, track);
      break;
    case Engine::hartree_fock:
      hierarchy_evolve(spec, params, Closure::hartree_fock, cfg, track);
      break;
    case Engine::oracle:
      oracle_evolve(spec, params, cfg, track);
      break;
  }
  return best;
}

std::vector<SweepPoint> sweep_g2max(const std::vector<QdInitSpec>& grid, const Params& params, Engine engine,
                                    const IntegratorConfig& cfg, double horizon, unsigned threads) {
  const auto run_cfg = sweep_config(params, horizon, cfg);
  std::vector<SweepPoint> out(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    SweepPoint& pt = out[i];
    try {
      const auto c = grid[i].coefficients();
      const auto oci = oci_from_coeffs(c);
      pt.C = oci.C;
      pt.O = oci.O;
      pt.delta = c.delta();
      const double best = g2_max(grid[i], params, engine, run_cfg);
      if (std::isfinite(best)) pt.g2_max = best;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
  });
  return out;
}

std::vector<QdInitSpec> triangle_grid(double step) {
  const auto k = static_cast<int>(std::lround(1.0 / step));
  if (k <= 0 || std::abs(k * step - 1.0) > 1e-9) throw Error("triangle grid: step must divide 1");
  std::vector<QdInitSpec> grid;
  for (int io = 0; io <= k; ++io) {
    for (int ic = -(k - io); ic <= k - io; ++ic) {
      grid.push_back({OCI{io * step, ic * step, 0.0}, {0.0, 1.0}});
    }
  }
  return grid;
}

std::vector<QdInitSpec> uncorrelated_path(const std::vector<double>& charges) {
  std::vector<QdInitSpec> path;
  path.reserve(charges.size());
  for (double c : charges) path.push_back({Occupations{0.5 * (1.0 - c), 0.5 * (1.0 + c), 0.0}, {0.0, 1.0}});
  return path;
}

}  // namespace qdlab::sjcm
