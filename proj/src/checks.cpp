#include "qdlab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "qdlab/csv.hpp"
#include "qdlab/error.hpp"
#include "qdlab/lindblad.hpp"
#include "qdlab/parallel.hpp"
#include "qdlab/sjcm.hpp"

namespace qdlab::checks {

namespace {

// Units where 2g = 1.
constexpr double kG = 0.5;
constexpr double kGamma = 0.3;
constexpr double kBeta = 0.25;
constexpr int kRandomSpecs = 20;
constexpr std::uint64_t kSeed = 0x5eed'cafe'f00dULL;

IntegratorConfig tight(double t1, double sample_every) {
  IntegratorConfig cfg;
  cfg.method = Method::rk45_adaptive;
  cfg.rtol = 1e-11;
  cfg.atol = 1e-13;
  cfg.t0 = 0.0;
  cfg.t1 = t1;
  cfg.sample_every = sample_every;
  return cfg;
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(4) << std::scientific << x;
  return s.str();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (std::isnan(a[i]) && std::isnan(b[i])) continue;
    const double d = std::abs(a[i] - b[i]);
    if (std::isnan(d)) return std::numeric_limits<double>::infinity();
    m = std::max(m, d);
  }
  return a.size() == b.size() ? m : std::numeric_limits<double>::infinity();
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double max_drift(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v - a.front()));
  return m;
}

std::vector<double> sum_columns(const TimeSeries& s, const std::string& a, const std::string& b) {
  const auto& x = s.column(a);
  const auto& y = s.column(b);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return out;
}

sjcm::QdInitSpec one_photon_spec() { return {sjcm::Occupations{0.3, 0.1, 0.0}, {0.0, 1.0}}; }

// Random valid specs; alternates the (f_e, f_h, delta) and (O, C, I) forms and
// keeps N >= 0.5 so g2 stays well conditioned.
std::vector<sjcm::QdInitSpec> random_specs(int count) {
  std::mt19937_64 rng(kSeed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<sjcm::QdInitSpec> specs;
  while (static_cast<int>(specs.size()) < count) {
    sjcm::ConfigCoeffs c{expo(rng), expo(rng), expo(rng), expo(rng)};
    const double sc = c.G + c.Xs + c.plus + c.minus;
    c = {c.G / sc, c.Xs / sc, c.plus / sc, c.minus / sc};
    std::vector<double> photons{expo(rng), expo(rng), expo(rng)};
    const double sp = photons[0] + photons[1] + photons[2];
    for (double& p : photons) p /= sp;
    if (photons[1] + 2.0 * photons[2] < 0.5) continue;
    if (specs.size() % 2 == 0) {
      specs.push_back({sjcm::Occupations{c.f_e(), c.f_h(), c.delta()}, photons});
    } else {
      specs.push_back({sjcm::oci_from_coeffs(c), photons});
    }
  }
  return specs;
}

std::vector<sjcm::QdInitSpec> equivalence_specs() {
  auto specs = random_specs(kRandomSpecs);
  specs.insert(specs.begin(), one_photon_spec());
  return specs;
}

struct HealthTally {
  double trace = 0.0;
  double hermiticity = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  std::size_t runs = 0;

  void add(const EvolutionHealth& h) {
    trace = std::max(trace, h.max_trace_error);
    hermiticity = std::max(hermiticity, h.max_hermiticity_error);
    min_eigenvalue = std::min(min_eigenvalue, h.min_eigenvalue);
    ++runs;
  }
};

struct Context {
  Options options;
  sjcm::Params params{kG, std::nullopt};
  double horizon = 20.0 * std::numbers::pi / kG;
  HealthTally health;
};

CheckResult oracle_equivalence(Context& ctx) {
  const auto specs = equivalence_specs();
  const auto cfg = tight(ctx.horizon, sjcm::rabi_period(ctx.params) / 50.0);
  double worst_n = 0.0;
  double worst_g2 = 0.0;
  double worst_other = 0.0;
  for (const auto& spec : specs) {
    const auto exact = sjcm::hierarchy_evolve(spec, ctx.params, sjcm::Closure::exact, cfg);
    const auto oracle = sjcm::oracle_evolve(spec, ctx.params, cfg);
    ctx.health.add(oracle.health);
    worst_n = std::max(worst_n, max_abs_diff(exact.column("N"), oracle.series.column("N")));
    worst_g2 = std::max(worst_g2, max_abs_diff(exact.column("g2"), oracle.series.column("g2")));
    for (const char* col : {"f_e", "f_h", "C", "delta", "O"}) {
      worst_other = std::max(worst_other, max_abs_diff(exact.column(col), oracle.series.column(col)));
    }
  }
  const bool ok = worst_n < 1e-8 && worst_g2 < 1e-8;
  return {1, "oracle equivalence (sJCM hierarchy vs density matrix)", ok,
          std::to_string(specs.size()) + " specs, max|dN|=" + fmt(worst_n) + " max|dg2|=" + fmt(worst_g2) +
              " (tol 1e-8); other observables max diff " + fmt(worst_other)};
}

CheckResult hf_pitfall(Context& ctx) {
  const auto cfg = tight(ctx.horizon, sjcm::rabi_period(ctx.params) / 200.0);
  const auto spec = one_photon_spec();
  const auto hf = sjcm::hierarchy_evolve(spec, ctx.params, sjcm::Closure::hartree_fock, cfg);
  const auto exact = sjcm::hierarchy_evolve(spec, ctx.params, sjcm::Closure::exact, cfg);
  const double hf_delta = max_abs(hf.column("delta"));
  const double hf_delta_resolved = max_abs(hf.column("delta_resolved"));
  const double exact_delta = max_abs(exact.column("delta"));
  const double n_dev = max_abs_diff(hf.column("N"), exact.column("N"));
  const bool ok = hf_delta < 1e-10 && exact_delta > 0.01 && n_dev > 0.02;
  return {2, "Hartree-Fock pitfall (delta pinned, N diverges)", ok,
          "HF max|delta|=" + fmt(hf_delta) + " (tol 1e-10), HF max|photon-resolved delta|=" +
              fmt(hf_delta_resolved) + ", exact max|delta|=" + fmt(exact_delta) +
              " (>0.01), max|N_HF-N_exact|=" + fmt(n_dev) + " (>0.02)"};
}

CheckResult conservation(Context& ctx) {
  const auto specs = equivalence_specs();
  const auto cfg = tight(ctx.horizon, sjcm::rabi_period(ctx.params) / 50.0);
  double worst_c = 0.0;
  double worst_ne = 0.0;
  double worst_nh = 0.0;
  std::size_t integrated = 0;
  std::ostringstream aborted;
  auto account = [&](const TimeSeries& s) {
    worst_c = std::max(worst_c, max_drift(s.column("C")));
    worst_ne = std::max(worst_ne, max_drift(sum_columns(s, "N", "f_e")));
    worst_nh = std::max(worst_nh, max_drift(sum_columns(s, "N", "f_h")));
    ++integrated;
  };
  // A trajectory that cannot be integrated to the horizon counts as a failure.
  auto attempt = [&](const char* engine, std::size_t k, auto&& run) {
    try {
      run();
    } catch (const NumericalError& e) {
      aborted << engine << " spec " << k << ": " << e.what() << "; ";
    }
  };
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& spec = specs[k];
    attempt("exact", k, [&] { account(sjcm::hierarchy_evolve(spec, ctx.params, sjcm::Closure::exact, cfg)); });
    attempt("HF", k, [&] { account(sjcm::hierarchy_evolve(spec, ctx.params, sjcm::Closure::hartree_fock, cfg)); });
    attempt("oracle", k, [&] {
      const auto oracle = sjcm::oracle_evolve(spec, ctx.params, cfg);
      ctx.health.add(oracle.health);
      account(oracle.series);
    });
  }
  const std::size_t total = 3 * specs.size();
  const bool ok = integrated == total && worst_c < 1e-10 && worst_ne < 1e-10 && worst_nh < 1e-10;
  std::string detail = std::to_string(integrated) + "/" + std::to_string(total) +
                       " trajectories reached the horizon, max drift C=" + fmt(worst_c) + " N+f_e=" + fmt(worst_ne) +
                       " N+f_h=" + fmt(worst_nh) + " (tol 1e-10)";
  if (integrated != total) detail += "; aborted: " + aborted.str();
  return {3, "conservation of C, N+f_e, N+f_h (all engines)", ok, detail};
}

CheckResult g2_independence(Context& ctx) {
  constexpr int kSteps = 50;  // grid step 0.02
  constexpr double kStep = 1.0 / kSteps;
  std::vector<sjcm::QdInitSpec> grid;
  std::vector<std::pair<int, int>> index;  // (O index, C index)
  for (int io : {10, 25, 40}) {
    for (int ic = -(kSteps - io); ic <= kSteps - io; ++ic) {
      grid.push_back({sjcm::OCI{io * kStep, ic * kStep, 0.0}, {0.0, 1.0}});
      index.emplace_back(io, ic);
    }
  }
  const std::size_t column_start = grid.size();
  for (int io = 0; io <= kSteps; ++io) {
    grid.push_back({sjcm::OCI{io * kStep, 0.0, 0.0}, {0.0, 1.0}});
    index.emplace_back(io, 0);
  }
  const auto rows = sjcm::sweep_g2max(grid, ctx.params, sjcm::Engine::exact, IntegratorConfig{}, ctx.horizon,
                                      ctx.options.threads);
  std::ostringstream detail;
  bool ok = true;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ok = false;
      detail << "sweep error: " << r.error << "; ";
    }
  }
  for (int io : {10, 25, 40}) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < column_start; ++i) {
      if (index[i].first != io) continue;
      const double v = rows[i].g2_max.value_or(std::numeric_limits<double>::quiet_NaN());
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double spread = hi - lo;
    if (!(spread < 1e-6)) ok = false;
    detail << "O=" << io * kStep << ": g2max=" << std::setprecision(6) << hi << " spread over C " << fmt(spread)
           << "; ";
  }
  bool monotone = true;
  for (std::size_t i = column_start + 1; i < rows.size(); ++i) {
    const double prev = rows[i - 1].g2_max.value_or(-1.0);
    const double cur = rows[i].g2_max.value_or(-1.0);
    if (!(cur >= prev)) monotone = false;
  }
  if (!monotone) ok = false;
  detail << "monotone in O along C=0: " << (monotone ? "yes" : "no");
  return {4, "g2max depends on O, not on C (I=0 grid)", ok, detail.str()};
}

CheckResult delta_range(Context&) {
  constexpr int kSteps = 50;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int io = 0; io <= kSteps; ++io) {
    const auto c = sjcm::config_coeffs_from_OCI({io / static_cast<double>(kSteps), 0.0, 0.0});
    lo = std::min(lo, c.delta());
    hi = std::max(hi, c.delta());
  }
  const double at0 = sjcm::config_coeffs_from_OCI({0.0, 0.0, 0.0}).delta();
  const double at1 = sjcm::config_coeffs_from_OCI({1.0, 0.0, 0.0}).delta();
  const bool ok = std::abs(at0 + 0.25) < 1e-12 && std::abs(at1 - 0.25) < 1e-12 && std::abs(lo + 0.25) < 1e-12 &&
                  std::abs(hi - 0.25) < 1e-12;
  return {5, "delta spans [-1/4, 1/4] on the I=0, C=0 edge", ok,
          "delta(O=0)=" + fmt(at0) + " delta(O=1)=" + fmt(at1) + " range [" + fmt(lo) + ", " + fmt(hi) + "]"};
}

DensityMatrix random_density(const BasisSpec& basis, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(basis.dim());
  CMatrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(normal(rng), normal(rng));
  }
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace();
  return DensityMatrix(basis, rho);
}

CheckResult dissipator_identity(Context&) {
  const auto basis = dephasing_basis(2);
  const auto l_sp = pair_annihilator(basis, Shell::p);
  const auto single = CollapseSpec::diagonal({"L_sp"}, {l_sp}, {kGamma});
  CollapseSpec pair;
  pair.labels = {"L_G", "L_X"};
  pair.ops = {transition_operator(basis, "G", "Xp"), transition_operator(basis, "Xs", "XX")};
  pair.gamma = CMatrix::Constant(2, 2, kGamma);
  std::mt19937_64 rng(kSeed + 6);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto rho = random_density(basis, rng);
    worst = std::max(worst, (dissipator(rho, pair) - dissipator(rho, single)).cwiseAbs().maxCoeff());
  }
  return {6, "non-diagonal {L_G, L_X} with all-Gamma rates equals single L_sp", worst < 1e-12,
          "20 random density matrices, max elementwise diff " + fmt(worst) + " (tol 1e-12)"};
}

CheckResult p_shell_independence(Context& ctx) {
  double worst = 0.0;
  std::ostringstream detail;
  for (auto variant : {Variant::single_particle, Variant::configuration}) {
    for (double beta : {0.0, kBeta}) {
      DephasingParams p;
      p.g = kG;
      p.Gamma = kGamma;
      p.beta = beta;
      p.variant = variant;
      const auto run = evolve_dephasing(p, tight(40.0, 0.05));
      ctx.health.add(run.health);
      const auto& ts = run.series.times();
      const auto& nep = run.series.column("n_e_p");
      for (std::size_t i = 0; i < ts.size(); ++i) worst = std::max(worst, std::abs(nep[i] - std::exp(-kGamma * ts[i])));
    }
  }
  detail << "both variants, beta in {0, 0.25}: max|n_e_p - exp(-Gamma t)|=" << fmt(worst) << " (tol 1e-8)";
  return {7, "p-shell decays at Gamma in both dissipator variants", worst < 1e-8, detail.str()};
}

CheckResult matrix_equivalence(Context& ctx) {
  double worst = 0.0;
  for (auto variant : {Variant::single_particle, Variant::configuration}) {
    DephasingParams p;
    p.g = kG;
    p.Gamma = kGamma;
    p.beta = kBeta;
    p.variant = variant;
    const auto cfg = tight(40.0, 0.05);
    const auto full = evolve_dephasing(p, cfg);
    ctx.health.add(full.health);
    const auto reduced = evolve_M(p, cfg);
    for (const auto& name : dephasing_columns()) {
      worst = std::max(worst, max_abs_diff(full.series.column(name), reduced.column(name)));
    }
  }
  return {8, "first-photon-block matrix equations match density-matrix evolution", worst < 1e-8,
          "both variants, Gamma=0.3 beta=0.25: max component diff " + fmt(worst) + " (tol 1e-8)"};
}

const std::vector<double>& amplitude_grid() {
  static const std::vector<double> grid{0.05, 0.1, 0.3, 1.0, 3.0, 20.0};
  return grid;
}

std::vector<AmplitudeResult> amplitudes(Context& ctx, Variant variant) {
  DephasingParams base;
  base.g = kG;
  base.variant = variant;
  const auto results = amplitude_sweep(amplitude_grid(), base, IntegratorConfig{}, ctx.options.threads);
  for (const auto& r : results) ctx.health.add(r.health);
  return results;
}

CheckResult amplitude_formula(Context& ctx) {
  const auto results = amplitudes(ctx, Variant::configuration);
  bool ok = true;
  std::ostringstream detail;
  detail << std::setprecision(5);
  for (const auto& r : results) {
    double target = r.formula;
    double tol = 0.01;
    if (r.gamma_tilde == 0.05) {
      target = 0.25;
      tol = 0.03;
    } else if (r.gamma_tilde == 20.0) {
      target = 0.5;
    }
    const double rel = std::abs(r.measured - target) / target;
    if (!(rel < tol)) ok = false;
    detail << "Gt=" << r.gamma_tilde << ": A=" << r.measured << " vs " << target << " (" << rel * 100 << "%); ";
  }
  return {9, "late-time Xs0 amplitude follows the non-local dephasing formula", ok, detail.str()};
}

CheckResult sp_amplitude(Context& ctx) {
  const auto results = amplitudes(ctx, Variant::single_particle);
  bool ok = true;
  std::ostringstream detail;
  detail << std::setprecision(6);
  for (const auto& r : results) {
    if (!(std::abs(r.measured - 0.5) <= 0.005)) ok = false;
    detail << "Gt=" << r.gamma_tilde << ": A=" << r.measured << "; ";
  }
  return {10, "single-particle dissipator keeps Xs0 amplitude at 1/2", ok, detail.str()};
}

CheckResult pumped_contrast(Context& ctx) {
  DephasingParams p;
  p.g = kG;
  p.Gamma = kGamma;
  p.P = kGamma;
  p.variant = Variant::configuration;
  const auto config = pumped_scenario(p);
  p.variant = Variant::single_particle;
  const auto sp = pumped_scenario(p);
  ctx.health.add(config.health);
  ctx.health.add(sp.health);
  const bool ok = config.amplitude_n_e_s < 0.01 && std::abs(sp.amplitude_n_e_s - 0.5) <= 0.005;
  return {11, "pumped p-shell: configuration variant reaches steady state, sp keeps oscillating", ok,
          "config amplitude " + fmt(config.amplitude_n_e_s) + " (<0.01), sp amplitude " + fmt(sp.amplitude_n_e_s) +
              " (0.5 +- 0.005)"};
}

CheckResult health_suite(Context& ctx) {
  const auto& h = ctx.health;
  const bool ok = h.runs > 0 && h.trace < 1e-8 && h.hermiticity < 1e-10 && h.min_eigenvalue >= -1e-8;
  return {12, "density-matrix health over every run", ok,
          std::to_string(h.runs) + " runs, max trace drift " + fmt(h.trace) + ", max hermiticity error " +
              fmt(h.hermiticity) + ", min eigenvalue " + fmt(h.min_eigenvalue)};
}

template <class Fn>
CheckResult guarded(int id, const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {id, name, false, std::string("exception: ") + e.what()};
  }
}

// Fixed-step runs used for byte-level reproducibility.
std::vector<std::string> fixed_step_csvs() {
  std::vector<std::string> out;
  IntegratorConfig cfg;
  cfg.method = Method::rk4_fixed;
  cfg.dt = default_fixed_step(kG);
  cfg.t1 = 4.0 * std::numbers::pi / kG;
  cfg.sample_every = 0.05;
  const sjcm::Params params{kG, std::nullopt};
  out.push_back(to_csv(sjcm::hierarchy_evolve(one_photon_spec(), params, sjcm::Closure::exact, cfg)));
  out.push_back(to_csv(sjcm::hierarchy_evolve(one_photon_spec(), params, sjcm::Closure::hartree_fock, cfg)));
  DephasingParams p;
  p.g = kG;
  p.Gamma = kGamma;
  p.beta = kBeta;
  cfg.t1 = 20.0;
  out.push_back(to_csv(evolve_dephasing(p, cfg).series));
  return out;
}

}  // namespace

std::vector<CheckResult> run_numeric_checks(const Options& options) {
  Context ctx;
  ctx.options = options;
  using Step = CheckResult (*)(Context&);
  const std::vector<std::pair<std::string, Step>> steps{
      {"oracle equivalence", oracle_equivalence},
      {"Hartree-Fock pitfall", hf_pitfall},
      {"conservation", conservation},
      {"g2max independence", g2_independence},
      {"delta range", delta_range},
      {"dissipator identity", dissipator_identity},
      {"p-shell independence", p_shell_independence},
      {"matrix EoM equivalence", matrix_equivalence},
      {"amplitude formula", amplitude_formula},
      {"single-particle amplitude", sp_amplitude},
      {"pumped contrast", pumped_contrast},
      {"health suite", health_suite},
  };
  std::vector<CheckResult> results;
  int id = 1;
  for (const auto& [name, step] : steps) {
    auto r = guarded(id, name, [&] { return step(ctx); });
    if (options.on_result) options.on_result(r);
    results.push_back(std::move(r));
    ++id;
  }
  return results;
}

CheckResult check_determinism(const std::vector<CheckResult>& first_pass, const Options& options) {
  return guarded(13, "determinism", [&]() -> CheckResult {
    Options quiet = options;
    quiet.on_result = nullptr;
    const auto second = run_numeric_checks(quiet);
    bool same_outcome = second.size() == first_pass.size();
    bool same_detail = same_outcome;
    for (std::size_t i = 0; same_outcome && i < second.size(); ++i) {
      if (second[i].passed != first_pass[i].passed) same_outcome = false;
      if (second[i].detail != first_pass[i].detail) same_detail = false;
    }
    const auto a = fixed_step_csvs();
    const auto b = fixed_step_csvs();
    const bool same_csv = a == b;
    const bool ok = same_outcome && same_detail && same_csv;
    return {13, "determinism (repeat checks, fixed-step CSV bytes)", ok,
            std::string("pass/fail identical: ") + (same_outcome ? "yes" : "no") +
                ", reported values identical: " + (same_detail ? "yes" : "no") +
                ", fixed-step CSVs byte-identical: " + (same_csv ? "yes" : "no")};
  });
}

std::vector<CheckResult> run_all(const Options& options) {
  auto results = run_numeric_checks(options);
  auto det = check_determinism(results, options);
  if (options.on_result) options.on_result(det);
  results.push_back(std::move(det));
  return results;
}

std::string format_table(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  for (const auto& r : results) {
    out << (r.passed ? "PASS" : "FAIL") << "  [" << std::setw(2) << r.id << "] " << r.name << "\n"
        << "          " << r.detail << "\n";
  }
  return out.str();
}

}  // namespace qdlab::checks
