#include "qdlab/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qdlab/error.hpp"
#include "qdlab/parallel.hpp"

namespace qdlab {

// ---------------------------------------------------------------------------
// Collapse specifications and the dissipator

CollapseSpec CollapseSpec::diagonal(std::vector<std::string> labels, std::vector<Operator> ops,
                                    const std::vector<double>& rates) {
  if (labels.size() != ops.size() || rates.size() != ops.size()) {
    throw Error("collapse spec: labels, operators and rates must have equal length");
  }
  CollapseSpec spec;
  spec.labels = std::move(labels);
  spec.ops = std::move(ops);
  const auto n = static_cast<Eigen::Index>(rates.size());
  spec.gamma = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) spec.gamma(i, i) = rates[static_cast<std::size_t>(i)];
  return spec;
}

CollapseSpec CollapseSpec::none() {
  CollapseSpec spec;
  spec.gamma = CMatrix::Zero(0, 0);
  return spec;
}

std::optional<std::string> CollapseSpec::validate(PsdPolicy policy) const {
  const auto n = static_cast<Eigen::Index>(ops.size());
  if (labels.size() != ops.size()) throw Error("collapse spec: one label per operator is required");
  if (gamma.rows() != n || gamma.cols() != n) {
    throw Error("collapse spec: rate matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  for (std::size_t i = 1; i < ops.size(); ++i) {
    if (!(ops[i].basis == ops[0].basis)) throw Error("collapse spec: operators live on different bases");
  }
  if (n == 0) return std::nullopt;
  if ((gamma - gamma.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error("collapse spec: rate matrix is not Hermitian");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (gamma(i, i).real() < 0.0) {
      throw Error("collapse spec: negative rate " + std::to_string(gamma(i, i).real()) + " for channel '" +
                  labels[static_cast<std::size_t>(i)] + "'");
    }
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (gamma + gamma.adjoint()), Eigen::EigenvaluesOnly);
  const double lowest = es.eigenvalues().minCoeff();
  const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
  if (lowest < -1e-12 * scale) {
    std::ostringstream msg;
    msg << "collapse spec: rate matrix is not positive semidefinite (lowest eigenvalue " << lowest
        << "); the dissipator is not completely positive";
    if (policy == PsdPolicy::reject) throw Error(msg.str());
    return msg.str();
  }
  return std::nullopt;
}

CMatrix dissipator(const DensityMatrix& rho, const CollapseSpec& spec) {
  spec.validate(PsdPolicy::warn);
  const auto d = static_cast<Eigen::Index>(rho.basis.dim());
  CMatrix out = CMatrix::Zero(d, d);
  const auto n = spec.ops.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(spec.ops[i].basis == rho.basis)) throw Error("dissipator: basis mismatch for '" + spec.labels[i] + "'");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const CMatrix& li = spec.ops[i].elements;
    for (std::size_t j = 0; j < n; ++j) {
      const cplx rate = spec.gamma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      if (rate == cplx(0.0)) continue;
      const CMatrix lj_dag = spec.ops[j].elements.adjoint();
      const CMatrix k = lj_dag * li;
      out += rate * (li * rho.elements * lj_dag - 0.5 * (k * rho.elements + rho.elements * k));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Master equation

MasterEquation::MasterEquation(Operator hamiltonian, CollapseSpec spec, PsdPolicy policy)
    : hamiltonian_(std::move(hamiltonian)), spec_(std::move(spec)) {
  spec_.validate(policy);
  for (const auto& op : spec_.ops) {
    if (!(op.basis == hamiltonian_.basis)) throw Error("master equation: collapse operator basis mismatch");
  }
  const auto d = static_cast<Eigen::Index>(hamiltonian_.basis.dim());
  CMatrix k = CMatrix::Zero(d, d);
  const auto n = spec_.ops.size();
  for (std::size_t i = 0; i < n; ++i) {
    CMatrix right = CMatrix::Zero(d, d);
    for (std::size_t j = 0; j < n; ++j) {
      const cplx rate = spec_.gamma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      if (rate == cplx(0.0)) continue;
      right += rate * spec_.ops[j].elements.adjoint();
    }
    k += right * spec_.ops[i].elements;
    if (right.cwiseAbs().maxCoeff() > 0.0) {
      jump_left_.push_back(spec_.ops[i].elements);
      jump_right_.push_back(std::move(right));
    }
  }
  generator_ = cplx(0.0, 1.0) * hamiltonian_.elements + 0.5 * k;
}

CMatrix MasterEquation::rhs(const CMatrix& rho) const {
  CMatrix out = -(generator_ * rho);
  out -= rho * generator_.adjoint();
  for (std::size_t i = 0; i < jump_left_.size(); ++i) out += jump_left_[i] * rho * jump_right_[i];
  return out;
}

State pack(const CMatrix& m) {
  State y(static_cast<std::size_t>(2 * m.size()));
  const cplx* p = m.data();
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    y[static_cast<std::size_t>(2 * k)] = p[k].real();
    y[static_cast<std::size_t>(2 * k + 1)] = p[k].imag();
  }
  return y;
}

CMatrix unpack(const State& y, Eigen::Index dim) {
  if (static_cast<Eigen::Index>(y.size()) != 2 * dim * dim) throw Error("unpack: state size mismatch");
  CMatrix m(dim, dim);
  cplx* p = m.data();
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    p[k] = cplx(y[static_cast<std::size_t>(2 * k)], y[static_cast<std::size_t>(2 * k + 1)]);
  }
  return m;
}

void MasterEquation::rhs_packed(const State& y, State& dydt) const {
  const auto d = static_cast<Eigen::Index>(hamiltonian_.basis.dim());
  const CMatrix drho = rhs(unpack(y, d));
  const cplx* p = drho.data();
  dydt.resize(y.size());
  for (Eigen::Index k = 0; k < drho.size(); ++k) {
    dydt[static_cast<std::size_t>(2 * k)] = p[k].real();
    dydt[static_cast<std::size_t>(2 * k + 1)] = p[k].imag();
  }
}

std::string EvolutionHealth::describe() const {
  std::ostringstream out;
  out << "samples=" << samples << " max_trace_error=" << max_trace_error
      << " max_hermiticity_error=" << max_hermiticity_error << " min_eigenvalue=" << min_eigenvalue
      << " max_top_leak=" << max_top_leak;
  return out.str();
}

EvolutionHealth evolve_density(const DensityMatrix& rho0, const MasterEquation& eq, const IntegratorConfig& cfg,
                               const DensityObserver& observer, const HealthLimits& limits,
                               const std::vector<std::string>& leak_labels) {
  if (!(rho0.basis == eq.basis())) throw Error("evolve: initial state basis does not match the master equation");
  const auto d = static_cast<Eigen::Index>(rho0.basis.dim());
  EvolutionHealth health;
  health.min_eigenvalue = std::numeric_limits<double>::infinity();
  auto rhs = [&eq](const State& y, State& dydt, double) { eq.rhs_packed(y, dydt); };
  auto observe = [&](double t, const State& y) {
    const DensityMatrix rho(rho0.basis, unpack(y, d));
    const auto report = validate_density(rho);
    const double leak = top_level_occupation(rho, leak_labels);
    health.max_trace_error = std::max(health.max_trace_error, report.trace_error);
    health.max_hermiticity_error = std::max(health.max_hermiticity_error, report.hermiticity_error);
    health.min_eigenvalue = std::min(health.min_eigenvalue, report.min_eigenvalue);
    health.max_top_leak = std::max(health.max_top_leak, leak);
    ++health.samples;
    if (report.trace_error > limits.trace || report.hermiticity_error > limits.hermiticity ||
        report.min_eigenvalue < limits.min_eigenvalue) {
      std::ostringstream msg;
      msg << "density matrix health check failed at t = " << t << ": trace_error=" << report.trace_error
          << " hermiticity_error=" << report.hermiticity_error << " min_eigenvalue=" << report.min_eigenvalue;
      throw NumericalError(msg.str());
    }
    if (leak > limits.top_leak) {
      std::ostringstream msg;
      msg << "photon truncation leak " << leak << " at t = " << t << " exceeds " << limits.top_leak
          << "; increase n_max";
      throw NumericalError(msg.str());
    }
    observer(t, rho);
  };
  integrate_observed(rhs, pack(rho0.elements), cfg, observe);
  return health;
}

// ---------------------------------------------------------------------------
// Dephasing model

void DephasingParams::validate() const {
  if (!(g > 0.0)) throw Error("dephasing: g must be positive");
  if (Gamma < 0.0 || beta < 0.0 || P < 0.0) throw Error("dephasing: rates must be non-negative");
  if (n_max < 1) throw Error("dephasing: n_max must be >= 1");
}

double DephasingParams::rabi_period() const { return std::numbers::pi / g; }

DephasingModel build_dephasing_model(const DephasingParams& params) {
  params.validate();
  const auto basis = dephasing_basis(params.n_max);
  const auto b = photon_annihilator(basis);
  const auto hs_es = pair_annihilator(basis, Shell::s);
  const Operator coupling = hs_es * b.adjoint();
  const Operator h(basis, -params.g * (coupling.elements + coupling.elements.adjoint()));

  std::vector<std::string> labels;
  std::vector<Operator> ops;
  std::vector<double> rates;
  auto add = [&](std::string label, Operator op, double rate) {
    if (rate == 0.0) return;
    labels.push_back(std::move(label));
    ops.push_back(std::move(op));
    rates.push_back(rate);
  };
  const double gamma = params.p_loss ? 0.0 : params.Gamma;
  if (params.variant == Variant::single_particle) {
    const auto hp_ep = pair_annihilator(basis, Shell::p);
    add("h_p e_p", hp_ep, gamma);
    add("h_s e_s", hs_es, params.beta);
    add("e_p^+ h_p^+", hp_ep.adjoint(), params.P);
  } else {
    add("|G><Xp|", transition_operator(basis, "G", "Xp"), gamma);
    add("|Xs><XX|", transition_operator(basis, "Xs", "XX"), gamma);
    add("|G><Xs|", transition_operator(basis, "G", "Xs"), params.beta);
    add("|Xp><XX|", transition_operator(basis, "Xp", "XX"), params.beta);
    add("|Xp><G|", transition_operator(basis, "Xp", "G"), params.P);
    add("|XX><Xs|", transition_operator(basis, "XX", "Xs"), params.P);
  }
  if (!params.p_loss) {
    if (ops.empty()) return {h, CollapseSpec::none()};
    return {h, CollapseSpec::diagonal(std::move(labels), std::move(ops), rates)};
  }
  // Custom p-shell block first, remaining channels diagonal after it.
  CollapseSpec spec;
  spec.labels = {"|G><Xp|", "|Xs><XX|"};
  spec.ops = {transition_operator(basis, "G", "Xp"), transition_operator(basis, "Xs", "XX")};
  spec.labels.insert(spec.labels.end(), labels.begin(), labels.end());
  spec.ops.insert(spec.ops.end(), ops.begin(), ops.end());
  const auto n = static_cast<Eigen::Index>(spec.ops.size());
  spec.gamma = CMatrix::Zero(n, n);
  spec.gamma.topLeftCorner(2, 2) = params.p_loss->cast<cplx>();
  for (Eigen::Index i = 2; i < n; ++i) spec.gamma(i, i) = rates[static_cast<std::size_t>(i - 2)];
  return {h, std::move(spec)};
}

const std::vector<std::string>& r_names() {
  static const std::vector<std::string> names{"XX0", "psi_X0", "Xp1", "Xs0", "psi_s0", "G1", "Xp0", "G0"};
  return names;
}

const std::vector<std::string>& dephasing_columns() {
  static const std::vector<std::string> names = [] {
    auto n = r_names();
    n.insert(n.end(), {"n_e_s", "n_e_p", "n_ph"});
    return n;
  }();
  return names;
}

std::vector<double> dephasing_observables(const DensityMatrix& rho) {
  const auto& basis = rho.basis;
  // psi_X^n = Im rho[(n, XX), (n+1, Xp)], psi_s^n = Im rho[(n, Xs), (n+1, G)].
  std::vector<double> out{
      population(rho, 0, "XX"),
      coherence(rho, 0, "XX", 1, "Xp").imag(),
      population(rho, 1, "Xp"),
      population(rho, 0, "Xs"),
      coherence(rho, 0, "Xs", 1, "G").imag(),
      population(rho, 1, "G"),
      population(rho, 0, "Xp"),
      population(rho, 0, "G"),
  };
  double n_e_s = 0.0;
  double n_e_p = 0.0;
  double n_ph = 0.0;
  for (int n = 0; n <= basis.n_max(); ++n) {
    const double xs = population(rho, n, "Xs");
    const double xp = population(rho, n, "Xp");
    const double xx = population(rho, n, "XX");
    const double gg = population(rho, n, "G");
    n_e_s += xs + xx;
    n_e_p += xp + xx;
    n_ph += n * (xs + xp + xx + gg);
  }
  out.insert(out.end(), {n_e_s, n_e_p, n_ph});
  return out;
}

DensityMatrix biexciton_vacuum(const BasisSpec& basis) {
  std::vector<double> weights(basis.num_configs(), 0.0);
  weights[basis.config_index("XX")] = 1.0;
  return diagonal_product_state(basis, weights, {1.0});
}

DephasingRun evolve_dephasing(const DephasingParams& params, const IntegratorConfig& cfg, const HealthLimits& limits) {
  const auto model = build_dephasing_model(params);
  const MasterEquation eq(model.hamiltonian, model.collapse, params.psd);
  DephasingRun run{TimeSeries(dephasing_columns()), {}};
  run.health = evolve_density(biexciton_vacuum(eq.basis()), eq, cfg,
                              [&run](double t, const DensityMatrix& rho) {
                                run.series.push_row(t, dephasing_observables(rho));
                              },
                              limits);
  return run;
}

Eigen::MatrixXd build_M(const DephasingParams& params) {
  params.validate();
  if (params.P != 0.0) {
    throw Error("build_M: the first-photon-block matrix has no pump terms; use evolve_dephasing for P > 0");
  }
  if (params.p_loss) throw Error("build_M: custom p-shell loss matrices need evolve_dephasing");
  const double g = params.g;
  const double G = params.Gamma;
  const double b = params.beta;
  const double transfer = params.variant == Variant::single_particle ? G : 0.0;
  Eigen::MatrixXd m(8, 8);
  // clang-format off
  m <<  -G - b,        2 * g,  0,     0,      0,      0,  0,   0,
        -g,     -G - b / 2.0,  g,     0,      0,      0,  0,   0,
         0,           -2 * g, -G,     0,      0,      0,  0,   0,
         G,                0,  0,    -b,  2 * g,      0,  0,   0,
         0,         transfer,  0,    -g, -b / 2.0,    g,  0,   0,
         0,                0,  G,     0, -2 * g,      0,  0,   0,
         b,                0,  0,     0,      0,      0, -G,   0,
         0,                0,  0,     b,      0,      0,  G,   0;
  // clang-format on
  return m;
}

namespace {

std::vector<double> with_shell_occupations(const std::vector<double>& r) {
  std::vector<double> out = r;
  out.push_back(r[0] + r[3]);         // n_e_s = XX0 + Xs0
  out.push_back(r[0] + r[2] + r[6]);  // n_e_p = XX0 + Xp1 + Xp0
  out.push_back(r[2] + r[5]);         // n_ph = Xp1 + G1
  return out;
}

}  // namespace

TimeSeries evolve_M(const DephasingParams& params, const IntegratorConfig& cfg) {
  const Eigen::MatrixXd m = build_M(params);
  auto rhs = [&m](const State& y, State& dydt, double) {
    Eigen::Map<const Eigen::VectorXd> r(y.data(), 8);
    Eigen::Map<Eigen::VectorXd> dr(dydt.data(), 8);
    dr.noalias() = m * r;
  };
  State r0(8, 0.0);
  r0[0] = 1.0;
  TimeSeries series(dephasing_columns());
  integrate_observed(rhs, r0, cfg, [&series](double t, const State& y) { series.push_row(t, with_shell_occupations(y)); });
  return series;
}

namespace {

Eigen::MatrixXd beta0_matrix(const DephasingParams& params) {
  if (params.beta != 0.0) throw Error("analytic solution requires beta = 0");
  return build_M(params).topLeftCorner(6, 6);
}

}  // namespace

EigenModes beta0_modes(const DephasingParams& params) {
  Eigen::VectorXd r0 = Eigen::VectorXd::Zero(6);
  r0(0) = 1.0;
  return eigen_modes(beta0_matrix(params), r0);
}

TimeSeries analytic_beta0(const DephasingParams& params, const std::vector<double>& times) {
  Eigen::VectorXd r0 = Eigen::VectorXd::Zero(6);
  r0(0) = 1.0;
  const std::vector<std::string> names(r_names().begin(), r_names().begin() + 6);
  return eig_propagate(beta0_matrix(params), r0, times, names);
}

double asymptotic_amplitude(double gamma_tilde) {
  if (gamma_tilde < 0.0) throw Error("asymptotic_amplitude: gamma_tilde must be >= 0");
  const double x = gamma_tilde * gamma_tilde;
  return 0.5 * std::sqrt((x + 2.0) * (x + 2.0) + x) / (x + 4.0);
}

double measure_amplitude(const TimeSeries& series, const std::string& column, double t_min, double period) {
  if (series.empty()) throw Error("measure_amplitude: empty series");
  const auto& ts = series.times();
  const double t_end = ts.back();
  if (t_end - t_min < 3.0 * period * (1.0 - 1e-9)) {
    std::ostringstream msg;
    msg << "measure_amplitude: window too short (series ends at " << t_end << ", need t_min + 3 periods = "
        << t_min + 3.0 * period << ")";
    throw Error(msg.str());
  }
  const double start = t_end - 3.0 * period;
  const auto& values = series.column(column);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] < start - 1e-12 * period) continue;
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  return 0.5 * (hi - lo);
}

double default_amplitude_window(const DephasingParams& params) {
  const double decay = params.Gamma > 0.0 ? 10.0 / params.Gamma : 0.0;
  return decay + 50.0 * params.rabi_period();
}

IntegratorConfig amplitude_config(const DephasingParams& params, double t_min, const IntegratorConfig& base) {
  IntegratorConfig cfg = base;
  cfg.t0 = 0.0;
  cfg.sample_every = params.rabi_period() / 200.0;
  cfg.t1 = t_min + 3.0 * params.rabi_period();
  return cfg;
}

AmplitudeResult dephasing_amplitude(const DephasingParams& params, const IntegratorConfig& base) {
  if (params.beta != 0.0 || params.P != 0.0) throw Error("dephasing amplitude: requires beta = 0 and P = 0");
  const double t_min = default_amplitude_window(params);
  const auto run = evolve_dephasing(params, amplitude_config(params, t_min, base));
  AmplitudeResult out;
  out.gamma_tilde = params.gamma_tilde();
  out.measured = measure_amplitude(run.series, "Xs0", t_min, params.rabi_period());
  out.formula = asymptotic_amplitude(out.gamma_tilde);
  out.health = run.health;
  return out;
}

std::vector<AmplitudeResult> amplitude_sweep(const std::vector<double>& gamma_tilde, const DephasingParams& base,
                                             const IntegratorConfig& cfg, unsigned threads) {
  std::vector<AmplitudeResult> out(gamma_tilde.size());
  parallel_for(gamma_tilde.size(), threads, [&](std::size_t i) {
    DephasingParams p = base;
    p.Gamma = gamma_tilde[i] * 2.0 * base.g;
    out[i] = dephasing_amplitude(p, cfg);
  });
  return out;
}

PumpedRun pumped_scenario(const DephasingParams& params, const IntegratorConfig& base, std::optional<double> t_min) {
  if (params.beta != 0.0) throw Error("pumped scenario: requires beta = 0");
  const double window = t_min.value_or(default_amplitude_window(params));
  auto run = evolve_dephasing(params, amplitude_config(params, window, base));
  PumpedRun out;
  out.amplitude_n_e_s = measure_amplitude(run.series, "n_e_s", window, params.rabi_period());
  out.series = std::move(run.series);
  out.health = run.health;
  return out;
}

}  // namespace qdlab
