#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdlab/integrate.hpp"
#include "qdlab/qstate.hpp"
#include "qdlab/time_series.hpp"

namespace qdlab {

enum class PsdPolicy { reject, warn };

// Collapse operators L_i with a Hermitian rate matrix; gamma(j, i) holds the
// rate multiplying L_i rho L_j^dagger. A diagonal gamma is the usual
// independent-channel Lindblad form.
struct CollapseSpec {
  std::vector<std::string> labels;
  std::vector<Operator> ops;
  CMatrix gamma;

  static CollapseSpec diagonal(std::vector<std::string> labels, std::vector<Operator> ops,
                               const std::vector<double>& rates);
  static CollapseSpec none();

  // Throws Error on shape problems, non-Hermitian gamma, or negative diagonal
  // rates. A gamma that is not positive semidefinite is rejected under
  // PsdPolicy::reject and reported as a warning string under PsdPolicy::warn.
  std::optional<std::string> validate(PsdPolicy policy = PsdPolicy::reject) const;
};

// D(rho) = sum_ij gamma_ji (L_i rho L_j^dagger - 1/2 {L_j^dagger L_i, rho}).
CMatrix dissipator(const DensityMatrix& rho, const CollapseSpec& spec);

// d rho / dt = i[rho, H] + D(rho), with the anticommutator part folded into
// an effective non-Hermitian generator.
class MasterEquation {
 public:
  MasterEquation(Operator hamiltonian, CollapseSpec spec, PsdPolicy policy = PsdPolicy::reject);

  const BasisSpec& basis() const { return hamiltonian_.basis; }
  const Operator& hamiltonian() const { return hamiltonian_; }
  const CollapseSpec& collapse() const { return spec_; }

  CMatrix rhs(const CMatrix& rho) const;
  // Same as rhs on the packed (interleaved re/im, column-major) representation.
  void rhs_packed(const State& y, State& dydt) const;

 private:
  Operator hamiltonian_;
  CollapseSpec spec_;
  CMatrix generator_;  // i H + K / 2, K = sum_ij gamma_ji L_j^dagger L_i
  std::vector<CMatrix> jump_left_;   // L_i
  std::vector<CMatrix> jump_right_;  // sum_j gamma_ji L_j^dagger
};

State pack(const CMatrix& m);
CMatrix unpack(const State& y, Eigen::Index dim);

struct HealthLimits {
  double trace = 1e-8;
  double hermiticity = 1e-10;
  double min_eigenvalue = -1e-8;
  double top_leak = 1e-9;
};

// Worst values seen over all samples of a run.
struct EvolutionHealth {
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  double max_top_leak = 0.0;
  std::size_t samples = 0;

  std::string describe() const;
};

using DensityObserver = std::function<void(double t, const DensityMatrix& rho)>;

// Integrates rho(t) and health-checks every sample. leak_labels selects the
// configurations whose top-photon-level occupation counts as truncation leak
// (all labels when empty). Throws NumericalError with the health report when
// a limit is exceeded.
EvolutionHealth evolve_density(const DensityMatrix& rho0, const MasterEquation& eq, const IntegratorConfig& cfg,
                               const DensityObserver& observer, const HealthLimits& limits = {},
                               const std::vector<std::string>& leak_labels = {});

// ---------------------------------------------------------------------------
// s/p-shell dephasing model on {G, Xs, Xp, XX} x Fock(n_max).

enum class Variant { single_particle, configuration };

struct DephasingParams {
  double g = 0.5;
  double Gamma = 0.3;  // p-exciton loss
  double beta = 0.0;   // s-exciton loss
  double P = 0.0;      // p-exciton pump
  Variant variant = Variant::configuration;
  int n_max = 2;
  // Optional p-shell loss rate matrix over {|G><Xp|, |Xs><XX|}; replaces the
  // Gamma channels of either variant. All entries Gamma reproduce the
  // single-particle loss, a diagonal matrix the configuration loss.
  std::optional<Eigen::Matrix2d> p_loss;
  PsdPolicy psd = PsdPolicy::reject;

  void validate() const;
  double gamma_tilde() const { return Gamma / (2.0 * g); }
  double rabi_period() const;
};

struct DephasingModel {
  Operator hamiltonian;
  CollapseSpec collapse;
};

// H = -g (h_s e_s b^dagger + h.c.). Collapse channels with zero rate are omitted.
DephasingModel build_dephasing_model(const DephasingParams& params);

// Column names of the first-photon-block vector r, in matrix order.
const std::vector<std::string>& r_names();
// r_names() followed by n_e_s, n_e_p, n_ph.
const std::vector<std::string>& dephasing_columns();

// r components plus shell occupations of a density matrix on the dephasing basis.
std::vector<double> dephasing_observables(const DensityMatrix& rho);

DensityMatrix biexciton_vacuum(const BasisSpec& basis);

struct DephasingRun {
  TimeSeries series;
  EvolutionHealth health;
};

DephasingRun evolve_dephasing(const DephasingParams& params, const IntegratorConfig& cfg,
                              const HealthLimits& limits = {});

// Rate matrix of the linear first-photon-block equations d r / dt = M r.
// Throws Error when a pump or a custom p_loss matrix is requested.
Eigen::MatrixXd build_M(const DephasingParams& params);

// Linear ODE for r from r0 = (1, 0, ..., 0); columns dephasing_columns() with
// shell occupations reconstructed from the block.
TimeSeries evolve_M(const DephasingParams& params, const IntegratorConfig& cfg);

// beta = 0 reduced six-component system (XX0 .. G1) propagated through its
// eigendecomposition.
TimeSeries analytic_beta0(const DephasingParams& params, const std::vector<double>& times);
EigenModes beta0_modes(const DephasingParams& params);

// Late-time Xs0 oscillation amplitude for the configuration-resolved loss.
double asymptotic_amplitude(double gamma_tilde);

// (max - min) / 2 of a column over the last three periods after t_min.
double measure_amplitude(const TimeSeries& series, const std::string& column, double t_min, double period);

// Default start of the amplitude window: 10 / Gamma + 50 Rabi periods.
double default_amplitude_window(const DephasingParams& params);

// Integrator settings covering [0, t_min + 3 periods] at 200 samples per period.
IntegratorConfig amplitude_config(const DephasingParams& params, double t_min, const IntegratorConfig& base = {});

struct AmplitudeResult {
  double gamma_tilde = 0.0;
  double measured = 0.0;
  double formula = 0.0;
  EvolutionHealth health;
};

// Evolves the beta = 0 model and measures the Xs0 amplitude.
AmplitudeResult dephasing_amplitude(const DephasingParams& params, const IntegratorConfig& base = {});

// One point per gamma_tilde; points are independent and computed on up to
// `threads` workers, results returned in grid order.
std::vector<AmplitudeResult> amplitude_sweep(const std::vector<double>& gamma_tilde, const DephasingParams& base,
                                             const IntegratorConfig& cfg, unsigned threads);

struct PumpedRun {
  TimeSeries series;
  double amplitude_n_e_s = 0.0;
  EvolutionHealth health;
};

// Pumped p-exciton scenario (requires beta = 0). The window start defaults to
// default_amplitude_window when t_min is not given.
PumpedRun pumped_scenario(const DephasingParams& params, const IntegratorConfig& base = {},
                          std::optional<double> t_min = std::nullopt);

}  // namespace qdlab
