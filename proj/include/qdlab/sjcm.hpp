#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qdlab/integrate.hpp"
#include "qdlab/lindblad.hpp"
#include "qdlab/time_series.hpp"

namespace qdlab::sjcm {

// Two-level quantum dot with independent electron and hole occupation,
// resonantly coupled to one cavity mode. Time is measured in units of 1/g
// scaled by the coupling passed here.
struct Params {
  double g = 0.5;
  // Photon cutoff; when unset it is chosen as (largest initially occupied
  // photon number) + 1, which is exact for this model.
  std::optional<int> n_max;

  void validate() const;
};

enum class Closure { exact, hartree_fock };

// Weights of the four configurations {G, Xs, +s, -s} (hole only = +s,
// electron only = -s).
struct ConfigCoeffs {
  double G = 0.0;
  double Xs = 0.0;
  double plus = 0.0;
  double minus = 0.0;

  std::vector<double> as_vector() const { return {G, Xs, plus, minus}; }
  double f_e() const { return Xs + minus; }
  double f_h() const { return Xs + plus; }
  double delta() const { return Xs - f_e() * f_h(); }
};

struct Occupations {
  double f_e = 0.0;
  double f_h = 0.0;
  double delta = 0.0;
};

// Oscillation ability O = P(G) + P(Xs), charge C = P(+s) - P(-s),
// inversion I = P(Xs) - P(G).
struct OCI {
  double O = 0.0;
  double C = 0.0;
  double I = 0.0;
};

// Throws Error naming each coefficient that leaves [0, 1].
ConfigCoeffs config_coeffs_from_OCI(const OCI& oci);
OCI oci_from_coeffs(const ConfigCoeffs& c);
ConfigCoeffs config_coeffs_from_occupations(const Occupations& occ);

struct QdInitSpec {
  std::variant<Occupations, OCI> qd;
  std::vector<double> photon_dist;

  // Validated configuration weights; throws Error when the spec is inconsistent.
  ConfigCoeffs coefficients() const;
  int max_photon() const;
};

int resolve_n_max(const QdInitSpec& spec, const Params& params);

// Photon-number-resolved expectation values. psi[n_max] is pinned to zero;
// c_x is carried but not used under the Hartree-Fock closure.
struct HierarchyState {
  std::vector<double> p;
  std::vector<double> f_e;
  std::vector<double> f_h;
  std::vector<double> psi;
  std::vector<double> c_x;
  Closure closure = Closure::exact;

  int n_max() const { return static_cast<int>(p.size()) - 1; }
  // C^X_n actually entering the equations: the carried value (exact) or
  // f^e_n f^h_n / p_n (Hartree-Fock, zero when p_n <= 1e-12).
  double correlated(std::size_t n) const;

  State pack() const;
  static HierarchyState unpack(const State& y, int n_max, Closure closure);
};

HierarchyState hierarchy_init(const QdInitSpec& spec, Closure closure, int n_max);

// Time derivative of every array of the state.
HierarchyState hierarchy_rhs(const HierarchyState& state, const Params& params);

struct Observables {
  double N = 0.0;
  std::optional<double> g2;  // unset when N <= 1e-6
  double f_e = 0.0;
  double f_h = 0.0;
  double C = 0.0;
  double delta = 0.0;
  // Photon-resolved correlation sum_n (C^X_n - f^e_n f^h_n / p_n); zero by
  // construction under the Hartree-Fock closure.
  double delta_resolved = 0.0;
  std::optional<double> O;  // unset under the Hartree-Fock closure
};

Observables observables(const HierarchyState& state);

// Column layout shared by every engine.
const std::vector<std::string>& columns();
std::vector<double> observable_row(const Observables& obs);

using StateObserver = std::function<void(double t, const HierarchyState& state)>;

void hierarchy_evolve(const QdInitSpec& spec, const Params& params, Closure closure, const IntegratorConfig& cfg,
                      const StateObserver& observer);
TimeSeries hierarchy_evolve(const QdInitSpec& spec, const Params& params, Closure closure,
                            const IntegratorConfig& cfg);

// Density-matrix reference on {G, Xs, +s, -s} x Fock(n_max) evolved with the
// resonant interaction H = -g (|G><Xs| b^dagger + h.c.).
DensityMatrix oracle_initial_state(const QdInitSpec& spec, int n_max);
Operator oracle_hamiltonian(const BasisSpec& basis, double g);
// Hierarchy variables read off a configuration-basis density matrix.
HierarchyState oracle_state(const DensityMatrix& rho);

struct OracleRun {
  TimeSeries series;
  EvolutionHealth health;
};

// Aborts with NumericalError when P(Xs, n_max) exceeds 1e-9.
OracleRun oracle_evolve(const QdInitSpec& spec, const Params& params, const IntegratorConfig& cfg,
                        const StateObserver& observer = {});

enum class Engine { exact, hartree_fock, oracle };

struct SweepPoint {
  double C = 0.0;
  double O = 0.0;
  double delta = 0.0;
  std::optional<double> g2_max;  // unset when no sample had g2 defined
  std::string error;             // evolution failure for this point, if any
};

// One Rabi period pi / g.
double rabi_period(const Params& params);
// 20 Rabi periods sampled at 200 points per period.
IntegratorConfig sweep_config(const Params& params, double horizon, const IntegratorConfig& base = {});

double g2_max(const QdInitSpec& spec, const Params& params, Engine engine, const IntegratorConfig& cfg);

// Evaluates every grid point (concurrently on up to `threads` workers) and
// returns rows in grid order. Failures are recorded per point.
std::vector<SweepPoint> sweep_g2max(const std::vector<QdInitSpec>& grid, const Params& params, Engine engine,
                                    const IntegratorConfig& cfg, double horizon, unsigned threads = 1);

// I = 0 triangle |C| <= 1 - O on a regular grid with the given step
// (step must divide 1), photons p_1 = 1.
std::vector<QdInitSpec> triangle_grid(double step);
// delta = 0, f_e + f_h = 1 path: f_e = (1 - C) / 2, f_h = (1 + C) / 2, p_1 = 1.
std::vector<QdInitSpec> uncorrelated_path(const std::vector<double>& charges);

}  // namespace qdlab::sjcm
