#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdlab/time_series.hpp"

namespace qdlab {

using State = std::vector<double>;
using Rhs = std::function<void(const State& y, State& dydt, double t)>;
using Observer = std::function<void(double t, const State& y)>;

enum class Method { rk4_fixed, rk45_adaptive };

struct IntegratorConfig {
  Method method = Method::rk45_adaptive;
  double dt = 0.002 * 3.14159265358979323846;  // 0.001 pi / g at g = 1/2
  double rtol = 1e-9;
  double atol = 1e-12;
  double t0 = 0.0;
  double t1 = 1.0;
  double sample_every = 0.01;

  void validate() const;
};

// 10^3 fixed steps per Rabi period pi/g.
double default_fixed_step(double g);

// Sample grid t0, t0 + s, ..., always ending exactly at t1.
std::vector<double> sample_times(const IntegratorConfig& cfg);

// Drives y from t0 to t1, calling observer at each sample time (t0 included).
// Adaptive steps are clipped to land exactly on the sample times.
// Throws NumericalError when the adaptive step drops below 1e-14.
void integrate_observed(const Rhs& rhs, State y0, const IntegratorConfig& cfg, const Observer& observer);

// Records every state component as a column y0, y1, ... (or the given names).
TimeSeries integrate(const Rhs& rhs, const State& y0, const IntegratorConfig& cfg,
                     std::vector<std::string> names = {});

// Spectral decomposition M = T diag(lambda) T^-1 together with the expansion
// coefficients c = T^-1 r0 of an initial vector.
struct EigenModes {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd vectors;
  Eigen::VectorXcd coefficients;
  double condition = 0.0;

  // Contribution T(component, k) * c_k of every mode k to one component.
  Eigen::VectorXcd weights(Eigen::Index component) const;
  Eigen::VectorXd evaluate(double t) const;
};

// Throws Error when the eigenvector matrix has condition number >= 1e12.
EigenModes eigen_modes(const Eigen::MatrixXd& m, const Eigen::VectorXd& r0);

// r(t) = T diag(exp(lambda t)) T^-1 r0 at each requested time.
TimeSeries eig_propagate(const Eigen::MatrixXd& m, const Eigen::VectorXd& r0, const std::vector<double>& times,
                         std::vector<std::string> names = {});

}  // namespace qdlab
