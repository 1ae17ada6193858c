#include "qdlab/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "qdlab/error.hpp"

namespace qdlab {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kMinStep = 1e-14;

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) names.push_back("y" + std::to_string(i));
  return names;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(t1 > t0)) throw Error("integrator: t1 must exceed t0");
  if (!(sample_every > 0.0)) throw Error("integrator: sample_every must be positive");
  if (method == Method::rk4_fixed && !(dt > 0.0)) throw Error("integrator: dt must be positive");
  if (method == Method::rk45_adaptive && !(rtol > 0.0 && atol > 0.0)) {
    throw Error("integrator: rtol and atol must be positive");
  }
}

double default_fixed_step(double g) { return 0.001 * std::numbers::pi / g; }

std::vector<double> sample_times(const IntegratorConfig& cfg) {
  cfg.validate();
  const double span = cfg.t1 - cfg.t0;
  const auto count = static_cast<long>(std::floor(span / cfg.sample_every + 1e-9));
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(count) + 2);
  for (long k = 0; k <= count; ++k) ts.push_back(cfg.t0 + static_cast<double>(k) * cfg.sample_every);
  if (cfg.t1 - ts.back() > 1e-12 * span) {
    ts.push_back(cfg.t1);
  } else {
    ts.back() = cfg.t1;
  }
  return ts;
}

void integrate_observed(const Rhs& rhs, State y, const IntegratorConfig& cfg, const Observer& observer) {
  const auto ts = sample_times(cfg);
  auto system = [&rhs](const State& x, State& dxdt, double t) { rhs(x, dxdt, t); };
  double t = ts.front();
  observer(t, y);

  if (cfg.method == Method::rk4_fixed) {
    odeint::runge_kutta4<State> stepper;
    for (std::size_t k = 1; k < ts.size(); ++k) {
      const double target = ts[k];
      const double interval = target - t;
      const auto steps = std::max<long>(1, static_cast<long>(std::ceil(interval / cfg.dt - 1e-9)));
      const double h = interval / static_cast<double>(steps);
      for (long s = 0; s < steps; ++s) {
        stepper.do_step(system, y, t, h);
        t += h;
      }
      t = target;
      observer(t, y);
    }
    return;
  }

  auto stepper = odeint::make_controlled(cfg.atol, cfg.rtol, odeint::runge_kutta_dopri5<State>());
  double dt_try = std::min(cfg.sample_every, cfg.t1 - cfg.t0) * 1e-2;
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double target = ts[k];
    while (t < target) {
      double h = dt_try;
      const bool clipped = t + h >= target;
      if (clipped) h = target - t;
      const double t_before = t;
      const auto result = stepper.try_step(system, y, t, h);
      if (result == odeint::success) {
        if (clipped) {
          t = target;
        } else {
          dt_try = h;
        }
      } else {
        dt_try = h;
        if (h < kMinStep) {
          std::ostringstream msg;
          msg << "integrator: adaptive step underflow (dt = " << h << " < 1e-14) at t = " << t_before
              << "; the system may be stiff or singular";
          throw NumericalError(msg.str());
        }
      }
    }
    observer(t, y);
  }
}

TimeSeries integrate(const Rhs& rhs, const State& y0, const IntegratorConfig& cfg, std::vector<std::string> names) {
  if (names.empty()) names = default_names(y0.size());
  if (names.size() != y0.size()) throw Error("integrate: one column name per state component is required");
  TimeSeries series(std::move(names));
  integrate_observed(rhs, y0, cfg, [&series](double t, const State& y) { series.push_row(t, y); });
  return series;
}

Eigen::VectorXcd EigenModes::weights(Eigen::Index component) const {
  return vectors.row(component).transpose().cwiseProduct(coefficients);
}

Eigen::VectorXd EigenModes::evaluate(double t) const {
  Eigen::VectorXcd phases(eigenvalues.size());
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) phases(k) = std::exp(eigenvalues(k) * t) * coefficients(k);
  return (vectors * phases).real();
}

EigenModes eigen_modes(const Eigen::MatrixXd& m, const Eigen::VectorXd& r0) {
  if (m.rows() != m.cols()) throw Error("eig_propagate: matrix must be square");
  if (r0.size() != m.rows()) throw Error("eig_propagate: initial vector does not match matrix dimension");
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw Error("eig_propagate: eigendecomposition failed");
  EigenModes modes;
  modes.eigenvalues = es.eigenvalues();
  modes.vectors = es.eigenvectors();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(modes.vectors);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  modes.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(modes.condition < 1e12)) {
    std::ostringstream msg;
    msg << "eig_propagate: matrix is numerically defective (eigenvector condition number " << modes.condition
        << "); integrate the system with the ODE path instead";
    throw Error(msg.str());
  }
  modes.coefficients = modes.vectors.partialPivLu().solve(r0.cast<std::complex<double>>());
  return modes;
}

TimeSeries eig_propagate(const Eigen::MatrixXd& m, const Eigen::VectorXd& r0, const std::vector<double>& times,
                         std::vector<std::string> names) {
  const auto modes = eigen_modes(m, r0);
  if (names.empty()) names = default_names(static_cast<std::size_t>(r0.size()));
  if (names.size() != static_cast<std::size_t>(r0.size())) {
    throw Error("eig_propagate: one column name per component is required");
  }
  TimeSeries series(std::move(names));
  std::vector<double> row(static_cast<std::size_t>(r0.size()));
  for (double t : times) {
    const Eigen::VectorXd r = modes.evaluate(t);
    std::copy(r.data(), r.data() + r.size(), row.begin());
    series.push_row(t, row);
  }
  return series;
}

}  // namespace qdlab
