#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qdlab/error.hpp"
#include "qdlab/lindblad.hpp"

using namespace qdlab;

namespace {

DensityMatrix random_density(const BasisSpec& basis, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const auto d = static_cast<Eigen::Index>(basis.dim());
  CMatrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(normal(rng), normal(rng));
  }
  CMatrix rho = a * a.adjoint();
  return DensityMatrix(basis, rho / rho.trace());
}

// Textbook single-channel form L rho L^dagger - {L^dagger L, rho} / 2.
CMatrix lindblad_term(const CMatrix& l, const CMatrix& rho) {
  const CMatrix ll = l.adjoint() * l;
  return l * rho * l.adjoint() - 0.5 * (ll * rho + rho * ll);
}

DephasingParams lossy(Variant v) {
  DephasingParams p;
  p.Gamma = 0.3;
  p.beta = 0.25;
  p.variant = v;
  return p;
}

IntegratorConfig span(double t1, double every) {
  IntegratorConfig cfg;
  cfg.t1 = t1;
  cfg.sample_every = every;
  return cfg;
}

}  // namespace

TEST_CASE("photon decay rate") {
  const auto basis = sjcm_basis(1);
  const double kappa = 0.7;
  const auto spec = CollapseSpec::diagonal({"b"}, {photon_annihilator(basis)}, {kappa});
  const auto rho = diagonal_product_state(basis, {1, 0, 0, 0}, {0, 1});
  const DensityMatrix d(basis, dissipator(rho, spec));
  CHECK(std::abs(expectation(d, photon_number(basis)) + kappa) < 1e-14);
}

TEST_CASE("diagonal rate matrix matches independent channels") {
  const auto basis = dephasing_basis(2);
  const auto lg = transition_operator(basis, "G", "Xp");
  const auto lx = transition_operator(basis, "Xs", "XX");
  CollapseSpec spec;
  spec.labels = {"L_G", "L_X"};
  spec.ops = {lg, lx};
  spec.gamma = CMatrix::Zero(2, 2);
  spec.gamma(0, 0) = 0.3;
  spec.gamma(1, 1) = 0.8;
  std::mt19937_64 rng(3);
  for (int k = 0; k < 5; ++k) {
    const auto rho = random_density(basis, rng);
    const CMatrix expected = 0.3 * lindblad_term(lg.elements, rho.elements) + 0.8 * lindblad_term(lx.elements, rho.elements);
    const CMatrix d = dissipator(rho, spec);
    CHECK((d - expected).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(d.trace()) < 1e-14);
    CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("rank one rate matrix equals the summed operator") {
  const auto basis = dephasing_basis(2);
  CollapseSpec pair;
  pair.labels = {"L_G", "L_X"};
  pair.ops = {transition_operator(basis, "G", "Xp"), transition_operator(basis, "Xs", "XX")};
  pair.gamma = CMatrix::Constant(2, 2, 0.45);
  const auto single = CollapseSpec::diagonal({"L_sp"}, {pair_annihilator(basis, Shell::p)}, {0.45});
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const auto rho = random_density(basis, rng);
    CHECK((dissipator(rho, pair) - dissipator(rho, single)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rate matrix validation") {
  const auto basis = dephasing_basis(1);
  CollapseSpec spec;
  spec.labels = {"a", "b"};
  spec.ops = {transition_operator(basis, "G", "Xp"), transition_operator(basis, "Xs", "XX")};
  spec.gamma = CMatrix::Zero(2, 2);
  spec.gamma << 0.3, 0.5, 0.5, 0.3;  // eigenvalues 0.8, -0.2
  CHECK_THROWS_AS(spec.validate(), Error);
  const auto warning = spec.validate(PsdPolicy::warn);
  REQUIRE(warning.has_value());
  CHECK(warning->find("positive semidefinite") != std::string::npos);

  spec.gamma << 0.3, 0.1, 0.2, 0.3;
  CHECK_THROWS_AS(spec.validate(PsdPolicy::warn), Error);  // not Hermitian
  spec.gamma << -0.1, 0.0, 0.0, 0.3;
  CHECK_THROWS_AS(spec.validate(PsdPolicy::warn), Error);
  spec.gamma = CMatrix::Zero(3, 3);
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("dephasing model channels") {
  DephasingParams p;
  p.variant = Variant::single_particle;
  const auto sp = build_dephasing_model(p);
  REQUIRE(sp.collapse.ops.size() == 1);
  CHECK((sp.collapse.ops[0].elements - pair_annihilator(dephasing_basis(2), Shell::p).elements).norm() == 0.0);

  p.variant = Variant::configuration;
  const auto config = build_dephasing_model(p);
  REQUIRE(config.collapse.ops.size() == 2);
  CHECK(config.collapse.gamma(0, 0) == cplx(p.Gamma));
  CHECK(config.collapse.gamma(1, 1) == cplx(p.Gamma));
  CHECK(config.collapse.gamma(0, 1) == cplx(0.0));

  p.p_loss = Eigen::Matrix2d::Constant(p.Gamma);
  const auto local = build_dephasing_model(p);
  CHECK(local.collapse.gamma(0, 1) == cplx(p.Gamma));
  CHECK_THROWS_AS(build_M(p), Error);
}

TEST_CASE("closed dynamics are variant independent") {
  DephasingParams p;
  p.Gamma = 0.0;
  p.variant = Variant::single_particle;
  const auto a = evolve_dephasing(p, span(10.0, 0.5)).series;
  p.variant = Variant::configuration;
  const auto b = evolve_dephasing(p, span(10.0, 0.5)).series;
  CHECK(a == b);
  // pure s-pair Rabi flopping from the biexciton
  const auto& g1 = a.column("G1");
  const auto& xx = a.column("XX0");
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(g1[i] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(xx[i] + a.column("Xp1")[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rate matrix entries") {
  for (auto v : {Variant::single_particle, Variant::configuration}) {
    const auto m = build_M(lossy(v));
    CHECK(m(0, 0) == doctest::Approx(-0.55));
    CHECK(m(1, 0) == doctest::Approx(-0.5));
    CHECK(m(2, 1) == doctest::Approx(-1.0));
    CHECK(m(4, 1) == (v == Variant::single_particle ? 0.3 : 0.0));
  }
  DephasingParams pumped;
  pumped.P = 0.1;
  CHECK_THROWS_AS(build_M(pumped), Error);
}

TEST_CASE("linear equations conserve probability and decay the p shell") {
  for (auto v : {Variant::single_particle, Variant::configuration}) {
    auto p = lossy(v);
    p.beta = 0.0;
    const auto s = evolve_M(p, span(20.0, 0.25));
    for (std::size_t i = 0; i < s.size(); ++i) {
      double total = 0.0;
      for (const char* c : {"XX0", "Xp1", "Xs0", "G1", "Xp0", "G0"}) total += s.column(c)[i];
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
    const auto one = evolve_M(p, span(1.0, 1.0));
    CHECK(one.column("n_e_p").back() == doctest::Approx(0.74082).epsilon(1e-5));
  }
}

TEST_CASE("eigendecomposition reproduces the linear equations") {
  for (auto v : {Variant::single_particle, Variant::configuration}) {
    auto p = lossy(v);
    p.beta = 0.0;
    auto cfg = span(30.0, 0.5);
    cfg.rtol = 1e-11;
    cfg.atol = 1e-13;
    const auto ode = evolve_M(p, cfg);
    const auto eig = analytic_beta0(p, ode.times());
    for (const char* c : {"XX0", "psi_X0", "Xp1", "Xs0", "psi_s0", "G1"}) {
      for (std::size_t i = 0; i < ode.size(); ++i) {
        CHECK(std::abs(ode.column(c)[i] - eig.column(c)[i]) < 1e-9);
      }
    }
  }
}

TEST_CASE("oscillating mode weights of Xs0") {
  const double g = 0.5;
  const double omega = 2.0 * g;
  for (double gamma : {0.1, 0.3, 2.0}) {
    auto weight_at = [&](Variant v) {
      DephasingParams p;
      p.g = g;
      p.Gamma = gamma;
      p.variant = v;
      const auto modes = beta0_modes(p);
      Eigen::Index best = 0;
      for (Eigen::Index k = 1; k < modes.eigenvalues.size(); ++k) {
        if (std::abs(modes.eigenvalues(k) - cplx(0, omega)) < std::abs(modes.eigenvalues(best) - cplx(0, omega))) {
          best = k;
        }
      }
      CHECK(std::abs(modes.eigenvalues(best) - cplx(0, omega)) < 1e-9);
      return modes.weights(3)(best);
    };
    const cplx sp = weight_at(Variant::single_particle);
    const cplx config = weight_at(Variant::configuration);
    CHECK(std::abs(sp - 0.25) < 1e-10);
    const cplx expected = 0.125 * (gamma / cplx(gamma, 2.0 * omega) + 1.0);
    CHECK(std::abs(config - expected) < 1e-10);
    CHECK(std::abs(config / sp - 0.5 * (gamma / cplx(gamma, 2.0 * omega) + 1.0)) < 1e-9);
  }
}

TEST_CASE("asymptotic amplitude") {
  CHECK(asymptotic_amplitude(1.0) == doctest::Approx(std::sqrt(10.0) / 10.0).epsilon(1e-14));
  CHECK(asymptotic_amplitude(1e-6) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(asymptotic_amplitude(1e6) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(asymptotic_amplitude(0.3) == doctest::Approx(0.2581).epsilon(1e-3));
}

TEST_CASE("amplitude measurement") {
  const double period = std::numbers::pi / 0.5;
  TimeSeries s({"x", "flat"});
  for (int i = 0; i <= 200 * 10; ++i) {
    const double t = i * period / 200.0;
    s.push_row(t, {0.3 * std::sin(2.0 * std::numbers::pi * t / period + 0.4) + 0.5, 0.7});
  }
  CHECK(measure_amplitude(s, "x", 5.0 * period, period) == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(measure_amplitude(s, "flat", 5.0 * period, period) == 0.0);
  CHECK_THROWS_AS(measure_amplitude(s, "x", 8.0 * period, period), Error);
}

TEST_CASE("late amplitude at Gamma / 2g = 0.3") {
  DephasingParams p;
  p.Gamma = 0.3;
  const auto r = dephasing_amplitude(p);
  CHECK(std::abs(r.measured - asymptotic_amplitude(0.3)) / asymptotic_amplitude(0.3) < 0.01);
  p.variant = Variant::single_particle;
  CHECK(dephasing_amplitude(p).measured == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("pump off reduces to the plain evolution") {
  DephasingParams p;
  p.Gamma = 0.3;
  const auto pumped = pumped_scenario(p, {}, 20.0);
  auto cfg = amplitude_config(p, 20.0);
  CHECK(pumped.series == evolve_dephasing(p, cfg).series);
}

TEST_CASE("health abort") {
  DephasingParams p;
  p.Gamma = 0.3;
  p.p_loss = Eigen::Matrix2d();
  *p.p_loss << 0.3, 0.5, 0.5, 0.3;
  CHECK_THROWS_AS(evolve_dephasing(p, span(5.0, 0.05)), Error);
  p.psd = PsdPolicy::warn;
  CHECK_THROWS_AS(evolve_dephasing(p, span(5.0, 0.05)), NumericalError);
}

TEST_CASE("truncation leak monitor") {
  const auto basis = sjcm_basis(1);
  const auto rho = diagonal_product_state(basis, {0.5, 0.5, 0, 0}, {0.0, 1.0});
  const MasterEquation eq(Operator(basis, CMatrix::Zero(8, 8)), CollapseSpec::none());
  const auto noop = [](double, const DensityMatrix&) {};
  CHECK_THROWS_AS(evolve_density(rho, eq, span(1.0, 0.5), noop, {}, {"Xs"}), NumericalError);
  CHECK_NOTHROW(evolve_density(rho, eq, span(1.0, 0.5), noop, {}, {"+s"}));
}
