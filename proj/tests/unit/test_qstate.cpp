#include <doctest.h>

#include <cmath>
#include <random>

#include "qdlab/error.hpp"
#include "qdlab/qstate.hpp"

using namespace qdlab;

namespace {

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("basis ordering is photon major") {
  const auto basis = sjcm_basis(2);
  CHECK(basis.dim() == 12);
  CHECK(basis.index(0, "G") == 0);
  CHECK(basis.index(1, "G") == 4);
  CHECK(basis.index(2, "-s") == 11);
  CHECK(basis.index(1, basis.config_index("Xs")) == 5);
  CHECK_THROWS_AS(basis.config_index("Xp"), Error);
  CHECK_THROWS_WITH_AS(transition_operator(basis, "G", "bogus"), doctest::Contains("bogus"), Error);
}

TEST_CASE("photon annihilator") {
  const auto basis = sjcm_basis(2);
  const auto b = photon_annihilator(basis);
  for (std::size_t c = 0; c < basis.num_configs(); ++c) {
    CHECK(b.elements(basis.index(0, c), basis.index(1, c)) == cplx(1.0));
    CHECK(std::abs(b.elements(basis.index(1, c), basis.index(2, c)) - std::sqrt(2.0)) < 1e-15);
    // b |0, c> = 0
    CHECK(b.elements.col(basis.index(0, c)).norm() == 0.0);
  }

  // [b, b^dagger] = 1 below the cutoff
  const CMatrix comm = b.elements * b.elements.adjoint() - b.elements.adjoint() * b.elements;
  const auto low = static_cast<Eigen::Index>(basis.index(basis.n_max(), 0));
  CHECK(max_abs(comm.topLeftCorner(low, low) - CMatrix::Identity(low, low)) < 1e-14);

  const auto n = photon_number(basis);
  CHECK(max_abs(n.elements - b.adjoint().elements * b.elements) < 1e-14);
}

TEST_CASE("transition operators") {
  const auto basis = dephasing_basis(1);
  for (const auto& i : basis.labels()) {
    for (const auto& j : basis.labels()) {
      CHECK(max_abs(transition_operator(basis, i, j).adjoint().elements -
                    transition_operator(basis, j, i).elements) == 0.0);
    }
  }
  const auto lg = transition_operator(basis, "G", "Xp");
  CHECK(max_abs((lg * lg).elements) == 0.0);
  const auto pg = transition_operator(basis, "G", "G");
  CHECK(max_abs((pg * pg).elements - pg.elements) == 0.0);
  CHECK(max_abs(pg.elements - projector(basis, "G").elements) == 0.0);
}

TEST_CASE("pair annihilators") {
  const auto basis = dephasing_basis(2);
  const auto p = pair_annihilator(basis, Shell::p);
  const auto s = pair_annihilator(basis, Shell::s);
  CHECK(max_abs(p.elements - (transition_operator(basis, "G", "Xp") + transition_operator(basis, "Xs", "XX")).elements) ==
        0.0);
  CHECK(max_abs((p * p).elements) == 0.0);
  CHECK(max_abs((p * s).elements - (s * p).elements) == 0.0);
  // s removes the s pair from the biexciton
  for (int n = 0; n <= 2; ++n) {
    Eigen::VectorXcd xx = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dim()));
    xx(static_cast<Eigen::Index>(basis.index(n, "XX"))) = 1.0;
    const Eigen::VectorXcd out = s.elements * xx;
    CHECK(out(static_cast<Eigen::Index>(basis.index(n, "Xp"))) == cplx(1.0));
    CHECK(std::abs(out.norm() - 1.0) < 1e-15);
  }
  CHECK_THROWS_AS(pair_annihilator(sjcm_basis(1), Shell::p), Error);
}

TEST_CASE("tensor product") {
  const auto basis = sjcm_basis(1);
  CHECK(max_abs(tensor(basis, CMatrix::Identity(2, 2), CMatrix::Identity(4, 4)).elements - identity(basis).elements) ==
        0.0);
  CHECK(tensor(basis, CMatrix::Identity(2, 2), CMatrix::Identity(4, 4)).elements.rows() == 8);

  // b^dagger (x) |Xs><G| against a hand-built coupling block
  const auto b3 = sjcm_basis(2);
  CMatrix bdag = CMatrix::Zero(3, 3);
  bdag(1, 0) = 1.0;
  bdag(2, 1) = std::sqrt(2.0);
  CMatrix xs_g = CMatrix::Zero(4, 4);
  xs_g(1, 0) = 1.0;
  CMatrix expected = CMatrix::Zero(12, 12);
  expected(static_cast<Eigen::Index>(b3.index(1, "Xs")), static_cast<Eigen::Index>(b3.index(0, "G"))) = 1.0;
  expected(static_cast<Eigen::Index>(b3.index(2, "Xs")), static_cast<Eigen::Index>(b3.index(1, "G"))) =
      std::sqrt(2.0);
  CHECK(max_abs(tensor(b3, bdag, xs_g).elements - expected) < 1e-15);
  CHECK(max_abs(tensor(b3, bdag, xs_g).elements -
                (photon_annihilator(b3).adjoint() * transition_operator(b3, "Xs", "G")).elements) < 1e-15);
}

TEST_CASE("expectation values") {
  const auto basis = dephasing_basis(1);
  const auto one_g = diagonal_product_state(basis, {1, 0, 0, 0}, {0, 1});
  CHECK(std::abs(expectation(one_g, photon_number(basis)) - 1.0) < 1e-15);

  const auto xx = diagonal_product_state(basis, {0, 0, 0, 1}, {1, 0});
  const auto es = projector(basis, "Xs") + projector(basis, "XX");
  CHECK(std::abs(expectation(xx, es) - 1.0) < 1e-15);

  const DensityMatrix mixed(basis, CMatrix::Identity(8, 8) / 8.0);
  CHECK(std::abs(expectation(mixed, identity(basis)) - 1.0) < 1e-15);
  CHECK_THROWS_AS(expectation(mixed, identity(sjcm_basis(1))), Error);
}

TEST_CASE("density validation") {
  const auto basis = sjcm_basis(1);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
  psi(1) = cplx(0.6, 0.0);
  psi(6) = cplx(0.0, 0.8);
  const DensityMatrix pure(basis, psi * psi.adjoint());
  const auto h = validate_density(pure);
  CHECK(h.trace_error < 1e-12);
  CHECK(h.hermiticity_error < 1e-12);
  CHECK(std::abs(h.min_eigenvalue) < 1e-12);

  DensityMatrix heavy = pure;
  heavy.elements *= 1.01;
  CHECK(std::abs(validate_density(heavy).trace_error - 0.01) < 1e-12);

  DensityMatrix skew = pure;
  skew.elements(0, 3) += 1e-5;
  CHECK(std::abs(validate_density(skew).hermiticity_error - 1e-5) < 1e-15);
}

TEST_CASE("top level occupation") {
  const auto basis = sjcm_basis(2);
  const auto rho = diagonal_product_state(basis, {0.25, 0.25, 0.25, 0.25}, {0.5, 0.3, 0.2});
  CHECK(std::abs(top_level_occupation(rho) - 0.2) < 1e-15);
  CHECK(std::abs(top_level_occupation(rho, {"Xs"}) - 0.05) < 1e-15);
  CHECK(std::abs(population(rho, 1, "+s") - 0.075) < 1e-15);
}
