#include "qdlab/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "qdlab/error.hpp"

namespace qdlab {

BasisSpec::BasisSpec(int n_max, std::vector<std::string> config_labels)
    : n_max_(n_max), labels_(std::move(config_labels)) {
  if (n_max_ < 0) throw Error("basis: n_max must be >= 0, got " + std::to_string(n_max_));
  if (labels_.empty()) throw Error("basis: at least one configuration label is required");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw Error("basis: configuration labels must be nonempty");
    if (!seen.insert(l).second) throw Error("basis: duplicate configuration label '" + l + "'");
  }
}

std::size_t BasisSpec::config_index(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw Error("unknown configuration label '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

bool BasisSpec::has_label(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t BasisSpec::index(int n, std::size_t config) const {
  if (n < 0 || n > n_max_) throw Error("photon number " + std::to_string(n) + " outside [0, n_max]");
  if (config >= labels_.size()) throw Error("configuration index out of range");
  return static_cast<std::size_t>(n) * labels_.size() + config;
}

std::size_t BasisSpec::index(int n, std::string_view label) const { return index(n, config_index(label)); }

BasisSpec sjcm_basis(int n_max) { return BasisSpec(n_max, {"G", "Xs", "+s", "-s"}); }

BasisSpec dephasing_basis(int n_max) { return BasisSpec(n_max, {"G", "Xs", "Xp", "XX"}); }

namespace {

void require_square(const BasisSpec& basis, const CMatrix& m, const char* what) {
  const auto d = static_cast<Eigen::Index>(basis.dim());
  if (m.rows() != d || m.cols() != d) {
    throw Error(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                std::to_string(m.cols()) + ", basis dimension is " + std::to_string(d));
  }
}

void require_same_basis(const BasisSpec& a, const BasisSpec& b, const char* what) {
  if (!(a == b)) throw Error(std::string(what) + ": basis mismatch");
}

}  // namespace

Operator::Operator(BasisSpec b, CMatrix m) : basis(std::move(b)), elements(std::move(m)) {
  require_square(basis, elements, "operator");
}

Operator Operator::adjoint() const { return Operator(basis, elements.adjoint()); }

Operator operator+(const Operator& a, const Operator& b) {
  require_same_basis(a.basis, b.basis, "operator sum");
  return Operator(a.basis, a.elements + b.elements);
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_basis(a.basis, b.basis, "operator product");
  return Operator(a.basis, a.elements * b.elements);
}

Operator operator*(cplx s, const Operator& a) { return Operator(a.basis, s * a.elements); }

DensityMatrix::DensityMatrix(BasisSpec b, CMatrix m) : basis(std::move(b)), elements(std::move(m)) {
  require_square(basis, elements, "density matrix");
}

Operator identity(const BasisSpec& basis) {
  const auto d = static_cast<Eigen::Index>(basis.dim());
  return Operator(basis, CMatrix::Identity(d, d));
}

Operator tensor(const BasisSpec& basis, const CMatrix& photon_op, const CMatrix& config_op) {
  const auto np = static_cast<Eigen::Index>(basis.photon_dim());
  const auto nc = static_cast<Eigen::Index>(basis.num_configs());
  if (photon_op.rows() != np || photon_op.cols() != np) {
    throw Error("tensor: photon factor must be " + std::to_string(np) + "x" + std::to_string(np));
  }
  if (config_op.rows() != nc || config_op.cols() != nc) {
    throw Error("tensor: configuration factor must be " + std::to_string(nc) + "x" + std::to_string(nc));
  }
  CMatrix out = CMatrix::Zero(np * nc, np * nc);
  for (Eigen::Index n = 0; n < np; ++n) {
    for (Eigen::Index m = 0; m < np; ++m) {
      if (photon_op(n, m) == cplx(0.0)) continue;
      out.block(n * nc, m * nc, nc, nc) = photon_op(n, m) * config_op;
    }
  }
  return Operator(basis, std::move(out));
}

Operator photon_annihilator(const BasisSpec& basis) {
  const auto np = static_cast<Eigen::Index>(basis.photon_dim());
  const auto nc = static_cast<Eigen::Index>(basis.num_configs());
  CMatrix b = CMatrix::Zero(np, np);
  for (Eigen::Index n = 1; n < np; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
  return tensor(basis, b, CMatrix::Identity(nc, nc));
}

Operator photon_number(const BasisSpec& basis) {
  const auto b = photon_annihilator(basis);
  return b.adjoint() * b;
}

Operator transition_operator(const BasisSpec& basis, std::string_view i, std::string_view j) {
  const auto np = static_cast<Eigen::Index>(basis.photon_dim());
  const auto nc = static_cast<Eigen::Index>(basis.num_configs());
  CMatrix c = CMatrix::Zero(nc, nc);
  c(static_cast<Eigen::Index>(basis.config_index(i)), static_cast<Eigen::Index>(basis.config_index(j))) = 1.0;
  return tensor(basis, CMatrix::Identity(np, np), c);
}

Operator projector(const BasisSpec& basis, std::string_view label) {
  return transition_operator(basis, label, label);
}

Operator pair_annihilator(const BasisSpec& basis, Shell shell) {
  const std::vector<std::string> expected{"G", "Xs", "Xp", "XX"};
  std::vector<std::string> have = basis.labels();
  std::vector<std::string> want = expected;
  std::sort(have.begin(), have.end());
  std::sort(want.begin(), want.end());
  if (have != want) throw Error("pair_annihilator: requires the configuration basis {G, Xs, Xp, XX}");
  if (shell == Shell::p) return transition_operator(basis, "G", "Xp") + transition_operator(basis, "Xs", "XX");
  return transition_operator(basis, "G", "Xs") + transition_operator(basis, "Xp", "XX");
}

cplx expectation(const DensityMatrix& rho, const Operator& op) {
  require_same_basis(rho.basis, op.basis, "expectation");
  // Tr(rho op) without forming the product.
  return (rho.elements.transpose().cwiseProduct(op.elements)).sum();
}

double population(const DensityMatrix& rho, int n, std::string_view label) {
  const auto k = static_cast<Eigen::Index>(rho.basis.index(n, label));
  return rho.elements(k, k).real();
}

cplx coherence(const DensityMatrix& rho, int n1, std::string_view c1, int n2, std::string_view c2) {
  return rho.elements(static_cast<Eigen::Index>(rho.basis.index(n1, c1)),
                      static_cast<Eigen::Index>(rho.basis.index(n2, c2)));
}

HealthReport validate_density(const DensityMatrix& rho) {
  HealthReport r;
  r.trace_error = std::abs(rho.elements.trace() - cplx(1.0));
  r.hermiticity_error = (rho.elements - rho.elements.adjoint()).cwiseAbs().maxCoeff();
  const CMatrix herm = 0.5 * (rho.elements + rho.elements.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

DensityMatrix diagonal_product_state(const BasisSpec& basis, const std::vector<double>& config_weights,
                                     const std::vector<double>& photon_dist) {
  if (config_weights.size() != basis.num_configs()) {
    throw Error("product state: expected " + std::to_string(basis.num_configs()) + " configuration weights");
  }
  if (photon_dist.size() > basis.photon_dim()) {
    throw Error("product state: photon distribution exceeds the Fock cutoff");
  }
  const auto d = static_cast<Eigen::Index>(basis.dim());
  CMatrix m = CMatrix::Zero(d, d);
  for (std::size_t n = 0; n < photon_dist.size(); ++n) {
    for (std::size_t c = 0; c < config_weights.size(); ++c) {
      const auto k = static_cast<Eigen::Index>(basis.index(static_cast<int>(n), c));
      m(k, k) = photon_dist[n] * config_weights[c];
    }
  }
  return DensityMatrix(basis, std::move(m));
}

double top_level_occupation(const DensityMatrix& rho, const std::vector<std::string>& labels) {
  const auto& basis = rho.basis;
  double sum = 0.0;
  if (labels.empty()) {
    for (std::size_t c = 0; c < basis.num_configs(); ++c) {
      const auto k = static_cast<Eigen::Index>(basis.index(basis.n_max(), c));
      sum += rho.elements(k, k).real();
    }
  } else {
    for (const auto& l : labels) sum += population(rho, basis.n_max(), l);
  }
  return sum;
}

}  // namespace qdlab
