#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qdlab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

// Product space Fock(0..n_max) x {configurations}. Photon-major ordering:
// index(n, c) = n * num_configs() + c.
class BasisSpec {
 public:
  BasisSpec(int n_max, std::vector<std::string> config_labels);

  int n_max() const { return n_max_; }
  std::size_t num_configs() const { return labels_.size(); }
  std::size_t photon_dim() const { return static_cast<std::size_t>(n_max_) + 1; }
  std::size_t dim() const { return photon_dim() * num_configs(); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Throws Error naming the label when it is not part of the basis.
  std::size_t config_index(std::string_view label) const;
  bool has_label(std::string_view label) const;
  std::size_t index(int n, std::size_t config) const;
  std::size_t index(int n, std::string_view label) const;

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;

 private:
  int n_max_;
  std::vector<std::string> labels_;
};

// Configuration sets used throughout the library.
BasisSpec sjcm_basis(int n_max);       // {G, Xs, +s, -s}
BasisSpec dephasing_basis(int n_max);  // {G, Xs, Xp, XX}

struct Operator {
  Operator(BasisSpec basis, CMatrix elements);

  BasisSpec basis;
  CMatrix elements;

  Operator adjoint() const;
};

Operator operator+(const Operator& a, const Operator& b);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(cplx s, const Operator& a);

// No trace/positivity enforcement on construction; see validate_density.
struct DensityMatrix {
  DensityMatrix(BasisSpec basis, CMatrix elements);

  BasisSpec basis;
  CMatrix elements;
};

struct HealthReport {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
};

Operator identity(const BasisSpec& basis);

// b on the photon factor, identity on configurations. b^dagger |n_max> = 0.
Operator photon_annihilator(const BasisSpec& basis);
Operator photon_number(const BasisSpec& basis);

// |i><j| on configurations, identity on photons.
Operator transition_operator(const BasisSpec& basis, std::string_view i, std::string_view j);
Operator projector(const BasisSpec& basis, std::string_view label);

enum class Shell { s, p };

// Pair removal h e for the given shell on the {G, Xs, Xp, XX} basis.
//   p: |G><Xp| + |Xs><XX|
//   s: |G><Xs| + |Xp><XX|
Operator pair_annihilator(const BasisSpec& basis, Shell shell);

// photon_op (photon_dim x photon_dim) kron config_op (num_configs x num_configs).
Operator tensor(const BasisSpec& basis, const CMatrix& photon_op, const CMatrix& config_op);

cplx expectation(const DensityMatrix& rho, const Operator& op);

// Occupation P(n, c) and the coherence rho[(n1,c1),(n2,c2)].
double population(const DensityMatrix& rho, int n, std::string_view label);
cplx coherence(const DensityMatrix& rho, int n1, std::string_view c1, int n2, std::string_view c2);

HealthReport validate_density(const DensityMatrix& rho);

// Product state sum_c weights[c] |c><c| (x) sum_n photons[n] |n><n|.
DensityMatrix diagonal_product_state(const BasisSpec& basis,
                                     const std::vector<double>& config_weights,
                                     const std::vector<double>& photon_dist);

// Summed occupation of the top photon level restricted to the given labels
// (all labels when empty). Used to detect truncation leaks.
double top_level_occupation(const DensityMatrix& rho, const std::vector<std::string>& labels = {});

}  // namespace qdlab
