#pragma once

#include <vector>

#include "povmlab/ensemble.hpp"

namespace povmlab {

/// sigma has no inverse, so the plateau formula does not apply.
class SingularEnsembleError : public std::runtime_error {
 public:
  SingularEnsembleError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// The plateau direction found no kernel at the expected multiplier.
class InconsistentBoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSingularSigmaThreshold = 1e-12;
inline constexpr double kKernelThreshold = 1e-9;

/// Largest relative success rate reachable at any inconclusive rate.
struct PlateauBound {
  double prs_max = 0.0;
  std::vector<double> per_state_a;  // p_j * max eig(sigma^{-1/2} rho_j sigma^{-1/2})
  std::size_t argmax_state = 0;
  /// Multiplicity of the zero eigenvalue of prs_max * sigma - p_j* rho_j.
  int kernel_dimension = 0;
};

PlateauBound max_relative_success(const StateEnsemble& e);

/// Root of (a - p_j)^2 = a^2 Tr[sigma^2] - 2 a p_j Tr[sigma rho_j] + p_j^2 Tr[rho_j^2]
/// that matches the eigenvalue route. Qubits only.
double qubit_quadratic_a(const StateEnsemble& e, std::size_t j);

/// Plateau value of the symmetric equal-prior qubit pair from its purity and
/// mutual overlap.
double prs_max_from_invariants(double purity, double overlap);

/// Projector onto the kernel of prs_max * sigma - p_j* rho_j*.
HermitianOperator plateau_povm_direction(const StateEnsemble& e, const PlateauBound& bound);

}  // namespace povmlab
