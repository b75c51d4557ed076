#include "povmlab/bounds.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace povmlab {

namespace {

// sigma^{-1/2}, rejecting numerically singular sigma.
Matrix inverse_sqrt_sigma(const HermitianOperator& sigma) {
  const auto ed = eig_hermitian(sigma);
  const double lowest = ed.eigenvalues(0);
  if (!(lowest > kSingularSigmaThreshold)) {
    throw SingularEnsembleError(
        fmt::format("average state is singular (minimum eigenvalue {:.3e})", lowest), lowest);
  }
  return ed.apply([](double r) { return 1.0 / std::sqrt(r); }).matrix();
}

// Both roots of alpha a^2 - 2 beta a + gamma = 0 in cancellation-free form.
// A round-off negative discriminant is treated as zero.
std::pair<double, double> quadratic_roots(double alpha, double beta, double gamma) {
  const double s = std::sqrt(std::max(beta * beta - alpha * gamma, 0.0));
  const double q = beta >= 0.0 ? beta + s : beta - s;
  if (q == 0.0) return {0.0, 0.0};
  const double r_small = gamma / q;
  const double r_large = alpha != 0.0 ? q / alpha : r_small;
  return {r_small, r_large};
}

struct Kernel {
  Matrix projector;
  int rank = 0;
};

// Eigenvectors with |mu| <= kKernelThreshold * max|mu|; a vanishing operator
// has the whole space as its kernel.
Kernel numerical_kernel(const HermitianOperator& op) {
  const auto ed = eig_hermitian(op);
  const double scale = ed.eigenvalues.cwiseAbs().maxCoeff();
  Kernel k{Matrix::Zero(op.dim(), op.dim()), 0};
  for (Eigen::Index i = 0; i < ed.eigenvalues.size(); ++i) {
    if (scale <= 1e-14 || std::abs(ed.eigenvalues(i)) <= kKernelThreshold * scale) {
      const auto v = ed.eigenvectors.col(i);
      k.projector += v * v.adjoint();
      ++k.rank;
    }
  }
  return k;
}

HermitianOperator plateau_operator(const StateEnsemble& e, const PlateauBound& b) {
  return b.prs_max * average_state(e) - e.priors[b.argmax_state] * e.states[b.argmax_state];
}

}  // namespace

PlateauBound max_relative_success(const StateEnsemble& e) {
  require_valid(e);
  const Matrix w = inverse_sqrt_sigma(average_state(e));

  PlateauBound b;
  for (std::size_t j = 0; j < e.size(); ++j) {
    const auto whitened = congruence(w, e.states[j]);
    b.per_state_a.push_back(e.priors[j] * max_eigenvalue(whitened));
  }
  const auto top = std::max_element(b.per_state_a.begin(), b.per_state_a.end());
  b.argmax_state = static_cast<std::size_t>(top - b.per_state_a.begin());
  b.prs_max = *top;

  b.kernel_dimension = numerical_kernel(plateau_operator(e, b)).rank;
  return b;
}

double qubit_quadratic_a(const StateEnsemble& e, std::size_t j) {
  require_valid(e);
  if (e.dim() != 2) {
    throw ValidationError(fmt::format("qubit_quadratic_a needs dim 2, got {}", e.dim()));
  }
  if (j >= e.size()) throw ValidationError(fmt::format("state index {} out of range", j));
  const auto sigma = average_state(e);
  const Matrix w = inverse_sqrt_sigma(sigma);

  const double p = e.priors[j];
  const double s2 = trace_product(sigma, sigma);
  const double s_rho = trace_product(sigma, e.states[j]);
  const double rho2 = trace_product(e.states[j], e.states[j]);
  // (1 - s2) a^2 - 2 p (1 - s_rho) a + p^2 (1 - rho2) = 0
  const auto [r1, r2] = quadratic_roots(1.0 - s2, p * (1.0 - s_rho), p * p * (1.0 - rho2));

  const double eig_route = p * max_eigenvalue(congruence(w, e.states[j]));
  const double chosen = std::abs(r1 - eig_route) < std::abs(r2 - eig_route) ? r1 : r2;
  if (std::abs(chosen - eig_route) > 1e-8) {
    throw std::logic_error(fmt::format(
        "quadratic roots {:.17g}, {:.17g} do not match eigenvalue route {:.17g}", r1, r2,
        eig_route));
  }
  return chosen;
}

double prs_max_from_invariants(double purity, double overlap) {
  constexpr double slack = 1e-12;  // rounding in Tr[rho^2]
  if (!(purity >= 0.5 - slack && purity <= 1.0 + slack)) {
    throw ValidationError(fmt::format("purity must lie in [1/2, 1], got {}", purity));
  }
  if (!(overlap <= purity + slack)) {
    throw ValidationError(fmt::format("overlap {} exceeds purity {}", overlap, purity));
  }
  purity = std::clamp(purity, 0.5, 1.0);
  overlap = std::min(overlap, purity);
  const double denom = 2.0 - purity - overlap;
  if (!(denom > 0.0)) {
    throw ValidationError("2 - purity - overlap must be positive");
  }
  return 0.5 * (1.0 + std::sqrt((purity - overlap) / denom));
}

HermitianOperator plateau_povm_direction(const StateEnsemble& e, const PlateauBound& bound) {
  require_valid(e);
  if (bound.argmax_state >= e.size()) {
    throw InconsistentBoundError("bound refers to a state outside the ensemble");
  }
  const auto kernel = numerical_kernel(plateau_operator(e, bound));
  if (kernel.rank == 0) {
    throw InconsistentBoundError(fmt::format(
        "no kernel for state {} at a = {:.17g}", bound.argmax_state, bound.prs_max));
  }
  return HermitianOperator::hermitian_part(kernel.projector);
}

}  // namespace povmlab
