#pragma once

#include <optional>
#include <vector>

#include "povmlab/ensemble.hpp"
#include "povmlab/solver.hpp"

namespace povmlab {

/// The scalar equation for a degenerates (P_I == Tr[sigma Pi_0^2]).
class SingularMultiplierError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kHelstromThreshold = 1e-12;
inline constexpr double kDefaultExtremalTolerance = 1e-8;
inline constexpr double kDefaultPositivityTolerance = 1e-9;

struct Multipliers {
  HermitianOperator lambda;
  /// Empty in the minimum-error case (P_I <= 1e-12), where Pi_0 carries no
  /// constraint.
  std::optional<double> a;
  /// Largest entry of the anti-Hermitian part removed from lambda.
  double hermiticity_residual = 0.0;
};

/// Lagrange multipliers implied by a candidate POVM:
///   a * P_I = sum_j p_j Tr[rho_j Pi_j Pi_0] + a Tr[sigma Pi_0 Pi_0]
///   lambda  = sum_j p_j rho_j Pi_j + a sigma Pi_0   (Hermitian part)
Multipliers multipliers_from_povm(const StateEnsemble& e, const Povm& povm);

/// Same lambda with a given multiplier a. Used when the scalar equation
/// leaves a undetermined, e.g. when Pi_0 is a projector.
Multipliers multipliers_with_a(const StateEnsemble& e, const Povm& povm, double a);

/// The a in [0, 1] with the largest positivity margin for lambda(a) above.
/// An optimal dual multiplier never exceeds the relative success rate, so the
/// interval covers every certificate.
double max_margin_multiplier(const StateEnsemble& e, const Povm& povm);

/// Optimality evidence for a candidate POVM.
///
/// extremal_residuals[j] is ||(lambda - p_j rho_j) Pi_j||_F for j >= 1 and
/// ||(lambda - a sigma) Pi_0||_F for j = 0. positivity_margins[j] is the
/// smallest eigenvalue of the corresponding operator; margin 0 is empty when
/// a is not applicable. The POVM is certified when every residual is at most
/// tol_e and every margin is at least -tol_p; the optimum then equals
/// dual_bound = Tr[lambda] - a P_I.
struct Certificate {
  HermitianOperator lambda;
  std::optional<double> a;
  std::vector<double> extremal_residuals;
  std::vector<std::optional<double>> positivity_margins;
  double success_rate = 0.0;
  double inconclusive_rate = 0.0;
  double dual_bound = 0.0;
  double hermiticity_residual = 0.0;
  double tol_e = kDefaultExtremalTolerance;
  double tol_p = kDefaultPositivityTolerance;
  bool optimal = false;

  double max_residual() const;
  double min_margin() const;  // +inf when every margin is empty
  double duality_gap() const { return dual_bound - success_rate; }
};

/// Multipliers come from multipliers_from_povm. When those fail to certify,
/// or a is undetermined, max_margin_multiplier is tried as well.
Certificate check(const StateEnsemble& e, const Povm& povm,
                  double tol_e = kDefaultExtremalTolerance,
                  double tol_p = kDefaultPositivityTolerance);

/// Certificate for explicitly supplied multipliers.
Certificate check(const StateEnsemble& e, const Povm& povm, const Multipliers& m,
                  double tol_e = kDefaultExtremalTolerance,
                  double tol_p = kDefaultPositivityTolerance);


/// Upper bound on P_S for any POVM with inconclusive rate `pi`, given
/// multipliers whose positivity conditions hold: Tr[lambda] - a * pi.
double dual_bound(const Multipliers& m, double pi);

}  // namespace povmlab
