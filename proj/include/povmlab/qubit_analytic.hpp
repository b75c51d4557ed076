#pragma once

#include "povmlab/ensemble.hpp"
#include "povmlab/solver.hpp"

namespace povmlab::qubit {

/// Two equal-prior qubit states eta |psi_{1,2}><psi_{1,2}| + (1 - eta)/2 * 1,
/// with |psi_{1,2}> = cos(theta/2)|0> +- sin(theta/2)|1>.
class SymmetricQubitProblem {
 public:
  /// eta in (0, 1], theta in (0, pi/2).
  SymmetricQubitProblem(double eta, double theta);

  double eta() const noexcept { return eta_; }
  double theta() const noexcept { return theta_; }

  StateEnsemble ensemble() const { return symmetric_qubit_pair(eta_, theta_); }
  /// Supremum of the analytic inconclusive rate, (1 + eta cos theta)/2.
  double pi_supremum() const;

 private:
  double eta_;
  double theta_;
};

/// Closed-form optimal measurement parameterized by phi in [pi/2, pi):
///   Pi_{1,2} = psi_{1,2}(phi) / (2 sin^2(phi/2)),
///   Pi_0     = (1 - 1/tan^2(phi/2)) |0><0|.
Povm analytic_povm(const SymmetricQubitProblem& p, double phi);

double analytic_prs(const SymmetricQubitProblem& p, double phi);
double analytic_pi(const SymmetricQubitProblem& p, double phi);

struct Plateau {
  double phi_max;
  double prs_max;
  double pi_onset;  // analytic_pi at phi_max
};

Plateau phi_max_and_prs_max(const SymmetricQubitProblem& p);

enum class Clamp { None, ToPlateau };

/// Inverse of analytic_pi on [pi/2, pi). With Clamp::ToPlateau, targets past
/// the plateau onset return phi_max instead of the raw inverse.
double phi_for_pi(const SymmetricQubitProblem& p, double target_pi, Clamp clamp = Clamp::None);

/// Optimal P_RS at a given inconclusive rate: the analytic curve up to the
/// plateau onset, prs_max beyond it.
double envelope_prs(const SymmetricQubitProblem& p, double target_pi);

/// An optimal POVM at any target in [0, 1). Past the onset the conclusive
/// elements of the phi_max measurement are scaled down and the remainder
/// moved to the inconclusive outcome.
Povm envelope_povm(const SymmetricQubitProblem& p, double target_pi);

}  // namespace povmlab::qubit
