#include "povmlab/qubit_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace povmlab::qubit {

namespace {

constexpr double kPi = std::numbers::pi;

void require_phi(double phi) {
  if (!(phi >= kPi / 2 && phi < kPi)) {
    throw ValidationError(fmt::format("phi must lie in [pi/2, pi), got {}", phi));
  }
}

double inv_tan2_half(double phi) {
  const double t = std::tan(phi / 2);
  return 1.0 / (t * t);
}

}  // namespace

SymmetricQubitProblem::SymmetricQubitProblem(double eta, double theta) : eta_(eta), theta_(theta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw ValidationError(fmt::format("eta must lie in (0, 1], got {}", eta));
  }
  if (!(theta > 0.0 && theta < kPi / 2)) {
    throw ValidationError(fmt::format("theta must lie in (0, pi/2), got {}", theta));
  }
}

double SymmetricQubitProblem::pi_supremum() const {
  return 0.5 * (1.0 + eta_ * std::cos(theta_));
}

Povm analytic_povm(const SymmetricQubitProblem& /*p*/, double phi) {
  require_phi(phi);
  const double s = std::sin(phi / 2);
  const double weight = 1.0 / (2.0 * s * s);
  Vector ket0 = Vector::Zero(2);
  ket0(0) = 1.0;
  // at phi = pi/2 the coefficient is exactly zero up to tan rounding
  const double c0 = std::max(0.0, 1.0 - inv_tan2_half(phi));

  Povm povm;
  povm.elements.push_back(c0 * HermitianOperator::projector(ket0));
  for (int sign : {+1, -1}) {
    povm.elements.push_back(weight * HermitianOperator::projector(symmetric_qubit_ket(phi, sign)));
  }
  return povm;
}

double analytic_prs(const SymmetricQubitProblem& p, double phi) {
  require_phi(phi);
  const double eta = p.eta();
  const double theta = p.theta();
  return (1.0 + eta * std::cos(phi - theta)) /
         (2.0 * (1.0 + eta * std::cos(theta) * std::cos(phi)));
}

double analytic_pi(const SymmetricQubitProblem& p, double phi) {
  require_phi(phi);
  return std::max(0.0, p.pi_supremum() * (1.0 - inv_tan2_half(phi)));
}

Plateau phi_max_and_prs_max(const SymmetricQubitProblem& p) {
  const double eta = p.eta();
  const double c = eta * std::cos(p.theta());
  const double phi_max = std::acos(-c);
  const double prs_max = 0.5 * (1.0 + eta * std::sin(p.theta()) / std::sqrt(1.0 - c * c));
  return {phi_max, prs_max, analytic_pi(p, phi_max)};
}

double phi_for_pi(const SymmetricQubitProblem& p, double target_pi, Clamp clamp) {
  if (!(target_pi >= 0.0)) {
    throw ValidationError(fmt::format("target inconclusive rate {} is negative", target_pi));
  }
  if (clamp == Clamp::ToPlateau) {
    const auto plateau = phi_max_and_prs_max(p);
    if (target_pi >= plateau.pi_onset) return plateau.phi_max;
  }
  const double sup = p.pi_supremum();
  if (!(target_pi < sup)) {
    throw InfeasibleTargetError(
        fmt::format("inconclusive rate {} is not below the analytic supremum {:.17g}", target_pi,
                    sup),
        target_pi, sup);
  }
  const double tan2 = 1.0 / (1.0 - target_pi / sup);
  return 2.0 * std::atan(std::sqrt(tan2));
}

double envelope_prs(const SymmetricQubitProblem& p, double target_pi) {
  if (!(target_pi >= 0.0 && target_pi < 1.0)) {
    throw ValidationError(fmt::format("target inconclusive rate must lie in [0, 1), got {}",
                                      target_pi));
  }
  const auto plateau = phi_max_and_prs_max(p);
  if (target_pi >= plateau.pi_onset) return plateau.prs_max;
  return analytic_prs(p, phi_for_pi(p, target_pi));
}

Povm envelope_povm(const SymmetricQubitProblem& p, double target_pi) {
  if (!(target_pi >= 0.0 && target_pi < 1.0)) {
    throw ValidationError(fmt::format("target inconclusive rate must lie in [0, 1), got {}",
                                      target_pi));
  }
  const auto plateau = phi_max_and_prs_max(p);
  if (target_pi < plateau.pi_onset) return analytic_povm(p, phi_for_pi(p, target_pi));

  Povm povm = analytic_povm(p, plateau.phi_max);
  const double scale = (1.0 - target_pi) / (1.0 - plateau.pi_onset);
  povm.elements[1] *= scale;
  povm.elements[2] *= scale;
  povm.elements[0] = HermitianOperator::identity(2) - povm.elements[1] - povm.elements[2];
  return povm;
}

}  // namespace povmlab::qubit
