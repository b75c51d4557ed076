#pragma once

// Random ensembles and reference computations shared by the test binaries.
// Nothing here calls into the library's solver, certificate or bounds code.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "povmlab/ensemble.hpp"
#include "povmlab/hermitian.hpp"
#include "povmlab/solver.hpp"

namespace testing {

using povmlab::Complex;
using povmlab::HermitianOperator;
using povmlab::Matrix;
using povmlab::Povm;
using povmlab::StateEnsemble;

inline Matrix ginibre(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) g(r, c) = Complex(n(rng), n(rng));
  }
  return g;
}

/// Density matrix of rank `rank` (full rank when 0).
inline HermitianOperator random_state(std::mt19937_64& rng, Eigen::Index dim,
                                      Eigen::Index rank = 0) {
  const Matrix g = ginibre(rng, dim, rank > 0 ? rank : dim);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return HermitianOperator::hermitian_part(rho);
}

inline std::vector<double> random_priors(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& x : p) total += (x = 0.05 + ex(rng));
  for (auto& x : p) x /= total;
  return p;
}

inline StateEnsemble random_ensemble(std::mt19937_64& rng, std::size_t n, Eigen::Index dim,
                                     Eigen::Index rank = 0) {
  StateEnsemble e;
  e.priors = random_priors(rng, n);
  for (std::size_t j = 0; j < n; ++j) e.states.push_back(random_state(rng, dim, rank));
  return e;
}

/// Random POVM with `outcomes` elements: S^{-1/2} A_k S^{-1/2} with S = sum A_k.
inline Povm random_povm(std::mt19937_64& rng, std::size_t outcomes, Eigen::Index dim) {
  std::vector<Matrix> a;
  Matrix s = Matrix::Zero(dim, dim);
  for (std::size_t k = 0; k < outcomes; ++k) {
    const Matrix g = ginibre(rng, dim, dim);
    a.push_back(g * g.adjoint());
    s += a.back();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Matrix s_inv_half = es.eigenvectors() *
                            es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                            es.eigenvectors().adjoint();
  Povm povm;
  for (const auto& ak : a) {
    povm.elements.push_back(HermitianOperator::hermitian_part(s_inv_half * ak * s_inv_half));
  }
  return povm;
}

inline double trace_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues().sum();
}

/// Minimum-error success probability for two states.
inline double helstrom(const StateEnsemble& e) {
  const Matrix gamma = e.priors[0] * e.states[0].matrix() - e.priors[1] * e.states[1].matrix();
  return 0.5 * (1.0 + trace_norm(gamma));
}

inline double min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double real_trace(const Matrix& m) { return m.trace().real(); }

/// sum_j p_j Tr[rho_j Pi_j] and Tr[sigma Pi_0], computed directly.
inline std::pair<double, double> rates(const StateEnsemble& e, const Povm& povm) {
  double ps = 0.0;
  Matrix sigma = Matrix::Zero(e.dim(), e.dim());
  for (std::size_t j = 0; j < e.size(); ++j) {
    ps += e.priors[j] * real_trace(e.states[j].matrix() * povm.elements[j + 1].matrix());
    sigma += e.priors[j] * e.states[j].matrix();
  }
  return {ps, real_trace(sigma * povm.elements[0].matrix())};
}

/// Largest of ||sum Pi - 1||_F and the negated smallest element eigenvalue.
inline double povm_defect(const Povm& povm) {
  const auto d = povm.dim();
  Matrix total = Matrix::Zero(d, d);
  double worst = 0.0;
  for (const auto& el : povm.elements) {
    total += el.matrix();
    worst = std::max(worst, -min_eig(el.matrix()));
  }
  return std::max(worst, (total - Matrix::Identity(d, d)).norm());
}

/// Dual feasibility of (lambda, a): smallest eigenvalue over lambda - p_j rho_j
/// and, when a is given, lambda - a sigma.
inline double dual_feasibility(const StateEnsemble& e, const Matrix& lambda,
                               std::optional<double> a) {
  double worst = std::numeric_limits<double>::infinity();
  Matrix sigma = Matrix::Zero(e.dim(), e.dim());
  for (std::size_t j = 0; j < e.size(); ++j) {
    worst = std::min(worst, min_eig(lambda - e.priors[j] * e.states[j].matrix()));
    sigma += e.priors[j] * e.states[j].matrix();
  }
  if (a) worst = std::min(worst, min_eig(lambda - *a * sigma));
  return worst;
}

// Symmetric mixed qubit pair built from Bloch vectors, independently of the
// library's constructor: Bloch vectors eta (+-sin t, 0, cos t).
inline StateEnsemble bloch_pair(double eta, double theta) {
  StateEnsemble e;
  e.priors = {0.5, 0.5};
  for (int sign : {+1, -1}) {
    const double z = eta * std::cos(theta);
    const double x = sign * eta * std::sin(theta);
    Matrix rho(2, 2);
    rho << Complex(0.5 * (1 + z), 0), Complex(0.5 * x, 0), Complex(0.5 * x, 0),
        Complex(0.5 * (1 - z), 0);
    e.states.push_back(HermitianOperator::hermitian_part(rho));
  }
  return e;
}

/// Relative success along the optimal family for the pair, as a function of
/// the measurement angle phi.
inline double family_prs(double eta, double theta, double phi) {
  return (1.0 + eta * std::cos(phi - theta)) / (2.0 * (1.0 + eta * std::cos(theta) * std::cos(phi)));
}

inline double family_pi(double eta, double theta, double phi) {
  const double t = std::tan(phi / 2);
  return 0.5 * (1.0 + eta * std::cos(theta)) * (1.0 - 1.0 / (t * t));
}

/// Plateau value of the relative success rate, closed form.
inline double plateau_closed_form(double eta, double theta) {
  const double c = eta * std::cos(theta);
  return 0.5 * (1.0 + eta * std::sin(theta) / std::sqrt(1.0 - c * c));
}

/// Angle maximizing family_prs: cos(phi) = -eta cos(theta).
inline double plateau_angle_closed_form(double eta, double theta) {
  return std::acos(-eta * std::cos(theta));
}

/// Angle maximizing family_prs, by golden-section search.
inline double plateau_angle_by_search(double eta, double theta) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::numbers::pi / 2;
  double hi = std::numbers::pi - 1e-9;
  for (int i = 0; i < 200; ++i) {
    const double m1 = hi - g * (hi - lo);
    const double m2 = lo + g * (hi - lo);
    if (family_prs(eta, theta, m1) < family_prs(eta, theta, m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return 0.5 * (lo + hi);
}

inline double plateau_by_search(double eta, double theta) {
  return family_prs(eta, theta, plateau_angle_by_search(eta, theta));
}

/// Optimal relative success at a given inconclusive rate: invert family_pi by
/// bisection on phi, holding the plateau past its onset.
inline double envelope_by_bisection(double eta, double theta, double pi) {
  const double phi_max = plateau_angle_by_search(eta, theta);
  if (pi >= family_pi(eta, theta, phi_max)) return family_prs(eta, theta, phi_max);
  double lo = std::numbers::pi / 2;
  double hi = phi_max;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (family_pi(eta, theta, mid) < pi ? lo : hi) = mid;
  }
  return family_prs(eta, theta, 0.5 * (lo + hi));
}

/// Coefficient of determination of a least-squares line through
/// (k, log10 y_k).
inline double log_linear_r2(const std::vector<double>& y) {
  const auto n = static_cast<double>(y.size());
  if (y.size() < 3) return 1.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double x = static_cast<double>(k);
    const double v = std::log10(std::max(y[k], 1e-300));
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
    syy += v * v;
  }
  const double cov = sxy - sx * sy / n;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  return vy == 0.0 ? 1.0 : cov * cov / (vx * vy);
}

}  // namespace testing
