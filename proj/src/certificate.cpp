#include "povmlab/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace povmlab {

namespace {

void require_matching(const StateEnsemble& e, const Povm& povm) {
  require_valid(e);
  if (povm.outcomes() != e.size() + 1) {
    throw ValidationError(fmt::format("POVM has {} elements, expected {}", povm.outcomes(),
                                      e.size() + 1));
  }
}

Matrix conclusive_sum(const StateEnsemble& e, const Povm& povm) {
  Matrix out = Matrix::Zero(e.dim(), e.dim());  // sum_j p_j rho_j Pi_j
  for (std::size_t j = 0; j < e.size(); ++j) {
    out += e.priors[j] * e.states[j].matrix() * povm.elements[j + 1].matrix();
  }
  return out;
}

Multipliers finish(Matrix lambda, std::optional<double> a) {
  Multipliers out;
  out.a = a;
  out.hermiticity_residual = 0.5 * hermiticity_defect(lambda);
  if (out.hermiticity_residual > 1e-10) {
    spdlog::debug("lambda anti-Hermitian residual {:.3e}", out.hermiticity_residual);
  }
  out.lambda = HermitianOperator::hermitian_part(lambda);
  return out;
}

}  // namespace

Multipliers multipliers_from_povm(const StateEnsemble& e, const Povm& povm) {
  require_matching(e, povm);
  const auto sigma = average_state(e);
  const Matrix& pi0 = povm.inconclusive().matrix();
  const Matrix conclusive = conclusive_sum(e, povm);

  const double p_i = trace_product(sigma, povm.inconclusive());
  if (p_i > kHelstromThreshold) {
    const double rhs = (conclusive * pi0).trace().real();
    const double denom = p_i - (sigma.matrix() * pi0 * pi0).trace().real();
    if (std::abs(denom) <= 1e-14) {
      throw SingularMultiplierError(fmt::format(
          "multiplier a is undetermined: P_I = {:.17g} equals Tr[sigma Pi_0^2]", p_i));
    }
    const double a = rhs / denom;
    return finish(conclusive + a * sigma.matrix() * pi0, a);
  }
  return finish(conclusive, std::nullopt);
}

Multipliers multipliers_with_a(const StateEnsemble& e, const Povm& povm, double a) {
  require_matching(e, povm);
  const auto sigma = average_state(e);
  return finish(conclusive_sum(e, povm) + a * sigma.matrix() * povm.inconclusive().matrix(), a);
}

double max_margin_multiplier(const StateEnsemble& e, const Povm& povm) {
  require_matching(e, povm);
  const auto sigma = average_state(e);
  const Matrix base = conclusive_sum(e, povm);
  const Matrix slope = sigma.matrix() * povm.inconclusive().matrix();
  // smallest eigenvalue over lambda(a) - p_j rho_j and lambda(a) - a sigma;
  // each is concave in a, so their minimum is too
  auto margin = [&](double a) {
    const auto lambda = HermitianOperator::hermitian_part(base + a * slope);
    double m = min_eigenvalue(lambda - a * sigma);
    for (std::size_t j = 0; j < e.size(); ++j) {
      m = std::min(m, min_eigenvalue(lambda - e.priors[j] * e.states[j]));
    }
    return m;
  };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0;
  double hi = 1.0;
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = margin(x1);
  double f2 = margin(x2);
  while (hi - lo > 1e-13) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = margin(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = margin(x1);
    }
  }
  return 0.5 * (lo + hi);
}

double dual_bound(const Multipliers& m, double pi) {
  return m.lambda.trace() - m.a.value_or(0.0) * pi;
}

double Certificate::max_residual() const {
  double worst = 0.0;
  for (double r : extremal_residuals) worst = std::max(worst, r);
  return worst;
}

double Certificate::min_margin() const {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& m : positivity_margins) {
    if (m) lowest = std::min(lowest, *m);
  }
  return lowest;
}

Certificate check(const StateEnsemble& e, const Povm& povm, double tol_e, double tol_p) {
  std::optional<Certificate> first;
  try {
    first = check(e, povm, multipliers_from_povm(e, povm), tol_e, tol_p);
    if (first->optimal || !first->a) return *first;
  } catch (const SingularMultiplierError& err) {
    spdlog::debug("{}", err.what());
  }
  auto second = check(e, povm, multipliers_with_a(e, povm, max_margin_multiplier(e, povm)),
                      tol_e, tol_p);
  return second.optimal || !first ? second : *first;
}

Certificate check(const StateEnsemble& e, const Povm& povm, const Multipliers& mult, double tol_e,
                  double tol_p) {
  require_matching(e, povm);
  const auto sigma = average_state(e);
  const auto metrics = success_metrics(e, povm);

  Certificate c;
  c.lambda = mult.lambda;
  c.a = mult.a;
  c.hermiticity_residual = mult.hermiticity_residual;
  c.success_rate = metrics.success;
  c.inconclusive_rate = metrics.inconclusive;
  c.dual_bound = dual_bound(mult, metrics.inconclusive);
  c.tol_e = tol_e;
  c.tol_p = tol_p;

  // j = 0: (lambda - a sigma) Pi_0, with a = 0 when the constraint is inactive.
  const auto& pi0 = povm.inconclusive();
  const auto slack0 = c.lambda - c.a.value_or(0.0) * sigma;
  c.extremal_residuals.push_back(
      pi0.frobenius_norm() == 0.0 ? 0.0 : (slack0.matrix() * pi0.matrix()).norm());
  c.positivity_margins.push_back(c.a ? std::optional<double>(min_eigenvalue(slack0))
                                     : std::nullopt);

  for (std::size_t j = 0; j < e.size(); ++j) {
    const auto slack = c.lambda - e.priors[j] * e.states[j];
    c.extremal_residuals.push_back((slack.matrix() * povm.elements[j + 1].matrix()).norm());
    c.positivity_margins.push_back(min_eigenvalue(slack));
  }

  c.optimal = c.max_residual() <= tol_e && c.min_margin() >= -tol_p;
  return c;
}

}  // namespace povmlab
