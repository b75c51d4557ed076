#include "povmlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace povmlab {

namespace {

constexpr double kBracketLimit = 1152921504606846976.0;  // 2^60
constexpr double kRelativeUndefinedGuard = 1e-12;

void require_target(double target_pi) {
  if (!(target_pi >= 0.0 && target_pi < 1.0)) {
    throw ValidationError(fmt::format("target inconclusive rate must lie in [0, 1), got {}",
                                      target_pi));
  }
}

void require_matching(const StateEnsemble& e, const Povm& povm) {
  if (povm.outcomes() != e.size() + 1) {
    throw ValidationError(fmt::format("POVM has {} elements, ensemble of {} states needs {}",
                                      povm.outcomes(), e.size(), e.size() + 1));
  }
  for (const auto& el : povm.elements) {
    if (el.dim() != e.dim()) {
      throw ValidationError(
          fmt::format("POVM element dim {} does not match ensemble dim {}", el.dim(), e.dim()));
    }
  }
}

// Operators that stay fixed while the multiplier a is searched.
struct SweepTerms {
  HermitianOperator sigma;
  HermitianOperator conclusive;    // sum_j p_j^2 rho_j Pi_j rho_j
  HermitianOperator inconclusive;  // sigma Pi_0 sigma
};

SweepTerms sweep_terms(const StateEnsemble& e, const Povm& povm) {
  const auto d = e.dim();
  SweepTerms t{average_state(e), HermitianOperator::zero(d), HermitianOperator::zero(d)};
  for (std::size_t j = 0; j < e.size(); ++j) {
    const double p = e.priors[j];
    t.conclusive += (p * p) * congruence(e.states[j].matrix(), povm.elements[j + 1]);
  }
  t.inconclusive = congruence(t.sigma.matrix(), povm.inconclusive());
  return t;
}

struct LambdaFactor {
  HermitianOperator lambda;
  Matrix lambda_pinv;
};

// lambda = M^{1/2} together with its pseudoinverse, from one eigendecomposition.
LambdaFactor factor_lambda(const HermitianOperator& bracket, double cutoff) {
  const auto ed = eig_hermitian(bracket);
  const double top = std::max(ed.eigenvalues.maxCoeff(), 0.0);
  const double lowest = ed.eigenvalues(0);
  if (lowest < -kPsdTolerance * std::max(1.0, top)) {
    throw NotPsdError(fmt::format("multiplier bracket has eigenvalue {:.3e}", lowest), lowest);
  }
  // The cutoff acts on the bracket, before the square root amplifies rounding.
  const double keep = cutoff * top;
  const RealVector root =
      ed.eigenvalues.unaryExpr([keep](double r) { return r > keep ? std::sqrt(r) : 0.0; });
  const RealVector inv = root.unaryExpr([](double r) { return r > 0.0 ? 1.0 / r : 0.0; });
  const Matrix& v = ed.eigenvectors;
  return {HermitianOperator::hermitian_part(v * root.asDiagonal() * v.adjoint()),
          v * inv.asDiagonal() * v.adjoint()};
}

HermitianOperator bracket_at(const SweepTerms& t, double a) {
  return t.conclusive + (a * a) * t.inconclusive;
}

double inconclusive_after(const SweepTerms& t, const LambdaFactor& f, double a) {
  const auto next_pi0 = (a * a) * congruence(f.lambda_pinv, t.inconclusive);
  return trace_product(t.sigma, next_pi0);
}

struct Evaluation {
  double a;
  double pi;
  LambdaFactor factor;
};

Evaluation evaluate(const SweepTerms& t, double a, double cutoff) {
  auto f = factor_lambda(bracket_at(t, a), cutoff);
  const double pi = inconclusive_after(t, f, a);
  return {a, pi, std::move(f)};
}

// Square-root factors B_j with Pi_j = B_j B_j^dagger. The sweep acts on them
// linearly, B_j <- p_j lambda^+ rho_j B_j and B_0 <- a lambda^+ sigma B_0, and
// any set of factors gives positive elements.
using Factors = std::vector<Matrix>;

Factors factors_of(const Povm& povm) {
  Factors b;
  for (const auto& el : povm.elements) b.push_back(sqrt_psd(el).matrix());
  return b;
}

Povm povm_of(const Factors& b) {
  Povm povm;
  for (const auto& m : b) povm.elements.push_back(HermitianOperator::hermitian_part(m * m.adjoint()));
  return povm;
}

Eigen::VectorXd flatten(const Factors& b) {
  const auto block = 2 * b.front().size();
  Eigen::VectorXd v(block * static_cast<Eigen::Index>(b.size()));
  for (std::size_t j = 0; j < b.size(); ++j) {
    const auto base = static_cast<Eigen::Index>(j) * block;
    v.segment(base, block) =
        Eigen::Map<const Eigen::VectorXd>(reinterpret_cast<const double*>(b[j].data()), block);
  }
  return v;
}

Factors unflatten(const Eigen::VectorXd& v, std::size_t outcomes, Eigen::Index d) {
  const auto block = 2 * d * d;
  Factors b(outcomes, Matrix(d, d));
  for (std::size_t j = 0; j < outcomes; ++j) {
    Eigen::Map<Eigen::VectorXd>(reinterpret_cast<double*>(b[j].data()), block) =
        v.segment(static_cast<Eigen::Index>(j) * block, block);
  }
  return b;
}

// Type-II Anderson mixing over the last few (input, output) pairs.
class AndersonMixer {
 public:
  explicit AndersonMixer(int memory) : memory_(memory) {}

  void push(Eigen::VectorXd x, Eigen::VectorXd g) {
    xs_.push_back(std::move(x));
    gs_.push_back(std::move(g));
    if (static_cast<int>(xs_.size()) > memory_ + 1) {
      xs_.erase(xs_.begin());
      gs_.erase(gs_.begin());
    }
  }

  void reset() {
    xs_.clear();
    gs_.clear();
  }

  // Extrapolated point, or nothing with fewer than two samples.
  std::optional<Eigen::VectorXd> extrapolate() const {
    const auto n = static_cast<Eigen::Index>(xs_.size());
    if (n < 2) return std::nullopt;
    const auto len = xs_.back().size();
    Eigen::MatrixXd df(len, n - 1);
    Eigen::MatrixXd dg(len, n - 1);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      df.col(k) = (gs_[k + 1] - xs_[k + 1]) - (gs_[k] - xs_[k]);
      dg.col(k) = gs_[k + 1] - gs_[k];
    }
    const Eigen::VectorXd f = gs_.back() - xs_.back();
    const Eigen::VectorXd gamma = df.completeOrthogonalDecomposition().solve(f);
    if (!gamma.allFinite()) return std::nullopt;
    return Eigen::VectorXd(gs_.back() - dg * gamma);
  }

 private:
  int memory_;
  std::vector<Eigen::VectorXd> xs_;
  std::vector<Eigen::VectorXd> gs_;
};

double max_change(const Povm& before, const Povm& after) {
  double worst = 0.0;
  for (std::size_t j = 0; j < before.outcomes(); ++j) {
    worst = std::max(worst, (after.elements[j] - before.elements[j]).frobenius_norm());
  }
  return worst;
}

}  // namespace

std::vector<std::string> povm_violations(const Povm& povm, std::size_t expected_outcomes) {
  std::vector<std::string> out;
  if (povm.elements.empty()) {
    out.emplace_back("POVM has no elements");
    return out;
  }
  if (expected_outcomes != 0 && povm.outcomes() != expected_outcomes) {
    out.push_back(fmt::format("POVM has {} elements, expected {}", povm.outcomes(),
                              expected_outcomes));
  }
  const auto d = povm.dim();
  Matrix total = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < povm.outcomes(); ++j) {
    const auto& el = povm.elements[j];
    if (el.dim() != d) {
      out.push_back(fmt::format("element {} has dim {}, expected {}", j, el.dim(), d));
      continue;
    }
    const double lowest = min_eigenvalue(el);
    if (lowest < -kPovmPsdTolerance) {
      out.push_back(fmt::format("element {} has eigenvalue {:.6g}", j, lowest));
    }
    total += el.matrix();
  }
  const double closure = (total - Matrix::Identity(d, d)).norm();
  if (closure > kPovmClosureTolerance * static_cast<double>(d)) {
    out.push_back(fmt::format("elements sum to identity only within {:.6g}", closure));
  }
  return out;
}

void SolverConfig::validate() const {
  if (max_iterations <= 0) throw ValidationError("max_iterations must be positive");
  if (!(povm_tolerance > 0.0)) throw ValidationError("povm_tolerance must be positive");
  if (!(bisection_tolerance > 0.0)) throw ValidationError("bisection_tolerance must be positive");
  if (bisection_max_steps <= 0) throw ValidationError("bisection_max_steps must be positive");
  if (anderson_memory <= 0) throw ValidationError("anderson_memory must be positive");
  if (anderson_warmup < 0) throw ValidationError("anderson_warmup must be non-negative");
  if (!(pinv_cutoff > 0.0)) throw ValidationError("pinv_cutoff must be positive");
}

double SuccessMetrics::relative() const {
  if (inconclusive >= 1.0 - kRelativeUndefinedGuard) {
    throw UndefinedRateError(
        fmt::format("relative success rate undefined for P_I = {:.17g}", inconclusive));
  }
  return success / (1.0 - inconclusive);
}

SuccessMetrics success_metrics(const StateEnsemble& e, const Povm& povm) {
  require_matching(e, povm);
  SuccessMetrics m{0.0, trace_product(average_state(e), povm.inconclusive())};
  for (std::size_t j = 0; j < e.size(); ++j) {
    m.success += e.priors[j] * trace_product(povm.elements[j + 1], e.states[j]);
  }
  return m;
}

Povm init_povm(const StateEnsemble& e, double target_pi) {
  require_target(target_pi);
  const auto d = e.dim();
  const double share = (1.0 - target_pi) / static_cast<double>(e.size());
  Povm povm;
  povm.elements.push_back(target_pi * HermitianOperator::identity(d));
  for (std::size_t j = 0; j < e.size(); ++j) {
    povm.elements.push_back(share * HermitianOperator::identity(d));
  }
  return povm;
}

HermitianOperator lambda_of_a(const StateEnsemble& e, const Povm& povm, double a) {
  require_matching(e, povm);
  if (!(a >= 0.0)) throw ValidationError("multiplier a must be non-negative");
  const auto terms = sweep_terms(e, povm);
  return factor_lambda(bracket_at(terms, a), kDefaultPinvCutoff).lambda;
}

double pi_of_a(const StateEnsemble& e, const Povm& povm, double a, const SolverConfig& cfg) {
  require_matching(e, povm);
  if (!(a >= 0.0)) throw ValidationError("multiplier a must be non-negative");
  const auto terms = sweep_terms(e, povm);
  return evaluate(terms, a, cfg.pinv_cutoff).pi;
}

MultiplierSolution solve_a(const StateEnsemble& e, const Povm& povm, double target_pi,
                           const SolverConfig& cfg) {
  require_matching(e, povm);
  if (!(target_pi > 0.0 && target_pi < 1.0)) {
    throw ValidationError(
        fmt::format("solve_a needs a target in (0, 1), got {}; P_I = 0 has its own branch",
                    target_pi));
  }
  if (povm.inconclusive().frobenius_norm() == 0.0) {
    throw ValidationError("solve_a needs a nonzero inconclusive element");
  }
  const auto terms = sweep_terms(e, povm);

  Evaluation lo = evaluate(terms, 0.0, cfg.pinv_cutoff);
  Evaluation hi = evaluate(terms, 1.0, cfg.pinv_cutoff);
  while (hi.pi < target_pi) {
    if (hi.a >= kBracketLimit) {
      throw InfeasibleTargetError(
          fmt::format("inconclusive rate {} is unreachable; supremum reached {:.17g}", target_pi,
                      hi.pi),
          target_pi, hi.pi);
    }
    if (hi.pi < lo.pi) {
      spdlog::warn("P_I(a) decreased while expanding the bracket: {:.3e} -> {:.3e} at a = {}",
                   lo.pi, hi.pi, hi.a);
    }
    lo = std::move(hi);
    hi = evaluate(terms, 2.0 * lo.a, cfg.pinv_cutoff);
  }

  // best-so-far, in case the residual tolerance is below what doubles resolve
  const Evaluation* best = &hi;
  int steps = 0;
  bool warned = false;
  Evaluation mid = hi;
  while (std::abs(best->pi - target_pi) > cfg.bisection_tolerance &&
         steps < cfg.bisection_max_steps) {
    const double m = 0.5 * (lo.a + hi.a);
    if (m <= lo.a || m >= hi.a) break;
    ++steps;
    mid = evaluate(terms, m, cfg.pinv_cutoff);
    if (!warned && (mid.pi < lo.pi - 1e-12 || mid.pi > hi.pi + 1e-12)) {
      spdlog::warn("P_I(a) is not monotone on [{}, {}]: {:.17g} {:.17g} {:.17g}", lo.a, hi.a,
                   lo.pi, mid.pi, hi.pi);
      warned = true;
    }
    if (mid.pi < target_pi) {
      lo = std::move(mid);
      best = std::abs(lo.pi - target_pi) < std::abs(hi.pi - target_pi) ? &lo : &hi;
    } else {
      hi = std::move(mid);
      best = std::abs(hi.pi - target_pi) < std::abs(lo.pi - target_pi) ? &hi : &lo;
    }
  }
  const double residual = std::abs(best->pi - target_pi);
  if (residual > cfg.bisection_tolerance) {
    spdlog::debug("bisection stopped at residual {:.3e} after {} steps", residual, steps);
  }
  return {best->a, best->factor.lambda, residual, steps};
}

namespace {

struct SweepCore {
  SweepTerms terms;
  LambdaFactor factor;
  double a = 0.0;
};

SweepCore sweep_core(const StateEnsemble& e, const Povm& povm, double target_pi,
                     const SolverConfig& cfg) {
  SweepCore core{sweep_terms(e, povm), {}, 0.0};
  if (target_pi > 0.0) {
    core.a = solve_a(e, povm, target_pi, cfg).a;
    core.factor = factor_lambda(bracket_at(core.terms, core.a), cfg.pinv_cutoff);
  } else {
    core.factor = factor_lambda(core.terms.conclusive, cfg.pinv_cutoff);
  }
  return core;
}

Matrix closure_deficit(const Povm& povm) {
  const auto d = povm.dim();
  Matrix deficit = Matrix::Identity(d, d);
  for (const auto& el : povm.elements) deficit -= el.matrix();
  return deficit;
}

struct FactorSweep {
  Factors factors;
  Sweep sweep;
  bool regauged = false;  // B_0 was rebuilt to absorb an off-support deficit
};

FactorSweep factor_sweep(const StateEnsemble& e, const Factors& b, double target_pi,
                         const SolverConfig& cfg) {
  const auto d = e.dim();
  const auto core = sweep_core(e, povm_of(b), target_pi, cfg);
  const Matrix& pinv = core.factor.lambda_pinv;

  FactorSweep out;
  out.factors.push_back(target_pi > 0.0 ? Matrix(core.a * pinv * core.terms.sigma.matrix() * b[0])
                                        : Matrix(Matrix::Zero(d, d)));
  for (std::size_t j = 0; j < e.size(); ++j) {
    out.factors.push_back(e.priors[j] * pinv * e.states[j].matrix() * b[j + 1]);
  }
  out.sweep = Sweep{povm_of(out.factors), core.factor.lambda, core.a};

  const Matrix deficit = closure_deficit(out.sweep.povm);
  out.sweep.povm.elements.front() += HermitianOperator::hermitian_part(deficit);
  if (deficit.norm() > 1e-10) {
    out.factors.front() = sqrt_psd(out.sweep.povm.elements.front()).matrix();
    out.regauged = true;
  }
  return out;
}

}  // namespace

Sweep iterate_once(const StateEnsemble& e, const Povm& povm, double target_pi,
                   const SolverConfig& cfg) {
  require_matching(e, povm);
  require_target(target_pi);
  const auto core = sweep_core(e, povm, target_pi, cfg);
  const Matrix& pinv = core.factor.lambda_pinv;

  Sweep out{Povm{}, core.factor.lambda, core.a};
  out.povm.elements.reserve(povm.outcomes());
  out.povm.elements.push_back(target_pi > 0.0
                                  ? (core.a * core.a) * congruence(pinv, core.terms.inconclusive)
                                  : HermitianOperator::zero(e.dim()));
  for (std::size_t j = 0; j < e.size(); ++j) {
    const Matrix w = e.priors[j] * pinv * e.states[j].matrix();
    out.povm.elements.push_back(congruence(w, povm.elements[j + 1]));
  }

  // Whatever lambda's support misses goes to the inconclusive outcome.
  out.povm.elements.front() += HermitianOperator::hermitian_part(closure_deficit(out.povm));
  return out;
}

SolveResult solve(const StateEnsemble& e, double target_pi, const SolverConfig& cfg,
                  const SweepObserver& observer) {
  require_valid(e);
  cfg.validate();
  require_target(target_pi);

  SolveResult result;
  const auto outcomes = e.size() + 1;
  const auto d = e.dim();
  const bool accelerate = cfg.acceleration == Acceleration::Anderson;
  Povm povm = init_povm(e, target_pi);
  Factors factors = factors_of(povm);
  AndersonMixer mixer(cfg.anderson_memory);
  double change = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    Sweep sweep;
    Factors next;
    bool regauged = false;
    if (accelerate) {
      auto fs = factor_sweep(e, factors, target_pi, cfg);
      sweep = std::move(fs.sweep);
      next = std::move(fs.factors);
      regauged = fs.regauged;
    } else {
      sweep = iterate_once(e, povm, target_pi, cfg);
    }
    change = max_change(povm, sweep.povm);
    result.change_history.push_back(change);
    result.iterations = it;
    if (observer) observer(it, sweep);
    result.lambda = sweep.lambda;
    result.a = sweep.a;
    result.povm = sweep.povm;
    if (change <= cfg.povm_tolerance) {
      result.converged = true;
      break;
    }
    if (!accelerate) {
      povm = std::move(sweep.povm);
      continue;
    }

    if (regauged) mixer.reset();
    std::optional<Eigen::VectorXd> mixed;
    if (it > cfg.anderson_warmup && !regauged) {
      mixer.push(flatten(factors), flatten(next));
      mixed = mixer.extrapolate();
    }
    factors = mixed ? unflatten(*mixed, outcomes, d) : std::move(next);
    povm = mixed ? povm_of(factors) : std::move(sweep.povm);
  }
  if (!result.converged) {
    spdlog::warn("solve did not converge in {} sweeps (last change {:.3e})", result.iterations,
                 change);
  } else {
    spdlog::debug("solve converged in {} sweeps (last change {:.3e}, a = {:.17g})",
                  result.iterations, change, result.a);
  }

  // Mixed points need not close, so the reported POVM is always a sweep output.
  const auto metrics = success_metrics(e, result.povm);
  result.success_rate = metrics.success;
  result.inconclusive_rate = metrics.inconclusive;
  if (metrics.inconclusive < 1.0 - kRelativeUndefinedGuard) {
    result.relative_success_rate = metrics.relative();
  }
  result.final_change = change;
  return result;
}

}  // namespace povmlab
