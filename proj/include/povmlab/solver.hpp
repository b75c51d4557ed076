#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "povmlab/ensemble.hpp"
#include "povmlab/hermitian.hpp"

namespace povmlab {

/// Measurement with N + 1 outcomes. elements[0] is the inconclusive outcome,
/// elements[j] for j >= 1 declares state j - 1 of the ensemble.
struct Povm {
  std::vector<HermitianOperator> elements;

  std::size_t outcomes() const noexcept { return elements.size(); }
  Eigen::Index dim() const { return elements.empty() ? 0 : elements.front().dim(); }
  const HermitianOperator& inconclusive() const { return elements.front(); }
};

inline constexpr double kPovmPsdTolerance = 1e-9;
inline constexpr double kPovmClosureTolerance = 1e-9;  // times dim

/// Closure and positivity violations, one message per failure.
std::vector<std::string> povm_violations(const Povm& povm, std::size_t expected_outcomes = 0);

/// Thrown when the inconclusive-rate target cannot be met by any multiplier
/// inside the search bracket.
class InfeasibleTargetError : public std::runtime_error {
 public:
  InfeasibleTargetError(const std::string& what, double target, double supremum)
      : std::runtime_error(what), target_(target), supremum_(supremum) {}
  double target() const noexcept { return target_; }
  /// Largest inconclusive rate reached while expanding the bracket.
  double supremum() const noexcept { return supremum_; }

 private:
  double target_;
  double supremum_;
};

/// Thrown by success_metrics().relative when P_I is numerically 1.
class UndefinedRateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Acceleration { None, Anderson };

struct SolverConfig {
  int max_iterations = 500;
  double povm_tolerance = 1e-12;       // max Frobenius change per sweep
  double bisection_tolerance = 1e-14;  // |P_I(a) - target|
  int bisection_max_steps = 200;
  double pinv_cutoff = kDefaultPinvCutoff;  // relative to the largest eigenvalue of lambda^2

  /// Anderson mixing of the square-root factors B_j (Pi_j = B_j B_j^dagger)
  /// across recent sweeps. Mixed factors always give positive elements, and
  /// the next sweep restores closure and the inconclusive rate, so every
  /// sweep output keeps the POVM invariants. Mixing can drop the rank of an
  /// element, which no later sweep restores, so an accelerated run may stop
  /// at a non-optimal fixed point; check the certificate. None runs the bare
  /// map.
  Acceleration acceleration = Acceleration::None;
  int anderson_memory = 5;
  int anderson_warmup = 5;

  /// Throws ValidationError for non-positive entries.
  void validate() const;
};

struct SuccessMetrics {
  double success;       // P_S
  double inconclusive;  // P_I
  /// P_S / (1 - P_I); throws UndefinedRateError when P_I >= 1 - 1e-12.
  double relative() const;
};

SuccessMetrics success_metrics(const StateEnsemble& e, const Povm& povm);

/// Pi_0 = target_pi * 1, Pi_j = (1 - target_pi)/N * 1.
Povm init_povm(const StateEnsemble& e, double target_pi);

/// [sum_j p_j^2 rho_j Pi_j rho_j + a^2 sigma Pi_0 sigma]^{1/2}
HermitianOperator lambda_of_a(const StateEnsemble& e, const Povm& povm, double a);

/// Inconclusive rate of the next iterate for multiplier a.
double pi_of_a(const StateEnsemble& e, const Povm& povm, double a, const SolverConfig& cfg);

struct MultiplierSolution {
  double a;
  HermitianOperator lambda;
  double residual;  // |P_I(a) - target|
  int steps;
};

/// Bisection for P_I(a) = target_pi. Requires target_pi in (0, 1) and a
/// nonzero Pi_0.
MultiplierSolution solve_a(const StateEnsemble& e, const Povm& povm, double target_pi,
                           const SolverConfig& cfg);

struct Sweep {
  Povm povm;
  HermitianOperator lambda;
  double a;  // 0 when target_pi == 0
};

/// One symmetrized fixed-point update of every POVM element.
Sweep iterate_once(const StateEnsemble& e, const Povm& povm, double target_pi,
                   const SolverConfig& cfg);

struct SolveResult {
  Povm povm;
  double success_rate = 0.0;
  double inconclusive_rate = 0.0;
  std::optional<double> relative_success_rate;  // empty when P_I is numerically 1
  HermitianOperator lambda;
  double a = 0.0;
  int iterations = 0;
  double final_change = 0.0;
  bool converged = false;
  std::vector<double> change_history;  // per-sweep max Frobenius change
};

/// Optional per-sweep hook, called after each update with the sweep index
/// (1-based) and the new iterate.
using SweepObserver = std::function<void(int, const Sweep&)>;

SolveResult solve(const StateEnsemble& e, double target_pi, const SolverConfig& cfg = {},
                  const SweepObserver& observer = {});

}  // namespace povmlab
