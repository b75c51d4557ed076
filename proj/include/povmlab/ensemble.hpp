#pragma once

#include <string>
#include <vector>

#include "povmlab/hermitian.hpp"

namespace povmlab {

inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kPriorSumTolerance = 1e-12;

/// Unit-trace positive-semidefinite operator. Construction throws
/// ValidationError when either property fails.
class DensityMatrix {
 public:
  explicit DensityMatrix(HermitianOperator op);

  const HermitianOperator& op() const noexcept { return op_; }
  Eigen::Index dim() const noexcept { return op_.dim(); }
  operator const HermitianOperator&() const noexcept { return op_; }

 private:
  HermitianOperator op_;
};

/// States rho_j with prior probabilities p_j. Holds unvalidated data; call
/// validate() or require_valid() before handing it to numerical routines.
struct StateEnsemble {
  std::vector<HermitianOperator> states;
  std::vector<double> priors;

  std::size_t size() const noexcept { return states.size(); }
  Eigen::Index dim() const { return states.empty() ? 0 : states.front().dim(); }
};

struct Violation {
  enum class Kind {
    TooFewStates,
    CountMismatch,
    DimensionMismatch,
    NonPositivePrior,
    PriorSum,
    Trace,
    NotPsd,
  };
  Kind kind;
  int index;        // state index, -1 for ensemble-wide entries
  double residual;  // measured deviation
  std::string message;
};

std::string to_string(Violation::Kind kind);

using ValidationReport = std::vector<Violation>;

/// Empty iff the ensemble satisfies every invariant.
ValidationReport validate(const StateEnsemble& e);

/// Throws ValidationError carrying the first violation's message.
void require_valid(const StateEnsemble& e);

/// Checks a single operator against the density-matrix invariants.
ValidationReport validate_state(const HermitianOperator& rho, int index = -1);

/// sigma = sum_j p_j rho_j
HermitianOperator average_state(const StateEnsemble& e);

struct OverlapData {
  Eigen::MatrixXd overlaps;     // O_jk = Tr[rho_j rho_k]
  std::vector<double> purities;  // P_j = O_jj
};

OverlapData overlaps_and_purities(const StateEnsemble& e);

/// Pure state cos(theta/2)|0> + sign * sin(theta/2)|1>.
Vector symmetric_qubit_ket(double theta, int sign);

/// rho_{1,2} = eta |psi_{1,2}><psi_{1,2}| + (1 - eta)/2 * 1 with equal
/// priors. eta in (0, 1], theta in (0, pi/2].
StateEnsemble symmetric_qubit_pair(double eta, double theta);

}  // namespace povmlab
