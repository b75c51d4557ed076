#include "povmlab/ensemble.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace povmlab {

DensityMatrix::DensityMatrix(HermitianOperator op) : op_(std::move(op)) {
  const auto report = validate_state(op_);
  if (!report.empty()) throw ValidationError(report.front().message);
}

std::string to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::TooFewStates: return "too_few_states";
    case Violation::Kind::CountMismatch: return "count_mismatch";
    case Violation::Kind::DimensionMismatch: return "dimension_mismatch";
    case Violation::Kind::NonPositivePrior: return "non_positive_prior";
    case Violation::Kind::PriorSum: return "prior_sum";
    case Violation::Kind::Trace: return "trace";
    case Violation::Kind::NotPsd: return "not_psd";
  }
  return "unknown";
}

ValidationReport validate_state(const HermitianOperator& rho, int index) {
  ValidationReport report;
  const std::string who = index >= 0 ? fmt::format("state {}", index) : std::string("state");
  const double tr = rho.trace();
  if (std::abs(tr - 1.0) > kTraceTolerance) {
    report.push_back({Violation::Kind::Trace, index, std::abs(tr - 1.0),
                      fmt::format("{}: trace deviates by {:.6g}", who, std::abs(tr - 1.0))});
  }
  const double lowest = min_eigenvalue(rho);
  if (lowest < -kPsdTolerance) {
    report.push_back({Violation::Kind::NotPsd, index, -lowest,
                      fmt::format("{}: minimum eigenvalue {:.6g}", who, lowest)});
  }
  return report;
}

ValidationReport validate(const StateEnsemble& e) {
  ValidationReport report;
  const int n = static_cast<int>(e.states.size());
  if (n < 2) {
    report.push_back({Violation::Kind::TooFewStates, -1, static_cast<double>(n),
                      fmt::format("ensemble needs at least 2 states, got {}", n)});
  }
  if (e.priors.size() != e.states.size()) {
    report.push_back({Violation::Kind::CountMismatch, -1,
                      std::abs(static_cast<double>(e.priors.size()) - n),
                      fmt::format("{} priors for {} states", e.priors.size(), n)});
  }

  double sum = 0.0;
  for (std::size_t j = 0; j < e.priors.size(); ++j) {
    const double p = e.priors[j];
    sum += p;
    if (!(p > 0.0)) {
      report.push_back({Violation::Kind::NonPositivePrior, static_cast<int>(j), p,
                        fmt::format("prior {} is {:.6g}, must be positive", j, p)});
    }
  }
  if (!e.priors.empty() && !(std::abs(sum - 1.0) <= kPriorSumTolerance)) {
    report.push_back({Violation::Kind::PriorSum, -1, sum - 1.0,
                      fmt::format("priors sum to {:.6g}", sum)});
  }

  const Eigen::Index d = e.dim();
  for (int j = 0; j < n; ++j) {
    const auto& rho = e.states[j];
    if (rho.dim() != d) {
      report.push_back({Violation::Kind::DimensionMismatch, j,
                        static_cast<double>(rho.dim() - d),
                        fmt::format("state {} has dim {}, expected {}", j, rho.dim(), d)});
      continue;
    }
    auto sub = validate_state(rho, j);
    report.insert(report.end(), sub.begin(), sub.end());
  }
  return report;
}

void require_valid(const StateEnsemble& e) {
  const auto report = validate(e);
  if (!report.empty()) throw ValidationError("invalid ensemble: " + report.front().message);
}

HermitianOperator average_state(const StateEnsemble& e) {
  HermitianOperator sigma = HermitianOperator::zero(e.dim());
  for (std::size_t j = 0; j < e.size(); ++j) sigma += e.priors[j] * e.states[j];
  return sigma;
}

OverlapData overlaps_and_purities(const StateEnsemble& e) {
  const auto n = static_cast<Eigen::Index>(e.size());
  OverlapData out{Eigen::MatrixXd::Zero(n, n), std::vector<double>(e.size())};
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j; k < n; ++k) {
      const double o = trace_product(e.states[j], e.states[k]);
      out.overlaps(j, k) = o;
      out.overlaps(k, j) = o;
    }
    out.purities[j] = out.overlaps(j, j);
  }
  return out;
}

Vector symmetric_qubit_ket(double theta, int sign) {
  Vector v(2);
  v << std::cos(theta / 2), static_cast<double>(sign) * std::sin(theta / 2);
  return v;
}

StateEnsemble symmetric_qubit_pair(double eta, double theta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw ValidationError(fmt::format("eta must lie in (0, 1], got {}", eta));
  }
  if (!(theta > 0.0 && theta <= std::numbers::pi / 2)) {
    throw ValidationError(fmt::format("theta must lie in (0, pi/2], got {}", theta));
  }
  const auto mixed = HermitianOperator::identity(2) * ((1.0 - eta) / 2);
  StateEnsemble e;
  for (int sign : {+1, -1}) {
    const DensityMatrix rho(eta * HermitianOperator::projector(symmetric_qubit_ket(theta, sign)) +
                            mixed);
    e.states.push_back(rho.op());
  }
  e.priors = {0.5, 0.5};
  return e;
}

}  // namespace povmlab
