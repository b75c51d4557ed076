#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>
#include <random>

#include "povmlab/bounds.hpp"
#include "povmlab/solver.hpp"
#include "support.hpp"

using namespace povmlab;
using doctest::Approx;

namespace {

constexpr double kQuarter = std::numbers::pi / 4;

Matrix pauli_z() {
  Matrix z = Matrix::Zero(2, 2);
  z(0, 0) = 1;
  z(1, 1) = -1;
  return z;
}

}  // namespace

TEST_CASE("identical states") {
  std::mt19937_64 rng(51);
  const auto rho = testing::random_state(rng, 2);
  const StateEnsemble e{{rho, rho}, {0.3, 0.7}};
  const auto b = max_relative_success(e);
  CHECK(b.per_state_a[0] == Approx(0.3));
  CHECK(b.per_state_a[1] == Approx(0.7));
  CHECK(b.prs_max == Approx(0.7));
  CHECK(b.argmax_state == 1);
  CHECK(b.kernel_dimension == 2);
  const auto dir = plateau_povm_direction(e, b);
  CHECK((dir.matrix() - Matrix::Identity(2, 2)).norm() < 1e-12);

  const StateEnsemble equal{{rho, rho}, {0.5, 0.5}};
  CHECK(qubit_quadratic_a(equal, 0) == Approx(0.5));
}

TEST_CASE("pure pairs reach one") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const auto e = testing::random_ensemble(rng, 2, 2, 1);
    CHECK(max_relative_success(e).prs_max == Approx(1.0).epsilon(1e-9));
  }
  const auto e = symmetric_qubit_pair(1.0, kQuarter);
  CHECK(qubit_quadratic_a(e, 0) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("symmetric mixed pair") {
  const auto e = testing::bloch_pair(0.9, kQuarter);
  const double expected = testing::plateau_closed_form(0.9, kQuarter);
  CHECK(expected == Approx(0.912514).epsilon(1e-6));
  const auto b = max_relative_success(e);
  CHECK(std::abs(b.prs_max - expected) <= 1e-12);
  CHECK(b.kernel_dimension == 1);
  CHECK(std::abs(qubit_quadratic_a(e, 0) - expected) <= 1e-12);
  CHECK(std::abs(qubit_quadratic_a(e, 1) - expected) <= 1e-12);

  const auto d = overlaps_and_purities(e);
  CHECK(std::abs(prs_max_from_invariants(d.purities[0], d.overlaps(0, 1)) - expected) <= 1e-12);
}

TEST_CASE("plateau direction reproduces the plateau") {
  for (double eta : {0.7, 0.9}) {
    const auto e = symmetric_qubit_pair(eta, kQuarter);
    const auto b = max_relative_success(e);
    const auto dir = plateau_povm_direction(e, b);
    CHECK(std::abs(dir.trace() - 1.0) < 1e-12);
    CHECK((dir.matrix() * dir.matrix() - dir.matrix()).norm() < 1e-12);

    // mirror for the partner state, then close with the inconclusive outcome
    const double t = 0.5;
    const Matrix mirrored = pauli_z() * dir.matrix() * pauli_z();
    Povm povm;
    povm.elements.resize(3);
    povm.elements[1 + b.argmax_state] = t * dir;
    povm.elements[2 - b.argmax_state] = HermitianOperator::hermitian_part(t * mirrored);
    povm.elements[0] =
        HermitianOperator::identity(2) - povm.elements[1] - povm.elements[2];
    REQUIRE(povm_violations(povm).empty());
    CHECK(success_metrics(e, povm).relative() == Approx(b.prs_max).epsilon(1e-12));
  }
}

TEST_CASE("orthogonal pair direction is the state itself") {
  Vector k0 = Vector::Zero(2);
  k0(0) = 1;
  Vector k1 = Vector::Zero(2);
  k1(1) = 1;
  const StateEnsemble e{{HermitianOperator::projector(k0), HermitianOperator::projector(k1)},
                        {0.4, 0.6}};
  const auto b = max_relative_success(e);
  CHECK(b.prs_max == Approx(1.0));
  const auto dir = plateau_povm_direction(e, b);
  CHECK((dir.matrix() - e.states[b.argmax_state].matrix()).norm() < 1e-12);
}

TEST_CASE("route equivalence on random qubit ensembles") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const auto e = testing::random_ensemble(rng, 2 + trial % 3, 2);
    const auto b = max_relative_success(e);
    for (std::size_t j = 0; j < e.size(); ++j) {
      CHECK(std::abs(qubit_quadratic_a(e, j) - b.per_state_a[j]) <= 1e-10);
    }
  }
}

TEST_CASE("invariant formula on the symmetric family") {
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    for (int k = 0; k < 20; ++k) {
      const double eta = 0.05 + 0.95 * i / 19.0;
      const double theta = 0.05 + (std::numbers::pi / 2 - 0.1) * k / 19.0;
      const auto d = overlaps_and_purities(testing::bloch_pair(eta, theta));
      worst = std::max(worst, std::abs(prs_max_from_invariants(d.purities[0], d.overlaps(0, 1)) -
                                       testing::plateau_closed_form(eta, theta)));
    }
  }
  CHECK(worst <= 1e-12);
  CHECK(prs_max_from_invariants(0.7, 0.7) == Approx(0.5));
  CHECK(prs_max_from_invariants(1.0, 0.0) == Approx(1.0));
  CHECK_THROWS_AS(prs_max_from_invariants(0.4, 0.3), ValidationError);
  CHECK_THROWS_AS(prs_max_from_invariants(0.8, 0.9), ValidationError);
}

TEST_CASE("errors") {
  Vector k0 = Vector::Zero(2);
  k0(0) = 1;
  const auto p0 = HermitianOperator::projector(k0);
  try {
    (void)max_relative_success(StateEnsemble{{p0, p0}, {0.5, 0.5}});
    FAIL("expected SingularEnsembleError");
  } catch (const SingularEnsembleError& err) {
    CHECK(err.min_eigenvalue() < 1e-12);
  }
  const auto qutrit = HermitianOperator::identity(3) * (1.0 / 3);
  CHECK_THROWS_AS(qubit_quadratic_a(StateEnsemble{{qutrit, qutrit}, {0.5, 0.5}}, 0),
                  ValidationError);
  const auto e = symmetric_qubit_pair(0.9, kQuarter);
  auto b = max_relative_success(e);
  b.argmax_state = 5;
  CHECK_THROWS_AS(plateau_povm_direction(e, b), InconsistentBoundError);
  b = max_relative_success(e);
  b.prs_max = 0.6;
  CHECK_THROWS_AS(plateau_povm_direction(e, b), InconsistentBoundError);
}
