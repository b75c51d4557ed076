#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "povmlab/bounds.hpp"
#include "povmlab/certificate.hpp"
#include "povmlab/qubit_analytic.hpp"
#include "support.hpp"

using namespace povmlab;
using namespace povmlab::qubit;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuarter = kPi / 4;

}  // namespace

TEST_CASE("problem parameters") {
  CHECK_NOTHROW(SymmetricQubitProblem(1.0, kQuarter));
  CHECK_THROWS_AS(SymmetricQubitProblem(0.0, kQuarter), ValidationError);
  CHECK_THROWS_AS(SymmetricQubitProblem(0.5, kPi / 2), ValidationError);
  CHECK(SymmetricQubitProblem(0.9, kQuarter).pi_supremum() ==
        Approx(0.5 * (1 + 0.9 * std::cos(kQuarter))));
}

TEST_CASE("analytic POVM") {
  const SymmetricQubitProblem p(0.9, kQuarter);
  SUBCASE("projective at phi = pi/2") {
    const auto povm = analytic_povm(p, kPi / 2);
    CHECK(povm.elements[0].frobenius_norm() < 1e-15);
    const double r = 1 / std::sqrt(2.0);
    CHECK(povm.elements[1](0, 1).real() == Approx(0.5));
    CHECK(povm.elements[2](0, 1).real() == Approx(-0.5));
    CHECK(povm.elements[1](0, 0).real() == Approx(r * r));
  }
  SUBCASE("phi = 2 pi / 3") {
    const auto povm = analytic_povm(p, 2 * kPi / 3);
    CHECK(povm.elements[0](0, 0).real() == Approx(2.0 / 3));
    CHECK(std::abs(povm.elements[0](1, 1)) < 1e-15);
    CHECK(testing::povm_defect(povm) < 1e-14);
  }
  CHECK_THROWS_AS(analytic_povm(p, 1.0), ValidationError);
  CHECK_THROWS_AS(analytic_povm(p, kPi), ValidationError);
}

TEST_CASE("rates along the family") {
  for (double eta : {0.6, 0.9}) {
    const SymmetricQubitProblem p(eta, kQuarter);
    CHECK(analytic_prs(p, kPi / 2) == Approx((1 + eta * std::sin(kQuarter)) / 2));
    CHECK(analytic_prs(p, kPi / 2) == Approx(testing::helstrom(p.ensemble())));
    CHECK(analytic_prs(p, kPi - 1e-7) == Approx(0.5).epsilon(1e-6));
    CHECK(analytic_pi(p, kPi / 2) == Approx(0.0));
    CHECK(analytic_pi(p, kPi - 1e-7) == Approx(p.pi_supremum()).epsilon(1e-6));
  }
  CHECK(analytic_prs(SymmetricQubitProblem(1.0, kQuarter), 3 * kPi / 4) == Approx(1.0));
  const double example = analytic_pi(SymmetricQubitProblem(0.9, kQuarter), 2 * kPi / 3);
  CHECK(example == Approx(testing::family_pi(0.9, kQuarter, 2 * kPi / 3)).epsilon(1e-15));
  CHECK(std::abs(example - 0.545466) < 1e-6);
}

TEST_CASE("self-consistency with success_metrics") {
  double worst = 0.0;
  for (double eta : {0.5, 0.7, 0.9, 1.0}) {
    for (double theta : {kPi / 8, kQuarter, 3 * kPi / 8}) {
      const SymmetricQubitProblem p(eta, theta);
      const auto e = testing::bloch_pair(eta, theta);
      for (int k = 0; k <= 40; ++k) {
        const double phi = kPi / 2 + (kPi / 2 - 0.01) * k / 40.0;
        const auto povm = analytic_povm(p, phi);
        const auto m = success_metrics(e, povm);
        worst = std::max(worst, std::abs(m.inconclusive - analytic_pi(p, phi)));
        worst = std::max(worst, std::abs(m.relative() - analytic_prs(p, phi)));
        CHECK(testing::povm_defect(povm) < 1e-12);
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("inverse map") {
  const SymmetricQubitProblem p(0.9, kQuarter);
  CHECK(phi_for_pi(p, 0.0) == Approx(kPi / 2));
  CHECK(phi_for_pi(p, analytic_pi(p, 2 * kPi / 3)) == Approx(2 * kPi / 3).epsilon(1e-14));
  CHECK(phi_for_pi(p, 0.545466) == Approx(2 * kPi / 3).epsilon(1e-5));
  CHECK_THROWS_AS(phi_for_pi(p, p.pi_supremum()), InfeasibleTargetError);
  CHECK_THROWS_AS(phi_for_pi(p, -0.1), ValidationError);
  const auto plateau = phi_max_and_prs_max(p);
  CHECK(phi_for_pi(p, 0.9, Clamp::ToPlateau) == plateau.phi_max);
  for (double t : {0.05, 0.2, 0.4, 0.6}) {
    CHECK(analytic_pi(p, phi_for_pi(p, t)) == Approx(t).epsilon(1e-13));
  }
}

TEST_CASE("plateau") {
  SUBCASE("pure pair") {
    const auto pl = phi_max_and_prs_max(SymmetricQubitProblem(1.0, kQuarter));
    CHECK(pl.phi_max == Approx(3 * kPi / 4));
    CHECK(pl.prs_max == Approx(1.0));
  }
  SUBCASE("values for the four curves") {
    for (double eta : {0.7, 0.8, 0.9, 1.0}) {
      const auto pl = phi_max_and_prs_max(SymmetricQubitProblem(eta, kQuarter));
      CHECK(std::abs(pl.prs_max - testing::plateau_by_search(eta, kQuarter)) <= 1e-12);
      CHECK(std::abs(pl.prs_max - testing::plateau_closed_form(eta, kQuarter)) <= 1e-14);
      CHECK(pl.pi_onset == Approx(eta * std::cos(kQuarter)).epsilon(1e-12));
    }
    CHECK(phi_max_and_prs_max(SymmetricQubitProblem(0.9, kQuarter)).prs_max ==
          Approx(0.912514).epsilon(1e-6));
  }
  SUBCASE("nearly orthogonal axis") {
    const auto pl = phi_max_and_prs_max(SymmetricQubitProblem(0.5, kPi / 2 - 1e-6));
    CHECK(pl.phi_max == Approx(kPi / 2).epsilon(1e-6));
    CHECK(pl.prs_max == Approx(0.75).epsilon(1e-6));
  }
  SUBCASE("agrees with the generalized eigenvalue bound") {
    for (double eta : {0.5, 0.7, 0.9, 1.0}) {
      for (double theta : {kPi / 8, kQuarter, 3 * kPi / 8}) {
        const SymmetricQubitProblem p(eta, theta);
        const double bound = max_relative_success(p.ensemble()).prs_max;
        CHECK(std::abs(phi_max_and_prs_max(p).prs_max - bound) <= 1e-10);
      }
    }
  }
}

TEST_CASE("envelope") {
  for (double eta : {0.7, 1.0}) {
    const SymmetricQubitProblem p(eta, kQuarter);
    const auto e = p.ensemble();
    for (int k = 0; k < 20; ++k) {
      const double t = 0.05 * k;
      const double prs = envelope_prs(p, t);
      CHECK(std::abs(prs - testing::envelope_by_bisection(eta, kQuarter, t)) <= 1e-10);
      const auto povm = envelope_povm(p, t);
      CHECK(testing::povm_defect(povm) < 1e-12);
      const auto m = success_metrics(e, povm);
      CHECK(m.inconclusive == Approx(t).epsilon(1e-12));
      CHECK(m.relative() == Approx(prs).epsilon(1e-12));
      CHECK(check(e, povm).optimal);
    }
  }
  CHECK_THROWS_AS(envelope_prs(SymmetricQubitProblem(0.9, kQuarter), 1.0), ValidationError);
}
