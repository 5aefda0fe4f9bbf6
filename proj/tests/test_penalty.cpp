#include <doctest.h>

#include <random>

#include "lamp/errors.hpp"
#include "lamp/penalty.hpp"
#include "oracles.hpp"

using namespace lamp;

namespace {

const std::vector<std::pair<FamilyKind, oracle::Cum>> kGenerators = {
    {FamilyKind::gaussian, oracle::Cum::gaussian}, {FamilyKind::logistic, oracle::Cum::logistic},
    {FamilyKind::poisson, oracle::Cum::poisson},   {FamilyKind::gamma, oracle::Cum::gamma},
    {FamilyKind::inverse_gaussian, oracle::Cum::inverse_gaussian}, {FamilyKind::probit, oracle::Cum::probit}};

PenaltySpec random_lamp(FamilyKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lam(0.1, 2.0), lam0(0.01, 3.0), a1(-3.0, 0.0);
  const Family f(kind);
  double alpha1 = a1(rng);
  if (f.negative_domain() || kind == FamilyKind::gaussian) alpha1 = std::min(alpha1, -0.1);
  return PenaltySpec::lamp(f, lam(rng), lam0(rng), alpha1);
}

std::vector<PenaltySpec> assorted_specs() {
  return {PenaltySpec::lasso(0.7),
          PenaltySpec::scad(0.7, 3.7),
          PenaltySpec::mcp(0.7, 3.0),
          PenaltySpec::sigmoid(0.7, 0.5),
          PenaltySpec::sigmoid(1.0, 2.0 / 1.1, 1.0),
          PenaltySpec::lamp(Family(FamilyKind::poisson), 0.7, 1.3),
          PenaltySpec::lamp(Family(FamilyKind::gamma), 0.7, 0.8),
          PenaltySpec::lamp(Family(FamilyKind::inverse_gaussian), 0.7, 0.8),
          PenaltySpec::lamp(Family(FamilyKind::probit), 0.7, 0.8),
          PenaltySpec::lamp(Family(FamilyKind::gaussian), 0.7, 0.8)};
}

bool near_kink(const PenaltySpec& s, double beta) {
  if (s.kind == PenaltyKind::scad) return std::abs(beta - s.lambda) < 1e-2 || std::abs(beta - s.a * s.lambda) < 1e-2;
  if (s.kind == PenaltyKind::mcp) return std::abs(beta - s.gamma * s.lambda) < 1e-2;
  return false;
}

}  // namespace

TEST_SUITE("penalty") {
  TEST_CASE("generic and closed forms agree for every generator") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> b(0.0, 5.0);
    for (const auto& [kind, cum] : kGenerators) {
      CAPTURE(Family(kind).name());
      for (int k = 0; k < 1000; ++k) {
        const PenaltySpec s = random_lamp(kind, rng);
        const double beta = b(rng);
        const double gv = lamp_generic_value(s, beta);
        const double cv = lamp_closed_value(s, beta);
        CHECK(std::abs(gv - cv) <= 1e-10 * std::max(1.0, std::abs(gv)));
        const double gd = lamp_generic_deriv(s, beta);
        const double cd = lamp_closed_deriv(s, beta);
        CHECK(std::abs(gd - cd) <= 1e-10 * std::max(1.0, std::abs(gd)));
      }
    }
  }

  TEST_CASE("value matches the defining formula in extended precision") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> b(0.0, 5.0);
    for (const auto& [kind, cum] : kGenerators) {
      for (int k = 0; k < 200; ++k) {
        const PenaltySpec s = random_lamp(kind, rng);
        const double beta = b(rng);
        const double ref = static_cast<double>(oracle::lamp_value(cum, s.lambda, s.lambda0, s.alpha1, beta));
        CHECK(penalty_value(s, beta) == doctest::Approx(ref).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("zero at zero and slope lambda at zero") {
    for (const auto& s : assorted_specs()) {
      CAPTURE(s.label());
      CHECK(penalty_value(s, 0.0) == 0.0);
      CHECK(penalty_deriv(s, 0.0) == doctest::Approx(s.lambda).epsilon(1e-14));
    }
  }

  TEST_CASE("special cases") {
    // LAMP(gaussian) with alpha1 = -1 is the elastic net
    const PenaltySpec en = PenaltySpec::lamp(Family(FamilyKind::gaussian), 0.6, 0.9, -1.0);
    for (const double beta : {0.1, 0.5, 2.0, 7.5})
      CHECK(penalty_value(en, beta) == doctest::Approx(0.6 * beta + 0.45 * beta * beta).epsilon(1e-13));
    // Poisson asymptote
    const PenaltySpec po = PenaltySpec::lamp(Family(FamilyKind::poisson), 0.8, 2.0);
    CHECK(penalty_value(po, 1e3) == doctest::Approx(0.8 * 0.8 / 2.0).epsilon(1e-14));
    // MCP flat region
    const PenaltySpec m = PenaltySpec::mcp(0.5, 3.0);
    CHECK(penalty_deriv(m, 1.5) == 0.0);
    CHECK(penalty_deriv(m, 4.0) == 0.0);
    CHECK(penalty_value(m, 4.0) == doctest::Approx(3.0 * 0.25 / 2.0));
    // SCAD is continuous at both kinks and flat beyond a*lambda
    const PenaltySpec sc = PenaltySpec::scad(0.5, 3.7);
    CHECK(penalty_value(sc, 0.5 - 1e-12) == doctest::Approx(penalty_value(sc, 0.5 + 1e-12)));
    CHECK(penalty_value(sc, 1.85 - 1e-12) == doctest::Approx(penalty_value(sc, 1.85 + 1e-12)));
    CHECK(penalty_value(sc, 10.0) == doctest::Approx(0.25 * 4.7 / 2.0));
    // LASSO
    const PenaltySpec la = PenaltySpec::lasso(0.3);
    CHECK(penalty_value(la, 2.0) == doctest::Approx(0.6));
    CHECK(penalty_second_deriv(la, 2.0) == 0.0);
  }

  TEST_CASE("derivatives match finite differences away from kinks") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> b(0.05, 4.0);
    for (const auto& s : assorted_specs()) {
      CAPTURE(s.label());
      for (int k = 0; k < 200; ++k) {
        const double beta = b(rng);
        if (near_kink(s, beta)) continue;
        const auto v = [&](double x) { return penalty_value(s, x); };
        const auto d = [&](double x) { return penalty_deriv(s, x); };
        CHECK(oracle::rel_err(penalty_deriv(s, beta), oracle::diff(v, beta, 1e-3)) < 1e-6);
        CHECK(oracle::rel_err(penalty_second_deriv(s, beta), oracle::diff(d, beta, 1e-3)) < 1e-6);
      }
    }
    const PenaltySpec sig = PenaltySpec::sigmoid(1.0, 2.0 / 1.1, 1.0);
    const auto v = [&](double x) { return penalty_value(sig, x); };
    CHECK(oracle::rel_err(penalty_deriv(sig, 1.0), oracle::diff(v, 1.0, 1e-3)) < 1e-6);
  }

  TEST_CASE("second derivative near zero matches the equal-concavity parameters") {
    const PenaltySpec sig = PenaltySpec::sigmoid(1.0, 2.0 / 1.1, 1.0);
    CHECK(penalty_second_deriv(sig, 1e-12) == doctest::Approx(-1.0 / 1.1).epsilon(1e-10));
    const PenaltySpec po = PenaltySpec::lamp(Family(FamilyKind::poisson), 1.0, 1.0 / 1.1);
    CHECK(penalty_second_deriv(po, 1e-12) == doctest::Approx(-1.0 / 1.1).epsilon(1e-10));
    CHECK(penalty_second_deriv(PenaltySpec::lasso(1.0), 0.7) == 0.0);
  }

  TEST_CASE("kinks are rejected for second derivatives") {
    CHECK_THROWS_AS(penalty_second_deriv(PenaltySpec::scad(0.5, 3.7), 0.5), KinkError);
    CHECK_THROWS_AS(penalty_second_deriv(PenaltySpec::scad(0.5, 3.7), 1.85), KinkError);
    CHECK_THROWS_AS(penalty_second_deriv(PenaltySpec::mcp(0.5, 3.0), 1.5), KinkError);
    CHECK_THROWS_AS(penalty_value(PenaltySpec::lasso(1.0), -0.1), ContractError);
    CHECK_THROWS_AS(penalty_deriv(PenaltySpec::sigmoid(1.0, 1.0), -0.1), ContractError);
  }

  TEST_CASE("max concavity") {
    CHECK(max_concavity(PenaltySpec::sigmoid(1.0, 2.0 / 1.1, 1.0)) == doctest::Approx(1.0 / 1.1).epsilon(1e-14));
    CHECK(max_concavity(PenaltySpec::lamp(Family(FamilyKind::poisson), 1.0, 1.0 / 1.1)) ==
          doctest::Approx(1.0 / 1.1).epsilon(1e-14));
    CHECK(max_concavity(PenaltySpec::mcp(1.0, 1.1)) == doctest::Approx(1.0 / 1.1));
    CHECK(max_concavity(PenaltySpec::scad(1.0, 2.1)) == doctest::Approx(1.0 / 1.1));
    CHECK(max_concavity(PenaltySpec::lasso(1.0)) == 0.0);
    CHECK(max_concavity(PenaltySpec::sigmoid(1.0, 0.1, 1.0)) == doctest::Approx(0.05));
    CHECK(max_concavity(PenaltySpec::sigmoid(1.0, 0.3, 0.5)) == doctest::Approx(0.3 / 1.5));
    const PenaltySpec ga = PenaltySpec::lamp(Family(FamilyKind::gamma), 0.8, 1.7, -1.0);
    CHECK(max_concavity(ga) == doctest::Approx(1.7));
    // grid search confirms the supremum sits at zero
    double sup = 0.0;
    for (int k = 1; k <= 5000; ++k) sup = std::max(sup, -penalty_second_deriv(ga, k * 1e-3));
    CHECK(sup <= max_concavity(ga) + 1e-12);
    CHECK(sup > 0.99 * max_concavity(ga));
  }

  TEST_CASE("lasso limit") {
    CHECK(lasso_limit_check(PenaltySpec::sigmoid(0.7, 1.0), 0.0) == 1.0);
    CHECK(lasso_limit_check(PenaltySpec::sigmoid(0.7, 1.0), 1.0, 1e-6) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(lasso_limit_check(PenaltySpec::lamp(Family(FamilyKind::poisson), 0.7, 1.0), 2.0, 1e-6) ==
          doctest::Approx(1.0).epsilon(1e-4));
  }

  TEST_CASE("concave LAMP is bounded by lasso and has a nonincreasing slope") {
    std::mt19937_64 rng(14);
    for (const auto kind : {FamilyKind::logistic, FamilyKind::poisson, FamilyKind::gamma,
                            FamilyKind::inverse_gaussian, FamilyKind::probit}) {
      for (int k = 0; k < 100; ++k) {
        const PenaltySpec s = random_lamp(kind, rng);
        double prev = penalty_deriv(s, 0.0);
        for (double beta = 0.05; beta < 5.0; beta += 0.05) {
          const double v = penalty_value(s, beta);
          CHECK(v >= 0.0);
          CHECK(v <= s.lambda * beta * (1 + 1e-12));
          const double d = penalty_deriv(s, beta);
          CHECK(d <= prev + 1e-12);
          CHECK(penalty_second_deriv(s, beta) <= 0.0);
          prev = d;
        }
      }
    }
  }

  TEST_CASE("poisson penalty ignores alpha1") {
    const Family po(FamilyKind::poisson);
    for (const double beta : {0.0, 0.3, 1.0, 4.0}) {
      const double v0 = penalty_value(PenaltySpec::lamp(po, 0.9, 1.4, 0.0), beta);
      CHECK(penalty_value(PenaltySpec::lamp(po, 0.9, 1.4, -1.0), beta) == doctest::Approx(v0).epsilon(1e-14));
      CHECK(penalty_value(PenaltySpec::lamp(po, 0.9, 1.4, -3.0), beta) == doctest::Approx(v0).epsilon(1e-14));
    }
  }

  TEST_CASE("parameter validation lists every problem") {
    CHECK_NOTHROW(PenaltySpec::sigmoid(1.0, 0.5).validate());
    PenaltySpec bad = PenaltySpec::lamp(Family(FamilyKind::gamma), -1.0, 0.0, 0.0);
    try {
      bad.validate();
      FAIL("expected ContractError");
    } catch (const ContractError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("lambda ") != std::string::npos);
      CHECK(msg.find("lambda0") != std::string::npos);
      CHECK(msg.find("alpha1") != std::string::npos);
    }
    CHECK_THROWS_AS(PenaltySpec::scad(1.0, 2.0).validate(), ContractError);
    CHECK_THROWS_AS(PenaltySpec::mcp(1.0, 1.0).validate(), ContractError);
    CHECK_THROWS_AS(PenaltySpec::sigmoid(1.0, 1.0, 2.0).validate(), ContractError);
    CHECK(PenaltySpec::lasso(1.0).is_convex());
    CHECK(!PenaltySpec::mcp(1.0, 3.0).is_convex());
  }

  TEST_CASE("curve export") {
    const auto pts = penalty_curve(PenaltySpec::mcp(1.0, 1.1), 3.0, 31);
    REQUIRE(pts.size() == 31);
    CHECK(pts.front().beta == 0.0);
    CHECK(pts.back().beta == doctest::Approx(3.0));
    CHECK(pts.front().deriv == 1.0);
    CHECK(pts.back().value == doctest::Approx(1.1 / 2));
  }
}
