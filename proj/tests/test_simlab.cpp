#include <doctest.h>

#include <random>

#include "lamp/errors.hpp"
#include "lamp/simlab.hpp"
#include "oracles.hpp"

using namespace lamp;

namespace {

SimDesign small_design(FamilyKind kind, Eigen::Index n, CovKind cov, double r) {
  SimDesign d;
  d.n = n;
  d.beta_true = Eigen::Vector3d(1.0, 0.0, -0.5);
  d.cov_kind = cov;
  d.r = r;
  d.family = Family(kind);
  d.reps = 4;
  d.seed = 99;
  return d;
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd C = X.rowwise() - X.colwise().mean();
  return C.transpose() * C / static_cast<double>(X.rows() - 1);
}

}  // namespace

TEST_SUITE("simlab") {
  TEST_CASE("presets") {
    const SimDesign t1 = SimDesign::preset("highdim");
    CHECK(t1.n == 200);
    CHECK(t1.p() == 1000);
    CHECK(t1.q() == 3);
    CHECK(t1.zeta1() == 0.7);
    CHECK(t1.zeta2() == 1.5);
    CHECK(SimDesign::preset("ar1").cov_kind == CovKind::ar1);
    CHECK(SimDesign::preset("ar1").alpha_true == -3.0);
    CHECK(SimDesign::preset("poisson").family.kind() == FamilyKind::poisson);
    CHECK(SimDesign::preset("probit").family.kind() == FamilyKind::probit);
    CHECK_THROWS_AS(SimDesign::preset("nosuch"), ContractError);
    SimDesign bad = t1;
    bad.r = 1.5;
    CHECK_THROWS_AS(bad.validate(), ContractError);
  }

  TEST_CASE("covariates follow the requested covariance") {
    SimDesign d = small_design(FamilyKind::logistic, 100000, CovKind::compound, 0.5);
    const Eigen::MatrixXd X = gen_covariates(d, 0);
    const Eigen::MatrixXd S = sample_cov(X);
    // SE of a sample covariance entry is at most about sqrt(2 / n)
    const double tol = 4.0 * std::sqrt(2.0 / 100000);
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(S(i, j) - (i == j ? 1.0 : 0.5)) < tol);
    CHECK(std::abs(X.mean()) < tol);

    d.cov_kind = CovKind::ar1;
    const Eigen::MatrixXd A = sample_cov(gen_covariates(d, 1));
    CHECK(std::abs(A(0, 2) - 0.25) < tol);
    CHECK(std::abs(A(0, 1) - 0.5) < tol);

    d.r = 0.0;
    const Eigen::MatrixXd I = sample_cov(gen_covariates(d, 2));
    CHECK((I - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < tol);

    // error shrinks with n
    SimDesign few = small_design(FamilyKind::logistic, 1000, CovKind::compound, 0.5);
    const double err_small = (sample_cov(gen_covariates(few, 0)) - few.covariance()).norm();
    few.n = 100000;
    const double err_large = (sample_cov(gen_covariates(few, 0)) - few.covariance()).norm();
    CHECK(err_large < err_small);

    // covariates do not depend on the family or the true coefficients
    SimDesign other = small_design(FamilyKind::poisson, 50, CovKind::compound, 0.5);
    SimDesign base = small_design(FamilyKind::logistic, 50, CovKind::compound, 0.5);
    other.beta_true *= 3.0;
    CHECK((gen_covariates(other, 3) == gen_covariates(base, 3)));
    CHECK((gen_covariates(base, 3) != gen_covariates(base, 4)));
  }

  TEST_CASE("responses") {
    SimDesign d = small_design(FamilyKind::logistic, 100000, CovKind::compound, 0.5);
    d.beta_true.setZero();
    const Eigen::MatrixXd X = gen_covariates(d, 0);
    const Eigen::VectorXd yl = gen_response(d, X, 0);
    CHECK(std::abs((yl.array() > 0).cast<double>().mean() - 0.5) < 4 * 0.5 / std::sqrt(1e5));
    CHECK(((yl.array() == 1.0) || (yl.array() == -1.0)).all());

    d.family = Family(FamilyKind::poisson);
    const Eigen::VectorXd yp = gen_response(d, X, 0);
    CHECK(std::abs(yp.mean() - 1.0) < 4 / std::sqrt(1e5));
    CHECK((yp.array() >= 0).all());

    d.alpha_true = 31.0;
    CHECK_THROWS_AS(gen_response(d, X.topRows(3), 0), ContractError);

    // large-n probit maximum likelihood recovers the truth
    SimDesign pr = small_design(FamilyKind::probit, 50000, CovKind::compound, 0.5);
    pr.alpha_true = -0.5;
    const Dataset data = gen_dataset(pr, 0);
    const Eigen::VectorXd mle = fit_mle(data, pr.family);
    CHECK((mle - pr.theta_true()).cwiseAbs().maxCoeff() < 0.05);
  }

  TEST_CASE("replication metrics") {
    SimDesign d;
    d.beta_true = (Eigen::VectorXd(5) << 1.0, -1.0, 0.0, 0.0, 0.0).finished();
    d.r = 0.0;
    Eigen::VectorXd t = Eigen::VectorXd::Zero(6);
    t << 0.0, 0.9, -1.2, 0.3, 0.0, 0.0;
    ReplicationMetrics m = evaluate(t, d);
    CHECK(m.tp == 2);
    CHECK(m.fp == 1);
    CHECK(m.of);
    CHECK(!m.cf);
    CHECK(!m.uf);
    CHECK(m.l1 == doctest::Approx(0.6));
    CHECK(m.l2 == doctest::Approx(0.14));
    t(3) = 0.0;
    m = evaluate(t, d);
    CHECK(m.cf);
    t(2) = 0.0;
    t(4) = 0.5;
    m = evaluate(t, d);
    CHECK(m.uf);
    CHECK(m.tp + m.fp == 2);
    CHECK(static_cast<int>(m.cf) + static_cast<int>(m.of) + static_cast<int>(m.uf) == 1);
    CHECK(model_error(d.theta_true(), d) == 0.0);
    CHECK_THROWS_AS(evaluate(Eigen::VectorXd::Zero(3), d), ContractError);

    CHECK(mrme({1.0, 1.0, 1.0}) == 1.0);
    CHECK(mrme({3.0, 1.0, 2.0, 10.0}) == 2.5);
    CHECK(quantile({1, 2, 3, 4, 5}, 0.25) == 2.0);
    CHECK(quantile({4, 1}, 0.5) == 2.5);
    const MeanSe ms = mean_se({1.0, 2.0, 3.0});
    CHECK(ms.mean == 2.0);
    CHECK(ms.se == doctest::Approx(1.0 / std::sqrt(3.0)));
    const BoxStats b = BoxStats::of({5, 1, 3, 2, 4});
    CHECK(b.min == 1);
    CHECK(b.median == 3);
    CHECK(b.max == 5);
  }

  TEST_CASE("model error matches a Monte-Carlo prediction error") {
    SimDesign d = small_design(FamilyKind::gaussian, 10, CovKind::ar1, 0.6);
    d.alpha_true = 0.3;
    const Eigen::VectorXd theta_hat = (Eigen::VectorXd(4) << 0.1, 0.7, 0.2, -0.9).finished();
    d.n = 400000;
    const Eigen::MatrixXd X = gen_covariates(d, 0);
    const Eigen::VectorXd diff = theta_hat - d.theta_true();
    const Eigen::VectorXd pred = (X * diff.tail(3)).array() + diff(0);
    const double mc = pred.squaredNorm() / static_cast<double>(X.rows());
    CHECK(model_error(theta_hat, d) == doctest::Approx(mc).epsilon(0.01));
  }

  TEST_CASE("penalty config parsing") {
    CHECK(PenaltyConfig::parse("lasso").spec.kind == PenaltyKind::lasso);
    CHECK(PenaltyConfig::parse("scad:3.7").spec.a == 3.7);
    CHECK(PenaltyConfig::parse("mcp:20").spec.gamma == 20.0);
    const PenaltyConfig s = PenaltyConfig::parse("sigmoid:0.05");
    CHECK(s.spec.kind == PenaltyKind::lamp);
    CHECK(s.spec.lambda0 == 0.05);
    CHECK(s.spec.alpha1 == 0.0);
    CHECK(PenaltyConfig::parse("sigmoid:0.1:0.5").spec.rho() == doctest::Approx(0.5));
    CHECK(PenaltyConfig::parse("poisson:hybrid").hybrid);
    CHECK(PenaltyConfig::parse("probit:0.5").spec.generator.kind() == FamilyKind::probit);
    CHECK(PenaltyConfig::parse("lamp:gamma:0.5").spec.alpha1 < 0.0);
    CHECK(PenaltyConfig::parse("oracle").oracle);
    CHECK(PenaltyConfig::parse_list("lasso, scad:3.7,mcp:3").size() == 3);
    CHECK_THROWS_AS(PenaltyConfig::parse("sigmoid"), ContractError);
    CHECK_THROWS_AS(PenaltyConfig::parse("ridge"), ContractError);
    CHECK_THROWS_AS(PenaltyConfig::parse("scad:0.5"), ContractError);
    CHECK_THROWS_AS(PenaltyConfig::parse("lasso:hybrid"), ContractError);
    CHECK_THROWS_AS(PenaltyConfig::parse("sigmoid:0.1:2"), ContractError);
  }

  TEST_CASE("simulation tables") {
    SimDesign d = SimDesign::preset("ar1");
    d.reps = 6;
    SimOptions opts;
    opts.n_lambda = 40;
    const auto configs = PenaltyConfig::parse_list("oracle,lasso,sigmoid:0.1,mcp:20");
    const SimReport a = run_table(d, configs, opts);
    REQUIRE(a.rows.size() == 4);
    const SimRow& oracle_row = a.row("oracle");
    CHECK(oracle_row.cf.mean == 1.0);
    CHECK(oracle_row.tp.mean == 3.0);
    CHECK(oracle_row.l2.mean == 0.0);
    for (const SimRow& r : a.rows) {
      CHECK(r.reps_completed + r.failures == 6);
      CHECK(r.cf.mean + r.of.mean + r.uf.mean == doctest::Approx(1.0));
      CHECK(r.replications.size() == 6u);
      for (const auto& m : r.replications) {
        CHECK(m.tp <= 3);
        CHECK(static_cast<int>(m.cf) + static_cast<int>(m.of) + static_cast<int>(m.uf) == 1);
      }
    }

    // bit-for-bit reproducible, also across thread counts
    opts.threads = 3;
    const SimReport b = run_table(d, configs, opts);
    for (std::size_t c = 0; c < a.rows.size(); ++c) {
      CHECK(a.rows[c].tp.mean == b.rows[c].tp.mean);
      CHECK(a.rows[c].l1.mean == b.rows[c].l1.mean);
      CHECK((a.rows[c].mrme == b.rows[c].mrme || (std::isnan(a.rows[c].mrme) && std::isnan(b.rows[c].mrme))));
    }
    CHECK_THROWS_AS(a.row("scad"), ContractError);
  }

  TEST_CASE("perturbation") {
    const SimDesign d = SimDesign::preset("ar1");
    const Dataset base = gen_dataset(d, 0);
    Dataset same = base;
    perturb_covariates(same, 0.0, d.seed, 0);
    CHECK((same.X == base.X));
    Dataset moved = base;
    perturb_covariates(moved, 0.5, d.seed, 0);
    CHECK((moved.X.col(0).array() == 1.0).all());
    CHECK((moved.y == base.y));
    const Eigen::MatrixXd noise = moved.X.rightCols(8) - base.X.rightCols(8);
    CHECK(std::sqrt(noise.squaredNorm() / static_cast<double>(noise.size())) == doctest::Approx(0.5).epsilon(0.1));
    CHECK_THROWS_AS(perturb_covariates(moved, -1.0, d.seed, 0), ContractError);
  }

  TEST_CASE("stability experiment") {
    SimDesign d = SimDesign::preset("ar1");
    d.reps = 2;
    StabilityOptions opts;
    opts.cv_repeats = 3;
    opts.n_lambda = 20;
    opts.folds = 5;
    const auto configs = PenaltyConfig::parse_list("lasso,sigmoid:0.1");
    const StabilityReport r = stability_experiment(d, configs, opts);
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) {
      CHECK(row.lambda_sd.size() == 2u);
      for (const double v : row.lambda_sd) CHECK(v >= 0.0);
      CHECK(row.lambda_box.min <= row.lambda_box.median);
    }
    opts.vary_fold_seed = false;
    const StabilityReport fixed = stability_experiment(d, configs, opts);
    for (const auto& row : fixed.rows) {
      for (const double v : row.lambda_sd) CHECK(v == 0.0);
      for (const double v : row.coef_sd) CHECK(v == 0.0);
    }
    opts.cv_repeats = 1;
    CHECK_THROWS_AS(stability_experiment(d, configs, opts), ContractError);
    opts.cv_repeats = 3;
    CHECK_THROWS_AS(stability_experiment(d, PenaltyConfig::parse_list("sigmoid:hybrid"), opts), ContractError);
  }

  TEST_CASE("path traces") {
    const SimDesign d = SimDesign::preset("ar1");
    const auto configs = PenaltyConfig::parse_list("lasso,sigmoid:0.1,mcp:20");
    const auto a = path_smoothness_export(d, configs, 0, 60, 5);
    const auto b = path_smoothness_export(d, configs, 0, 60, 5);
    REQUIRE(a.size() == 3);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK((a[k].coefficients == b[k].coefficients));
      CHECK(a[k].coefficients.rows() == 60);
      CHECK(a[k].max_adjacent_jump == max_adjacent_jump(a[k].coefficients));
      CHECK(a[k].bic_index < 60u);
      CHECK(a[k].cv_index < 60u);
    }
    // the convex path is continuous: refining the grid shrinks the largest step
    const auto fine = path_smoothness_export(d, PenaltyConfig::parse_list("lasso"), 0, 240, 5);
    CHECK(fine[0].max_adjacent_jump < 0.5 * a[0].max_adjacent_jump);

    Eigen::MatrixXd c(3, 3);
    c << 0.5, 0, 0, 0.4, 0.3, 0, 0.6, 0.3, -0.2;
    CHECK(max_adjacent_jump(c) == doctest::Approx(0.3));
  }

  TEST_CASE("stream seeds") {
    CHECK(stream_seed(1, 2, 3) == stream_seed(1, 2, 3));
    CHECK(stream_seed(1, 2, 3) != stream_seed(1, 3, 2));
    CHECK(stream_seed(1, 2, 3) != stream_seed(2, 2, 3));
  }
}
