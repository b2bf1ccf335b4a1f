#include <doctest.h>

#include <random>

#include "epsens/att.hpp"
#include "epsens/nuisance.hpp"
#include "reference/classical.hpp"

using namespace epsens;
using oracle::rel_close;

TEST_SUITE("att") {

TEST_CASE("classical reductions at eps0=1") {
  std::mt19937_64 rng(31);
  const auto eps = SensitivitySpec::constant(1.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto ds = oracle::make_random_binary(200, 3, rng);
    const auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian());
    CHECK(rel_close(att(AttMethod::Reg, ds, fits, eps), oracle::reg_att(ds, fits.mu0hat), 1e-10));
    CHECK(rel_close(att(AttMethod::HT, ds, fits, eps), oracle::ht_att(ds, fits.ehat), 1e-10));
    CHECK(rel_close(att(AttMethod::Hajek, ds, fits, eps), oracle::hajek_att(ds, fits.ehat), 1e-10));
    CHECK(rel_close(att(AttMethod::DR, ds, fits, eps),
                    oracle::aipw_att(ds, fits.ehat, fits.mu0hat), 1e-10));
  }
}

TEST_CASE("the two dr forms of the counterfactual mean agree") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto ds = oracle::make_random_binary(80, 3, rng);
    const auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian());
    const auto eps = SensitivitySpec::constant(1.0, unif(rng));
    const auto [reg_aug, ht_aug] = att_mu_t0_dr_forms(ds, fits, eps);
    CHECK(std::abs(reg_aug - ht_aug) < 1e-10 * (1.0 + std::abs(reg_aug)));
  }
}

TEST_CASE("eps1 never enters") {
  std::mt19937_64 rng(33);
  const auto ds = oracle::make_random_binary(120, 2, rng);
  const auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian());
  for (auto m : {AttMethod::Reg, AttMethod::HT, AttMethod::Hajek, AttMethod::DR, AttMethod::DR2}) {
    const double a = att(m, ds, fits, SensitivitySpec::constant(1.0, 1.3));
    const double b = att(m, ds, fits, SensitivitySpec::constant(5.0, 1.3));
    CHECK(a == b);
  }
}

TEST_CASE("hajek equals ht when the odds weights already sum to n1") {
  // build scores whose control odds sum to exactly n1
  Dataset ds;
  const int n = 6;
  ds.x = Eigen::MatrixXd::Zero(n, 1);
  ds.z.resize(n);
  ds.z << 1, 1, 1, 0, 0, 0;
  ds.y.resize(n);
  ds.y << 2, 3, 4, 1, 2, 3;
  Eigen::VectorXd ehat = Eigen::VectorXd::Constant(n, 0.5);  // odds 1 each, sum = 3 = n1
  auto fits = oracle::make_fits(ehat, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n));
  const auto eps = SensitivitySpec::constant(1.0, 1.4);
  CHECK(att(AttMethod::HT, ds, fits, eps) ==
        doctest::Approx(att(AttMethod::Hajek, ds, fits, eps)).epsilon(1e-14));
}

TEST_CASE("bounds: degenerate, substitution rule, bracketing") {
  std::mt19937_64 rng(34);
  const auto ds = oracle::make_random_binary(200, 3, rng, false, true);
  auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian());
  fits.mu0hat = fits.mu0hat.cwiseMax(0.0);

  const auto degen = att_bounds(ds, fits, {1.1, 1.1}, AttMethod::Reg);
  const double at = att(AttMethod::Reg, ds, fits, SensitivitySpec::constant(1.0, 1.1));
  CHECK(degen.first == doctest::Approx(at));
  CHECK(degen.second == doctest::Approx(at));

  const auto reg = att_bounds(ds, fits, {1.0, 2.0}, AttMethod::Reg);
  CHECK(reg.first ==
        doctest::Approx(att(AttMethod::Reg, ds, fits, SensitivitySpec::constant(1.0, 2.0))));
  CHECK(reg.second ==
        doctest::Approx(att(AttMethod::Reg, ds, fits, SensitivitySpec::constant(1.0, 1.0))));

  std::uniform_real_distribution<double> unif(1.0, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    const double mid = att(AttMethod::Reg, ds, fits, SensitivitySpec::constant(1.0, unif(rng)));
    CHECK(reg.first <= mid + 1e-12);
    CHECK(mid <= reg.second + 1e-12);
  }
  CHECK_THROWS_AS(att_bounds(ds, fits, {2.0, 1.0}, AttMethod::Reg), std::invalid_argument);
}

TEST_CASE("plug-in variance reduces to the classical att influence variance") {
  std::mt19937_64 rng(35);
  const auto ds = oracle::make_random_binary(300, 3, rng);
  const auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian());
  const auto eps = SensitivitySpec::constant(1.0, 1.0);
  const double tau_t = att(AttMethod::DR, ds, fits, eps);
  CHECK(rel_close(att_variance_plugin(ds, fits, eps),
                  oracle::aipw_att_variance(ds, fits.ehat, fits.mu1hat, fits.mu0hat, tau_t),
                  1e-10));
}

TEST_CASE("constant outcome with perfect fit leaves only the mean-function term") {
  Dataset ds;
  ds.x = Eigen::MatrixXd::Zero(4, 1);
  ds.z.resize(4);
  ds.z << 1, 0, 1, 0;
  ds.y = Eigen::VectorXd::Constant(4, 3.0);
  auto fits = oracle::make_fits(Eigen::VectorXd::Constant(4, 0.5),
                                Eigen::VectorXd::Constant(4, 3.0),
                                Eigen::VectorXd::Constant(4, 3.0));
  const auto eps = SensitivitySpec::constant(1.0, 1.5);
  const double tau_t = att(AttMethod::DR, ds, fits, eps);
  const double e = 0.5;
  const double expected = 0.5 * std::pow(3.0 - 1.5 * 3.0 - tau_t, 2) / (e * e) / 4.0;
  CHECK(att_variance_plugin(ds, fits, eps) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("no treated units raises") {
  Dataset ds;
  ds.x = Eigen::MatrixXd::Zero(4, 1);
  ds.z = Eigen::VectorXi::Zero(4);
  ds.y = Eigen::VectorXd::Ones(4);
  auto fits = oracle::make_fits(Eigen::VectorXd::Constant(4, 0.5), Eigen::VectorXd::Zero(4),
                                Eigen::VectorXd::Zero(4));
  CHECK_THROWS_AS(att(AttMethod::Reg, ds, fits, SensitivitySpec::constant(1.0, 1.0)),
                  std::runtime_error);
}

}  // TEST_SUITE
