#include <doctest.h>

#include <random>

#include "epsens/calibration.hpp"
#include "epsens/nuisance.hpp"
#include "reference/classical.hpp"

using namespace epsens;

TEST_SUITE("calibration") {

TEST_CASE("empty drop set is the exact identity for linear outcome fits") {
  std::mt19937_64 rng(81);
  const auto ds = oracle::make_random_binary(120, 3, rng);
  const auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian());
  const auto rec = calibrate(ds, fits, {});
  CHECK(rec.dropped == "(none)");
  for (const auto& s : {rec.eps1, rec.eps0}) {
    CHECK(s.min == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.max == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.mean == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(rec.n_excluded1 == 0);
  CHECK(rec.n_excluded0 == 0);
}

TEST_CASE("permuting covariate columns leaves the record unchanged") {
  std::mt19937_64 rng(82);
  auto ds = oracle::make_random_binary(150, 3, rng);
  ds.covariate_names = {"a", "b", "c"};
  const auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian());
  const auto rec = calibrate(ds, fits, {1});  // drop "b"

  Dataset perm = ds;
  perm.x.col(0) = ds.x.col(2);
  perm.x.col(2) = ds.x.col(0);
  perm.covariate_names = {"c", "b", "a"};
  const auto pfits = fit_nuisances(perm, GlmFamily::binomial(), GlmFamily::gaussian());
  const auto prec = calibrate(perm, pfits, {1});

  CHECK(rec.dropped == prec.dropped);
  CHECK(rec.eps1.min == doctest::Approx(prec.eps1.min).epsilon(1e-9));
  CHECK(rec.eps1.max == doctest::Approx(prec.eps1.max).epsilon(1e-9));
  CHECK(rec.eps1.q50 == doctest::Approx(prec.eps1.q50).epsilon(1e-9));
  CHECK(rec.eps0.mean == doctest::Approx(prec.eps0.mean).epsilon(1e-9));
}

TEST_CASE("an independent covariate calibrates to 1") {
  std::mt19937_64 rng(83);
  const int reps = 5;
  CalibrationRecord::Summary acc1{}, acc0{};
  for (int rep = 0; rep < reps; ++rep) {
    std::normal_distribution<double> norm(0, 1);
    std::uniform_real_distribution<double> unif(0, 1);
    const int n = 5000;
    Dataset ds;
    ds.x.resize(n, 3);
    ds.z.resize(n);
    ds.y.resize(n);
    for (int i = 0; i < n; ++i) {
      ds.x(i, 0) = norm(rng);
      ds.x(i, 1) = norm(rng);
      ds.x(i, 2) = norm(rng);  // independent of treatment and outcome
      const double e = 1.0 / (1.0 + std::exp(-(0.4 * ds.x(i, 0) - 0.3 * ds.x(i, 1))));
      ds.z[i] = unif(rng) < e ? 1 : 0;
      // outcome means bounded away from 0 so the projection ratios stay tight
      ds.y[i] = 10.0 + ds.z[i] + 0.8 * ds.x(i, 0) + 0.5 * ds.x(i, 1) + norm(rng);
    }
    const auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian());
    const auto rec = calibrate(ds, fits, {2});
    acc1.min += rec.eps1.min / reps;
    acc1.max += rec.eps1.max / reps;
    acc1.mean += rec.eps1.mean / reps;
    acc1.q05 += rec.eps1.q05 / reps;
    acc1.q95 += rec.eps1.q95 / reps;
    acc0.min += rec.eps0.min / reps;
    acc0.max += rec.eps0.max / reps;
    acc0.mean += rec.eps0.mean / reps;
  }
  for (double v : {acc1.min, acc1.max, acc1.mean, acc1.q05, acc1.q95, acc0.min, acc0.max,
                   acc0.mean}) {
    CHECK(v > 0.95);
    CHECK(v < 1.05);
  }
}

TEST_CASE("dropping a real confounder moves eps1 away from 1") {
  std::mt19937_64 rng(84);
  std::normal_distribution<double> norm(0, 1);
  std::uniform_real_distribution<double> unif(0, 1);
  const int n = 4000;
  Dataset ds;
  ds.x.resize(n, 2);
  ds.z.resize(n);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.x(i, 0) = norm(rng);
    ds.x(i, 1) = norm(rng);
    const double e = 1.0 / (1.0 + std::exp(-1.2 * ds.x(i, 0)));
    ds.z[i] = unif(rng) < e ? 1 : 0;
    ds.y[i] = 5.0 + ds.z[i] + 2.0 * ds.x(i, 0) + 0.3 * ds.x(i, 1) + 0.5 * norm(rng);
  }
  const auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian());
  const auto rec = calibrate(ds, fits, {0});
  CHECK(rec.eps1.mean > 1.05);  // strong confounder: treated-arm projection is higher
}

TEST_CASE("nonpositive projection ratios are excluded and counted") {
  Dataset ds;
  const int n = 40;
  ds.x.resize(n, 2);
  ds.z.resize(n);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.x(i, 0) = -2.0 + 4.0 * i / (n - 1.0);
    ds.x(i, 1) = (i % 5) / 4.0;
    ds.z[i] = i % 2;
    ds.y[i] = 0.0;
  }
  // hand-set outcome fits so the control-arm projection crosses zero
  auto fits = oracle::make_fits(Eigen::VectorXd::Constant(n, 0.5), ds.x.col(0),
                                Eigen::VectorXd::Constant(n, 1.0));
  const auto rec = calibrate(ds, fits, {0});
  CHECK(rec.n_excluded1 > 0);
  CHECK(rec.eps1.min > 0.0);
}

TEST_CASE("drop index out of range raises") {
  std::mt19937_64 rng(85);
  const auto ds = oracle::make_random_binary(50, 2, rng);
  const auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian());
  CHECK_THROWS_AS(calibrate(ds, fits, {5}), std::invalid_argument);
}

}  // TEST_SUITE
