#include <doctest.h>

#include <cmath>
#include <random>

#include "epsens/bootstrap.hpp"
#include "epsens/parallel.hpp"
#include "reference/classical.hpp"

using namespace epsens;

namespace {

Dataset iid_normal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> norm(0, 1);
  Dataset ds;
  ds.x = Eigen::MatrixXd::Zero(n, 1);
  ds.z.resize(n);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.z[i] = i % 2;
    ds.y[i] = norm(rng);
  }
  return ds;
}

double sample_mean(const Dataset& ds) { return ds.y.mean(); }

}  // namespace

TEST_SUITE("bootstrap") {

TEST_CASE("constant closure gives zero se and a degenerate interval") {
  std::mt19937_64 rng(71);
  const auto ds = iid_normal(50, rng);
  BootstrapConfig cfg;
  cfg.n_boot = 100;
  cfg.seed = 5;
  const auto res = bootstrap([](const Dataset&) { return 4.2; }, ds, cfg);
  CHECK(res.estimate == 4.2);
  CHECK(res.se <= 1e-12);
  CHECK(res.ci_lo == doctest::Approx(4.2).epsilon(1e-12));
  CHECK(res.ci_hi == doctest::Approx(4.2).epsilon(1e-12));
  CHECK(res.n_failed == 0);
}

TEST_CASE("sample-mean closure recovers the analytic standard error") {
  std::mt19937_64 rng(72);
  const auto ds = iid_normal(10000, rng);
  BootstrapConfig cfg;
  cfg.n_boot = 1000;
  cfg.seed = 9;
  const auto res = bootstrap(sample_mean, ds, cfg);
  const double analytic = 1.0 / std::sqrt(10000.0);
  CHECK(std::abs(res.se - analytic) < 0.10 * analytic);
  CHECK(res.ci_lo < res.estimate);
  CHECK(res.estimate < res.ci_hi);
}

TEST_CASE("fixed seed is bit-identical across runs and thread counts") {
  std::mt19937_64 rng(73);
  const auto ds = iid_normal(400, rng);
  BootstrapConfig cfg;
  cfg.n_boot = 64;
  cfg.seed = 1234;
  cfg.threads = 1;
  const auto serial = bootstrap(sample_mean, ds, cfg);
  const auto serial2 = bootstrap(sample_mean, ds, cfg);
  cfg.threads = 4;
  const auto parallel = bootstrap(sample_mean, ds, cfg);
  CHECK(serial.se == serial2.se);
  CHECK(serial.pvalue == serial2.pvalue);
  CHECK(serial.se == parallel.se);
  CHECK(serial.ci_lo == parallel.ci_lo);
  CHECK(serial.ci_hi == parallel.ci_hi);
  CHECK(serial.pvalue == parallel.pvalue);
  CHECK(serial.n_failed == parallel.n_failed);
}

TEST_CASE("sporadic failures are redrawn and counted deterministically") {
  std::mt19937_64 rng(74);
  const auto ds = iid_normal(30, rng);
  const double y0 = ds.y[0];
  // fails when row 0 appears four or more times in the resample (rare)
  auto flaky = [y0](const Dataset& d) {
    int copies = 0;
    for (Eigen::Index i = 0; i < d.n(); ++i) copies += d.y[i] == y0;
    if (copies >= 4) throw std::runtime_error("flaky");
    return d.y.mean();
  };
  BootstrapConfig cfg;
  cfg.n_boot = 200;
  cfg.seed = 77;
  const auto a = bootstrap(flaky, ds, cfg);
  const auto b = bootstrap(flaky, ds, cfg);
  CHECK(a.n_failed == b.n_failed);
  CHECK(a.se == b.se);
  CHECK(std::isfinite(a.se));
}

TEST_CASE("chronic failure raises the unstable-resampling error") {
  std::mt19937_64 rng(75);
  const auto ds = iid_normal(30, rng);
  BootstrapConfig cfg;
  cfg.n_boot = 50;
  cfg.seed = 3;
  cfg.max_redraws = 5;
  // total on the original data, fails on essentially every resample
  const double orig_sum = ds.y.sum();
  auto chronic = [orig_sum](const Dataset& d) -> double {
    if (d.y.sum() != orig_sum) throw std::runtime_error("resample rejected");
    return d.y.mean();
  };
  CHECK_THROWS_WITH_AS(bootstrap(chronic, ds, cfg), doctest::Contains("unstable resampling"),
                       std::runtime_error);
}

TEST_CASE("percentile intervals behind the flag") {
  std::mt19937_64 rng(76);
  const auto ds = iid_normal(2000, rng);
  BootstrapConfig cfg;
  cfg.n_boot = 400;
  cfg.seed = 11;
  cfg.percentile_ci = true;
  const auto res = bootstrap(sample_mean, ds, cfg);
  CHECK(res.ci_lo < res.ci_hi);
  CHECK(res.ci_lo < res.estimate + 3 * res.se);
  CHECK(res.ci_hi > res.estimate - 3 * res.se);
}

TEST_CASE("vector closure tolerates NaN components") {
  std::mt19937_64 rng(77);
  const auto ds = iid_normal(100, rng);
  BootstrapConfig cfg;
  cfg.n_boot = 50;
  cfg.seed = 21;
  const auto res = bootstrap_many(
      [](const Dataset& d) {
        Eigen::VectorXd v(2);
        v[0] = d.y.mean();
        v[1] = std::numeric_limits<double>::quiet_NaN();
        return v;
      },
      ds, cfg);
  CHECK(std::isfinite(res.se[0]));
  CHECK(std::isnan(res.se[1]));
  CHECK(res.n_failed_component[1] == cfg.n_boot);
  CHECK_FALSE(res.warnings.empty());
}

TEST_CASE("serial and OpenMP replicate maps agree element-wise") {
  std::vector<double> a(257, 0.0), b(257, 0.0);
  par::for_each_index_serial(257, [&](int i) { a[i] = std::sqrt(i) * 1.000000001; });
  par::for_each_index_omp(257, 4, [&](int i) { b[i] = std::sqrt(i) * 1.000000001; });
  for (int i = 0; i < 257; ++i) CHECK(a[i] == b[i]);
}

}  // TEST_SUITE
