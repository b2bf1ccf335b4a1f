#include <doctest.h>

#include <random>

#include "epsens/ate.hpp"
#include "epsens/multi.hpp"
#include "epsens/nuisance.hpp"
#include "reference/classical.hpp"

using namespace epsens;
using oracle::rel_close;

namespace {

// 3-level synthetic data with a softmax treatment model.
Dataset make_random_multi(int n, int p, int kk, std::mt19937_64& rng) {
  std::normal_distribution<double> norm(0, 1);
  std::uniform_real_distribution<double> unif(0, 1);
  while (true) {
    Dataset ds;
    ds.x.resize(n, p);
    ds.z.resize(n);
    ds.y.resize(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) ds.x(i, j) = norm(rng);
      std::vector<double> score(kk);
      double total = 0.0;
      for (int k = 0; k < kk; ++k) {
        score[k] = std::exp(0.3 * k * ds.x(i, 0) - 0.2 * k);
        total += score[k];
      }
      double u = unif(rng) * total;
      int level = kk;
      for (int k = 0; k < kk; ++k) {
        if (u < score[k]) {
          level = k + 1;
          break;
        }
        u -= score[k];
      }
      ds.z[i] = level;
      ds.y[i] = 0.4 * level + 0.8 * ds.x(i, 0) + norm(rng);
    }
    bool ok = true;
    for (int k = 1; k <= kk; ++k) ok &= ds.count_arm(k) >= 3;
    if (ok) return ds;
  }
}

GpsFits hand_gps(const Eigen::MatrixXd& egps, const Eigen::MatrixXd& mu) {
  GpsFits g;
  g.egps = egps;
  g.mu = mu;
  return g;
}

}  // namespace

TEST_SUITE("multi") {

TEST_CASE("K=2 reduces to the binary module") {
  std::mt19937_64 rng(51);
  for (int rep = 0; rep < 200; ++rep) {
    const auto binary = oracle::make_random_binary(60, 2, rng);
    const auto fits = fit_nuisances(binary, GlmFamily::binomial(), GlmFamily::gaussian());

    Dataset multi = binary;
    for (Eigen::Index i = 0; i < multi.n(); ++i) multi.z[i] = binary.z[i] + 1;  // levels 1,2
    Eigen::MatrixXd egps(binary.n(), 2), mu(binary.n(), 2);
    egps.col(0) = 1.0 - fits.ehat.array();  // level 1 = control
    egps.col(1) = fits.ehat;                // level 2 = treated
    mu.col(0) = fits.mu0hat;
    mu.col(1) = fits.mu1hat;
    const auto gps = hand_gps(egps, mu);

    const double eps1 = 1.0 + 0.5 * (rep % 5) / 4.0;
    const double eps0 = 0.8 + 0.4 * (rep % 7) / 6.0;
    EpsMatrix eps(2);
    // eps_{treated,control} is the binary eps1; eps_{control,treated} divides
    // where the binary eps0 multiplies, so the mapping is the reciprocal
    eps.set(2, 1, SensitivitySpec::constant(eps1, eps1));
    eps.set(1, 2, SensitivitySpec::constant(1.0 / eps0, 1.0 / eps0));
    const auto spec = SensitivitySpec::constant(eps1, eps0);

    CHECK(rel_close(multi_potential_mean(2, MultiMethod::Reg, multi, gps, eps),
                    potential_mean(1, Method::Proj, binary, fits, spec), 1e-10));
    CHECK(rel_close(multi_potential_mean(1, MultiMethod::Reg, multi, gps, eps),
                    potential_mean(0, Method::Proj, binary, fits, spec), 1e-10));
    CHECK(rel_close(multi_potential_mean(2, MultiMethod::HT, multi, gps, eps),
                    potential_mean(1, Method::HT, binary, fits, spec), 1e-10));
    CHECK(rel_close(multi_potential_mean(1, MultiMethod::HT, multi, gps, eps),
                    potential_mean(0, Method::HT, binary, fits, spec), 1e-10));
    CHECK(rel_close(multi_potential_mean(2, MultiMethod::DR, multi, gps, eps),
                    potential_mean(1, Method::DR, binary, fits, spec), 1e-10));
    CHECK(rel_close(multi_potential_mean(1, MultiMethod::DR, multi, gps, eps),
                    potential_mean(0, Method::DR, binary, fits, spec), 1e-10));
  }
}

TEST_CASE("eps=1 ht is the classical multi-valued ht mean") {
  std::mt19937_64 rng(52);
  const auto ds = make_random_multi(150, 2, 3, rng);
  const auto gps = fit_multi_nuisances(ds, GlmFamily::gaussian());
  const EpsMatrix eps(3);
  for (int k = 1; k <= 3; ++k) {
    CHECK(rel_close(multi_potential_mean(k, MultiMethod::HT, ds, gps, eps),
                    oracle::multi_ht_mean(k, ds, gps.egps), 1e-10));
    CHECK(rel_close(multi_potential_mean(k, MultiMethod::Reg, ds, gps, eps),
                    oracle::multi_reg_mean(k, ds, gps.mu), 1e-10));
  }
}

TEST_CASE("perfect outcome fit makes dr equal reg exactly") {
  std::mt19937_64 rng(53);
  auto ds = make_random_multi(100, 2, 3, rng);
  auto gps = fit_multi_nuisances(ds, GlmFamily::gaussian());
  for (Eigen::Index i = 0; i < ds.n(); ++i) ds.y[i] = gps.mu(i, ds.z[i] - 1);
  EpsMatrix eps(3);
  eps.set(2, 1, SensitivitySpec::constant(1.4, 1.4));
  eps.set(3, 1, SensitivitySpec::constant(0.9, 0.9));
  for (int k = 1; k <= 3; ++k) {
    CHECK(multi_potential_mean(k, MultiMethod::DR, ds, gps, eps) ==
          doctest::Approx(multi_potential_mean(k, MultiMethod::Reg, ds, gps, eps))
              .epsilon(1e-14));
  }
}

TEST_CASE("hand-evaluated reg mean for K=3") {
  Dataset ds;
  ds.x = Eigen::MatrixXd::Zero(3, 1);
  ds.z.resize(3);
  ds.z << 1, 2, 3;
  ds.y.resize(3);
  ds.y << 0, 0, 0;
  Eigen::MatrixXd egps = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
  Eigen::MatrixXd mu(3, 3);
  mu << 1, 2, 3,  // unit 1
        4, 5, 6,  // unit 2
        7, 8, 9;  // unit 3
  const auto gps = hand_gps(egps, mu);
  EpsMatrix eps(3);
  eps.set(1, 2, SensitivitySpec::constant(2.0, 2.0));
  eps.set(1, 3, SensitivitySpec::constant(4.0, 4.0));
  // mu_1^reg = (1/3) { mu1(x1)/eps_{1,1} + mu1(x2)/eps_{1,2} + mu1(x3)/eps_{1,3} }
  //          = (1/3) { 1/1 + 4/2 + 7/4 } = 4.75/3
  CHECK(multi_potential_mean(1, MultiMethod::Reg, ds, gps, eps) ==
        doctest::Approx(4.75 / 3.0).epsilon(1e-14));
}

TEST_CASE("contrast linearity and validation") {
  std::mt19937_64 rng(54);
  const auto ds = make_random_multi(120, 2, 3, rng);
  const auto gps = fit_multi_nuisances(ds, GlmFamily::gaussian());
  EpsMatrix eps(3);
  eps.set(2, 1, SensitivitySpec::constant(1.2, 1.2));

  Contrast c1{Eigen::Vector3d(1, -1, 0)};
  Contrast c2{Eigen::Vector3d(0, 1, -1)};
  Contrast mix{2.0 * c1.c + 3.0 * c2.c};
  const double lhs = multi_contrast(mix, MultiMethod::DR, ds, gps, eps);
  const double rhs = 2.0 * multi_contrast(c1, MultiMethod::DR, ds, gps, eps) +
                     3.0 * multi_contrast(c2, MultiMethod::DR, ds, gps, eps);
  CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)));

  Contrast zero{Eigen::Vector3d(0, 0, 0)};
  CHECK(multi_contrast(zero, MultiMethod::Reg, ds, gps, eps) == 0.0);

  Contrast pairwise{Eigen::Vector3d(1, -1, 0)};
  CHECK(multi_contrast(pairwise, MultiMethod::Reg, ds, gps, eps) ==
        doctest::Approx(multi_potential_mean(1, MultiMethod::Reg, ds, gps, eps) -
                        multi_potential_mean(2, MultiMethod::Reg, ds, gps, eps)));

  Contrast bad{Eigen::Vector3d(1, 1, 0)};
  CHECK_THROWS_AS(multi_contrast(bad, MultiMethod::Reg, ds, gps, eps), std::invalid_argument);
}

TEST_CASE("diagonal eps entries are locked at 1") {
  EpsMatrix eps(3);
  CHECK_THROWS_AS(eps.set(2, 2, SensitivitySpec::constant(1.5, 1.5)), std::invalid_argument);
  eps.set(2, 2, SensitivitySpec::constant(1.0, 1.0));  // explicit identity is fine
}

TEST_CASE("absent level raises") {
  std::mt19937_64 rng(55);
  auto ds = make_random_multi(60, 2, 3, rng);
  const auto gps = fit_multi_nuisances(ds, GlmFamily::gaussian());
  EpsMatrix eps(3);
  CHECK_THROWS_AS(multi_potential_mean(4, MultiMethod::Reg, ds, gps, eps),
                  std::invalid_argument);
}

}  // TEST_SUITE
