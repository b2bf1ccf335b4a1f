#include "epsens/nuisance.hpp"

#include <algorithm>
#include <stdexcept>

namespace epsens {

namespace {

// Rows of x and entries of y where z == level.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> arm_rows(const Dataset& ds, int level) {
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    if (ds.z[i] == level) idx.push_back(static_cast<int>(i));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), ds.p());
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t t = 0; t < idx.size(); ++t) {
    x.row(static_cast<Eigen::Index>(t)) = ds.x.row(idx[t]);
    y[static_cast<Eigen::Index>(t)] = ds.y[idx[t]];
  }
  return {std::move(x), std::move(y)};
}

}  // namespace

NuisanceFits fit_nuisances(const Dataset& ds, GlmFamily pscore_family, GlmFamily outcome_family,
                           std::pair<double, double> trunc, GlmConfig config) {
  if (pscore_family.tag != Family::Binomial)
    throw std::invalid_argument("binary-treatment propensity model must be binomial");
  if (ds.count_arm(1) == 0) throw std::runtime_error("treated arm empty");
  if (ds.count_arm(0) == 0) throw std::runtime_error("control arm empty");

  NuisanceFits fits;
  Eigen::VectorXd zreal = ds.z.cast<double>();
  fits.pscore_model = fit_glm(ds.x, zreal, pscore_family, config);
  auto truncated = truncate_pscore(predict_mean(fits.pscore_model, ds.x), trunc);
  fits.n_truncated = truncated.n_clamped;
  // Overlap must stay strict even at the default (0,1) bounds.
  fits.ehat = truncated.p.cwiseMax(1e-12).cwiseMin(1.0 - 1e-12);

  auto [x1, y1] = arm_rows(ds, 1);
  auto [x0, y0] = arm_rows(ds, 0);
  fits.mu1_model = fit_glm(x1, y1, outcome_family, config);
  fits.mu0_model = fit_glm(x0, y0, outcome_family, config);
  fits.mu1hat = predict_mean(fits.mu1_model, ds.x);
  fits.mu0hat = predict_mean(fits.mu0_model, ds.x);

  for (const auto* m : {&fits.pscore_model, &fits.mu1_model, &fits.mu0_model})
    fits.warnings.insert(fits.warnings.end(), m->warnings.begin(), m->warnings.end());
  return fits;
}

}  // namespace epsens
