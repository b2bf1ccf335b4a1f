#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "epsens/dataset.hpp"
#include "epsens/glm.hpp"

namespace epsens {

// Fitted nuisance functions for the binary-treatment estimators: truncated
// propensity scores ehat (strictly inside (0,1)) and per-arm outcome means
// evaluated at every unit. Immutable and shareable across threads.
struct NuisanceFits {
  Eigen::VectorXd ehat;
  Eigen::VectorXd mu1hat, mu0hat;
  GlmFit pscore_model, mu1_model, mu0_model;
  int n_truncated = 0;
  std::vector<std::string> warnings;
};

// Propensity model: binomial GLM of Z on X. Outcome models: per-arm GLMs of
// Y on X (gaussian for continuous outcomes, binomial for binary ones).
NuisanceFits fit_nuisances(const Dataset& ds, GlmFamily pscore_family, GlmFamily outcome_family,
                           std::pair<double, double> trunc = {0.0, 1.0}, GlmConfig config = {});

}  // namespace epsens
