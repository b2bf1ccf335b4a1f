#pragma once

#include <string>
#include <vector>

#include "epsens/dataset.hpp"
#include "epsens/nuisance.hpp"

namespace epsens {

// Leave-one-covariate-out (or leave-set-out) benchmark of plausible
// sensitivity-parameter magnitudes: treat the dropped covariates as if they
// were unmeasured and summarize the per-unit ratios
//   eps_z(X_-S) = E{mu_z(X) | Z=1, X_-S} / E{mu_z(X) | Z=0, X_-S},
// estimated by arm-specific linear projections of the fitted mu_z values.
// Output is read-only guidance; it never feeds back into estimation.
struct CalibrationRecord {
  struct Summary {
    double min = 0, q05 = 0, q25 = 0, q50 = 0, mean = 0, q75 = 0, q95 = 0, max = 0;
  };
  std::string dropped;  // covariate name, "{a,b}" for sets, "(none)" for the empty set
  Summary eps1, eps0;
  int n_excluded1 = 0, n_excluded0 = 0;  // units whose projection ratio was nonpositive
};

// drop holds 0-based covariate indices; the empty set is allowed (identity
// check: both projections coincide and every ratio is exactly 1 for linear
// outcome fits).
CalibrationRecord calibrate(const Dataset& ds, const NuisanceFits& fits,
                            const std::vector<int>& drop);

}  // namespace epsens
