#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "epsens/dataset.hpp"

namespace epsens {

struct BootstrapConfig {
  int n_boot = 500;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  int max_redraws = 100;       // per replicate slot
  bool percentile_ci = false;  // normal-approximation CI by default
  int threads = 0;             // 0 = library default
};

struct BootstrapResult {
  double estimate = 0.0, se = 0.0, ci_lo = 0.0, ci_hi = 0.0, pvalue = 1.0;
  int n_failed = 0;  // failed resample attempts (each redrawn, up to max_redraws)
};

// Vector-valued variant: one shared resampling stream feeds a closure that
// returns several statistics at once (e.g. a whole estimator-by-eps grid),
// so nuisances are refit once per resample. NaN components of a draw are
// tolerated and excluded per component.
struct BootstrapManyResult {
  Eigen::VectorXd estimate, se, ci_lo, ci_hi, pvalue;
  Eigen::VectorXi n_failed_component;  // NaN draws per component
  int n_failed = 0;                    // failed resample attempts
  std::vector<std::string> warnings;
};

// Nonparametric bootstrap: resamples rows with replacement and re-applies the
// closure (which refits all nuisances) per resample. Replicate r draws from
// substream(seed, r), so results are invariant to the degree of parallelism.
// se is the sample standard deviation of the replicate estimates; the CI is
// estimate +- z * se unless percentile_ci is set; the p-value is two-sided
// normal for H0: parameter = 0. A replicate whose closure throws is redrawn
// (counted in n_failed) up to max_redraws times; total failures above 10% of
// n_boot raise an "unstable resampling" error.
BootstrapResult bootstrap(const std::function<double(const Dataset&)>& estimator,
                          const Dataset& ds, const BootstrapConfig& config);

BootstrapManyResult bootstrap_many(const std::function<Eigen::VectorXd(const Dataset&)>& estimator,
                                   const Dataset& ds, const BootstrapConfig& config);

// Normal quantile / two-sided p-value helpers shared by the result writers.
double normal_quantile(double p);
double normal_two_sided_pvalue(double estimate, double se);

}  // namespace epsens
