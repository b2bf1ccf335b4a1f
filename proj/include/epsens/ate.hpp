#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "epsens/dataset.hpp"
#include "epsens/nuisance.hpp"
#include "epsens/sensitivity.hpp"

namespace epsens {

// Estimators of the average causal effect and per-arm potential-outcome
// means under the ratio sensitivity parametrization.
//
//   Pred   regression imputation keeping observed outcomes for the own arm
//   Proj   regression imputation replacing observed outcomes with fits
//   HT     Horvitz-Thompson weighting with w1 = e + (1-e)/eps1,
//          w0 = e*eps0 + 1 - e
//   Hajek  self-normalized HT (denominators sum Z/e and (1-Z)/(1-e))
//   DR     augmented (influence-function) estimator, doubly robust
//   DR2    Hajek-normalized residual augmentation of Proj
enum class Method { Pred, Proj, HT, Hajek, DR, DR2 };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Sensitivity-adjusted IPW factors for one unit.
std::pair<double, double> weights_w(double ehat, double eps1, double eps0);

double potential_mean(int z, Method method, const Dataset& ds, const NuisanceFits& fits,
                      const SensitivitySpec& eps);

double ate(Method method, const Dataset& ds, const NuisanceFits& fits, const SensitivitySpec& eps);

// The four algebraically identical forms of the doubly robust estimator,
// exposed for verification.
struct DrForms {
  double eif, aug_ht, aug_pred, aug_proj;
};
DrForms ate_dr_forms(const Dataset& ds, const NuisanceFits& fits, const SensitivitySpec& eps);

// Worst-case bounds when eps_z(X) is only known to lie in a range; valid for
// nonnegative outcomes (a warning is emitted otherwise and the computation
// proceeds). Lower bound at the upper eps endpoints, upper bound at the
// lower endpoints. Methods: Proj, HT or DR.
std::pair<double, double> ate_bounds(const Dataset& ds, const NuisanceFits& fits,
                                     std::pair<double, double> eps1_range,
                                     std::pair<double, double> eps0_range, Method method,
                                     std::vector<std::string>* warnings = nullptr);

// Difference-scale sensitivity: classical estimator minus the sample
// analogue of E{Z d0(X)} + E{(1-Z) d1(X)}.
enum class DiffMethod { Reg, HT, DR };
double ate_diff_scale(const Dataset& ds, const NuisanceFits& fits, const Eigen::VectorXd& delta1,
                      const Eigen::VectorXd& delta0, DiffMethod method);
double ate_diff_scale(const Dataset& ds, const NuisanceFits& fits, double delta1, double delta0,
                      DiffMethod method);

// Plug-in estimate of var(estimator) = var(efficient influence function)/n,
// with conditional outcome variances replaced by arm-wide mean squared
// residuals.
double ate_variance_plugin(const Dataset& ds, const NuisanceFits& fits,
                           const SensitivitySpec& eps);

// K_M^z(i): how many times unit i (in arm z) is used as one of the M nearest
// neighbors of an opposite-arm unit. Matching is with replacement on
// Euclidean distance over covariates standardized by marginal standard
// deviation; ties break toward the lowest index.
struct MatchCounts {
  Eigen::VectorXd k1, k0;
};
MatchCounts match_counts(const Dataset& ds, int m_matches);

// Bias-corrected matching estimator under the sensitivity parametrization:
// tau_pred plus the K_M-weighted residual correction. Only the outcome fits
// inside `fits` are used.
double ate_matching_bc(const Dataset& ds, int m_matches, const SensitivitySpec& eps,
                       const NuisanceFits& fits);

}  // namespace epsens
