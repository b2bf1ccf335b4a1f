#pragma once

#include <string>
#include <utility>
#include <vector>

#include "epsens/dataset.hpp"
#include "epsens/nuisance.hpp"
#include "epsens/sensitivity.hpp"

namespace epsens {

// Estimators of the average treatment effect on the treated. Only eps0
// enters: the treated-arm mean is observed directly.
enum class AttMethod { Reg, HT, Hajek, DR, DR2 };

std::string att_method_name(AttMethod m);
AttMethod att_method_from_name(const std::string& name);

double att(AttMethod method, const Dataset& ds, const NuisanceFits& fits,
           const SensitivitySpec& eps);

// The two algebraically identical forms of the doubly robust counterfactual
// control mean among the treated (regression-augmented, HT-augmented).
std::pair<double, double> att_mu_t0_dr_forms(const Dataset& ds, const NuisanceFits& fits,
                                             const SensitivitySpec& eps);

// Worst-case bounds over eps0 in [lo, hi] for nonnegative outcomes; lower
// bound at hi, upper bound at lo. Methods: Reg, HT or DR.
std::pair<double, double> att_bounds(const Dataset& ds, const NuisanceFits& fits,
                                     std::pair<double, double> eps0_range, AttMethod method,
                                     std::vector<std::string>* warnings = nullptr);

// Plug-in estimate of var(att estimator) from the efficient influence
// function, with arm-wide mean squared residuals for the conditional
// variances; pr(Z=1) is estimated by n1/n.
double att_variance_plugin(const Dataset& ds, const NuisanceFits& fits,
                           const SensitivitySpec& eps);

}  // namespace epsens
