#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "epsens/dataset.hpp"
#include "epsens/glm.hpp"

namespace epsens {

// Sensitivity multipliers for the survival contrast tau(t) = S1(t) - S0(t).
// Constant in t by default; a per-t step table may be supplied (the value at
// the largest tabulated time <= t applies).
class SurvEps {
 public:
  static SurvEps constant(double eps1, double eps0);
  // rows (t, eps1, eps0), t strictly increasing; values before the first
  // tabulated t fall back to the first row.
  static SurvEps table(std::vector<double> t, std::vector<double> eps1, std::vector<double> eps0);

  double eps1_at(double t) const;
  double eps0_at(double t) const;

 private:
  std::vector<double> t_, e1_, e0_;
};

// Step-function survival estimates per arm over the pooled event-time grid.
struct SurvivalCurve {
  std::vector<double> times;  // event times, strictly increasing
  std::vector<double> s1, s0, tau;
  bool truncated = false;  // a risk set emptied; curve stops there
  std::vector<std::string> warnings;
};

// Sensitivity-weighted Kaplan-Meier estimator: product over event times of
// (1 - d_jz/n_jz) with weights w_zt(X_i) * arm indicator / arm probability.
SurvivalCurve surv_wkm(const Dataset& ds, const Eigen::VectorXd& ehat, const SurvEps& eps);

// Conditional survival probability model p_zt(X): binomial GLM of 1(y > t)
// on X within arm z, using only units whose status at t is known (alive past
// t, or observed event by t); units censored before t are dropped. A constant
// response short-circuits to that constant.
Eigen::VectorXd fit_conditional_survival(const Dataset& ds, int z, double t, GlmConfig cfg = {});

// Outcome-model estimator of tau(t) from supplied p_zt values.
double surv_reg(double t, const Dataset& ds, const Eigen::VectorXd& p1t,
                const Eigen::VectorXd& p0t, const SurvEps& eps,
                std::vector<std::string>* warnings = nullptr);
// Convenience overload fitting p_zt internally.
double surv_reg(double t, const Dataset& ds, const SurvEps& eps,
                std::vector<std::string>* warnings = nullptr);

// Doubly robust estimator: the weighted-KM estimate at t augmented with
// (Z - ehat)-weighted p_zt corrections.
double surv_dr(double t, const Dataset& ds, const Eigen::VectorXd& ehat,
               const Eigen::VectorXd& p1t, const Eigen::VectorXd& p0t, const SurvEps& eps,
               std::vector<std::string>* warnings = nullptr);
double surv_dr(double t, const Dataset& ds, const Eigen::VectorXd& ehat, const SurvEps& eps,
               std::vector<std::string>* warnings = nullptr);

}  // namespace epsens
