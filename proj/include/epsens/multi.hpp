#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "epsens/dataset.hpp"
#include "epsens/glm.hpp"
#include "epsens/sensitivity.hpp"

namespace epsens {

// Pairwise sensitivity multipliers eps_{k,l}(X) for a K-level treatment:
// the ratio of E{Y(k)|Z=k,X} to E{Y(k)|Z=l,X}. Diagonal entries are locked
// at 1; off-diagonal entries default to constant 1.
class EpsMatrix {
 public:
  explicit EpsMatrix(int k_levels);

  int levels() const { return k_; }
  // k, l are 1-based treatment levels. Setting a diagonal entry to anything
  // other than constant 1 throws.
  void set(int k, int l, SensitivitySpec spec);
  const SensitivitySpec& at(int k, int l) const;

  // eps_{k,l}(X_i) for all i, evaluated lazily per entry.
  Eigen::VectorXd evaluate(int k, int l, const Eigen::MatrixXd& x) const;

 private:
  int k_;
  std::vector<SensitivitySpec> entries_;  // row-major (k-1)*K + (l-1)
};

// Contrast coefficients c with sum c_k = 0 (tolerance 1e-12).
struct Contrast {
  Eigen::VectorXd c;
};

// Fitted nuisances for the multi-valued estimators: generalized propensity
// scores (n x K, truncated) and per-level outcome means (n x K). Plain
// aggregate so tests can hand-set the values.
struct GpsFits {
  Eigen::MatrixXd egps;  // column k-1 holds e_k(X_i)
  Eigen::MatrixXd mu;    // column k-1 holds mu_k(X_i)
  GlmFit gps_model;
  std::vector<GlmFit> mu_models;
  int n_truncated = 0;
  std::vector<std::string> warnings;
};

// Multinomial GLM for the GPS plus per-level outcome GLMs.
GpsFits fit_multi_nuisances(const Dataset& ds, GlmFamily outcome_family,
                            std::pair<double, double> trunc = {0.0, 1.0}, GlmConfig config = {});

enum class MultiMethod { Reg, HT, DR };
std::string multi_method_name(MultiMethod m);
MultiMethod multi_method_from_name(const std::string& name);

// Sample analogue of the identification formula for E{Y(k)}, level 1-based.
double multi_potential_mean(int level, MultiMethod method, const Dataset& ds, const GpsFits& gps,
                            const EpsMatrix& eps);

// Linear combination sum_k c_k mu_k of potential means.
double multi_contrast(const Contrast& c, MultiMethod method, const Dataset& ds, const GpsFits& gps,
                      const EpsMatrix& eps);

}  // namespace epsens
