#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace epsens {

enum class Family { Gaussian, Binomial, Multinomial };

struct GlmFamily {
  Family tag = Family::Gaussian;
  int k = 2;  // number of classes for multinomial

  static GlmFamily gaussian() { return {Family::Gaussian, 2}; }
  static GlmFamily binomial() { return {Family::Binomial, 2}; }
  static GlmFamily multinomial(int k) {
    if (k < 2) throw std::invalid_argument("multinomial needs K >= 2");
    return {Family::Multinomial, k};
  }
};

struct GlmConfig {
  int max_iter = 100;
  double tol = 1e-8;  // on the max absolute coefficient change
};

// Fitted GLM. coef is (p+1) x 1 for gaussian/binomial (intercept first) and
// (p+1) x (K-1) for multinomial with reference level 1. Columns dropped by
// the rank check keep coefficient 0 and are listed in dropped_columns
// (0-based index into the user design, -1 = intercept).
struct GlmFit {
  GlmFamily family;
  Eigen::MatrixXd coef;
  bool converged = false;
  int iterations = 0;
  double deviance = 0.0;
  bool separation = false;
  std::vector<int> dropped_columns;
  std::vector<std::string> warnings;
};

// Thrown when IRLS diverges without hitting the separation heuristic; carries
// the partial fit for diagnostics.
struct GlmNonConvergence : std::runtime_error {
  GlmFit partial;
  explicit GlmNonConvergence(std::string msg, GlmFit fit)
      : std::runtime_error(std::move(msg)), partial(std::move(fit)) {}
};

// Fits y ~ intercept + x. Gaussian solves least squares exactly in one step;
// binomial/multinomial run Newton (IRLS) on the log-likelihood. Binomial y
// must be in {0,1}; multinomial y in {1..K}.
GlmFit fit_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, GlmFamily family,
               GlmConfig config = {});

// Mean-scale predictions: identity (gaussian) or inverse logit (binomial).
Eigen::VectorXd predict_mean(const GlmFit& fit, const Eigen::MatrixXd& x);

// Softmax class probabilities, n x K; rows sum to one.
Eigen::MatrixXd predict_mean_multi(const GlmFit& fit, const Eigen::MatrixXd& x);

struct TruncationResult {
  Eigen::VectorXd p;
  int n_clamped = 0;
};

// Clamps each probability into [lo, hi] and reports how many moved.
TruncationResult truncate_pscore(const Eigen::VectorXd& p, std::pair<double, double> bounds);

}  // namespace epsens
