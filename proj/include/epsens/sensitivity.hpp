#pragma once

#include <Eigen/Core>
#include <string>

namespace epsens {

// Per-unit sensitivity multipliers, strictly positive.
struct EpsValues {
  Eigen::VectorXd e1, e0;
};

// Sensitivity multipliers eps1(X), eps0(X): the ratio of the conditional mean
// of Y(z) among treated vs control units at covariate value X. Constant{1,1}
// encodes unconfoundedness. Three forms: constant, log-linear
// exp(alpha + beta'X), and a raw per-unit vector (library API only).
class SensitivitySpec {
 public:
  static SensitivitySpec constant(double eps1, double eps0);
  static SensitivitySpec log_linear(double alpha1, Eigen::VectorXd beta1, double alpha0,
                                    Eigen::VectorXd beta0);
  static SensitivitySpec per_unit(Eigen::VectorXd e1, Eigen::VectorXd e0);

  // Evaluates eps_z(X_i) for every row; throws std::invalid_argument on a
  // non-positive value or a dimension mismatch.
  EpsValues evaluate(const Eigen::MatrixXd& x) const;

  bool is_constant() const { return form_ == Form::Constant; }
  double const_eps1() const { return c1_; }
  double const_eps0() const { return c0_; }

  // Grid labels for result tables: the constant value, or "fn" otherwise.
  std::string label1() const;
  std::string label0() const;

 private:
  enum class Form { Constant, LogLinear, PerUnit };
  Form form_ = Form::Constant;
  double c1_ = 1.0, c0_ = 1.0;
  double a1_ = 0.0, a0_ = 0.0;
  Eigen::VectorXd b1_, b0_;
  Eigen::VectorXd v1_, v0_;
};

}  // namespace epsens
