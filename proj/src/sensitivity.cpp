#include "epsens/sensitivity.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace epsens {

SensitivitySpec SensitivitySpec::constant(double eps1, double eps0) {
  if (!(eps1 > 0.0) || !(eps0 > 0.0))
    throw std::invalid_argument("sensitivity parameters must be positive");
  SensitivitySpec s;
  s.form_ = Form::Constant;
  s.c1_ = eps1;
  s.c0_ = eps0;
  return s;
}

SensitivitySpec SensitivitySpec::log_linear(double alpha1, Eigen::VectorXd beta1, double alpha0,
                                            Eigen::VectorXd beta0) {
  SensitivitySpec s;
  s.form_ = Form::LogLinear;
  s.a1_ = alpha1;
  s.a0_ = alpha0;
  s.b1_ = std::move(beta1);
  s.b0_ = std::move(beta0);
  return s;
}

SensitivitySpec SensitivitySpec::per_unit(Eigen::VectorXd e1, Eigen::VectorXd e0) {
  if (e1.size() != e0.size()) throw std::invalid_argument("per-unit eps vectors must match in length");
  if ((e1.array() <= 0.0).any() || (e0.array() <= 0.0).any())
    throw std::invalid_argument("per-unit sensitivity values must be positive");
  SensitivitySpec s;
  s.form_ = Form::PerUnit;
  s.v1_ = std::move(e1);
  s.v0_ = std::move(e0);
  return s;
}

EpsValues SensitivitySpec::evaluate(const Eigen::MatrixXd& x) const {
  const Eigen::Index n = x.rows();
  EpsValues out;
  switch (form_) {
    case Form::Constant:
      out.e1 = Eigen::VectorXd::Constant(n, c1_);
      out.e0 = Eigen::VectorXd::Constant(n, c0_);
      break;
    case Form::LogLinear: {
      if (b1_.size() != x.cols() || b0_.size() != x.cols())
        throw std::invalid_argument("log-linear beta length must equal number of covariates");
      out.e1 = ((x * b1_).array() + a1_).exp();
      out.e0 = ((x * b0_).array() + a0_).exp();
      if (!out.e1.allFinite() || !out.e0.allFinite())
        throw std::invalid_argument("log-linear sensitivity overflowed; rescale alpha/beta");
      break;
    }
    case Form::PerUnit:
      if (v1_.size() != n)
        throw std::invalid_argument("per-unit eps length " + std::to_string(v1_.size()) +
                                    " does not match n = " + std::to_string(n));
      out.e1 = v1_;
      out.e0 = v0_;
      break;
  }
  return out;
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}
}  // namespace

std::string SensitivitySpec::label1() const {
  return form_ == Form::Constant ? fmt(c1_) : "fn";
}

std::string SensitivitySpec::label0() const {
  return form_ == Form::Constant ? fmt(c0_) : "fn";
}

}  // namespace epsens
