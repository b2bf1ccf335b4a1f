#include "epsens/survival.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace epsens {

namespace {

void check_survival(const Dataset& ds) {
  if (!ds.has_event()) throw std::invalid_argument("event indicator required");
  bool e1 = false, e0 = false;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    if (ds.delta[i] == 1) (ds.z[i] == 1 ? e1 : e0) = true;
  }
  if (!e1 || !e0) throw std::runtime_error("need at least one observed event per arm");
}

std::vector<double> event_times(const Dataset& ds) {
  std::set<double> t;
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    if (ds.delta[i] == 1) t.insert(ds.y[i]);
  return {t.begin(), t.end()};
}

double last_event_time(const Dataset& ds) {
  double last = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    if (ds.delta[i] == 1) last = std::max(last, ds.y[i]);
  return last;
}

}  // namespace

SurvEps SurvEps::constant(double eps1, double eps0) {
  if (!(eps1 > 0.0) || !(eps0 > 0.0))
    throw std::invalid_argument("sensitivity parameters must be positive");
  SurvEps s;
  s.t_ = {0.0};
  s.e1_ = {eps1};
  s.e0_ = {eps0};
  return s;
}

SurvEps SurvEps::table(std::vector<double> t, std::vector<double> eps1, std::vector<double> eps0) {
  if (t.empty() || t.size() != eps1.size() || t.size() != eps0.size())
    throw std::invalid_argument("eps table rows must align and be nonempty");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(eps1[i] > 0.0) || !(eps0[i] > 0.0))
      throw std::invalid_argument("sensitivity parameters must be positive");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw std::invalid_argument("eps table times must be strictly increasing");
  }
  SurvEps s;
  s.t_ = std::move(t);
  s.e1_ = std::move(eps1);
  s.e0_ = std::move(eps0);
  return s;
}

double SurvEps::eps1_at(double t) const {
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const auto idx = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  return e1_[idx];
}

double SurvEps::eps0_at(double t) const {
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const auto idx = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  return e0_[idx];
}

SurvivalCurve surv_wkm(const Dataset& ds, const Eigen::VectorXd& ehat, const SurvEps& eps) {
  check_survival(ds);
  if (ehat.size() != ds.n()) throw std::invalid_argument("ehat must have length n");

  SurvivalCurve out;
  const auto grid = event_times(ds);
  double surv1 = 1.0, surv0 = 1.0;
  for (double tj : grid) {
    const double e1 = eps.eps1_at(tj), e0 = eps.eps0_at(tj);
    double d1 = 0.0, n1 = 0.0, d0 = 0.0, n0 = 0.0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      const double e = ehat[i];
      if (ds.z[i] == 1) {
        const double w = (e + (1.0 - e) / e1) / e;
        if (ds.y[i] >= tj) n1 += w;
        if (ds.y[i] == tj && ds.delta[i] == 1) d1 += w;
      } else {
        const double w = (e * e0 + 1.0 - e) / (1.0 - e);
        if (ds.y[i] >= tj) n0 += w;
        if (ds.y[i] == tj && ds.delta[i] == 1) d0 += w;
      }
    }
    if (n1 <= 0.0 || n0 <= 0.0) {
      out.truncated = true;
      out.warnings.push_back("risk set empty at t = " + std::to_string(tj) +
                             "; curve truncated");
      break;
    }
    surv1 *= 1.0 - d1 / n1;
    surv0 *= 1.0 - d0 / n0;
    out.times.push_back(tj);
    out.s1.push_back(surv1);
    out.s0.push_back(surv0);
    out.tau.push_back(surv1 - surv0);
  }
  return out;
}

Eigen::VectorXd fit_conditional_survival(const Dataset& ds, int z, double t, GlmConfig cfg) {
  if (!ds.has_event()) throw std::invalid_argument("event indicator required");
  std::vector<int> rows;
  std::vector<double> resp;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    if (ds.z[i] != z) continue;
    if (ds.y[i] > t) {
      rows.push_back(static_cast<int>(i));
      resp.push_back(1.0);
    } else if (ds.delta[i] == 1) {  // event by t; censored-before-t units dropped
      rows.push_back(static_cast<int>(i));
      resp.push_back(0.0);
    }
  }
  if (rows.empty())
    throw std::runtime_error("no units with known status at t = " + std::to_string(t) +
                             " in arm " + std::to_string(z));
  const bool all1 = std::all_of(resp.begin(), resp.end(), [](double v) { return v == 1.0; });
  const bool all0 = std::all_of(resp.begin(), resp.end(), [](double v) { return v == 0.0; });
  if (all1 || all0) return Eigen::VectorXd::Constant(ds.n(), all1 ? 1.0 : 0.0);

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), ds.p());
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = ds.x.row(rows[r]);
    y[static_cast<Eigen::Index>(r)] = resp[r];
  }
  return predict_mean(fit_glm(x, y, GlmFamily::binomial(), cfg), ds.x);
}

namespace {
void check_extrapolation(double t, const Dataset& ds, std::vector<std::string>* warnings) {
  if (warnings && t > last_event_time(ds))
    warnings->push_back("t = " + std::to_string(t) + " lies beyond the last event time; "
                        "estimate is an extrapolation");
}
}  // namespace

double surv_reg(double t, const Dataset& ds, const Eigen::VectorXd& p1t,
                const Eigen::VectorXd& p0t, const SurvEps& eps,
                std::vector<std::string>* warnings) {
  check_survival(ds);
  if (p1t.size() != ds.n() || p0t.size() != ds.n())
    throw std::invalid_argument("p_zt vectors must have length n");
  check_extrapolation(t, ds, warnings);
  const double e1 = eps.eps1_at(t), e0 = eps.eps0_at(t);
  double s1 = 0.0, s0 = 0.0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    s1 += ds.z[i] ? p1t[i] : p1t[i] / e1;
    s0 += ds.z[i] ? p0t[i] * e0 : p0t[i];
  }
  return (s1 - s0) / ds.n();
}

double surv_reg(double t, const Dataset& ds, const SurvEps& eps,
                std::vector<std::string>* warnings) {
  return surv_reg(t, ds, fit_conditional_survival(ds, 1, t), fit_conditional_survival(ds, 0, t),
                  eps, warnings);
}

double surv_dr(double t, const Dataset& ds, const Eigen::VectorXd& ehat,
               const Eigen::VectorXd& p1t, const Eigen::VectorXd& p0t, const SurvEps& eps,
               std::vector<std::string>* warnings) {
  check_survival(ds);
  if (ehat.size() != ds.n() || p1t.size() != ds.n() || p0t.size() != ds.n())
    throw std::invalid_argument("ehat and p_zt vectors must have length n");
  check_extrapolation(t, ds, warnings);

  const auto curve = surv_wkm(ds, ehat, eps);
  if (curve.times.empty())
    throw std::runtime_error("weighted KM curve is empty; cannot anchor the dr estimator");
  // step-function value of tau_ht at t
  double tau_ht = 0.0;  // before the first event time both survivals are 1
  for (std::size_t j = 0; j < curve.times.size(); ++j) {
    if (curve.times[j] <= t) tau_ht = curve.tau[j];
  }
  if (curve.truncated && t > curve.times.back() && warnings)
    warnings->push_back("weighted KM curve truncated before t; dr estimate uses last value");

  const double e1 = eps.eps1_at(t), e0 = eps.eps0_at(t);
  double corr = 0.0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const double zc = ds.z[i] - ehat[i];
    corr += zc * p1t[i] / (ehat[i] * e1) + zc * p0t[i] * e0 / (1.0 - ehat[i]);
  }
  return tau_ht - corr / ds.n();
}

double surv_dr(double t, const Dataset& ds, const Eigen::VectorXd& ehat, const SurvEps& eps,
               std::vector<std::string>* warnings) {
  return surv_dr(t, ds, ehat, fit_conditional_survival(ds, 1, t),
                 fit_conditional_survival(ds, 0, t), eps, warnings);
}

}  // namespace epsens
