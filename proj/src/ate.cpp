#include "epsens/ate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace epsens {

namespace {

void check_dims(const Dataset& ds, const NuisanceFits& fits) {
  if (fits.ehat.size() != ds.n() || fits.mu1hat.size() != ds.n() || fits.mu0hat.size() != ds.n())
    throw std::invalid_argument("nuisance fits are not dimensioned to the dataset");
}

void check_arms(const Dataset& ds) {
  if (ds.count_arm(1) == 0) throw std::runtime_error("treated arm empty");
  if (ds.count_arm(0) == 0) throw std::runtime_error("control arm empty");
}

struct Parts {
  const Dataset& ds;
  const NuisanceFits& fits;
  EpsValues eps;
  Parts(const Dataset& d, const NuisanceFits& f, const SensitivitySpec& s)
      : ds(d), fits(f), eps(s.evaluate(d.x)) {
    check_dims(d, f);
    check_arms(d);
  }
  double w1(Eigen::Index i) const {
    return fits.ehat[i] + (1.0 - fits.ehat[i]) / eps.e1[i];
  }
  double w0(Eigen::Index i) const {
    return fits.ehat[i] * eps.e0[i] + 1.0 - fits.ehat[i];
  }
};

double arm1_mean(const Parts& p, Method method) {
  const auto& ds = p.ds;
  const auto& f = p.fits;
  const Eigen::Index n = ds.n();
  double acc = 0.0;
  switch (method) {
    case Method::Pred:
      for (Eigen::Index i = 0; i < n; ++i)
        acc += ds.z[i] ? ds.y[i] : f.mu1hat[i] / p.eps.e1[i];
      return acc / n;
    case Method::Proj:
      for (Eigen::Index i = 0; i < n; ++i)
        acc += ds.z[i] ? f.mu1hat[i] : f.mu1hat[i] / p.eps.e1[i];
      return acc / n;
    case Method::HT:
      for (Eigen::Index i = 0; i < n; ++i)
        if (ds.z[i]) acc += p.w1(i) * ds.y[i] / f.ehat[i];
      return acc / n;
    case Method::Hajek: {
      double denom = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (ds.z[i]) {
          acc += p.w1(i) * ds.y[i] / f.ehat[i];
          denom += 1.0 / f.ehat[i];
        }
      }
      return acc / denom;
    }
    case Method::DR:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double zc = ds.z[i] - f.ehat[i];
        acc += (ds.z[i] ? p.w1(i) * ds.y[i] / f.ehat[i] : 0.0) -
               zc * f.mu1hat[i] / (f.ehat[i] * p.eps.e1[i]);
      }
      return acc / n;
    case Method::DR2: {
      double corr = 0.0, denom = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (ds.z[i]) {
          corr += p.w1(i) * (ds.y[i] - f.mu1hat[i]) / f.ehat[i];
          denom += 1.0 / f.ehat[i];
        }
      }
      return arm1_mean(p, Method::Proj) + corr / denom;
    }
  }
  throw std::logic_error("unreachable");
}

double arm0_mean(const Parts& p, Method method) {
  const auto& ds = p.ds;
  const auto& f = p.fits;
  const Eigen::Index n = ds.n();
  double acc = 0.0;
  switch (method) {
    case Method::Pred:
      for (Eigen::Index i = 0; i < n; ++i)
        acc += ds.z[i] ? f.mu0hat[i] * p.eps.e0[i] : ds.y[i];
      return acc / n;
    case Method::Proj:
      for (Eigen::Index i = 0; i < n; ++i)
        acc += ds.z[i] ? f.mu0hat[i] * p.eps.e0[i] : f.mu0hat[i];
      return acc / n;
    case Method::HT:
      for (Eigen::Index i = 0; i < n; ++i)
        if (!ds.z[i]) acc += p.w0(i) * ds.y[i] / (1.0 - f.ehat[i]);
      return acc / n;
    case Method::Hajek: {
      double denom = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!ds.z[i]) {
          acc += p.w0(i) * ds.y[i] / (1.0 - f.ehat[i]);
          denom += 1.0 / (1.0 - f.ehat[i]);
        }
      }
      return acc / denom;
    }
    case Method::DR:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double ez = f.ehat[i] - ds.z[i];
        acc += (!ds.z[i] ? p.w0(i) * ds.y[i] / (1.0 - f.ehat[i]) : 0.0) -
               ez * f.mu0hat[i] * p.eps.e0[i] / (1.0 - f.ehat[i]);
      }
      return acc / n;
    case Method::DR2: {
      double corr = 0.0, denom = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!ds.z[i]) {
          corr += p.w0(i) * (ds.y[i] - f.mu0hat[i]) / (1.0 - f.ehat[i]);
          denom += 1.0 / (1.0 - f.ehat[i]);
        }
      }
      return arm0_mean(p, Method::Proj) + corr / denom;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Pred: return "pred";
    case Method::Proj: return "proj";
    case Method::HT: return "ht";
    case Method::Hajek: return "hajek";
    case Method::DR: return "dr";
    case Method::DR2: return "dr2";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "pred") return Method::Pred;
  if (name == "proj") return Method::Proj;
  if (name == "ht") return Method::HT;
  if (name == "hajek") return Method::Hajek;
  if (name == "dr") return Method::DR;
  if (name == "dr2") return Method::DR2;
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

std::pair<double, double> weights_w(double ehat, double eps1, double eps0) {
  return {ehat + (1.0 - ehat) / eps1, ehat * eps0 + 1.0 - ehat};
}

double potential_mean(int z, Method method, const Dataset& ds, const NuisanceFits& fits,
                      const SensitivitySpec& eps) {
  if (z != 0 && z != 1) throw std::invalid_argument("potential mean arm must be 0 or 1");
  Parts p(ds, fits, eps);
  return z == 1 ? arm1_mean(p, method) : arm0_mean(p, method);
}

double ate(Method method, const Dataset& ds, const NuisanceFits& fits,
           const SensitivitySpec& eps) {
  Parts p(ds, fits, eps);
  return arm1_mean(p, method) - arm0_mean(p, method);
}

DrForms ate_dr_forms(const Dataset& ds, const NuisanceFits& fits, const SensitivitySpec& eps) {
  Parts p(ds, fits, eps);
  const Eigen::Index n = ds.n();
  DrForms out{};
  out.eif = arm1_mean(p, Method::DR) - arm0_mean(p, Method::DR);

  double ht_corr = 0.0, pred_corr = 0.0, proj_corr = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = fits.ehat[i];
    const double zc = ds.z[i] - e;
    const double ycheck = ds.y[i] - (ds.z[i] ? fits.mu1hat[i] : fits.mu0hat[i]);
    ht_corr += zc * (fits.mu1hat[i] / (e * p.eps.e1[i]) + fits.mu0hat[i] * p.eps.e0[i] / (1.0 - e));
    if (ds.z[i]) {
      pred_corr += (1.0 - e) / p.eps.e1[i] * ycheck / e;
      proj_corr += p.w1(i) * ycheck / e;
    } else {
      pred_corr -= e * p.eps.e0[i] * ycheck / (1.0 - e);
      proj_corr -= p.w0(i) * ycheck / (1.0 - e);
    }
  }
  out.aug_ht = (arm1_mean(p, Method::HT) - arm0_mean(p, Method::HT)) - ht_corr / n;
  out.aug_pred = (arm1_mean(p, Method::Pred) - arm0_mean(p, Method::Pred)) + pred_corr / n;
  out.aug_proj = (arm1_mean(p, Method::Proj) - arm0_mean(p, Method::Proj)) + proj_corr / n;
  return out;
}

std::pair<double, double> ate_bounds(const Dataset& ds, const NuisanceFits& fits,
                                     std::pair<double, double> eps1_range,
                                     std::pair<double, double> eps0_range, Method method,
                                     std::vector<std::string>* warnings) {
  if (!(eps1_range.first > 0.0 && eps1_range.first <= eps1_range.second) ||
      !(eps0_range.first > 0.0 && eps0_range.first <= eps0_range.second))
    throw std::invalid_argument("eps ranges must satisfy 0 < lo <= hi");
  if (method != Method::Proj && method != Method::HT && method != Method::DR)
    throw std::invalid_argument("bounds are available for proj, ht and dr");
  if ((ds.y.array() < 0.0).any() || (fits.mu1hat.array() < 0.0).any() ||
      (fits.mu0hat.array() < 0.0).any()) {
    if (warnings)
      warnings->push_back("bounds assume nonnegative outcomes; negative outcome or fitted "
                          "mean found, interval may not bracket the truth");
  }
  const double lo =
      ate(method, ds, fits, SensitivitySpec::constant(eps1_range.second, eps0_range.second));
  const double hi =
      ate(method, ds, fits, SensitivitySpec::constant(eps1_range.first, eps0_range.first));
  return {lo, hi};
}

double ate_diff_scale(const Dataset& ds, const NuisanceFits& fits, const Eigen::VectorXd& delta1,
                      const Eigen::VectorXd& delta0, DiffMethod method) {
  if (delta1.size() != ds.n() || delta0.size() != ds.n())
    throw std::invalid_argument("per-unit delta vectors must have length n");
  const auto unconf = SensitivitySpec::constant(1.0, 1.0);
  double classical = 0.0;
  switch (method) {
    case DiffMethod::Reg: classical = ate(Method::Proj, ds, fits, unconf); break;
    case DiffMethod::HT: classical = ate(Method::HT, ds, fits, unconf); break;
    case DiffMethod::DR: classical = ate(Method::DR, ds, fits, unconf); break;
  }
  double corr = 0.0;
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    corr += ds.z[i] ? delta0[i] : delta1[i];
  return classical - corr / ds.n();
}

double ate_diff_scale(const Dataset& ds, const NuisanceFits& fits, double delta1, double delta0,
                      DiffMethod method) {
  return ate_diff_scale(ds, fits, Eigen::VectorXd::Constant(ds.n(), delta1),
                        Eigen::VectorXd::Constant(ds.n(), delta0), method);
}

double ate_variance_plugin(const Dataset& ds, const NuisanceFits& fits,
                           const SensitivitySpec& eps) {
  Parts p(ds, fits, eps);
  const Eigen::Index n = ds.n();

  // Homoscedastic residual variance per arm.
  double v1 = 0.0, v0 = 0.0;
  int n1 = 0, n0 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ds.z[i]) {
      v1 += std::pow(ds.y[i] - fits.mu1hat[i], 2);
      ++n1;
    } else {
      v0 += std::pow(ds.y[i] - fits.mu0hat[i], 2);
      ++n0;
    }
  }
  v1 /= n1;
  v0 /= n0;

  const double tau = arm1_mean(p, Method::DR) - arm0_mean(p, Method::DR);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = fits.ehat[i];
    acc += p.w1(i) * p.w1(i) / e * v1 + p.w0(i) * p.w0(i) / (1.0 - e) * v0 +
           e * std::pow(fits.mu1hat[i] - fits.mu0hat[i] * p.eps.e0[i], 2) +
           (1.0 - e) * std::pow(fits.mu1hat[i] / p.eps.e1[i] - fits.mu0hat[i], 2);
  }
  const double var_phi = acc / n - tau * tau;
  return std::max(var_phi, 0.0) / n;
}

MatchCounts match_counts(const Dataset& ds, int m_matches) {
  check_arms(ds);
  const int n1 = ds.count_arm(1), n0 = ds.count_arm(0);
  if (m_matches < 1) throw std::invalid_argument("number of matches must be >= 1");
  if (m_matches > std::min(n1, n0))
    throw std::invalid_argument("number of matches exceeds the smaller arm size");

  // Standardize columns by marginal standard deviation; constant columns
  // contribute zero distance.
  Eigen::MatrixXd xs = ds.x;
  for (Eigen::Index j = 0; j < xs.cols(); ++j) {
    const double mean = xs.col(j).mean();
    const double sd = std::sqrt((xs.col(j).array() - mean).square().sum() /
                                std::max<Eigen::Index>(ds.n() - 1, 1));
    if (sd > 0) {
      xs.col(j) = (xs.col(j).array() - mean) / sd;
    } else {
      xs.col(j).setZero();
    }
  }

  std::vector<int> treated, control;
  for (Eigen::Index i = 0; i < ds.n(); ++i) (ds.z[i] ? treated : control).push_back(static_cast<int>(i));

  MatchCounts counts;
  counts.k1 = Eigen::VectorXd::Zero(ds.n());
  counts.k0 = Eigen::VectorXd::Zero(ds.n());

  auto accumulate = [&](const std::vector<int>& queries, const std::vector<int>& pool,
                        Eigen::VectorXd& k) {
    std::vector<std::pair<double, int>> dist(pool.size());
    for (int qi : queries) {
      for (std::size_t t = 0; t < pool.size(); ++t)
        dist[t] = {(xs.row(qi) - xs.row(pool[t])).squaredNorm(), pool[t]};
      std::partial_sort(dist.begin(), dist.begin() + m_matches, dist.end(),
                        [](const auto& a, const auto& b) {
                          return a.first < b.first || (a.first == b.first && a.second < b.second);
                        });
      for (int t = 0; t < m_matches; ++t) k[dist[t].second] += 1.0;
    }
  };
  accumulate(control, treated, counts.k1);  // treated units matched to controls
  accumulate(treated, control, counts.k0);  // control units matched to treated
  return counts;
}

double ate_matching_bc(const Dataset& ds, int m_matches, const SensitivitySpec& eps,
                       const NuisanceFits& fits) {
  Parts p(ds, fits, eps);
  const auto counts = match_counts(ds, m_matches);
  const double tau_pred = arm1_mean(p, Method::Pred) - arm0_mean(p, Method::Pred);
  double corr = 0.0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const double ycheck = ds.y[i] - (ds.z[i] ? fits.mu1hat[i] : fits.mu0hat[i]);
    if (ds.z[i]) {
      corr += counts.k1[i] / m_matches * ycheck / p.eps.e1[i];
    } else {
      corr -= counts.k0[i] / m_matches * p.eps.e0[i] * ycheck;
    }
  }
  return tau_pred + corr / ds.n();
}

}  // namespace epsens
