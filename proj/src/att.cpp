#include "epsens/att.hpp"

#include <cmath>
#include <stdexcept>

namespace epsens {

namespace {

struct AttParts {
  const Dataset& ds;
  const NuisanceFits& fits;
  Eigen::VectorXd eps0;
  int n1 = 0;
  AttParts(const Dataset& d, const NuisanceFits& f, const SensitivitySpec& s)
      : ds(d), fits(f), eps0(s.evaluate(d.x).e0) {
    if (f.ehat.size() != d.n() || f.mu0hat.size() != d.n())
      throw std::invalid_argument("nuisance fits are not dimensioned to the dataset");
    n1 = d.count_arm(1);
    if (n1 == 0) throw std::runtime_error("no treated units");
    if (d.count_arm(0) == 0) throw std::runtime_error("control arm empty");
  }
  double odds(Eigen::Index i) const { return fits.ehat[i] / (1.0 - fits.ehat[i]); }
  double mu_t1() const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ds.n(); ++i)
      if (ds.z[i]) acc += ds.y[i];
    return acc / n1;
  }
};

double mu_t0(const AttParts& p, AttMethod method) {
  const auto& ds = p.ds;
  const auto& f = p.fits;
  double acc = 0.0;
  switch (method) {
    case AttMethod::Reg:
      for (Eigen::Index i = 0; i < ds.n(); ++i)
        if (ds.z[i]) acc += p.eps0[i] * f.mu0hat[i];
      return acc / p.n1;
    case AttMethod::HT:
      for (Eigen::Index i = 0; i < ds.n(); ++i)
        if (!ds.z[i]) acc += p.eps0[i] * p.odds(i) * ds.y[i];
      return acc / p.n1;
    case AttMethod::Hajek: {
      double denom = 0.0;
      for (Eigen::Index i = 0; i < ds.n(); ++i) {
        if (!ds.z[i]) {
          acc += p.eps0[i] * p.odds(i) * ds.y[i];
          denom += p.odds(i);
        }
      }
      return acc / denom;
    }
    case AttMethod::DR:
      for (Eigen::Index i = 0; i < ds.n(); ++i) {
        if (ds.z[i]) {
          acc += p.eps0[i] * f.mu0hat[i];
        } else {
          acc += p.eps0[i] * p.odds(i) * (ds.y[i] - f.mu0hat[i]);
        }
      }
      return acc / p.n1;
    case AttMethod::DR2: {
      double corr = 0.0, denom = 0.0;
      for (Eigen::Index i = 0; i < ds.n(); ++i) {
        if (!ds.z[i]) {
          corr += p.eps0[i] * p.odds(i) * (ds.y[i] - f.mu0hat[i]);
          denom += p.odds(i);
        }
      }
      return mu_t0(p, AttMethod::Reg) + corr / denom;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

std::string att_method_name(AttMethod m) {
  switch (m) {
    case AttMethod::Reg: return "reg";
    case AttMethod::HT: return "ht";
    case AttMethod::Hajek: return "hajek";
    case AttMethod::DR: return "dr";
    case AttMethod::DR2: return "dr2";
  }
  return "?";
}

AttMethod att_method_from_name(const std::string& name) {
  if (name == "reg") return AttMethod::Reg;
  if (name == "ht") return AttMethod::HT;
  if (name == "hajek") return AttMethod::Hajek;
  if (name == "dr") return AttMethod::DR;
  if (name == "dr2") return AttMethod::DR2;
  throw std::invalid_argument("unknown att estimator '" + name + "'");
}

double att(AttMethod method, const Dataset& ds, const NuisanceFits& fits,
           const SensitivitySpec& eps) {
  AttParts p(ds, fits, eps);
  return p.mu_t1() - mu_t0(p, method);
}

std::pair<double, double> att_mu_t0_dr_forms(const Dataset& ds, const NuisanceFits& fits,
                                             const SensitivitySpec& eps) {
  AttParts p(ds, fits, eps);
  const double reg_aug = mu_t0(p, AttMethod::DR);
  // HT-augmented form: mu_t0_ht + n1^{-1} sum eps0 (Z - e) mu0 / (1 - e)
  double corr = 0.0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    corr += p.eps0[i] * (ds.z[i] - fits.ehat[i]) * fits.mu0hat[i] / (1.0 - fits.ehat[i]);
  }
  const double ht_aug = mu_t0(p, AttMethod::HT) + corr / p.n1;
  return {reg_aug, ht_aug};
}

std::pair<double, double> att_bounds(const Dataset& ds, const NuisanceFits& fits,
                                     std::pair<double, double> eps0_range, AttMethod method,
                                     std::vector<std::string>* warnings) {
  if (!(eps0_range.first > 0.0 && eps0_range.first <= eps0_range.second))
    throw std::invalid_argument("eps0 range must satisfy 0 < lo <= hi");
  if (method != AttMethod::Reg && method != AttMethod::HT && method != AttMethod::DR)
    throw std::invalid_argument("bounds are available for reg, ht and dr");
  if ((ds.y.array() < 0.0).any() || (fits.mu0hat.array() < 0.0).any()) {
    if (warnings)
      warnings->push_back("bounds assume nonnegative outcomes; negative outcome or fitted "
                          "mean found, interval may not bracket the truth");
  }
  const double lo = att(method, ds, fits, SensitivitySpec::constant(1.0, eps0_range.second));
  const double hi = att(method, ds, fits, SensitivitySpec::constant(1.0, eps0_range.first));
  return {lo, hi};
}

double att_variance_plugin(const Dataset& ds, const NuisanceFits& fits,
                           const SensitivitySpec& eps) {
  AttParts p(ds, fits, eps);
  const Eigen::Index n = ds.n();
  const double e = static_cast<double>(p.n1) / n;  // pr(Z=1) by sample fraction

  double v1 = 0.0, v0 = 0.0;
  int c1 = 0, c0 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ds.z[i]) {
      v1 += std::pow(ds.y[i] - fits.mu1hat[i], 2);
      ++c1;
    } else {
      v0 += std::pow(ds.y[i] - fits.mu0hat[i], 2);
      ++c0;
    }
  }
  v1 /= c1;
  v0 /= c0;

  const double tau_t = p.mu_t1() - mu_t0(p, AttMethod::DR);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ex = fits.ehat[i];
    acc += ex * v1 / (e * e) +
           ex * ex * p.eps0[i] * p.eps0[i] * v0 / (e * e * (1.0 - ex)) +
           ex * std::pow(fits.mu1hat[i] - p.eps0[i] * fits.mu0hat[i] - tau_t, 2) / (e * e);
  }
  const double var_phi = acc / n;
  return std::max(var_phi, 0.0) / n;
}

}  // namespace epsens
