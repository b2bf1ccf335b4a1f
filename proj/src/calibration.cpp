#include "epsens/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "epsens/glm.hpp"

namespace epsens {

namespace {

// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = p * (static_cast<double>(v.size()) - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

CalibrationRecord::Summary summarize(const std::vector<double>& v) {
  CalibrationRecord::Summary s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  double mean = 0.0;
  for (double x : v) mean += x;
  s.mean = mean / static_cast<double>(v.size());
  s.q05 = quantile(v, 0.05);
  s.q25 = quantile(v, 0.25);
  s.q50 = quantile(v, 0.50);
  s.q75 = quantile(v, 0.75);
  s.q95 = quantile(v, 0.95);
  return s;
}

// Least-squares projection of `response` (restricted to arm rows) onto the
// reduced design, evaluated at every unit.
Eigen::VectorXd project(const Dataset& ds, const Eigen::MatrixXd& xred,
                        const Eigen::VectorXd& response, int arm) {
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    if (ds.z[i] == arm) idx.push_back(static_cast<int>(i));
  Eigen::MatrixXd xa(static_cast<Eigen::Index>(idx.size()), xred.cols());
  Eigen::VectorXd ya(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t t = 0; t < idx.size(); ++t) {
    xa.row(static_cast<Eigen::Index>(t)) = xred.row(idx[t]);
    ya[static_cast<Eigen::Index>(t)] = response[idx[t]];
  }
  return predict_mean(fit_glm(xa, ya, GlmFamily::gaussian()), xred);
}

}  // namespace

CalibrationRecord calibrate(const Dataset& ds, const NuisanceFits& fits,
                            const std::vector<int>& drop) {
  std::set<int> dropped(drop.begin(), drop.end());
  for (int j : dropped) {
    if (j < 0 || j >= ds.p())
      throw std::invalid_argument("drop index " + std::to_string(j) + " out of range");
  }
  if (fits.mu1hat.size() != ds.n() || fits.mu0hat.size() != ds.n())
    throw std::invalid_argument("nuisance fits are not dimensioned to the dataset");

  std::vector<int> keep;
  for (int j = 0; j < ds.p(); ++j)
    if (!dropped.count(j)) keep.push_back(j);
  Eigen::MatrixXd xred(ds.n(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t t = 0; t < keep.size(); ++t) xred.col(static_cast<Eigen::Index>(t)) = ds.x.col(keep[t]);

  CalibrationRecord rec;
  if (dropped.empty()) {
    rec.dropped = "(none)";
  } else if (dropped.size() == 1) {
    rec.dropped = ds.covariate_names.empty() ? "x" + std::to_string(*dropped.begin() + 1)
                                             : ds.covariate_names[*dropped.begin()];
  } else {
    rec.dropped = "{";
    bool first = true;
    for (int j : dropped) {
      if (!first) rec.dropped += ",";
      rec.dropped += ds.covariate_names.empty() ? "x" + std::to_string(j + 1)
                                                : ds.covariate_names[j];
      first = false;
    }
    rec.dropped += "}";
  }

  for (int z : {1, 0}) {
    const Eigen::VectorXd& muz = z == 1 ? fits.mu1hat : fits.mu0hat;
    const Eigen::VectorXd num = project(ds, xred, muz, 1);
    const Eigen::VectorXd den = project(ds, xred, muz, 0);
    std::vector<double> ratios;
    int excluded = 0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      const double r = num[i] / den[i];
      // a denominator crossing 0 shows up as a nonpositive or non-finite ratio
      if (!(r > 0.0) || !std::isfinite(r)) {
        ++excluded;
        continue;
      }
      ratios.push_back(r);
    }
    if (ratios.empty())
      throw std::runtime_error("calibration failed: every projection ratio was excluded "
                               "(denominator crossing 0)");
    if (z == 1) {
      rec.eps1 = summarize(ratios);
      rec.n_excluded1 = excluded;
    } else {
      rec.eps0 = summarize(ratios);
      rec.n_excluded0 = excluded;
    }
  }
  return rec;
}

}  // namespace epsens
