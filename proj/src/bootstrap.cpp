#include "epsens/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "epsens/parallel.hpp"
#include "epsens/rng.hpp"

namespace epsens {

double normal_quantile(double p) {
  boost::math::normal_distribution<> dist(0.0, 1.0);
  return boost::math::quantile(dist, p);
}

double normal_two_sided_pvalue(double estimate, double se) {
  if (se <= 0.0) return estimate == 0.0 ? 1.0 : 0.0;
  boost::math::normal_distribution<> dist(0.0, 1.0);
  return 2.0 * boost::math::cdf(dist, -std::abs(estimate / se));
}

BootstrapManyResult bootstrap_many(const std::function<Eigen::VectorXd(const Dataset&)>& estimator,
                                   const Dataset& ds, const BootstrapConfig& config) {
  if (config.n_boot < 1) throw std::invalid_argument("n_boot must be >= 1");
  if (!(config.ci_level > 0.0 && config.ci_level < 1.0))
    throw std::invalid_argument("ci_level must be in (0,1)");

  const Eigen::VectorXd point = estimator(ds);  // must be total on ds itself
  const auto m = point.size();
  const int n = static_cast<int>(ds.n());

  Eigen::MatrixXd draws(config.n_boot, m);
  std::vector<int> slot_failures(config.n_boot, 0);
  std::atomic<bool> slot_exhausted{false};

  par::for_each_index(config.n_boot, config.threads, [&](int r) {
    auto engine = rng::substream(config.seed, static_cast<std::uint64_t>(r));
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<int> rows(n);
    bool ok = false;
    for (int attempt = 0; attempt <= config.max_redraws && !ok; ++attempt) {
      for (int i = 0; i < n; ++i) rows[i] = pick(engine);
      try {
        draws.row(r) = estimator(ds.subset(rows));
        ok = true;
      } catch (const std::exception&) {
        ++slot_failures[r];
      }
    }
    if (!ok) {
      slot_exhausted.store(true);
      draws.row(r).setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  });

  BootstrapManyResult out;
  out.n_failed = 0;
  for (int f : slot_failures) out.n_failed += f;
  if (slot_exhausted.load() || out.n_failed > 0.1 * config.n_boot) {
    throw std::runtime_error("unstable resampling: " + std::to_string(out.n_failed) +
                             " failed resample attempts over " + std::to_string(config.n_boot) +
                             " replicates");
  }

  const double z = normal_quantile(0.5 * (1.0 + config.ci_level));
  out.estimate = point;
  out.se.resize(m);
  out.ci_lo.resize(m);
  out.ci_hi.resize(m);
  out.pvalue.resize(m);
  out.n_failed_component = Eigen::VectorXi::Zero(m);
  std::vector<double> vals;
  for (Eigen::Index c = 0; c < m; ++c) {
    vals.clear();
    for (int r = 0; r < config.n_boot; ++r) {
      const double v = draws(r, c);
      if (std::isfinite(v)) {
        vals.push_back(v);
      } else {
        ++out.n_failed_component[c];
      }
    }
    if (!std::isfinite(point[c]) || vals.size() < 2 ||
        out.n_failed_component[c] > 0.1 * config.n_boot) {
      out.se[c] = out.ci_lo[c] = out.ci_hi[c] = out.pvalue[c] =
          std::numeric_limits<double>::quiet_NaN();
      out.warnings.push_back("component " + std::to_string(c) +
                             (std::isfinite(point[c]) ? ": too many failed draws; no inference"
                                                      : ": point estimate unavailable"));
      continue;
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (static_cast<double>(vals.size()) - 1.0));
    out.se[c] = se;
    if (config.percentile_ci) {
      std::sort(vals.begin(), vals.end());
      auto q = [&](double p) {
        const double h = p * (static_cast<double>(vals.size()) - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, vals.size() - 1);
        return vals[lo] + (h - std::floor(h)) * (vals[hi] - vals[lo]);
      };
      out.ci_lo[c] = q(0.5 * (1.0 - config.ci_level));
      out.ci_hi[c] = q(0.5 * (1.0 + config.ci_level));
    } else {
      out.ci_lo[c] = point[c] - z * se;
      out.ci_hi[c] = point[c] + z * se;
    }
    out.pvalue[c] = normal_two_sided_pvalue(point[c], se);
  }
  return out;
}

BootstrapResult bootstrap(const std::function<double(const Dataset&)>& estimator,
                          const Dataset& ds, const BootstrapConfig& config) {
  auto many = bootstrap_many(
      [&estimator](const Dataset& d) {
        Eigen::VectorXd v(1);
        v[0] = estimator(d);
        if (!std::isfinite(v[0])) throw std::runtime_error("estimator returned non-finite value");
        return v;
      },
      ds, config);
  if (!std::isfinite(many.se[0]))
    throw std::runtime_error("unstable resampling: inference unavailable");
  return {many.estimate[0], many.se[0], many.ci_lo[0], many.ci_hi[0], many.pvalue[0],
          many.n_failed};
}

}  // namespace epsens
