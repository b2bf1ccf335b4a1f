#include "epsens/sim.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "epsens/ate.hpp"
#include "epsens/records.hpp"
#include "epsens/bootstrap.hpp"
#include "epsens/nuisance.hpp"
#include "epsens/parallel.hpp"
#include "epsens/rng.hpp"

namespace epsens {

namespace {

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Dataset make_dataset(const Eigen::MatrixXd& x, const Eigen::VectorXi& z,
                     const Eigen::VectorXd& y) {
  Dataset ds;
  ds.x = x;
  ds.z = z;
  ds.y = y;
  ds.covariate_names = {"x1", "x2", "x3"};
  return ds;
}

// Per-arm outcome fit on the requested scale. Log-scale fits carry the
// lognormal mean back-transform exp(xb + s^2/2).
Eigen::VectorXd outcome_means(const Dataset& ds, int arm, bool log_outcome) {
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    if (ds.z[i] == arm) idx.push_back(static_cast<int>(i));
  if (idx.size() < 2) throw std::runtime_error("arm too small to fit outcome model");
  Eigen::MatrixXd xa(static_cast<Eigen::Index>(idx.size()), ds.p());
  Eigen::VectorXd ya(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t t = 0; t < idx.size(); ++t) {
    xa.row(static_cast<Eigen::Index>(t)) = ds.x.row(idx[t]);
    ya[static_cast<Eigen::Index>(t)] = log_outcome ? std::log(ds.y[idx[t]]) : ds.y[idx[t]];
  }
  const auto fit = fit_glm(xa, ya, GlmFamily::gaussian());
  Eigen::VectorXd mean = predict_mean(fit, ds.x);
  if (log_outcome) {
    const double s2 = fit.deviance / static_cast<double>(idx.size());
    mean = (mean.array() + 0.5 * s2).exp();
  }
  return mean;
}

}  // namespace

Dataset draw_dgp(int n, double b, std::mt19937_64& rng) {
  if (b < 0) throw std::invalid_argument("confounding strength b must be nonnegative");
  std::normal_distribution<double> normal05(0.0, 0.5);
  std::bernoulli_distribution bern05(0.5);

  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXi z(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double x1 = normal05(rng);
    const double x2 = normal05(rng);
    const double x3 = bern05(rng) ? 1.0 : 0.0;
    const double u = bern05(rng) ? 1.0 : 0.0;
    const double pz = 0.25 + 0.5 * u;
    const double zi = std::bernoulli_distribution(pz)(rng) ? 1.0 : 0.0;
    const double e1 = normal05(rng);
    const double e0 = normal05(rng);
    const double y1 = std::exp(x1 + x2 + b * u + e1);
    const double y0 = std::exp(x1 + x2 + b * x3 + e0);
    x(i, 0) = x1;
    x(i, 1) = x2;
    x(i, 2) = x3;
    z[i] = static_cast<int>(zi);
    y[i] = zi == 1.0 ? y1 : y0;
  }
  return make_dataset(x, z, y);
}

double true_eps1(double b) {
  const double eb = std::exp(b);
  return (0.75 * eb + 0.25) / (0.25 * eb + 0.75);
}

XdepDraw draw_dgp_xdep(int n, double b, std::mt19937_64& rng) {
  std::normal_distribution<double> normal05(0.0, 0.5);
  std::bernoulli_distribution bern05(0.5);
  const double eb = std::exp(b);

  XdepDraw out;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXi z(n);
  Eigen::VectorXd y(n);
  out.e_true.resize(n);
  out.eps1_true.resize(n);
  for (int i = 0; i < n; ++i) {
    double x1 = normal05(rng);
    while (std::abs(x1) > 1.5) x1 = normal05(rng);
    const double x2 = normal05(rng);
    const double x3 = bern05(rng) ? 1.0 : 0.0;
    const double u = bern05(rng) ? 1.0 : 0.0;
    const double ex = expit(-0.8 + 0.5 * x1 + 0.4 * x1 * x3);
    const double g = 2.0 * ex;
    const double pz = (0.25 + 0.5 * u) * g;
    const double zi = std::bernoulli_distribution(pz)(rng) ? 1.0 : 0.0;
    const double e1 = normal05(rng);
    const double e0 = normal05(rng);
    x(i, 0) = x1;
    x(i, 1) = x2;
    x(i, 2) = x3;
    z[i] = static_cast<int>(zi);
    y[i] = zi == 1.0 ? std::exp(x1 + x2 + b * u + e1) : std::exp(x1 + x2 + b * x3 + e0);
    out.e_true[i] = ex;
    const double q0 = (1.0 - 0.75 * g) / (2.0 - g);  // pr(U=1 | Z=0, X)
    out.eps1_true[i] = (0.75 * eb + 0.25) / (q0 * eb + 1.0 - q0);
  }
  out.ds = make_dataset(x, z, y);
  return out;
}

Eigen::VectorXd sim_dr_estimates(const Dataset& ds, const std::vector<double>& eps1_list,
                                 bool log_outcome) {
  NuisanceFits fits;
  fits.pscore_model = fit_glm(ds.x, ds.z.cast<double>(), GlmFamily::binomial());
  fits.ehat = predict_mean(fits.pscore_model, ds.x).cwiseMax(1e-12).cwiseMin(1.0 - 1e-12);
  fits.mu1hat = outcome_means(ds, 1, log_outcome);
  fits.mu0hat = outcome_means(ds, 0, log_outcome);

  Eigen::VectorXd est(static_cast<Eigen::Index>(eps1_list.size()));
  for (std::size_t j = 0; j < eps1_list.size(); ++j)
    est[static_cast<Eigen::Index>(j)] =
        ate(Method::DR, ds, fits, SensitivitySpec::constant(eps1_list[j], 1.0));
  return est;
}

SimTable run_simulation(const SimConfig& config) {
  if (config.n < 4 || config.n_mc < 1 || config.n_boot < 1 || config.b_list.empty() ||
      config.eps1_list.empty())
    throw std::invalid_argument("invalid simulation configuration");

  SimTable table;
  table.config = config;
  const auto n_b = config.b_list.size();
  const auto n_e = config.eps1_list.size();
  table.cells.assign(n_b, std::vector<SimCell>(n_e));

  struct RepOutcome {
    std::vector<char> covered, rejected;
    bool failed = false;
  };
  std::vector<std::vector<RepOutcome>> results(n_b,
                                               std::vector<RepOutcome>(config.n_mc));

  const int total = static_cast<int>(n_b) * config.n_mc;
  par::for_each_index(total, config.threads, [&](int task) {
    const auto bi = static_cast<std::size_t>(task) / config.n_mc;
    const int rep = task % config.n_mc;
    const std::uint64_t stream = (static_cast<std::uint64_t>(bi) << 32) | static_cast<std::uint64_t>(rep);
    auto& slot = results[bi][rep];
    try {
      auto engine = rng::substream(config.seed, stream);
      const Dataset ds = draw_dgp(config.n, config.b_list[bi], engine);

      BootstrapConfig bcfg;
      bcfg.n_boot = config.n_boot;
      bcfg.seed = rng::mix(config.seed ^ 0x626f6f74ULL, stream);  // independent of the draw stream
      bcfg.threads = 1;  // replicates are the parallel unit
      const auto res = bootstrap_many(
          [&](const Dataset& d) { return sim_dr_estimates(d, config.eps1_list, config.log_outcome); },
          ds, bcfg);

      slot.covered.resize(n_e);
      slot.rejected.resize(n_e);
      for (std::size_t j = 0; j < n_e; ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        if (!std::isfinite(res.se[c])) throw std::runtime_error("bootstrap failed for a cell");
        slot.covered[j] = res.ci_lo[c] <= 0.0 && 0.0 <= res.ci_hi[c];
        slot.rejected[j] = res.ci_lo[c] > 0.0;
      }
    } catch (const std::exception&) {
      slot.failed = true;
    }
  });

  for (std::size_t bi = 0; bi < n_b; ++bi) {
    int ok = 0;
    std::vector<int> cov(n_e, 0), rej(n_e, 0);
    int failed = 0;
    for (int rep = 0; rep < config.n_mc; ++rep) {
      const auto& slot = results[bi][rep];
      if (slot.failed) {
        ++failed;
        continue;
      }
      ++ok;
      for (std::size_t j = 0; j < n_e; ++j) {
        cov[j] += slot.covered[j];
        rej[j] += slot.rejected[j];
      }
    }
    for (std::size_t j = 0; j < n_e; ++j) {
      auto& cell = table.cells[bi][j];
      cell.n_failed = failed;
      cell.coverage = ok > 0 ? static_cast<double>(cov[j]) / ok : 0.0;
      cell.false_rejection = ok > 0 ? static_cast<double>(rej[j]) / ok : 0.0;
    }
  }
  return table;
}

void write_sim_csv(const SimTable& table, std::ostream& out) {
  auto num = [](double v) { return format_shortest(v); };
  out << "block,b,true_eps1";
  for (double e : table.config.eps1_list) out << "," << num(e);
  out << "\n";
  const char* blocks[3] = {"coverage", "false_rejection", "failed"};
  for (int blk = 0; blk < 3; ++blk) {
    for (std::size_t bi = 0; bi < table.config.b_list.size(); ++bi) {
      out << blocks[blk] << "," << num(table.config.b_list[bi]) << ","
          << num(true_eps1(table.config.b_list[bi]));
      for (std::size_t j = 0; j < table.config.eps1_list.size(); ++j) {
        const auto& cell = table.cells[bi][j];
        if (blk == 0) {
          out << "," << num(cell.coverage);
        } else if (blk == 1) {
          out << "," << num(cell.false_rejection);
        } else {
          out << "," << cell.n_failed;
        }
      }
      out << "\n";
    }
  }
}

}  // namespace epsens
