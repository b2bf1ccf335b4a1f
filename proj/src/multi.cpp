#include "epsens/multi.hpp"

#include <cmath>
#include <stdexcept>

namespace epsens {

EpsMatrix::EpsMatrix(int k_levels) : k_(k_levels) {
  if (k_levels < 2) throw std::invalid_argument("EpsMatrix needs K >= 2");
  entries_.assign(static_cast<std::size_t>(k_) * k_, SensitivitySpec::constant(1.0, 1.0));
}

void EpsMatrix::set(int k, int l, SensitivitySpec spec) {
  if (k < 1 || k > k_ || l < 1 || l > k_)
    throw std::invalid_argument("EpsMatrix indices must be in 1..K");
  if (k == l && !(spec.is_constant() && spec.const_eps1() == 1.0))
    throw std::invalid_argument("diagonal sensitivity entries are fixed at 1");
  entries_[static_cast<std::size_t>(k - 1) * k_ + (l - 1)] = std::move(spec);
}

const SensitivitySpec& EpsMatrix::at(int k, int l) const {
  if (k < 1 || k > k_ || l < 1 || l > k_)
    throw std::invalid_argument("EpsMatrix indices must be in 1..K");
  return entries_[static_cast<std::size_t>(k - 1) * k_ + (l - 1)];
}

Eigen::VectorXd EpsMatrix::evaluate(int k, int l, const Eigen::MatrixXd& x) const {
  if (k == l) return Eigen::VectorXd::Ones(x.rows());
  // Entry (k,l) is carried in the eps1 slot of its SensitivitySpec.
  return at(k, l).evaluate(x).e1;
}

GpsFits fit_multi_nuisances(const Dataset& ds, GlmFamily outcome_family,
                            std::pair<double, double> trunc, GlmConfig config) {
  const int kk = ds.n_levels();
  if (kk < 2) throw std::invalid_argument("multi-valued treatment needs K >= 2");
  GpsFits out;
  Eigen::VectorXd zreal = ds.z.cast<double>();
  out.gps_model = fit_glm(ds.x, zreal, GlmFamily::multinomial(kk), config);
  Eigen::MatrixXd egps = predict_mean_multi(out.gps_model, ds.x);
  out.egps.resize(ds.n(), kk);
  for (int k = 0; k < kk; ++k) {
    auto t = truncate_pscore(egps.col(k), trunc);
    out.n_truncated += t.n_clamped;
    out.egps.col(k) = t.p;
  }

  out.mu.resize(ds.n(), kk);
  for (int k = 1; k <= kk; ++k) {
    std::vector<int> idx;
    for (Eigen::Index i = 0; i < ds.n(); ++i)
      if (ds.z[i] == k) idx.push_back(static_cast<int>(i));
    if (idx.size() < 2)
      throw std::runtime_error("treatment level " + std::to_string(k) + " absent or singleton");
    Eigen::MatrixXd xk(static_cast<Eigen::Index>(idx.size()), ds.p());
    Eigen::VectorXd yk(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t t = 0; t < idx.size(); ++t) {
      xk.row(static_cast<Eigen::Index>(t)) = ds.x.row(idx[t]);
      yk[static_cast<Eigen::Index>(t)] = ds.y[idx[t]];
    }
    auto fit = fit_glm(xk, yk, outcome_family, config);
    out.mu.col(k - 1) = predict_mean(fit, ds.x);
    out.mu_models.push_back(std::move(fit));
  }
  for (const auto& m : out.mu_models)
    out.warnings.insert(out.warnings.end(), m.warnings.begin(), m.warnings.end());
  out.warnings.insert(out.warnings.end(), out.gps_model.warnings.begin(),
                      out.gps_model.warnings.end());
  return out;
}

std::string multi_method_name(MultiMethod m) {
  switch (m) {
    case MultiMethod::Reg: return "reg";
    case MultiMethod::HT: return "ht";
    case MultiMethod::DR: return "dr";
  }
  return "?";
}

MultiMethod multi_method_from_name(const std::string& name) {
  if (name == "reg") return MultiMethod::Reg;
  if (name == "ht") return MultiMethod::HT;
  if (name == "dr") return MultiMethod::DR;
  throw std::invalid_argument("unknown multi estimator '" + name + "'");
}

double multi_potential_mean(int level, MultiMethod method, const Dataset& ds, const GpsFits& gps,
                            const EpsMatrix& eps) {
  const int kk = eps.levels();
  if (level < 1 || level > kk) throw std::invalid_argument("treatment level out of range");
  if (gps.egps.rows() != ds.n() || gps.egps.cols() != kk || gps.mu.rows() != ds.n())
    throw std::invalid_argument("gps fits are not dimensioned to the dataset");
  if (ds.count_arm(level) == 0)
    throw std::runtime_error("treatment level " + std::to_string(level) + " absent");
  const Eigen::Index n = ds.n();

  // eps_{level,l}(X_i) for each l
  std::vector<Eigen::VectorXd> e(kk);
  for (int l = 1; l <= kk; ++l) e[l - 1] = eps.evaluate(level, l, ds.x);

  const auto& mu_k = gps.mu.col(level - 1);
  const auto& e_k = gps.egps.col(level - 1);
  if ((e_k.array() <= 0.0).any())
    throw std::runtime_error("generalized propensity score for level " + std::to_string(level) +
                             " is zero after truncation");

  double acc = 0.0;
  switch (method) {
    case MultiMethod::Reg:
      for (Eigen::Index i = 0; i < n; ++i) acc += mu_k[i] / e[ds.z[i] - 1][i];
      return acc / n;
    case MultiMethod::HT:
      for (Eigen::Index i = 0; i < n; ++i) {
        if (ds.z[i] != level) continue;
        double wsum = 0.0;
        for (int l = 0; l < kk; ++l) wsum += gps.egps(i, l) / e[l][i];
        acc += wsum * ds.y[i] / e_k[i];
      }
      return acc / n;
    case MultiMethod::DR: {
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += mu_k[i] / e[ds.z[i] - 1][i];
        if (ds.z[i] == level) {
          double wsum = 0.0;
          for (int l = 0; l < kk; ++l) wsum += gps.egps(i, l) / e[l][i];
          acc += wsum * (ds.y[i] - mu_k[i]) / e_k[i];
        }
      }
      return acc / n;
    }
  }
  throw std::logic_error("unreachable");
}

double multi_contrast(const Contrast& c, MultiMethod method, const Dataset& ds, const GpsFits& gps,
                      const EpsMatrix& eps) {
  if (c.c.size() != eps.levels())
    throw std::invalid_argument("contrast length must equal the number of treatment levels");
  if (std::abs(c.c.sum()) > 1e-12)
    throw std::invalid_argument("contrast coefficients must sum to 0");
  double acc = 0.0;
  for (int k = 1; k <= eps.levels(); ++k) {
    if (c.c[k - 1] == 0.0) continue;
    acc += c.c[k - 1] * multi_potential_mean(k, method, ds, gps, eps);
  }
  return acc;
}

}  // namespace epsens
