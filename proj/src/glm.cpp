#include "epsens/glm.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace epsens {

namespace {

constexpr double kRankTol = 1e-10;       // relative pivot threshold
constexpr double kSeparationEta = 30.0;  // |linear predictor| flagging quasi-separation

double expit(double eta) {
  if (eta > 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// Sequential (in-order) pivoted orthogonalization: keeps the intercept and
// earlier columns, drops any later column whose component orthogonal to the
// kept ones falls below kRankTol relative to its own norm.
std::vector<int> select_columns(const Eigen::MatrixXd& d) {
  const Eigen::Index n = d.rows(), m = d.cols();
  std::vector<int> kept;
  Eigen::MatrixXd q(n, m);
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::VectorXd v = d.col(j);
    const double norm0 = v.norm();
    for (Eigen::Index t = 0; t < r; ++t) v -= q.col(t).dot(v) * q.col(t);
    for (Eigen::Index t = 0; t < r; ++t) v -= q.col(t).dot(v) * q.col(t);  // re-orthogonalize
    if (norm0 <= 0.0 || v.norm() <= kRankTol * norm0) continue;
    q.col(r) = v / v.norm();
    kept.push_back(static_cast<int>(j));
    ++r;
  }
  return kept;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd d(x.rows(), x.cols() + 1);
  d.col(0).setOnes();
  d.rightCols(x.cols()) = x;
  return d;
}

void note_dropped(GlmFit& fit, const std::vector<int>& kept, Eigen::Index m) {
  std::vector<char> iskept(m, 0);
  for (int j : kept) iskept[j] = 1;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!iskept[j]) {
      fit.dropped_columns.push_back(static_cast<int>(j) - 1);  // -1 = intercept
      fit.warnings.push_back("design column " + std::to_string(j - 1) +
                             " dropped by rank check (collinear)");
    }
  }
}

// Scatter coefficients of the kept columns back into full-length vectors.
Eigen::MatrixXd scatter(const Eigen::MatrixXd& beta_kept, const std::vector<int>& kept,
                        Eigen::Index m) {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(m, beta_kept.cols());
  for (std::size_t t = 0; t < kept.size(); ++t) full.row(kept[t]) = beta_kept.row(t);
  return full;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& d, const std::vector<int>& kept) {
  Eigen::MatrixXd out(d.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t t = 0; t < kept.size(); ++t) out.col(t) = d.col(kept[t]);
  return out;
}

double binomial_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    // log(1+exp(eta)) computed stably
    const double a = eta[i];
    const double log1pe = a > 0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
    ll += y[i] * a - log1pe;
  }
  return -2.0 * ll;
}

GlmFit fit_gaussian(const Eigen::MatrixXd& d, const Eigen::VectorXd& y,
                    const std::vector<int>& kept) {
  GlmFit fit;
  fit.family = GlmFamily::gaussian();
  const Eigen::MatrixXd dk = gather(d, kept);
  Eigen::VectorXd beta = dk.colPivHouseholderQr().solve(y);
  fit.coef = scatter(beta, kept, d.cols());
  fit.deviance = (y - dk * beta).squaredNorm();
  fit.converged = true;
  fit.iterations = 1;
  return fit;
}

GlmFit fit_binomial(const Eigen::MatrixXd& d, const Eigen::VectorXd& y,
                    const std::vector<int>& kept, const GlmConfig& cfg) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0)
      throw std::invalid_argument("binomial response must be 0/1");
  }
  GlmFit fit;
  fit.family = GlmFamily::binomial();
  const Eigen::MatrixXd dk = gather(d, kept);
  const Eigen::Index m = dk.cols();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(d.rows());
  double dev = binomial_deviance(y, eta);
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    Eigen::VectorXd p(d.rows()), w(d.rows());
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      p[i] = expit(eta[i]);
      w[i] = std::max(p[i] * (1.0 - p[i]), 1e-10);
    }
    const Eigen::MatrixXd h = dk.transpose() * w.asDiagonal() * dk;
    const Eigen::VectorXd g = dk.transpose() * (y - p);
    Eigen::VectorXd step = h.ldlt().solve(g);

    // step-halving keeps the deviance nonincreasing
    double scale = 1.0;
    Eigen::VectorXd beta_new, eta_new;
    double dev_new = dev;
    for (int half = 0; half < 30; ++half) {
      beta_new = beta + scale * step;
      eta_new = dk * beta_new;
      dev_new = binomial_deviance(y, eta_new);
      if (dev_new <= dev + 1e-12) break;
      scale *= 0.5;
    }
    const double delta = (scale * step).cwiseAbs().maxCoeff();
    beta = beta_new;
    eta = eta_new;
    dev = dev_new;
    if (delta < cfg.tol) {
      fit.converged = true;
      ++it;
      break;
    }
    // quasi-separation: diverging linear predictor or a numerically perfect fit
    if (eta.cwiseAbs().maxCoeff() > kSeparationEta || dev < 1e-6) break;
  }
  fit.iterations = it;
  fit.coef = scatter(beta, kept, d.cols());
  fit.deviance = dev;
  if (eta.size() > 0 && (eta.cwiseAbs().maxCoeff() > kSeparationEta || dev < 1e-6)) {
    fit.separation = true;
    fit.warnings.push_back("quasi-separation: fitted probabilities numerically 0 or 1; "
                           "predictions clamped by truncation downstream");
  } else if (!fit.converged) {
    throw GlmNonConvergence("binomial IRLS did not converge in " +
                                std::to_string(cfg.max_iter) + " iterations",
                            fit);
  }
  return fit;
}

double multinomial_negll(const Eigen::MatrixXd& eta, const Eigen::VectorXi& yk) {
  // eta is n x (K-1); class 1 pinned at 0
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    double mx = 0.0;
    for (Eigen::Index c = 0; c < eta.cols(); ++c) mx = std::max(mx, eta(i, c));
    double lse = std::exp(-mx);
    for (Eigen::Index c = 0; c < eta.cols(); ++c) lse += std::exp(eta(i, c) - mx);
    lse = mx + std::log(lse);
    const double eta_y = yk[i] == 1 ? 0.0 : eta(i, yk[i] - 2);
    ll += eta_y - lse;
  }
  return -ll;
}

GlmFit fit_multinomial(const Eigen::MatrixXd& d, const Eigen::VectorXd& y,
                       const std::vector<int>& kept, int kk, const GlmConfig& cfg) {
  const Eigen::Index n = d.rows();
  Eigen::VectorXi yk(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::nearbyint(y[i]);
    if (std::abs(y[i] - r) > 1e-9 || r < 1 || r > kk)
      throw std::invalid_argument("multinomial response must be in 1..K");
    yk[i] = static_cast<int>(r);
  }
  GlmFit fit;
  fit.family = GlmFamily::multinomial(kk);
  const Eigen::MatrixXd dk = gather(d, kept);
  const Eigen::Index m = dk.cols();
  const int kc = kk - 1;

  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(m, kc);  // column c -> class c+2
  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(n, kc);
  double nll = multinomial_negll(eta, yk);
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    // class probabilities for classes 2..K
    Eigen::MatrixXd prob(n, kc);
    for (Eigen::Index i = 0; i < n; ++i) {
      double mx = 0.0;
      for (int c = 0; c < kc; ++c) mx = std::max(mx, eta(i, c));
      double denom = std::exp(-mx);
      for (int c = 0; c < kc; ++c) denom += std::exp(eta(i, c) - mx);
      for (int c = 0; c < kc; ++c) prob(i, c) = std::exp(eta(i, c) - mx) / denom;
    }
    Eigen::VectorXd grad(m * kc);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m * kc, m * kc);
    for (int c = 0; c < kc; ++c) {
      Eigen::VectorXd resid(n);
      for (Eigen::Index i = 0; i < n; ++i) resid[i] = (yk[i] == c + 2 ? 1.0 : 0.0) - prob(i, c);
      grad.segment(c * m, m) = dk.transpose() * resid;
      for (int l = 0; l < kc; ++l) {
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          w[i] = prob(i, c) * ((c == l ? 1.0 : 0.0) - prob(i, l));
        }
        hess.block(c * m, l * m, m, m) = dk.transpose() * w.asDiagonal() * dk;
      }
    }
    Eigen::VectorXd step = hess.ldlt().solve(grad);

    double scale = 1.0;
    Eigen::MatrixXd beta_new, eta_new;
    double nll_new = nll;
    for (int half = 0; half < 30; ++half) {
      beta_new = beta;
      for (int c = 0; c < kc; ++c) beta_new.col(c) += scale * step.segment(c * m, m);
      eta_new = dk * beta_new;
      nll_new = multinomial_negll(eta_new, yk);
      if (nll_new <= nll + 1e-12) break;
      scale *= 0.5;
    }
    const double delta = scale * step.cwiseAbs().maxCoeff();
    beta = beta_new;
    eta = eta_new;
    nll = nll_new;
    if (delta < cfg.tol) {
      fit.converged = true;
      ++it;
      break;
    }
    if (eta.cwiseAbs().maxCoeff() > kSeparationEta || 2.0 * nll < 1e-6) break;
  }
  fit.iterations = it;
  fit.coef = scatter(beta, kept, d.cols());
  fit.deviance = 2.0 * nll;
  if (eta.size() > 0 &&
      (eta.cwiseAbs().maxCoeff() > kSeparationEta || fit.deviance < 1e-6)) {
    fit.separation = true;
    fit.warnings.push_back("quasi-separation: fitted probabilities numerically 0 or 1");
  } else if (!fit.converged) {
    throw GlmNonConvergence("multinomial Newton did not converge in " +
                                std::to_string(cfg.max_iter) + " iterations",
                            fit);
  }
  return fit;
}

}  // namespace

GlmFit fit_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, GlmFamily family,
               GlmConfig config) {
  if (x.rows() != y.size()) throw std::invalid_argument("rows(x) must equal len(y)");
  if (y.size() == 0) throw std::invalid_argument("empty response");
  const Eigen::MatrixXd d = with_intercept(x);
  const auto kept = select_columns(d);

  GlmFit fit;
  switch (family.tag) {
    case Family::Gaussian:
      fit = fit_gaussian(d, y, kept);
      break;
    case Family::Binomial:
      fit = fit_binomial(d, y, kept, config);
      break;
    case Family::Multinomial:
      fit = fit_multinomial(d, y, kept, family.k, config);
      break;
  }
  note_dropped(fit, kept, d.cols());
  return fit;
}

Eigen::VectorXd predict_mean(const GlmFit& fit, const Eigen::MatrixXd& x) {
  if (fit.family.tag == Family::Multinomial)
    throw std::invalid_argument("use predict_mean_multi for multinomial fits");
  if (x.cols() + 1 != fit.coef.rows())
    throw std::invalid_argument("prediction design has " + std::to_string(x.cols()) +
                                " columns; fit expects " + std::to_string(fit.coef.rows() - 1));
  Eigen::VectorXd eta = with_intercept(x) * fit.coef.col(0);
  if (fit.family.tag == Family::Gaussian) return eta;
  for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = expit(eta[i]);
  return eta;
}

Eigen::MatrixXd predict_mean_multi(const GlmFit& fit, const Eigen::MatrixXd& x) {
  if (fit.family.tag != Family::Multinomial)
    throw std::invalid_argument("predict_mean_multi requires a multinomial fit");
  if (x.cols() + 1 != fit.coef.rows())
    throw std::invalid_argument("prediction design has " + std::to_string(x.cols()) +
                                " columns; fit expects " + std::to_string(fit.coef.rows() - 1));
  const Eigen::MatrixXd eta = with_intercept(x) * fit.coef;  // n x (K-1)
  const int kk = fit.family.k;
  Eigen::MatrixXd prob(x.rows(), kk);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mx = 0.0;
    for (Eigen::Index c = 0; c < eta.cols(); ++c) mx = std::max(mx, eta(i, c));
    double denom = std::exp(-mx);
    for (Eigen::Index c = 0; c < eta.cols(); ++c) denom += std::exp(eta(i, c) - mx);
    prob(i, 0) = std::exp(-mx) / denom;
    for (Eigen::Index c = 0; c < eta.cols(); ++c) prob(i, c + 1) = std::exp(eta(i, c) - mx) / denom;
  }
  return prob;
}

TruncationResult truncate_pscore(const Eigen::VectorXd& p, std::pair<double, double> bounds) {
  const auto [lo, hi] = bounds;
  if (!(0.0 <= lo && lo < hi && hi <= 1.0))
    throw std::invalid_argument("truncation bounds must satisfy 0 <= lo < hi <= 1");
  TruncationResult out;
  out.p = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double c = std::min(std::max(p[i], lo), hi);
    if (c != p[i]) ++out.n_clamped;
    out.p[i] = c;
  }
  return out;
}

}  // namespace epsens
