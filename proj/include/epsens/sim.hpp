#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "epsens/dataset.hpp"

namespace epsens {

// Monte Carlo study of the doubly robust estimator under a binary unobserved
// confounder: coverage of the 95% CI and false-rejection rate per
// (confounding strength b, assumed eps1) cell.
struct SimConfig {
  int n = 500;
  std::vector<double> b_list = {0.0, 0.2, 0.3, 0.5, 1.0, 1.5};
  std::vector<double> eps1_list = {1.0, 1.10, 1.16, 1.28, 1.60, 1.93};
  int n_mc = 200;   // desk scale; the full study uses 500
  int n_boot = 200;
  std::uint64_t seed = 0;
  bool log_outcome = false;  // fit outcome models on the log scale (lognormal
                             // mean back-transform) instead of the raw scale
  int threads = 0;
};

// One draw of the study's data-generating process: X1, X2 ~ N(0, 0.5^2),
// X3 ~ Bern(0.5), hidden U ~ Bern(0.5), Z | U ~ Bern(0.25 + 0.5 U),
// log Y(1) = X1 + X2 + bU + e1, log Y(0) = X1 + X2 + bX3 + e0 with
// e_z ~ N(0, 0.5^2). The confounder U is not exported. The population
// average effect is 0.
Dataset draw_dgp(int n, double b, std::mt19937_64& rng);

// Closed-form eps1 implied by the process; eps0 is identically 1.
double true_eps1(double b);

// Variant with a covariate-dependent propensity for double-robustness
// studies: pr(Z=1 | X, U) = (0.25 + 0.5U) * 2 * expit(-0.8 + 0.5 X1
// + 0.4 X1 X3), with X1 truncated to |X1| <= 1.5 so probabilities stay in
// (0,1). eps1 becomes a two-point function of X (returned per unit along
// with the true propensity); eps0 = 1 and the average effect is still 0.
struct XdepDraw {
  Dataset ds;
  Eigen::VectorXd e_true;     // pr(Z=1 | X)
  Eigen::VectorXd eps1_true;  // per-unit
};
XdepDraw draw_dgp_xdep(int n, double b, std::mt19937_64& rng);

// Point DR estimates for each eps1 in the list (eps0 = 1), fitting a logit
// propensity and per-arm linear outcome models on the draw. Shared by the
// harness and its bootstrap closure.
Eigen::VectorXd sim_dr_estimates(const Dataset& ds, const std::vector<double>& eps1_list,
                                 bool log_outcome);

struct SimCell {
  double coverage = 0.0;
  double false_rejection = 0.0;
  int n_failed = 0;  // replicates lost to estimator failures
};

struct SimTable {
  SimConfig config;
  std::vector<std::vector<SimCell>> cells;  // [b index][eps1 index]
};

SimTable run_simulation(const SimConfig& config);

// Layout: one coverage block and one false-rejection block (plus a failures
// block), rows indexed by (b, true eps1), one column per grid eps1.
void write_sim_csv(const SimTable& table, std::ostream& out);

}  // namespace epsens
