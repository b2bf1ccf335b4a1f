#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace epsens {

enum class ValidationMode { Binary, Multi, Survival };

// Column-name mapping used by load_csv/write_csv. Covariate order in the
// loaded design matrix follows the order given here, not the file order.
struct ColumnSpec {
  std::string treatment;
  std::string outcome;
  std::vector<std::string> covariates;
  std::string event;  // empty = no event-indicator column
  ValidationMode mode = ValidationMode::Binary;
};

// Observational sample: covariates x (n x p), treatment z, outcome y and,
// for survival data, the event indicator delta (1 = event observed, with y
// holding the censored time min(Y, C)). Immutable after construction; safe
// to share read-only across concurrent estimator evaluations.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXi z;
  Eigen::VectorXd y;
  Eigen::VectorXi delta;  // size 0 when absent

  std::vector<std::string> covariate_names;
  std::string treatment_name = "z";
  std::string outcome_name = "y";
  std::string event_name;  // empty when delta absent

  std::vector<std::string> warnings;  // e.g. constant covariate columns

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return x.cols(); }
  bool has_event() const { return delta.size() == y.size() && y.size() > 0; }

  int count_arm(int level) const {
    int c = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) c += (z[i] == level);
    return c;
  }
  int n_levels() const {
    int k = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) k = std::max(k, z[i]);
    return k;
  }

  // Row subset (with repetition allowed); used by the bootstrap.
  Dataset subset(const std::vector<int>& rows) const;
};

// Reads a strict CSV (UTF-8, comma separator, header row, '.' decimals, no
// quoting) and validates under spec.mode. Throws std::runtime_error naming
// the missing column, the offending cell (row/column), or listing every
// violated invariant.
Dataset load_csv(const std::string& path, const ColumnSpec& spec);

// Inverse of load_csv up to floating-point text round-trip; numbers are
// written with 17 significant digits so doubles survive exactly.
void write_csv(const Dataset& ds, const std::string& path);

// Returns every violated invariant (empty = ok). Never throws.
std::vector<std::string> validate(const Dataset& ds, ValidationMode mode);

}  // namespace epsens
