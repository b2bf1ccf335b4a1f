#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace epsens {

// One estimand x estimator x (eps1, eps0) result cell.
struct EstimateRecord {
  std::string estimand;   // ate | att | rr | or | log_rr | log_or | surv_diff | multi_contrast
  std::string estimator;  // pred | proj | ht | hajek | dr | dr2 | match_bc | reg
  std::string eps1_label, eps0_label;  // constant value or "fn"
  double estimate = 0.0, se = 0.0, ci_lo = 0.0, ci_hi = 0.0, pvalue = 1.0;
};

// Fixed column order: estimand,estimator,eps1,eps0,est,se,ci_lo,ci_hi,pvalue.
void write_records_csv(const std::vector<EstimateRecord>& records, std::ostream& out);
void write_records_json(const std::vector<EstimateRecord>& records,
                        const std::vector<std::string>& warnings, std::ostream& out);

// CSV number formatting: 17 significant digits (always exact) and the
// shortest decimal that parses back to the same double (for labels/grids).
std::string format_g17(double v);
std::string format_shortest(double v);

}  // namespace epsens
