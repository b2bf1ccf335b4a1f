#include "epsens/records.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

namespace epsens {

std::string format_g17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_shortest(double v) {
  if (std::isnan(v)) return "nan";
  char buf[48];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

namespace {
std::string num(double v) { return format_g17(v); }
}  // namespace

void write_records_csv(const std::vector<EstimateRecord>& records, std::ostream& out) {
  out << "estimand,estimator,eps1,eps0,est,se,ci_lo,ci_hi,pvalue\n";
  for (const auto& r : records) {
    out << r.estimand << "," << r.estimator << "," << r.eps1_label << "," << r.eps0_label << ","
        << num(r.estimate) << "," << num(r.se) << "," << num(r.ci_lo) << "," << num(r.ci_hi)
        << "," << num(r.pvalue) << "\n";
  }
}

void write_records_json(const std::vector<EstimateRecord>& records,
                        const std::vector<std::string>& warnings, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["results"] = nlohmann::ordered_json::array();
  auto clean = [](double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
  };
  for (const auto& r : records) {
    nlohmann::ordered_json row;
    row["estimand"] = r.estimand;
    row["estimator"] = r.estimator;
    row["eps1"] = r.eps1_label;
    row["eps0"] = r.eps0_label;
    row["est"] = clean(r.estimate);
    row["se"] = clean(r.se);
    row["ci_lo"] = clean(r.ci_lo);
    row["ci_hi"] = clean(r.ci_hi);
    row["pvalue"] = clean(r.pvalue);
    doc["results"].push_back(row);
  }
  doc["warnings"] = warnings;
  out << doc.dump(2) << "\n";
}

}  // namespace epsens
