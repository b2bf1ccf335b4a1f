#include "epsens/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace epsens {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  const std::string t = trim(cell);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw std::runtime_error("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                             ", column '" + col + "'");
  }
  return v;
}

int parse_int_cell(const std::string& cell, std::size_t row, const std::string& col) {
  const double v = parse_cell(cell, row, col);
  const double r = std::nearbyint(v);
  if (!std::isfinite(v) || std::abs(v - r) > 1e-9) {
    throw std::runtime_error("column '" + col + "' must be integer-coded; got '" + cell +
                             "' at row " + std::to_string(row));
  }
  return static_cast<int>(r);
}

void fmt17(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.x.resize(m, x.cols());
  out.z.resize(m);
  out.y.resize(m);
  if (has_event()) out.delta.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out.x.row(i) = x.row(rows[i]);
    out.z[i] = z[rows[i]];
    out.y[i] = y[rows[i]];
    if (has_event()) out.delta[i] = delta[rows[i]];
  }
  out.covariate_names = covariate_names;
  out.treatment_name = treatment_name;
  out.outcome_name = outcome_name;
  out.event_name = event_name;
  return out;
}

Dataset load_csv(const std::string& path, const ColumnSpec& spec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty file: " + path);
  const auto names = split_line(header);
  std::map<std::string, int> col_index;
  for (std::size_t j = 0; j < names.size(); ++j) col_index[trim(names[j])] = static_cast<int>(j);

  auto require = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it == col_index.end()) throw std::runtime_error("missing column '" + name + "' in " + path);
    return it->second;
  };

  const int zc = require(spec.treatment);
  const int yc = require(spec.outcome);
  std::vector<int> xc;
  for (const auto& c : spec.covariates) xc.push_back(require(c));
  const bool want_event = !spec.event.empty();
  const int dc = want_event ? require(spec.event) : -1;

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }

  Dataset ds;
  const auto n = static_cast<Eigen::Index>(lines.size());
  const auto p = static_cast<Eigen::Index>(xc.size());
  ds.x.resize(n, p);
  ds.z.resize(n);
  ds.y.resize(n);
  if (want_event) ds.delta.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto cells = split_line(lines[i]);
    if (cells.size() != names.size()) {
      throw std::runtime_error("row " + std::to_string(i + 1) + " has " +
                               std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(names.size()));
    }
    ds.z[i] = parse_int_cell(cells[zc], i + 1, spec.treatment);
    ds.y[i] = parse_cell(cells[yc], i + 1, spec.outcome);
    for (Eigen::Index j = 0; j < p; ++j) ds.x(i, j) = parse_cell(cells[xc[j]], i + 1, spec.covariates[j]);
    if (want_event) ds.delta[i] = parse_int_cell(cells[dc], i + 1, spec.event);
  }
  ds.covariate_names = spec.covariates;
  ds.treatment_name = spec.treatment;
  ds.outcome_name = spec.outcome;
  ds.event_name = spec.event;

  // Constant covariates are legal but make the design rank-deficient with the
  // intercept; the GLM rank check handles them, so only warn here.
  for (Eigen::Index j = 0; j < p && n > 0; ++j) {
    if ((ds.x.col(j).array() == ds.x(0, j)).all()) {
      ds.warnings.push_back("covariate '" + spec.covariates[j] + "' is constant");
    }
  }

  auto violations = validate(ds, spec.mode);
  if (!violations.empty()) {
    std::string msg = "validation failed for " + path + ":";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw std::runtime_error(msg);
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  std::string buf;
  buf += ds.treatment_name + "," + ds.outcome_name;
  for (const auto& c : ds.covariate_names) buf += "," + c;
  if (ds.has_event()) buf += "," + ds.event_name;
  buf += "\n";
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    buf += std::to_string(ds.z[i]);
    buf += ",";
    fmt17(buf, ds.y[i]);
    for (Eigen::Index j = 0; j < ds.p(); ++j) {
      buf += ",";
      fmt17(buf, ds.x(i, j));
    }
    if (ds.has_event()) buf += "," + std::to_string(ds.delta[i]);
    buf += "\n";
  }
  out << buf;
}

std::vector<std::string> validate(const Dataset& ds, ValidationMode mode) {
  std::vector<std::string> v;
  const auto n = ds.n();
  if (n < 2) v.push_back("need at least 2 rows, got " + std::to_string(n));
  if (ds.x.rows() != n) v.push_back("covariate row count does not match outcome length");
  if (ds.z.size() != n) v.push_back("treatment length does not match outcome length");

  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(ds.y[i])) v.push_back("non-finite outcome at row " + std::to_string(i + 1));
  }
  for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j) {
      if (!std::isfinite(ds.x(i, j))) {
        v.push_back("non-finite covariate at row " + std::to_string(i + 1) + ", column " +
                    std::to_string(j + 1));
      }
    }
  }

  if (mode == ValidationMode::Binary || mode == ValidationMode::Survival) {
    bool nonbinary = false;
    for (Eigen::Index i = 0; i < ds.z.size(); ++i) nonbinary |= (ds.z[i] != 0 && ds.z[i] != 1);
    if (nonbinary) v.push_back("treatment not binary (values outside {0,1})");
    if (!nonbinary && n >= 2) {
      const int n1 = ds.count_arm(1), n0 = ds.count_arm(0);
      if (n1 == 0) v.push_back("treated arm empty");
      if (n0 == 0) v.push_back("control arm empty");
      if (n1 == 1) v.push_back("treated arm has a single unit");
      if (n0 == 1) v.push_back("control arm has a single unit");
    }
  } else {  // Multi
    int kmax = 0, kmin = ds.z.size() > 0 ? ds.z[0] : 0;
    for (Eigen::Index i = 0; i < ds.z.size(); ++i) {
      kmax = std::max(kmax, ds.z[i]);
      kmin = std::min(kmin, ds.z[i]);
    }
    if (kmin < 1) v.push_back("multi-valued treatment must be coded 1..K");
    if (kmax < 2) v.push_back("multi-valued treatment needs at least 2 levels");
    if (kmin >= 1 && kmax >= 2) {
      for (int k = 1; k <= kmax; ++k) {
        const int c = ds.count_arm(k);
        if (c < 2) {
          v.push_back("treatment level " + std::to_string(k) + " present " + std::to_string(c) +
                      " time(s); need at least 2");
        }
      }
    }
  }

  if (mode == ValidationMode::Survival) {
    if (!ds.has_event()) {
      v.push_back("event indicator required for survival data");
    } else {
      bool bad = false, has_event1 = false, has_event0 = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (ds.delta[i] != 0 && ds.delta[i] != 1) bad = true;
        if (ds.delta[i] == 1 && ds.z[i] == 1) has_event1 = true;
        if (ds.delta[i] == 1 && ds.z[i] == 0) has_event0 = true;
      }
      if (bad) v.push_back("event indicator entries must be 0 or 1");
      if (!has_event1) v.push_back("no observed events in treated arm");
      if (!has_event0) v.push_back("no observed events in control arm");
    }
  } else if (ds.delta.size() > 0 && ds.delta.size() != n) {
    v.push_back("event indicator length does not match outcome length");
  }

  return v;
}

}  // namespace epsens
