// Command-line frontend: sensitivity analysis for average causal effects
// under unmeasured confounding, with bootstrap inference, worst-case bounds,
// survival and multi-valued treatment support, covariate calibration, contour
// rendering and the Monte Carlo study harness.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "epsens/ate.hpp"
#include "epsens/att.hpp"
#include "epsens/bootstrap.hpp"
#include "epsens/calibration.hpp"
#include "epsens/contour.hpp"
#include "epsens/dataset.hpp"
#include "epsens/multi.hpp"
#include "epsens/nuisance.hpp"
#include "epsens/parallel.hpp"
#include "epsens/ratio.hpp"
#include "epsens/records.hpp"
#include "epsens/sim.hpp"
#include "epsens/survival.hpp"

using namespace epsens;
using nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(cell, &pos);
      if (pos != cell.size()) throw std::invalid_argument(cell);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("cannot parse '" + text + "' for " + flag +
                       " (expected comma-separated numbers)");
    }
  }
  if (out.empty()) throw UsageError(flag + " must hold at least one value");
  return out;
}

std::pair<double, double> parse_pair(const std::string& text, const std::string& flag) {
  const auto v = parse_list(text, flag);
  if (v.size() != 2) throw UsageError(flag + " expects exactly two comma-separated numbers");
  return {v[0], v[1]};
}

std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "missing";
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string num17(double v) { return format_g17(v); }
std::string numshort(double v) { return format_shortest(v); }

// Shared data/model/inference flags.
struct CommonOpts {
  std::string data, treatment = "z", outcome = "y", event;
  std::vector<std::string> covariates;
  std::string outcome_family = "gaussian";
  std::string trunc = "0,1";
  std::string eps1_list = "1", eps0_list = "1";
  int n_boot = 500;
  double ci_level = 0.95;
  bool percentile_ci = false;
  std::uint64_t seed = 0;
  int max_redraws = 100;
  int threads = 0;
  std::string out = "epsens_out";
};

void add_data_opts(CLI::App* cmd, CommonOpts& o, bool with_event = false) {
  cmd->add_option("--data", o.data, "input CSV file")->required();
  cmd->add_option("--treatment", o.treatment, "treatment column name");
  cmd->add_option("--outcome", o.outcome, "outcome column name");
  cmd->add_option("--covariates", o.covariates, "covariate column names (comma separated)")
      ->required()
      ->delimiter(',');
  if (with_event) cmd->add_option("--event", o.event, "event-indicator column (survival)");
  cmd->add_option("--out", o.out, "output path prefix");
}

void add_model_opts(CLI::App* cmd, CommonOpts& o, const std::string& default_outcome_family) {
  o.outcome_family = default_outcome_family;
  cmd->add_option("--outcome-family", o.outcome_family, "gaussian|binomial")
      ->check(CLI::IsMember({"gaussian", "binomial"}));
  cmd->add_option("--pscore-family", o.outcome_family, "propensity family (binomial only)")
      ->check(CLI::IsMember({"binomial"}))
      ->group("");  // accepted for interface parity; binomial is the only choice
  cmd->add_option("--trunc-pscore", o.trunc, "propensity truncation lo,hi (default 0,1)");
}

void add_inference_opts(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--n-boot", o.n_boot, "bootstrap replicates (default 500)");
  cmd->add_option("--ci-level", o.ci_level, "confidence level (default 0.95)");
  cmd->add_flag("--percentile-ci", o.percentile_ci, "percentile CI instead of normal");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--max-redraws", o.max_redraws, "redraw budget per failed resample");
  cmd->add_option("--threads", o.threads, "worker threads (default: EPSENS_THREADS or all)");
}

GlmFamily family_from(const std::string& name) {
  return name == "binomial" ? GlmFamily::binomial() : GlmFamily::gaussian();
}

BootstrapConfig boot_config(const CommonOpts& o) {
  BootstrapConfig cfg;
  cfg.n_boot = o.n_boot;
  cfg.ci_level = o.ci_level;
  cfg.seed = o.seed;
  cfg.max_redraws = o.max_redraws;
  cfg.percentile_ci = o.percentile_ci;
  cfg.threads = o.threads;
  return cfg;
}

Dataset load_data(const CommonOpts& o, ValidationMode mode) {
  ColumnSpec spec{o.treatment, o.outcome, o.covariates, o.event, mode};
  return load_csv(o.data, spec);
}

void write_manifest(const std::string& command, const CommonOpts& o,
                    const std::vector<std::pair<std::string, std::string>>& extra,
                    const std::vector<std::string>& outputs) {
  ordered_json m;
  m["command"] = command;
  ordered_json opts;
  if (!o.data.empty()) {
    opts["data"] = o.data;
    opts["input_checksum"] = fnv1a64_file(o.data);
    opts["treatment"] = o.treatment;
    opts["outcome"] = o.outcome;
    opts["covariates"] = o.covariates;
    if (!o.event.empty()) opts["event"] = o.event;
  }
  for (const auto& [k, v] : extra) opts[k] = v;
  m["options"] = opts;
  m["seed"] = o.seed;
  m["outputs"] = outputs;
  std::ofstream out(o.out + "_manifest.json");
  out << m.dump(2) << "\n";
}

void emit_records(const CommonOpts& o, const std::vector<EstimateRecord>& records,
                  const std::vector<std::string>& warnings, const std::string& command,
                  const std::vector<std::pair<std::string, std::string>>& extra) {
  {
    std::ofstream csv(o.out + ".csv");
    write_records_csv(records, csv);
  }
  {
    std::ofstream js(o.out + ".json");
    write_records_json(records, warnings, js);
  }
  write_manifest(command, o, extra, {o.out + ".csv", o.out + ".json"});
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---- grid commands (sa-ate, sa-att, sa-rr, sa-or) --------------------------

struct GridSpec {
  std::string estimand;  // ate | att | rr | or | log_rr | log_or
  std::vector<std::string> estimators;
  std::vector<double> eps1, eps0;
};

// One closure evaluates the whole grid so nuisances are refit once per
// bootstrap resample. Cells that fail (e.g. an odds ratio hitting a zero
// arm mean on a resample) become NaN and are handled per component.
Eigen::VectorXd eval_grid(const GridSpec& g, const Dataset& d, const NuisanceFits& fits) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(g.estimators.size() * g.eps1.size() *
                                                g.eps0.size()));
  Eigen::Index c = 0;
  for (const auto& est : g.estimators) {
    for (double e1 : g.eps1) {
      for (double e0 : g.eps0) {
        const auto spec = SensitivitySpec::constant(e1, e0);
        double v = std::numeric_limits<double>::quiet_NaN();
        try {
          if (g.estimand == "ate") {
            v = ate(method_from_name(est), d, fits, spec);
          } else if (g.estimand == "att") {
            v = att(att_method_from_name(est), d, fits, spec);
          } else {
            const RatioKind kind = ratio_kind_from_name(g.estimand);
            v = ratio_effect(kind, method_from_name(est), d, fits, spec);
          }
        } catch (const std::exception&) {
          // leave NaN; chronic failure surfaces via the per-component counters
        }
        out[c++] = v;
      }
    }
  }
  return out;
}

int run_grid_command(const std::string& command, const CommonOpts& o, const GridSpec& g,
                     GlmFamily outcome_family, std::pair<double, double> trunc) {
  const auto ds = load_data(o, ValidationMode::Binary);
  const auto point_fits = fit_nuisances(ds, GlmFamily::binomial(), outcome_family, trunc);

  auto closure = [&](const Dataset& d) {
    return eval_grid(g, d, fit_nuisances(d, GlmFamily::binomial(), outcome_family, trunc));
  };
  const auto boot = bootstrap_many(closure, ds, boot_config(o));

  std::vector<EstimateRecord> records;
  Eigen::Index c = 0;
  for (const auto& est : g.estimators) {
    for (double e1 : g.eps1) {
      for (double e0 : g.eps0) {
        EstimateRecord r;
        r.estimand = g.estimand;
        r.estimator = est;
        r.eps1_label = g.estimand == "att" ? "na" : numshort(e1);
        r.eps0_label = numshort(e0);
        r.estimate = boot.estimate[c];
        r.se = boot.se[c];
        r.ci_lo = boot.ci_lo[c];
        r.ci_hi = boot.ci_hi[c];
        r.pvalue = boot.pvalue[c];
        records.push_back(r);
        ++c;
      }
    }
  }
  std::vector<std::string> warnings = point_fits.warnings;
  for (const auto& w : ds.warnings) warnings.push_back(w);
  for (const auto& w : boot.warnings) warnings.push_back(w);

  std::vector<std::pair<std::string, std::string>> extra = {
      {"estimators", [&] {
         std::string s;
         for (const auto& e : g.estimators) s += (s.empty() ? "" : ",") + e;
         return s;
       }()},
      {"eps1_list", o.eps1_list},
      {"eps0_list", o.eps0_list},
      {"outcome_family", o.outcome_family},
      {"trunc_pscore", o.trunc},
      {"n_boot", std::to_string(o.n_boot)}};
  emit_records(o, records, warnings, command, extra);
  return 0;
}

// ---- contour ----------------------------------------------------------------

struct ContourOpts {
  std::string input;  // sa-ate results CSV; empty means recompute from --data
  std::string estimator = "dr";
  std::string value = "est";
  int refine = 4;
  std::string levels;  // empty = auto
  bool overlay = false;
};

GridData grid_from_results(const std::string& path, const std::string& estimator,
                           const std::string& value) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open --input file " + path);
  std::string header;
  std::getline(in, header);
  std::map<std::string, int> cols;
  {
    std::stringstream ss(header);
    std::string cell;
    int j = 0;
    while (std::getline(ss, cell, ',')) cols[cell] = j++;
  }
  for (const auto& need : {"estimand", "estimator", "eps1", "eps0", "est", "ci_lo", "ci_hi"})
    if (!cols.count(need)) throw UsageError("--input is not a results CSV (missing " +
                                            std::string(need) + ")");
  const int vcol = value == "est" ? cols["est"] : value == "ci_lb" ? cols["ci_lo"]
                                                                   : cols["ci_hi"];
  std::map<double, std::map<double, double>> table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells[cols["estimator"]] != estimator || cells[cols["estimand"]] != "ate") continue;
    try {
      const double e1 = std::stod(cells[cols["eps1"]]);
      const double e0 = std::stod(cells[cols["eps0"]]);
      table[e1][e0] = std::stod(cells[vcol]);
    } catch (const std::exception&) {
      throw UsageError("non-numeric eps labels in --input; contour needs a constant-eps grid");
    }
  }
  if (table.empty())
    throw UsageError("no rows for estimator '" + estimator + "' in " + path);
  GridData grid;
  for (const auto& [e1, row] : table) grid.eps1.push_back(e1);
  for (const auto& [e0, v] : table.begin()->second) grid.eps0.push_back(e0);
  grid.value.resize(static_cast<Eigen::Index>(grid.eps1.size()),
                    static_cast<Eigen::Index>(grid.eps0.size()));
  Eigen::Index i = 0;
  for (const auto& [e1, row] : table) {
    if (row.size() != grid.eps0.size())
      throw UsageError("incomplete eps grid in --input (row for eps1=" + num17(e1) + ")");
    Eigen::Index j = 0;
    for (const auto& [e0, v] : row) grid.value(i, j++) = v;
    ++i;
  }
  return grid;
}

int run_contour(const CommonOpts& o, const ContourOpts& c,
                std::pair<double, double> trunc) {
  GridData grid;
  std::vector<OverlayPoint> overlay;
  if (!c.input.empty()) {
    grid = grid_from_results(c.input, c.estimator, c.value);
  } else {
    if (o.data.empty()) throw UsageError("contour needs --input or --data");
    const auto ds = load_data(o, ValidationMode::Binary);
    GridSpec g{"ate", {c.estimator}, parse_list(o.eps1_list, "--eps1-list"),
               parse_list(o.eps0_list, "--eps0-list")};
    const auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian(), trunc);
    Eigen::VectorXd values;
    if (c.value == "est") {
      values = eval_grid(g, ds, fits);
    } else {
      const auto boot = bootstrap_many(
          [&](const Dataset& d) {
            return eval_grid(g, d, fit_nuisances(d, GlmFamily::binomial(),
                                                 GlmFamily::gaussian(), trunc));
          },
          ds, boot_config(o));
      values = c.value == "ci_lb" ? boot.ci_lo : boot.ci_hi;
    }
    grid.eps1 = g.eps1;
    grid.eps0 = g.eps0;
    grid.value.resize(static_cast<Eigen::Index>(g.eps1.size()),
                      static_cast<Eigen::Index>(g.eps0.size()));
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < g.eps1.size(); ++i)
      for (std::size_t j = 0; j < g.eps0.size(); ++j)
        grid.value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[k++];
    if (c.overlay) {
      for (int j = 0; j < ds.p(); ++j) {
        const auto rec = calibrate(ds, fits, {j});
        overlay.push_back({rec.eps1.max, rec.eps0.max, ds.covariate_names[j]});
      }
    }
  }
  if (!grid.value.allFinite()) throw UsageError("contour grid contains missing values");

  const auto refined = refine_grid(grid, c.refine);
  std::vector<double> levels;
  if (c.levels.empty()) {
    levels = nice_levels(refined.value.minCoeff(), refined.value.maxCoeff(), 9);
    if (levels.empty()) levels = {refined.value.minCoeff()};
  } else {
    levels = parse_list(c.levels, "--levels");
  }
  const auto lines = extract_contours(refined, levels);
  const std::string svg =
      render_contour_svg(grid, lines, overlay, c.value + " (" + c.estimator + ")");
  {
    std::ofstream f(o.out + ".svg");
    f << svg;
  }
  {
    std::ofstream f(o.out + "_grid.csv");
    write_grid_csv(grid, f);
  }
  write_manifest("contour", o,
                 {{"input", c.input},
                  {"estimator", c.estimator},
                  {"value", c.value},
                  {"refine", std::to_string(c.refine)},
                  {"levels", c.levels.empty() ? "auto" : c.levels}},
                 {o.out + ".svg", o.out + "_grid.csv"});
  return 0;
}

// ---- sa-surv ----------------------------------------------------------------

int run_surv(const CommonOpts& o, const std::string& times_text, double eps1, double eps0,
             const std::string& eps_table_path, std::pair<double, double> trunc) {
  auto ds = load_data(o, ValidationMode::Survival);
  SurvEps eps = SurvEps::constant(eps1, eps0);
  if (!eps_table_path.empty()) {
    std::ifstream in(eps_table_path);
    if (!in) throw UsageError("cannot open --eps-table file " + eps_table_path);
    std::string line;
    std::getline(in, line);  // header t,eps1,eps0
    std::vector<double> t, e1, e0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> row;
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
      if (row.size() != 3) throw UsageError("--eps-table rows must be t,eps1,eps0");
      t.push_back(row[0]);
      e1.push_back(row[1]);
      e0.push_back(row[2]);
    }
    eps = SurvEps::table(t, e1, e0);
  }

  auto fit_escore = [&](const Dataset& d) {
    auto fits = fit_glm(d.x, d.z.cast<double>(), GlmFamily::binomial());
    auto tr = truncate_pscore(predict_mean(fits, d.x), trunc);
    return Eigen::VectorXd(tr.p.cwiseMax(1e-12).cwiseMin(1.0 - 1e-12));
  };
  const Eigen::VectorXd ehat = fit_escore(ds);

  std::vector<std::string> warnings = ds.warnings;
  const auto curve = surv_wkm(ds, ehat, eps);
  for (const auto& w : curve.warnings) warnings.push_back(w);
  {
    std::ofstream f(o.out + "_curve.csv");
    f << "time,s1,s0,tau\n";
    for (std::size_t j = 0; j < curve.times.size(); ++j)
      f << num17(curve.times[j]) << "," << num17(curve.s1[j]) << "," << num17(curve.s0[j])
        << "," << num17(curve.tau[j]) << "\n";
  }

  std::vector<std::string> outputs = {o.out + "_curve.csv"};
  if (!times_text.empty()) {
    const auto times = parse_list(times_text, "--times");
    const std::vector<std::string> methods = {"ht", "reg", "dr"};
    auto closure = [&](const Dataset& d) {
      const Eigen::VectorXd e = fit_escore(d);
      Eigen::VectorXd out(static_cast<Eigen::Index>(3 * times.size()));
      Eigen::Index c = 0;
      for (const auto& m : methods) {
        for (double t : times) {
          double v = std::numeric_limits<double>::quiet_NaN();
          try {
            if (m == "ht") {
              const auto cv = surv_wkm(d, e, eps);
              v = 0.0;
              for (std::size_t j = 0; j < cv.times.size(); ++j)
                if (cv.times[j] <= t) v = cv.tau[j];
            } else if (m == "reg") {
              v = surv_reg(t, d, eps);
            } else {
              v = surv_dr(t, d, e, eps);
            }
          } catch (const std::exception&) {
          }
          out[c++] = v;
        }
      }
      return out;
    };
    const auto boot = bootstrap_many(closure, ds, boot_config(o));
    for (const auto& w : boot.warnings) warnings.push_back(w);
    std::ofstream f(o.out + ".csv");
    f << "estimand,estimator,t,eps1,eps0,est,se,ci_lo,ci_hi,pvalue\n";
    Eigen::Index c = 0;
    for (const auto& m : methods) {
      for (double t : times) {
        f << "surv_diff," << m << "," << numshort(t) << ","
          << (eps_table_path.empty() ? numshort(eps1) : "fn") << ","
          << (eps_table_path.empty() ? numshort(eps0) : "fn") << "," << num17(boot.estimate[c])
          << "," << num17(boot.se[c]) << "," << num17(boot.ci_lo[c]) << ","
          << num17(boot.ci_hi[c]) << "," << num17(boot.pvalue[c]) << "\n";
        ++c;
      }
    }
    outputs.push_back(o.out + ".csv");
  }
  write_manifest("sa-surv", o,
                 {{"eps1", numshort(eps1)},
                  {"eps0", numshort(eps0)},
                  {"eps_table", eps_table_path},
                  {"times", times_text},
                  {"n_boot", std::to_string(o.n_boot)}},
                 outputs);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

// ---- sa-multi ---------------------------------------------------------------

int run_multi(const CommonOpts& o, const std::string& contrast_text,
              const std::vector<std::string>& eps_entries, std::pair<double, double> trunc) {
  const auto ds = load_data(o, ValidationMode::Multi);
  const int kk = ds.n_levels();
  const auto cvec = parse_list(contrast_text, "--contrast");
  if (static_cast<int>(cvec.size()) != kk)
    throw UsageError("--contrast needs K=" + std::to_string(kk) + " coefficients");
  Contrast contrast{Eigen::Map<const Eigen::VectorXd>(cvec.data(),
                                                      static_cast<Eigen::Index>(cvec.size()))};

  EpsMatrix eps(kk);
  for (const auto& entry : eps_entries) {
    const auto v = parse_list(entry, "--eps");
    if (v.size() != 3) throw UsageError("--eps entries are k,l,value");
    const int k = static_cast<int>(v[0]), l = static_cast<int>(v[1]);
    eps.set(k, l, SensitivitySpec::constant(v[2], v[2]));
  }

  const GlmFamily outcome_family = family_from(o.outcome_family);
  const std::vector<MultiMethod> methods = {MultiMethod::Reg, MultiMethod::HT, MultiMethod::DR};
  auto closure = [&](const Dataset& d) {
    const auto gps = fit_multi_nuisances(d, outcome_family, trunc);
    Eigen::VectorXd out(3);
    for (int m = 0; m < 3; ++m) out[m] = multi_contrast(contrast, methods[m], d, gps, eps);
    return out;
  };
  const auto boot = bootstrap_many(closure, ds, boot_config(o));

  std::vector<EstimateRecord> records;
  const std::string label = eps_entries.empty() ? "1" : "matrix";
  for (int m = 0; m < 3; ++m) {
    EstimateRecord r;
    r.estimand = "multi_contrast";
    r.estimator = multi_method_name(methods[m]);
    r.eps1_label = label;
    r.eps0_label = label;
    r.estimate = boot.estimate[m];
    r.se = boot.se[m];
    r.ci_lo = boot.ci_lo[m];
    r.ci_hi = boot.ci_hi[m];
    r.pvalue = boot.pvalue[m];
    records.push_back(r);
  }
  std::vector<std::string> warnings = ds.warnings;
  for (const auto& w : boot.warnings) warnings.push_back(w);
  emit_records(o, records, warnings, "sa-multi",
               {{"contrast", contrast_text}, {"n_boot", std::to_string(o.n_boot)}});
  return 0;
}

// ---- calibrate / bounds / sa-diff -------------------------------------------

int run_calibrate(const CommonOpts& o, const std::string& drop_name,
                  const std::string& drop_set, std::pair<double, double> trunc) {
  const auto ds = load_data(o, ValidationMode::Binary);
  const auto fits = fit_nuisances(ds, GlmFamily::binomial(), family_from(o.outcome_family),
                                  trunc);
  auto index_of = [&](const std::string& name) {
    for (int j = 0; j < ds.p(); ++j)
      if (ds.covariate_names[j] == name) return j;
    throw UsageError("unknown covariate '" + name + "' in --drop");
  };
  std::vector<std::vector<int>> drops;
  if (!drop_set.empty()) {
    std::vector<int> set;
    std::stringstream ss(drop_set);
    std::string cell;
    while (std::getline(ss, cell, ',')) set.push_back(index_of(cell));
    drops.push_back(set);
  } else if (!drop_name.empty()) {
    drops.push_back({index_of(drop_name)});
  } else {
    for (int j = 0; j < ds.p(); ++j) drops.push_back({j});
  }

  std::ofstream f(o.out + ".csv");
  f << "dropped";
  for (const char* z : {"eps1", "eps0"})
    f << "," << z << "_min," << z << "_q05," << z << "_q25," << z << "_q50," << z << "_mean,"
      << z << "_q75," << z << "_q95," << z << "_max," << z << "_excluded";
  f << "\n";
  for (const auto& drop : drops) {
    const auto rec = calibrate(ds, fits, drop);
    f << rec.dropped;
    for (const auto* s : {&rec.eps1, &rec.eps0}) {
      f << "," << num17(s->min) << "," << num17(s->q05) << "," << num17(s->q25) << ","
        << num17(s->q50) << "," << num17(s->mean) << "," << num17(s->q75) << ","
        << num17(s->q95) << "," << num17(s->max) << ","
        << (s == &rec.eps1 ? rec.n_excluded1 : rec.n_excluded0);
    }
    f << "\n";
  }
  write_manifest("calibrate", o, {{"drop", drop_name}, {"drop_set", drop_set}},
                 {o.out + ".csv"});
  return 0;
}

int run_bounds(const CommonOpts& o, const std::string& estimand, const std::string& method,
               const std::string& eps1_range, const std::string& eps0_range,
               std::pair<double, double> trunc) {
  const auto ds = load_data(o, ValidationMode::Binary);
  const auto fits = fit_nuisances(ds, GlmFamily::binomial(), family_from(o.outcome_family),
                                  trunc);
  const auto r0 = parse_pair(eps0_range, "--eps0-range");
  std::vector<std::string> warnings = ds.warnings;
  double lo = 0, hi = 0;
  std::string r1_text = "na";
  if (estimand == "ate") {
    const auto r1 = parse_pair(eps1_range, "--eps1-range");
    r1_text = eps1_range;
    std::tie(lo, hi) = ate_bounds(ds, fits, r1, r0, method_from_name(method), &warnings);
  } else {
    std::tie(lo, hi) = att_bounds(ds, fits, r0, att_method_from_name(method), &warnings);
  }
  std::ofstream f(o.out + ".csv");
  f << "estimand,estimator,eps1_range,eps0_range,bound_lo,bound_hi\n";
  f << estimand << "," << method << "," << r1_text << "," << eps0_range << "," << num17(lo)
    << "," << num17(hi) << "\n";
  write_manifest("bounds", o,
                 {{"estimand", estimand},
                  {"method", method},
                  {"eps1_range", r1_text},
                  {"eps0_range", eps0_range}},
                 {o.out + ".csv"});
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int run_diff(const CommonOpts& o, double delta1, double delta0,
             std::pair<double, double> trunc) {
  const auto ds = load_data(o, ValidationMode::Binary);
  const GlmFamily outcome_family = family_from(o.outcome_family);
  const std::vector<DiffMethod> methods = {DiffMethod::Reg, DiffMethod::HT, DiffMethod::DR};
  const std::vector<std::string> names = {"reg", "ht", "dr"};
  auto closure = [&](const Dataset& d) {
    const auto fits = fit_nuisances(d, GlmFamily::binomial(), outcome_family, trunc);
    Eigen::VectorXd out(3);
    for (int m = 0; m < 3; ++m) out[m] = ate_diff_scale(d, fits, delta1, delta0, methods[m]);
    return out;
  };
  const auto boot = bootstrap_many(closure, ds, boot_config(o));
  std::vector<EstimateRecord> records;
  for (int m = 0; m < 3; ++m) {
    EstimateRecord r;
    r.estimand = "ate_diff";
    r.estimator = names[m];
    r.eps1_label = numshort(delta1);  // the delta pair rides in the eps columns
    r.eps0_label = numshort(delta0);
    r.estimate = boot.estimate[m];
    r.se = boot.se[m];
    r.ci_lo = boot.ci_lo[m];
    r.ci_hi = boot.ci_hi[m];
    r.pvalue = boot.pvalue[m];
    records.push_back(r);
  }
  std::vector<std::string> warnings = ds.warnings;
  for (const auto& w : boot.warnings) warnings.push_back(w);
  emit_records(o, records, warnings, "sa-diff",
               {{"delta1", numshort(delta1)},
                {"delta0", numshort(delta0)},
                {"n_boot", std::to_string(o.n_boot)}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sensitivity analysis for causal effects under unmeasured confounding"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string sim_b_list = "0,0.2,0.3,0.5,1,1.5";
  std::string sim_eps1_list = "1,1.10,1.16,1.28,1.60,1.93";
  int sim_n = 500, sim_n_mc = 200, sim_n_boot = 200;
  bool sim_full = false, sim_log_outcome = false;
  std::string surv_times, surv_eps_table;
  double surv_eps1 = 1.0, surv_eps0 = 1.0;
  std::string multi_contrast_text;
  std::vector<std::string> multi_eps_entries;
  std::string cal_drop, cal_drop_set;
  std::string bounds_estimand = "ate", bounds_method = "dr";
  std::string bounds_eps1_range = "1,1", bounds_eps0_range = "1,1";
  double diff_delta1 = 0.0, diff_delta0 = 0.0;
  ContourOpts copt;

  auto* sa_ate = app.add_subcommand("sa-ate", "average treatment effect over an eps grid");
  add_data_opts(sa_ate, o);
  add_model_opts(sa_ate, o, "gaussian");
  add_inference_opts(sa_ate, o);
  sa_ate->add_option("--eps1-list", o.eps1_list, "comma-separated eps1 values");
  sa_ate->add_option("--eps0-list", o.eps0_list, "comma-separated eps0 values");

  auto* sa_att = app.add_subcommand("sa-att", "effect on the treated over an eps0 grid");
  add_data_opts(sa_att, o);
  add_model_opts(sa_att, o, "gaussian");
  add_inference_opts(sa_att, o);
  sa_att->add_option("--eps0-list", o.eps0_list, "comma-separated eps0 values");

  auto* sa_rr = app.add_subcommand("sa-rr", "causal risk ratio (binary outcome)");
  auto* sa_or = app.add_subcommand("sa-or", "causal odds ratio (binary outcome)");
  bool log_rr = false, log_or = false;
  for (auto* cmd : {sa_rr, sa_or}) {
    add_data_opts(cmd, o);
    add_model_opts(cmd, o, "binomial");
    add_inference_opts(cmd, o);
    cmd->add_option("--eps1-list", o.eps1_list, "comma-separated eps1 values");
    cmd->add_option("--eps0-list", o.eps0_list, "comma-separated eps0 values");
  }
  sa_rr->add_flag("--log", log_rr, "estimate the log risk ratio");
  sa_or->add_flag("--log", log_or, "estimate the log odds ratio");

  auto* sa_surv = app.add_subcommand("sa-surv", "survival-curve contrast S1(t) - S0(t)");
  add_data_opts(sa_surv, o, true);
  add_model_opts(sa_surv, o, "gaussian");
  add_inference_opts(sa_surv, o);
  sa_surv->add_option("--eps1", surv_eps1, "constant eps1");
  sa_surv->add_option("--eps0", surv_eps0, "constant eps0");
  sa_surv->add_option("--eps-table", surv_eps_table, "CSV t,eps1,eps0 step table");
  sa_surv->add_option("--times", surv_times, "times for bootstrap inference");

  auto* sa_multi = app.add_subcommand("sa-multi", "multi-valued treatment contrast");
  add_data_opts(sa_multi, o);
  add_model_opts(sa_multi, o, "gaussian");
  add_inference_opts(sa_multi, o);
  sa_multi->add_option("--contrast", multi_contrast_text, "K coefficients summing to 0")
      ->required();
  sa_multi->add_option("--eps", multi_eps_entries, "sensitivity entry k,l,value (repeatable)");

  auto* calib = app.add_subcommand("calibrate", "leave-one-covariate-out eps benchmarks");
  add_data_opts(calib, o);
  add_model_opts(calib, o, "gaussian");
  calib->add_option("--drop", cal_drop, "single covariate to drop (default: loop over all)");
  calib->add_option("--drop-set", cal_drop_set, "comma-separated covariate set to drop");

  auto* bounds = app.add_subcommand("bounds", "worst-case bounds over eps ranges");
  add_data_opts(bounds, o);
  add_model_opts(bounds, o, "gaussian");
  bounds->add_option("--estimand", bounds_estimand, "ate|att")
      ->check(CLI::IsMember({"ate", "att"}));
  bounds->add_option("--method", bounds_method, "proj|ht|dr (ate) or reg|ht|dr (att)");
  bounds->add_option("--eps1-range", bounds_eps1_range, "lo,hi");
  bounds->add_option("--eps0-range", bounds_eps0_range, "lo,hi");

  auto* sa_diff = app.add_subcommand("sa-diff", "difference-scale sensitivity analysis");
  add_data_opts(sa_diff, o);
  add_model_opts(sa_diff, o, "gaussian");
  add_inference_opts(sa_diff, o);
  sa_diff->add_option("--delta1", diff_delta1, "constant delta1");
  sa_diff->add_option("--delta0", diff_delta0, "constant delta0");

  auto* contour = app.add_subcommand("contour", "contour grid CSV and SVG");
  add_data_opts(contour, o);
  contour->get_option("--data")->required(false);
  contour->get_option("--covariates")->required(false);
  add_inference_opts(contour, o);
  contour->add_option("--input", copt.input, "results CSV from sa-ate");
  contour->add_option("--estimator", copt.estimator, "estimator column to plot");
  contour->add_option("--value", copt.value, "est|ci_lb|ci_ub")
      ->check(CLI::IsMember({"est", "ci_lb", "ci_ub"}));
  contour->add_option("--refine", copt.refine, "bilinear grid refinement factor");
  contour->add_option("--levels", copt.levels, "explicit contour levels");
  contour->add_flag("--overlay-calibration", copt.overlay,
                    "label per-covariate max calibration points (needs --data)");
  contour->add_option("--eps1-list", o.eps1_list, "grid for recompute mode");
  contour->add_option("--eps0-list", o.eps0_list, "grid for recompute mode");
  contour->add_option("--trunc-pscore", o.trunc, "propensity truncation lo,hi");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo coverage study");
  simulate->add_option("--n", sim_n, "sample size per replicate (default 500)");
  simulate->add_option("--b-list", sim_b_list, "confounding strengths");
  simulate->add_option("--eps1-list", sim_eps1_list, "eps1 grid");
  simulate->add_option("--n-mc", sim_n_mc, "Monte Carlo replicates (default 200)");
  simulate->add_option("--n-boot", sim_n_boot, "bootstrap replicates (default 200)");
  simulate->add_flag("--full", sim_full, "paper-scale run (n_mc=500)");
  simulate->add_flag("--log-outcome", sim_log_outcome, "fit outcome models on the log scale");
  simulate->add_option("--seed", o.seed, "RNG seed");
  simulate->add_option("--threads", o.threads, "worker threads");
  simulate->add_option("--out", o.out, "output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto trunc = parse_pair(o.trunc, "--trunc-pscore");
    if (sa_ate->parsed()) {
      GridSpec g{"ate", {"proj", "ht", "hajek", "dr"}, parse_list(o.eps1_list, "--eps1-list"),
                 parse_list(o.eps0_list, "--eps0-list")};
      return run_grid_command("sa-ate", o, g, family_from(o.outcome_family), trunc);
    }
    if (sa_att->parsed()) {
      GridSpec g{"att", {"reg", "ht", "hajek", "dr"}, {1.0},
                 parse_list(o.eps0_list, "--eps0-list")};
      return run_grid_command("sa-att", o, g, family_from(o.outcome_family), trunc);
    }
    if (sa_rr->parsed() || sa_or->parsed()) {
      const bool logscale = sa_rr->parsed() ? log_rr : log_or;
      const std::string kind = sa_rr->parsed() ? (logscale ? "log_rr" : "rr")
                                               : (logscale ? "log_or" : "or");
      GridSpec g{kind, {"pred", "proj", "ht", "hajek", "dr"},
                 parse_list(o.eps1_list, "--eps1-list"), parse_list(o.eps0_list, "--eps0-list")};
      return run_grid_command(sa_rr->parsed() ? "sa-rr" : "sa-or", o, g,
                              family_from(o.outcome_family), trunc);
    }
    if (sa_surv->parsed())
      return run_surv(o, surv_times, surv_eps1, surv_eps0, surv_eps_table, trunc);
    if (sa_multi->parsed()) return run_multi(o, multi_contrast_text, multi_eps_entries, trunc);
    if (calib->parsed()) return run_calibrate(o, cal_drop, cal_drop_set, trunc);
    if (bounds->parsed())
      return run_bounds(o, bounds_estimand, bounds_method, bounds_eps1_range, bounds_eps0_range,
                        trunc);
    if (sa_diff->parsed()) return run_diff(o, diff_delta1, diff_delta0, trunc);
    if (contour->parsed()) return run_contour(o, copt, trunc);
    if (simulate->parsed()) {
      SimConfig cfg;
      cfg.n = sim_n;
      cfg.b_list = parse_list(sim_b_list, "--b-list");
      cfg.eps1_list = parse_list(sim_eps1_list, "--eps1-list");
      cfg.n_mc = sim_full ? 500 : sim_n_mc;
      cfg.n_boot = sim_n_boot;
      cfg.seed = o.seed;
      cfg.log_outcome = sim_log_outcome;
      cfg.threads = o.threads;
      const auto table = run_simulation(cfg);
      {
        std::ofstream f(o.out + ".csv");
        write_sim_csv(table, f);
      }
      CommonOpts so;
      so.out = o.out;
      so.seed = o.seed;
      write_manifest("simulate", so,
                     {{"n", std::to_string(cfg.n)},
                      {"b_list", sim_b_list},
                      {"eps1_list", sim_eps1_list},
                      {"n_mc", std::to_string(cfg.n_mc)},
                      {"n_boot", std::to_string(cfg.n_boot)},
                      {"log_outcome", cfg.log_outcome ? "true" : "false"}},
                     {o.out + ".csv"});
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    // runtime failures that are not input-validation problems
    if (std::string(e.what()).find("validation failed") != std::string::npos ||
        std::string(e.what()).find("missing column") != std::string::npos ||
        std::string(e.what()).find("non-numeric") != std::string::npos ||
        std::string(e.what()).find("cannot open") != std::string::npos) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
