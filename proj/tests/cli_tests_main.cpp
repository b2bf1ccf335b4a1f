// End-to-end checks of the command-line tool: classical reductions of the
// emitted estimates, byte-identical reruns across seeds and thread counts,
// exit codes, and output-file shapes.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "epsens/ate.hpp"
#include "epsens/nuisance.hpp"
#include "reference/classical.hpp"

namespace fs = std::filesystem;
using namespace epsens;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::printf("ok   %s\n", what.c_str());
  } else {
    std::printf("FAIL %s\n", what.c_str());
    ++g_failures;
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& args) {
  const std::string cmd = std::string(EPSENS_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// parse one results CSV into (estimator, eps1, eps0) -> est
struct Row {
  std::string estimator, eps1, eps0;
  double est;
};
std::vector<Row> read_results(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 9) continue;
    rows.push_back({cells[1], cells[2], cells[3], std::stod(cells[4])});
  }
  return rows;
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "epsens_cli_tests";
  fs::create_directories(dir);
  const fs::path data = dir / "obs.csv";

  std::mt19937_64 rng(2718);
  const auto ds = oracle::make_random_binary(250, 2, rng);
  {
    Dataset named = ds;
    named.covariate_names = {"age", "bmi"};
    named.treatment_name = "smoke";
    named.outcome_name = "homo";
    write_csv(named, data.string());
  }

  const std::string common = "--data " + data.string() +
                             " --treatment smoke --outcome homo --covariates age,bmi";

  // classical reduction of the emitted point estimates at eps = 1
  {
    const auto out = (dir / "ate").string();
    const int code = run("sa-ate " + common +
                         " --eps1-list 1 --eps0-list 1 --n-boot 20 --seed 1 --out " + out);
    check(code == 0, "sa-ate exits 0");
    const auto rows = read_results(out + ".csv");
    check(rows.size() == 4, "sa-ate emits one row per estimator");
    const auto fits = fit_nuisances(ds, GlmFamily::binomial(), GlmFamily::gaussian());
    for (const auto& r : rows) {
      double expected = 0.0;
      if (r.estimator == "proj") expected = oracle::reg_ate(fits.mu1hat, fits.mu0hat);
      if (r.estimator == "ht") expected = oracle::ht_ate(ds, fits.ehat);
      if (r.estimator == "hajek") expected = oracle::hajek_ate(ds, fits.ehat);
      if (r.estimator == "dr") expected = oracle::aipw_ate(ds, fits.ehat, fits.mu1hat, fits.mu0hat);
      check(oracle::rel_close(r.est, expected, 1e-10),
            "sa-ate " + r.estimator + " matches the classical estimate");
    }
  }

  // determinism: same command, different thread counts, byte-identical outputs
  {
    const auto a = (dir / "det").string();
    const std::string flags =
        " --eps1-list 0.9,1,1.1 --eps0-list 1,1.1 --n-boot 60 --seed 42 --out " + a;
    run("sa-ate " + common + flags + " --threads 1");
    const std::string csv1 = slurp(a + ".csv"), json1 = slurp(a + ".json"),
                      man1 = slurp(a + "_manifest.json");
    run("sa-ate " + common + flags + " --threads 4");
    check(slurp(a + ".csv") == csv1, "results CSV identical across thread counts");
    check(slurp(a + ".json") == json1, "results JSON identical across thread counts");
    check(slurp(a + "_manifest.json") == man1, "manifest identical across thread counts");
    run("sa-ate " + common + flags + " --threads 2");
    check(slurp(a + ".csv") == csv1, "rerun is byte-identical");
  }

  // contour from the results file
  {
    const auto grid_out = (dir / "grid").string();
    run("sa-ate " + common +
        " --eps1-list 0.8,1,1.2,1.4 --eps0-list 0.8,1,1.2 --n-boot 20 --seed 7 --out " +
        grid_out);
    const auto cont = (dir / "cont").string();
    const int code =
        run("contour --input " + grid_out + ".csv --estimator dr --value est --out " + cont);
    check(code == 0, "contour exits 0");
    const std::string svg = slurp(cont + ".svg");
    check(svg.rfind("<svg", 0) == 0 && svg.find("</svg>") != std::string::npos,
          "svg is well-formed enough");
    std::ifstream gc(cont + "_grid.csv");
    int lines = 0;
    std::string l;
    while (std::getline(gc, l)) ++lines;
    check(lines == 1 + 4 * 3, "grid csv has one row per cell");
    const int code2 =
        run("contour --input " + grid_out + ".csv --estimator dr --value ci_lb --out " + cont +
            "lb");
    check(code2 == 0, "contour on ci_lb exits 0");
  }

  // simulate determinism
  {
    const auto a = (dir / "sim_a").string(), b = (dir / "sim_b").string();
    run("simulate --n 150 --b-list 0 --eps1-list 1,1.1 --n-mc 6 --n-boot 20 --seed 3 "
        "--threads 2 --out " + a);
    run("simulate --n 150 --b-list 0 --eps1-list 1,1.1 --n-mc 6 --n-boot 20 --seed 3 "
        "--threads 1 --out " + b);
    check(slurp(a + ".csv") == slurp(b + ".csv"), "simulate output identical across threads");
  }

  // exit code 2 on malformed inputs
  {
    check(run("sa-ate " + common + " --eps1-list '1;2' --out " + (dir / "x").string()) == 2,
          "malformed eps list exits 2");
    const fs::path bad = dir / "bad.csv";
    std::ofstream f(bad);
    f << "smoke,homo,age,bmi\n2,1.0,0.1,0.2\n0,2.0,0.3,0.1\n1,1.5,0.2,0.2\n0,1,0.1,0.3\n";
    f.close();
    check(run("sa-ate --data " + bad.string() +
              " --treatment smoke --outcome homo --covariates age,bmi --out " +
              (dir / "y").string()) == 2,
          "non-binary treatment exits 2");
    check(run("sa-ate --data " + data.string() +
              " --treatment smoke --outcome homo --covariates nosuch --out " +
              (dir / "z").string()) == 2,
          "missing covariate exits 2");
  }

  std::printf(g_failures == 0 ? "all cli checks passed\n" : "%d cli checks FAILED\n",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
