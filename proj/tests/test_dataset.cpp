#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "epsens/dataset.hpp"
#include "reference/classical.hpp"

using namespace epsens;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("four-row csv round trip") {
  const auto path = temp_path("epsens_basic.csv");
  write_file(path, "z,y,x1\n1,2.5,0.1\n0,1.5,-0.3\n1,3.5,0.2\n0,0.5,0.0\n");
  ColumnSpec spec{"z", "y", {"x1"}, "", ValidationMode::Binary};
  const auto ds = load_csv(path, spec);
  CHECK(ds.n() == 4);
  CHECK(ds.p() == 1);
  CHECK(ds.z[0] == 1);
  CHECK(ds.y[3] == 0.5);
  CHECK(ds.x(1, 0) == -0.3);
}

TEST_CASE("binary spec rejects treatment value 2") {
  const auto path = temp_path("epsens_nonbinary.csv");
  write_file(path, "z,y,x1\n1,2.5,0.1\n2,1.5,-0.3\n0,3.5,0.2\n0,1.0,0.1\n");
  ColumnSpec spec{"z", "y", {"x1"}, "", ValidationMode::Binary};
  CHECK_THROWS_WITH_AS(load_csv(path, spec), doctest::Contains("treatment not binary"),
                       std::runtime_error);
}

TEST_CASE("missing column named in error") {
  const auto path = temp_path("epsens_missingcol.csv");
  write_file(path, "z,y\n1,2.5\n0,1.5\n");
  ColumnSpec spec{"z", "y", {"x1"}, "", ValidationMode::Binary};
  CHECK_THROWS_WITH_AS(load_csv(path, spec), doctest::Contains("x1"), std::runtime_error);
}

TEST_CASE("non-numeric cell reports row and column") {
  const auto path = temp_path("epsens_badcell.csv");
  write_file(path, "z,y,x1\n1,2.5,0.1\n0,abc,-0.3\n");
  ColumnSpec spec{"z", "y", {"x1"}, "", ValidationMode::Binary};
  try {
    load_csv(path, spec);
    FAIL("expected parse error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("'y'") != std::string::npos);
  }
}

TEST_CASE("constant covariate is flagged but allowed") {
  const auto path = temp_path("epsens_constcol.csv");
  write_file(path, "z,y,x1,x2\n1,2.5,1,0.1\n0,1.5,1,-0.3\n1,3.5,1,0.2\n0,0.5,1,0.0\n");
  ColumnSpec spec{"z", "y", {"x1", "x2"}, "", ValidationMode::Binary};
  const auto ds = load_csv(path, spec);
  REQUIRE(ds.warnings.size() == 1);
  CHECK(ds.warnings[0].find("x1") != std::string::npos);
}

TEST_CASE("validate reports all violations, not just the first") {
  Dataset ds;
  ds.x = Eigen::MatrixXd::Zero(3, 1);
  ds.z = Eigen::VectorXi::Ones(3);  // control arm empty
  ds.y.resize(3);
  ds.y << 1.0, std::nan(""), 2.0;  // non-finite outcome
  const auto v = validate(ds, ValidationMode::Binary);
  bool empty_arm = false, nonfinite = false;
  for (const auto& msg : v) {
    if (msg.find("control arm empty") != std::string::npos) empty_arm = true;
    if (msg.find("non-finite outcome at row 2") != std::string::npos) nonfinite = true;
  }
  CHECK(empty_arm);
  CHECK(nonfinite);
}

TEST_CASE("survival data requires the event indicator") {
  std::mt19937_64 rng(1);
  auto ds = oracle::make_random_binary(20, 2, rng);
  const auto v = validate(ds, ValidationMode::Survival);
  bool found = false;
  for (const auto& msg : v)
    if (msg.find("event indicator required") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("write then load is the identity") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    auto ds = oracle::make_random_binary(30, 3, rng);
    ds.covariate_names = {"a", "b", "c"};
    if (rep % 2 == 0) {  // exercise the survival path too
      ds.delta.resize(ds.n());
      ds.y = ds.y.cwiseAbs();
      for (Eigen::Index i = 0; i < ds.n(); ++i) ds.delta[i] = i % 3 == 0 ? 0 : 1;
      ds.event_name = "event";
    }
    const auto path = temp_path("epsens_roundtrip.csv");
    write_csv(ds, path);
    ColumnSpec spec{ds.treatment_name, ds.outcome_name, ds.covariate_names, ds.event_name,
                    ds.has_event() ? ValidationMode::Survival : ValidationMode::Binary};
    const auto back = load_csv(path, spec);
    REQUIRE(back.n() == ds.n());
    CHECK((back.x - ds.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.y - ds.y).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.z - ds.z).cwiseAbs().maxCoeff() == 0);
    if (ds.has_event()) CHECK((back.delta - ds.delta).cwiseAbs().maxCoeff() == 0);
  }
}

TEST_CASE("multi mode checks level coverage") {
  Dataset ds;
  ds.x = Eigen::MatrixXd::Random(6, 1);
  ds.z.resize(6);
  ds.z << 1, 1, 2, 2, 3, 1;  // level 3 appears once
  ds.y = Eigen::VectorXd::Random(6);
  const auto v = validate(ds, ValidationMode::Multi);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("level 3") != std::string::npos);
}

}  // TEST_SUITE
