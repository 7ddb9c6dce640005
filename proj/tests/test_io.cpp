#include "doctest.h"

#include <cmath>

#include "json.hpp"

#include "kreinstab/io.hpp"
#include "kreinstab/models.hpp"
#include "kreinstab/nambu.hpp"

using namespace ks;
using nlohmann::json;

TEST_CASE("QBH JSON round trip") {
  BkcParams p;
  p.sites = 3;
  p.t = 1.0;
  p.delta = 0.5;
  p.s = 0.7;
  p.phi = 1.1;
  QbhSpec spec = bkc(p);
  QbhSpec back = qbh_from_json(qbh_to_json(spec));
  CHECK((back.hopping - spec.hopping).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.pairing - spec.pairing).cwiseAbs().maxCoeff() < 1e-15);

  // plain numbers are accepted as real entries
  QbhSpec simple = qbh_from_json(R"({"N": 1, "K": [[2.5]], "Delta": [[0.0]]})");
  CHECK(simple.hopping(0, 0) == Complex(2.5, 0));

  CHECK_THROWS_AS(qbh_from_json(R"({"N": 2, "K": [[0.0]], "Delta": [[0.0]]})"), Error);
  CHECK_THROWS_AS(qbh_from_json("not json"), Error);
  CHECK_THROWS_WITH_AS(qbh_from_json(R"({"K": [[0.0]]})"),
                       doctest::Contains("needs fields"), Error);
}

TEST_CASE("BBT JSON round trip preserves the solve") {
  BkcParams p;
  p.sites = 6;
  p.t = 1.0;
  p.delta = 0.5;
  p.s = 0.4;
  p.phi = 2.0;
  BbtSpec spec = bkc_bbt(p);
  BbtSpec back = bbt_from_json(bbt_to_json(spec));
  CHECK((back.dense() - spec.dense()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(back.range == spec.range);
  CHECK(back.corners.size() == spec.corners.size());
}

TEST_CASE("model_from_json dispatches both schema variants") {
  QbhSpec named = model_from_json(
      R"({"model": "single_mode", "params": {"alpha": 0.5, "beta": 1.5}})");
  CHECK(named.hopping(0, 0) == Complex(2.0, 0));
  QbhSpec raw = model_from_json(R"({"N": 1, "K": [[1.0]], "Delta": [[0.0]]})");
  CHECK(raw.modes() == 1);
}

TEST_CASE("tolerance overrides parse field by field") {
  Tolerances tol = tolerances_from_json(R"({"realness": 1e-6, "cluster": 1e-5})");
  CHECK(tol.realness == 1e-6);
  CHECK(tol.cluster == 1e-5);
  CHECK(tol.rank == Tolerances{}.rank);  // untouched fields keep defaults
}

TEST_CASE("run_command: spectrum and artifacts") {
  CommandResult result = run_command(
      R"({"command": "spectrum", "model": "bkc",
          "params": {"N": 4, "t": 1.0, "Delta": 0.5, "s": 1.0}})");
  REQUIRE(result.status == CommandStatus::ok);
  REQUIRE(result.artifacts.size() == 1);
  CHECK(result.artifacts[0].name == "spectrum.csv");
  // header plus 8 rows
  int lines = 0;
  for (char c : result.artifacts[0].content) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 9);
  json summary = json::parse(result.summary_json);
  CHECK(summary["max_im_omega"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("run_command: kpr contour through a path") {
  json config;
  config["command"] = "kpr";
  config["model"] = "single_mode";
  config["params"] = json::object();
  json path = json::array();
  for (int k = 0; k < 11; ++k) {
    double alpha = 0.2 + 0.08 * k;
    path.push_back({{"alpha", alpha}, {"beta", 1.0}});
  }
  config["path"] = path;
  CommandResult result = run_command(config.dump());
  REQUIRE(result.status == CommandStatus::ok);
  REQUIRE(result.artifacts.size() == 1);
  CHECK(result.artifacts[0].name == "kpr_contour.csv");
  CHECK(result.artifacts[0].content.rfind("sigma,value\n", 0) == 0);
}

TEST_CASE("run_command: flow, gbt and evolve complete") {
  {
    json config;
    config["command"] = "flow";
    config["model"] = "bkc";
    config["params"] = {{"N", 5}, {"t", 1.0}, {"Delta", 0.25}, {"phi", 0.0}};
    json path = json::array();
    for (int k = 0; k < 8; ++k) path.push_back({{"s", 0.1 * k / 7.0}});
    config["path"] = path;
    CommandResult result = run_command(config.dump());
    REQUIRE(result.status == CommandStatus::ok);
    CHECK(result.artifacts[0].name == "flow.csv");
  }
  {
    CommandResult result = run_command(
        R"({"command": "gbt", "model": "bkc",
            "params": {"N": 5, "t": 1.0, "Delta": 0.5, "s": 0.5, "phi": 0.9},
            "grid_re": 61, "grid_im": 21})");
    REQUIRE(result.status == CommandStatus::ok);
    json summary = json::parse(result.summary_json);
    CHECK(summary["match"] == true);
  }
  {
    CommandResult result = run_command(
        R"({"command": "evolve", "model": "single_mode",
            "params": {"alpha": 1.0, "beta": -1.0},
            "times": [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]})");
    REQUIRE(result.status == CommandStatus::ok);
    json summary = json::parse(result.summary_json);
    CHECK(summary["growth"] == "exponential");
  }
}

TEST_CASE("run_command: statuses for bad configs") {
  CHECK(run_command("{").status == CommandStatus::usage_error);
  CHECK(run_command(R"({"command": "spectrum"})").status == CommandStatus::usage_error);
  CHECK(run_command(R"({"command": "spectrum", "model": "bkc", "params": {"N": 3}})").status ==
        CommandStatus::usage_error);
  // constraint violation in a raw spec document
  CommandResult bad = run_command(
      R"({"command": "spectrum",
          "spec": {"N": 2,
                   "K": [[0.0, {"re": 0.0, "im": 1.0}], [{"re": 0.0, "im": 1.0}, 0.0]],
                   "Delta": [[0.0, 0.0], [0.0, 0.0]]}})");
  CHECK(bad.status == CommandStatus::usage_error);
  json summary = json::parse(bad.summary_json);
  CHECK(summary.contains("error"));
}

TEST_CASE("oracle check: the full suite passes") {
  OracleCheckResult result = oracle_check("all");
  for (const auto& f : result.failures) {
    CAPTURE(f);
    CHECK(false);
  }
  CHECK(result.failed == 0);
  CHECK(result.passed > 80);
}
