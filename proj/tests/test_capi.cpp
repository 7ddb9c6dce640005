#include "doctest.h"

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "json.hpp"

#include "kreinstab.h"

namespace {

using nlohmann::json;

std::string take_string(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  ks_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("model lifecycle and matrix export") {
  ks_model* model = nullptr;
  std::string config = R"({"model": "single_mode", "params": {"alpha": 1.0, "beta": 2.0}})";
  REQUIRE(ks_model_from_json(config.c_str(), &model) == KS_OK);
  REQUIRE(model != nullptr);
  CHECK(ks_model_modes(model) == 1);

  // G = [[b+a, b-a], [a-b, -a-b]] at (1, 2)
  double reim[8];
  REQUIRE(ks_model_matrix(model, reim) == KS_OK);
  CHECK(reim[0] == doctest::Approx(3.0));
  CHECK(reim[2] == doctest::Approx(1.0));
  CHECK(reim[4] == doctest::Approx(-1.0));
  CHECK(reim[6] == doctest::Approx(-3.0));

  char* json_out = nullptr;
  REQUIRE(ks_model_to_json(model, &json_out) == KS_OK);
  json j = json::parse(take_string(json_out));
  CHECK(j["N"] == 1);
  CHECK(j["K"][0][0]["re"] == doctest::Approx(3.0));
  ks_model_free(model);
}

TEST_CASE("raw QBH documents are accepted") {
  ks_model* model = nullptr;
  std::string doc = R"({"N": 1, "K": [[{"re": 1.0, "im": 0.0}]], "Delta": [[0.0]]})";
  REQUIRE(ks_model_from_json(doc.c_str(), &model) == KS_OK);
  CHECK(ks_model_modes(model) == 1);
  ks_model_free(model);
}

TEST_CASE("error paths set statuses and messages") {
  ks_model* model = nullptr;
  CHECK(ks_model_from_json("{not json", &model) == KS_ERR_PARSE);
  CHECK(model == nullptr);
  CHECK(std::string(ks_last_error()).size() > 0);

  // non-Hermitian K
  std::string bad = R"({"N": 2,
    "K": [[0.0, {"re": 0.0, "im": 1.0}], [{"re": 0.0, "im": 1.0}, 0.0]],
    "Delta": [[0.0, 0.0], [0.0, 0.0]]})";
  CHECK(ks_model_from_json(bad.c_str(), &model) == KS_ERR_CONSTRAINT);

  std::string unknown = R"({"model": "nonesuch", "params": {}})";
  CHECK(ks_model_from_json(unknown.c_str(), &model) == KS_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ks_last_error()).find("unknown model") != std::string::npos);

  CHECK(ks_model_from_json(nullptr, &model) == KS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("spectrum handle: eigenvalues, realness, KPR") {
  ks_model* model = nullptr;
  std::string config = R"({"model": "bkc", "params": {"N": 3, "t": 1.0, "Delta": 0.5}})";
  REQUIRE(ks_model_from_json(config.c_str(), &model) == KS_OK);
  ks_spectrum* spectrum = nullptr;
  REQUIRE(ks_spectrum_compute(model, nullptr, &spectrum) == KS_OK);
  REQUIRE(ks_spectrum_size(spectrum) == 6);

  // closed form: sqrt(3)/2 cos(m pi / 4), doubly degenerate
  double band = std::sqrt(0.75);
  std::vector<double> expect = {-band * std::cos(M_PI / 4), -band * std::cos(M_PI / 4),
                                0.0, 0.0,
                                band * std::cos(M_PI / 4), band * std::cos(M_PI / 4)};
  for (int i = 0; i < 6; ++i) {
    double re = 0, im = 0;
    REQUIRE(ks_spectrum_eigenvalue(spectrum, i, &re, &im) == KS_OK);
    CHECK(re == doctest::Approx(expect[static_cast<size_t>(i)]).epsilon(1e-9));
    CHECK(std::abs(im) < 1e-10);
    CHECK(ks_spectrum_is_real(spectrum, i) == 1);
  }
  CHECK(ks_spectrum_eigenvalue(spectrum, 17, nullptr, nullptr) == KS_ERR_INVALID_ARGUMENT);

  double r = 0;
  REQUIRE(ks_spectrum_kpr(spectrum, 0, &r) == KS_OK);
  CHECK(r > 0);
  CHECK(r <= 1.0);

  char* csv = nullptr;
  REQUIRE(ks_spectrum_csv(spectrum, &csv) == KS_OK);
  std::string text = take_string(csv);
  CHECK(text.rfind("eigen_index,re_omega,im_omega,is_real,quartet_id", 0) == 0);

  ks_spectrum_free(spectrum);
  ks_model_free(model);
}

TEST_CASE("stability verdict through the C API") {
  ks_model* model = nullptr;
  std::string open_chain = R"({"model": "bkc", "params": {"N": 4, "t": 1.0, "Delta": 0.5}})";
  REQUIRE(ks_model_from_json(open_chain.c_str(), &model) == KS_OK);
  int verdict = -7;
  double max_imag = -1;
  REQUIRE(ks_dynamical_stability(model, nullptr, &verdict, &max_imag) == KS_OK);
  CHECK(verdict == 1);
  CHECK(max_imag < 1e-10);
  ks_model_free(model);

  std::string periodic =
      R"({"model": "bkc", "params": {"N": 4, "t": 1.0, "Delta": 0.5, "s": 1.0}})";
  REQUIRE(ks_model_from_json(periodic.c_str(), &model) == KS_OK);
  REQUIRE(ks_dynamical_stability(model, nullptr, &verdict, &max_imag) == KS_OK);
  CHECK(verdict == 0);
  CHECK(max_imag == doctest::Approx(0.5).epsilon(1e-8));
  ks_model_free(model);
}

TEST_CASE("command driver round trip: classify") {
  std::string config = R"({
    "command": "classify",
    "model": "bkc",
    "params": {"N": 5, "t": 1.0, "Delta": 0.25}
  })";
  ks_report* report = nullptr;
  REQUIRE(ks_run(config.c_str(), &report) == KS_OK);
  char* summary = nullptr;
  REQUIRE(ks_report_summary(report, &summary) == KS_OK);
  json j = json::parse(take_string(summary));
  CHECK(j["dynamically_stable"] == true);
  CHECK(j["collisions"] == 5);  // the open chain collides at every level
  CHECK(j["thermodynamically_stable_sufficient"] == false);

  int count = ks_report_artifact_count(report);
  REQUIRE(count == 2);
  char* name = nullptr;
  REQUIRE(ks_report_artifact_name(report, 0, &name) == KS_OK);
  CHECK(take_string(name) == "krein.csv");
  char* content = nullptr;
  REQUIRE(ks_report_artifact_content(report, 0, &content) == KS_OK);
  std::string csv = take_string(content);
  CHECK(csv.find("collision_flag") != std::string::npos);
  ks_report_free(report);
}

TEST_CASE("command driver: usage errors carry their status") {
  ks_report* report = nullptr;
  CHECK(ks_run(R"({"command": "nonesuch"})", &report) == KS_ERR_INVALID_ARGUMENT);
  ks_report_free(report);
  report = nullptr;
  CHECK(ks_run(R"({"no_command": 1})", &report) == KS_ERR_INVALID_ARGUMENT);
  ks_report_free(report);
}

TEST_CASE("command driver: scan determinism through the API") {
  std::string config = R"({
    "command": "scan",
    "model": "bkc",
    "params": {"N": 3, "t": 1.0, "Delta": 0.5},
    "grid": {"axis1": {"name": "s", "min": 0.0, "max": 1.0, "step": 0.25},
             "axis2": {"name": "phi", "min": 0.0, "max": 3.0, "step": 0.5}}
  })";
  auto run_once = [&]() {
    ks_report* report = nullptr;
    REQUIRE(ks_run(config.c_str(), &report) == KS_OK);
    char* content = nullptr;
    REQUIRE(ks_report_artifact_content(report, 0, &content) == KS_OK);
    std::string csv = take_string(content);
    ks_report_free(report);
    return csv;
  };
  std::string first = run_once();
  CHECK(first == run_once());
  CHECK(first.rfind("i1,i2,s,phi,", 0) == 0);
}

TEST_CASE("command driver: fast oracle suite passes") {
  ks_report* report = nullptr;
  REQUIRE(ks_run(R"({"command": "oracle-check", "suite": "fast"})", &report) == KS_OK);
  char* summary = nullptr;
  REQUIRE(ks_report_summary(report, &summary) == KS_OK);
  json j = json::parse(take_string(summary));
  CHECK(j["failed"] == 0);
  CHECK(j["passed"].get<int>() > 10);
  ks_report_free(report);
}
