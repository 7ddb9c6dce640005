// Command-line front end for the kreinstab shared library. Flag parsing and
// file output live here; every computation goes through the C API.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kreinstab.h"

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

struct CommonOpts {
  std::string model;
  std::map<std::string, double> params;
  std::string spec_file;    // raw QBH JSON document
  std::string config_file;  // full config JSON replacing flags
  std::string out_dir = ".";
  std::string tolerances;   // JSON overrides
};

void add_model_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--model", opts.model, "model name: single_mode, cavity_qed, bkc, bkc_mu");
  cmd->add_option("--spec", opts.spec_file, "path to a raw QBH JSON document");
  cmd->add_option("--config", opts.config_file, "full JSON config replacing all flags");
  cmd->add_option("--out", opts.out_dir, "output directory for artifacts");
  cmd->add_option("--tolerances", opts.tolerances, "tolerance overrides as JSON");
  // model parameters arrive as repeated --param name=value plus shorthands
  cmd->add_option_function<std::vector<std::string>>(
      "--param",
      [&opts](const std::vector<std::string>& kvs) {
        for (const auto& kv : kvs) {
          auto pos = kv.find('=');
          if (pos == std::string::npos) {
            throw CLI::ValidationError("--param expects name=value");
          }
          opts.params[kv.substr(0, pos)] = std::stod(kv.substr(pos + 1));
        }
      },
      "model parameter as name=value (repeatable)");
  for (const char* name : {"N", "t", "Delta", "s", "phi", "alpha", "beta", "omega_c",
                           "omega_s", "chi", "mu"}) {
    std::string flag = std::string("--") + name;
    cmd->add_option_function<double>(
        flag, [&opts, name](double v) { opts.params[name] = v; },
        std::string("model parameter ") + name);
  }
}

json base_config(const CommonOpts& opts) {
  json config;
  if (!opts.config_file.empty()) {
    std::ifstream in(opts.config_file);
    if (!in) throw std::runtime_error("cannot open config file " + opts.config_file);
    in >> config;
    return config;
  }
  if (!opts.spec_file.empty()) {
    std::ifstream in(opts.spec_file);
    if (!in) throw std::runtime_error("cannot open spec file " + opts.spec_file);
    json spec;
    in >> spec;
    config["spec"] = spec;
  }
  if (!opts.model.empty()) {
    config["model"] = opts.model;
    json params;
    for (const auto& [k, v] : opts.params) params[k] = v;
    config["params"] = params;
  }
  if (!opts.tolerances.empty()) {
    config["tolerances"] = json::parse(opts.tolerances);
  }
  return config;
}

int run_and_write(const json& config, const std::string& out_dir) {
  ks_report* report = nullptr;
  ks_status status = ks_run(config.dump().c_str(), &report);
  if (report) {
    char* summary = nullptr;
    if (ks_report_summary(report, &summary) == KS_OK && summary) {
      std::cout << summary << "\n";
      ks_string_free(summary);
    }
    int count = ks_report_artifact_count(report);
    for (int i = 0; i < count; ++i) {
      char* name = nullptr;
      char* content = nullptr;
      if (ks_report_artifact_name(report, i, &name) == KS_OK &&
          ks_report_artifact_content(report, i, &content) == KS_OK) {
        std::string path = out_dir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) {
          std::cerr << "cannot write " << path << "\n";
          ks_string_free(name);
          ks_string_free(content);
          ks_report_free(report);
          return 1;
        }
        out << content;
        std::cerr << "wrote " << path << "\n";
      }
      ks_string_free(name);
      ks_string_free(content);
    }
    ks_report_free(report);
  }
  switch (status) {
    case KS_OK:
      return 0;
    case KS_ERR_INVALID_ARGUMENT:
    case KS_ERR_PARSE:
    case KS_ERR_CONSTRAINT:
      std::cerr << "usage error: " << ks_last_error() << "\n";
      return 2;
    case KS_ERR_INDETERMINATE:
      std::cerr << "indeterminate: " << ks_last_error() << "\n";
      return 3;
    default:
      std::cerr << "failure: " << ks_last_error() << "\n";
      return 1;
  }
}

json linspace_path(const std::string& name, double from, double to, int steps,
                   const json& extra) {
  json path = json::array();
  for (int k = 0; k < steps; ++k) {
    json point = extra;
    point[name] = from + (to - from) * double(k) / double(steps - 1);
    path.push_back(point);
  }
  return path;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kreinstab: dynamical stability of quadratic bosonic Hamiltonians"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and quartet structure");
  add_model_flags(spectrum, opts);

  auto* classify = app.add_subcommand("classify", "stability verdict and Krein report");
  add_model_flags(classify, opts);

  auto* kpr_cmd = app.add_subcommand("kpr", "Krein phase rigidity per eigenvector or contour");
  add_model_flags(kpr_cmd, opts);
  std::string contour_param;
  double contour_from = 0, contour_to = 1;
  int contour_steps = 0;
  kpr_cmd->add_option("--sweep", contour_param, "parameter to sweep for a 1-D contour");
  kpr_cmd->add_option("--from", contour_from, "sweep start");
  kpr_cmd->add_option("--to", contour_to, "sweep end");
  kpr_cmd->add_option("--steps", contour_steps, "sweep sample count");

  auto* scan = app.add_subcommand("scan", "stability or KPR grid over two parameters");
  add_model_flags(scan, opts);
  std::string axis1 = "s", axis2 = "phi";
  double a1_min = 0, a1_max = 1, a2_min = 0, a2_max = kPi;
  double grid_step = 0.002;
  bool scan_kpr = false;
  scan->add_option("--axis1", axis1, "first axis parameter name");
  scan->add_option("--axis1-min", a1_min, "");
  scan->add_option("--axis1-max", a1_max, "");
  scan->add_option("--axis2", axis2, "second axis parameter name");
  scan->add_option("--axis2-min", a2_min, "");
  scan->add_option("--axis2-max", a2_max, "");
  scan->add_option("--grid", grid_step, "grid spacing for both axes (default 0.002)");
  scan->add_flag("--kpr", scan_kpr, "track a representative eigenvector and record its KPR");

  auto* flow = app.add_subcommand("flow", "spectral flow with Krein signatures along a path");
  add_model_flags(flow, opts);
  std::string flow_param;
  double flow_from = 0, flow_to = 1;
  int flow_steps = 50;
  flow->add_option("--sweep", flow_param, "parameter to sweep")->required();
  flow->add_option("--from", flow_from, "")->required();
  flow->add_option("--to", flow_to, "")->required();
  flow->add_option("--steps", flow_steps, "");

  auto* gbt = app.add_subcommand("gbt", "generalized Bloch solve with dense cross-check");
  add_model_flags(gbt, opts);
  std::string bbt_file;
  gbt->add_option("--bbt", bbt_file, "path to a BBT spec JSON document");

  auto* evolve = app.add_subcommand("evolve", "time evolution of modes or quadratures");
  add_model_flags(evolve, opts);
  double t_max = 5.0;
  int t_steps = 50;
  bool quadrature = false;
  int pulse_site = 0;
  evolve->add_option("--t-max", t_max, "final time");
  evolve->add_option("--t-steps", t_steps, "number of samples");
  evolve->add_flag("--quadrature", quadrature, "simulate x/p quadrature profiles");
  evolve->add_option("--pulse-site", pulse_site, "1-based site for an initial x pulse");

  auto* oracle = app.add_subcommand("oracle-check", "analytic-vs-numeric comparison suite");
  add_model_flags(oracle, opts);
  std::string suite = "fast";
  oracle->add_option("--suite", suite, "fast or all");

  CLI11_PARSE(app, argc, argv);

  try {
    json config = base_config(opts);
    if (spectrum->parsed()) {
      config["command"] = "spectrum";
    } else if (classify->parsed()) {
      config["command"] = "classify";
    } else if (kpr_cmd->parsed()) {
      config["command"] = "kpr";
      if (!contour_param.empty()) {
        if (contour_steps < 2) {
          std::cerr << "usage error: --sweep needs --steps >= 2\n";
          return 2;
        }
        json extra;
        config["path"] = linspace_path(contour_param, contour_from, contour_to, contour_steps,
                                       extra);
      }
    } else if (scan->parsed()) {
      config["command"] = "scan";
      config["grid"] = {
          {"axis1", {{"name", axis1}, {"min", a1_min}, {"max", a1_max}, {"step", grid_step}}},
          {"axis2", {{"name", axis2}, {"min", a2_min}, {"max", a2_max}, {"step", grid_step}}}};
      config["kpr"] = scan_kpr;
    } else if (flow->parsed()) {
      config["command"] = "flow";
      config["path"] = linspace_path(flow_param, flow_from, flow_to, flow_steps, json::object());
    } else if (gbt->parsed()) {
      config["command"] = "gbt";
      if (!bbt_file.empty()) {
        std::ifstream in(bbt_file);
        if (!in) {
          std::cerr << "cannot open " << bbt_file << "\n";
          return 2;
        }
        json bbt;
        in >> bbt;
        config["bbt"] = bbt;
      }
    } else if (evolve->parsed()) {
      config["command"] = "evolve";
      json times = json::array();
      for (int k = 0; k <= t_steps; ++k) times.push_back(t_max * double(k) / double(t_steps));
      config["times"] = times;
      config["quadrature"] = quadrature;
      if (quadrature && pulse_site > 0 && config.contains("params") &&
          config["params"].contains("N")) {
        int n = config["params"]["N"].get<int>();
        json x0 = json::array();
        for (int j = 1; j <= n; ++j) x0.push_back(j == pulse_site ? 1.0 : 0.0);
        config["x0"] = x0;
      }
    } else if (oracle->parsed()) {
      config["command"] = "oracle-check";
      config["suite"] = suite;
    }
    return run_and_write(config, opts.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
}
