#include "kreinstab/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "kreinstab/dynamics.hpp"
#include "kreinstab/models.hpp"

namespace ks {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

Complex complex_from_json(const json& j) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_object() && j.contains("re") && j.contains("im")) {
    return Complex(j.at("re").get<double>(), j.at("im").get<double>());
  }
  throw Error(ErrorCode::invalid_argument,
              "complex entries must be numbers or {\"re\":..,\"im\":..} objects");
}

json complex_to_json(Complex c) { return json{{"re", c.real()}, {"im", c.imag()}}; }

Matrix matrix_from_json(const json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw Error(ErrorCode::invalid_argument, "matrix must be a row-major array of rows");
  }
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j.at(static_cast<size_t>(r));
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw Error(ErrorCode::invalid_argument, "matrix row has the wrong length");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = complex_from_json(row.at(static_cast<size_t>(c)));
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::invalid_argument, "malformed JSON");
  }
  return j;
}

}  // namespace

QbhSpec qbh_from_json(const std::string& text) {
  json j = parse(text);
  if (!j.contains("N") || !j.contains("K") || !j.contains("Delta")) {
    throw Error(ErrorCode::invalid_argument,
                "QBH spec needs fields N, K, Delta: {\"N\": int, \"K\": [[{\"re\":..,"
                "\"im\":..},..]], \"Delta\": [[..]]}");
  }
  int n = j.at("N").get<int>();
  if (n < 1) {
    throw Error(ErrorCode::invalid_argument, "N must be positive");
  }
  QbhSpec spec;
  spec.hopping = matrix_from_json(j.at("K"), n, n);
  spec.pairing = matrix_from_json(j.at("Delta"), n, n);
  return spec;
}

std::string qbh_to_json(const QbhSpec& spec) {
  json j;
  j["N"] = spec.modes();
  j["K"] = matrix_to_json(spec.hopping);
  j["Delta"] = matrix_to_json(spec.pairing);
  return j.dump();
}

BbtSpec bbt_from_json(const std::string& text) {
  json j = parse(text);
  if (!j.contains("N") || !j.contains("R") || !j.contains("g")) {
    throw Error(ErrorCode::invalid_argument,
                "BBT spec needs fields N, R, g: {\"N\":.., \"R\":.., \"g\": {\"-1\": "
                "[[..]], \"0\": .., \"1\": ..}, \"V\": [{\"row_site\":.., \"col_site\":..,"
                " \"block\": [[..]]}]}");
  }
  BbtSpec spec;
  spec.sites = j.at("N").get<int>();
  spec.range = j.at("R").get<int>();
  if (spec.range < 1) {
    throw Error(ErrorCode::invalid_argument, "R must be positive");
  }
  spec.bulk.assign(static_cast<size_t>(2 * spec.range + 1), Matrix2::Zero());
  for (int r = -spec.range; r <= spec.range; ++r) {
    std::string key = std::to_string(r);
    if (j.at("g").contains(key)) {
      spec.bulk_block(r) = matrix_from_json(j.at("g").at(key), 2, 2);
    }
  }
  if (j.contains("V")) {
    for (const auto& corner : j.at("V")) {
      BbtSpec::Corner c;
      c.row_site = corner.at("row_site").get<int>();
      c.col_site = corner.at("col_site").get<int>();
      c.block = matrix_from_json(corner.at("block"), 2, 2);
      spec.corners.push_back(c);
    }
  }
  spec.validate();
  return spec;
}

std::string bbt_to_json(const BbtSpec& spec) {
  json j;
  j["N"] = spec.sites;
  j["R"] = spec.range;
  json blocks;
  for (int r = -spec.range; r <= spec.range; ++r) {
    blocks[std::to_string(r)] = matrix_to_json(spec.bulk_block(r));
  }
  j["g"] = blocks;
  json corners = json::array();
  for (const auto& c : spec.corners) {
    corners.push_back(
        json{{"row_site", c.row_site}, {"col_site", c.col_site}, {"block", matrix_to_json(c.block)}});
  }
  j["V"] = corners;
  return j.dump();
}

QbhSpec model_from_json(const std::string& text) {
  json j = parse(text);
  if (j.contains("model")) {
    std::map<std::string, double> params;
    if (j.contains("params")) {
      for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
        params[it.key()] = it.value().get<double>();
      }
    }
    return make_model(j.at("model").get<std::string>(), params);
  }
  return qbh_from_json(text);
}

Tolerances tolerances_from_json(const std::string& text) {
  json j = parse(text);
  Tolerances tol;
  auto get = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  get("validation", tol.validation);
  get("realness", tol.realness);
  get("cluster", tol.cluster);
  get("rank", tol.rank);
  get("rank_gap_floor", tol.rank_gap_floor);
  get("signature_null", tol.signature_null);
  get("chain", tol.chain);
  get("residual", tol.residual);
  get("boundary", tol.boundary);
  get("continuity_floor", tol.continuity_floor);
  return tol;
}

std::string spectrum_csv(const SpectrumReport& rep) {
  std::ostringstream out;
  out << "eigen_index,re_omega,im_omega,is_real,quartet_id,algebraic_mult,geometric_mult\n";
  for (int i = 0; i < rep.size(); ++i) {
    out << i << ',' << format_double(rep.eigenvalues(i).real()) << ','
        << format_double(rep.eigenvalues(i).imag()) << ',' << (rep.realness[i] ? 1 : 0) << ','
        << rep.quartet[i] << ',' << rep.algebraic_mult[i] << ',' << rep.geometric_mult[i]
        << '\n';
  }
  return out.str();
}

std::string krein_csv(const KreinReport& krein) {
  std::ostringstream out;
  out << "eigen_index,re_omega,im_omega,signature,definiteness,collision_flag,kpr\n";
  for (int i = 0; i < krein.eigenvalues.size(); ++i) {
    const char* def = krein.definiteness[static_cast<size_t>(i)] == Definiteness::positive
                          ? "positive"
                          : (krein.definiteness[static_cast<size_t>(i)] == Definiteness::negative
                                 ? "negative"
                                 : "indefinite");
    out << i << ',' << format_double(krein.eigenvalues(i).real()) << ','
        << format_double(krein.eigenvalues(i).imag()) << ','
        << krein.signature[static_cast<size_t>(i)] << ',' << def << ','
        << (krein.collision[static_cast<size_t>(i)] ? 1 : 0) << ','
        << format_double(krein.kpr_values[static_cast<size_t>(i)]) << '\n';
  }
  return out.str();
}

std::string scan_csv(const ScanGrid& grid) {
  std::ostringstream out;
  out << "i1,i2," << grid.axis1.name << ',' << grid.axis2.name
      << ",stable,max_im_omega,min_mod_omega,boundary";
  if (grid.has_kpr) out << ",kpr,min_overlap";
  out << '\n';
  for (const auto& rec : grid.records) {
    out << rec.i1 << ',' << rec.i2 << ',' << format_double(rec.v1) << ','
        << format_double(rec.v2) << ',' << rec.stable << ',' << format_double(rec.max_imag)
        << ',' << format_double(rec.min_modulus) << ',' << (rec.boundary ? 1 : 0);
    if (grid.has_kpr) {
      out << ',' << format_double(rec.kpr) << ',' << format_double(rec.min_overlap);
    }
    out << '\n';
  }
  return out.str();
}

std::string flow_csv(const FlowTrace& trace) {
  std::ostringstream out;
  out << "step,sigma,eigen_index,re_omega,im_omega,signature,min_overlap\n";
  for (size_t s = 0; s < trace.steps.size(); ++s) {
    const FlowStep& step = trace.steps[s];
    for (int i = 0; i < step.eigenvalues.size(); ++i) {
      out << s << ',' << format_double(step.sigma) << ',' << i << ','
          << format_double(step.eigenvalues(i).real()) << ','
          << format_double(step.eigenvalues(i).imag()) << ','
          << step.signatures[static_cast<size_t>(i)] << ',' << format_double(step.min_overlap)
          << '\n';
    }
  }
  return out.str();
}

std::string contour_csv(const ContourTrace& trace) {
  std::ostringstream out;
  out << "sigma,value\n";
  for (size_t i = 0; i < trace.sigma.size(); ++i) {
    out << format_double(trace.sigma[i]) << ',' << format_double(trace.value[i]) << '\n';
  }
  return out.str();
}

namespace {

std::map<std::string, double> params_from(const json& config) {
  std::map<std::string, double> params;
  if (config.contains("params")) {
    for (auto it = config.at("params").begin(); it != config.at("params").end(); ++it) {
      params[it.key()] = it.value().get<double>();
    }
  }
  return params;
}

Matrix config_matrix(const json& config, double validation_tol) {
  if (config.contains("model")) {
    return build_effective_sph(make_model(config.at("model").get<std::string>(),
                                          params_from(config)),
                               validation_tol);
  }
  if (config.contains("spec")) {
    return build_effective_sph(qbh_from_json(config.at("spec").dump()), validation_tol);
  }
  throw Error(ErrorCode::invalid_argument,
              "config needs either \"model\"+\"params\" or a raw \"spec\" QBH document");
}

Axis axis_from(const json& j) {
  Axis axis;
  axis.name = j.at("name").get<std::string>();
  axis.min = j.at("min").get<double>();
  axis.max = j.at("max").get<double>();
  axis.step = j.at("step").get<double>();
  return axis;
}

ParamPath path_from(const json& config) {
  if (!config.contains("path") || !config.at("path").is_array() || config.at("path").empty()) {
    throw Error(ErrorCode::invalid_argument,
                "command needs \"path\": [{param: value, ..}, ..] sample points");
  }
  std::vector<std::map<std::string, double>> points;
  for (const auto& pt : config.at("path")) {
    std::map<std::string, double> overrides;
    for (auto it = pt.begin(); it != pt.end(); ++it) {
      overrides[it.key()] = it.value().get<double>();
    }
    points.push_back(std::move(overrides));
  }
  return [points](double sigma) {
    size_t idx = static_cast<size_t>(std::lround(sigma * double(points.size() - 1)));
    return points[std::min(idx, points.size() - 1)];
  };
}

CommandResult command_spectrum(const json& config, const Tolerances& tol) {
  CommandResult out;
  Matrix g = config_matrix(config, tol.validation);
  SpectrumReport rep = eigendecompose(g, tol);
  out.artifacts.push_back({"spectrum.csv", spectrum_csv(rep)});
  json summary;
  summary["command"] = "spectrum";
  summary["dimension"] = rep.size();
  summary["clusters"] = rep.cluster_count();
  double max_im = 0;
  for (int i = 0; i < rep.size(); ++i) {
    max_im = std::max(max_im, std::abs(rep.eigenvalues(i).imag()));
  }
  summary["max_im_omega"] = max_im;
  out.summary_json = summary.dump();
  return out;
}

CommandResult command_classify(const json& config, const Tolerances& tol) {
  CommandResult out;
  Matrix g = config_matrix(config, tol.validation);
  SpectrumReport rep = eigendecompose(g, tol);
  KreinReport krein = analyze_krein(g, rep, tol);
  out.artifacts.push_back({"krein.csv", krein_csv(krein)});
  json summary;
  summary["command"] = "classify";
  summary["dynamically_stable"] = krein.dynamically_stable;
  summary["stability_indeterminate"] = krein.stability_indeterminate;
  summary["max_im_omega"] = krein.max_imag;
  summary["collisions"] = krein.collided_eigenvalues.size();
  summary["defective"] = krein.defective_eigenvalues.size();
  // sufficient condition only; a false value decides nothing
  summary["thermodynamically_stable_sufficient"] = krein.thermodynamically_stable_sufficient;
  json kj;
  kj["eigenvalues"] = json::array();
  for (int i = 0; i < krein.eigenvalues.size(); ++i) {
    json row;
    row["re"] = krein.eigenvalues(i).real();
    row["im"] = krein.eigenvalues(i).imag();
    row["signature"] = krein.signature[static_cast<size_t>(i)];
    row["definiteness"] = krein.definiteness[static_cast<size_t>(i)] == Definiteness::positive
                              ? "positive"
                              : (krein.definiteness[static_cast<size_t>(i)] ==
                                         Definiteness::negative
                                     ? "negative"
                                     : "indefinite");
    row["collision"] = static_cast<bool>(krein.collision[static_cast<size_t>(i)]);
    double r = krein.kpr_values[static_cast<size_t>(i)];
    if (std::isfinite(r)) row["kpr"] = r;
    if (krein.kpr_contour_dependent[static_cast<size_t>(i)]) row["kpr_contour_dependent"] = true;
    kj["eigenvalues"].push_back(row);
  }
  out.artifacts.push_back({"krein.json", kj.dump()});
  out.summary_json = summary.dump();
  if (krein.stability_indeterminate) out.status = CommandStatus::indeterminate;
  return out;
}

CommandResult command_kpr(const json& config, const Tolerances& tol) {
  CommandResult out;
  json summary;
  summary["command"] = "kpr";
  if (config.contains("path")) {
    std::string model = config.at("model").get<std::string>();
    int steps = static_cast<int>(config.at("path").size());
    ContourTrace trace = contour_eval(model, params_from(config), path_from(config),
                                      ContourQuantity::kpr, steps, tol);
    out.artifacts.push_back({"kpr_contour.csv", contour_csv(trace)});
    summary["steps"] = steps;
    summary["diagnostics"] = trace.diagnostics;
  } else {
    Matrix g = config_matrix(config, tol.validation);
    SpectrumReport rep = eigendecompose(g, tol);
    std::ostringstream csv;
    csv << "eigen_index,re_omega,im_omega,kpr\n";
    int computed = 0;
    for (int i = 0; i < rep.size(); ++i) {
      double r = std::numeric_limits<double>::quiet_NaN();
      try {
        r = kpr(g, rep.eigenvalues(i), rep.right_vectors.col(i), tol);
        ++computed;
      } catch (const Error&) {
      }
      csv << i << ',' << format_double(rep.eigenvalues(i).real()) << ','
          << format_double(rep.eigenvalues(i).imag()) << ',' << format_double(r) << '\n';
    }
    out.artifacts.push_back({"kpr.csv", csv.str()});
    summary["computed"] = computed;
  }
  out.summary_json = summary.dump();
  return out;
}

CommandResult command_scan(const json& config, const Tolerances& tol) {
  CommandResult out;
  if (!config.contains("model") || !config.contains("grid")) {
    throw Error(ErrorCode::invalid_argument, "scan needs \"model\", \"params\" and \"grid\"");
  }
  Axis axis1 = axis_from(config.at("grid").at("axis1"));
  Axis axis2 = axis_from(config.at("grid").at("axis2"));
  std::string model = config.at("model").get<std::string>();
  bool want_kpr = config.value("kpr", false);
  ScanGrid grid = want_kpr
                      ? kpr_scan(model, params_from(config), axis1, axis2,
                                 config.value("seed_index", -1), tol)
                      : stability_scan(model, params_from(config), axis1, axis2, tol);
  out.artifacts.push_back({"scan.csv", scan_csv(grid)});
  json summary;
  summary["command"] = "scan";
  summary["points"] = grid.records.size();
  int stable = 0, boundary = 0, indeterminate = 0;
  for (const auto& rec : grid.records) {
    if (rec.stable == 1) ++stable;
    if (rec.stable == -1) ++indeterminate;
    if (rec.boundary) ++boundary;
  }
  summary["stable_points"] = stable;
  summary["boundary_points"] = boundary;
  summary["indeterminate_points"] = indeterminate;
  summary["diagnostics"] = grid.diagnostics;
  out.summary_json = summary.dump();
  if (indeterminate > 0) out.status = CommandStatus::indeterminate;
  return out;
}

CommandResult command_flow(const json& config, const Tolerances& tol) {
  CommandResult out;
  if (!config.contains("model")) {
    throw Error(ErrorCode::invalid_argument, "flow needs \"model\" and \"path\"");
  }
  int steps = static_cast<int>(config.at("path").size());
  FlowTrace trace = spectral_flow(config.at("model").get<std::string>(), params_from(config),
                                  path_from(config), steps, tol);
  out.artifacts.push_back({"flow.csv", flow_csv(trace)});
  json summary;
  summary["command"] = "flow";
  summary["steps"] = trace.steps.size();
  summary["events"] = trace.events;
  out.summary_json = summary.dump();
  return out;
}

CommandResult command_gbt(const json& config, const Tolerances& tol) {
  CommandResult out;
  BbtSpec spec;
  if (config.contains("bbt")) {
    spec = bbt_from_json(config.at("bbt").dump());
  } else if (config.contains("model") && config.at("model").get<std::string>() == "bkc") {
    auto params = params_from(config);
    BkcParams p;
    p.sites = static_cast<int>(params.at("N"));
    p.t = params.at("t");
    p.delta = params.at("Delta");
    p.s = params.count("s") ? params.at("s") : 0.0;
    p.phi = params.count("phi") ? params.at("phi") : 0.0;
    spec = bkc_bbt(p);
  } else {
    throw Error(ErrorCode::invalid_argument,
                "gbt needs a \"bbt\" spec document or the bkc model");
  }
  Matrix dense = spec.dense();
  SpectrumReport rep = eigendecompose(dense, tol);
  double re_max = 0, im_max = 0;
  for (int i = 0; i < rep.size(); ++i) {
    re_max = std::max(re_max, std::abs(rep.eigenvalues(i).real()));
    im_max = std::max(im_max, std::abs(rep.eigenvalues(i).imag()));
  }
  SearchDomain domain;
  domain.use_grid = true;
  domain.re_min = -re_max - 0.2;
  domain.re_max = re_max + 0.2;
  domain.im_min = -im_max - 0.2;
  domain.im_max = im_max + 0.2;
  domain.re_points = config.value("grid_re", 61);
  domain.im_points = im_max > tol.realness ? config.value("grid_im", 31) : 5;
  EigenSearchResult result = eigen_search(spec, domain, tol);

  std::ostringstream csv;
  csv << "re_omega,im_omega,multiplicity,dense_residual\n";
  for (const auto& pair : result.pairs) {
    double worst = 0;
    for (const auto& v : pair.vectors) {
      worst = std::max(worst, (spec.apply(v) - pair.omega * v).norm());
    }
    csv << format_double(pair.omega.real()) << ',' << format_double(pair.omega.imag()) << ','
        << pair.vectors.size() << ',' << format_double(worst) << '\n';
  }
  out.artifacts.push_back({"gbt.csv", csv.str()});

  // dense cross-check: every dense eigenvalue must be matched with multiplicity
  std::vector<Complex> want(rep.eigenvalues.data(), rep.eigenvalues.data() + rep.size());
  std::vector<Complex> got;
  for (const auto& pair : result.pairs) {
    for (size_t k = 0; k < pair.vectors.size(); ++k) got.push_back(pair.omega);
  }
  std::vector<std::string> mismatches = result.diagnostics;
  for (Complex w : want) {
    double best = 1e300;
    size_t best_idx = got.size();
    for (size_t i = 0; i < got.size(); ++i) {
      if (std::abs(got[i] - w) < best) {
        best = std::abs(got[i] - w);
        best_idx = i;
      }
    }
    if (best_idx == got.size() || best > 1e-7 * std::max(1.0, matrix_scale(dense))) {
      std::ostringstream miss;
      miss << "dense eigenvalue (" << w.real() << ", " << w.imag() << ") unmatched";
      mismatches.push_back(miss.str());
    } else {
      got.erase(got.begin() + static_cast<long>(best_idx));
    }
  }
  json summary;
  summary["command"] = "gbt";
  summary["found_multiplicity"] = result.total_multiplicity();
  summary["dense_dimension"] = rep.size();
  summary["diagnostics"] = mismatches;
  summary["match"] = mismatches.empty() && result.total_multiplicity() == rep.size();
  out.summary_json = summary.dump();
  if (!summary["match"].get<bool>()) out.status = CommandStatus::hard_failure;
  return out;
}

CommandResult command_evolve(const json& config, const Tolerances& tol) {
  CommandResult out;
  json summary;
  summary["command"] = "evolve";
  std::vector<double> times;
  for (const auto& t : config.at("times")) times.push_back(t.get<double>());
  if (config.value("quadrature", false)) {
    QbhSpec spec = config.contains("model")
                       ? make_model(config.at("model").get<std::string>(), params_from(config))
                       : qbh_from_json(config.at("spec").dump());
    const int n = spec.modes();
    RealVector x0 = RealVector::Zero(n), p0 = RealVector::Zero(n);
    if (config.contains("x0")) {
      for (int j = 0; j < n; ++j) x0(j) = config.at("x0").at(static_cast<size_t>(j)).get<double>();
    }
    if (config.contains("p0")) {
      for (int j = 0; j < n; ++j) p0(j) = config.at("p0").at(static_cast<size_t>(j)).get<double>();
    }
    QuadratureTrajectory traj = phase_transport_sim(spec, x0, p0, times);
    std::ostringstream csv;
    csv << "time,site,x_amplitude,p_amplitude\n";
    for (size_t ti = 0; ti < times.size(); ++ti) {
      for (int j = 0; j < n; ++j) {
        csv << format_double(times[ti]) << ',' << (j + 1) << ','
            << format_double(traj.x(j, static_cast<Eigen::Index>(ti))) << ','
            << format_double(traj.p(j, static_cast<Eigen::Index>(ti))) << '\n';
      }
    }
    out.artifacts.push_back({"trajectory.csv", csv.str()});
    summary["coupled"] = traj.coupled;
    summary["chirality_x"] = traj.chirality_x;
    summary["chirality_p"] = traj.chirality_p;
  } else {
    Matrix g = config_matrix(config, tol.validation);
    Vector v0(g.rows());
    if (config.contains("initial")) {
      for (int i = 0; i < g.rows(); ++i) {
        v0(i) = complex_from_json(config.at("initial").at(static_cast<size_t>(i)));
      }
    } else {
      v0.setOnes();
      v0.normalize();
    }
    ModeTrajectory traj = evolve_mode(g, v0, times, tol);
    std::ostringstream csv;
    csv << "time,component_index,re,im\n";
    for (size_t ti = 0; ti < times.size(); ++ti) {
      for (int i = 0; i < g.rows(); ++i) {
        csv << format_double(times[ti]) << ',' << i << ','
            << format_double(traj.states[ti](i).real()) << ','
            << format_double(traj.states[ti](i).imag()) << '\n';
      }
    }
    out.artifacts.push_back({"trajectory.csv", csv.str()});
    summary["growth"] = traj.growth == GrowthClass::bounded
                            ? "bounded"
                            : (traj.growth == GrowthClass::polynomial ? "polynomial"
                                                                      : "exponential");
    summary["fitted_rate"] = traj.fitted_rate;
  }
  out.summary_json = summary.dump();
  return out;
}

}  // namespace

OracleCheckResult oracle_check(const std::string& suite) {
  OracleCheckResult result;
  const bool full = suite == "all";
  Tolerances tol;

  auto record = [&](bool ok, const std::string& what) {
    if (ok) {
      ++result.passed;
    } else {
      ++result.failed;
      result.failures.push_back(what);
    }
  };
  auto multiset_match = [](std::vector<Complex> got, std::vector<Complex> want, double eps) {
    if (got.size() != want.size()) return false;
    for (const auto& w : want) {
      double best = 1e300;
      size_t best_idx = 0;
      for (size_t i = 0; i < got.size(); ++i) {
        if (std::abs(got[i] - w) < best) {
          best = std::abs(got[i] - w);
          best_idx = i;
        }
      }
      if (best >= eps) return false;
      got.erase(got.begin() + static_cast<long>(best_idx));
    }
    return true;
  };
  auto dense_spectrum = [&](const Matrix& g) {
    SpectrumReport rep = eigendecompose(g, tol);
    return std::vector<Complex>(rep.eigenvalues.data(), rep.eigenvalues.data() + rep.size());
  };

  std::vector<int> sizes = full ? std::vector<int>{3, 4, 5, 6, 7, 8, 9, 10, 11, 12}
                                : std::vector<int>{3, 5, 6};
  std::vector<double> deltas = full ? std::vector<double>{0.25, 0.5, 0.75}
                                    : std::vector<double>{0.5};

  for (int n : sizes) {
    for (double delta : deltas) {
      BkcParams p;
      p.sites = n;
      p.t = 1.0;
      p.delta = delta;
      {
        auto oracle = bkc_open_oracle(n, 1.0, delta);
        bool ok = multiset_match(dense_spectrum(build_effective_sph(bkc(p))), oracle.spectrum,
                                 1e-8);
        record(ok, "open spectrum N=" + std::to_string(n) + " Delta=" + std::to_string(delta));
      }
      {
        p.s = 1.0;
        p.phi = 1.5707963267948966;
        auto oracle = bkc_twisted_pi2_oracle(n, 1.0, delta);
        bool ok = multiset_match(dense_spectrum(build_effective_sph(bkc(p))), oracle.spectrum,
                                 1e-8);
        record(ok, "twisted spectrum N=" + std::to_string(n));
      }
      {
        p.phi = 0.0;
        bool ok = multiset_match(dense_spectrum(build_effective_sph(bkc(p))),
                                 bkc_periodic_oracle(n, 1.0, delta, false), 1e-8);
        record(ok, "periodic spectrum N=" + std::to_string(n));
      }
    }
  }

  // t = Delta twisted circle + KPR closed form
  for (int n : {3, 5}) {
    for (double phi : {0.8, 2.0}) {
      BkcParams p;
      p.sites = n;
      p.t = 1.0;
      p.delta = 1.0;
      p.s = 1.0;
      p.phi = phi;
      auto oracle = bkc_tdelta_twisted_oracle(n, 1.0, phi);
      Matrix g = build_effective_sph(bkc(p));
      record(multiset_match(dense_spectrum(g), oracle.spectrum, 1e-8),
             "t=Delta twisted spectrum N=" + std::to_string(n));
      SpectrumReport rep = eigendecompose(g, tol);
      bool kpr_ok = true;
      for (int i = 0; i < rep.size(); ++i) {
        double r = kpr(g, rep.eigenvalues(i), rep.right_vectors.col(i), tol);
        if (std::abs(r - oracle.kpr) > 1e-8) kpr_ok = false;
      }
      record(kpr_ok, "t=Delta twisted KPR N=" + std::to_string(n));
    }
  }

  // single-mode KPR closed form off the axes
  {
    bool ok = true;
    for (double alpha : {0.3, 1.0, 2.0}) {
      for (double beta : {0.5, 1.5, -0.8}) {
        Matrix g = build_effective_sph(single_mode(alpha, beta));
        SpectrumReport rep = eigendecompose(g, tol);
        double expect = single_mode_oracle(alpha, beta).kpr;
        for (int i = 0; i < rep.size(); ++i) {
          double r = kpr(g, rep.eigenvalues(i), rep.right_vectors.col(i), tol);
          if (std::abs(r - expect) > 1e-10) ok = false;
        }
      }
    }
    record(ok, "single-mode KPR closed form");
  }

  // mu extension split
  for (int n : full ? std::vector<int>{3, 6, 10} : std::vector<int>{3}) {
    for (double mu : {0.05, 0.1, 0.5}) {
      auto oracle = bkc_mu_oracle(n, 1.0, 0.5, mu);
      bool ok = multiset_match(dense_spectrum(build_effective_sph(bkc_mu(n, 1.0, 0.5, mu))),
                               oracle.spectrum, 1e-8);
      record(ok, "mu split N=" + std::to_string(n) + " mu=" + std::to_string(mu));
    }
  }

  // phase-boundary zero modes
  for (int n : full ? std::vector<int>{5, 6, 9, 10} : std::vector<int>{5, 6}) {
    auto boundary = bkc_phase_boundary_oracle(n, 1.0, 0.25);
    double phi_b = boundary.phi_minus(0.7);
    BkcParams p;
    p.sites = n;
    p.t = 1.0;
    p.delta = 0.25;
    p.s = 0.7;
    p.phi = phi_b;
    auto spectrum = dense_spectrum(build_effective_sph(bkc(p)));
    double min_mod = 1e300;
    for (auto w : spectrum) min_mod = std::min(min_mod, std::abs(w));
    record(min_mod < 1e-8, "boundary-curve zero mode N=" + std::to_string(n));
  }

  // cavity QED frequency formula
  {
    bool ok = true;
    for (double wc : {0.7, 1.0, 1.9}) {
      for (double chi : {0.1, 0.6}) {
        auto oracle = cavity_qed_oracle(wc, 1.0, chi);
        if (!multiset_match(dense_spectrum(build_effective_sph(cavity_qed(wc, 1.0, chi))),
                            oracle.spectrum, 1e-8)) {
          ok = false;
        }
      }
    }
    record(ok, "cavity QED frequencies");
  }

  return result;
}

CommandResult run_command(const std::string& config_json) {
  CommandResult out;
  try {
    json config = parse(config_json);
    if (!config.contains("command")) {
      throw Error(ErrorCode::invalid_argument,
                  "config needs \"command\": spectrum | classify | kpr | scan | flow | gbt | "
                  "evolve | oracle-check");
    }
    Tolerances tol;
    if (config.contains("tolerances")) {
      tol = tolerances_from_json(config.at("tolerances").dump());
    }
    std::string command = config.at("command").get<std::string>();
    if (command == "spectrum") return command_spectrum(config, tol);
    if (command == "classify") return command_classify(config, tol);
    if (command == "kpr") return command_kpr(config, tol);
    if (command == "scan") return command_scan(config, tol);
    if (command == "flow") return command_flow(config, tol);
    if (command == "gbt") return command_gbt(config, tol);
    if (command == "evolve") return command_evolve(config, tol);
    if (command == "oracle-check") {
      OracleCheckResult check = oracle_check(config.value("suite", "fast"));
      json summary;
      summary["command"] = "oracle-check";
      summary["passed"] = check.passed;
      summary["failed"] = check.failed;
      summary["failures"] = check.failures;
      out.summary_json = summary.dump();
      out.status = check.failed == 0 ? CommandStatus::ok : CommandStatus::hard_failure;
      return out;
    }
    throw Error(ErrorCode::invalid_argument, "unknown command '" + command + "'");
  } catch (const Error& e) {
    json summary;
    summary["error"] = e.what();
    out.summary_json = summary.dump();
    switch (e.code()) {
      case ErrorCode::invalid_argument:
      case ErrorCode::constraint_violation:
        out.status = CommandStatus::usage_error;
        break;
      case ErrorCode::indeterminate:
        out.status = CommandStatus::indeterminate;
        break;
      default:
        out.status = CommandStatus::hard_failure;
    }
  } catch (const std::exception& e) {
    json summary;
    summary["error"] = e.what();
    out.summary_json = summary.dump();
    out.status = CommandStatus::hard_failure;
  }
  return out;
}

}  // namespace ks
