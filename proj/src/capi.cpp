#include "kreinstab.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "kreinstab/io.hpp"
#include "kreinstab/krein.hpp"
#include "kreinstab/nambu.hpp"
#include "kreinstab/spectral.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ks_status status_of(const ks::Error& e) {
  switch (e.code()) {
    case ks::ErrorCode::invalid_argument:
      return KS_ERR_INVALID_ARGUMENT;
    case ks::ErrorCode::constraint_violation:
      return KS_ERR_CONSTRAINT;
    case ks::ErrorCode::indeterminate:
      return KS_ERR_INDETERMINATE;
    case ks::ErrorCode::numeric_failure:
      return KS_ERR_NUMERIC;
    case ks::ErrorCode::unsupported:
      return KS_ERR_UNSUPPORTED;
  }
  return KS_ERR_NUMERIC;
}

template <typename Fn>
ks_status guarded(Fn&& fn) {
  try {
    fn();
    return KS_OK;
  } catch (const ks::Error& e) {
    g_last_error = e.what();
    // malformed JSON surfaces as invalid_argument internally; keep the
    // dedicated parse status for API users
    if (g_last_error.find("JSON") != std::string::npos ||
        g_last_error.find("json") != std::string::npos) {
      return KS_ERR_PARSE;
    }
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return KS_ERR_NUMERIC;
  }
}

ks::Tolerances tolerances_or_default(const char* json) {
  if (!json) return ks::Tolerances{};
  return ks::tolerances_from_json(json);
}

}  // namespace

struct ks_model {
  ks::QbhSpec spec;
  ks::Matrix g;
};

struct ks_spectrum {
  ks::Matrix g;
  ks::SpectrumReport report;
  ks::Tolerances tol;
};

struct ks_report {
  ks::CommandResult result;
};

extern "C" {

const char* ks_version(void) { return "1.0.0"; }

const char* ks_status_name(ks_status status) {
  switch (status) {
    case KS_OK:
      return "ok";
    case KS_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case KS_ERR_PARSE:
      return "parse error";
    case KS_ERR_CONSTRAINT:
      return "constraint violation";
    case KS_ERR_INDETERMINATE:
      return "indeterminate";
    case KS_ERR_NUMERIC:
      return "numeric failure";
    case KS_ERR_UNSUPPORTED:
      return "unsupported";
  }
  return "unknown";
}

const char* ks_last_error(void) { return g_last_error.c_str(); }

void ks_string_free(char* s) { std::free(s); }

ks_status ks_model_from_json(const char* json, ks_model** out) {
  if (!json || !out) {
    g_last_error = "null argument";
    return KS_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&]() {
    auto model = std::make_unique<ks_model>();
    model->spec = ks::model_from_json(json);
    model->g = ks::build_effective_sph(model->spec);
    *out = model.release();
  });
}

void ks_model_free(ks_model* model) { delete model; }

int ks_model_modes(const ks_model* model) { return model ? model->spec.modes() : 0; }

ks_status ks_model_matrix(const ks_model* model, double* reim) {
  if (!model || !reim) {
    g_last_error = "null argument";
    return KS_ERR_INVALID_ARGUMENT;
  }
  const ks::Matrix& g = model->g;
  size_t k = 0;
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      reim[k++] = g(r, c).real();
      reim[k++] = g(r, c).imag();
    }
  }
  return KS_OK;
}

ks_status ks_model_to_json(const ks_model* model, char** json_out) {
  if (!model || !json_out) {
    g_last_error = "null argument";
    return KS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() { *json_out = dup_string(ks::qbh_to_json(model->spec)); });
}

ks_status ks_spectrum_compute(const ks_model* model, const char* tolerances_json,
                              ks_spectrum** out) {
  if (!model || !out) {
    g_last_error = "null argument";
    return KS_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&]() {
    auto spectrum = std::make_unique<ks_spectrum>();
    spectrum->tol = tolerances_or_default(tolerances_json);
    spectrum->g = model->g;
    spectrum->report = ks::eigendecompose(model->g, spectrum->tol);
    *out = spectrum.release();
  });
}

void ks_spectrum_free(ks_spectrum* spectrum) { delete spectrum; }

int ks_spectrum_size(const ks_spectrum* spectrum) {
  return spectrum ? spectrum->report.size() : 0;
}

ks_status ks_spectrum_eigenvalue(const ks_spectrum* spectrum, int index, double* re,
                                 double* im) {
  if (!spectrum || index < 0 || index >= spectrum->report.size()) {
    g_last_error = "index out of range";
    return KS_ERR_INVALID_ARGUMENT;
  }
  if (re) *re = spectrum->report.eigenvalues(index).real();
  if (im) *im = spectrum->report.eigenvalues(index).imag();
  return KS_OK;
}

int ks_spectrum_is_real(const ks_spectrum* spectrum, int index) {
  if (!spectrum || index < 0 || index >= spectrum->report.size()) return -1;
  return spectrum->report.realness[static_cast<size_t>(index)] ? 1 : 0;
}

ks_status ks_spectrum_kpr(const ks_spectrum* spectrum, int index, double* kpr_out) {
  if (!spectrum || !kpr_out || index < 0 || index >= spectrum->report.size()) {
    g_last_error = "index out of range";
    return KS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    *kpr_out = ks::kpr(spectrum->g, spectrum->report.eigenvalues(index),
                       spectrum->report.right_vectors.col(index), spectrum->tol);
  });
}

ks_status ks_spectrum_csv(const ks_spectrum* spectrum, char** csv_out) {
  if (!spectrum || !csv_out) {
    g_last_error = "null argument";
    return KS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() { *csv_out = dup_string(ks::spectrum_csv(spectrum->report)); });
}

ks_status ks_dynamical_stability(const ks_model* model, const char* tolerances_json,
                                 int* verdict, double* max_imag) {
  if (!model || !verdict) {
    g_last_error = "null argument";
    return KS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    ks::StabilityVerdict v =
        ks::dynamical_stability(model->g, tolerances_or_default(tolerances_json));
    *verdict = v.state == ks::StabilityState::stable
                   ? 1
                   : (v.state == ks::StabilityState::unstable ? 0 : -1);
    if (max_imag) *max_imag = v.max_imag;
  });
}

ks_status ks_run(const char* config_json, ks_report** out) {
  if (!config_json || !out) {
    g_last_error = "null argument";
    return KS_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  auto report = std::make_unique<ks_report>();
  report->result = ks::run_command(config_json);
  ks_status status = KS_OK;
  switch (report->result.status) {
    case ks::CommandStatus::ok:
      status = KS_OK;
      break;
    case ks::CommandStatus::usage_error:
      status = KS_ERR_INVALID_ARGUMENT;
      break;
    case ks::CommandStatus::indeterminate:
      status = KS_ERR_INDETERMINATE;
      break;
    case ks::CommandStatus::hard_failure:
      status = KS_ERR_NUMERIC;
      break;
  }
  if (status != KS_OK) g_last_error = report->result.summary_json;
  *out = report.release();  // the report is returned even on failure
  return status;
}

void ks_report_free(ks_report* report) { delete report; }

ks_status ks_report_summary(const ks_report* report, char** json_out) {
  if (!report || !json_out) {
    g_last_error = "null argument";
    return KS_ERR_INVALID_ARGUMENT;
  }
  *json_out = dup_string(report->result.summary_json);
  return KS_OK;
}

int ks_report_artifact_count(const ks_report* report) {
  return report ? static_cast<int>(report->result.artifacts.size()) : 0;
}

ks_status ks_report_artifact_name(const ks_report* report, int index, char** name_out) {
  if (!report || !name_out || index < 0 ||
      index >= static_cast<int>(report->result.artifacts.size())) {
    g_last_error = "index out of range";
    return KS_ERR_INVALID_ARGUMENT;
  }
  *name_out = dup_string(report->result.artifacts[static_cast<size_t>(index)].name);
  return KS_OK;
}

ks_status ks_report_artifact_content(const ks_report* report, int index, char** content_out) {
  if (!report || !content_out || index < 0 ||
      index >= static_cast<int>(report->result.artifacts.size())) {
    g_last_error = "index out of range";
    return KS_ERR_INVALID_ARGUMENT;
  }
  *content_out = dup_string(report->result.artifacts[static_cast<size_t>(index)].content);
  return KS_OK;
}

}  // extern "C"
