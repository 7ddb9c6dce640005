/* kreinstab: Krein-stability analysis of quadratic bosonic Hamiltonians.
 *
 * C API of the shared library. All functions return ks_status; results come
 * back through opaque handles and out-parameters. Strings returned through
 * char** out-parameters are owned by the caller and must be released with
 * ks_string_free. Handles must be released with the matching *_free call.
 * On any non-OK status, ks_last_error() returns a thread-local description.
 */
#ifndef KREINSTAB_H
#define KREINSTAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ks_status {
  KS_OK = 0,
  KS_ERR_INVALID_ARGUMENT = 1,
  KS_ERR_PARSE = 2,
  KS_ERR_CONSTRAINT = 3,     /* a validated physical constraint failed */
  KS_ERR_INDETERMINATE = 4,  /* the numerics refuse to commit */
  KS_ERR_NUMERIC = 5,        /* numerical breakdown */
  KS_ERR_UNSUPPORTED = 6     /* outside the implemented scope */
} ks_status;

typedef struct ks_model ks_model;       /* a QBH spec with its effective SPH */
typedef struct ks_spectrum ks_spectrum; /* an eigendecomposition */
typedef struct ks_report ks_report;     /* command output: summary + artifacts */

const char* ks_version(void);
const char* ks_status_name(ks_status status);
/* Thread-local message describing the most recent failure. */
const char* ks_last_error(void);
void ks_string_free(char* s);

/* ---- models ----------------------------------------------------------- */

/* Accepts either {"model": name, "params": {...}} or a raw QBH document
 * {"N":.., "K": [[{"re":..,"im":..},..]], "Delta": [[..]]}. */
ks_status ks_model_from_json(const char* json, ks_model** out);
void ks_model_free(ks_model* model);

/* Number of bosonic modes N. */
int ks_model_modes(const ks_model* model);

/* Effective single-particle Hamiltonian G (2N x 2N, interleaved Nambu
 * ordering), written row-major as re,im pairs into a caller buffer of
 * 2 * (2N)^2 doubles. */
ks_status ks_model_matrix(const ks_model* model, double* reim);

/* Serialized QBH document for the model. */
ks_status ks_model_to_json(const ks_model* model, char** json_out);

/* ---- spectra ---------------------------------------------------------- */

/* tolerances_json may be NULL; otherwise a {"realness":.., ...} overrides
 * document (same keys as the CLI config). */
ks_status ks_spectrum_compute(const ks_model* model, const char* tolerances_json,
                              ks_spectrum** out);
void ks_spectrum_free(ks_spectrum* spectrum);

int ks_spectrum_size(const ks_spectrum* spectrum);
ks_status ks_spectrum_eigenvalue(const ks_spectrum* spectrum, int index, double* re,
                                 double* im);
/* 1 when |Im w| is inside the realness band, else 0; negative on error. */
int ks_spectrum_is_real(const ks_spectrum* spectrum, int index);
/* Krein phase rigidity of the eigenvector at the given index. */
ks_status ks_spectrum_kpr(const ks_spectrum* spectrum, int index, double* kpr_out);
/* The SpectrumReport CSV document. */
ks_status ks_spectrum_csv(const ks_spectrum* spectrum, char** csv_out);

/* ---- stability -------------------------------------------------------- */

/* verdict: 1 stable, 0 unstable, -1 indeterminate. max_imag may be NULL. */
ks_status ks_dynamical_stability(const ks_model* model, const char* tolerances_json,
                                 int* verdict, double* max_imag);

/* ---- command driver --------------------------------------------------- */

/* Runs one command from a JSON config (the same schema the CLI uses) and
 * returns a report. The report carries a summary JSON plus zero or more
 * named artifacts (CSV/JSON documents); writing them to disk is the
 * caller's business. The returned status mirrors the command outcome. */
ks_status ks_run(const char* config_json, ks_report** out);
void ks_report_free(ks_report* report);

ks_status ks_report_summary(const ks_report* report, char** json_out);
int ks_report_artifact_count(const ks_report* report);
ks_status ks_report_artifact_name(const ks_report* report, int index, char** name_out);
ks_status ks_report_artifact_content(const ks_report* report, int index, char** content_out);

#ifdef __cplusplus
}
#endif

#endif /* KREINSTAB_H */
