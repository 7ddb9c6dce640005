#ifndef KREINSTAB_IO_HPP
#define KREINSTAB_IO_HPP

#include <string>
#include <vector>

#include "kreinstab/gbt.hpp"
#include "kreinstab/krein.hpp"
#include "kreinstab/nambu.hpp"
#include "kreinstab/scan.hpp"
#include "kreinstab/spectral.hpp"

namespace ks {

/// Deterministic float formatting: 17 significant digits, C locale.
std::string format_double(double v);

// ------------------------------------------------------------ JSON schemas

/// QBHSpec: {"N": int, "K": [[{"re":..,"im":..},..]], "Delta": [[..]]},
/// row-major matrices.
QbhSpec qbh_from_json(const std::string& text);
std::string qbh_to_json(const QbhSpec& spec);

/// BBTSpec: {"N":.., "R":.., "g": {"-1": [[..]], "0": .., "1": ..},
///           "V": [{"row_site":.., "col_site":.., "block": [[..]]}]}.
BbtSpec bbt_from_json(const std::string& text);
std::string bbt_to_json(const BbtSpec& spec);

/// Model selection: {"model": "bkc", "params": {"N":.., ...}} or a raw
/// QBHSpec document.
QbhSpec model_from_json(const std::string& text);

Tolerances tolerances_from_json(const std::string& text);

// --------------------------------------------------------------- CSV output

/// eigen_index, re_omega, im_omega, is_real, quartet_id, algebraic_mult,
/// geometric_mult
std::string spectrum_csv(const SpectrumReport& rep);

/// eigen_index, re_omega, im_omega, signature, definiteness, collision_flag, kpr
std::string krein_csv(const KreinReport& krein);

/// i1, i2, <axis1>, <axis2>, stable, max_im_omega, min_mod_omega, boundary[, kpr]
std::string scan_csv(const ScanGrid& grid);

/// step, sigma, eigen_index, re_omega, im_omega, signature, min_overlap
std::string flow_csv(const FlowTrace& trace);

/// sigma, value
std::string contour_csv(const ContourTrace& trace);

// ----------------------------------------------------------- command driver

/// A named output file produced by a command (content is written by the
/// caller; the core never touches the filesystem).
struct Artifact {
  std::string name;     // suggested file name
  std::string content;  // CSV or JSON payload
};

enum class CommandStatus {
  ok = 0,
  hard_failure = 1,
  usage_error = 2,
  indeterminate = 3,
};

struct CommandResult {
  CommandStatus status = CommandStatus::ok;
  std::string summary_json;  // human- and machine-readable run summary
  std::vector<Artifact> artifacts;
};

/// Executes one CLI-level command described by a JSON config:
/// {"command": "spectrum|classify|kpr|scan|flow|gbt|evolve|oracle-check",
///  "model":.., "params": {..}, "grid": {..}, "tolerances": {..}, ...}.
CommandResult run_command(const std::string& config_json);

/// Analytic-vs-numeric comparison suite ("fast" or "all").
struct OracleCheckResult {
  int passed = 0;
  int failed = 0;
  std::vector<std::string> failures;
};
OracleCheckResult oracle_check(const std::string& suite);

}  // namespace ks

#endif
