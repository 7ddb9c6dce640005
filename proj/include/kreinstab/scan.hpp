#ifndef KREINSTAB_SCAN_HPP
#define KREINSTAB_SCAN_HPP

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "kreinstab/types.hpp"

namespace ks {

struct Axis {
  std::string name;
  double min = 0, max = 1, step = 0.1;

  int count() const;
  double value(int i) const { return min + i * step; }
};

/// One grid cell of a parameter scan, in deterministic row-major order.
struct ScanRecord {
  int i1 = 0, i2 = 0;
  double v1 = 0, v2 = 0;
  int stable = -1;  // 1 stable, 0 unstable, -1 indeterminate/failed
  double max_imag = 0;
  double min_modulus = 0;
  bool boundary = false;
  double kpr = std::numeric_limits<double>::quiet_NaN();
  double min_overlap = std::numeric_limits<double>::quiet_NaN();  // tracking health
};

struct ScanGrid {
  std::string model;
  std::map<std::string, double> base_params;
  Axis axis1, axis2;
  std::vector<ScanRecord> records;  // row-major: i1 sweeps axis1, i2 axis2
  bool has_kpr = false;
  std::vector<std::string> diagnostics;

  const ScanRecord& at(int i1, int i2) const;
};

/// Worker cap: min(KS_THREADS when set, hardware concurrency).
int scan_worker_count();

/// Per-point stability verdicts from the eigenvalue spectrum (the scan
/// fast path: realness of all eigenvalues), plus max |Im w|, min |w| and
/// 4-neighbor boundary marking. Deterministic output for any worker count.
ScanGrid stability_scan(const std::string& model, const std::map<std::string, double>& base,
                        const Axis& axis1, const Axis& axis2, const Tolerances& tol = {});

/// KPR of a continuously tracked eigenvector along a serpentine traversal.
/// seed_index < 0 picks the eigenvector of the largest real eigenvalue at
/// the first grid point. Tracking loss leaves NaN cells and a diagnostic.
ScanGrid kpr_scan(const std::string& model, const std::map<std::string, double>& base,
                  const Axis& axis1, const Axis& axis2, int seed_index = -1,
                  const Tolerances& tol = {});

/// Parametrized path through model parameters: sigma in [0, 1] -> overrides.
using ParamPath = std::function<std::map<std::string, double>(double)>;

struct FlowStep {
  double sigma = 0;
  Vector eigenvalues;           // tracked order (index-linked across steps)
  std::vector<int> signatures;  // +1/-1/0 per tracked eigenvector
  double min_overlap = 1.0;     // assignment quality to the previous step
};

struct FlowTrace {
  std::vector<FlowStep> steps;
  std::vector<std::string> events;  // mergers, off-axis splittings, tracking loss
};

/// Spectral flow along a path with maximal-overlap eigenvector linking.
FlowTrace spectral_flow(const std::string& model, const std::map<std::string, double>& base,
                        const ParamPath& path, int steps, const Tolerances& tol = {});

enum class ContourQuantity { kpr, max_imag, min_modulus };

struct ContourTrace {
  std::vector<double> sigma;
  std::vector<double> value;
  std::vector<std::string> diagnostics;
};

/// Scalar quantity along a parametrized contour, with eigenvector-continuity
/// tracking for the KPR.
ContourTrace contour_eval(const std::string& model, const std::map<std::string, double>& base,
                          const ParamPath& path, ContourQuantity quantity, int steps,
                          const Tolerances& tol = {});

}  // namespace ks

#endif
