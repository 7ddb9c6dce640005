#ifndef KREINSTAB_TYPES_HPP
#define KREINSTAB_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ks {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix2 = Eigen::Matrix2cd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Tolerance profile threaded through the numerical pipeline. All relative
/// tolerances are scaled by matrix_scale() of the operand unless noted.
struct Tolerances {
  double validation = 1e-10;      ///< structural constraint residuals (absolute, max-norm)
  double realness = 1e-8;         ///< |Im w| below which an eigenvalue counts as real
  double cluster = 1e-8;          ///< single-linkage radius for eigenvalue clustering
  double rank = 1e-8;             ///< singular-value cutoff relative to sigma_max
  double rank_gap_floor = 1e2;    ///< minimal sv ratio required to commit a rank decision
  double signature_null = 1e-8;   ///< |<v|tau3|v>| / |v|^2 below which the signature is 0
  double chain = 1e-8;            ///< Jordan chain identity residual
  double residual = 1e-8;         ///< eigenpair residual acceptance
  double boundary = 1e-8;         ///< boundary-matrix kernel acceptance (gbt)
  double continuity_floor = 0.5;  ///< tracking overlap below which continuity is lost
};

/// Scale used for relative tolerances: max(1, largest |entry|).
inline double matrix_scale(const Matrix& m) {
  double s = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  return s < 1.0 ? 1.0 : s;
}

enum class ErrorCode {
  invalid_argument,      // structural misuse (dimension mismatch, bad parameters)
  constraint_violation,  // validated physical constraint failed
  indeterminate,         // the numerics refuse to commit to an answer
  numeric_failure,       // a numerical routine broke down
  unsupported,           // out of the implemented scope (e.g. singular omega)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ks

#endif
