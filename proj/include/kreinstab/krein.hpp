#ifndef KREINSTAB_KREIN_HPP
#define KREINSTAB_KREIN_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kreinstab/spectral.hpp"
#include "kreinstab/types.hpp"

namespace ks {

/// Sign of <v|tau3|v> with a null band: +1, -1, or 0 when the overlap is
/// below null_tol * |v|^2. Throws on the zero vector.
int krein_signature(const Vector& v, double null_tol = 1e-8);

/// Modal basis with bosonic / pseudo-bosonic normalization. Real-eigenvalue
/// eigenspaces are tau3-Gram diagonalized (signatures become sharp there);
/// complex pairs are biorthogonalized with the equal-norm convention.
struct ModalBasis {
  Vector eigenvalues;            // mirrors the spectrum ordering
  Matrix vectors;                // tau3-normalized columns
  std::vector<int> signature;    // +1/-1 for real modes, 0 for complex
  std::vector<int> partner;      // conjugate partner index
  std::vector<bool> realness;
};
ModalBasis tau3_normalize_modes(const Matrix& g, const SpectrumReport& spectrum,
                                const Tolerances& tol = {});

/// Krein phase rigidity of an eigenvector psi at omega. The bi-orthonormal
/// partner is tau3 psi for real omega (sign-corrected) and tau3 psi_* for
/// complex omega, with psi_* located inside ker(G - omega^*).
/// Scaling-invariant in psi. Throws when psi sits in range(G - omega) or
/// when the real-omega partner construction degenerates (tau3-null mode).
double kpr(const Matrix& g, Complex omega, const Vector& psi, const Tolerances& tol = {});

/// Conventional phase rigidity for complex symmetric matrices,
/// rho = |<psi^*|psi>| / <psi|psi>. Returns 0 with ep_flag at an exact EP.
struct PhaseRigidity {
  double rho = 0.0;
  bool ep_flag = false;
};
PhaseRigidity phase_rigidity_symmetric(const Matrix& m, const Vector& psi,
                                       double null_tol = 1e-8);

enum class Definiteness { positive, negative, indefinite };

struct KreinReport {
  Vector eigenvalues;
  std::vector<int> signature;                  // per eigenvector
  std::vector<Definiteness> definiteness;      // per eigenvector's eigenvalue
  std::vector<bool> collision;                 // per index: real + indefinite
  std::vector<double> kpr_values;              // NaN where undefined
  std::vector<bool> kpr_contour_dependent;     // true at collided eigenvalues
  std::vector<bool> realness;
  std::vector<bool> indeterminate_inertia;     // Gram eigenvalue inside the null band
  bool dynamically_stable = false;
  bool stability_indeterminate = false;
  bool thermodynamically_stable_sufficient = false;
  double max_imag = 0.0;
  std::vector<Complex> collided_eigenvalues;
  std::vector<Complex> defective_eigenvalues;
};

/// Full Krein toolkit pass over a spectrum: signatures from the
/// Gram-diagonalized eigenspace bases, collision detection by inertia,
/// per-vector KPR, stability verdicts.
KreinReport analyze_krein(const Matrix& g, const SpectrumReport& spectrum,
                          const Tolerances& tol = {});

/// Real eigenvalues whose eigenspace carries both signatures.
std::vector<Complex> detect_krein_collisions(const Matrix& g, const SpectrumReport& spectrum,
                                             const Tolerances& tol = {});

enum class TransitionKind { exceptional_point, krein_collision, both, none, indeterminate };

struct TransitionClassification {
  TransitionKind kind = TransitionKind::none;
  Complex eigenvalue;  // representative eigenvalue carrying the evidence
  std::string evidence;
};

/// Classifies a candidate stability-boundary point of a parametrized family:
/// EP when defective there, Krein collision when diagonalizable with an
/// indefinite real eigenvalue, both when distinct eigenvalues show each.
/// The probe radius is used to confirm a stability change nearby (recorded
/// as evidence, not as a gate).
TransitionClassification classify_transition(const std::function<Matrix(double)>& family,
                                             double critical, double probe_radius,
                                             const Tolerances& tol = {});

enum class StabilityState { stable, unstable, indeterminate };

struct StabilityVerdict {
  StabilityState state = StabilityState::indeterminate;
  double max_imag = 0.0;
  std::vector<Complex> defective_eigenvalues;
};

/// Dynamical stability: all eigenvalues real within tolerance AND G
/// diagonalizable.
StabilityVerdict dynamical_stability(const Matrix& g, const Tolerances& tol = {});

/// Sufficient condition only: min eigenvalue of Hermitian H above -tol*scale.
bool thermodynamic_stability_sufficient(const Matrix& h, double tol = 1e-10);

/// Constructive generalized PT symmetry Theta = P . (conjugation in the
/// generalized eigenbasis), with P swapping conjugate Jordan chains.
/// As an anti-linear map, Theta(x) = S x^*.
struct GptSymmetry {
  Matrix basis;                 // generalized eigenbasis columns
  std::vector<int> pairing;     // chain partner indices under w -> w^*
  Matrix s_matrix;              // Theta(x) = S conj(x)
  double commutation_residual;  // |G S - S G^*| / scale
  bool unbroken;                // simultaneous eigenbasis exists
};
GptSymmetry construct_gpt_symmetry(const Matrix& g, const Tolerances& tol = {});

/// Quasi-particle vacuum normalizability test for a tau3-unitary modal
/// matrix L: largest singular value of X^{-1} Y from L's block pattern.
struct VacuumCheck {
  double max_singular_value = 0.0;
  bool normalizable = false;
};
VacuumCheck vacuum_normalizability(const Matrix& l, double tol = 1e-8);

/// Canonical tau3-unitary modal matrix L (with L^* = tau1 L tau1) built from
/// the modal basis of a dynamically stable G; input to the vacuum test.
Matrix modal_matrix(const Matrix& g, const Tolerances& tol = {});

}  // namespace ks

#endif
