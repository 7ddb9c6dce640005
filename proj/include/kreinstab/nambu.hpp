#ifndef KREINSTAB_NAMBU_HPP
#define KREINSTAB_NAMBU_HPP

#include <string>
#include <vector>

#include "kreinstab/types.hpp"

namespace ks {

/// Quadratic bosonic Hamiltonian data: N modes, Hermitian hopping K and
/// symmetric pairing Delta, both N x N. Energies in the same units as K.
struct QbhSpec {
  Matrix hopping;  // K
  Matrix pairing;  // Delta

  int modes() const { return static_cast<int>(hopping.rows()); }

  /// Constant offset -1/2 tr K of the normal-ordered form. Metadata only;
  /// it never enters the dynamics.
  double constant_offset() const { return -0.5 * hopping.trace().real(); }
};

struct ConstraintViolation {
  std::string constraint;
  double residual;
};

struct ValidationReport {
  std::vector<ConstraintViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks K = K^dagger and Delta = Delta^T within tol (max-norm residuals).
/// Dimension mismatches throw Error(invalid_argument); constraint failures
/// are reported, not thrown.
ValidationReport validate_qbh(const QbhSpec& spec, double tol = 1e-10);

/// Pauli structures 1_N x sigma_j in the interleaved ordering
/// [a_1, a_1^dag, ..., a_N, a_N^dag].
Matrix tau1(int modes);
Matrix tau2(int modes);
Matrix tau3(int modes);

/// Cheap applications of tau1/tau3 without forming the matrices.
Vector apply_tau1(const Vector& v);
Vector apply_tau3(const Vector& v);
Matrix apply_tau3_left(const Matrix& m);

/// Single-particle Hamiltonian H assembled from 2x2 blocks
/// h_ij = [[K_ij, Delta_ij], [Delta_ij^*, K_ij^*]]. Hermitian by construction
/// for a valid spec, and satisfies H^* = tau1 H tau1.
Matrix build_single_particle_h(const QbhSpec& spec);

/// Effective single-particle Hamiltonian G = tau3 H (frequency units).
/// Throws Error(constraint_violation) when the spec fails validation.
Matrix build_effective_sph(const QbhSpec& spec, double validation_tol = 1e-10);

/// Validates the two structural invariants of an effective SPH:
/// G^dag = tau3 G tau3 and G^* = -tau1 G tau1 (residuals relative to scale).
ValidationReport validate_effective_sph(const Matrix& g, double tol = 1e-10);

/// Indefinite inner product <u|tau3|v>, conjugate-linear in the first slot.
Complex tau3_inner(const Vector& u, const Vector& v);

/// Charge conjugation C v = tau1 v^*; an anti-linear involution.
Vector charge_conjugate(const Vector& v);

/// Conversion between the interleaved ordering [a_1, a_1^dag, ...] used
/// internally and the standard block ordering [a_1..a_N, a_1^dag..a_N^dag].
Vector to_standard_ordering(const Vector& interleaved);
Vector from_standard_ordering(const Vector& standard);
Matrix to_standard_ordering(const Matrix& interleaved);

}  // namespace ks

#endif
