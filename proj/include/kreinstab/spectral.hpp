#ifndef KREINSTAB_SPECTRAL_HPP
#define KREINSTAB_SPECTRAL_HPP

#include <optional>
#include <vector>

#include "kreinstab/types.hpp"

namespace ks {

/// Full eigensystem of an effective SPH with the bookkeeping every
/// downstream consumer needs: deterministic ordering, realness flags,
/// eigenvalue clusters, quartet orbits and conjugate partners.
struct SpectrumReport {
  Vector eigenvalues;               // sorted by (Re, Im)
  Matrix right_vectors;             // unit-norm columns, phase-fixed
  std::vector<bool> realness;       // |Im w| <= realness tol * scale
  std::vector<int> cluster;         // distinct-eigenvalue cluster id per index
  std::vector<Complex> cluster_value;  // representative value per cluster
  std::vector<int> algebraic_mult;  // per index, size of its cluster
  std::vector<int> geometric_mult;  // per index, dim ker(G - w)
  std::vector<int> quartet;         // orbit id under w -> w^* and w -> -w^*
  std::vector<int> conj_partner;    // index with eigenvalue ~ w^* (self if real)
  double scale = 1.0;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  int cluster_count() const { return static_cast<int>(cluster_value.size()); }
  std::vector<int> cluster_members(int cluster_id) const;

  /// Left eigenvector (eigenvector of G^dag at w^*): tau3 psi for real w,
  /// tau3 psi_* for complex w.
  Vector left_vector(int index) const;
};

/// Dense eigendecomposition of G. Balances the matrix by a diagonal
/// similarity before the Schur sweep; boundary-localized spectra (skin
/// effect) are otherwise hopelessly ill-conditioned.
SpectrumReport eigendecompose(const Matrix& g, const Tolerances& tol = {});

/// Groups eigenvalues into orbits under w -> w^* and w -> -w^*.
/// Throws Error(numeric_failure) naming unmatched values when the multiset
/// fails to close within the clustering tolerance.
std::vector<std::vector<int>> group_quartets(const std::vector<Complex>& eigenvalues,
                                             double cluster_radius);

enum class RankStatus { committed, indeterminate };

/// Numerical rank by the largest relative gap in the singular values,
/// with threshold override; refuses to commit when the gap is too shallow.
struct RankDecision {
  int rank = 0;
  RankStatus status = RankStatus::committed;
  double gap = 0.0;
};
RankDecision numerical_rank(const Matrix& m, const Tolerances& tol);

/// Orthonormal basis of ker(M) selected by the same rank decision.
Matrix kernel_basis(const Matrix& m, const Tolerances& tol);

struct JordanStructure {
  Complex eigenvalue;
  std::vector<int> chain_lengths;              // descending partition
  std::vector<std::vector<Vector>> chains;     // chains[j][k-1] has rank k
  RankStatus status = RankStatus::committed;
  double worst_residual = 0.0;

  int algebraic_multiplicity() const;
  int geometric_multiplicity() const { return static_cast<int>(chain_lengths.size()); }
};

/// Chain-length partition and generalized vectors at omega, from the ranks
/// of (G - w)^k. Ill-conditioned rank decisions surface as status =
/// indeterminate instead of a guessed partition.
JordanStructure detect_jordan_structure(const Matrix& g, Complex omega,
                                        const Tolerances& tol = {});

struct CanonicalChain {
  Complex eigenvalue;
  int length = 0;
  int sign = 0;          // epsilon_j for self-paired (real) chains, 0 otherwise
  int partner = -1;      // chain index paired under w -> w^*
  int first_column = 0;  // column offset of chi_{j1} in the basis matrix
};

/// Full generalized eigenbasis with the tau3 pairing brought to the signed
/// antidiagonal canonical form: <chi_jk|tau3|chi_lp> = eps_j d_{j l*} d_{k, r_j+1-p}.
struct CanonicalBasis {
  std::vector<CanonicalChain> chains;
  Matrix basis;                 // columns chi_{j1}, ..., chi_{j r_j} per chain
  double worst_pairing_residual = 0.0;
  double worst_chain_residual = 0.0;
};

CanonicalBasis canonicalize_jordan_basis(const Matrix& g, const Tolerances& tol = {});

/// Pairing matrix <col_i|tau3|col_j> of a basis; the canonical form target.
Matrix tau3_gram(const Matrix& basis);

struct DiagonalizabilityResult {
  bool diagonalizable = false;
  std::optional<Complex> defective_eigenvalue;
  RankStatus status = RankStatus::committed;
};

DiagonalizabilityResult is_diagonalizable(const Matrix& g, const Tolerances& tol = {});

}  // namespace ks

#endif
