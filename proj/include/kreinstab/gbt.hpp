#ifndef KREINSTAB_GBT_HPP
#define KREINSTAB_GBT_HPP

#include <string>
#include <vector>

#include "kreinstab/types.hpp"

namespace ks {

/// Corner-modified banded block-Toeplitz effective SPH: bulk blocks g_r for
/// |r| <= R acting on a length-N lattice with a 2-dimensional internal space,
/// plus corner blocks V supported on the 2R boundary sites. Sites are
/// 1-based, matching the lattice convention.
struct BbtSpec {
  int sites = 0;  // N
  int range = 1;  // R < N/2
  std::vector<Matrix2> bulk;  // g_{-R} .. g_{R}, indexed via bulk_block()

  struct Corner {
    int row_site = 1;
    int col_site = 1;
    Matrix2 block;
  };
  std::vector<Corner> corners;

  const Matrix2& bulk_block(int r) const;  // g_r, |r| <= R
  Matrix2& bulk_block(int r);

  /// Structural checks: R < N/2 and g_{-r} = sigma3 g_r^dag sigma3.
  void validate(double tol = 1e-10) const;

  /// Dense 2N x 2N assembly (bulk Toeplitz part + corner modification).
  Matrix dense() const;

  /// Matrix-free application of the full operator.
  Vector apply(const Vector& v) const;
};

/// Reduced bulk Hamiltonian G(z) = g_0 + sum_r (z^r g_r + z^-r g_-r), the
/// analytic continuation of the Bloch matrix off the unit circle.
Matrix2 reduced_bulk_hamiltonian(const BbtSpec& spec, Complex z);

/// Matrix Laurent polynomial sum_r z^r c_r; the generalized-kernel machinery
/// runs on powers of (G(z) - omega), so the solver core is written against
/// this representation rather than the spec itself.
struct MatrixLaurent {
  int range = 0;               // R'
  std::vector<Matrix2> coeff;  // c_{-R'} .. c_{R'}

  const Matrix2& at(int r) const { return coeff[static_cast<size_t>(r + range)]; }
  Matrix2 eval(Complex z) const;
  Matrix2 derivative(Complex z, int order) const;  // d^order/dz^order, scaled by 1/order!
};
MatrixLaurent bulk_polynomial(const BbtSpec& spec);  // G(z)

struct RootSet {
  struct Root {
    Complex z;
    int multiplicity;
  };
  std::vector<Root> roots;  // nonzero roots of z^{dR'} det(poly(z) - omega)
  int s0 = 0;               // multiplicity of z = 0 (emergent sector size per side)
  int degree_deficit = 0;   // missing leading coefficients ("roots at infinity")
};

/// Roots of the complex characteristic polynomial at fixed omega, via the
/// companion matrix of the cleared Laurent determinant. Throws
/// Error(unsupported) for singular omega (flat band: identically zero).
RootSet characteristic_roots(const BbtSpec& spec, Complex omega,
                             double cluster_tol = 1e-7);
RootSet characteristic_roots(const MatrixLaurent& poly, Complex omega,
                             double cluster_tol = 1e-7);

/// Complete solution set of the bulk equation at omega: extended
/// (generalized Bloch) solutions from the nonzero roots and s0 + s0
/// boundary-localized emergent solutions.
struct BulkBasis {
  Complex omega;
  RootSet roots;
  std::vector<Vector> solutions;  // extended first, then left emergent, then right
  int extended_count = 0;
  int emergent_count = 0;  // per side

  int total() const { return static_cast<int>(solutions.size()); }
};
BulkBasis bulk_solution_basis(const BbtSpec& spec, Complex omega, const Tolerances& tol = {});

/// Boundary matrix B(omega): rows are the 2R boundary sites (2 components
/// each), columns the bulk-solution Ansatz. det B = 0 is the eigencondition.
Matrix boundary_matrix(const BbtSpec& spec, Complex omega, const BulkBasis& basis);

/// Eigen-search over a domain: analytic candidates and/or a rectangular grid
/// whose local sigma_min(B) minima get refined (secant on det, with a
/// pattern-search fallback) and accepted only on dense-residual verification.
struct SearchDomain {
  std::vector<Complex> candidates;  // analytic seeds (optional)
  bool use_grid = false;
  double re_min = 0, re_max = 0, im_min = 0, im_max = 0;
  int re_points = 0, im_points = 0;
};

struct EigenSearchResult {
  struct Eigenpair {
    Complex omega;
    std::vector<Vector> vectors;  // kernel of B(omega), assembled and verified
  };
  std::vector<Eigenpair> pairs;
  std::vector<std::string> diagnostics;
  int total_multiplicity() const;
};
EigenSearchResult eigen_search(const BbtSpec& spec, const SearchDomain& domain,
                               const Tolerances& tol = {});

/// Basis of ker (G - omega)^p through the same bulk/boundary split applied
/// to the power polynomial (range p R). Throws Error(unsupported) when
/// p >= (N-1)/R, where the power stops being corner-modified BBT.
std::vector<Vector> generalized_kernel(const BbtSpec& spec, Complex omega, int power,
                                       const Tolerances& tol = {});

}  // namespace ks

#endif
