#include "kreinstab/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "kreinstab/spectral.hpp"

namespace ks {

namespace {

Matrix2 sigma3() {
  Matrix2 s;
  s << 1, 0, 0, -1;
  return s;
}

double binom(int n, int k) {
  // generalized falling-factorial binomial; n may be any integer here but
  // we only use n >= 1
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= double(n - i) / double(i + 1);
  return out;
}

}  // namespace

const Matrix2& BbtSpec::bulk_block(int r) const {
  if (std::abs(r) > range) {
    throw Error(ErrorCode::invalid_argument, "bulk block index out of range");
  }
  return bulk[static_cast<size_t>(r + range)];
}

Matrix2& BbtSpec::bulk_block(int r) {
  if (std::abs(r) > range) {
    throw Error(ErrorCode::invalid_argument, "bulk block index out of range");
  }
  return bulk[static_cast<size_t>(r + range)];
}

void BbtSpec::validate(double tol) const {
  if (range < 1 || sites < 1) {
    throw Error(ErrorCode::invalid_argument, "BBT spec needs positive range and size");
  }
  if (2 * range >= sites) {
    throw Error(ErrorCode::invalid_argument,
                "range must satisfy R < N/2 for the bulk/boundary split");
  }
  if (bulk.size() != static_cast<size_t>(2 * range + 1)) {
    throw Error(ErrorCode::invalid_argument, "bulk block list must cover -R..R");
  }
  const Matrix2 s3 = sigma3();
  for (int r = 0; r <= range; ++r) {
    double res = (bulk_block(-r) - s3 * bulk_block(r).adjoint() * s3).cwiseAbs().maxCoeff();
    if (res > tol * std::max(1.0, bulk_block(r).cwiseAbs().maxCoeff())) {
      throw Error(ErrorCode::constraint_violation,
                  "bosonic structure g_{-r} = sigma3 g_r^dag sigma3 violated at r=" +
                      std::to_string(r) + " (residual " + std::to_string(res) + ")");
    }
  }
  for (const auto& c : corners) {
    auto on_boundary = [&](int site) {
      return (site >= 1 && site <= range) || (site >= sites - range + 1 && site <= sites);
    };
    if (!on_boundary(c.row_site) || !on_boundary(c.col_site)) {
      throw Error(ErrorCode::invalid_argument, "corner block outside the boundary slab");
    }
  }
}

Matrix BbtSpec::dense() const {
  Matrix g = Matrix::Zero(2 * sites, 2 * sites);
  for (int j = 1; j <= sites; ++j) {
    for (int r = -range; r <= range; ++r) {
      int col = j + r;
      if (col < 1 || col > sites) continue;
      g.block<2, 2>(2 * (j - 1), 2 * (col - 1)) += bulk_block(r);
    }
  }
  for (const auto& c : corners) {
    g.block<2, 2>(2 * (c.row_site - 1), 2 * (c.col_site - 1)) += c.block;
  }
  return g;
}

Vector BbtSpec::apply(const Vector& v) const {
  if (v.size() != 2 * sites) {
    throw Error(ErrorCode::invalid_argument, "vector length mismatch in BBT apply");
  }
  Vector out = Vector::Zero(v.size());
  for (int j = 1; j <= sites; ++j) {
    Eigen::Vector2cd acc = Eigen::Vector2cd::Zero();
    for (int r = -range; r <= range; ++r) {
      int col = j + r;
      if (col < 1 || col > sites) continue;
      acc += bulk_block(r) * v.segment<2>(2 * (col - 1));
    }
    out.segment<2>(2 * (j - 1)) = acc;
  }
  for (const auto& c : corners) {
    out.segment<2>(2 * (c.row_site - 1)) += c.block * v.segment<2>(2 * (c.col_site - 1));
  }
  return out;
}

Matrix2 reduced_bulk_hamiltonian(const BbtSpec& spec, Complex z) {
  if (z == Complex(0, 0)) {
    throw Error(ErrorCode::invalid_argument, "reduced bulk Hamiltonian undefined at z = 0");
  }
  return bulk_polynomial(spec).eval(z);
}

Matrix2 MatrixLaurent::eval(Complex z) const {
  Matrix2 out = Matrix2::Zero();
  for (int r = -range; r <= range; ++r) {
    out += std::pow(z, r) * at(r);
  }
  return out;
}

Matrix2 MatrixLaurent::derivative(Complex z, int order) const {
  if (order == 0) return eval(z);
  Matrix2 out = Matrix2::Zero();
  for (int r = -range; r <= range; ++r) {
    // (1/order!) d^order/dz^order z^r = binom(r, order) z^{r-order}
    double factor = 1.0;
    for (int i = 0; i < order; ++i) factor *= double(r - i) / double(i + 1);
    if (factor == 0.0) continue;
    out += factor * std::pow(z, r - order) * at(r);
  }
  return out;
}

MatrixLaurent bulk_polynomial(const BbtSpec& spec) {
  MatrixLaurent p;
  p.range = spec.range;
  p.coeff = spec.bulk;
  return p;
}

namespace {

MatrixLaurent shift_by_omega(const MatrixLaurent& poly, Complex omega) {
  MatrixLaurent a = poly;
  a.coeff[static_cast<size_t>(a.range)] -= omega * Matrix2::Identity();
  return a;
}

MatrixLaurent laurent_multiply(const MatrixLaurent& a, const MatrixLaurent& b) {
  MatrixLaurent out;
  out.range = a.range + b.range;
  out.coeff.assign(static_cast<size_t>(2 * out.range + 1), Matrix2::Zero());
  for (int r = -a.range; r <= a.range; ++r) {
    for (int s = -b.range; s <= b.range; ++s) {
      out.coeff[static_cast<size_t>(r + s + out.range)] += a.at(r) * b.at(s);
    }
  }
  return out;
}

MatrixLaurent laurent_power(const MatrixLaurent& a, int p) {
  MatrixLaurent out;
  out.range = 0;
  out.coeff.assign(1, Matrix2::Identity());
  for (int i = 0; i < p; ++i) out = laurent_multiply(out, a);
  return out;
}

// Scalar coefficients of z^{d R'} det(A(z)) for d = 2, indices 0 .. 4R'.
std::vector<Complex> cleared_determinant(const MatrixLaurent& a) {
  const int rr = a.range;
  const int len = 2 * rr + 1;
  auto entry = [&](int i, int j) {
    std::vector<Complex> c(static_cast<size_t>(len));
    for (int r = -rr; r <= rr; ++r) c[static_cast<size_t>(r + rr)] = a.at(r)(i, j);
    return c;
  };
  auto conv = [&](const std::vector<Complex>& u, const std::vector<Complex>& v) {
    std::vector<Complex> out(u.size() + v.size() - 1, Complex(0, 0));
    for (size_t i = 0; i < u.size(); ++i) {
      for (size_t j = 0; j < v.size(); ++j) out[i + j] += u[i] * v[j];
    }
    return out;
  };
  auto a00 = entry(0, 0), a01 = entry(0, 1), a10 = entry(1, 0), a11 = entry(1, 1);
  auto d1 = conv(a00, a11);
  auto d2 = conv(a01, a10);
  std::vector<Complex> det(d1.size());
  for (size_t i = 0; i < det.size(); ++i) det[i] = d1[i] - d2[i];
  return det;  // index k corresponds to z^{k - 2R'}, i.e. z^{2R'} det at index k
}

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeff) {
  // coeff[0] + coeff[1] z + ... monic-normalized companion matrix
  const int deg = static_cast<int>(coeff.size()) - 1;
  if (deg < 1) return {};
  Matrix companion = Matrix::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) {
    companion(i, deg - 1) = -coeff[static_cast<size_t>(i)] / coeff[static_cast<size_t>(deg)];
    if (i + 1 < deg) companion(i + 1, i) = 1.0;
  }
  Eigen::ComplexEigenSolver<Matrix> es(companion, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numeric_failure, "companion-matrix root finding failed");
  }
  std::vector<Complex> roots(es.eigenvalues().data(), es.eigenvalues().data() + deg);
  std::sort(roots.begin(), roots.end(), [](Complex x, Complex y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  return roots;
}

RootSet roots_of(const MatrixLaurent& a, double cluster_tol) {
  std::vector<Complex> det = cleared_determinant(a);
  double cmax = 0.0;
  for (const auto& c : det) cmax = std::max(cmax, std::abs(c));
  if (cmax == 0.0) {
    throw Error(ErrorCode::unsupported,
                "singular omega: characteristic polynomial vanishes identically (flat band)");
  }
  const double floor = 1e-12 * cmax;
  int lo = 0, hi = static_cast<int>(det.size()) - 1;
  while (lo <= hi && std::abs(det[static_cast<size_t>(lo)]) <= floor) ++lo;
  while (hi >= lo && std::abs(det[static_cast<size_t>(hi)]) <= floor) --hi;

  RootSet out;
  out.s0 = lo;
  out.degree_deficit = static_cast<int>(det.size()) - 1 - hi;
  std::vector<Complex> trimmed(det.begin() + lo, det.begin() + hi + 1);
  std::vector<Complex> roots = polynomial_roots(trimmed);

  // near-coalescent roots are merged and served by the derivative construction
  double zmax = 1.0;
  for (auto z : roots) zmax = std::max(zmax, std::abs(z));
  std::vector<bool> used(roots.size(), false);
  for (size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    Complex sum = roots[i];
    int count = 1;
    used[i] = true;
    bool grew = true;
    while (grew) {
      grew = false;
      for (size_t j = 0; j < roots.size(); ++j) {
        if (used[j]) continue;
        if (std::abs(roots[j] - sum / double(count)) <= cluster_tol * zmax) {
          sum += roots[j];
          ++count;
          used[j] = true;
          grew = true;
        }
      }
    }
    Complex rep = sum / double(count);
    if (std::abs(rep) < 1e-10 * zmax) {
      out.s0 += count;  // stray root collapsing onto the emergent sector
    } else {
      out.roots.push_back({rep, count});
    }
  }
  return out;
}

Vector bloch_lattice_vector(Complex z, int nu, int sites) {
  // component j of (1/(nu-1)!) d^{nu-1}/dz^{nu-1} sum_j z^j |j>
  Vector v(sites);
  for (int j = 1; j <= sites; ++j) {
    double factor = binom(j, nu - 1);
    v(j - 1) = factor == 0.0 ? Complex(0, 0) : factor * std::pow(z, j - nu + 1);
  }
  return v;
}

// Kernel with an expected dimension; uses the relative singular-value gap.
std::vector<Vector> expected_kernel(const Matrix& m, int expected, const char* what) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const int n = static_cast<int>(m.cols());
  if (expected > n) {
    throw Error(ErrorCode::numeric_failure,
                std::string(what) + ": expected kernel larger than the space");
  }
  const double smax = sv(0);
  if (expected < n && smax > 0) {
    double kept = sv(n - expected - 1);
    double dropped = sv(n - expected);
    if (dropped > 1e-6 * smax && kept > 0 && kept / std::max(dropped, 1e-300) < 1e2) {
      std::ostringstream msg;
      msg << what << ": kernel dimension mismatch (expected " << expected
          << ", singular values straddle " << kept << " / " << dropped << ")";
      throw Error(ErrorCode::numeric_failure, msg.str());
    }
  }
  std::vector<Vector> basis;
  for (int i = n - expected; i < n; ++i) basis.push_back(svd.matrixV().col(i));
  return basis;
}

struct GenericBulkBasis {
  RootSet roots;
  std::vector<Vector> solutions;
  int extended = 0;
  int emergent = 0;
};

// Complete bulk-equation solution set for the operator represented by the
// Laurent polynomial a(z) (eigenvalue already folded in), on `sites` sites.
GenericBulkBasis solve_bulk(const MatrixLaurent& a, int sites, double root_cluster_tol) {
  GenericBulkBasis out;
  out.roots = roots_of(a, root_cluster_tol);

  for (const auto& root : out.roots.roots) {
    const int s = root.multiplicity;
    // extended matrix A_s(z): upper-triangular block Toeplitz of scaled derivatives
    Matrix ext = Matrix::Zero(2 * s, 2 * s);
    for (int m = 0; m < s; ++m) {
      for (int mp = m; mp < s; ++mp) {
        ext.block<2, 2>(2 * m, 2 * mp) = a.derivative(root.z, mp - m);
      }
    }
    auto kernel = expected_kernel(ext, s, "extended bulk sector");
    for (const auto& u : kernel) {
      Vector psi = Vector::Zero(2 * sites);
      for (int nu = 1; nu <= s; ++nu) {
        Vector lattice = bloch_lattice_vector(root.z, nu, sites);
        for (int j = 0; j < sites; ++j) {
          psi.segment<2>(2 * j) += lattice(j) * u.segment<2>(2 * (nu - 1));
        }
      }
      double nrm = psi.norm();
      if (nrm == 0.0) {
        throw Error(ErrorCode::numeric_failure, "vanishing extended bulk solution");
      }
      out.solutions.push_back(psi / nrm);
      ++out.extended;
    }
  }

  const int s0 = out.roots.s0;
  out.emergent = s0;
  if (s0 > 0) {
    const int rr = a.range;
    auto coeff_at = [&](int r) -> Matrix2 {
      if (std::abs(r) > rr) return Matrix2::Zero();
      return a.at(r);
    };
    Matrix kminus = Matrix::Zero(2 * s0, 2 * s0);
    Matrix kplus = Matrix::Zero(2 * s0, 2 * s0);
    for (int i = 1; i <= s0; ++i) {
      for (int j = 1; j <= s0; ++j) {
        kminus.block<2, 2>(2 * (i - 1), 2 * (j - 1)) = coeff_at((j - i) - rr);
        kplus.block<2, 2>(2 * (i - 1), 2 * (j - 1)) = coeff_at((j - i) + rr);
      }
    }
    auto left = expected_kernel(kminus, s0, "left emergent sector");
    auto right = expected_kernel(kplus, s0, "right emergent sector");
    for (const auto& u : left) {
      Vector psi = Vector::Zero(2 * sites);
      for (int j = 1; j <= s0; ++j) psi.segment<2>(2 * (j - 1)) = u.segment<2>(2 * (j - 1));
      out.solutions.push_back(psi.normalized());
    }
    for (const auto& u : right) {
      Vector psi = Vector::Zero(2 * sites);
      for (int j = 1; j <= s0; ++j) {
        psi.segment<2>(2 * (sites - s0 + j - 1)) = u.segment<2>(2 * (j - 1));
      }
      out.solutions.push_back(psi.normalized());
    }
  }
  return out;
}

}  // namespace

RootSet characteristic_roots(const MatrixLaurent& poly, Complex omega, double cluster_tol) {
  return roots_of(shift_by_omega(poly, omega), cluster_tol);
}

RootSet characteristic_roots(const BbtSpec& spec, Complex omega, double cluster_tol) {
  spec.validate();
  return characteristic_roots(bulk_polynomial(spec), omega, cluster_tol);
}

BulkBasis bulk_solution_basis(const BbtSpec& spec, Complex omega, const Tolerances& tol) {
  spec.validate();
  MatrixLaurent a = shift_by_omega(bulk_polynomial(spec), omega);
  GenericBulkBasis generic = solve_bulk(a, spec.sites, 1e-7);
  BulkBasis out;
  out.omega = omega;
  out.roots = generic.roots;
  out.solutions = std::move(generic.solutions);
  out.extended_count = generic.extended;
  out.emergent_count = generic.emergent;
  int expected = 4 * spec.range;
  if (out.total() != expected) {
    std::ostringstream msg;
    msg << "bulk solution count " << out.total() << " != 4R = " << expected
        << " (singular omega or numerical breakdown)";
    throw Error(ErrorCode::numeric_failure, msg.str());
  }
  (void)tol;
  return out;
}

Matrix boundary_matrix(const BbtSpec& spec, Complex omega, const BulkBasis& basis) {
  const int rr = spec.range;
  std::vector<int> sites;
  for (int b = 1; b <= rr; ++b) sites.push_back(b);
  for (int b = spec.sites - rr + 1; b <= spec.sites; ++b) sites.push_back(b);
  Matrix b(2 * sites.size(), basis.total());
  for (int s = 0; s < basis.total(); ++s) {
    Vector image = spec.apply(basis.solutions[static_cast<size_t>(s)]) -
                   omega * basis.solutions[static_cast<size_t>(s)];
    for (size_t row = 0; row < sites.size(); ++row) {
      b.block<2, 1>(2 * static_cast<int>(row), s) = image.segment<2>(2 * (sites[row] - 1));
    }
  }
  return b;
}

namespace {

// Orthonormal basis of the span of the bulk solutions. Fictitious det-B
// zeros come from the Ansatz losing rank, never from a genuine eigenvector,
// so the boundary condition is imposed on this basis instead.
Matrix orthonormal_span(const std::vector<Vector>& solutions, double drop_tol = 1e-10) {
  Matrix psi(solutions.front().size(), static_cast<Eigen::Index>(solutions.size()));
  for (size_t s = 0; s < solutions.size(); ++s) psi.col(static_cast<Eigen::Index>(s)) = solutions[s];
  Eigen::ColPivHouseholderQR<Matrix> qr(psi);
  int rank = 0;
  double rmax = std::abs(qr.matrixR()(0, 0));
  for (Eigen::Index i = 0; i < std::min(psi.rows(), psi.cols()); ++i) {
    if (std::abs(qr.matrixR()(i, i)) > drop_tol * rmax) ++rank;
  }
  Matrix q = qr.householderQ() * Matrix::Identity(psi.rows(), rank);
  return q;
}

// Boundary rows of (G - w) applied to each column.
Matrix boundary_rows(const BbtSpec& spec, Complex omega, const Matrix& columns, int slab) {
  std::vector<int> sites;
  for (int b = 1; b <= slab; ++b) sites.push_back(b);
  for (int b = std::max(spec.sites - slab + 1, slab + 1); b <= spec.sites; ++b) sites.push_back(b);
  Matrix out(2 * sites.size(), columns.cols());
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    Vector image = spec.apply(columns.col(c)) - omega * columns.col(c);
    for (size_t row = 0; row < sites.size(); ++row) {
      out.block<2, 1>(2 * static_cast<int>(row), c) = image.segment<2>(2 * (sites[row] - 1));
    }
  }
  return out;
}

struct BoundaryProbe {
  double merit = std::numeric_limits<double>::infinity();
  Complex det = 0;
  bool has_det = false;
  bool valid = false;
};

BoundaryProbe probe_boundary(const BbtSpec& spec, Complex omega) {
  BoundaryProbe out;
  try {
    BulkBasis basis = bulk_solution_basis(spec, omega);
    Matrix q = orthonormal_span(basis.solutions);
    Matrix b = boundary_rows(spec, omega, q, spec.range);
    Eigen::JacobiSVD<Matrix> svd(b);
    const auto& sv = svd.singularValues();
    double smax = sv(0);
    out.merit = smax > 0 ? sv(sv.size() - 1) / smax : 0.0;
    if (b.rows() == b.cols()) {
      out.det = b.determinant() / std::max(std::pow(smax, double(b.rows())), 1e-300);
      out.has_det = true;
    }
    out.valid = true;
  } catch (const Error&) {
    out.valid = false;
  }
  return out;
}

Complex refine_candidate(const BbtSpec& spec, Complex seed, double step, double target,
                         double* final_merit) {
  // complex secant on the normalized determinant, with a pattern-search
  // fallback when the secant stalls
  Complex w0 = seed;
  Complex w1 = seed + Complex(step, 0);
  BoundaryProbe p0 = probe_boundary(spec, w0);
  BoundaryProbe p1 = probe_boundary(spec, w1);
  Complex best = p0.merit < p1.merit ? w0 : w1;
  double best_merit = std::min(p0.merit, p1.merit);
  for (int iter = 0; iter < 60 && best_merit > target; ++iter) {
    if (!p0.valid || !p1.valid || !p0.has_det || !p1.has_det || p0.det == p1.det) break;
    Complex w2 = w1 - p1.det * (w1 - w0) / (p1.det - p0.det);
    if (!std::isfinite(w2.real()) || !std::isfinite(w2.imag())) break;
    if (std::abs(w2 - w1) > 4 * step) {
      w2 = w1 + 4 * step * (w2 - w1) / std::abs(w2 - w1);
    }
    BoundaryProbe p2 = probe_boundary(spec, w2);
    if (!p2.valid) break;
    if (p2.merit < best_merit) {
      best_merit = p2.merit;
      best = w2;
    } else if (p2.merit > 10 * best_merit && iter > 4) {
      break;
    }
    w0 = w1;
    p0 = p1;
    w1 = w2;
    p1 = p2;
  }
  // pattern search polish
  double h = step;
  Complex center = best;
  while (h > 1e-15 && best_merit > target * 1e-4) {
    bool moved = false;
    for (Complex dir : {Complex(1, 0), Complex(-1, 0), Complex(0, 1), Complex(0, -1),
                        Complex(1, 1), Complex(1, -1), Complex(-1, 1), Complex(-1, -1)}) {
      BoundaryProbe p = probe_boundary(spec, center + h * dir);
      if (p.valid && p.merit < best_merit) {
        best_merit = p.merit;
        center = center + h * dir;
        moved = true;
      }
    }
    if (!moved) h /= 2;
  }
  *final_merit = best_merit;
  return center;
}

}  // namespace

int EigenSearchResult::total_multiplicity() const {
  int total = 0;
  for (const auto& p : pairs) total += static_cast<int>(p.vectors.size());
  return total;
}

EigenSearchResult eigen_search(const BbtSpec& spec, const SearchDomain& domain,
                               const Tolerances& tol) {
  spec.validate();
  EigenSearchResult out;
  const Matrix dense = spec.dense();
  const double gscale = matrix_scale(dense);

  std::vector<Complex> seeds = domain.candidates;
  double grid_step = 0.05;
  if (domain.use_grid) {
    const int nr = std::max(domain.re_points, 2);
    const int ni = std::max(domain.im_points, 1);
    const double dre = (domain.re_max - domain.re_min) / (nr - 1);
    const double dim = ni > 1 ? (domain.im_max - domain.im_min) / (ni - 1) : 0.0;
    grid_step = std::max({dre, dim, 1e-6});
    Eigen::MatrixXd merits(nr, ni);
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < ni; ++j) {
        Complex w(domain.re_min + i * dre, domain.im_min + j * dim);
        merits(i, j) = probe_boundary(spec, w).merit;
      }
    }
    // seeds: grid local minima, plus every low-merit point -- adjacent
    // eigenvalue basins can share one monotone slope at grid resolution,
    // leaving all but one of them without a local minimum
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < ni; ++j) {
        double m = merits(i, j);
        if (!std::isfinite(m)) continue;
        bool is_min = true;
        for (int di = -1; di <= 1 && is_min; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            int a = i + di, b = j + dj;
            if (a < 0 || a >= nr || b < 0 || b >= ni) continue;
            if (merits(a, b) < m) {
              is_min = false;
              break;
            }
          }
        }
        if (is_min || m < 0.02) {
          seeds.emplace_back(domain.re_min + i * dre, domain.im_min + j * dim);
        }
      }
    }
  }

  std::vector<std::pair<Complex, double>> accepted;  // (omega, merit)
  for (Complex seed : seeds) {
    double merit = std::numeric_limits<double>::infinity();
    Complex w = refine_candidate(spec, seed, grid_step * 0.5, tol.boundary, &merit);
    if (!(merit <= tol.boundary)) continue;
    bool duplicate = false;
    for (auto& known : accepted) {
      if (std::abs(known.first - w) <= 100 * tol.cluster * std::max(1.0, gscale)) {
        duplicate = true;
        if (merit < known.second) {
          known.first = w;
          known.second = merit;
        }
        break;
      }
    }
    if (!duplicate) accepted.emplace_back(w, merit);
  }

  std::sort(accepted.begin(), accepted.end(), [](const auto& a, const auto& b) {
    if (a.first.real() != b.first.real()) return a.first.real() < b.first.real();
    return a.first.imag() < b.first.imag();
  });

  for (const auto& [w, merit] : accepted) {
    BulkBasis basis;
    try {
      basis = bulk_solution_basis(spec, w, tol);
    } catch (const Error& e) {
      out.diagnostics.push_back("bulk basis failed at accepted omega: " + std::string(e.what()));
      continue;
    }
    Matrix q = orthonormal_span(basis.solutions);
    Matrix b = boundary_rows(spec, w, q, spec.range);
    Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = std::max(sv(0), 1e-300);
    EigenSearchResult::Eigenpair pair;
    pair.omega = w;
    for (int k = static_cast<int>(sv.size()) - 1; k >= 0; --k) {
      if (sv(k) / smax > 10 * tol.boundary) break;
      Vector psi = q * svd.matrixV().col(k);
      double res = (spec.apply(psi) - w * psi).norm() / gscale;
      if (res <= tol.residual) {
        pair.vectors.push_back(psi);
      } else {
        std::ostringstream msg;
        msg << "candidate at (" << w.real() << ", " << w.imag()
            << ") rejected by dense residual " << res;
        out.diagnostics.push_back(msg.str());
      }
    }
    if (!pair.vectors.empty()) out.pairs.push_back(std::move(pair));
  }
  return out;
}

std::vector<Vector> generalized_kernel(const BbtSpec& spec, Complex omega, int power,
                                       const Tolerances& tol) {
  spec.validate();
  if (power < 1) {
    throw Error(ErrorCode::invalid_argument, "power must be positive");
  }
  const double p_max = double(spec.sites - 1) / double(spec.range);
  if (double(power) >= p_max) {
    throw Error(ErrorCode::unsupported,
                "power " + std::to_string(power) +
                    " exceeds BBT structure (p_max = (N-1)/R); fall back to dense");
  }
  MatrixLaurent a = shift_by_omega(bulk_polynomial(spec), omega);
  MatrixLaurent ap = laurent_power(a, power);
  GenericBulkBasis bulk = solve_bulk(ap, spec.sites, 1e-7);

  // boundary rows of (G - w)^p applied matrix-free to the orthonormalized Ansatz
  const int prr = spec.range * power;
  std::vector<int> bsites;
  for (int b = 1; b <= prr; ++b) bsites.push_back(b);
  for (int b = std::max(spec.sites - prr + 1, prr + 1); b <= spec.sites; ++b) bsites.push_back(b);
  Matrix q = orthonormal_span(bulk.solutions);
  Matrix b(2 * bsites.size(), q.cols());
  const double gscale = matrix_scale(spec.dense());
  const double power_scale = std::pow(gscale + std::abs(omega), power);
  for (Eigen::Index s = 0; s < q.cols(); ++s) {
    Vector image = q.col(s);
    for (int k = 0; k < power; ++k) {
      image = spec.apply(image) - omega * image;
    }
    for (size_t row = 0; row < bsites.size(); ++row) {
      b.block<2, 1>(2 * static_cast<int>(row), s) = image.segment<2>(2 * (bsites[row] - 1));
    }
  }
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? std::max(sv(0), 1e-300) : 1.0;
  std::vector<Vector> kernel;
  for (int k = static_cast<int>(sv.size()) - 1; k >= 0; --k) {
    if (sv(k) / smax > 10 * tol.boundary) break;
    Vector psi = q * svd.matrixV().col(k);
    // verified against the dense power action
    Vector image = psi;
    for (int j = 0; j < power; ++j) image = spec.apply(image) - omega * image;
    if (image.norm() <= tol.residual * power_scale) kernel.push_back(psi);
  }
  std::reverse(kernel.begin(), kernel.end());
  return kernel;
}

}  // namespace ks
