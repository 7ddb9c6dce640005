#include "kreinstab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "kreinstab/nambu.hpp"

namespace ks {

namespace {

// Diagonal similarity with powers of two that equalizes row and column
// norms (Parlett-Reinsch). Boundary-localized eigenvectors make the raw
// matrix exponentially ill-conditioned for the QR sweep; the balancing
// similarity removes exactly that scaling.
RealVector balance_in_place(Matrix& a) {
  const Eigen::Index n = a.rows();
  RealVector d = RealVector::Ones(n);
  const double radix = 2.0;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      while (c < r / radix) {
        c *= radix;
        r /= radix;
        f *= radix;
      }
      while (c > r * radix) {
        c /= radix;
        r *= radix;
        f /= radix;
      }
      if (c + r < 0.95 * s) {
        converged = false;
        d(i) *= f;
        a.col(i) *= f;
        a.row(i) /= f;
      }
    }
  }
  return d;
}

void phase_fix(Vector& v) {
  const double mx = v.cwiseAbs().maxCoeff();
  if (mx == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8 * mx) {
      Complex phase = v(i) / std::abs(v(i));
      v /= phase;
      return;
    }
  }
}

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
  }
  return false;
}

// Single-linkage clustering of complex values with a fixed radius.
std::vector<int> single_linkage(const std::vector<Complex>& values, double radius) {
  const int n = static_cast<int>(values.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(values[i] - values[j]) <= radius) {
        int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<int> ids(n, -1);
  std::map<int, int> seen;
  int next = 0;
  for (int i = 0; i < n; ++i) {
    int root = find(i);
    auto it = seen.find(root);
    if (it == seen.end()) {
      seen[root] = next;
      ids[i] = next++;
    } else {
      ids[i] = it->second;
    }
  }
  return ids;
}

Eigen::JacobiSVD<Matrix> make_svd(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m, Eigen::ComputeThinU | Eigen::ComputeFullV);
}

}  // namespace

std::vector<int> SpectrumReport::cluster_members(int cluster_id) const {
  std::vector<int> members;
  for (int i = 0; i < size(); ++i) {
    if (cluster[i] == cluster_id) members.push_back(i);
  }
  return members;
}

Vector SpectrumReport::left_vector(int index) const {
  int src = realness[index] ? index : conj_partner[index];
  return apply_tau3(right_vectors.col(src));
}

SpectrumReport eigendecompose(const Matrix& g, const Tolerances& tol) {
  if (g.rows() != g.cols() || g.rows() % 2 != 0) {
    throw Error(ErrorCode::invalid_argument, "eigendecompose expects a 2N x 2N matrix");
  }
  const int dim = static_cast<int>(g.rows());
  SpectrumReport rep;
  rep.scale = matrix_scale(g);

  Matrix balanced = g;
  RealVector d = balance_in_place(balanced);
  Eigen::ComplexEigenSolver<Matrix> solver(balanced, true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::numeric_failure, "complex eigensolver failed to converge");
  }

  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Vector> vecs(dim);
  for (int i = 0; i < dim; ++i) {
    Vector v = solver.eigenvectors().col(i);
    for (int j = 0; j < dim; ++j) v(j) *= d(j);
    v.normalize();
    phase_fix(v);
    vecs[i] = std::move(v);
  }
  const auto& evs = solver.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (evs(a).real() != evs(b).real()) return evs(a).real() < evs(b).real();
    if (evs(a).imag() != evs(b).imag()) return evs(a).imag() < evs(b).imag();
    return lex_less(vecs[a], vecs[b]);
  });

  rep.eigenvalues.resize(dim);
  rep.right_vectors.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    rep.eigenvalues(i) = evs(order[i]);
    rep.right_vectors.col(i) = vecs[order[i]];
  }

  rep.realness.resize(dim);
  const double real_band = tol.realness * rep.scale;
  for (int i = 0; i < dim; ++i) {
    rep.realness[i] = std::abs(rep.eigenvalues(i).imag()) <= real_band;
  }

  std::vector<Complex> values(rep.eigenvalues.data(), rep.eigenvalues.data() + dim);
  rep.cluster = single_linkage(values, tol.cluster * rep.scale);
  int nclusters = *std::max_element(rep.cluster.begin(), rep.cluster.end()) + 1;
  rep.cluster_value.assign(nclusters, Complex(0, 0));
  std::vector<int> counts(nclusters, 0);
  for (int i = 0; i < dim; ++i) {
    rep.cluster_value[rep.cluster[i]] += values[i];
    ++counts[rep.cluster[i]];
  }
  for (int c = 0; c < nclusters; ++c) rep.cluster_value[c] /= double(counts[c]);

  rep.algebraic_mult.resize(dim);
  for (int i = 0; i < dim; ++i) rep.algebraic_mult[i] = counts[rep.cluster[i]];

  // geometric multiplicity per cluster; singleton clusters are trivially 1
  rep.geometric_mult.assign(dim, 1);
  for (int c = 0; c < nclusters; ++c) {
    if (counts[c] <= 1) continue;
    Matrix shifted = g - rep.cluster_value[c] * Matrix::Identity(dim, dim);
    RankDecision rk = numerical_rank(shifted, tol);
    int geo = dim - rk.rank;
    for (int i = 0; i < dim; ++i) {
      if (rep.cluster[i] == c) rep.geometric_mult[i] = geo;
    }
  }

  // conjugate partners: i-th member of a cluster maps to the i-th member of
  // the cluster at the conjugate value (itself for real eigenvalues)
  rep.conj_partner.assign(dim, -1);
  for (int c = 0; c < nclusters; ++c) {
    Complex w = rep.cluster_value[c];
    int target = -1;
    double best = tol.cluster * rep.scale * 10;
    for (int c2 = 0; c2 < nclusters; ++c2) {
      double dist = std::abs(rep.cluster_value[c2] - std::conj(w));
      if (dist < best) {
        best = dist;
        target = c2;
      }
    }
    std::vector<int> mine, partner;
    for (int i = 0; i < dim; ++i) {
      if (rep.cluster[i] == c) mine.push_back(i);
      if (target >= 0 && rep.cluster[i] == target) partner.push_back(i);
    }
    for (size_t k = 0; k < mine.size(); ++k) {
      rep.conj_partner[mine[k]] = (target >= 0 && k < partner.size()) ? partner[k] : mine[k];
    }
  }

  auto orbits = group_quartets(values, tol.cluster * rep.scale);
  rep.quartet.assign(dim, -1);
  for (size_t q = 0; q < orbits.size(); ++q) {
    for (int idx : orbits[q]) rep.quartet[idx] = static_cast<int>(q);
  }
  return rep;
}

std::vector<std::vector<int>> group_quartets(const std::vector<Complex>& eigenvalues,
                                             double cluster_radius) {
  const int n = static_cast<int>(eigenvalues.size());
  if (n == 0) return {};
  std::vector<int> cid = single_linkage(eigenvalues, cluster_radius);
  int nclusters = *std::max_element(cid.begin(), cid.end()) + 1;
  std::vector<Complex> rep(nclusters, Complex(0, 0));
  std::vector<int> count(nclusters, 0);
  for (int i = 0; i < n; ++i) {
    rep[cid[i]] += eigenvalues[i];
    ++count[cid[i]];
  }
  for (int c = 0; c < nclusters; ++c) rep[c] /= double(count[c]);

  auto locate = [&](Complex w) -> int {
    int best = -1;
    double bestd = cluster_radius * 4;
    for (int c = 0; c < nclusters; ++c) {
      double dist = std::abs(rep[c] - w);
      if (dist < bestd) {
        bestd = dist;
        best = c;
      }
    }
    return best;
  };

  std::vector<int> parent(nclusters);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  std::ostringstream unmatched;
  bool closed = true;
  for (int c = 0; c < nclusters; ++c) {
    for (Complex image : {std::conj(rep[c]), -std::conj(rep[c])}) {
      int target = locate(image);
      if (target < 0) {
        closed = false;
        unmatched << " " << rep[c].real() << (rep[c].imag() < 0 ? "-" : "+")
                  << std::abs(rep[c].imag()) << "i";
        continue;
      }
      int a = find(c), b = find(target);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  if (!closed) {
    throw Error(ErrorCode::numeric_failure,
                "eigenvalue multiset does not close under quartet symmetry; unmatched:" +
                    unmatched.str());
  }

  std::map<int, int> orbit_of_root;
  std::vector<std::vector<int>> orbits;
  for (int i = 0; i < n; ++i) {
    int root = find(cid[i]);
    auto it = orbit_of_root.find(root);
    int oid;
    if (it == orbit_of_root.end()) {
      oid = static_cast<int>(orbits.size());
      orbit_of_root[root] = oid;
      orbits.emplace_back();
    } else {
      oid = it->second;
    }
    orbits[oid].push_back(i);
  }
  return orbits;
}

RankDecision numerical_rank(const Matrix& m, const Tolerances& tol) {
  auto svd = make_svd(m);
  const auto& sv = svd.singularValues();
  const int n = static_cast<int>(sv.size());
  RankDecision out;
  if (n == 0) return out;
  const double smax = sv(0);
  if (smax == 0.0) {
    out.rank = 0;
    out.gap = std::numeric_limits<double>::infinity();
    return out;
  }
  const double cutoff = tol.rank * smax;
  int r = 0;
  while (r < n && sv(r) > cutoff) ++r;
  out.rank = r;
  if (r == n || sv(r) == 0.0) {
    out.gap = std::numeric_limits<double>::infinity();
    return out;
  }
  out.gap = r > 0 ? sv(r - 1) / sv(r) : smax / sv(0);
  if (out.gap < tol.rank_gap_floor) {
    // look for a decisive gap elsewhere before refusing to commit
    int best = -1;
    double best_gap = tol.rank_gap_floor;
    for (int i = 0; i + 1 < n; ++i) {
      if (sv(i + 1) == 0.0) {
        best = i;
        best_gap = std::numeric_limits<double>::infinity();
        break;
      }
      double gap = sv(i) / sv(i + 1);
      if (gap >= best_gap) {
        best = i;
        best_gap = gap;
      }
    }
    if (best >= 0) {
      out.rank = best + 1;
      out.gap = best_gap;
    } else {
      out.status = RankStatus::indeterminate;
    }
  }
  return out;
}

Matrix kernel_basis(const Matrix& m, const Tolerances& tol) {
  auto svd = make_svd(m);
  RankDecision rk = numerical_rank(m, tol);
  const int n = static_cast<int>(m.cols());
  const int dim = n - rk.rank;
  Matrix basis(n, dim);
  for (int i = 0; i < dim; ++i) {
    basis.col(i) = svd.matrixV().col(rk.rank + i);
  }
  return basis;
}

int JordanStructure::algebraic_multiplicity() const {
  int total = 0;
  for (int len : chain_lengths) total += len;
  return total;
}

JordanStructure detect_jordan_structure(const Matrix& g, Complex omega, const Tolerances& tol) {
  const int dim = static_cast<int>(g.rows());
  JordanStructure out;
  out.eigenvalue = omega;
  Matrix shifted = g - omega * Matrix::Identity(dim, dim);

  // Weyr sequence d_k = dim ker (G - w)^k until it stabilizes. Rank
  // decisions on powers carry an absolute floor from the accumulated
  // multiplication error, |E_k| <~ k eps |A|^k; without it, the rounding
  // residue left after an exactly nilpotent part dies reads as full rank.
  std::vector<int> kdims;
  std::vector<Matrix> kernels;
  Matrix power = Matrix::Identity(dim, dim);
  const double a_norm = shifted.operatorNorm();
  double norm_budget = 1.0;
  int prev = 0;
  for (int k = 1; k <= dim; ++k) {
    power = power * shifted;
    norm_budget *= std::max(a_norm, 1e-300);
    const double contamination =
        100.0 * double(k) * double(dim) * std::numeric_limits<double>::epsilon() * norm_budget;
    Eigen::JacobiSVD<Matrix> svd(power, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double cutoff = std::max(tol.rank * smax, contamination);
    int rank = 0;
    while (rank < dim && sv(rank) > cutoff) ++rank;
    if (rank > 0 && rank < dim && sv(rank) > contamination &&
        sv(rank - 1) / std::max(sv(rank), 1e-300) < tol.rank_gap_floor) {
      out.status = RankStatus::indeterminate;
      return out;
    }
    int dk = dim - rank;
    if (dk <= prev) break;  // stabilized
    kdims.push_back(dk);
    Matrix kernel(dim, dk);
    for (int i = 0; i < dk; ++i) kernel.col(i) = svd.matrixV().col(rank + i);
    kernels.push_back(std::move(kernel));
    prev = dk;
    if (dk >= dim) break;
  }
  if (kdims.empty()) {
    return out;  // omega is not an eigenvalue within tolerance
  }

  const int maxlen = static_cast<int>(kdims.size());
  auto nu = [&](int k) -> int {  // number of chains of length >= k
    if (k < 1 || k > maxlen) return 0;
    return kdims[k - 1] - (k >= 2 ? kdims[k - 2] : 0);
  };

  // Chains are built top-down: new tops at level k must be independent of
  // ker (G-w)^{k-1} and of the rank-k members of longer chains.
  std::vector<std::vector<Vector>> chains;
  double worst = 0.0;
  const double gscale = matrix_scale(g);
  for (int k = maxlen; k >= 1; --k) {
    int needed = nu(k) - nu(k + 1);
    if (needed <= 0) continue;
    std::vector<Vector> occupied;
    for (const auto& chain : chains) {
      if (static_cast<int>(chain.size()) >= k) occupied.push_back(chain[k - 1]);
    }
    const Matrix& kk = kernels[k - 1];
    int blocked_cols = (k >= 2 ? kdims[k - 2] : 0) + static_cast<int>(occupied.size());
    Matrix blocked(dim, blocked_cols);
    int col = 0;
    if (k >= 2) {
      blocked.leftCols(kdims[k - 2]) = kernels[k - 2];
      col = kdims[k - 2];
    }
    for (const auto& v : occupied) blocked.col(col++) = v.normalized();

    Matrix residual = kk;
    if (blocked_cols > 0) {
      Eigen::HouseholderQR<Matrix> qr(blocked);
      Matrix q = qr.householderQ() * Matrix::Identity(dim, blocked_cols);
      residual -= q * (q.adjoint() * kk);
    }
    auto svd = make_svd(residual);
    for (int t = 0; t < needed; ++t) {
      Vector top = Vector::Zero(dim);
      for (int j = 0; j < kk.cols(); ++j) top += svd.matrixV()(j, t) * kk.col(j);
      std::vector<Vector> chain(k);
      chain[k - 1] = top;
      for (int j = k - 1; j >= 1; --j) chain[j - 1] = shifted * chain[j];
      double mx = 0.0;
      for (const auto& v : chain) mx = std::max(mx, v.norm());
      if (chain[0].norm() < 1e-300 * mx || mx == 0.0) {
        throw Error(ErrorCode::numeric_failure, "degenerate Jordan chain descent");
      }
      for (auto& v : chain) v /= mx;
      worst = std::max(worst, (shifted * chain[0]).norm() / (gscale * chain[0].norm()));
      chains.push_back(std::move(chain));
    }
  }

  std::sort(chains.begin(), chains.end(),
            [](const auto& a, const auto& b) { return a.size() > b.size(); });
  for (const auto& chain : chains) out.chain_lengths.push_back(static_cast<int>(chain.size()));
  out.chains = std::move(chains);
  out.worst_residual = worst;
  return out;
}

DiagonalizabilityResult is_diagonalizable(const Matrix& g, const Tolerances& tol) {
  SpectrumReport rep = eigendecompose(g, tol);
  DiagonalizabilityResult out;
  out.diagonalizable = true;
  const int dim = rep.size();
  std::vector<bool> done(rep.cluster_count(), false);
  for (int i = 0; i < dim; ++i) {
    int c = rep.cluster[i];
    if (done[c]) continue;
    done[c] = true;
    if (rep.algebraic_mult[i] == 1) continue;
    Matrix shifted = g - rep.cluster_value[c] * Matrix::Identity(dim, dim);
    RankDecision rk = numerical_rank(shifted, tol);
    if (rk.status == RankStatus::indeterminate) {
      out.status = RankStatus::indeterminate;
    }
    int geo = dim - rk.rank;
    if (geo < rep.algebraic_mult[i]) {
      out.diagonalizable = false;
      if (!out.defective_eigenvalue) out.defective_eigenvalue = rep.cluster_value[c];
    }
  }
  return out;
}

Matrix tau3_gram(const Matrix& basis) { return basis.adjoint() * apply_tau3_left(basis); }

namespace {

// h(x_k, y_p) between two chains depends only on k+p; evaluate the moment at
// total index m using an in-range representative.
Complex chain_moment(const std::vector<Vector>& left, const std::vector<Vector>& right, int m) {
  const int r = static_cast<int>(left.size());
  const int s = static_cast<int>(right.size());
  int k = std::min(r, m - 1);
  int p = m - k;
  if (p < 1 || p > s) {
    p = std::min(s, m - 1);
    k = m - p;
  }
  if (k < 1 || k > r || p < 1 || p > s) {
    throw Error(ErrorCode::invalid_argument, "chain moment out of range");
  }
  return tau3_inner(left[k - 1], right[p - 1]);
}

// y_p -> y_p - c x_{p - shift}; chain-preserving since x_{<=0} = 0.
void chain_subtract(std::vector<Vector>& y, const std::vector<Vector>& x, Complex c, int shift) {
  for (int p = static_cast<int>(y.size()); p >= 1; --p) {
    int idx = p - shift;
    if (idx >= 1 && idx <= static_cast<int>(x.size())) {
      y[p - 1] -= c * x[idx - 1];
    }
  }
}

struct WorkingChain {
  std::vector<Vector> vecs;
  Complex eigenvalue;
  int sign = 0;
  int pair_tag = -1;  // links conjugate chains; -1 while unprocessed
};

// Self-paired (real eigenvalue) sector: brings chain moments to
// eps * delta_{m, r+1} one chain at a time, deflating the rest.
void canonicalize_real_cluster(std::vector<WorkingChain*> remaining, double tol_floor) {
  while (!remaining.empty()) {
    std::stable_sort(remaining.begin(), remaining.end(),
                     [](auto* a, auto* b) { return a->vecs.size() > b->vecs.size(); });
    const int r = static_cast<int>(remaining[0]->vecs.size());
    std::vector<WorkingChain*> tier;
    for (auto* c : remaining) {
      if (static_cast<int>(c->vecs.size()) == r) tier.push_back(c);
    }
    const int nt = static_cast<int>(tier.size());
    // leading-moment matrix among the longest chains (Hermitian because the
    // moments are symmetric under argument swap at fixed k+p)
    Matrix w(nt, nt);
    for (int i = 0; i < nt; ++i) {
      for (int j = 0; j < nt; ++j) {
        w(i, j) = chain_moment(tier[i]->vecs, tier[j]->vecs, r + 1);
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (w + w.adjoint()));
    if (es.eigenvalues().cwiseAbs().minCoeff() < tol_floor) {
      throw Error(ErrorCode::numeric_failure,
                  "degenerate leading pairing in Jordan canonicalization (worst residual " +
                      std::to_string(es.eigenvalues().cwiseAbs().minCoeff()) + ")");
    }
    if (nt > 1) {
      std::vector<std::vector<Vector>> mixed(nt);
      for (int i = 0; i < nt; ++i) {
        mixed[i].assign(r, Vector::Zero(tier[0]->vecs[0].size()));
        for (int k = 0; k < r; ++k) {
          for (int j = 0; j < nt; ++j) {
            mixed[i][k] += es.eigenvectors()(j, i) * tier[j]->vecs[k];
          }
        }
      }
      for (int i = 0; i < nt; ++i) tier[i]->vecs = std::move(mixed[i]);
    }

    for (auto* x : tier) {
      Complex lead = chain_moment(x->vecs, x->vecs, r + 1);
      if (std::abs(lead.real()) < tol_floor) {
        throw Error(ErrorCode::numeric_failure,
                    "vanishing leading moment in Jordan canonicalization (worst residual " +
                        std::to_string(std::abs(lead)) + ")");
      }
      const double eps = lead.real() >= 0 ? 1.0 : -1.0;
      const double scale = 1.0 / std::sqrt(std::abs(lead.real()));
      for (auto& v : x->vecs) v *= scale;
      x->sign = static_cast<int>(eps);
      for (int j = 1; j <= r - 1; ++j) {
        Complex mu = chain_moment(x->vecs, x->vecs, r + 1 + j);
        chain_subtract(x->vecs, x->vecs, 0.5 * mu / eps, j);
      }
      for (auto* other : remaining) {
        if (other == x) continue;
        const int s = static_cast<int>(other->vecs.size());
        for (int delta = 0; delta <= s - 1; ++delta) {
          Complex xi = chain_moment(x->vecs, other->vecs, r + 1 + delta);
          chain_subtract(other->vecs, x->vecs, xi / eps, delta);
        }
      }
      remaining.erase(std::find(remaining.begin(), remaining.end(), x));
    }
  }
}

// Conjugate pair of clusters: cross moments h(ybar_k, x_p) -> d_{k+p, r+1}
// between tagged partner chains, zero between everything else.
void canonicalize_conjugate_pair(std::vector<WorkingChain*> rem_u,
                                 std::vector<WorkingChain*> rem_l, double tol_floor,
                                 int& next_tag) {
  auto by_len = [](auto* a, auto* b) { return a->vecs.size() > b->vecs.size(); };
  while (!rem_u.empty()) {
    std::stable_sort(rem_u.begin(), rem_u.end(), by_len);
    std::stable_sort(rem_l.begin(), rem_l.end(), by_len);
    if (rem_l.empty() || rem_u[0]->vecs.size() != rem_l[0]->vecs.size()) {
      throw Error(ErrorCode::numeric_failure, "conjugate Jordan chains fail to match in length");
    }
    const int r = static_cast<int>(rem_u[0]->vecs.size());
    std::vector<WorkingChain*> tier_u, tier_l;
    for (auto* c : rem_u)
      if (static_cast<int>(c->vecs.size()) == r) tier_u.push_back(c);
    for (auto* c : rem_l)
      if (static_cast<int>(c->vecs.size()) == r) tier_l.push_back(c);
    if (tier_u.size() != tier_l.size()) {
      throw Error(ErrorCode::numeric_failure,
                  "conjugate Jordan chains fail to match in multiplicity");
    }
    const int nt = static_cast<int>(tier_u.size());
    Matrix w(nt, nt);
    for (int i = 0; i < nt; ++i) {
      for (int j = 0; j < nt; ++j) {
        w(i, j) = chain_moment(tier_l[i]->vecs, tier_u[j]->vecs, r + 1);
      }
    }
    Eigen::FullPivLU<Matrix> lu(w);
    if (!lu.isInvertible() || w.cwiseAbs().maxCoeff() < tol_floor) {
      throw Error(ErrorCode::numeric_failure,
                  "singular cross pairing between conjugate Jordan chains");
    }
    if (nt > 1) {
      Matrix winv = lu.inverse();
      std::vector<std::vector<Vector>> mixed(nt);
      for (int i = 0; i < nt; ++i) {
        mixed[i].assign(r, Vector::Zero(tier_u[0]->vecs[0].size()));
        for (int k = 0; k < r; ++k) {
          for (int j = 0; j < nt; ++j) mixed[i][k] += winv(j, i) * tier_u[j]->vecs[k];
        }
      }
      for (int i = 0; i < nt; ++i) tier_u[i]->vecs = std::move(mixed[i]);
    } else {
      Complex lead = w(0, 0);
      for (auto& v : tier_u[0]->vecs) v /= lead;
    }

    for (int i = 0; i < nt; ++i) {
      WorkingChain* x = tier_u[i];
      WorkingChain* y = tier_l[i];
      x->pair_tag = next_tag;
      y->pair_tag = next_tag;
      ++next_tag;
      for (int j = 1; j <= r - 1; ++j) {
        Complex mu = chain_moment(y->vecs, x->vecs, r + 1 + j);
        chain_subtract(x->vecs, x->vecs, mu, j);
      }
      for (auto* other : rem_u) {
        if (other->pair_tag >= 0) continue;
        const int s = static_cast<int>(other->vecs.size());
        for (int delta = 0; delta <= s - 1; ++delta) {
          Complex xi = chain_moment(y->vecs, other->vecs, r + 1 + delta);
          chain_subtract(other->vecs, x->vecs, xi, delta);
        }
      }
      for (auto* other : rem_l) {
        if (other->pair_tag >= 0) continue;
        const int s = static_cast<int>(other->vecs.size());
        for (int delta = 0; delta <= s - 1; ++delta) {
          Complex xi = chain_moment(other->vecs, x->vecs, r + 1 + delta);
          chain_subtract(other->vecs, y->vecs, std::conj(xi), delta);
        }
      }
    }
    auto purge = [](std::vector<WorkingChain*>& v) {
      v.erase(std::remove_if(v.begin(), v.end(), [](auto* c) { return c->pair_tag >= 0; }),
              v.end());
    };
    purge(rem_u);
    purge(rem_l);
  }
}

}  // namespace

CanonicalBasis canonicalize_jordan_basis(const Matrix& g, const Tolerances& tol) {
  const int dim = static_cast<int>(g.rows());
  SpectrumReport rep = eigendecompose(g, tol);
  const double gscale = matrix_scale(g);
  const double real_band = tol.realness * gscale;

  struct ClusterInfo {
    Complex value;
    std::vector<WorkingChain> chains;
  };
  std::vector<ClusterInfo> clusters;
  {
    std::vector<bool> seen(rep.cluster_count(), false);
    for (int i = 0; i < rep.size(); ++i) {
      int c = rep.cluster[i];
      if (seen[c]) continue;
      seen[c] = true;
      ClusterInfo info;
      info.value = rep.cluster_value[c];
      JordanStructure js = detect_jordan_structure(g, info.value, tol);
      if (js.status == RankStatus::indeterminate) {
        throw Error(ErrorCode::indeterminate,
                    "Jordan structure indeterminate during canonicalization");
      }
      if (js.algebraic_multiplicity() != rep.algebraic_mult[i]) {
        throw Error(ErrorCode::numeric_failure,
                    "Jordan chain count disagrees with eigenvalue multiplicity");
      }
      for (auto& chain : js.chains) {
        WorkingChain wc;
        wc.vecs = std::move(chain);
        wc.eigenvalue = info.value;
        info.chains.push_back(std::move(wc));
      }
      clusters.push_back(std::move(info));
    }
  }

  const double tol_floor = 1e6 * std::numeric_limits<double>::epsilon() * dim;
  int next_tag = 0;

  std::vector<bool> processed(clusters.size(), false);
  for (size_t ci = 0; ci < clusters.size(); ++ci) {
    if (processed[ci]) continue;
    if (std::abs(clusters[ci].value.imag()) <= real_band) {
      processed[ci] = true;
      std::vector<WorkingChain*> ptrs;
      for (auto& ch : clusters[ci].chains) ptrs.push_back(&ch);
      canonicalize_real_cluster(ptrs, tol_floor);
    } else {
      if (clusters[ci].value.imag() < 0) continue;  // driven from the upper half-plane
      size_t cj = clusters.size();
      double best = 10 * tol.cluster * gscale;
      for (size_t k = 0; k < clusters.size(); ++k) {
        if (k == ci) continue;
        double dist = std::abs(clusters[k].value - std::conj(clusters[ci].value));
        if (dist < best) {
          best = dist;
          cj = k;
        }
      }
      if (cj == clusters.size()) {
        throw Error(ErrorCode::numeric_failure, "missing conjugate eigenvalue cluster");
      }
      processed[ci] = processed[cj] = true;
      std::vector<WorkingChain*> up, lo;
      for (auto& ch : clusters[ci].chains) up.push_back(&ch);
      for (auto& ch : clusters[cj].chains) lo.push_back(&ch);
      canonicalize_conjugate_pair(up, lo, tol_floor, next_tag);
    }
  }

  CanonicalBasis out;
  out.basis.resize(dim, dim);
  int col = 0;
  std::vector<int> tags;
  for (auto& cluster : clusters) {
    for (auto& wc : cluster.chains) {
      CanonicalChain cc;
      cc.eigenvalue = wc.eigenvalue;
      cc.length = static_cast<int>(wc.vecs.size());
      cc.sign = wc.sign;
      cc.first_column = col;
      if (col + cc.length > dim) {
        throw Error(ErrorCode::numeric_failure, "generalized eigenbasis overflows dimension");
      }
      for (const auto& v : wc.vecs) out.basis.col(col++) = v;
      tags.push_back(wc.pair_tag);
      out.chains.push_back(cc);
    }
  }
  if (col != dim) {
    throw Error(ErrorCode::numeric_failure, "generalized eigenbasis is incomplete");
  }
  for (size_t a = 0; a < out.chains.size(); ++a) {
    if (tags[a] < 0) {
      out.chains[a].partner = static_cast<int>(a);  // self-paired (real eigenvalue)
      continue;
    }
    for (size_t b = 0; b < out.chains.size(); ++b) {
      if (b != a && tags[b] == tags[a]) {
        out.chains[a].partner = static_cast<int>(b);
        break;
      }
    }
  }

  // verify: signed antidiagonal pairing and chain identities
  Matrix gram = tau3_gram(out.basis);
  Matrix target = Matrix::Zero(dim, dim);
  for (const auto& ca : out.chains) {
    const auto& cb = out.chains[ca.partner];
    double eps = ca.sign != 0 ? static_cast<double>(ca.sign) : 1.0;
    for (int k = 1; k <= ca.length; ++k) {
      int p = ca.length + 1 - k;
      target(cb.first_column + k - 1, ca.first_column + p - 1) = eps;
    }
  }
  out.worst_pairing_residual = (gram - target).cwiseAbs().maxCoeff();

  double chain_res = 0.0;
  for (const auto& cc : out.chains) {
    Matrix shifted = g - cc.eigenvalue * Matrix::Identity(dim, dim);
    for (int k = 0; k < cc.length; ++k) {
      Vector expect = k == 0 ? Vector(Vector::Zero(dim))
                             : Vector(out.basis.col(cc.first_column + k - 1));
      double res = (shifted * out.basis.col(cc.first_column + k) - expect).norm() /
                   (gscale * out.basis.col(cc.first_column + k).norm());
      chain_res = std::max(chain_res, res);
    }
  }
  out.worst_chain_residual = chain_res;

  if (out.worst_pairing_residual > 1e-6 * dim) {
    throw Error(ErrorCode::numeric_failure,
                "tau3 pairing failed to canonicalize; worst residual " +
                    std::to_string(out.worst_pairing_residual));
  }
  return out;
}

}  // namespace ks
