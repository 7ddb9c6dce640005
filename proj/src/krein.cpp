#include "kreinstab/krein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "kreinstab/nambu.hpp"

namespace ks {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ClusterScan {
  std::vector<int> members;
  Complex value;
  bool real = false;
};

std::vector<ClusterScan> scan_clusters(const SpectrumReport& rep, const Tolerances& tol) {
  std::vector<ClusterScan> out(rep.cluster_count());
  const double band = tol.realness * rep.scale;
  for (int c = 0; c < rep.cluster_count(); ++c) {
    out[c].value = rep.cluster_value[c];
    out[c].real = std::abs(rep.cluster_value[c].imag()) <= band;
  }
  for (int i = 0; i < rep.size(); ++i) out[rep.cluster[i]].members.push_back(i);
  return out;
}

// Diagonalize the Hermitian tau3 Gram form on an eigenspace; returns the
// transformed vectors and the (real) Gram eigenvalues.
void gram_diagonalize(const Matrix& vectors, Matrix& out_vectors, RealVector& out_values) {
  Matrix gram = tau3_gram(vectors);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (gram + gram.adjoint()));
  out_vectors = vectors * es.eigenvectors();
  out_values = es.eigenvalues();
}

StabilityVerdict stability_from_spectrum(const Matrix& g, const SpectrumReport& rep,
                                         const Tolerances& tol,
                                         std::vector<Complex>* defective_out) {
  StabilityVerdict verdict;
  verdict.max_imag = 0.0;
  bool all_real = true;
  for (int i = 0; i < rep.size(); ++i) {
    verdict.max_imag = std::max(verdict.max_imag, std::abs(rep.eigenvalues(i).imag()));
    if (!rep.realness[i]) all_real = false;
  }
  bool indeterminate = false;
  std::vector<bool> done(rep.cluster_count(), false);
  const int dim = rep.size();
  for (int i = 0; i < dim; ++i) {
    int c = rep.cluster[i];
    if (done[c]) continue;
    done[c] = true;
    if (rep.algebraic_mult[i] == 1) continue;
    Matrix shifted = g - rep.cluster_value[c] * Matrix::Identity(dim, dim);
    RankDecision rk = numerical_rank(shifted, tol);
    if (rk.status == RankStatus::indeterminate) indeterminate = true;
    if (dim - rk.rank < rep.algebraic_mult[i]) {
      verdict.defective_eigenvalues.push_back(rep.cluster_value[c]);
    }
  }
  if (defective_out) *defective_out = verdict.defective_eigenvalues;
  if (indeterminate && all_real && verdict.defective_eigenvalues.empty()) {
    verdict.state = StabilityState::indeterminate;
  } else if (all_real && verdict.defective_eigenvalues.empty()) {
    verdict.state = StabilityState::stable;
  } else {
    verdict.state = StabilityState::unstable;
  }
  return verdict;
}

}  // namespace

int krein_signature(const Vector& v, double null_tol) {
  const double nrm2 = v.squaredNorm();
  if (nrm2 == 0.0) {
    throw Error(ErrorCode::invalid_argument, "Krein signature of the zero vector");
  }
  const double s = tau3_inner(v, v).real();
  if (std::abs(s) <= null_tol * nrm2) return 0;
  return s > 0 ? 1 : -1;
}

ModalBasis tau3_normalize_modes(const Matrix& g, const SpectrumReport& rep,
                                const Tolerances& tol) {
  (void)g;  // the report carries everything; kept for the documented signature
  ModalBasis out;
  out.eigenvalues = rep.eigenvalues;
  out.vectors = rep.right_vectors;
  out.signature.assign(rep.size(), 0);
  out.partner.assign(rep.size(), -1);
  out.realness = rep.realness;

  auto clusters = scan_clusters(rep, tol);
  std::vector<bool> processed(clusters.size(), false);
  for (size_t c = 0; c < clusters.size(); ++c) {
    if (processed[c]) continue;
    const auto& cl = clusters[c];
    const int m = static_cast<int>(cl.members.size());
    if (cl.real) {
      processed[c] = true;
      Matrix vecs(rep.size(), m);
      for (int i = 0; i < m; ++i) vecs.col(i) = rep.right_vectors.col(cl.members[i]);
      Matrix diag;
      RealVector vals;
      gram_diagonalize(vecs, diag, vals);
      for (int i = 0; i < m; ++i) {
        double norm2 = diag.col(i).squaredNorm();
        if (std::abs(vals(i)) <= tol.signature_null * norm2) {
          std::ostringstream msg;
          msg << "non-normalizable mode at omega = " << cl.value.real();
          throw Error(ErrorCode::numeric_failure, msg.str());
        }
        const double sgn = vals(i) > 0 ? 1.0 : -1.0;
        out.vectors.col(cl.members[i]) = diag.col(i) / std::sqrt(std::abs(vals(i)));
        out.signature[cl.members[i]] = static_cast<int>(sgn);
        out.partner[cl.members[i]] = cl.members[i];
      }
    } else {
      if (cl.value.imag() < 0) continue;  // handled together with the conjugate
      size_t cc = clusters.size();
      for (size_t k = 0; k < clusters.size(); ++k) {
        if (k != c && std::abs(clusters[k].value - std::conj(cl.value)) <=
                          10 * tol.cluster * rep.scale) {
          cc = k;
          break;
        }
      }
      if (cc == clusters.size() || clusters[cc].members.size() != cl.members.size()) {
        throw Error(ErrorCode::numeric_failure,
                    "complex eigenvalue lacks a matching conjugate eigenspace");
      }
      processed[c] = processed[cc] = true;
      const auto& cl2 = clusters[cc];
      Matrix vu(rep.size(), m), vl(rep.size(), m);
      for (int i = 0; i < m; ++i) {
        vu.col(i) = rep.right_vectors.col(cl.members[i]);
        vl.col(i) = rep.right_vectors.col(cl2.members[i]);
      }
      // biorthogonalize: <psi*_i | tau3 | psi_j> = delta_ij
      Matrix cross = vl.adjoint() * apply_tau3_left(vu);
      Eigen::FullPivLU<Matrix> lu(cross);
      if (!lu.isInvertible()) {
        throw Error(ErrorCode::numeric_failure,
                    "pseudo-boson pairing is singular (exceptional point?)");
      }
      vu = vu * lu.inverse();
      for (int i = 0; i < m; ++i) {
        // equal-norm convention: psi -> z psi, psi_* -> psi_*/z
        double z = std::sqrt(vl.col(i).norm() / vu.col(i).norm());
        out.vectors.col(cl.members[i]) = z * vu.col(i);
        out.vectors.col(cl2.members[i]) = vl.col(i) / z;
        out.partner[cl.members[i]] = cl2.members[i];
        out.partner[cl2.members[i]] = cl.members[i];
        out.signature[cl.members[i]] = 0;
        out.signature[cl2.members[i]] = 0;
      }
    }
  }
  return out;
}

double kpr(const Matrix& g, Complex omega, const Vector& psi, const Tolerances& tol) {
  const int dim = static_cast<int>(g.rows());
  const double pnorm = psi.norm();
  if (pnorm == 0.0) {
    throw Error(ErrorCode::invalid_argument, "KPR of the zero vector");
  }
  Matrix shifted = g - omega * Matrix::Identity(dim, dim);
  // precondition: psi must not lie in range(G - omega)
  Vector ls = shifted.completeOrthogonalDecomposition().solve(psi);
  double range_res = (shifted * ls - psi).norm() / pnorm;
  if (range_res <= tol.rank) {
    throw Error(ErrorCode::numeric_failure,
                "eigenvector lies in range(G - omega); KPR undefined at an exceptional point");
  }
  const double scale = matrix_scale(g);
  if (std::abs(omega.imag()) <= tol.realness * scale) {
    const double s = std::abs(tau3_inner(psi, psi).real());
    if (s <= tol.signature_null * pnorm * pnorm) {
      throw Error(ErrorCode::numeric_failure,
                  "tau3-null real mode; bi-orthonormal partner construction fails");
    }
    double r = s / (pnorm * pnorm);
    return std::min(r, 1.0);
  }
  // complex omega: partner from the eigenspace at conj(omega)
  Matrix conj_shifted = g - std::conj(omega) * Matrix::Identity(dim, dim);
  Matrix q = kernel_basis(conj_shifted, tol);
  if (q.cols() == 0) {
    throw Error(ErrorCode::numeric_failure, "no eigenspace at conj(omega)");
  }
  Vector coeff = q.adjoint() * apply_tau3(psi);
  double r = coeff.norm() / pnorm;
  return std::min(r, 1.0);
}

PhaseRigidity phase_rigidity_symmetric(const Matrix& m, const Vector& psi, double null_tol) {
  double sym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (sym > 1e-10 * matrix_scale(m)) {
    throw Error(ErrorCode::invalid_argument, "phase rigidity requires a symmetric matrix");
  }
  PhaseRigidity out;
  const double nrm2 = psi.squaredNorm();
  Complex self = psi.conjugate().dot(psi);  // <psi^*|psi> = sum psi_i^2
  if (std::abs(self) <= null_tol * nrm2) {
    out.rho = 0.0;
    out.ep_flag = true;
    return out;
  }
  out.rho = std::min(std::abs(self) / nrm2, 1.0);
  return out;
}

KreinReport analyze_krein(const Matrix& g, const SpectrumReport& rep, const Tolerances& tol) {
  KreinReport report;
  report.eigenvalues = rep.eigenvalues;
  report.realness = rep.realness;
  report.signature.assign(rep.size(), 0);
  report.definiteness.assign(rep.size(), Definiteness::indefinite);
  report.collision.assign(rep.size(), false);
  report.kpr_values.assign(rep.size(), kNaN);
  report.kpr_contour_dependent.assign(rep.size(), false);
  report.indeterminate_inertia.assign(rep.size(), false);

  auto clusters = scan_clusters(rep, tol);
  for (const auto& cl : clusters) {
    const int m = static_cast<int>(cl.members.size());
    if (!cl.real) continue;
    Matrix vecs(rep.size(), m);
    for (int i = 0; i < m; ++i) vecs.col(i) = rep.right_vectors.col(cl.members[i]);
    Matrix diag;
    RealVector vals;
    gram_diagonalize(vecs, diag, vals);
    int pos = 0, neg = 0, nul = 0;
    for (int i = 0; i < m; ++i) {
      double norm2 = diag.col(i).squaredNorm();
      int sgn = std::abs(vals(i)) <= tol.signature_null * norm2 ? 0 : (vals(i) > 0 ? 1 : -1);
      (sgn > 0 ? pos : (sgn < 0 ? neg : nul))++;
      report.signature[cl.members[i]] = sgn;
      report.kpr_values[cl.members[i]] = std::abs(vals(i)) / norm2;
    }
    bool collided = pos > 0 && neg > 0;
    // a null Gram direction inside a real eigenspace signals a defective point
    bool geo_full = rep.geometric_mult[cl.members[0]] >= rep.algebraic_mult[cl.members[0]];
    for (int i = 0; i < m; ++i) {
      int idx = cl.members[i];
      report.definiteness[idx] = collided || nul > 0
                                     ? Definiteness::indefinite
                                     : (pos > 0 ? Definiteness::positive : Definiteness::negative);
      report.collision[idx] = collided;
      report.kpr_contour_dependent[idx] = collided;
      report.indeterminate_inertia[idx] = nul > 0 && geo_full;
    }
    if (collided) report.collided_eigenvalues.push_back(cl.value);
  }

  // complex eigenvalues: KPR via the conjugate-eigenspace projection
  for (int i = 0; i < rep.size(); ++i) {
    if (rep.realness[i]) continue;
    try {
      report.kpr_values[i] = kpr(g, rep.eigenvalues(i), rep.right_vectors.col(i), tol);
    } catch (const Error&) {
      report.kpr_values[i] = kNaN;
    }
  }

  StabilityVerdict verdict = stability_from_spectrum(g, rep, tol, &report.defective_eigenvalues);
  report.dynamically_stable = verdict.state == StabilityState::stable;
  report.stability_indeterminate = verdict.state == StabilityState::indeterminate;
  report.max_imag = verdict.max_imag;
  report.thermodynamically_stable_sufficient =
      thermodynamic_stability_sufficient(apply_tau3_left(g), tol.validation);
  return report;
}

std::vector<Complex> detect_krein_collisions(const Matrix& g, const SpectrumReport& rep,
                                             const Tolerances& tol) {
  return analyze_krein(g, rep, tol).collided_eigenvalues;
}

TransitionClassification classify_transition(const std::function<Matrix(double)>& family,
                                             double critical, double probe_radius,
                                             const Tolerances& tol) {
  TransitionClassification out;
  Matrix g = family(critical);
  SpectrumReport rep = eigendecompose(g, tol);
  std::vector<Complex> defective;
  StabilityVerdict verdict = stability_from_spectrum(g, rep, tol, &defective);
  KreinReport krein = analyze_krein(g, rep, tol);

  std::ostringstream evidence;
  if (verdict.state == StabilityState::indeterminate) {
    out.kind = TransitionKind::indeterminate;
    evidence << "rank decision indeterminate at the critical point";
    out.evidence = evidence.str();
    return out;
  }

  // collisions at eigenvalues that are not themselves defective
  std::vector<Complex> pure_collisions;
  for (Complex w : krein.collided_eigenvalues) {
    bool also_defective = false;
    for (Complex d : defective) {
      if (std::abs(d - w) <= 10 * tol.cluster * rep.scale) also_defective = true;
    }
    if (!also_defective) pure_collisions.push_back(w);
  }

  if (!defective.empty() && !pure_collisions.empty()) {
    out.kind = TransitionKind::both;
    out.eigenvalue = defective.front();
  } else if (!defective.empty()) {
    out.kind = TransitionKind::exceptional_point;
    out.eigenvalue = defective.front();
  } else if (!krein.collided_eigenvalues.empty()) {
    out.kind = TransitionKind::krein_collision;
    out.eigenvalue = krein.collided_eigenvalues.front();
  } else {
    out.kind = TransitionKind::none;
  }

  evidence << "defective=" << defective.size() << " collisions=" << krein.collided_eigenvalues.size();
  if (probe_radius > 0) {
    for (double side : {-probe_radius, probe_radius}) {
      evidence << (side < 0 ? " left=" : " right=");
      try {
        StabilityVerdict nearby = dynamical_stability(family(critical + side), tol);
        evidence << (nearby.state == StabilityState::stable
                         ? "stable"
                         : (nearby.state == StabilityState::unstable ? "unstable"
                                                                     : "indeterminate"));
      } catch (const Error&) {
        evidence << "out-of-domain";
      }
    }
  }
  out.evidence = evidence.str();
  return out;
}

StabilityVerdict dynamical_stability(const Matrix& g, const Tolerances& tol) {
  SpectrumReport rep = eigendecompose(g, tol);
  return stability_from_spectrum(g, rep, tol, nullptr);
}

bool thermodynamic_stability_sufficient(const Matrix& h, double tol) {
  double herm = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-8 * matrix_scale(h)) {
    throw Error(ErrorCode::invalid_argument, "thermodynamic test requires a Hermitian matrix");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol * matrix_scale(h);
}

GptSymmetry construct_gpt_symmetry(const Matrix& g, const Tolerances& tol) {
  CanonicalBasis cb = canonicalize_jordan_basis(g, tol);
  const int dim = static_cast<int>(g.rows());
  GptSymmetry out;
  out.basis = cb.basis;
  out.pairing.resize(cb.chains.size());
  for (size_t j = 0; j < cb.chains.size(); ++j) out.pairing[j] = cb.chains[j].partner;

  // P permutes chain columns to the partner chain, rank by rank
  Matrix perm = Matrix::Zero(dim, dim);
  for (size_t j = 0; j < cb.chains.size(); ++j) {
    const auto& ca = cb.chains[j];
    const auto& cbp = cb.chains[ca.partner];
    for (int k = 0; k < ca.length; ++k) {
      perm(cbp.first_column + k, ca.first_column + k) = 1.0;
    }
  }
  Eigen::PartialPivLU<Matrix> lu(cb.basis);
  Matrix binv = lu.inverse();
  out.s_matrix = cb.basis * perm * binv.conjugate();
  out.commutation_residual =
      (g * out.s_matrix - out.s_matrix * g.conjugate()).cwiseAbs().maxCoeff() / matrix_scale(g);

  bool all_len1 = true, all_real = true;
  const double band = tol.realness * matrix_scale(g);
  for (const auto& c : cb.chains) {
    if (c.length != 1) all_len1 = false;
    if (std::abs(c.eigenvalue.imag()) > band) all_real = false;
  }
  out.unbroken = all_len1 && all_real;
  return out;
}

VacuumCheck vacuum_normalizability(const Matrix& l, double tol) {
  if (l.rows() != l.cols() || l.rows() % 2 != 0) {
    throw Error(ErrorCode::invalid_argument, "modal matrix must be 2N x 2N");
  }
  const int n = static_cast<int>(l.rows()) / 2;
  const double scale = matrix_scale(l);
  Matrix t3 = tau3(n);
  double unit_res = (l * t3 * l.adjoint() - t3).cwiseAbs().maxCoeff();
  if (unit_res > 1e-6 * scale * scale) {
    throw Error(ErrorCode::constraint_violation,
                "L is not tau3-unitary (residual " + std::to_string(unit_res) + ")");
  }
  Matrix t1 = tau1(n);
  double cc_res = (l.conjugate() - t1 * l * t1).cwiseAbs().maxCoeff();
  if (cc_res > 1e-6 * scale) {
    throw Error(ErrorCode::constraint_violation,
                "L does not satisfy L^* = tau1 L tau1 (residual " + std::to_string(cc_res) + ")");
  }
  Matrix x(n, n), y(n, n);
  for (int m = 0; m < n; ++m) {
    for (int j = 0; j < n; ++j) {
      x(m, j) = l(2 * m, 2 * j);
      y(m, j) = -l(2 * m, 2 * j + 1);
    }
  }
  Eigen::FullPivLU<Matrix> lu(x);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::numeric_failure,
                "X block is singular; L is not a canonical Bogoliubov transformation");
  }
  Matrix z = lu.solve(y);
  Eigen::JacobiSVD<Matrix> svd(z);
  VacuumCheck out;
  out.max_singular_value = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  out.normalizable = out.max_singular_value < 1.0 - tol;
  return out;
}

Matrix modal_matrix(const Matrix& g, const Tolerances& tol) {
  SpectrumReport rep = eigendecompose(g, tol);
  StabilityVerdict verdict = stability_from_spectrum(g, rep, tol, nullptr);
  if (verdict.state != StabilityState::stable) {
    throw Error(ErrorCode::invalid_argument,
                "canonical modal matrix requires a dynamically stable G");
  }
  ModalBasis modes = tau3_normalize_modes(g, rep, tol);
  const int dim = rep.size();
  const int n = dim / 2;
  // The negative-frequency side is generated by charge conjugation from the
  // omega >= 0 clusters; an independently diagonalized basis at -omega would
  // not be canonically paired.
  const double band = tol.realness * rep.scale;
  Matrix m(dim, dim);
  int col = 0;
  std::vector<bool> done(rep.cluster_count(), false);
  for (int i = 0; i < dim && col < dim; ++i) {
    int c = rep.cluster[i];
    if (done[c]) continue;
    done[c] = true;
    double value = rep.cluster_value[c].real();
    if (value < -band) continue;  // served from the +omega partner
    for (int idx : rep.cluster_members(c)) {
      if (col + 2 > dim) {
        throw Error(ErrorCode::numeric_failure, "modal pairing overflow");
      }
      if (modes.signature[idx] > 0) {
        m.col(col++) = modes.vectors.col(idx);
        m.col(col++) = charge_conjugate(modes.vectors.col(idx));
      } else if (value > band) {
        // negative-signature vector at +omega: its conjugate is the
        // positive mode at -omega
        m.col(col++) = charge_conjugate(modes.vectors.col(idx));
        m.col(col++) = modes.vectors.col(idx);
      }
      // negative-signature zero modes are the conjugates of positive ones
    }
  }
  if (col != dim) {
    throw Error(ErrorCode::numeric_failure,
                "modal pairing incomplete: " + std::to_string(col) + " of " +
                    std::to_string(dim) + " columns");
  }
  Matrix t3 = tau3(n);
  double res = (m.adjoint() * t3 * m - t3).cwiseAbs().maxCoeff();
  if (res > 1e-7 * dim) {
    throw Error(ErrorCode::numeric_failure,
                "modal matrix failed tau3-unitarity (residual " + std::to_string(res) + ")");
  }
  // L maps physical modes to normal modes: L = M^{-1} = tau3 M^dag tau3
  return apply_tau3_left(Matrix(m.adjoint() * t3));
}

}  // namespace ks
