#include "kreinstab/nambu.hpp"

#include <cmath>

namespace ks {

namespace {

void require_square(const Matrix& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::invalid_argument,
                std::string(name) + " must be square, got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
}

}  // namespace

ValidationReport validate_qbh(const QbhSpec& spec, double tol) {
  require_square(spec.hopping, "K");
  require_square(spec.pairing, "Delta");
  if (spec.hopping.rows() == 0) {
    throw Error(ErrorCode::invalid_argument, "mode count must be positive");
  }
  if (spec.hopping.rows() != spec.pairing.rows()) {
    throw Error(ErrorCode::invalid_argument, "K and Delta must share dimensions");
  }
  ValidationReport report;
  double herm = (spec.hopping - spec.hopping.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol) {
    report.violations.push_back({"K hermitian", herm});
  }
  double sym = (spec.pairing - spec.pairing.transpose()).cwiseAbs().maxCoeff();
  if (sym > tol) {
    report.violations.push_back({"Delta symmetric", sym});
  }
  return report;
}

Matrix tau1(int modes) {
  Matrix t = Matrix::Zero(2 * modes, 2 * modes);
  for (int i = 0; i < modes; ++i) {
    t(2 * i, 2 * i + 1) = 1.0;
    t(2 * i + 1, 2 * i) = 1.0;
  }
  return t;
}

Matrix tau2(int modes) {
  Matrix t = Matrix::Zero(2 * modes, 2 * modes);
  for (int i = 0; i < modes; ++i) {
    t(2 * i, 2 * i + 1) = Complex(0, -1);
    t(2 * i + 1, 2 * i) = Complex(0, 1);
  }
  return t;
}

Matrix tau3(int modes) {
  Matrix t = Matrix::Zero(2 * modes, 2 * modes);
  for (int i = 0; i < modes; ++i) {
    t(2 * i, 2 * i) = 1.0;
    t(2 * i + 1, 2 * i + 1) = -1.0;
  }
  return t;
}

Vector apply_tau1(const Vector& v) {
  if (v.size() % 2 != 0) {
    throw Error(ErrorCode::invalid_argument, "vector length must be even");
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); i += 2) {
    out(i) = v(i + 1);
    out(i + 1) = v(i);
  }
  return out;
}

Vector apply_tau3(const Vector& v) {
  if (v.size() % 2 != 0) {
    throw Error(ErrorCode::invalid_argument, "vector length must be even");
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); i += 2) {
    out(i) = v(i);
    out(i + 1) = -v(i + 1);
  }
  return out;
}

Matrix apply_tau3_left(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index i = 1; i < m.rows(); i += 2) {
    out.row(i) = -out.row(i);
  }
  return out;
}

Matrix build_single_particle_h(const QbhSpec& spec) {
  const int n = spec.modes();
  Matrix h = Matrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      h(2 * i, 2 * j) = spec.hopping(i, j);
      h(2 * i, 2 * j + 1) = spec.pairing(i, j);
      h(2 * i + 1, 2 * j) = std::conj(spec.pairing(i, j));
      h(2 * i + 1, 2 * j + 1) = std::conj(spec.hopping(i, j));
    }
  }
  return h;
}

Matrix build_effective_sph(const QbhSpec& spec, double validation_tol) {
  ValidationReport report = validate_qbh(spec, validation_tol);
  if (!report.ok()) {
    std::string msg = "invalid QBH spec:";
    for (const auto& v : report.violations) {
      msg += " [" + v.constraint + " residual " + std::to_string(v.residual) + "]";
    }
    throw Error(ErrorCode::constraint_violation, msg);
  }
  return apply_tau3_left(build_single_particle_h(spec));
}

ValidationReport validate_effective_sph(const Matrix& g, double tol) {
  require_square(g, "G");
  if (g.rows() % 2 != 0) {
    throw Error(ErrorCode::invalid_argument, "G must be 2N x 2N");
  }
  const int n = static_cast<int>(g.rows()) / 2;
  const double bound = tol * matrix_scale(g);
  ValidationReport report;
  Matrix t3 = tau3(n);
  double pseudo = (g.adjoint() - t3 * g * t3).cwiseAbs().maxCoeff();
  if (pseudo > bound) {
    report.violations.push_back({"pseudo-hermiticity G^dag = tau3 G tau3", pseudo});
  }
  Matrix t1 = tau1(n);
  double cc = (g.conjugate() + t1 * g * t1).cwiseAbs().maxCoeff();
  if (cc > bound) {
    report.violations.push_back({"charge conjugation G^* = -tau1 G tau1", cc});
  }
  return report;
}

Complex tau3_inner(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::invalid_argument, "dimension mismatch in tau3_inner");
  }
  return u.dot(apply_tau3(v));  // Eigen's dot conjugates the first argument
}

Vector charge_conjugate(const Vector& v) { return apply_tau1(v.conjugate()); }

Vector to_standard_ordering(const Vector& interleaved) {
  const Eigen::Index n = interleaved.size() / 2;
  Vector out(interleaved.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i) = interleaved(2 * i);
    out(n + i) = interleaved(2 * i + 1);
  }
  return out;
}

Vector from_standard_ordering(const Vector& standard) {
  const Eigen::Index n = standard.size() / 2;
  Vector out(standard.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    out(2 * i) = standard(i);
    out(2 * i + 1) = standard(n + i);
  }
  return out;
}

Matrix to_standard_ordering(const Matrix& interleaved) {
  const Eigen::Index n = interleaved.rows() / 2;
  Eigen::VectorXi perm(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    perm(i) = static_cast<int>(2 * i);
    perm(n + i) = static_cast<int>(2 * i + 1);
  }
  Matrix out(interleaved.rows(), interleaved.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      out(r, c) = interleaved(perm(r), perm(c));
    }
  }
  return out;
}

}  // namespace ks
