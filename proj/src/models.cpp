#include "kreinstab/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ks {

namespace {

constexpr double kPi = 3.14159265358979323846;

Complex ii(0.0, 1.0);

Eigen::Vector2cd spinor_plus() { return Eigen::Vector2cd(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)); }
Eigen::Vector2cd spinor_minus() { return Eigen::Vector2cd(1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)); }

void put_site(Vector& v, int site, const Eigen::Vector2cd& spinor, Complex amplitude) {
  v.segment<2>(2 * (site - 1)) += amplitude * spinor;
}

// Residual-based eigenvalue assignment: the +/- eigenvector families swap
// their frequency labels between parameter branches, so the oracle pins each
// vector to whichever of the candidate eigenvalues annihilates it.
Complex assign_eigenvalue(const Matrix& g, const Vector& psi,
                          const std::vector<Complex>& candidates) {
  Complex best = candidates.front();
  double best_res = std::numeric_limits<double>::infinity();
  for (Complex w : candidates) {
    double res = (g * psi - w * psi).norm();
    if (res < best_res) {
      best_res = res;
      best = w;
    }
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------- single mode

QbhSpec single_mode(double alpha, double beta) {
  QbhSpec spec;
  spec.hopping = Matrix::Constant(1, 1, Complex(alpha + beta, 0));
  spec.pairing = Matrix::Constant(1, 1, Complex(beta - alpha, 0));
  return spec;
}

SingleModeOracle single_mode_oracle(double alpha, double beta) {
  SingleModeOracle out;
  Complex root = 2.0 * std::sqrt(Complex(alpha * beta, 0));
  out.omega_plus = root;
  out.omega_minus = -root;
  double denom = std::abs(alpha) + std::abs(beta);
  out.kpr = denom > 0 ? 2.0 * std::sqrt(std::abs(alpha) * std::abs(beta)) / denom
                      : std::numeric_limits<double>::quiet_NaN();
  if (alpha == 0.0 && beta == 0.0) {
    out.phase = SingleModePhase::zero_frequency;
  } else if (alpha == 0.0 || beta == 0.0) {
    out.phase = SingleModePhase::free_particle;
  } else if ((alpha > 0) == (beta > 0)) {
    out.phase = SingleModePhase::harmonic_oscillator;
  } else {
    out.phase = SingleModePhase::parametric_amplifier;
  }
  return out;
}

// ----------------------------------------------------------------- cavity QED

QbhSpec cavity_qed(double omega_c, double omega_s, double chi) {
  if (omega_c <= 0 || omega_s <= 0) {
    throw Error(ErrorCode::invalid_argument, "cavity QED requires omega_c, omega_s > 0");
  }
  QbhSpec spec;
  spec.hopping = Matrix::Zero(2, 2);
  spec.hopping(0, 0) = omega_c;
  spec.hopping(1, 1) = -omega_s;
  spec.hopping(0, 1) = chi;
  spec.hopping(1, 0) = chi;
  spec.pairing = Matrix::Zero(2, 2);
  spec.pairing(0, 1) = chi;
  spec.pairing(1, 0) = chi;
  return spec;
}

CavityOracle cavity_qed_oracle(double omega_c, double omega_s, double chi) {
  CavityOracle out;
  out.x = (omega_c - omega_s) / omega_s;
  out.y = chi / omega_s;
  const double x = out.x, y = out.y;
  if (x <= -1.0) {
    throw Error(ErrorCode::invalid_argument, "cavity QED oracle requires x > -1");
  }
  out.f = x * x * (x + 2) * (x + 2) - 16 * y * y * (x + 1);
  Complex sf = std::sqrt(Complex(out.f, 0));
  Complex base(x * x + 2 * x + 2, 0);
  Complex o1 = omega_s / std::sqrt(2.0) * std::sqrt(base + sf);
  Complex o2 = omega_s / std::sqrt(2.0) * std::sqrt(base - sf);
  out.spectrum = {o1, -o1, o2, -o2};
  out.stable = out.f >= 0;
  return out;
}

double cavity_boundary_y(double x) {
  if (x <= -1.0) {
    throw Error(ErrorCode::invalid_argument, "boundary curve requires x > -1");
  }
  return (x * x + 2 * x) / (4 * std::sqrt(x + 1));
}

// ------------------------------------------------------------------------ BKC

double bkc_r(double t, double delta) {
  if (t <= 0 || delta <= 0 || t == delta) {
    throw Error(ErrorCode::invalid_argument, "r parameter needs t, Delta > 0 and t != Delta");
  }
  return 0.5 * std::log((t + delta) / std::abs(t - delta));
}

namespace {

void check_bkc(const BkcParams& p) {
  if (p.sites < 2 || p.t <= 0 || p.delta <= 0 || p.s < 0 || p.s > 1 || p.phi < 0 ||
      p.phi > kPi) {
    throw Error(ErrorCode::invalid_argument,
                "BKC parameters: N >= 2, t > 0, Delta > 0, s in [0,1], phi in [0,pi]");
  }
}

}  // namespace

QbhSpec bkc(const BkcParams& p) {
  check_bkc(p);
  const int n = p.sites;
  QbhSpec spec;
  spec.hopping = Matrix::Zero(n, n);
  spec.pairing = Matrix::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) {
    spec.hopping(j + 1, j) = ii * p.t / 2.0;
    spec.hopping(j, j + 1) = -ii * p.t / 2.0;
    spec.pairing(j + 1, j) = ii * p.delta / 2.0;
    spec.pairing(j, j + 1) = ii * p.delta / 2.0;
  }
  if (p.s > 0) {
    // += keeps the N = 2 ring correct, where the boundary bond coincides
    // with the bulk bond
    Complex phase = std::exp(ii * p.phi);
    Complex kb = ii * p.s * p.t / 2.0 * phase;
    Complex db = ii * p.s * p.delta / 2.0 * phase;
    spec.hopping(0, n - 1) += kb;
    spec.hopping(n - 1, 0) += std::conj(kb);
    spec.pairing(0, n - 1) += db;
    spec.pairing(n - 1, 0) += db;
  }
  return spec;
}

BbtSpec bkc_bbt(const BkcParams& p) {
  check_bkc(p);
  BbtSpec spec;
  spec.sites = p.sites;
  spec.range = 1;
  Matrix2 g1;
  g1 << p.t, -p.delta, -p.delta, p.t;
  g1 *= -ii / 2.0;
  Matrix2 s3;
  s3 << 1, 0, 0, -1;
  Matrix2 gm1 = s3 * g1.adjoint() * s3;
  spec.bulk = {gm1, Matrix2::Zero(), g1};
  if (p.s > 0) {
    Complex ep = std::exp(ii * p.phi);
    Complex em = std::exp(-ii * p.phi);
    Matrix2 v1;
    v1 << p.t * em, -p.delta * ep, -p.delta * em, p.t * ep;
    v1 *= -ii * p.s / 2.0;
    Matrix2 vm1 = s3 * v1.adjoint() * s3;
    spec.corners.push_back({p.sites, 1, v1});
    spec.corners.push_back({1, p.sites, vm1});
  }
  return spec;
}

BkcOpenOracle bkc_open_oracle(int sites, double t, double delta, double squeeze) {
  if (t == delta) {
    throw Error(ErrorCode::unsupported,
                "open-BC closed form needs t != Delta; use the Jordan oracle at t = Delta");
  }
  const int n = sites;
  BkcOpenOracle out;
  out.r = bkc_r(t, delta);
  out.sign = t > delta ? 1 : -1;
  const Complex band = std::sqrt(Complex(t * t - delta * delta, 0));

  BkcParams p;
  p.sites = n;
  p.t = t;
  p.delta = delta;
  p.s = 0;
  Matrix g = bkc_bbt(p).dense();

  out.vectors.resize(2 * n, 2 * n);
  out.vector_eigenvalues.resize(2 * n);
  int col = 0;
  for (int m = 1; m <= n; ++m) {
    Complex omega = band * std::cos(m * kPi / (n + 1));
    out.spectrum.push_back(omega);
    out.spectrum.push_back(omega);
    for (int fam = 0; fam < 2; ++fam) {
      Vector psi = Vector::Zero(2 * n);
      for (int j = 1; j <= n; ++j) {
        double arg = j * out.r + squeeze;
        Eigen::Vector2cd xi;
        if (out.sign == 1) {
          xi << std::cosh(arg), std::sinh(arg);
        } else {
          if (j % 2 == 0) {
            xi << std::cosh(arg), std::sinh(arg);
          } else {
            xi << std::sinh(arg), std::cosh(arg);
          }
        }
        if (fam == 1) xi.reverseInPlace();  // xi^- = sigma1 xi^+
        Complex weight = std::pow(Complex(-out.sign, 0), j / 2.0) *
                         std::sin(m * kPi * j / (n + 1));
        put_site(psi, j, xi, weight);
      }
      Complex w = assign_eigenvalue(g, psi, {omega, -omega});
      // tau3 normalization where the signature is sharp (real spectrum)
      Complex s = tau3_inner(psi, psi);
      if (std::abs(s) > 1e-12 * psi.squaredNorm()) {
        psi /= std::sqrt(std::abs(s));
      } else {
        psi.normalize();
      }
      out.vectors.col(col) = psi;
      out.vector_eigenvalues[static_cast<size_t>(col)] = w;
      ++col;
    }
  }
  return out;
}

BkcTwistedOracle bkc_twisted_pi2_oracle(int sites, double t, double delta) {
  if (t == delta) {
    throw Error(ErrorCode::unsupported,
                "pi/2-twisted closed form needs t != Delta; use the Jordan oracle at t = Delta");
  }
  const int n = sites;
  BkcTwistedOracle out;
  double r = bkc_r(t, delta);
  out.r_prime = t > delta ? Complex(r, 0) : Complex(r, kPi / 2);
  const Complex band = std::sqrt(Complex(t * t - delta * delta, 0));

  BkcParams p;
  p.sites = n;
  p.t = t;
  p.delta = delta;
  p.s = 1.0;
  p.phi = kPi / 2;
  Matrix g = bkc_bbt(p).dense();

  out.vectors.resize(2 * n, 2 * n);
  out.vector_eigenvalues.resize(2 * n);
  for (int m = 0; m < 2 * n; ++m) {
    double km = (m + 0.5) * kPi / n;
    Complex omega = band * std::sin(km);
    out.spectrum.push_back(omega);
    Vector psi = Vector::Zero(2 * n);
    for (int j = 1; j <= n; ++j) {
      Complex arg = (double(j) - double(n + 2) / 2.0) * out.r_prime;
      Eigen::Vector2cd zeta;
      zeta << std::sinh(arg), std::cosh(arg);
      if (m % 2 == 1) zeta.reverseInPlace();  // sigma1^m
      put_site(psi, j, zeta, std::exp(ii * double(j) * km));
    }
    Complex w = assign_eigenvalue(g, psi, {omega, -omega});
    Complex s = tau3_inner(psi, psi);
    if (std::abs(s) > 1e-12 * psi.squaredNorm()) {
      psi /= std::sqrt(std::abs(s));
    } else {
      psi.normalize();
    }
    out.vectors.col(m) = psi;
    out.vector_eigenvalues[static_cast<size_t>(m)] = w;
  }
  return out;
}

std::vector<double> bkc_momentum_set(int sites, bool antiperiodic) {
  std::vector<double> ks;
  for (int m = 0; m < sites; ++m) {
    double k = antiperiodic ? (2 * m + 1) * kPi / sites : 2 * m * kPi / sites;
    while (k > kPi + 1e-12) k -= 2 * kPi;  // principal zone (-pi, pi]
    ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  return ks;
}

std::vector<Complex> bkc_periodic_oracle(int sites, double t, double delta, bool antiperiodic) {
  std::vector<Complex> spectrum;
  for (double k : bkc_momentum_set(sites, antiperiodic)) {
    Complex w(t * std::sin(k), delta * std::cos(k));
    spectrum.push_back(w);
    spectrum.push_back(std::conj(w));
  }
  return spectrum;
}

double bkc_tdelta_kpr(int sites, double phi) {
  double c = std::abs(std::cos(phi));
  if (c >= 1.0) return 1.0;
  if (c == 0.0) return 0.0;
  double n = sites;
  return n * c * (std::pow(c, 2.0 / n) - 1.0) / (c * c - 1.0);
}

double bkc_kpr_large_n_limit(double phi) {
  double c = std::abs(std::cos(phi));
  if (c >= 1.0) return 0.5;
  if (c == 0.0) return 0.0;
  return c * std::log(c) / (c * c - 1.0);
}

double bkc_tdelta_overlap(int sites, double phi, int m) {
  double c = std::abs(std::cos(phi));
  double common = std::sqrt(1.0 - std::pow(c, 2.0 / sites));
  if (m % 2 == 1) return common / std::sqrt(1.0 - c * c);
  return common;
}

BkcTDeltaTwistedOracle bkc_tdelta_twisted_oracle(int sites, double t, double phi) {
  if (phi <= 0 || phi >= kPi) {
    throw Error(ErrorCode::invalid_argument, "twisted t=Delta oracle needs phi in (0, pi)");
  }
  if (std::abs(phi - kPi / 2) < 1e-14) {
    throw Error(ErrorCode::unsupported,
                "phi = pi/2 is the exceptional point; use the Jordan oracle");
  }
  const int n = sites;
  BkcTDeltaTwistedOracle out;
  double c = std::cos(phi);
  Complex factor = std::pow(std::abs(c), 1.0 / n);
  if (phi > kPi / 2) factor *= std::exp(ii * kPi / double(n));  // stated branch

  if (n % 2 == 0) {
    for (int m = 1; m <= n; ++m) {
      Complex w = ii * t * factor * std::exp(-2.0 * kPi * ii * double(m) / double(n));
      out.spectrum.push_back(w);
      out.spectrum.push_back(w);
    }
  } else {
    for (int m = 1; m <= 2 * n; ++m) {
      out.spectrum.push_back(ii * t * factor * std::exp(-kPi * ii * double(m) / double(n)));
    }
  }
  out.kpr = bkc_tdelta_kpr(n, phi);
  out.spectral_speed = (t / n) * std::pow(std::abs(c), 1.0 / n - 1.0) * std::abs(std::sin(phi));

  if (n % 2 == 1) {
    out.vectors.resize(2 * n, 2 * n);
    out.vector_eigenvalues.resize(2 * n);
    std::vector<Vector> raw(static_cast<size_t>(2 * n));
    for (int m = 1; m <= 2 * n; ++m) {
      Complex w = out.spectrum[static_cast<size_t>(m - 1)];
      Complex zm = ii * t / w;
      Vector psi = Vector::Zero(2 * n);
      if (m % 2 == 0) {
        for (int j = 1; j <= n; ++j) {
          put_site(psi, j, spinor_plus(), std::pow(zm, j - 1));  // z^{-1} |z,1>
        }
        put_site(psi, 1, spinor_minus(), ii * std::tan(phi));
      } else {
        for (int j = 1; j <= n; ++j) {
          put_site(psi, j, spinor_minus(), std::pow(-1.0 / zm, j));
        }
      }
      raw[static_cast<size_t>(m - 1)] = psi;
      out.vector_eigenvalues[static_cast<size_t>(m - 1)] = w;
    }
    // normalization <psi_m | tau3 | psi_l> = delta_{m*, l}
    std::vector<int> partner(static_cast<size_t>(2 * n), -1);
    for (int m = 0; m < 2 * n; ++m) {
      Complex target = std::conj(out.spectrum[static_cast<size_t>(m)]);
      double best = std::numeric_limits<double>::infinity();
      for (int l = 0; l < 2 * n; ++l) {
        double dist = std::abs(out.spectrum[static_cast<size_t>(l)] - target);
        if (dist < best) {
          best = dist;
          partner[static_cast<size_t>(m)] = l;
        }
      }
    }
    std::vector<bool> done(static_cast<size_t>(2 * n), false);
    for (int m = 0; m < 2 * n; ++m) {
      if (done[static_cast<size_t>(m)]) continue;
      int l = partner[static_cast<size_t>(m)];
      if (l == m) {
        Complex s = tau3_inner(raw[static_cast<size_t>(m)], raw[static_cast<size_t>(m)]);
        raw[static_cast<size_t>(m)] /= std::sqrt(std::abs(s));
        done[static_cast<size_t>(m)] = true;
        continue;
      }
      Complex cpair = tau3_inner(raw[static_cast<size_t>(l)], raw[static_cast<size_t>(m)]);
      double nm = raw[static_cast<size_t>(m)].norm();
      double nl = raw[static_cast<size_t>(l)].norm();
      Complex sm = cpair / std::abs(cpair) * std::sqrt(std::abs(cpair) * nm / nl);
      double sl = std::sqrt(std::abs(cpair) * nl / nm);
      raw[static_cast<size_t>(m)] /= sm;
      raw[static_cast<size_t>(l)] /= sl;
      done[static_cast<size_t>(m)] = done[static_cast<size_t>(l)] = true;
    }
    for (int m = 0; m < 2 * n; ++m) out.vectors.col(m) = raw[static_cast<size_t>(m)];
  }
  return out;
}

BkcJordanOracle bkc_tdelta_jordan_oracle(int sites, double t, BkcBoundary bc) {
  const int n = sites;
  if (t <= 0) {
    throw Error(ErrorCode::invalid_argument, "t must be positive");
  }
  BkcJordanOracle out;
  auto plus = spinor_plus();
  auto minus = spinor_minus();
  if (bc == BkcBoundary::open) {
    std::vector<Vector> c1, c2;
    for (int k = 1; k <= n; ++k) {
      Vector v1 = Vector::Zero(2 * n);
      put_site(v1, n + 1 - k, plus, std::pow(ii * t, -k));
      c1.push_back(v1);
      Vector v2 = Vector::Zero(2 * n);
      put_site(v2, k, minus, std::pow(-ii * t, -k));
      c2.push_back(v2);
    }
    out.chains = {c1, c2};
    return out;
  }
  // twisted pi/2
  if (n % 2 == 0) {
    std::vector<Vector> c1, c2;
    for (int k = 1; k <= n; ++k) {
      Vector v1 = Vector::Zero(2 * n);
      put_site(v1, k, minus, std::pow(ii / t, k));
      c1.push_back(v1);
      Vector v2 = Vector::Zero(2 * n);
      Complex f = std::pow(ii / t, k);
      if (k < n) {
        put_site(v2, k + 1, minus, f * ii);
        put_site(v2, n + 1 - k, plus, f * std::pow(-1.0, k + 1));
      } else {
        put_site(v2, 1, plus, -f);
      }
      c2.push_back(v2);
    }
    out.chains = {c1, c2};
  } else {
    std::vector<Vector> c1, c2;
    for (int k = 1; k <= n + 1; ++k) {
      Vector v = Vector::Zero(2 * n);
      Complex f = std::pow(ii / t, k);
      if (k == 1) {
        put_site(v, 1, minus, 2.0 * f);
      } else {
        if (k <= n) put_site(v, k, minus, f);  // k = N+1 has no lattice ket
        put_site(v, n + 2 - k, plus, f * ii * std::pow(-1.0, k));
      }
      c1.push_back(v);
    }
    for (int k = 1; k <= n - 1; ++k) {
      Vector v = Vector::Zero(2 * n);
      Complex f = std::pow(ii / t, k);
      put_site(v, k + 1, minus, f * ii);
      put_site(v, n - k + 1, plus, f * std::pow(-1.0, k + 1));
      c2.push_back(v);
    }
    out.chains = {c1, c2};
  }
  return out;
}

double BkcPhaseBoundaryOracle::phi_minus(double s) const {
  double c;
  if (even) {
    if (s <= 0) return std::numeric_limits<double>::quiet_NaN();
    c = 0.5 * (s + 1.0 / s) / std::cosh(sites * r);
  } else {
    c = 1.0 / std::cosh(sites * r);
  }
  if (c > 1.0) return std::numeric_limits<double>::quiet_NaN();
  return std::acos(c);
}

double BkcPhaseBoundaryOracle::phi_plus(double s) const {
  double pm = phi_minus(s);
  return std::isnan(pm) ? pm : kPi - pm;
}

BkcPhaseBoundaryOracle bkc_phase_boundary_oracle(int sites, double t, double delta) {
  if (t <= delta) {
    throw Error(ErrorCode::invalid_argument, "phase boundary curves require t > Delta");
  }
  BkcPhaseBoundaryOracle out;
  out.sites = sites;
  out.r = bkc_r(t, delta);
  out.even = sites % 2 == 0;
  out.delta_s = out.even ? std::exp(-sites * out.r) : 0.0;
  out.delta_phi = 2.0 * std::asin(1.0 / std::cosh(sites * out.r));
  return out;
}

QbhSpec bkc_mu(int sites, double t, double delta, double mu) {
  if (t == 0) {
    throw Error(ErrorCode::invalid_argument, "mu-extended chain requires t != 0");
  }
  BkcParams p;
  p.sites = sites;
  p.t = t;
  p.delta = delta;
  p.s = 0;
  QbhSpec spec = bkc(p);
  for (int j = 0; j < sites; ++j) spec.pairing(j, j) += ii * mu;
  return spec;
}

Vector quadrature_x_vector(int sites, int site) {
  Vector v = Vector::Zero(2 * sites);
  v(2 * (site - 1)) = 1.0 / std::sqrt(2.0);
  v(2 * (site - 1) + 1) = -1.0 / std::sqrt(2.0);
  return v;
}

Vector quadrature_p_vector(int sites, int site) {
  Vector v = Vector::Zero(2 * sites);
  v(2 * (site - 1)) = ii / std::sqrt(2.0);
  v(2 * (site - 1) + 1) = ii / std::sqrt(2.0);
  return v;
}

Complex operator_commutator(const Vector& u, const Vector& v) {
  return -tau3_inner(u, charge_conjugate(v));
}

BkcMuOracle bkc_mu_oracle(int sites, double t, double delta, double mu) {
  if (t == 0) {
    throw Error(ErrorCode::invalid_argument, "mu-extended oracle requires t != 0");
  }
  BkcMuOracle out;
  const Complex band = std::sqrt(Complex(t * t - delta * delta, 0));
  for (int m = 1; m <= sites; ++m) {
    Complex w = band * std::cos(m * kPi / (sites + 1));
    out.spectrum.push_back(w + ii * mu);
    out.spectrum.push_back(w - ii * mu);
  }
  out.decay = -mu / t;
  out.gamma_left = Vector::Zero(2 * sites);
  out.gamma_right = Vector::Zero(2 * sites);
  for (int j = 1; j <= sites; ++j) {
    out.gamma_left += std::pow(out.decay, j - 1) * quadrature_x_vector(sites, j);
    out.gamma_right += std::pow(out.decay, sites - j) * quadrature_p_vector(sites, j);
  }
  out.edge_magnitude = t * std::pow(std::abs(out.decay), sites);
  out.commutator = ii * double(sites) * std::pow(out.decay, sites - 1);
  return out;
}

// --------------------------------------------------------- fermion-boson map

QbhSpec fermion_to_boson_map(const Matrix& k_fermi, const Matrix& delta_fermi, double tol) {
  if (k_fermi.rows() != k_fermi.cols() || delta_fermi.rows() != delta_fermi.cols() ||
      k_fermi.rows() != delta_fermi.rows()) {
    throw Error(ErrorCode::invalid_argument, "fermion matrices must be square and matched");
  }
  if (k_fermi.imag().cwiseAbs().maxCoeff() > tol ||
      (k_fermi - k_fermi.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw Error(ErrorCode::constraint_violation, "K_f must be real symmetric");
  }
  if ((delta_fermi - delta_fermi.adjoint()).cwiseAbs().maxCoeff() > tol ||
      delta_fermi.real().cwiseAbs().maxCoeff() > tol) {
    throw Error(ErrorCode::constraint_violation, "Delta_f must be Hermitian and purely imaginary");
  }
  QbhSpec out;
  out.hopping = delta_fermi;
  out.pairing = ii * k_fermi;
  return out;
}

// ----------------------------------------------------------- model registry

namespace {

double take(const std::map<std::string, double>& params, const std::string& key,
            const char* model) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw Error(ErrorCode::invalid_argument,
                std::string("model '") + model + "' needs parameter '" + key + "'");
  }
  return it->second;
}

double take_or(const std::map<std::string, double>& params, const std::string& key,
               double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

QbhSpec make_model(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "single_mode") {
    return single_mode(take(params, "alpha", "single_mode"), take(params, "beta", "single_mode"));
  }
  if (name == "cavity_qed") {
    return cavity_qed(take(params, "omega_c", "cavity_qed"), take(params, "omega_s", "cavity_qed"),
                      take(params, "chi", "cavity_qed"));
  }
  if (name == "bkc") {
    BkcParams p;
    p.sites = static_cast<int>(take(params, "N", "bkc"));
    p.t = take(params, "t", "bkc");
    p.delta = take(params, "Delta", "bkc");
    p.s = take_or(params, "s", 0.0);
    p.phi = take_or(params, "phi", 0.0);
    return bkc(p);
  }
  if (name == "bkc_mu") {
    return bkc_mu(static_cast<int>(take(params, "N", "bkc_mu")), take(params, "t", "bkc_mu"),
                  take(params, "Delta", "bkc_mu"), take(params, "mu", "bkc_mu"));
  }
  throw Error(ErrorCode::invalid_argument,
              "unknown model '" + name +
                  "'; expected single_mode{alpha,beta}, cavity_qed{omega_c,omega_s,chi}, "
                  "bkc{N,t,Delta,s,phi}, bkc_mu{N,t,Delta,mu}");
}

}  // namespace ks
