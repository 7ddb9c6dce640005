#include "doctest.h"

#include <cmath>
#include <random>

#include "kreinstab/krein.hpp"
#include "kreinstab/models.hpp"
#include "kreinstab/nambu.hpp"
#include "kreinstab/spectral.hpp"

using namespace ks;

namespace {

constexpr double kPi = 3.14159265358979323846;

void expect_multiset_match(std::vector<Complex> got, std::vector<Complex> want, double tol) {
  REQUIRE(got.size() == want.size());
  for (const auto& w : want) {
    double best = 1e300;
    size_t best_idx = 0;
    for (size_t i = 0; i < got.size(); ++i) {
      double d = std::abs(got[i] - w);
      if (d < best) {
        best = d;
        best_idx = i;
      }
    }
    if (best >= tol) {
      CAPTURE(w.real());
      CAPTURE(w.imag());
      REQUIRE(best < tol);
    }
    got.erase(got.begin() + static_cast<long>(best_idx));
  }
}

std::vector<Complex> dense_spectrum(const Matrix& g) {
  SpectrumReport rep = eigendecompose(g);
  return std::vector<Complex>(rep.eigenvalues.data(), rep.eigenvalues.data() + rep.size());
}

}  // namespace

TEST_CASE("single mode oracle covers the phase diagram") {
  auto qho = single_mode_oracle(1.0, 1.0);
  CHECK(qho.omega_plus == Complex(2, 0));
  CHECK(qho.phase == SingleModePhase::harmonic_oscillator);
  CHECK(qho.kpr == doctest::Approx(1.0));

  auto pa = single_mode_oracle(1.0, -1.0);
  CHECK(std::abs(pa.omega_plus - Complex(0, 2)) < 1e-14);
  CHECK(pa.phase == SingleModePhase::parametric_amplifier);

  auto zero = single_mode_oracle(0.0, 0.0);
  CHECK(zero.phase == SingleModePhase::zero_frequency);

  auto fp = single_mode_oracle(1.0, 0.0);
  CHECK(fp.phase == SingleModePhase::free_particle);

  // oracle vs dense spectrum
  auto o = single_mode_oracle(0.7, -1.9);
  expect_multiset_match(dense_spectrum(build_effective_sph(single_mode(0.7, -1.9))),
                        {o.omega_plus, o.omega_minus}, 1e-12);
  // KPR closed form at (1, 4): 2 sqrt(4) / 5 = 0.8
  CHECK(single_mode_oracle(1.0, 4.0).kpr == doctest::Approx(0.8));
}

TEST_CASE("cavity QED oracle: frequencies, boundaries, instability") {
  // x = 0, y = 0: decoupled resonant point, doubly degenerate +-omega_s
  auto o = cavity_qed_oracle(1.0, 1.0, 0.0);
  expect_multiset_match(o.spectrum, {Complex(1, 0), Complex(-1, 0), Complex(1, 0), Complex(-1, 0)},
                        1e-12);

  // boundary at x = 1: y = 3/(4 sqrt 2)
  CHECK(cavity_boundary_y(1.0) == doctest::Approx(3.0 / (4.0 * std::sqrt(2.0))));

  // f(1,1) = 9 - 32 < 0: unstable
  auto u = cavity_qed_oracle(2.0, 1.0, 1.0);
  CHECK(u.f == doctest::Approx(-23.0));
  CHECK_FALSE(u.stable);

  // oracle vs dense across a small parameter sample
  for (double wc : {0.6, 1.0, 1.7}) {
    for (double chi : {0.0, 0.2, 0.9}) {
      auto oracle = cavity_qed_oracle(wc, 1.0, chi);
      expect_multiset_match(dense_spectrum(build_effective_sph(cavity_qed(wc, 1.0, chi))),
                            oracle.spectrum, 1e-10);
    }
  }
}

TEST_CASE("BKC BBT assembly equals the dense Nambu construction") {
  for (double s : {0.0, 0.5, 1.0}) {
    for (double phi : {0.0, kPi / 4, kPi / 2, kPi}) {
      BkcParams p;
      p.sites = 5;
      p.t = 1.0;
      p.delta = 0.5;
      p.s = s;
      p.phi = phi;
      Matrix from_bbt = bkc_bbt(p).dense();
      Matrix from_qbh = build_effective_sph(bkc(p));
      CHECK((from_bbt - from_qbh).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("open-BC oracle matches dense diagonalization") {
  for (int n : {3, 6, 9}) {
    for (double delta : {0.25, 0.5, 0.75}) {
      auto oracle = bkc_open_oracle(n, 1.0, delta);
      BkcParams p;
      p.sites = n;
      p.t = 1.0;
      p.delta = delta;
      Matrix g = build_effective_sph(bkc(p));
      expect_multiset_match(dense_spectrum(g), oracle.spectrum, 1e-10);
      // oracle eigenvectors are actual eigenvectors
      for (int c = 0; c < oracle.vectors.cols(); ++c) {
        Vector psi = oracle.vectors.col(c);
        Complex w = oracle.vector_eigenvalues[static_cast<size_t>(c)];
        CHECK((g * psi - w * psi).norm() < 1e-8 * matrix_scale(g) * psi.norm());
      }
    }
  }
}

TEST_CASE("open-BC oracle: bosonic tau3 pairings for t > Delta") {
  auto oracle = bkc_open_oracle(3, 1.0, 0.5);
  // columns alternate + and - family
  for (int a = 0; a < oracle.vectors.cols(); ++a) {
    for (int b = 0; b < oracle.vectors.cols(); ++b) {
      Complex pair = tau3_inner(oracle.vectors.col(a), oracle.vectors.col(b));
      bool a_plus = a % 2 == 0;
      if (a == b) {
        CHECK(std::abs(pair - Complex(a_plus ? 1 : -1, 0)) < 1e-8);
      } else {
        CHECK(std::abs(pair) < 1e-8);
      }
    }
  }
}

TEST_CASE("open-BC oracle: skin localization envelope") {
  const int n = 10;
  auto oracle = bkc_open_oracle(n, 1.0, 0.5);
  // + family (sigma = +1, t > Delta) localizes to the right edge as e^{jr}
  Vector psi = oracle.vectors.col(0);
  double left = 0, right = 0;
  for (int j = 1; j <= n; ++j) {
    double w = psi.segment<2>(2 * (j - 1)).norm();
    if (j <= n / 2)
      left += w * w;
    else
      right += w * w;
  }
  CHECK(right > 10 * left);
}

TEST_CASE("pi/2-twisted oracle matches dense diagonalization") {
  for (int n : {2, 5, 8}) {
    for (double delta : {0.25, 0.5, 0.75}) {
      auto oracle = bkc_twisted_pi2_oracle(n, 1.0, delta);
      BkcParams p;
      p.sites = n;
      p.t = 1.0;
      p.delta = delta;
      p.s = 1.0;
      p.phi = kPi / 2;
      Matrix g = build_effective_sph(bkc(p));
      expect_multiset_match(dense_spectrum(g), oracle.spectrum, 1e-10);
      for (int c = 0; c < oracle.vectors.cols(); ++c) {
        Vector psi = oracle.vectors.col(c);
        Complex w = oracle.vector_eigenvalues[static_cast<size_t>(c)];
        CHECK((g * psi - w * psi).norm() < 1e-8 * matrix_scale(g) * psi.norm());
      }
    }
  }
  // N = 5: no zero eigenvalue
  auto oracle = bkc_twisted_pi2_oracle(5, 1.0, 0.5);
  for (auto w : oracle.spectrum) CHECK(std::abs(w) > 0.1);
}

TEST_CASE("periodic and antiperiodic oracles match dense spectra") {
  for (int n : {3, 4, 6}) {
    for (bool anti : {false, true}) {
      BkcParams p;
      p.sites = n;
      p.t = 1.0;
      p.delta = 0.5;
      p.s = 1.0;
      p.phi = anti ? kPi : 0.0;
      Matrix g = build_effective_sph(bkc(p));
      expect_multiset_match(dense_spectrum(g), bkc_periodic_oracle(n, 1.0, 0.5, anti), 1e-10);
    }
  }
  // momentum sets as printed: N=3 antiperiodic -> {+-pi/3, pi}
  auto ks3 = bkc_momentum_set(3, true);
  REQUIRE(ks3.size() == 3);
  CHECK(ks3[0] == doctest::Approx(-kPi / 3));
  CHECK(ks3[1] == doctest::Approx(kPi / 3));
  CHECK(ks3[2] == doctest::Approx(kPi));
  // instability scale: max |Im| equals Delta
  auto spec = bkc_periodic_oracle(5, 1.0, 0.25, false);
  double max_im = 0;
  for (auto w : spec) max_im = std::max(max_im, std::abs(w.imag()));
  CHECK(max_im == doctest::Approx(0.25));
}

TEST_CASE("t=Delta twisted oracle: spectrum circle and eigenvectors") {
  for (int n : {3, 4, 5}) {
    for (double phi : {kPi / 3, 2.1}) {
      auto oracle = bkc_tdelta_twisted_oracle(n, 1.0, phi);
      BkcParams p;
      p.sites = n;
      p.t = 1.0;
      p.delta = 1.0;
      p.s = 1.0;
      p.phi = phi;
      Matrix g = build_effective_sph(bkc(p));
      expect_multiset_match(dense_spectrum(g), oracle.spectrum, 1e-9);
      if (n % 2 == 1) {
        for (int c = 0; c < oracle.vectors.cols(); ++c) {
          Vector psi = oracle.vectors.col(c);
          Complex w = oracle.vector_eigenvalues[static_cast<size_t>(c)];
          CHECK((g * psi - w * psi).norm() < 1e-8 * matrix_scale(g) * psi.norm());
        }
        // pairing convention <psi_m | tau3 | psi_l> = delta_{m*, l}
        for (int a = 0; a < 2 * n; ++a) {
          Complex wa = oracle.vector_eigenvalues[static_cast<size_t>(a)];
          for (int b = 0; b < 2 * n; ++b) {
            Complex pair = tau3_inner(oracle.vectors.col(a), oracle.vectors.col(b));
            Complex wb = oracle.vector_eigenvalues[static_cast<size_t>(b)];
            bool partners = std::abs(std::conj(wa) - wb) < 1e-9;
            CHECK(std::abs(pair - (partners ? Complex(1, 0) : Complex(0, 0))) < 1e-8);
          }
        }
      }
    }
  }
}

TEST_CASE("t=Delta twisted oracle: radius and KPR closed forms") {
  // N=3, phi=pi/3: radius t |cos|^{1/3} = 0.5^{1/3}
  auto oracle = bkc_tdelta_twisted_oracle(3, 1.0, kPi / 3);
  for (auto w : oracle.spectrum) {
    CHECK(std::abs(w) == doctest::Approx(std::pow(0.5, 1.0 / 3.0)));
  }
  // KPR N=3, phi=pi/3 -> 0.74007... (3 * 0.5 * (0.5^{2/3}-1)/(0.25-1))
  double expected = 3 * 0.5 * (std::pow(0.5, 2.0 / 3.0) - 1.0) / (0.25 - 1.0);
  CHECK(oracle.kpr == doctest::Approx(expected));
  CHECK(oracle.kpr == doctest::Approx(0.7400789501051269).epsilon(1e-10));

  // overlap -> 1 as phi -> pi/2 (rate |cos phi|^{2/N})
  CHECK(bkc_tdelta_overlap(5, kPi / 2 - 1e-9, 1) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(bkc_tdelta_overlap(5, kPi / 2 - 1e-9, 2) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(bkc_tdelta_overlap(5, 1.2, 2) < bkc_tdelta_overlap(5, 1.5, 2));
}

TEST_CASE("t=Delta twisted oracle: overlap formula against explicit vectors") {
  const int n = 5;
  for (double phi : {0.9, 1.3}) {
    auto oracle = bkc_tdelta_twisted_oracle(n, 1.0, phi);
    // |chi_11> = |1>|-> is the surviving eigenvector at the EP
    Vector chi = Vector::Zero(2 * n);
    chi(0) = 1.0 / std::sqrt(2.0);
    chi(1) = -1.0 / std::sqrt(2.0);
    for (int m = 1; m <= 2 * n; ++m) {
      Vector psi = oracle.vectors.col(m - 1);
      double got = std::abs(chi.dot(psi)) / (chi.norm() * psi.norm());
      CHECK(got == doctest::Approx(bkc_tdelta_overlap(n, phi, m)).epsilon(1e-9));
    }
  }
}

TEST_CASE("t=Delta Jordan chains satisfy the chain identities exactly") {
  for (int n : {2, 3, 4, 5, 6}) {
    BkcParams p;
    p.sites = n;
    p.t = 1.0;
    p.delta = 1.0;

    auto open_oracle = bkc_tdelta_jordan_oracle(n, 1.0, BkcBoundary::open);
    Matrix g_open = build_effective_sph(bkc(p));
    REQUIRE(open_oracle.chains.size() == 2);
    for (const auto& chain : open_oracle.chains) {
      REQUIRE(static_cast<int>(chain.size()) == n);
      CHECK((g_open * chain[0]).norm() < 1e-13);
      for (size_t k = 1; k < chain.size(); ++k) {
        CHECK((g_open * chain[k] - chain[k - 1]).norm() < 1e-13);
      }
    }

    p.s = 1.0;
    p.phi = kPi / 2;
    auto tw_oracle = bkc_tdelta_jordan_oracle(n, 1.0, BkcBoundary::twisted_pi2);
    Matrix g_tw = build_effective_sph(bkc(p));
    REQUIRE(tw_oracle.chains.size() == 2);
    int len0 = static_cast<int>(tw_oracle.chains[0].size());
    int len1 = static_cast<int>(tw_oracle.chains[1].size());
    if (n % 2 == 0) {
      CHECK(len0 == n);
      CHECK(len1 == n);
    } else {
      CHECK(len0 == n + 1);
      CHECK(len1 == n - 1);
    }
    for (const auto& chain : tw_oracle.chains) {
      CHECK((g_tw * chain[0]).norm() < 1e-13);
      for (size_t k = 1; k < chain.size(); ++k) {
        CHECK((g_tw * chain[k] - chain[k - 1]).norm() < 1e-13);
      }
    }
  }
}

TEST_CASE("phase boundary oracle: printed N=10 numbers") {
  auto oracle = bkc_phase_boundary_oracle(10, 1.0, 0.25);
  CHECK(oracle.r == doctest::Approx(0.5 * std::log(5.0 / 3.0)));
  CHECK(oracle.delta_s == doctest::Approx(0.07775).epsilon(1e-3));
  CHECK(oracle.phi_minus(1.0) == doctest::Approx(std::acos(1.0 / std::cosh(10 * oracle.r))));
  CHECK(oracle.phi_minus(1.0) == doctest::Approx(1.4156).epsilon(1e-3));
  // N odd: delta_s = 0
  CHECK(bkc_phase_boundary_oracle(9, 1.0, 0.25).delta_s == 0.0);
  CHECK_THROWS_AS(bkc_phase_boundary_oracle(4, 1.0, 2.0), Error);
}

TEST_CASE("phase boundary curve hosts zero modes") {
  for (int n : {5, 6}) {
    auto oracle = bkc_phase_boundary_oracle(n, 1.0, 0.25);
    double s = 0.7;
    double phi = oracle.phi_minus(s);
    REQUIRE(std::isfinite(phi));
    BkcParams p;
    p.sites = n;
    p.t = 1.0;
    p.delta = 0.25;
    p.s = s;
    p.phi = phi;
    Matrix g = build_effective_sph(bkc(p));
    SpectrumReport rep = eigendecompose(g);
    double min_mod = 1e300;
    for (int i = 0; i < rep.size(); ++i) min_mod = std::min(min_mod, std::abs(rep.eigenvalues(i)));
    CHECK(min_mod < 1e-8);
  }
}

TEST_CASE("mu extension: split spectrum and Majorana-boson data") {
  const int n = 3;
  auto oracle = bkc_mu_oracle(n, 1.0, 0.5, 0.1);
  Matrix g = build_effective_sph(bkc_mu(n, 1.0, 0.5, 0.1));
  expect_multiset_match(dense_spectrum(g), oracle.spectrum, 1e-10);

  // G = G_open + i mu tau1
  BkcParams p;
  p.sites = n;
  p.t = 1.0;
  p.delta = 0.5;
  Matrix g_open = build_effective_sph(bkc(p));
  CHECK((g - g_open - Complex(0, 0.1) * tau1(n)).cwiseAbs().maxCoeff() < 1e-14);

  // Majorana-boson identities live on the t = Delta line:
  // G gamma_L is supported on site N with magnitude t |delta|^N
  auto edge = bkc_mu_oracle(n, 1.0, 1.0, 0.1);
  Matrix g_edge = build_effective_sph(bkc_mu(n, 1.0, 1.0, 0.1));
  Vector image = g_edge * edge.gamma_left;
  CHECK(image.head(2 * (n - 1)).norm() < 1e-14);
  CHECK(image.norm() == doctest::Approx(edge.edge_magnitude));
  Vector image_r = g_edge * edge.gamma_right;
  CHECK(image_r.tail(2 * (n - 1)).norm() < 1e-14);

  // commutator [gamma_L, gamma_R] = i N delta^{N-1}
  Complex comm = operator_commutator(edge.gamma_left, edge.gamma_right);
  CHECK(std::abs(comm - edge.commutator) < 1e-14);

  // mu = 0 reduces to the open oracle
  auto plain = bkc_mu_oracle(n, 1.0, 0.5, 0.0);
  auto open_oracle = bkc_open_oracle(n, 1.0, 0.5);
  expect_multiset_match(plain.spectrum, open_oracle.spectrum, 1e-14);

  // localization: |delta| < 1 decays toward the right edge
  auto loc = bkc_mu_oracle(6, 1.0, 0.5, 0.3);
  CHECK(std::abs(loc.decay) < 1.0);
  double first = loc.gamma_left.segment<2>(0).norm();
  double last = loc.gamma_left.segment<2>(2 * 5).norm();
  CHECK(last < first * 0.01);

  CHECK_THROWS_AS(bkc_mu_oracle(4, 0.0, 0.5, 0.1), Error);
}

TEST_CASE("quadrature commutators follow the canonical algebra") {
  const int n = 3;
  for (int j = 1; j <= n; ++j) {
    for (int k = 1; k <= n; ++k) {
      Complex xp = operator_commutator(quadrature_x_vector(n, j), quadrature_p_vector(n, k));
      CHECK(std::abs(xp - (j == k ? Complex(0, 1) : Complex(0, 0))) < 1e-14);
      Complex xx = operator_commutator(quadrature_x_vector(n, j), quadrature_x_vector(n, k));
      CHECK(std::abs(xx) < 1e-14);
    }
  }
}

TEST_CASE("fermion to boson map") {
  const int n = 4;
  double t = 1.0, delta = 0.5;
  // restricted fermionic class: K_f real symmetric, Delta_f Hermitian imaginary
  Matrix kf = Matrix::Zero(n, n), df = Matrix::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) {
    kf(j, j + 1) = delta / 2;
    kf(j + 1, j) = delta / 2;
    df(j + 1, j) = Complex(0, t / 2);
    df(j, j + 1) = Complex(0, -t / 2);
  }
  QbhSpec b = fermion_to_boson_map(kf, df);
  CHECK(validate_qbh(b).ok());
  // image satisfies the decoupling condition: purely imaginary K, Delta
  CHECK(b.hopping.real().cwiseAbs().maxCoeff() < 1e-14);
  CHECK(b.pairing.real().cwiseAbs().maxCoeff() < 1e-14);
  // K_b = Delta_f, Delta_b = i K_f
  CHECK((b.hopping - df).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((b.pairing - Complex(0, 1) * kf).cwiseAbs().maxCoeff() < 1e-14);

  // zero input -> zero output
  QbhSpec z = fermion_to_boson_map(Matrix::Zero(2, 2), Matrix::Zero(2, 2));
  CHECK(z.hopping.cwiseAbs().maxCoeff() == 0.0);

  // precondition violations throw
  Matrix bad = Matrix::Identity(2, 2);  // Hermitian but not purely imaginary
  CHECK_THROWS_AS(fermion_to_boson_map(Matrix::Zero(2, 2), bad), Error);
}

TEST_CASE("fermion-boson images are never robustly stable") {
  // stable images exist only on the K_f = 0 (number-conserving) slice; the
  // pairing i K_f destabilizes the collided spectrum for generic draws
  std::mt19937 rng(404);
  std::normal_distribution<double> dist;
  int stable_checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3;
    RealMatrix a(n, n), s(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        a(i, j) = dist(rng);
        s(i, j) = dist(rng);
      }
    }
    bool conserving = trial % 2 == 0;
    Matrix kf = conserving ? Matrix(Matrix::Zero(n, n))
                           : Matrix((0.5 * (s + s.transpose())).cast<Complex>());
    Matrix df = Complex(0, 0.5) * (a - a.transpose()).cast<Complex>();
    QbhSpec b = fermion_to_boson_map(kf, df);
    Matrix g = build_effective_sph(b);
    SpectrumReport rep = eigendecompose(g);
    auto verdict = dynamical_stability(g);
    if (verdict.state == StabilityState::stable) {
      auto collisions = detect_krein_collisions(g, rep);
      CHECK_FALSE(collisions.empty());
      ++stable_checked;
    }
  }
  CHECK(stable_checked > 0);
}

TEST_CASE("model registry dispatches and reports schema errors") {
  QbhSpec spec = make_model("bkc", {{"N", 4}, {"t", 1.0}, {"Delta", 0.5}});
  CHECK(spec.modes() == 4);
  CHECK_THROWS_WITH_AS(make_model("nope", {}), doctest::Contains("unknown model"), Error);
  CHECK_THROWS_WITH_AS(make_model("bkc", {{"N", 4}}), doctest::Contains("needs parameter"),
                       Error);
}
