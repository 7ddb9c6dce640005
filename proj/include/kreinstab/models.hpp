#ifndef KREINSTAB_MODELS_HPP
#define KREINSTAB_MODELS_HPP

#include <map>
#include <string>
#include <vector>

#include "kreinstab/gbt.hpp"
#include "kreinstab/nambu.hpp"
#include "kreinstab/types.hpp"

namespace ks {

// ---------------------------------------------------------------- single mode

enum class SingleModePhase { harmonic_oscillator, parametric_amplifier, free_particle, zero_frequency };

struct SingleModeOracle {
  Complex omega_plus;   // +2 sqrt(alpha beta)
  Complex omega_minus;
  double kpr;           // 2 sqrt(|alpha beta|) / (|alpha| + |beta|); NaN for G = 0
  SingleModePhase phase;
};

/// H = alpha p^2 + beta x^2 as a one-mode QBH: K = [alpha+beta],
/// Delta = [beta-alpha].
QbhSpec single_mode(double alpha, double beta);
SingleModeOracle single_mode_oracle(double alpha, double beta);

// ----------------------------------------------------------------- cavity QED

struct CavityOracle {
  std::vector<Complex> spectrum;  // Omega_{1,pm}, Omega_{2,pm}
  double x, y, f;
  bool stable;                    // f >= 0
};

/// Linearized two-mode cavity QED model: modes (a, b), K = [[wc, chi],[chi, -ws]],
/// Delta = [[0, chi],[chi, 0]]. Requires wc, ws > 0.
QbhSpec cavity_qed(double omega_c, double omega_s, double chi);
CavityOracle cavity_qed_oracle(double omega_c, double omega_s, double chi);
/// Stability boundary |y| = (x^2 + 2x)/(4 sqrt(x+1)) in x = (wc-ws)/ws, y = chi/ws.
double cavity_boundary_y(double x);

// ------------------------------------------------------------------------ BKC

struct BkcParams {
  int sites = 2;       // N
  double t = 1.0;      // hopping > 0
  double delta = 0.5;  // pairing > 0
  double s = 0.0;      // boundary strength in [0, 1]
  double phi = 0.0;    // twist angle in [0, pi]
};

/// Localization parameter 2r = ln((t+Delta)/|t-Delta|).
double bkc_r(double t, double delta);

QbhSpec bkc(const BkcParams& p);
BbtSpec bkc_bbt(const BkcParams& p);

/// Open-BC closed forms (t != Delta): doubly degenerate spectrum
/// sqrt(t^2 - Delta^2) cos(m pi / (N+1)) and the generalized-Bloch eigenbasis.
struct BkcOpenOracle {
  std::vector<Complex> spectrum;  // 2N values with multiplicity
  Matrix vectors;                 // 2N columns; column 2(m-1)+f is family f of level m
  std::vector<Complex> vector_eigenvalues;  // eigenvalue per column
  double r;
  int sign;  // sgn(t - Delta)
};
BkcOpenOracle bkc_open_oracle(int sites, double t, double delta, double squeeze = 0.0);

/// pi/2-twisted closed forms (t != Delta): spectrum
/// sqrt(t^2 - Delta^2) sin((m+1/2) pi / N), m = 0..2N-1, with zeta-spinor vectors.
struct BkcTwistedOracle {
  std::vector<Complex> spectrum;
  Matrix vectors;
  std::vector<Complex> vector_eigenvalues;
  Complex r_prime;
};
BkcTwistedOracle bkc_twisted_pi2_oracle(int sites, double t, double delta);

/// Periodic / antiperiodic spectrum from the Bloch blocks
/// {t sin k + i Delta cos k, conj} over the momentum set.
std::vector<Complex> bkc_periodic_oracle(int sites, double t, double delta, bool antiperiodic);
std::vector<double> bkc_momentum_set(int sites, bool antiperiodic);

/// t = Delta, s = 1, phi in (0, pi): spectrum on a shrinking circle,
/// closed-form eigenvectors (N odd), KPR, overlap and spectral speed.
struct BkcTDeltaTwistedOracle {
  std::vector<Complex> spectrum;
  Matrix vectors;        // N odd only; empty otherwise
  std::vector<Complex> vector_eigenvalues;
  double kpr;            // same value for every eigenvector
  double spectral_speed; // |d|omega|/dphi| = (t/N) |cos phi|^{1/N-1} sin phi
};
BkcTDeltaTwistedOracle bkc_tdelta_twisted_oracle(int sites, double t, double phi);
/// Fidelity overlap O_m with the coalescing eigenvector (N odd).
double bkc_tdelta_overlap(int sites, double phi, int m);
/// Large-N limit of the twisted KPR, |c| ln|c| / (|c|^2 - 1) with c = cos phi.
double bkc_kpr_large_n_limit(double phi);
double bkc_tdelta_kpr(int sites, double phi);

/// Exact Jordan chains at omega = 0 for t = Delta.
enum class BkcBoundary { open, twisted_pi2 };
struct BkcJordanOracle {
  std::vector<std::vector<Vector>> chains;  // descending length
};
BkcJordanOracle bkc_tdelta_jordan_oracle(int sites, double t, BkcBoundary bc);

/// Phase boundary curves cos(phi) = +/- (1/2)(s + 1/s) sech(Nr) (N even),
/// +/- sech(Nr) (N odd), and the minimum stable height/width.
struct BkcPhaseBoundaryOracle {
  int sites;
  double r;
  double delta_s;    // e^{-Nr} for N even, 0 for N odd
  double delta_phi;  // 2 asin(sech(Nr))
  bool even;

  /// Left/right boundary angle at strength s; NaN when no boundary exists.
  double phi_minus(double s) const;
  double phi_plus(double s) const;
};
BkcPhaseBoundaryOracle bkc_phase_boundary_oracle(int sites, double t, double delta);

/// mu-extended chain: G = G_open + i mu tau1. Spectrum splits to
/// omega_m +/- i mu; Majorana-boson edge modes gamma_L/R.
struct BkcMuOracle {
  std::vector<Complex> spectrum;
  Vector gamma_left;       // coefficient vector of sum delta^{j-1} x_j
  Vector gamma_right;      // coefficient vector of sum delta^{N-j} p_j
  double edge_magnitude;   // t |delta|^N, the expected |G gamma_L| support
  Complex commutator;      // i N delta^{N-1}
  double decay;            // delta = -mu/t
};
QbhSpec bkc_mu(int sites, double t, double delta, double mu);
BkcMuOracle bkc_mu_oracle(int sites, double t, double delta, double mu);

/// Coefficient vectors of the Hermitian quadratures x_j, p_j in the
/// <v|tau3 Phi> operator convention.
Vector quadrature_x_vector(int sites, int site);
Vector quadrature_p_vector(int sites, int site);
/// Many-body commutator [u_hat, v_hat] = -<u|tau3 tau1|v^*> of two mode operators.
Complex operator_commutator(const Vector& u, const Vector& v);

// --------------------------------------------------------- fermion-boson map

/// Maps a restricted quadratic fermion Hamiltonian (K real symmetric,
/// Delta Hermitian purely imaginary) to the QBH with K_b = Delta_f,
/// Delta_b = i K_f. The output satisfies the quadrature decoupling condition.
QbhSpec fermion_to_boson_map(const Matrix& k_fermi, const Matrix& delta_fermi,
                             double tol = 1e-10);

// ----------------------------------------------------------- model registry

/// Builds a model by name with a flat parameter map (CLI/JSON surface).
/// Known names: "single_mode", "cavity_qed", "bkc", "bkc_mu".
QbhSpec make_model(const std::string& name, const std::map<std::string, double>& params);

}  // namespace ks

#endif
