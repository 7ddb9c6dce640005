#ifndef KREINSTAB_DYNAMICS_HPP
#define KREINSTAB_DYNAMICS_HPP

#include <vector>

#include "kreinstab/nambu.hpp"
#include "kreinstab/types.hpp"

namespace ks {

/// Solution operator exp(i G t) of d/dt |a(t)> = i G |a(t)>, via
/// scaling-and-squaring.
Matrix propagator(const Matrix& g, double t);

/// Same operator through the modal decomposition; requires G diagonalizable.
/// Kept as an independent route for cross-checking the Pade path.
Matrix propagator_modal(const Matrix& g, double t, const Tolerances& tol = {});

/// Evolution of a Jordan chain under exp(i G t): restriction of the
/// propagator to the chain span,
/// chi_k(t) = e^{i w0 t} sum_l (i t)^l / l! chi_{k-l}.
std::vector<Vector> jordan_mode_evolution(const std::vector<Vector>& chain, Complex omega0,
                                          double t);

enum class GrowthClass { bounded, polynomial, exponential };

struct ModeTrajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  GrowthClass growth = GrowthClass::bounded;
  double fitted_rate = 0.0;    // exponential rate or polynomial degree
};

/// Evolves a mode vector at the requested times (exact exponential per time)
/// and classifies the growth of its norm.
ModeTrajectory evolve_mode(const Matrix& g, const Vector& v0, const std::vector<double>& times,
                           const Tolerances& tol = {});

/// Quadrature equations of motion: dx/dt = C^T x + T p, dp/dt = -V x - C p
/// with C = Im(Delta - K), V = Re(K + Delta), T = Re(K - Delta).
/// The quadratures decouple iff K and Delta are purely imaginary.
struct QuadratureCouplings {
  bool decoupled = false;
  RealMatrix c, v, t;
};
QuadratureCouplings quadrature_decoupling_check(const QbhSpec& spec, double tol = 1e-10);

struct QuadratureTrajectory {
  std::vector<double> times;
  RealMatrix x;  // sites x times
  RealMatrix p;
  bool coupled = false;      // simulation ran on the full system
  double chirality_x = 0.0;  // right-to-left energy ratio at the final time
  double chirality_p = 0.0;
};

/// Evolves real quadrature profiles under the (real) quadrature generator.
QuadratureTrajectory phase_transport_sim(const QbhSpec& spec, const RealVector& x0,
                                         const RealVector& p0, const std::vector<double>& times);

/// Decoupled + dynamically stable specs must host Krein collisions.
struct Prop51Result {
  bool applicable = false;  // decoupled and dynamically stable
  bool pass = false;        // vacuously true when not applicable
  std::string evidence;
};
Prop51Result prop_5_1_check(const QbhSpec& spec, const Tolerances& tol = {});

}  // namespace ks

#endif
