#include "kreinstab/dynamics.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "kreinstab/krein.hpp"
#include "kreinstab/spectral.hpp"

namespace ks {

Matrix propagator(const Matrix& g, double t) {
  Matrix a = Complex(0, 1) * t * g;
  return a.exp();
}

Matrix propagator_modal(const Matrix& g, double t, const Tolerances& tol) {
  SpectrumReport rep = eigendecompose(g, tol);
  for (int i = 0; i < rep.size(); ++i) {
    if (rep.geometric_mult[i] < rep.algebraic_mult[i]) {
      throw Error(ErrorCode::invalid_argument,
                  "modal propagator requires a diagonalizable matrix");
    }
  }
  Eigen::PartialPivLU<Matrix> lu(rep.right_vectors);
  Vector phases(rep.size());
  for (int i = 0; i < rep.size(); ++i) {
    phases(i) = std::exp(Complex(0, 1) * t * rep.eigenvalues(i));
  }
  return rep.right_vectors * phases.asDiagonal() * lu.inverse();
}

std::vector<Vector> jordan_mode_evolution(const std::vector<Vector>& chain, Complex omega0,
                                          double t) {
  if (chain.empty()) {
    throw Error(ErrorCode::invalid_argument, "empty Jordan chain");
  }
  const Complex phase = std::exp(Complex(0, 1) * omega0 * t);
  std::vector<Vector> evolved;
  evolved.reserve(chain.size());
  for (size_t k = 0; k < chain.size(); ++k) {
    Vector v = Vector::Zero(chain[0].size());
    Complex coeff(1, 0);
    for (size_t l = 0; l <= k; ++l) {
      if (l > 0) coeff *= Complex(0, t) / double(l);
      v += coeff * chain[k - l];
    }
    evolved.push_back(phase * v);
  }
  return evolved;
}

ModeTrajectory evolve_mode(const Matrix& g, const Vector& v0, const std::vector<double>& times,
                           const Tolerances& tol) {
  ModeTrajectory out;
  out.times = times;
  out.states.reserve(times.size());
  for (double t : times) {
    out.states.push_back(propagator(g, t) * v0);
  }
  // growth classification from the norm history over the last time decade;
  // the slope threshold alone cannot separate polynomial from exponential on
  // a finite window, so the two fits compete on residual
  if (times.size() >= 4) {
    // running-max envelope: flat for bounded (even with non-normal
    // transients), monotone for genuine polynomial/exponential growth
    std::vector<size_t> order(times.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return times[a] < times[b]; });
    double tmax = times[order.back()];
    double running = 1e-300;
    std::vector<std::pair<double, double>> tail;  // (t, log envelope)
    double env_mid = 1e-300, env_end = 1e-300;
    for (size_t idx : order) {
      running = std::max(running, std::max(out.states[idx].norm(), 1e-300));
      if (times[idx] <= tmax / 2.0) env_mid = running;
      env_end = running;
      if (times[idx] >= tmax / 10.0 && times[idx] > 0) {
        tail.emplace_back(times[idx], std::log(running));
      }
    }
    if (tail.size() >= 3 && env_end > 1.5 * env_mid) {
      auto fit = [](const std::vector<std::pair<double, double>>& pts) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : pts) {
          sx += x;
          sy += y;
          sxx += x * x;
          sxy += x * y;
        }
        double n = double(pts.size());
        double slope = (n * sxy - sx * sy) / std::max(n * sxx - sx * sx, 1e-300);
        double intercept = (sy - slope * sx) / n;
        double rss = 0;
        for (auto [x, y] : pts) {
          double e = y - slope * x - intercept;
          rss += e * e;
        }
        return std::pair<double, double>(slope, rss);
      };
      auto [slope, rss_exp] = fit(tail);
      std::vector<std::pair<double, double>> loglog;
      for (auto [x, y] : tail) loglog.emplace_back(std::log(x), y);
      auto [degree, rss_poly] = fit(loglog);
      if (degree >= 0.9 && rss_poly <= rss_exp) {
        out.growth = GrowthClass::polynomial;
        out.fitted_rate = degree;
        return out;
      }
      if (slope > 10 * tol.realness) {
        out.growth = GrowthClass::exponential;
        out.fitted_rate = slope;
        return out;
      }
    }
  }
  out.growth = GrowthClass::bounded;
  return out;
}

QuadratureCouplings quadrature_decoupling_check(const QbhSpec& spec, double tol) {
  QuadratureCouplings out;
  out.c = (spec.pairing - spec.hopping).imag();
  out.v = (spec.hopping + spec.pairing).real();
  out.t = (spec.hopping - spec.pairing).real();
  double re_k = spec.hopping.real().cwiseAbs().maxCoeff();
  double re_d = spec.pairing.real().cwiseAbs().maxCoeff();
  out.decoupled = re_k <= tol && re_d <= tol;
  return out;
}

QuadratureTrajectory phase_transport_sim(const QbhSpec& spec, const RealVector& x0,
                                         const RealVector& p0,
                                         const std::vector<double>& times) {
  const int n = spec.modes();
  if (x0.size() != n || p0.size() != n) {
    throw Error(ErrorCode::invalid_argument, "quadrature profiles must have N entries");
  }
  QuadratureCouplings qc = quadrature_decoupling_check(spec);
  QuadratureTrajectory out;
  out.times = times;
  out.coupled = !qc.decoupled;
  RealMatrix gen(2 * n, 2 * n);
  gen.topLeftCorner(n, n) = qc.c.transpose();
  gen.topRightCorner(n, n) = qc.t;
  gen.bottomLeftCorner(n, n) = -qc.v;
  gen.bottomRightCorner(n, n) = -qc.c;

  out.x.resize(n, static_cast<Eigen::Index>(times.size()));
  out.p.resize(n, static_cast<Eigen::Index>(times.size()));
  RealVector state0(2 * n);
  state0 << x0, p0;
  for (size_t i = 0; i < times.size(); ++i) {
    RealMatrix flow = (times[i] * gen).exp();
    RealVector state = flow * state0;
    out.x.col(static_cast<Eigen::Index>(i)) = state.head(n);
    out.p.col(static_cast<Eigen::Index>(i)) = state.tail(n);
  }

  auto chirality = [n](const RealVector& profile) {
    double left = 0, right = 0;
    for (int j = 0; j < n; ++j) {
      double e = profile(j) * profile(j);
      if (2 * j + 1 < n) left += e;
      if (2 * j + 1 > n) right += e;
    }
    return right / std::max(left, 1e-300);
  };
  if (!times.empty()) {
    out.chirality_x = chirality(out.x.col(out.x.cols() - 1));
    out.chirality_p = chirality(out.p.col(out.p.cols() - 1));
  }
  return out;
}

Prop51Result prop_5_1_check(const QbhSpec& spec, const Tolerances& tol) {
  Prop51Result out;
  QuadratureCouplings qc = quadrature_decoupling_check(spec, tol.validation);
  std::ostringstream evidence;
  if (!qc.decoupled) {
    out.applicable = false;
    out.pass = true;
    out.evidence = "not applicable: quadratures do not decouple";
    return out;
  }
  Matrix g = build_effective_sph(spec, tol.validation);
  SpectrumReport rep = eigendecompose(g, tol);
  StabilityVerdict verdict = dynamical_stability(g, tol);
  if (verdict.state != StabilityState::stable) {
    out.applicable = false;
    out.pass = true;
    out.evidence = "vacuously true: decoupled but not dynamically stable";
    return out;
  }
  out.applicable = true;
  auto collisions = detect_krein_collisions(g, rep, tol);
  out.pass = !collisions.empty();
  evidence << "decoupled + stable; " << collisions.size() << " Krein collision(s)";
  out.evidence = evidence.str();
  return out;
}

}  // namespace ks
