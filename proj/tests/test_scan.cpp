#include "doctest.h"

#include <cmath>
#include <cstdlib>

#include "kreinstab/io.hpp"
#include "kreinstab/models.hpp"
#include "kreinstab/scan.hpp"

using namespace ks;

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("axis arithmetic") {
  Axis a{"s", 0.0, 1.0, 0.25};
  CHECK(a.count() == 5);
  CHECK(a.value(4) == doctest::Approx(1.0));
  Axis bad{"s", 0.0, 1.0, -1.0};
  CHECK_THROWS_AS(bad.count(), Error);
}

TEST_CASE("single-mode stability scan reproduces the quadrant diagram") {
  Axis alpha{"alpha", -1.0, 1.0, 0.25};
  Axis beta{"beta", -1.0, 1.0, 0.25};
  ScanGrid grid = stability_scan("single_mode", {}, alpha, beta);
  for (const auto& rec : grid.records) {
    bool same_sign = rec.v1 * rec.v2 > 0;
    bool axis_point = rec.v1 == 0.0 || rec.v2 == 0.0;
    if (axis_point) continue;  // boundary cells: defective, spectrally real
    CHECK(rec.stable == (same_sign ? 1 : 0));
  }
}

TEST_CASE("BKC stability scan: stable wedge around phi = pi/2") {
  Axis s_axis{"s", 0.0, 1.0, 0.1};
  Axis phi_axis{"phi", 0.0, kPi, kPi / 16};
  ScanGrid grid =
      stability_scan("bkc", {{"N", 5}, {"t", 1.0}, {"Delta", 0.25}}, s_axis, phi_axis);
  // s = 0 row (open chain) is stable at every twist angle
  for (int i2 = 0; i2 < phi_axis.count(); ++i2) {
    CHECK(grid.at(0, i2).stable == 1);
  }
  // periodic chain (s = 1, phi = 0) is unstable with max Im = Delta
  const auto& periodic = grid.at(s_axis.count() - 1, 0);
  CHECK(periodic.stable == 0);
  CHECK(periodic.max_imag == doctest::Approx(0.25).epsilon(1e-6));
  // the pi/2-twisted chain is stable
  CHECK(grid.at(s_axis.count() - 1, 8).stable == 1);
  // boundary cells exist and the phase diagram is phi -> pi - phi symmetric
  int boundary_count = 0;
  for (const auto& rec : grid.records) {
    if (rec.boundary) ++boundary_count;
  }
  CHECK(boundary_count > 0);
  for (int i1 = 0; i1 < s_axis.count(); ++i1) {
    for (int i2 = 0; i2 < phi_axis.count(); ++i2) {
      CHECK(grid.at(i1, i2).stable == grid.at(i1, phi_axis.count() - 1 - i2).stable);
    }
  }
}

TEST_CASE("scan is deterministic across worker counts") {
  Axis s_axis{"s", 0.0, 1.0, 0.2};
  Axis phi_axis{"phi", 0.0, kPi, kPi / 8};
  auto run = [&](const char* threads) {
    setenv("KS_THREADS", threads, 1);
    ScanGrid grid =
        stability_scan("bkc", {{"N", 4}, {"t", 1.0}, {"Delta", 0.5}}, s_axis, phi_axis);
    unsetenv("KS_THREADS");
    return scan_csv(grid);
  };
  std::string serial = run("1");
  std::string parallel = run("4");
  CHECK(serial == parallel);
  CHECK(run("1") == serial);  // repeated runs byte-identical
}

TEST_CASE("kpr scan on the single mode matches the closed form") {
  Axis alpha{"alpha", 0.2, 1.0, 0.2};
  Axis beta{"beta", 0.2, 1.0, 0.2};
  ScanGrid grid = kpr_scan("single_mode", {}, alpha, beta);
  REQUIRE(grid.has_kpr);
  for (const auto& rec : grid.records) {
    double expect = single_mode_oracle(rec.v1, rec.v2).kpr;
    CHECK(rec.kpr == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("spectral flow: small-s boundary perturbation keeps stability") {
  auto path = [](double sigma) {
    return std::map<std::string, double>{{"s", 0.1 * sigma}};
  };
  FlowTrace trace =
      spectral_flow("bkc", {{"N", 10}, {"t", 1.0}, {"Delta", 0.25}, {"phi", 0.0}}, path, 21);
  REQUIRE(trace.steps.size() == 21);
  // N = 10 at phi = 0: delta_s = e^{-10 r} = 0.0778; stability retained to s ~ 0.078
  auto boundary = bkc_phase_boundary_oracle(10, 1.0, 0.25);
  for (const auto& step : trace.steps) {
    double s = 0.1 * step.sigma;
    double max_im = 0;
    for (int i = 0; i < step.eigenvalues.size(); ++i) {
      max_im = std::max(max_im, std::abs(step.eigenvalues(i).imag()));
    }
    if (s < boundary.delta_s - 0.01) CHECK(max_im < 1e-8);
    if (s > boundary.delta_s + 0.01) CHECK(max_im > 1e-8);
  }
}

TEST_CASE("spectral flow: twist past pi/2 splits pairs symmetrically off axis") {
  auto path = [](double sigma) {
    return std::map<std::string, double>{{"phi", kPi / 2 + sigma * 0.03 * kPi / 2}};
  };
  FlowTrace trace =
      spectral_flow("bkc", {{"N", 15}, {"t", 1.0}, {"Delta", 0.25}, {"s", 1.0}}, path, 16);
  // start stable, end unstable, with off-axis events recorded
  double start_max = 0, end_max = 0;
  for (int i = 0; i < trace.steps.front().eigenvalues.size(); ++i) {
    start_max = std::max(start_max, std::abs(trace.steps.front().eigenvalues(i).imag()));
    end_max = std::max(end_max, std::abs(trace.steps.back().eigenvalues(i).imag()));
  }
  CHECK(start_max < 1e-8);
  CHECK(end_max > 1e-4);
  bool has_off_axis = false;
  for (const auto& e : trace.events) {
    if (e.find("off-axis") != std::string::npos) has_off_axis = true;
  }
  CHECK(has_off_axis);
  // symmetric splitting: spectrum stays closed under conjugation
  const auto& last = trace.steps.back();
  for (int i = 0; i < last.eigenvalues.size(); ++i) {
    Complex w = last.eigenvalues(i);
    double best = 1e300;
    for (int j = 0; j < last.eigenvalues.size(); ++j) {
      best = std::min(best, std::abs(last.eigenvalues(j) - std::conj(w)));
    }
    CHECK(best < 1e-9);
  }
}

TEST_CASE("contour: single mode along beta = alpha has constant KPR") {
  auto path = [](double sigma) {
    double alpha = -0.5 + sigma;  // crosses the origin
    return std::map<std::string, double>{{"alpha", alpha}, {"beta", alpha}};
  };
  ContourTrace trace = contour_eval("single_mode", {}, path, ContourQuantity::kpr, 41);
  for (size_t k = 0; k < trace.value.size(); ++k) {
    double alpha = -0.5 + trace.sigma[k];
    if (std::abs(alpha) < 0.05) continue;  // the collided origin itself
    CHECK(trace.value[k] == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("contour: single mode along beta = alpha^2 vanishes at the origin") {
  // KPR ~ 2 sqrt|alpha| near the crossing, so the sampling clusters there
  // cubically; an even step count straddles alpha = 0 without hitting it
  auto path = [](double sigma) {
    double u = 2 * sigma - 1;
    double alpha = 0.5 * u * u * u;
    return std::map<std::string, double>{{"alpha", alpha}, {"beta", alpha * alpha}};
  };
  ContourTrace trace = contour_eval("single_mode", {}, path, ContourQuantity::kpr, 40);
  double at_crossing = 1e300;
  double far_left = 0, far_right = 0;
  for (size_t k = 0; k < trace.value.size(); ++k) {
    double u = 2 * trace.sigma[k] - 1;
    double alpha = 0.5 * u * u * u;
    if (std::abs(alpha) < 0.03) at_crossing = std::min(at_crossing, trace.value[k]);
    if (alpha < -0.45) far_left = trace.value[k];
    if (alpha > 0.45) far_right = trace.value[k];
  }
  CHECK(at_crossing < 1e-2);
  CHECK(far_left > 0.5);
  CHECK(far_right > 0.5);
}

TEST_CASE("contour quantities max_imag and min_modulus") {
  auto path = [](double sigma) {
    return std::map<std::string, double>{{"s", sigma}};
  };
  ContourTrace max_im = contour_eval("bkc", {{"N", 4}, {"t", 1.0}, {"Delta", 0.5}, {"phi", 0.0}},
                                     path, ContourQuantity::max_imag, 11);
  CHECK(max_im.value.front() < 1e-10);                       // open: stable
  CHECK(max_im.value.back() == doctest::Approx(0.5).epsilon(1e-6));  // periodic
  ContourTrace min_mod = contour_eval("bkc", {{"N", 4}, {"t", 1.0}, {"Delta", 0.5}, {"phi", 0.0}},
                                      path, ContourQuantity::min_modulus, 11);
  CHECK(min_mod.value.front() > 0.1);  // open N even: no zero mode
}

TEST_CASE("tracking sanity: no boundary crossing keeps overlaps high") {
  // inside the stable wedge at phi = pi/2; both endpoints (s = 0 open and
  // s = 1 twisted) carry doubly degenerate spectra where eigenvector
  // mixtures are arbitrary, so the path stays strictly between them
  auto path = [](double sigma) {
    return std::map<std::string, double>{{"s", 0.02 + 0.95 * sigma}};
  };
  FlowTrace trace = spectral_flow(
      "bkc", {{"N", 5}, {"t", 1.0}, {"Delta", 0.25}, {"phi", kPi / 2}}, path, 200);
  double min_overlap = 1.0;
  for (size_t k = 1; k < trace.steps.size(); ++k) {
    min_overlap = std::min(min_overlap, trace.steps[k].min_overlap);
  }
  CHECK(min_overlap >= 0.99);
}

TEST_CASE("CSV documents carry the documented headers") {
  Axis a{"s", 0.0, 0.4, 0.2};
  Axis b{"phi", 0.0, 0.4, 0.2};
  ScanGrid grid = stability_scan("bkc", {{"N", 3}, {"t", 1.0}, {"Delta", 0.5}}, a, b);
  std::string csv = scan_csv(grid);
  CHECK(csv.rfind("i1,i2,s,phi,stable,max_im_omega,min_mod_omega,boundary\n", 0) == 0);
  // 17-significant-digit float formatting
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
}
