#include "kreinstab/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "kreinstab/krein.hpp"
#include "kreinstab/models.hpp"
#include "kreinstab/nambu.hpp"
#include "kreinstab/spectral.hpp"

namespace ks {

namespace {

Matrix model_matrix(const std::string& model, std::map<std::string, double> params,
                    const std::map<std::string, double>& overrides) {
  for (const auto& [k, v] : overrides) params[k] = v;
  return build_effective_sph(make_model(model, params));
}

// eigenvalues-only fast path for grid points
Vector spectrum_only(const Matrix& g) {
  Eigen::ComplexEigenSolver<Matrix> solver(g, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::numeric_failure, "eigensolver failed");
  }
  return solver.eigenvalues();
}

void parallel_for(int n, const std::function<void(int)>& body) {
  int workers = std::min(scan_worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next(0);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

int best_overlap_index(const Vector& prev, const Matrix& vectors) {
  int best = 0;
  double best_overlap = -1;
  for (int i = 0; i < vectors.cols(); ++i) {
    double overlap = std::abs(prev.dot(vectors.col(i)));
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = i;
    }
  }
  return best;
}

// per-vector Krein signatures with Gram diagonalization inside real
// eigenvalue clusters (individual signs are meaningless in degenerate mixes)
std::vector<int> flow_signatures(const SpectrumReport& rep, const Tolerances& tol) {
  std::vector<int> sig(static_cast<size_t>(rep.size()), 0);
  std::vector<bool> done(static_cast<size_t>(rep.cluster_count()), false);
  for (int i = 0; i < rep.size(); ++i) {
    int c = rep.cluster[i];
    if (done[static_cast<size_t>(c)]) continue;
    done[static_cast<size_t>(c)] = true;
    if (std::abs(rep.cluster_value[static_cast<size_t>(c)].imag()) >
        tol.realness * rep.scale) {
      continue;  // complex eigenvalues keep signature 0
    }
    auto members = rep.cluster_members(c);
    Matrix vecs(rep.size(), static_cast<Eigen::Index>(members.size()));
    for (size_t k = 0; k < members.size(); ++k) {
      vecs.col(static_cast<Eigen::Index>(k)) = rep.right_vectors.col(members[k]);
    }
    Matrix gram = tau3_gram(vecs);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (gram + gram.adjoint()));
    for (size_t k = 0; k < members.size(); ++k) {
      double v = es.eigenvalues()(static_cast<Eigen::Index>(k));
      Vector col = vecs * es.eigenvectors().col(static_cast<Eigen::Index>(k));
      double n2 = col.squaredNorm();
      sig[static_cast<size_t>(members[k])] =
          std::abs(v) <= tol.signature_null * n2 ? 0 : (v > 0 ? 1 : -1);
    }
  }
  return sig;
}

// KPR of a tracked eigenvector using the spectrum's conjugate partner
double tracked_kpr(const SpectrumReport& rep, int index, const Tolerances& tol) {
  const Vector psi = rep.right_vectors.col(index);
  if (rep.realness[static_cast<size_t>(index)]) {
    double s = std::abs(tau3_inner(psi, psi).real());
    return std::min(s / psi.squaredNorm(), 1.0);
  }
  (void)tol;
  int partner = rep.conj_partner[static_cast<size_t>(index)];
  if (partner < 0) return std::numeric_limits<double>::quiet_NaN();
  const Vector phi = rep.right_vectors.col(partner);
  double denom = phi.norm() * psi.norm();
  if (denom == 0) return std::numeric_limits<double>::quiet_NaN();
  return std::min(std::abs(tau3_inner(phi, psi)) / denom, 1.0);
}

}  // namespace

int Axis::count() const {
  if (step <= 0 || max < min) {
    throw Error(ErrorCode::invalid_argument, "axis needs step > 0 and max >= min");
  }
  // samples stay inside [min, max]; the epsilon absorbs division rounding
  double span = (max - min) / step;
  return static_cast<int>(std::floor(span * (1.0 + 4e-16) + 1e-9)) + 1;
}

const ScanRecord& ScanGrid::at(int i1, int i2) const {
  return records[static_cast<size_t>(i1) * static_cast<size_t>(axis2.count()) +
                 static_cast<size_t>(i2)];
}

int scan_worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("KS_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) return std::min(cap, hw);
  }
  return hw;
}

ScanGrid stability_scan(const std::string& model, const std::map<std::string, double>& base,
                        const Axis& axis1, const Axis& axis2, const Tolerances& tol) {
  ScanGrid grid;
  grid.model = model;
  grid.base_params = base;
  grid.axis1 = axis1;
  grid.axis2 = axis2;
  const int n1 = axis1.count(), n2 = axis2.count();
  grid.records.assign(static_cast<size_t>(n1) * static_cast<size_t>(n2), ScanRecord{});

  parallel_for(n1 * n2, [&](int idx) {
    int i1 = idx / n2, i2 = idx % n2;
    ScanRecord& rec = grid.records[static_cast<size_t>(idx)];
    rec.i1 = i1;
    rec.i2 = i2;
    rec.v1 = axis1.value(i1);
    rec.v2 = axis2.value(i2);
    try {
      Matrix g = model_matrix(model, base, {{axis1.name, rec.v1}, {axis2.name, rec.v2}});
      Vector evs = spectrum_only(g);
      double scale = matrix_scale(g);
      double max_im = 0, min_mod = 1e300;
      for (int k = 0; k < evs.size(); ++k) {
        max_im = std::max(max_im, std::abs(evs(k).imag()));
        min_mod = std::min(min_mod, std::abs(evs(k)));
      }
      rec.max_imag = max_im;
      rec.min_modulus = min_mod;
      rec.stable = max_im <= tol.realness * scale ? 1 : 0;
    } catch (const Error&) {
      rec.stable = -1;
    }
  });

  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      auto& rec = grid.records[static_cast<size_t>(i1) * n2 + i2];
      for (auto [d1, d2] :
           std::vector<std::pair<int, int>>{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        int a = i1 + d1, b = i2 + d2;
        if (a < 0 || a >= n1 || b < 0 || b >= n2) continue;
        if (grid.records[static_cast<size_t>(a) * n2 + b].stable != rec.stable) {
          rec.boundary = true;
          break;
        }
      }
    }
  }
  return grid;
}

ScanGrid kpr_scan(const std::string& model, const std::map<std::string, double>& base,
                  const Axis& axis1, const Axis& axis2, int seed_index, const Tolerances& tol) {
  ScanGrid grid = stability_scan(model, base, axis1, axis2, tol);
  grid.has_kpr = true;
  const int n1 = grid.axis1.count(), n2 = grid.axis2.count();

  // degenerate spectra make continuous tracking ambiguous; the published
  // maps restrict to odd chain sizes for the same reason
  {
    auto it = base.find("N");
    if (it != base.end() && static_cast<int>(it->second) % 2 == 0) {
      grid.diagnostics.push_back(
          "warning: even chain sizes carry doubly degenerate spectra; "
          "eigenvector tracking may be unreliable");
    }
  }

  Vector tracked;
  bool have_tracked = false;
  // serpentine traversal keeps consecutive cells adjacent in parameter space
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int step = 0; step < n2; ++step) {
      int i2 = i1 % 2 == 0 ? step : n2 - 1 - step;
      ScanRecord& rec = grid.records[static_cast<size_t>(i1) * n2 + i2];
      try {
        Matrix g =
            model_matrix(model, base, {{grid.axis1.name, rec.v1}, {grid.axis2.name, rec.v2}});
        SpectrumReport rep = eigendecompose(g, tol);
        int pick;
        if (!have_tracked) {
          if (seed_index >= 0 && seed_index < rep.size()) {
            pick = seed_index;
          } else {
            pick = 0;  // default: eigenvector of the largest real eigenvalue
            for (int k = 0; k < rep.size(); ++k) {
              if (rep.realness[static_cast<size_t>(k)]) pick = k;
            }
          }
          rec.min_overlap = 1.0;
          have_tracked = true;
        } else {
          pick = best_overlap_index(tracked, rep.right_vectors);
          rec.min_overlap = std::abs(tracked.dot(rep.right_vectors.col(pick).normalized()));
          if (rec.min_overlap < tol.continuity_floor) {
            std::ostringstream msg;
            msg << "tracking loss at (" << rec.v1 << ", " << rec.v2 << "): overlap "
                << rec.min_overlap;
            grid.diagnostics.push_back(msg.str());
            rec.kpr = std::numeric_limits<double>::quiet_NaN();
            tracked = rep.right_vectors.col(pick);  // re-seed and continue
            continue;
          }
        }
        tracked = rep.right_vectors.col(pick);
        rec.kpr = tracked_kpr(rep, pick, tol);
      } catch (const Error& e) {
        rec.kpr = std::numeric_limits<double>::quiet_NaN();
        grid.diagnostics.push_back(std::string("kpr cell failed: ") + e.what());
      }
    }
  }
  return grid;
}

FlowTrace spectral_flow(const std::string& model, const std::map<std::string, double>& base,
                        const ParamPath& path, int steps, const Tolerances& tol) {
  if (steps < 2) {
    throw Error(ErrorCode::invalid_argument, "spectral flow needs at least two steps");
  }
  FlowTrace trace;
  Matrix prev_vectors;
  std::vector<std::pair<int, int>> active_mergers;
  for (int k = 0; k < steps; ++k) {
    double sigma = double(k) / double(steps - 1);
    Matrix g = model_matrix(model, base, path(sigma));
    SpectrumReport rep = eigendecompose(g, tol);
    std::vector<int> sig = flow_signatures(rep, tol);

    FlowStep step;
    step.sigma = sigma;
    step.eigenvalues.resize(rep.size());
    step.signatures.assign(static_cast<size_t>(rep.size()), 0);

    std::vector<int> assignment(static_cast<size_t>(rep.size()));
    if (trace.steps.empty()) {
      for (int i = 0; i < rep.size(); ++i) assignment[static_cast<size_t>(i)] = i;
    } else {
      // greedy global assignment by maximal total |overlap|
      std::vector<std::tuple<double, int, int>> overlaps;
      for (int a = 0; a < rep.size(); ++a) {
        for (int b = 0; b < rep.size(); ++b) {
          overlaps.emplace_back(std::abs(prev_vectors.col(a).dot(rep.right_vectors.col(b))),
                                a, b);
        }
      }
      std::sort(overlaps.begin(), overlaps.end(),
                [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });
      std::vector<bool> src_done(static_cast<size_t>(rep.size()), false);
      std::vector<bool> dst_done(static_cast<size_t>(rep.size()), false);
      double min_overlap = 1.0;
      for (const auto& [ov, a, b] : overlaps) {
        if (src_done[static_cast<size_t>(a)] || dst_done[static_cast<size_t>(b)]) continue;
        assignment[static_cast<size_t>(a)] = b;
        src_done[static_cast<size_t>(a)] = true;
        dst_done[static_cast<size_t>(b)] = true;
        min_overlap = std::min(min_overlap, ov);
      }
      step.min_overlap = min_overlap;
      if (min_overlap < tol.continuity_floor) {
        std::ostringstream msg;
        msg << "tracking discontinuity at sigma = " << sigma << " (overlap " << min_overlap
            << ")";
        trace.events.push_back(msg.str());
      }
    }

    Matrix linked(rep.size(), rep.size());
    for (int a = 0; a < rep.size(); ++a) {
      int b = assignment[static_cast<size_t>(a)];
      step.eigenvalues(a) = rep.eigenvalues(b);
      step.signatures[static_cast<size_t>(a)] = sig[static_cast<size_t>(b)];
      linked.col(a) = rep.right_vectors.col(b);
    }

    // annotations: off-axis splittings and opposite-signature mergers
    if (!trace.steps.empty()) {
      const FlowStep& last = trace.steps.back();
      const double band = tol.realness * rep.scale;
      for (int a = 0; a < rep.size(); ++a) {
        bool was_real = std::abs(last.eigenvalues(a).imag()) <= band;
        bool is_real = std::abs(step.eigenvalues(a).imag()) <= band;
        if (was_real && !is_real) {
          std::ostringstream msg;
          msg << "off-axis splitting of tracked eigenvalue " << a << " at sigma = " << sigma;
          trace.events.push_back(msg.str());
        }
      }
      std::vector<std::pair<int, int>> mergers;
      for (int a = 0; a < rep.size(); ++a) {
        for (int b = a + 1; b < rep.size(); ++b) {
          if (step.signatures[static_cast<size_t>(a)] *
                      step.signatures[static_cast<size_t>(b)] ==
                  -1 &&
              std::abs(step.eigenvalues(a) - step.eigenvalues(b)) <
                  10 * tol.cluster * rep.scale) {
            mergers.emplace_back(a, b);
            // annotate only when the pair first touches
            bool was_active =
                std::find(active_mergers.begin(), active_mergers.end(),
                          std::make_pair(a, b)) != active_mergers.end();
            if (!was_active) {
              std::ostringstream msg;
              msg << "opposite-signature merger between " << a << " and " << b
                  << " at sigma = " << sigma;
              trace.events.push_back(msg.str());
            }
          }
        }
      }
      active_mergers = std::move(mergers);
    }

    prev_vectors = linked;
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

ContourTrace contour_eval(const std::string& model, const std::map<std::string, double>& base,
                          const ParamPath& path, ContourQuantity quantity, int steps,
                          const Tolerances& tol) {
  if (steps < 2) {
    throw Error(ErrorCode::invalid_argument, "contour evaluation needs at least two steps");
  }
  ContourTrace trace;
  Vector tracked;
  bool have_tracked = false;
  for (int k = 0; k < steps; ++k) {
    double sigma = double(k) / double(steps - 1);
    trace.sigma.push_back(sigma);
    try {
      Matrix g = model_matrix(model, base, path(sigma));
      if (quantity != ContourQuantity::kpr) {
        Vector evs = spectrum_only(g);
        double acc = quantity == ContourQuantity::max_imag ? 0 : 1e300;
        for (int i = 0; i < evs.size(); ++i) {
          if (quantity == ContourQuantity::max_imag) {
            acc = std::max(acc, std::abs(evs(i).imag()));
          } else {
            acc = std::min(acc, std::abs(evs(i)));
          }
        }
        trace.value.push_back(acc);
        continue;
      }
      SpectrumReport rep = eigendecompose(g, tol);
      int pick;
      if (!have_tracked) {
        pick = 0;
        for (int i = 0; i < rep.size(); ++i) {
          if (rep.realness[static_cast<size_t>(i)]) pick = i;
        }
        have_tracked = true;
      } else {
        pick = best_overlap_index(tracked, rep.right_vectors);
        double overlap = std::abs(tracked.dot(rep.right_vectors.col(pick)));
        if (overlap < tol.continuity_floor) {
          std::ostringstream msg;
          msg << "tracking loss at sigma = " << sigma << " (overlap " << overlap << ")";
          trace.diagnostics.push_back(msg.str());
        }
      }
      tracked = rep.right_vectors.col(pick);
      trace.value.push_back(tracked_kpr(rep, pick, tol));
    } catch (const Error& e) {
      trace.value.push_back(std::numeric_limits<double>::quiet_NaN());
      trace.diagnostics.push_back(std::string("contour point failed: ") + e.what());
    }
  }
  return trace;
}

}  // namespace ks
