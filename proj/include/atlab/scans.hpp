#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "atlab/curves.hpp"
#include "atlab/sampler.hpp"
#include "atlab/stats.hpp"
#include "atlab/transfer.hpp"

namespace atlab {

struct ScanRow {
  double x = 0;        // β or t
  int k = 0;           // connection scale (theta scans)
  double value = 0;
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
  std::string backend;  // "exact" or "mc"
  std::string name;     // "theta", "S", "density1", "density2", "density_sum"
};

struct ThetaScanResult {
  std::vector<ScanRow> rows;
  CrossingCI beta_c;                          // threshold 1/2 on the largest k
  std::map<double, CrossingCI> sensitivity;  // thresholds 0.25 and 0.75
  bool monotone_in_beta = true;               // within error bars
  bool monotone_in_k = true;
};

struct McmcSettings {
  uint64_t seed = 1;
  int chains = 4;
  uint64_t sweeps = 30000;
  uint64_t burn_in = 10000;
  uint64_t thin = 10;
  int threads = 0;
};

// θ_k(β) = GAT^{1,f}_{B_{2k}, γ(β)}[0 ↔ Z^d ∖ B_{k-1}]; θ_0 ≡ 1 since
// B_{-1} = ∅. The exact backend covers k ≤ 1 (local event, transfer DP);
// larger k estimate the connection event by MCMC.
inline double theta_mcmc(const Couplings& c, int d, int k, const McmcSettings& ms, double* stderr_out) {
  Region r = Region::box(d, 2 * k);
  std::vector<int> targets;  // vertices outside B_{k-1}
  for (int i = 0; i < r.num_vertices(); ++i)
    if (r.max_norm(i) >= k) targets.push_back(i);
  Coord origin{};
  int oi = r.vertex_index(origin);
  auto per_chain = run_chains(
      r, c, BoundaryCondition::plus(), BoundaryCondition::free_bc(), ms.seed, ms.chains, ms.sweeps, ms.burn_in,
      ms.thin,
      [&](ChainState& st, uint64_t, ObservableSeries& s) {
        EdgeConfig om = sample_gat(st);
        auto roots = r.component_roots(om);
        bool conn = roots[oi] == roots[r.num_vertices()];
        if (!conn)
          for (int v : targets)
            if (roots[v] == roots[oi]) {
              conn = true;
              break;
            }
        s.add("theta", conn ? 1.0 : 0.0);
      },
      ms.threads);
  ObservableSeries all = merge_series(per_chain);
  BatchStats bs = all.stats("theta");
  if (stderr_out) *stderr_out = bs.stderr_;
  return bs.mean;
}

inline ThetaScanResult theta_scan(const GammaCurve& curve, const std::vector<double>& betas,
                                  const std::vector<int>& ks, bool use_mcmc, int d = 2,
                                  const McmcSettings& ms = {}) {
  ThetaScanResult out;
  std::map<int, std::vector<double>> theta_by_k, err_by_k;
  for (int k : ks) {
    for (double beta : betas) {
      ScanRow row;
      row.x = beta;
      row.k = k;
      row.name = "theta";
      if (k == 0) {
        row.value = 1.0;
        row.backend = "exact";
      } else if (!use_mcmc) {
        if (k != 1) throw CapExceeded("theta_scan: exact backend covers k <= 1 only");
        if (d != 2) throw CapExceeded("theta_scan: exact backend is d = 2 only");
        row.value = theta1_exact(curve.at(beta));
        row.backend = "exact";
      } else {
        double se = 0;
        row.value = theta_mcmc(curve.at(beta), d, k, ms, &se);
        row.stderr_ = se;
        row.backend = "mc";
      }
      theta_by_k[k].push_back(row.value);
      err_by_k[k].push_back(std::isnan(row.stderr_) ? 0.0 : row.stderr_);
      out.rows.push_back(row);
    }
  }
  // S_n(β) = Σ_{k=0}^{n-1} θ_k over the scanned k's (prefix sums in k).
  for (size_t bi = 0; bi < betas.size(); ++bi) {
    double s = 0;
    for (int k : ks) s += theta_by_k[k][bi];
    ScanRow row;
    row.x = betas[bi];
    row.k = static_cast<int>(ks.size());
    row.value = s;
    row.backend = use_mcmc ? "mc" : "exact";
    row.name = "S";
    out.rows.push_back(row);
  }
  // Monotonicity within 3 error bars.
  for (auto& [k, th] : theta_by_k) {
    for (size_t i = 1; i < th.size(); ++i) {
      double slack = 3 * (err_by_k[k][i] + err_by_k[k][i - 1]);
      if (th[i] < th[i - 1] - slack - 1e-12) out.monotone_in_beta = false;
    }
  }
  for (size_t bi = 0; bi < betas.size(); ++bi) {
    for (size_t ki = 1; ki < ks.size(); ++ki) {
      double hi = theta_by_k[ks[ki - 1]][bi] + 3 * err_by_k[ks[ki - 1]][bi];
      double lo = theta_by_k[ks[ki]][bi] - 3 * err_by_k[ks[ki]][bi];
      if (lo > hi + 1e-12) out.monotone_in_k = false;
    }
  }
  int kmax = ks.back();
  out.beta_c = bootstrap_crossing(betas, theta_by_k[kmax], err_by_k[kmax], 0.5, ms.seed);
  for (double thr : {0.25, 0.75})
    out.sensitivity[thr] = bootstrap_crossing(betas, theta_by_k[kmax], err_by_k[kmax], thr, ms.seed + 1);
  return out;
}

// Edge densities of the two coupled graphical representations along the
// isotropic curves: the (1,f) density, the (0,+) density, and their sum
// (finite-n proxy of the infinite-volume statement).
struct EdgeDensityResult {
  std::vector<ScanRow> rows;
  bool sum_monotone = true;  // within error bars along the t grid
};

inline EdgeDensityResult edge_density_scan(const IsoCurve& curve, const std::vector<double>& ts, int n,
                                           bool use_mcmc, const McmcSettings& ms = {}) {
  EdgeDensityResult out;
  std::vector<double> sums, errs;
  Region r = Region::box(2, n);
  const int E = r.num_edges();
  for (double t : ts) {
    Couplings c = curve.at_t(t);
    double d1 = 0, d2 = 0, e1 = std::numeric_limits<double>::quiet_NaN(), e2 = e1;
    if (!use_mcmc) {
      if (n > 2) throw CapExceeded("edge_density_scan: exact backend covers n <= 2");
      KahanSum s1, s2;
      for (int e = 0; e < E; ++e) {
        s1.add(gat_edge_open_probability(r, c, BoundaryCondition::plus(), BoundaryCondition::free_bc(), e));
        s2.add(gat_edge_open_probability(r, c, BoundaryCondition::free_bc(), BoundaryCondition::plus(), e));
      }
      d1 = s1.value() / E;
      d2 = s2.value() / E;
    } else {
      auto density = [&](const BoundaryCondition& b1, const BoundaryCondition& b2, uint64_t salt, double* se) {
        auto per_chain = run_chains(
            r, c, b1, b2, ms.seed + salt, ms.chains, ms.sweeps, ms.burn_in, ms.thin,
            [&](ChainState& st, uint64_t, ObservableSeries& s) {
              EdgeConfig om = sample_gat(st);
              s.add("rho", static_cast<double>(om.open_count()) / E);
            },
            ms.threads);
        BatchStats bs = merge_series(per_chain).stats("rho");
        *se = bs.stderr_;
        return bs.mean;
      };
      d1 = density(BoundaryCondition::plus(), BoundaryCondition::free_bc(), 11, &e1);
      d2 = density(BoundaryCondition::free_bc(), BoundaryCondition::plus(), 13, &e2);
    }
    std::string backend = use_mcmc ? "mc" : "exact";
    out.rows.push_back({t, 0, d1, e1, backend, "density1"});
    out.rows.push_back({t, 0, d2, e2, backend, "density2"});
    double sum_err = (std::isnan(e1) ? 0 : e1) + (std::isnan(e2) ? 0 : e2);
    out.rows.push_back({t, 0, d1 + d2, use_mcmc ? sum_err : std::numeric_limits<double>::quiet_NaN(), backend,
                        "density_sum"});
    sums.push_back(d1 + d2);
    errs.push_back(sum_err);
  }
  for (size_t i = 1; i < sums.size(); ++i)
    if (sums[i] < sums[i - 1] - 3 * (errs[i] + errs[i - 1]) - 1e-12) out.sum_monotone = false;
  return out;
}

}  // namespace atlab
