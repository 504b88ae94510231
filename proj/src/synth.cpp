#include "spatvine/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spatvine/csv.hpp"
#include "spatvine/optim.hpp"
#include "spatvine/rng.hpp"
#include "spatvine/stats.hpp"

namespace spatvine {

namespace {

// Covariates of the global-vine edge {root, j ; 0..root-1}. Trees 1 and 2
// mirror the local-vine links exactly; tree 3 conditions on the first two
// roots; deeper trees reuse the tree-3 form with the two most recent roots.
EdgeCovariates global_edge_cov(int root, int j, const CovariateTable& table) {
  EdgeCovariates cov;
  if (root == 0) {
    cov.tree = 1;
    cov.ln_d_ij = table.log_dist(0, j);
    cov.ln_e_ij = table.log_elev_diff(0, j);
  } else if (root == 1) {
    cov.tree = 2;
    cov.ln_d_ij = table.log_dist(1, j);
    cov.ln_d_ik = table.log_dist(1, 0);
    cov.ln_d_jk = table.log_dist(j, 0);
  } else {
    const int k = root == 2 ? 0 : root - 1;
    const int m = root == 2 ? 1 : root - 2;
    cov.tree = 3;
    cov.ln_d_ij = table.log_dist(root, j);
    cov.ln_d_ik = table.log_dist(root, k);
    cov.ln_d_im = table.log_dist(root, m);
    cov.ln_d_jk = table.log_dist(j, k);
    cov.ln_d_jm = table.log_dist(j, m);
  }
  return cov;
}

PairCopula global_edge_copula(const SyntheticWorld& world, int root, int j) {
  const EdgeCovariates cov = global_edge_cov(root, j, world.table);
  const Family fam{world.opts.family, 0};
  PairCopula c;
  c.family = fam;
  c.theta = theta_spatial(cov, fam, world.beta_gen);
  if (fam.kind == FamilyKind::student_t) c.nu = nu_spatial(cov, world.beta_gen);
  return c;
}

}  // namespace

Matrix implied_correlation(const CovariateTable& table, const SpatialParam& beta) {
  const int d = table.size();
  const Family gauss{FamilyKind::gaussian, 0};
  // pc(k, j): partial correlation of the edge {k, j; 0..k-1}, k < j.
  Matrix pc(d, d, 0.0);
  for (int k = 0; k + 1 < d; ++k)
    for (int j = k + 1; j < d; ++j)
      pc(k, j) = theta_spatial(global_edge_cov(k, j, table), gauss, beta);
  // Peel conditioning variables off, deepest first.
  Matrix r(d, d, 1.0);
  for (int i = 0; i + 1 < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      double rho = pc(i, j);
      for (int k = i - 1; k >= 0; --k)
        rho = rho * std::sqrt((1.0 - pc(k, i) * pc(k, i)) * (1.0 - pc(k, j) * pc(k, j))) +
              pc(k, i) * pc(k, j);
      r(i, j) = r(j, i) = rho;
    }
  }
  return r;
}

double population_cll(const VineCollection& col, const Matrix& r, const SpatialParam& beta) {
  const std::vector<PairCopula> params = spatial_slot_params(col, beta);
  auto e_lpdf = [](double th, double vx, double vy, double c) {
    const double r2 = 1.0 - th * th;
    return -0.5 * std::log(r2) - (th * th * (vx + vy) - 2.0 * th * c) / (2.0 * r2);
  };
  double total = 0.0;
  for (int s = 0; s < col.station_count(); ++s) {
    const CVineSpec& spec = col.vines[s];
    double m[4][4];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        m[a][b] = a == b ? 1.0 : r(spec.roots[a], spec.roots[b]);
    double th1[3];
    for (int e = 0; e < 3; ++e) th1[e] = params[spec.edges[e].slot].theta;
    double cll = 0.0;
    for (int e = 0; e < 3; ++e) cll += e_lpdf(th1[e], 1.0, 1.0, m[0][e + 1]);
    // second moments of the conditional quantiles z_{o|s}
    double m1[4][4];
    for (int a = 1; a < 4; ++a) {
      for (int b = a; b < 4; ++b) {
        const double sa = std::sqrt(1.0 - th1[a - 1] * th1[a - 1]);
        const double sb = std::sqrt(1.0 - th1[b - 1] * th1[b - 1]);
        m1[a][b] = m1[b][a] = (m[a][b] - th1[a - 1] * m[0][b] - th1[b - 1] * m[0][a] +
                               th1[a - 1] * th1[b - 1] * m[0][0]) /
                              (sa * sb);
      }
    }
    const double th4 = params[spec.edges[3].slot].theta;
    const double th5 = params[spec.edges[4].slot].theta;
    cll += e_lpdf(th4, m1[1][1], m1[2][2], m1[1][2]);
    cll += e_lpdf(th5, m1[1][1], m1[3][3], m1[1][3]);
    const double s4 = 1.0 - th4 * th4, s5 = 1.0 - th5 * th5;
    const double vq = (m1[2][2] - 2.0 * th4 * m1[1][2] + th4 * th4 * m1[1][1]) / s4;
    const double vr = (m1[3][3] - 2.0 * th5 * m1[1][3] + th5 * th5 * m1[1][1]) / s5;
    const double cqr = (m1[2][3] - th4 * m1[1][3] - th5 * m1[1][2] + th4 * th5 * m1[1][1]) /
                       std::sqrt(s4 * s5);
    cll += e_lpdf(params[spec.edges[5].slot].theta, vq, vr, cqr);
    total += col.weights[s] * cll;
  }
  return total;
}

SpatialParam population_estimand(const CovariateTable& table, const Matrix& r,
                                 const SpatialParam& beta0) {
  VineCollection col = build_collection(table);
  for (Slot& s : col.slots) s.family = Family{FamilyKind::gaussian, 0};
  auto objective = [&](const std::vector<double>& x) {
    SpatialParam b = beta0;
    for (int i = 0; i < 13; ++i) b.set(i, x[i]);
    return -population_cll(col, r, b);
  };
  auto gradient = [&](const std::vector<double>& x) { return fd_gradient(objective, x, 1e-6); };
  std::vector<double> x0(13);
  for (int i = 0; i < 13; ++i) x0[i] = beta0.get(i);
  LbfgsOptions opts;
  opts.max_iter = 2000;
  opts.rel_ftol = 1e-14;
  opts.gtol = 1e-10;
  const LbfgsResult res = lbfgs_min(objective, gradient, x0, opts);
  SpatialParam beta = beta0;
  for (int i = 0; i < 13; ++i) beta.set(i, res.x[i]);
  return beta;
}

SyntheticWorld make_world(const SynthOptions& opts) {
  if (opts.d < 4) throw input_error("make_world: need d >= 4");
  const CounterRng rng(opts.geometry_seed ? opts.geometry_seed : opts.seed, 17);

  struct Pt {
    double lon, lat, elev;
  };
  std::vector<Pt> pts(opts.d);
  if (opts.placement == Placement::grid) {
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(opts.d))));
    for (int i = 0; i < opts.d; ++i) {
      const int gx = i % side, gy = i / side;
      pts[i].lon = opts.lon0 + (opts.lon1 - opts.lon0) * (gx + 0.5) / side;
      pts[i].lat = opts.lat0 + (opts.lat1 - opts.lat0) * (gy + 0.5) / side;
      pts[i].elev = opts.elev_min + (opts.elev_max - opts.elev_min) * rng.uniform(3 * i + 2);
    }
  } else if (opts.placement == Placement::uniform) {
    for (int i = 0; i < opts.d; ++i) {
      pts[i].lon = opts.lon0 + (opts.lon1 - opts.lon0) * rng.uniform(3 * i);
      pts[i].lat = opts.lat0 + (opts.lat1 - opts.lat0) * rng.uniform(3 * i + 1);
      pts[i].elev = opts.elev_min + (opts.elev_max - opts.elev_min) * rng.uniform(3 * i + 2);
    }
  } else {
    // Cluster centers in the interior, stations at log-uniform radii around
    // them; pairwise distances then span two orders of magnitude, which keeps
    // the link regressions well conditioned.
    const int n_centers = std::max(3, opts.d / 3);
    std::vector<Pt> centers(n_centers);
    for (int c = 0; c < n_centers; ++c) {
      centers[c].lon = opts.lon0 + (opts.lon1 - opts.lon0) * (0.1 + 0.8 * rng.uniform(5000 + 2 * c));
      centers[c].lat = opts.lat0 + (opts.lat1 - opts.lat0) * (0.1 + 0.8 * rng.uniform(5001 + 2 * c));
    }
    const double min_sep_km = 4.0;
    for (int i = 0; i < opts.d; ++i) {
      const Pt& c = centers[i % n_centers];
      for (uint64_t attempt = 0;; ++attempt) {
        const uint64_t base = 1000 * static_cast<uint64_t>(i) + 3 * attempt;
        const double radius_km = 3.0 * std::exp(std::log(40.0) * rng.uniform(base));
        const double angle = 2.0 * std::numbers::pi_v<double> * rng.uniform(base + 1);
        pts[i].lat = c.lat + radius_km * std::cos(angle) / 111.19;
        pts[i].lon = c.lon + radius_km * std::sin(angle) /
                                (111.19 * std::cos(c.lat * std::numbers::pi_v<double> / 180.0));
        bool ok = true;
        for (int j = 0; j < i && ok; ++j)
          ok = distance_km(pts[j].lon, pts[j].lat, pts[i].lon, pts[i].lat) >= min_sep_km;
        if (ok || attempt > 200) break;
      }
      pts[i].elev = opts.elev_min + (opts.elev_max - opts.elev_min) * rng.uniform(3000000 + i);
    }
  }

  // Label stations along a greedy nearest-neighbor chain from the south-west
  // corner so the vine's root ordering is spatially coherent.
  std::vector<int> order;
  std::vector<bool> used(opts.d, false);
  int cur = 0;
  double best = 1e300;
  for (int i = 0; i < opts.d; ++i) {
    const double dd = (pts[i].lon - opts.lon0) * (pts[i].lon - opts.lon0) +
                      (pts[i].lat - opts.lat0) * (pts[i].lat - opts.lat0);
    if (dd < best) {
      best = dd;
      cur = i;
    }
  }
  order.push_back(cur);
  used[cur] = true;
  while (static_cast<int>(order.size()) < opts.d) {
    int nxt = -1;
    double dmin = 1e300;
    for (int i = 0; i < opts.d; ++i) {
      if (used[i]) continue;
      const double dd = distance_km(pts[cur].lon, pts[cur].lat, pts[i].lon, pts[i].lat);
      if (dd < dmin || (dd == dmin && i < nxt)) {
        dmin = dd;
        nxt = i;
      }
    }
    order.push_back(nxt);
    used[nxt] = true;
    cur = nxt;
  }

  SyntheticWorld world;
  world.opts = opts;
  world.stations.resize(opts.d);
  for (int i = 0; i < opts.d; ++i) {
    const Pt& p = pts[order[i]];
    char name[16];
    std::snprintf(name, sizeof(name), "S%02d", i + 1);
    world.stations[i] = Station{i + 1, name, p.lon, p.lat, p.elev};
  }
  world.table = build_covariates(world.stations);

  // Generating margins: latitude trend, seasonal harmonics, elevation lapse,
  // Student-t residuals.
  world.margins.stations = world.stations;
  world.margins.elev_coef = opts.elev_coef;
  world.margins.period = 365.25;
  world.margins.t0_day = days_from_civil(2010, 1, 1);
  world.margins.margins.resize(opts.d);
  for (int i = 0; i < opts.d; ++i) {
    StationMargin m;
    m.reg = {9.0 - 0.4 * (world.stations[i].lat - opts.lat0), -8.0, -3.0, 0.6, 0.3};
    m.mu = 0.0;
    m.sigma = opts.resid_sigma;
    m.eta = opts.resid_eta;
    world.margins.margins[i] = m;
  }

  world.beta_gen = opts.beta;
  world.beta = opts.beta;
  if (opts.calibrate && opts.family == FamilyKind::gaussian) {
    const Matrix r = implied_correlation(world.table, world.beta_gen);
    world.beta = population_estimand(world.table, r, world.beta_gen);
  }
  return world;
}

double tree1_link_tau(const SyntheticWorld& world, int k) {
  const EdgeCovariates cov = global_edge_cov(0, k, world.table);
  return std::tanh(model_h(cov, world.beta_gen));
}

SynthData generate(const SyntheticWorld& world, int n) {
  const int d = world.opts.d;
  SynthData out;
  out.copula = Matrix(n, d);
  out.obs = Matrix(n, d);
  out.days.resize(n);
  out.dates.resize(n);
  const long t0 = world.margins.t0_day;
  for (int t = 0; t < n; ++t) {
    out.days[t] = t0 + t;
    out.dates[t] = iso_from_days(t0 + t);
  }

  // Pair copulas of the global C-vine, edge (root k, variable j > k).
  std::vector<std::vector<PairCopula>> edge(d - 1);
  for (int k = 0; k + 1 < d; ++k) {
    edge[k].resize(d);
    for (int j = k + 1; j < d; ++j) edge[k][j] = global_edge_copula(world, k, j);
  }

  const CounterRng rng(world.opts.seed, 23);
#pragma omp parallel for schedule(static)
  for (int t = 0; t < n; ++t) {
    std::vector<double> w(d), u(d), cond(d);
    for (int j = 0; j < d; ++j) w[j] = rng.uniform(static_cast<uint64_t>(t) * d + j);
    u[0] = w[0];
    cond[0] = w[0];
    for (int i = 1; i < d; ++i) {
      double v = w[i];
      for (int k = i - 1; k >= 0; --k) v = bicop_hinv1(edge[k][i], cond[k], clamp_unit(v));
      u[i] = clamp_unit(v);
      if (i + 1 < d) {
        double c = u[i];
        for (int k = 0; k < i; ++k) c = clamp_unit(bicop_hfunc1(edge[k][i], cond[k], c));
        cond[i] = c;
      }
    }
    for (int s = 0; s < d; ++s) {
      out.copula(t, s) = u[s];
      out.obs(t, s) = from_copula_value(u[s], out.days[t], s, world.margins);
    }
  }
  return out;
}

}  // namespace spatvine
