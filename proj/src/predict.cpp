#include "spatvine/predict.hpp"

#include <cmath>
#include <limits>

#include "spatvine/rng.hpp"

namespace spatvine {

PredictiveModel build_predictive_model(double lon, double lat, double elev,
                                       const std::vector<Station>& stations,
                                       const CovariateTable& table, const SpatialParam& beta,
                                       FamilyKind family, ClampStats* stats) {
  PredictiveModel model;
  model.spec = build_predictive(lon, lat, elev, stations, table);
  model.lon = lon;
  model.lat = lat;
  model.elev = elev;
  for (int e = 0; e < 6; ++e) {
    const Family fam{family, 0};
    model.spec.families[e] = fam;
    PairCopula c;
    c.family = fam;
    c.theta = theta_spatial(model.spec.covariates[e], fam, beta, stats);
    if (family == FamilyKind::student_t)
      c.nu = nu_spatial(model.spec.covariates[e], beta, stats);
    model.copulas[e] = c;
  }
  return model;
}

double conditional_cdf(const PredictiveModel& model, double u_s,
                       const std::array<double, 3>& u_pqr) {
  const auto& c = model.copulas;
  const double up = clamp_unit(u_pqr[0]), uq = clamp_unit(u_pqr[1]), ur = clamp_unit(u_pqr[2]);
  const double us = clamp_unit(u_s);
  const double a_s = clamp_unit(bicop_hfunc1(c[0], up, us));
  const double a_q = clamp_unit(bicop_hfunc1(c[1], up, uq));
  const double a_r = clamp_unit(bicop_hfunc1(c[2], up, ur));
  const double b_s = clamp_unit(bicop_hfunc1(c[3], a_q, a_s));
  const double b_r = clamp_unit(bicop_hfunc1(c[4], a_q, a_r));
  return bicop_hfunc1(c[5], b_r, b_s);
}

double condition_sample(const PredictiveModel& model, const std::array<double, 3>& u_pqr,
                        double w) {
  const auto& c = model.copulas;
  const double up = clamp_unit(u_pqr[0]), uq = clamp_unit(u_pqr[1]), ur = clamp_unit(u_pqr[2]);
  w = clamp_unit(w);
  const double a_q = clamp_unit(bicop_hfunc1(c[1], up, uq));
  const double a_r = clamp_unit(bicop_hfunc1(c[2], up, ur));
  const double b_r = clamp_unit(bicop_hfunc1(c[4], a_q, a_r));
  const double b_s = bicop_hinv1(c[5], b_r, w);
  const double a_s = bicop_hinv1(c[3], a_q, clamp_unit(b_s));
  return bicop_hinv1(c[0], up, clamp_unit(a_s));
}

double predictive_density(const PredictiveModel& model, double u_s,
                          const std::array<double, 3>& u_pqr) {
  const auto& c = model.copulas;
  const double up = clamp_unit(u_pqr[0]), uq = clamp_unit(u_pqr[1]), ur = clamp_unit(u_pqr[2]);
  const double us = clamp_unit(u_s);
  const double a_s = clamp_unit(bicop_hfunc1(c[0], up, us));
  const double a_q = clamp_unit(bicop_hfunc1(c[1], up, uq));
  const double a_r = clamp_unit(bicop_hfunc1(c[2], up, ur));
  const double b_s = clamp_unit(bicop_hfunc1(c[3], a_q, a_s));
  const double b_r = clamp_unit(bicop_hfunc1(c[4], a_q, a_r));
  const double lp = bicop_logpdf(c[0], up, us) + bicop_logpdf(c[3], a_q, a_s) +
                    bicop_logpdf(c[5], b_r, b_s);
  const double dens = std::exp(lp);
  if (!std::isfinite(dens)) throw numeric_error("predictive_density: non-finite value");
  return dens;
}

PredictResult predict_series(const PredictiveModel& model, const MarginalModel& margins,
                             const Matrix& neighbor_obs, std::span<const long> days,
                             const PredictOptions& opts) {
  const int n = neighbor_obs.rows();
  const int m_members = opts.ensemble;
  if (static_cast<int>(days.size()) != n) throw input_error("predict_series: day/row mismatch");
  if (m_members < 1) throw input_error("predict_series: ensemble size must be >= 1");
  const int p = model.spec.neighbors[0], q = model.spec.neighbors[1], r = model.spec.neighbors[2];

  PredictResult out;
  out.samples = Matrix(n, m_members, std::numeric_limits<double>::quiet_NaN());
  out.missing.assign(n, false);
  const CounterRng rng(opts.seed);

#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < n; ++t) {
    const double yp = neighbor_obs(t, p), yq = neighbor_obs(t, q), yr = neighbor_obs(t, r);
    if (!std::isfinite(yp) || !std::isfinite(yq) || !std::isfinite(yr)) {
      out.missing[t] = true;
      continue;
    }
    std::array<double, 3> u_pqr;
    const int idx[3] = {p, q, r};
    const double yv[3] = {yp, yq, yr};
    bool ok = true;
    for (int j = 0; j < 3; ++j) {
      std::optional<double> prev;
      if (margins.ar1 && t > 0) {
        const double y_prev = neighbor_obs(t - 1, idx[j]);
        if (std::isfinite(y_prev)) prev = residual(y_prev, days[t - 1], idx[j], margins);
        else ok = false;
      }
      if (!ok) break;
      u_pqr[j] = to_copula_value(yv[j], days[t], idx[j], margins, prev);
    }
    if (!ok) {
      out.missing[t] = true;
      continue;
    }
    for (int m = 0; m < m_members; ++m) {
      const double w = rng.uniform(static_cast<uint64_t>(t) * m_members + m);
      const double u_s = condition_sample(model, u_pqr, w);
      out.samples(t, m) = from_copula_value_at(clamp_unit(u_s), days[t], model.lon, model.lat,
                                               model.elev, margins);
    }
  }
  return out;
}

}  // namespace spatvine
