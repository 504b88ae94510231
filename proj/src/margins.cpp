#include "spatvine/margins.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spatvine/optim.hpp"
#include "spatvine/stats.hpp"

namespace spatvine {

namespace {

constexpr double kSigmaFloor = 1e-8;

std::array<double, 4> harmonics(double day, double period) {
  const double w = 2.0 * std::numbers::pi_v<double> * day / period;
  return {std::sin(w), std::cos(w), std::sin(2.0 * w), std::cos(2.0 * w)};
}

struct TLocScale {
  double mu, sigma, eta;
};

double t_ls_logpdf(double e, const TLocScale& p) {
  const double z = (e - p.mu) / p.sigma;
  return student_t_logpdf(z, p.eta) - std::log(p.sigma);
}

TLocScale fit_t_loc_scale(std::span<const double> e) {
  std::vector<double> sorted(e.begin(), e.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  const double med = 0.5 * (sorted[(n - 1) / 2] + sorted[n / 2]);
  std::vector<double> ad(n);
  for (size_t i = 0; i < n; ++i) ad[i] = std::fabs(sorted[i] - med);
  std::sort(ad.begin(), ad.end());
  const double mad = 0.5 * (ad[(n - 1) / 2] + ad[n / 2]);
  const double s0 = std::max(1.4826 * mad, 10.0 * kSigmaFloor);

  auto unpack = [](const std::vector<double>& z) {
    return TLocScale{z[0], kSigmaFloor + std::exp(z[1]), 2.0 + std::exp(std::min(z[2], 6.0))};
  };
  auto obj = [&](const std::vector<double>& z) {
    const TLocScale p = unpack(z);
    double nll = 0.0;
    for (double ei : e) nll -= t_ls_logpdf(ei, p);
    return nll;
  };
  const std::vector<double> z0 = {med, std::log(s0), std::log(8.0 - 2.0)};
  const NelderMeadResult r = nelder_mead_min(obj, z0, 0.4, 1e-10, 600);
  if (!r.converged && r.iterations >= 600)
    throw numeric_error("fit_margins: residual ML did not converge");
  return unpack(r.x);
}

double lag1_autocorr(std::span<const double> e) {
  const size_t n = e.size();
  double mean = 0.0;
  for (double x : e) mean += x;
  mean /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (size_t t = 0; t < n; ++t) {
    den += (e[t] - mean) * (e[t] - mean);
    if (t > 0) num += (e[t] - mean) * (e[t - 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

double MarginalModel::trend_at(long day, const StationMargin& m, double elev) const {
  const auto h = harmonics(static_cast<double>(day), period);
  return m.reg[0] + m.reg[1] * h[0] + m.reg[2] * h[1] + m.reg[3] * h[2] + m.reg[4] * h[3] +
         elev_coef * elev;
}

double MarginalModel::trend(long day, int s) const {
  return trend_at(day, margins[s], stations[s].elev);
}

StationMargin MarginalModel::interpolate(double lon, double lat) const {
  struct Near {
    int idx;
    double dist;
  };
  std::vector<Near> near;
  near.reserve(stations.size());
  for (size_t i = 0; i < stations.size(); ++i) {
    const double dl = stations[i].lon - lon, dp = stations[i].lat - lat;
    if (dl == 0.0 && dp == 0.0) return margins[i];
    near.push_back({static_cast<int>(i), distance_km(lon, lat, stations[i].lon, stations[i].lat)});
  }
  std::sort(near.begin(), near.end(), [](const Near& a, const Near& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.idx < b.idx;
  });
  const int k = std::min<int>(3, static_cast<int>(near.size()));
  double wsum = 0.0;
  StationMargin out;
  out.reg.fill(0.0);
  out.mu = out.sigma = out.eta = out.phi = 0.0;
  for (int i = 0; i < k; ++i) {
    const double w = 1.0 / (near[i].dist * near[i].dist);
    const StationMargin& m = margins[near[i].idx];
    for (int j = 0; j < 5; ++j) out.reg[j] += w * m.reg[j];
    out.mu += w * m.mu;
    out.sigma += w * m.sigma;
    out.eta += w * m.eta;
    out.phi += w * m.phi;
    wsum += w;
  }
  for (int j = 0; j < 5; ++j) out.reg[j] /= wsum;
  out.mu /= wsum;
  out.sigma /= wsum;
  out.eta /= wsum;
  out.phi /= wsum;
  return out;
}

MarginalModel fit_margins(const Matrix& obs, std::span<const long> days,
                          const std::vector<Station>& stations, const MarginOptions& opts) {
  const int n = obs.rows(), d = obs.cols();
  if (static_cast<int>(stations.size()) != d)
    throw input_error("fit_margins: station/column mismatch");
  if (static_cast<int>(days.size()) != n) throw input_error("fit_margins: day/row mismatch");
  for (int t = 0; t < n; ++t)
    for (int s = 0; s < d; ++s)
      if (!std::isfinite(obs(t, s))) throw input_error("fit_margins: missing values not allowed");

  MarginalModel model;
  model.stations = stations;
  model.margins.resize(d);
  model.period = opts.period;
  model.ar1 = opts.ar1;
  model.t0_day = days.empty() ? 0 : days[0];

  // Per-station seasonal OLS, then residual law.
  std::vector<double> X(static_cast<size_t>(n) * 5);
  for (int t = 0; t < n; ++t) {
    const auto h = harmonics(static_cast<double>(days[t]), opts.period);
    X[t * 5 + 0] = 1.0;
    for (int j = 0; j < 4; ++j) X[t * 5 + 1 + j] = h[j];
  }

#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < d; ++s) {
    const std::vector<double> y = obs.column(s);
    const std::vector<double> b = ols(X, n, 5, y);
    StationMargin m;
    std::copy(b.begin(), b.end(), m.reg.begin());
    std::vector<double> e(n);
    for (int t = 0; t < n; ++t) {
      double g = 0.0;
      for (int j = 0; j < 5; ++j) g += X[t * 5 + j] * b[j];
      e[t] = y[t] - g;
    }
    if (opts.ar1) {
      m.phi = std::clamp(lag1_autocorr(e), -0.99, 0.99);
      std::vector<double> innov(n);
      innov[0] = e[0] * std::sqrt(1.0 - m.phi * m.phi);
      for (int t = 1; t < n; ++t) innov[t] = e[t] - m.phi * e[t - 1];
      e = std::move(innov);
    }
    const TLocScale p = fit_t_loc_scale(e);
    m.mu = p.mu;
    m.sigma = p.sigma;
    m.eta = p.eta;
    model.margins[s] = m;
  }

  // Cross-station regression of intercepts on elevation gives the shared
  // elevation trend; per-station intercepts are re-centered so fitted values
  // at the stations are unchanged.
  double elev_mean = 0.0, elev_var = 0.0;
  for (const Station& st : stations) elev_mean += st.elev;
  elev_mean /= d;
  for (const Station& st : stations) elev_var += (st.elev - elev_mean) * (st.elev - elev_mean);
  if (elev_var > 1e-8 && d >= 3) {
    double cov = 0.0, ic_mean = 0.0;
    for (int s = 0; s < d; ++s) ic_mean += model.margins[s].reg[0];
    ic_mean /= d;
    for (int s = 0; s < d; ++s)
      cov += (stations[s].elev - elev_mean) * (model.margins[s].reg[0] - ic_mean);
    model.elev_coef = cov / elev_var;
    for (int s = 0; s < d; ++s) model.margins[s].reg[0] -= model.elev_coef * stations[s].elev;
  }
  return model;
}

double to_copula_value(double y, long day, int s, const MarginalModel& model,
                       std::optional<double> prev_residual) {
  const StationMargin& m = model.margins[s];
  double e = y - model.trend(day, s);
  if (model.ar1) {
    if (prev_residual.has_value()) e -= m.phi * *prev_residual;
    else e *= std::sqrt(1.0 - m.phi * m.phi);
  }
  return clamp_unit(student_t_cdf((e - m.mu) / m.sigma, m.eta));
}

double from_copula_value(double u, long day, int s, const MarginalModel& model,
                         std::optional<double> prev_residual) {
  if (!(u > 0.0 && u < 1.0)) throw input_error("from_copula_value: u outside (0,1)");
  const StationMargin& m = model.margins[s];
  double e = m.mu + m.sigma * student_t_quantile(u, m.eta);
  if (model.ar1) {
    if (prev_residual.has_value()) e += m.phi * *prev_residual;
    else e /= std::sqrt(1.0 - m.phi * m.phi);
  }
  return model.trend(day, s) + e;
}

double from_copula_value_at(double u, long day, double lon, double lat, double elev,
                            const MarginalModel& model) {
  if (!(u > 0.0 && u < 1.0)) throw input_error("from_copula_value_at: u outside (0,1)");
  const StationMargin m = model.interpolate(lon, lat);
  double e = m.mu + m.sigma * student_t_quantile(u, m.eta);
  if (model.ar1) e /= std::sqrt(1.0 - m.phi * m.phi);  // stationary law at a new site
  return model.trend_at(day, m, elev) + e;
}

double residual(double y, long day, int s, const MarginalModel& model) {
  return y - model.trend(day, s);
}

Matrix to_copula_data(const Matrix& obs, std::span<const long> days, const MarginalModel& model) {
  const int n = obs.rows(), d = obs.cols();
  if (d != model.station_count()) throw input_error("to_copula_data: station mismatch");
  Matrix u(n, d);
#pragma omp parallel for schedule(static)
  for (int s = 0; s < d; ++s) {
    double prev = 0.0;
    for (int t = 0; t < n; ++t) {
      std::optional<double> pr;
      if (model.ar1 && t > 0) pr = prev;
      u(t, s) = to_copula_value(obs(t, s), days[t], s, model, pr);
      if (model.ar1) prev = residual(obs(t, s), days[t], s, model);
    }
  }
  return u;
}

}  // namespace spatvine
