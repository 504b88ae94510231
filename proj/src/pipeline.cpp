#include "spatvine/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace spatvine {

std::string fit_mode_name(FitMode m) {
  switch (m) {
    case FitMode::lcvcl: return "lcvcl";
    case FitMode::slcvcl: return "slcvcl";
    case FitMode::gauss_baseline: return "gauss-baseline";
  }
  return "?";
}

FitMode fit_mode_from_name(const std::string& s) {
  if (s == "lcvcl") return FitMode::lcvcl;
  if (s == "slcvcl") return FitMode::slcvcl;
  if (s == "gauss-baseline") return FitMode::gauss_baseline;
  throw input_error("unknown mode: " + s);
}

FittedModel fit_pipeline(const std::vector<Station>& stations, const Matrix& obs,
                         std::span<const long> days, const FitConfig& cfg) {
  FittedModel model;
  model.mode = cfg.mode;
  model.seed = cfg.seed;
  model.stations = stations;

  const CovariateTable table = build_covariates(stations);
  model.collection = build_collection(table);
  model.margins = fit_margins(obs, days, stations, cfg.margins);
  const Matrix u = to_copula_data(obs, days, model.margins);

  const std::vector<FamilyKind> allowed =
      cfg.mode == FitMode::gauss_baseline ? std::vector<FamilyKind>{FamilyKind::gaussian}
                                          : cfg.families;
  const SelectedFamilies selected = select_families(model.collection, u, allowed);
  const FittedLcvcl lfit = fit_lcvcl(model.collection, u, selected, cfg.lcvcl);
  model.lcvcl_params = lfit.slot_params;
  model.lcvcl_cll = lfit.cll;
  model.lcvcl_start_cll = lfit.start_cll;
  model.lcvcl_converged = lfit.converged;
  model.lcvcl_iterations = lfit.iterations;
  model.lcvcl_n_params = lfit.n_free_params;

  if (cfg.mode != FitMode::lcvcl) {
    const SpatialParam start = start_values(model.collection, lfit);
    model.slcvcl = fit_slcvcl(model.collection, u, start, cfg.slcvcl);
  }
  return model;
}

PredictResult predict_from_model(const FittedModel& model, const ObsTable& obs,
                                 const PredictRequest& req) {
  if (!model.slcvcl.has_value())
    throw input_error("model has no slcvcl block; prediction needs the spatial fit");
  if (obs.station_ids.size() != model.stations.size())
    throw input_error("observation columns do not match the model stations");
  for (size_t s = 0; s < model.stations.size(); ++s)
    if (obs.station_ids[s] != model.stations[s].id)
      throw input_error("observation column order does not match the model stations");

  // Margins at a new location are interpolated; flag extrapolation outside
  // the training hull.
  {
    double lon_lo = 1e300, lon_hi = -1e300, lat_lo = 1e300, lat_hi = -1e300;
    double elev_lo = 1e300, elev_hi = -1e300;
    for (const Station& s : model.stations) {
      lon_lo = std::min(lon_lo, s.lon);
      lon_hi = std::max(lon_hi, s.lon);
      lat_lo = std::min(lat_lo, s.lat);
      lat_hi = std::max(lat_hi, s.lat);
      elev_lo = std::min(elev_lo, s.elev);
      elev_hi = std::max(elev_hi, s.elev);
    }
    if (req.lon < lon_lo || req.lon > lon_hi || req.lat < lat_lo || req.lat > lat_hi ||
        req.elev < elev_lo || req.elev > elev_hi)
      std::fprintf(stderr,
                   "warning: prediction location extrapolates beyond the training covariate "
                   "hull\n");
  }

  const CovariateTable table = build_covariates(model.stations);
  const FamilyKind fam =
      model.mode == FitMode::gauss_baseline ? FamilyKind::gaussian : FamilyKind::student_t;
  const PredictiveModel pm = build_predictive_model(req.lon, req.lat, req.elev, model.stations,
                                                    table, model.slcvcl->beta, fam);

  Matrix rows(static_cast<int>(req.rows.size()), obs.y.cols());
  std::vector<long> days(req.rows.size());
  for (size_t i = 0; i < req.rows.size(); ++i) {
    const int r = req.rows[i];
    days[i] = obs.days[r];
    for (int s = 0; s < obs.y.cols(); ++s) rows(static_cast<int>(i), s) = obs.y(r, s);
  }
  PredictOptions opts;
  opts.ensemble = req.ensemble;
  opts.seed = req.seed;
  return predict_series(pm, model.margins, rows, days, opts);
}

std::vector<ScoreSeries> validate_model(const FittedModel& model, const ObsTable& train_obs,
                                        const std::vector<Station>& val_stations,
                                        const ObsTable& truth, int ensemble, uint64_t seed) {
  // Map truth rows onto training-observation rows by day number.
  std::map<long, int> train_row;
  for (size_t t = 0; t < train_obs.days.size(); ++t)
    train_row[train_obs.days[t]] = static_cast<int>(t);
  std::vector<int> rows;
  rows.reserve(truth.days.size());
  for (long day : truth.days) {
    const auto it = train_row.find(day);
    if (it == train_row.end())
      throw input_error("validation time " + iso_from_days(day) +
                        " is not covered by the training observations");
    rows.push_back(it->second);
  }

  std::vector<ScoreSeries> out;
  for (size_t v = 0; v < val_stations.size(); ++v) {
    const Station& st = val_stations[v];
    PredictRequest req;
    req.lon = st.lon;
    req.lat = st.lat;
    req.elev = st.elev;
    req.rows = rows;
    req.ensemble = ensemble;
    req.seed = seed + 1000003ull * static_cast<uint64_t>(st.id);
    const PredictResult pred = predict_from_model(model, train_obs, req);

    ScoreSeries series;
    series.station_id = st.id;
    series.crps.resize(truth.days.size());
    std::vector<double> members(ensemble);
    for (size_t t = 0; t < truth.days.size(); ++t) {
      const double y = truth.y(static_cast<int>(t), static_cast<int>(v));
      if (pred.missing[t] || !std::isfinite(y)) {
        series.crps[t] = std::nan("");
        continue;
      }
      for (int m = 0; m < ensemble; ++m) members[m] = pred.samples(static_cast<int>(t), m);
      series.crps[t] = crps_ensemble(members, y);
    }
    out.push_back(std::move(series));
  }
  return out;
}

}  // namespace spatvine
