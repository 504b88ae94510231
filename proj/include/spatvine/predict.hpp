// Prediction at an arbitrary location: conditional sampling through the
// predictive C-vine, predictive density, and back-transformation to the
// observation scale.
#pragma once

#include <array>
#include <cstdint>

#include "spatvine/margins.hpp"
#include "spatvine/slcvcl.hpp"
#include "spatvine/structure.hpp"

namespace spatvine {

struct PredictiveModel {
  PredictiveCVineSpec spec;
  std::array<PairCopula, 6> copulas;  // aligned with spec.edges
  double lon = 0.0, lat = 0.0, elev = 0.0;
};

// Copula parameters are generated from the spatial links at the new
// location's covariates. Families default to Student-t; `family` exists so
// an all-Gaussian predictive vine (baseline / oracle checks) can be built.
PredictiveModel build_predictive_model(double lon, double lat, double elev,
                                       const std::vector<Station>& stations,
                                       const CovariateTable& table, const SpatialParam& beta,
                                       FamilyKind family = FamilyKind::student_t,
                                       ClampStats* stats = nullptr);

// Conditional CDF F(u_s | u_p, u_q, u_r) via the h-function chain.
double conditional_cdf(const PredictiveModel& model, double u_s,
                       const std::array<double, 3>& u_pqr);

// Inverse of the conditional CDF: deterministic in (u_pqr, w), strictly
// increasing in w.
double condition_sample(const PredictiveModel& model, const std::array<double, 3>& u_pqr,
                        double w);

// Predictive copula density c_{s|p,q,r}.
double predictive_density(const PredictiveModel& model, double u_s,
                          const std::array<double, 3>& u_pqr);

struct PredictOptions {
  int ensemble = 1000;
  uint64_t seed = 1;
};

struct PredictResult {
  Matrix samples;               // n_times x M, NaN rows where neighbors missing
  std::vector<bool> missing;    // per time
};

// Per requested time: transform the three neighbor observations to the
// copula scale, draw M conditional samples, back-transform through the
// interpolated margin. neighbor_obs has one column per training station
// (same layout as the training matrix); rows align with `days`.
PredictResult predict_series(const PredictiveModel& model, const MarginalModel& margins,
                             const Matrix& neighbor_obs, std::span<const long> days,
                             const PredictOptions& opts);

}  // namespace spatvine
