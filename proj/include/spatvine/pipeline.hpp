// End-to-end fitting/prediction/validation used by the CLI and tests.
#pragma once

#include <cstdint>
#include <optional>

#include "spatvine/csv.hpp"
#include "spatvine/predict.hpp"

namespace spatvine {

enum class FitMode { lcvcl, slcvcl, gauss_baseline };

std::string fit_mode_name(FitMode m);
FitMode fit_mode_from_name(const std::string& s);

struct FitConfig {
  FitMode mode = FitMode::slcvcl;
  std::vector<FamilyKind> families = {FamilyKind::gaussian, FamilyKind::student_t,
                                      FamilyKind::clayton, FamilyKind::gumbel,
                                      FamilyKind::frank};
  MarginOptions margins;
  LcvclOptions lcvcl;
  SlcvclOptions slcvcl;
  uint64_t seed = 0;  // recorded in the model file
};

struct FittedModel {
  int schema_version = 1;
  FitMode mode = FitMode::slcvcl;
  uint64_t seed = 0;
  std::vector<Station> stations;
  MarginalModel margins;
  VineCollection collection;
  std::vector<PairCopula> lcvcl_params;  // per slot
  double lcvcl_cll = 0.0, lcvcl_start_cll = 0.0;
  bool lcvcl_converged = false;
  int lcvcl_iterations = 0;
  int lcvcl_n_params = 0;
  std::optional<SlcvclFit> slcvcl;
};

FittedModel fit_pipeline(const std::vector<Station>& stations, const Matrix& obs,
                         std::span<const long> days, const FitConfig& cfg);

// Prediction at coordinates, conditioning on the training-station columns of
// `obs` at the requested rows. Requires the slcvcl block.
struct PredictRequest {
  double lon = 0.0, lat = 0.0, elev = 0.0;
  std::vector<int> rows;  // row indices into obs
  int ensemble = 1000;
  uint64_t seed = 1;
};

PredictResult predict_from_model(const FittedModel& model, const ObsTable& obs,
                                 const PredictRequest& req);

// CRPS series of one model over the validation stations in `truth`.
std::vector<ScoreSeries> validate_model(const FittedModel& model, const ObsTable& train_obs,
                                        const std::vector<Station>& val_stations,
                                        const ObsTable& truth, int ensemble, uint64_t seed);

}  // namespace spatvine
