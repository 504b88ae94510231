// Marginal preprocessing: seasonal regression per station, Student-t
// location-scale residual law, probability integral transform and its
// inverse (including interpolated margins at unobserved locations).
#pragma once

#include <array>
#include <optional>
#include <vector>

#include "spatvine/geo.hpp"
#include "spatvine/util.hpp"

namespace spatvine {

struct StationMargin {
  // intercept, annual sin/cos, semiannual sin/cos
  std::array<double, 5> reg{};
  double mu = 0.0;     // residual location
  double sigma = 1.0;  // residual scale (> 0)
  double eta = 10.0;   // residual degrees of freedom (> 2)
  double phi = 0.0;    // AR(1) pre-whitening coefficient (0 when disabled)
};

struct MarginOptions {
  double period = 365.25;
  bool ar1 = false;  // optional pre-whitening of residuals, off by default
};

class MarginalModel {
public:
  std::vector<Station> stations;
  std::vector<StationMargin> margins;
  double elev_coef = 0.0;  // shared linear elevation term of the trend
  double period = 365.25;
  long t0_day = 0;  // day number of the first observation row
  bool ar1 = false;

  int station_count() const { return static_cast<int>(stations.size()); }

  // Seasonal + elevation trend g(t, x^s).
  double trend(long day, int s) const;
  double trend_at(long day, const StationMargin& m, double elev) const;

  // Margin parameters interpolated at a new location: inverse-distance
  // weights (power 2) over the 3 nearest stations.
  StationMargin interpolate(double lon, double lat) const;
};

// Least-squares fit of the seasonal trend per station, then ML fit of the
// Student-t location-scale law to the residuals. `days` holds the day number
// of each row of `obs` (columns = stations).
MarginalModel fit_margins(const Matrix& obs, std::span<const long> days,
                          const std::vector<Station>& stations,
                          const MarginOptions& opts = {});

// u_t^s = F^s(y_t^s - g(t, x^s)), clamped into (1e-10, 1 - 1e-10).
Matrix to_copula_data(const Matrix& obs, std::span<const long> days, const MarginalModel& model);

// Scalar transforms. `prev_residual` feeds the AR(1) recursion and is only
// consulted when the model was fitted with ar1 = true.
double to_copula_value(double y, long day, int s, const MarginalModel& model,
                       std::optional<double> prev_residual = std::nullopt);
double from_copula_value(double u, long day, int s, const MarginalModel& model,
                         std::optional<double> prev_residual = std::nullopt);

// Inverse transform at arbitrary coordinates via interpolated margins. With
// ar1 margins the stationary residual law is used (no previous residual is
// observable at a new location).
double from_copula_value_at(double u, long day, double lon, double lat, double elev,
                            const MarginalModel& model);

// Residual y - g at an observed station (AR-free), used to drive the AR
// recursion from observed neighbor series.
double residual(double y, long day, int s, const MarginalModel& model);

}  // namespace spatvine
