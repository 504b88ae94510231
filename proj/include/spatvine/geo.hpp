// Station registry, pairwise spatial covariates and neighbor queries.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "spatvine/util.hpp"

namespace spatvine {

struct Station {
  int id = 0;  // 1-based external id; internal indices are id - 1
  std::string name;
  double lon = 0.0;  // degrees
  double lat = 0.0;  // degrees
  double elev = 0.0;  // meters
};

// Validates ids contiguous from 1, coordinate ranges, finite elevations.
void validate_stations(const std::vector<Station>& stations);

// Great-circle (haversine) distance, Earth radius 6371 km. Throws on
// coincident coordinates (the log-distance covariate would be undefined).
double distance_km(const Station& a, const Station& b);
double distance_km(double lon1, double lat1, double lon2, double lat2);

// Symmetric pairwise covariate tables; diagonal entries are NaN sentinels and
// must never be read. Immutable after construction.
class CovariateTable {
public:
  CovariateTable() = default;
  explicit CovariateTable(const std::vector<Station>& stations);

  int size() const { return d_; }
  double log_dist(int i, int j) const { return log_dist_(i, j); }
  double log_elev_diff(int i, int j) const { return log_elev_(i, j); }
  double dist_km(int i, int j) const { return dist_(i, j); }

private:
  int d_ = 0;
  Matrix log_dist_, log_elev_, dist_;
};

CovariateTable build_covariates(const std::vector<Station>& stations);

// The k station indices nearest to s (0-based), ascending distance, ties
// broken by ascending index; s itself excluded. Requires k < d.
std::vector<int> nearest_neighbors(int s, int k, const CovariateTable& table);

}  // namespace spatvine
