#include "spatvine/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace spatvine {

namespace {
constexpr double kEarthRadiusKm = 6371.0;
inline double deg2rad(double d) { return d * std::numbers::pi_v<double> / 180.0; }
}  // namespace

void validate_stations(const std::vector<Station>& stations) {
  for (size_t i = 0; i < stations.size(); ++i) {
    const Station& s = stations[i];
    if (s.id != static_cast<int>(i) + 1)
      throw input_error("station ids must be contiguous from 1; got id " + std::to_string(s.id) +
                        " at position " + std::to_string(i + 1));
    if (!(s.lat >= -90.0 && s.lat <= 90.0))
      throw input_error("station " + std::to_string(s.id) + ": latitude outside [-90, 90]");
    if (!(s.lon >= -180.0 && s.lon <= 180.0))
      throw input_error("station " + std::to_string(s.id) + ": longitude outside [-180, 180]");
    if (!std::isfinite(s.elev))
      throw input_error("station " + std::to_string(s.id) + ": elevation not finite");
  }
}

double distance_km(double lon1, double lat1, double lon2, double lat2) {
  if (lon1 == lon2 && lat1 == lat2)
    throw input_error("distance_km: identical coordinates (log-distance undefined)");
  const double phi1 = deg2rad(lat1), phi2 = deg2rad(lat2);
  const double dphi = phi2 - phi1;
  const double dlam = deg2rad(lon2 - lon1);
  const double a = std::sin(0.5 * dphi) * std::sin(0.5 * dphi) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(0.5 * dlam) * std::sin(0.5 * dlam);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

double distance_km(const Station& a, const Station& b) {
  return distance_km(a.lon, a.lat, b.lon, b.lat);
}

CovariateTable::CovariateTable(const std::vector<Station>& stations)
    : d_(static_cast<int>(stations.size())) {
  if (d_ < 4) throw input_error("build_covariates: need at least 4 stations");
  validate_stations(stations);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  log_dist_ = Matrix(d_, d_, nan);
  log_elev_ = Matrix(d_, d_, nan);
  dist_ = Matrix(d_, d_, nan);
  for (int i = 0; i < d_; ++i) {
    for (int j = i + 1; j < d_; ++j) {
      const double km = distance_km(stations[i], stations[j]);  // throws on duplicates
      const double ld = std::log(km);
      const double le = std::log(std::fabs(stations[i].elev - stations[j].elev) + 1.0);
      dist_(i, j) = dist_(j, i) = km;
      log_dist_(i, j) = log_dist_(j, i) = ld;
      log_elev_(i, j) = log_elev_(j, i) = le;
    }
  }
}

CovariateTable build_covariates(const std::vector<Station>& stations) {
  return CovariateTable(stations);
}

std::vector<int> nearest_neighbors(int s, int k, const CovariateTable& table) {
  const int d = table.size();
  if (k >= d) throw input_error("nearest_neighbors: k must be < station count");
  std::vector<int> ids;
  ids.reserve(d - 1);
  for (int j = 0; j < d; ++j)
    if (j != s) ids.push_back(j);
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    const double da = table.dist_km(s, a), db = table.dist_km(s, b);
    if (da != db) return da < db;
    return a < b;
  });
  ids.resize(k);
  return ids;
}

}  // namespace spatvine
