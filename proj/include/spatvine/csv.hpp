// CSV formats and calendar helpers shared by the CLI and tests.
#pragma once

#include <string>
#include <vector>

#include "spatvine/geo.hpp"
#include "spatvine/score.hpp"
#include "spatvine/util.hpp"

namespace spatvine {

// Proleptic Gregorian day number (days since 1970-01-01).
long days_from_civil(int y, int m, int d);
std::string iso_from_days(long days);
long parse_iso_date(const std::string& iso);

struct ObsTable {
  std::vector<std::string> dates;  // ISO strings, one per row
  std::vector<long> days;
  std::vector<int> station_ids;  // column order, 1-based
  Matrix y;                      // rows x stations, NaN for missing cells
};

// Station CSV: header `id,name,lon,lat,elev`.
std::vector<Station> read_stations_csv(const std::string& path);
void write_stations_csv(const std::string& path, const std::vector<Station>& stations);

// Observation CSV: header `date,<id>,<id>,...`; empty cells are missing.
ObsTable read_obs_csv(const std::string& path);
void write_obs_csv(const std::string& path, const ObsTable& table);

// Prediction CSV: `time,mean,median,q025,q975[,s1,...]`.
void write_prediction_csv(const std::string& path, const std::vector<std::string>& dates,
                          const Matrix& samples, const std::vector<bool>& missing,
                          bool with_samples);

// Scores CSV: `station,time,crps`.
void write_scores_csv(const std::string& path, const std::vector<ScoreSeries>& series,
                      const std::vector<std::string>& dates);

// Difference series CSV: `time,diff,winner`.
void write_difference_csv(const std::string& path, const std::vector<std::string>& dates,
                          const ScoreDifference& diff, const std::string& name_a,
                          const std::string& name_b);

std::string format_double(double v);

}  // namespace spatvine
