// Validation metrics: ensemble CRPS, time-averaged score tables, percentaged
// outperformance and score-difference series.
#pragma once

#include <span>
#include <string>
#include <vector>

namespace spatvine {

// (1/M) sum |x_i - y|  -  (1/(2 M^2)) sum_ij |x_i - x_j|, computed in
// O(M log M) through the sorted representation.
double crps_ensemble(std::span<const double> samples, double y);

// Reference O(M^2) double-sum form, kept for testing.
double crps_ensemble_naive(std::span<const double> samples, double y);

struct ScoreSeries {
  int station_id = 0;  // 1-based
  std::vector<double> crps;  // per time, NaN for missing
};

struct AveragedScores {
  std::vector<double> per_station;  // mean over time
  double overall = 0.0;             // mean of the station means
};

AveragedScores averaged_scores(const std::vector<ScoreSeries>& series);

// Share of time points where a is strictly better (lower) than b, per
// station. Ties count for neither side but stay in the denominator.
std::vector<double> outperformance(const std::vector<ScoreSeries>& a,
                                   const std::vector<ScoreSeries>& b);

struct ScoreDifference {
  std::vector<double> diff;          // mean over stations of a - b, per time
  std::vector<std::string> winner;   // "a", "b" or "tie"
};

ScoreDifference score_difference_series(const std::vector<ScoreSeries>& a,
                                        const std::vector<ScoreSeries>& b);

}  // namespace spatvine
