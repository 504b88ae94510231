#include "spatvine/score.hpp"

#include <algorithm>
#include <cmath>

#include "spatvine/util.hpp"

namespace spatvine {

double crps_ensemble(std::span<const double> samples, double y) {
  const size_t m = samples.size();
  if (m == 0) throw input_error("crps_ensemble: empty ensemble");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  double mad = 0.0;   // mean absolute deviation from y
  double spread = 0.0;  // sum_i (2i + 1 - M) x_(i)
  for (size_t i = 0; i < m; ++i) {
    mad += std::fabs(x[i] - y);
    spread += (2.0 * static_cast<double>(i) + 1.0 - static_cast<double>(m)) * x[i];
  }
  return mad / static_cast<double>(m) - spread / (static_cast<double>(m) * static_cast<double>(m));
}

double crps_ensemble_naive(std::span<const double> samples, double y) {
  const size_t m = samples.size();
  if (m == 0) throw input_error("crps_ensemble: empty ensemble");
  double a = 0.0, b = 0.0;
  for (size_t i = 0; i < m; ++i) {
    a += std::fabs(samples[i] - y);
    for (size_t j = 0; j < m; ++j) b += std::fabs(samples[i] - samples[j]);
  }
  return a / static_cast<double>(m) - b / (2.0 * static_cast<double>(m) * static_cast<double>(m));
}

namespace {

void check_aligned(const std::vector<ScoreSeries>& a, const std::vector<ScoreSeries>& b) {
  if (a.size() != b.size()) throw input_error("score series: station count mismatch");
  for (size_t s = 0; s < a.size(); ++s)
    if (a[s].crps.size() != b[s].crps.size())
      throw input_error("score series: time axis mismatch at station " +
                        std::to_string(a[s].station_id));
}

}  // namespace

AveragedScores averaged_scores(const std::vector<ScoreSeries>& series) {
  if (series.empty()) throw input_error("averaged_scores: no series");
  const size_t n = series.front().crps.size();
  AveragedScores out;
  out.per_station.reserve(series.size());
  for (const ScoreSeries& s : series) {
    if (s.crps.size() != n)
      throw input_error("averaged_scores: time axis mismatch at station " +
                        std::to_string(s.station_id));
    double sum = 0.0;
    long cnt = 0;
    for (double v : s.crps) {
      if (std::isnan(v)) continue;
      sum += v;
      ++cnt;
    }
    out.per_station.push_back(cnt > 0 ? sum / cnt : std::nan(""));
  }
  double total = 0.0;
  long cnt = 0;
  for (double v : out.per_station) {
    if (std::isnan(v)) continue;
    total += v;
    ++cnt;
  }
  out.overall = cnt > 0 ? total / cnt : std::nan("");
  return out;
}

std::vector<double> outperformance(const std::vector<ScoreSeries>& a,
                                   const std::vector<ScoreSeries>& b) {
  check_aligned(a, b);
  std::vector<double> share(a.size(), 0.0);
  for (size_t s = 0; s < a.size(); ++s) {
    long wins = 0, total = 0;
    for (size_t t = 0; t < a[s].crps.size(); ++t) {
      const double xa = a[s].crps[t], xb = b[s].crps[t];
      if (std::isnan(xa) || std::isnan(xb)) continue;
      ++total;
      if (xa < xb) ++wins;
    }
    share[s] = total > 0 ? static_cast<double>(wins) / total : 0.0;
  }
  return share;
}

ScoreDifference score_difference_series(const std::vector<ScoreSeries>& a,
                                        const std::vector<ScoreSeries>& b) {
  check_aligned(a, b);
  const size_t n = a.front().crps.size();
  ScoreDifference out;
  out.diff.resize(n);
  out.winner.resize(n);
  for (size_t t = 0; t < n; ++t) {
    double sum = 0.0;
    long cnt = 0;
    for (size_t s = 0; s < a.size(); ++s) {
      const double xa = a[s].crps[t], xb = b[s].crps[t];
      if (std::isnan(xa) || std::isnan(xb)) continue;
      sum += xa - xb;
      ++cnt;
    }
    const double d = cnt > 0 ? sum / cnt : 0.0;
    out.diff[t] = d;
    out.winner[t] = d < 0.0 ? "a" : (d > 0.0 ? "b" : "tie");
  }
  return out;
}

}  // namespace spatvine
