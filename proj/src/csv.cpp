#include "spatvine/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace spatvine {

long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

std::string iso_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04ld-%02u-%02u", y + (m <= 2), m, d);
  return buf;
}

long parse_iso_date(const std::string& iso) {
  int y, m, d;
  if (std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    throw input_error("bad ISO date: " + iso);
  if (m < 1 || m > 12 || d < 1 || d > 31) throw input_error("bad ISO date: " + iso);
  return days_from_civil(y, m, d);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& s, const std::string& ctx) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw input_error("bad numeral '" + s + "' in " + ctx);
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw input_error("cannot write " + path);
  return f;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<Station> read_stations_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw input_error("cannot read " + path);
  std::string line;
  if (!std::getline(f, line)) throw input_error(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() != 5 || header[0] != "id" || header[1] != "name" || header[2] != "lon" ||
      header[3] != "lat" || header[4] != "elev")
    throw input_error(path + ": expected header id,name,lon,lat,elev");
  std::vector<Station> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != 5) throw input_error(path + ": wrong column count");
    Station s;
    s.id = static_cast<int>(parse_num(cols[0], path));
    s.name = cols[1];
    s.lon = parse_num(cols[2], path);
    s.lat = parse_num(cols[3], path);
    s.elev = parse_num(cols[4], path);
    out.push_back(std::move(s));
  }
  validate_stations(out);
  return out;
}

void write_stations_csv(const std::string& path, const std::vector<Station>& stations) {
  std::ofstream f = open_out(path);
  f << "id,name,lon,lat,elev\n";
  for (const Station& s : stations)
    f << s.id << ',' << s.name << ',' << format_double(s.lon) << ',' << format_double(s.lat)
      << ',' << format_double(s.elev) << '\n';
}

ObsTable read_obs_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw input_error("cannot read " + path);
  std::string line;
  if (!std::getline(f, line)) throw input_error(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "date")
    throw input_error(path + ": expected header date,<station ids>");
  ObsTable table;
  for (size_t i = 1; i < header.size(); ++i)
    table.station_ids.push_back(static_cast<int>(parse_num(header[i], path)));
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != header.size()) throw input_error(path + ": wrong column count");
    table.dates.push_back(cols[0]);
    table.days.push_back(parse_iso_date(cols[0]));
    std::vector<double> row(header.size() - 1);
    for (size_t i = 1; i < cols.size(); ++i)
      row[i - 1] = cols[i].empty() ? std::numeric_limits<double>::quiet_NaN()
                                   : parse_num(cols[i], path);
    rows.push_back(std::move(row));
  }
  table.y = Matrix(static_cast<int>(rows.size()), static_cast<int>(table.station_ids.size()));
  for (size_t t = 0; t < rows.size(); ++t)
    for (size_t s = 0; s < rows[t].size(); ++s) table.y(static_cast<int>(t), static_cast<int>(s)) = rows[t][s];
  return table;
}

void write_obs_csv(const std::string& path, const ObsTable& table) {
  std::ofstream f = open_out(path);
  f << "date";
  for (int id : table.station_ids) f << ',' << id;
  f << '\n';
  for (int t = 0; t < table.y.rows(); ++t) {
    f << table.dates[t];
    for (int s = 0; s < table.y.cols(); ++s) {
      f << ',';
      if (std::isfinite(table.y(t, s))) f << format_double(table.y(t, s));
    }
    f << '\n';
  }
}

void write_prediction_csv(const std::string& path, const std::vector<std::string>& dates,
                          const Matrix& samples, const std::vector<bool>& missing,
                          bool with_samples) {
  std::ofstream f = open_out(path);
  f << "time,mean,median,q025,q975";
  if (with_samples)
    for (int m = 0; m < samples.cols(); ++m) f << ",s" << (m + 1);
  f << '\n';
  const int m_count = samples.cols();
  std::vector<double> row(m_count);
  for (int t = 0; t < samples.rows(); ++t) {
    f << dates[t];
    if (missing[t]) {
      f << ",,,,";
      if (with_samples)
        for (int m = 0; m < m_count; ++m) f << ',';
      f << '\n';
      continue;
    }
    for (int m = 0; m < m_count; ++m) row[m] = samples(t, m);
    std::vector<double> sorted = row;
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= m_count;
    const double median = 0.5 * (sorted[(m_count - 1) / 2] + sorted[m_count / 2]);
    auto quant = [&](double q) {
      const int idx = std::min<int>(m_count - 1, static_cast<int>(std::ceil(q * m_count)) - 1);
      return sorted[std::max(idx, 0)];
    };
    f << ',' << format_double(mean) << ',' << format_double(median) << ','
      << format_double(quant(0.025)) << ',' << format_double(quant(0.975));
    if (with_samples)
      for (int m = 0; m < m_count; ++m) f << ',' << format_double(row[m]);
    f << '\n';
  }
}

void write_scores_csv(const std::string& path, const std::vector<ScoreSeries>& series,
                      const std::vector<std::string>& dates) {
  std::ofstream f = open_out(path);
  f << "station,time,crps\n";
  for (const ScoreSeries& s : series)
    for (size_t t = 0; t < s.crps.size(); ++t) {
      f << s.station_id << ',' << dates[t] << ',';
      if (!std::isnan(s.crps[t])) f << format_double(s.crps[t]);
      f << '\n';
    }
}

void write_difference_csv(const std::string& path, const std::vector<std::string>& dates,
                          const ScoreDifference& diff, const std::string& name_a,
                          const std::string& name_b) {
  std::ofstream f = open_out(path);
  f << "time,diff,winner\n";
  for (size_t t = 0; t < diff.diff.size(); ++t) {
    const std::string& w = diff.winner[t];
    f << dates[t] << ',' << format_double(diff.diff[t]) << ','
      << (w == "a" ? name_a : (w == "b" ? name_b : "tie")) << '\n';
  }
}

}  // namespace spatvine
