#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spatvine/margins.hpp"
#include "spatvine/rng.hpp"
#include "spatvine/stats.hpp"
#include "test_support.hpp"

using namespace spatvine;

namespace {

std::vector<Station> four_stations() {
  return {{1, "a", 8.0, 50.0, 100.0},
          {2, "b", 9.0, 50.5, 300.0},
          {3, "c", 8.5, 51.0, 50.0},
          {4, "d", 9.5, 49.5, 640.0}};
}

std::vector<long> daily_days(int n) {
  std::vector<long> days(n);
  for (int i = 0; i < n; ++i) days[i] = 14610 + i;  // from 2010-01-01
  return days;
}

Matrix seasonal_matrix(const std::vector<Station>& st, std::span<const long> days,
                       double elev_coef, double noise_sigma, double eta, uint64_t seed) {
  const CounterRng rng(seed);
  Matrix y(static_cast<int>(days.size()), static_cast<int>(st.size()));
  uint64_t ctr = 0;
  for (int t = 0; t < y.rows(); ++t)
    for (int s = 0; s < y.cols(); ++s) {
      const double w = 2.0 * std::numbers::pi * days[t] / 365.25;
      double val = 8.0 + 0.3 * s + elev_coef * st[s].elev - 7.0 * std::cos(w) +
                   1.2 * std::sin(w) + 0.5 * std::sin(2.0 * w);
      if (noise_sigma > 0.0)
        val += noise_sigma * student_t_quantile(rng.uniform(ctr++), eta);
      y(t, s) = val;
    }
  return y;
}

}  // namespace

TEST_CASE("pure sinusoid with zero noise is fitted exactly") {
  const auto st = four_stations();
  const auto days = daily_days(800);
  const Matrix y = seasonal_matrix(st, days, -0.006, 0.0, 6.0, 1);
  const MarginalModel m = fit_margins(y, days, st);
  for (int s = 0; s < 4; ++s) {
    for (int t = 0; t < y.rows(); t += 97)
      CHECK(m.trend(days[t], s) == doctest::Approx(y(t, s)).epsilon(1e-8));
    CHECK(m.margins[s].sigma <= 1e-6);  // scale collapses to its floor
  }
}

TEST_CASE("constant series has no seasonal coefficients") {
  const auto st = four_stations();
  const auto days = daily_days(500);
  Matrix y(500, 4);
  for (int t = 0; t < 500; ++t)
    for (int s = 0; s < 4; ++s) y(t, s) = 3.0 + s;
  const MarginalModel m = fit_margins(y, days, st);
  for (int s = 0; s < 4; ++s)
    for (int j = 1; j < 5; ++j) CHECK(std::fabs(m.margins[s].reg[j]) < 1e-8);
}

TEST_CASE("coefficient recovery under t5 noise within 3 standard errors") {
  const auto st = four_stations();
  const int n = 1100;
  const auto days = daily_days(n);
  const double sigma = 2.0;
  const Matrix y = seasonal_matrix(st, days, -0.006, sigma, 5.0, 17);
  const MarginalModel m = fit_margins(y, days, st);
  // OLS standard errors: harmonics are near-orthogonal, X'X ~ diag(n, n/2...)
  const double noise_sd = sigma * std::sqrt(5.0 / 3.0);
  const double se_harm = noise_sd / std::sqrt(n / 2.0);
  for (int s = 0; s < 4; ++s) {
    CHECK(std::fabs(m.margins[s].reg[1] - 1.2) < 3.0 * se_harm);
    CHECK(std::fabs(m.margins[s].reg[2] - (-7.0)) < 3.0 * se_harm);
    CHECK(std::fabs(m.margins[s].reg[3] - 0.5) < 3.0 * se_harm);
    CHECK(std::fabs(m.margins[s].reg[4]) < 3.0 * se_harm);
    CHECK(m.margins[s].eta > 2.5);
    CHECK(m.margins[s].eta < 30.0);
    CHECK(m.margins[s].sigma == doctest::Approx(sigma).epsilon(0.15));
  }
}

TEST_CASE("median residual maps to one half and back") {
  const auto st = four_stations();
  const auto days = daily_days(900);
  const Matrix y = seasonal_matrix(st, days, -0.006, 1.5, 8.0, 3);
  const MarginalModel m = fit_margins(y, days, st);
  for (int s = 0; s < 4; ++s) {
    const double y_med = m.trend(days[10], s) + m.margins[s].mu;
    CHECK(to_copula_value(y_med, days[10], s, m) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(from_copula_value(0.5, days[10], s, m) == doctest::Approx(y_med).epsilon(1e-8));
  }
}

TEST_CASE("roundtrip identity on the training matrix") {
  const auto st = four_stations();
  const auto days = daily_days(700);
  const Matrix y = seasonal_matrix(st, days, -0.006, 2.0, 6.0, 29);
  const MarginalModel m = fit_margins(y, days, st);
  const Matrix u = to_copula_data(y, days, m);
  for (int t = 0; t < y.rows(); t += 13)
    for (int s = 0; s < 4; ++s) {
      CHECK(u(t, s) > 0.0);
      CHECK(u(t, s) < 1.0);
      CHECK(from_copula_value(u(t, s), days[t], s, m) == doctest::Approx(y(t, s)).epsilon(1e-8));
    }
}

TEST_CASE("transform is monotone in u at fixed time and station") {
  const auto st = four_stations();
  const auto days = daily_days(400);
  const Matrix y = seasonal_matrix(st, days, -0.006, 2.0, 6.0, 31);
  const MarginalModel m = fit_margins(y, days, st);
  double prev = -1e30;
  for (double u : {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    const double val = from_copula_value(u, days[5], 2, m);
    CHECK(val > prev);
    prev = val;
  }
}

TEST_CASE("copula data passes a KS uniformity check at level 0.01") {
  const auto st = four_stations();
  const int n = 2000;
  const auto days = daily_days(n);
  const Matrix y = seasonal_matrix(st, days, -0.006, 2.0, 6.0, 41);
  const MarginalModel m = fit_margins(y, days, st);
  const Matrix u = to_copula_data(y, days, m);
  for (int s = 0; s < 4; ++s) {
    const double d = testsup::ks_uniform(u.column(s));
    CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));  // alpha = 0.01 critical value
  }
}

TEST_CASE("interpolated margins: midpoint of identical stations is identical") {
  auto st = four_stations();
  const auto days = daily_days(600);
  Matrix y = seasonal_matrix(st, days, 0.0, 1.0, 7.0, 5);
  // make stations 1 and 2 have identical series
  for (int t = 0; t < y.rows(); ++t) y(t, 1) = y(t, 0);
  MarginalModel m = fit_margins(y, days, st);
  m.margins[1] = m.margins[0];  // identical margins by construction
  const double mid_lon = 0.5 * (st[0].lon + st[1].lon);
  const double mid_lat = 0.5 * (st[0].lat + st[1].lat);
  const StationMargin interp = m.interpolate(mid_lon, mid_lat);
  // the two nearest carry equal weight; the third neighbor differs, so the
  // shared components dominate but exact equality holds when all three match
  m.margins[2] = m.margins[0];
  m.margins[3] = m.margins[0];
  const StationMargin all_same = m.interpolate(mid_lon, mid_lat);
  CHECK(all_same.mu == doctest::Approx(m.margins[0].mu).epsilon(1e-12));
  CHECK(all_same.sigma == doctest::Approx(m.margins[0].sigma).epsilon(1e-12));
  CHECK(all_same.eta == doctest::Approx(m.margins[0].eta).epsilon(1e-12));
  (void)interp;
  // interpolation at a station's own coordinates returns that margin
  const StationMargin at0 = m.interpolate(st[0].lon, st[0].lat);
  CHECK(at0.mu == m.margins[0].mu);
}

TEST_CASE("ar1 pre-whitening keeps the training roundtrip identity") {
  const auto st = four_stations();
  const int n = 800;
  const auto days = daily_days(n);
  Matrix y = seasonal_matrix(st, days, -0.006, 0.0, 6.0, 11);
  // overlay AR(1) residuals
  const CounterRng rng(13);
  uint64_t ctr = 0;
  for (int s = 0; s < 4; ++s) {
    double e = 0.0;
    for (int t = 0; t < n; ++t) {
      e = 0.6 * e + 1.5 * student_t_quantile(rng.uniform(ctr++), 8.0);
      y(t, s) += e;
    }
  }
  MarginOptions opts;
  opts.ar1 = true;
  const MarginalModel m = fit_margins(y, days, st, opts);
  for (int s = 0; s < 4; ++s) CHECK(m.margins[s].phi == doctest::Approx(0.6).epsilon(0.15));
  // roundtrip with the previous residual supplied
  for (int s = 0; s < 4; ++s)
    for (int t = 1; t < n; t += 151) {
      const double prev = residual(y(t - 1, s), days[t - 1], s, m);
      const double u = to_copula_value(y(t, s), days[t], s, m, prev);
      CHECK(from_copula_value(u, days[t], s, m, prev) == doctest::Approx(y(t, s)).epsilon(1e-8));
    }
}

TEST_CASE("fit_margins rejects missing values and misaligned inputs") {
  const auto st = four_stations();
  const auto days = daily_days(100);
  Matrix y(100, 4, 1.0);
  y(3, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_margins(y, days, st), input_error);
  Matrix ok(99, 4, 1.0);
  CHECK_THROWS_AS(fit_margins(ok, days, st), input_error);
}
