#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "spatvine/geo.hpp"

using namespace spatvine;

namespace {

std::vector<Station> random_stations(int d, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> lon(6.0, 15.0), lat(47.0, 55.0), elev(0.0, 900.0);
  std::vector<Station> s(d);
  for (int i = 0; i < d; ++i) s[i] = Station{i + 1, "S", lon(gen), lat(gen), elev(gen)};
  return s;
}

}  // namespace

TEST_CASE("distance: equator degree, symmetry, identical coordinates") {
  const Station a{1, "a", 0.0, 0.0, 0.0};
  const Station b{2, "b", 1.0, 0.0, 0.0};
  // one degree of longitude on the equator with radius 6371 km
  CHECK(distance_km(a, b) == doctest::Approx(6371.0 * M_PI / 180.0).epsilon(1e-6));
  CHECK(distance_km(a, b) == doctest::Approx(111.19).epsilon(1e-4));

  const auto s = random_stations(12, 1);
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j)
      CHECK(distance_km(s[i], s[j]) == distance_km(s[j], s[i]));

  const Station c{3, "c", 1.0, 0.0, 55.0};
  CHECK_THROWS_AS(distance_km(b, c), input_error);
}

TEST_CASE("covariates: definitions and symmetry") {
  std::vector<Station> s = {
      {1, "a", 8.0, 50.0, 100.0}, {2, "b", 8.2, 50.0, 100.0},
      {3, "c", 8.0, 50.4, 350.0}, {4, "d", 8.5, 50.3, 40.0}};
  const CovariateTable t = build_covariates(s);
  CHECK(t.log_elev_diff(0, 1) == doctest::Approx(std::log(1.0)));  // equal elevations -> ln 1 = 0
  CHECK(t.log_dist(0, 1) == doctest::Approx(std::log(distance_km(s[0], s[1]))));
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      CHECK(t.log_dist(i, j) == t.log_dist(j, i));
      CHECK(t.log_elev_diff(i, j) == t.log_elev_diff(j, i));
      CHECK(std::isfinite(t.log_dist(i, j)));
    }
  // distance 10 km -> ln 10
  CHECK(std::log(10.0) == doctest::Approx(2.302585093).epsilon(1e-9));

  s[1] = s[0];
  s[1].id = 2;
  CHECK_THROWS_AS(build_covariates(s), input_error);
}

TEST_CASE("square grid table verified entrywise against distance_km") {
  std::vector<Station> s;
  int id = 1;
  for (int gx = 0; gx < 2; ++gx)
    for (int gy = 0; gy < 2; ++gy)
      s.push_back(Station{id++, "g", 8.0 + gx, 50.0 + gy, 100.0 * id});
  const CovariateTable t = build_covariates(s);
  for (size_t i = 0; i < s.size(); ++i)
    for (size_t j = 0; j < s.size(); ++j) {
      if (i == j) continue;
      CHECK(t.log_dist(i, j) == std::log(distance_km(s[i], s[j])));
      CHECK(t.log_elev_diff(i, j) == std::log(std::fabs(s[i].elev - s[j].elev) + 1.0));
    }
}

TEST_CASE("triangle inequality on random triples") {
  const auto s = random_stations(15, 4);
  const CovariateTable t = build_covariates(s);
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> pick(0, 14);
  for (int rep = 0; rep < 200; ++rep) {
    const int a = pick(gen), b = pick(gen), c = pick(gen);
    if (a == b || b == c || a == c) continue;
    CHECK(std::exp(t.log_dist(a, b)) <=
          std::exp(t.log_dist(a, c)) + std::exp(t.log_dist(c, b)) + 1e-9);
  }
}

TEST_CASE("nearest neighbors: line geometry, ties, prefix property, oracle") {
  // stations on the equator at 0, 1, 2, 3 km East
  std::vector<Station> line;
  for (int i = 0; i < 4; ++i)
    line.push_back(Station{i + 1, "l", i * (1.0 / 111.19449), 0.0, 10.0 * i});
  const CovariateTable t = build_covariates(line);
  CHECK(nearest_neighbors(0, 3, t) == std::vector<int>{1, 2, 3});
  CHECK_THROWS_AS(nearest_neighbors(0, 4, t), input_error);

  // two equidistant neighbors -> lower index first
  std::vector<Station> tie = {{1, "m", 0.0, 0.0, 0.0},
                              {2, "e", 0.01, 0.0, 0.0},
                              {3, "w", -0.01, 0.0, 0.0},
                              {4, "f", 0.5, 0.0, 0.0}};
  const CovariateTable tt = build_covariates(tie);
  const auto nn = nearest_neighbors(0, 2, tt);
  CHECK(nn[0] == 1);
  CHECK(nn[1] == 2);

  const auto s = random_stations(10, 9);
  const CovariateTable tr = build_covariates(s);
  for (int st = 0; st < 10; ++st) {
    // brute force sort of all distances
    std::vector<int> all;
    for (int j = 0; j < 10; ++j)
      if (j != st) all.push_back(j);
    std::stable_sort(all.begin(), all.end(), [&](int a, int b) {
      const double da = distance_km(s[st], s[a]), db = distance_km(s[st], s[b]);
      if (da != db) return da < db;
      return a < b;
    });
    const auto k3 = nearest_neighbors(st, 3, tr);
    CHECK(std::equal(k3.begin(), k3.end(), all.begin()));
    // prefix property
    const auto k5 = nearest_neighbors(st, 5, tr);
    CHECK(std::equal(k3.begin(), k3.end(), k5.begin()));
  }
}

TEST_CASE("station validation catches bad ids and ranges") {
  std::vector<Station> s = random_stations(4, 2);
  s[2].id = 7;
  CHECK_THROWS_AS(validate_stations(s), input_error);
  s = random_stations(4, 2);
  s[0].lat = 95.0;
  CHECK_THROWS_AS(validate_stations(s), input_error);
  s = random_stations(4, 2);
  s[3].lon = -190.0;
  CHECK_THROWS_AS(validate_stations(s), input_error);
}
