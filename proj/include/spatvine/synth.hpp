// Synthetic-world generator: a known spatial-link ground truth for
// parameter-recovery and prediction-accuracy tests.
#pragma once

#include <cstdint>

#include "spatvine/margins.hpp"
#include "spatvine/slcvcl.hpp"

namespace spatvine {

enum class Placement {
  clustered,  // multi-scale clusters; spreads the log-distance covariates
  uniform,
  grid
};

struct SynthOptions {
  int d = 10;
  uint64_t seed = 1;
  uint64_t geometry_seed = 0;  // 0: reuse seed; fixed layouts across data seeds otherwise
  Placement placement = Placement::clustered;
  double lon0 = 6.0, lat0 = 47.0, lon1 = 15.0, lat1 = 55.0;
  double elev_min = 0.0, elev_max = 800.0;
  FamilyKind family = FamilyKind::gaussian;  // family of every generator edge
  SpatialParam beta = default_beta();        // generating links
  // Gaussian worlds: also compute the population estimand of the spatial
  // fit under the generated law (the recovery target).
  bool calibrate = true;
  // Marginal ground truth.
  double resid_sigma = 2.0;
  double resid_eta = 6.0;
  double elev_coef = -0.006;

  // Moderate, distance-decaying dependence; links stay well inside the
  // clamp-free region over the default box.
  static SpatialParam default_beta() {
    SpatialParam b;
    b.beta1 = {1.0, -0.15, -0.01};
    b.beta2 = {0.3, -0.12, 0.03, 0.03};
    b.beta3 = {0.25, -0.1, 0.03, 0.02, 0.03, 0.02};
    b.beta_nu = {0.4, 0.02, 0.27};
    return b;
  }
};

struct SyntheticWorld {
  SynthOptions opts;
  std::vector<Station> stations;  // ids ordered along a greedy spatial chain
  CovariateTable table;
  MarginalModel margins;   // generating margins
  SpatialParam beta_gen;   // links driving the global-vine edges
  // Recovery target: for Gaussian worlds the population estimand of the
  // spatial composite fit under this world's law; beta_gen otherwise.
  SpatialParam beta;
};

SyntheticWorld make_world(const SynthOptions& opts);

// Implied correlation matrix of the Gaussian global C-vine whose edge
// partial correlations come from the links.
Matrix implied_correlation(const CovariateTable& table, const SpatialParam& beta);

// Expected composite log-likelihood per observation of an all-Gaussian
// S-LCVCL with links beta, under a Gaussian truth with correlation matrix r.
// Closed form: the vine's conditional quantiles are linear in z, so only
// second moments enter.
double population_cll(const VineCollection& col, const Matrix& r, const SpatialParam& beta);

// The population estimand of the spatial fit: argmax of population_cll over
// the 13 link components, started from the OLS fixed point. This is what a
// correctly implemented estimator converges to as N grows.
SpatialParam population_estimand(const CovariateTable& table, const Matrix& r,
                                 const SpatialParam& beta0);

struct SynthData {
  Matrix obs;     // observation scale
  Matrix copula;  // copula-scale truth
  std::vector<long> days;
  std::vector<std::string> dates;  // ISO, daily from 2010-01-01
};

// Samples N rows from a single global C-vine whose root ordering follows the
// station ids and whose pair parameters come from the links at each edge's
// covariates (trees beyond the third reuse the tree-3 link with the two most
// recently added conditioning stations). Margins are applied afterwards.
SynthData generate(const SyntheticWorld& world, int n);

// The generator-implied tau of a first-tree edge {1, k}; used by tests.
double tree1_link_tau(const SyntheticWorld& world, int k);

}  // namespace spatvine
