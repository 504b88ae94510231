#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "spatvine/rng.hpp"
#include "spatvine/slcvcl.hpp"
#include "spatvine/synth.hpp"

using namespace spatvine;

namespace {

// Stations on the equator: great-circle distances are exactly proportional
// to longitude gaps, so coordinate scaling shifts every lnD by a constant.
std::vector<Station> equator_stations(int d, double scale) {
  const double base[12] = {0.0, 0.021, 0.05, 0.11, 0.23, 0.31, 0.55, 0.72, 0.9, 1.3, 1.7, 2.2};
  std::vector<Station> s(d);
  for (int i = 0; i < d; ++i)
    s[i] = Station{i + 1, "E", base[i] * scale, 0.0, 50.0 * ((i * 7) % 11)};
  return s;
}

SpatialParam known_beta() {
  SpatialParam b;
  b.beta1 = {1.1, -0.14, -0.012};
  b.beta2 = {0.4, -0.18, 0.05, 0.03};
  b.beta3 = {0.2, -0.09, 0.04, 0.02, 0.03, 0.01};
  b.beta_nu = {0.5, 0.1, 0.2};
  return b;
}

}  // namespace

TEST_CASE("model_h: zero map, hand arithmetic, intercept linearity") {
  SpatialParam zero;
  EdgeCovariates cov;
  cov.tree = 1;
  cov.ln_d_ij = 2.3026;
  cov.ln_e_ij = 0.0;
  CHECK(model_h(cov, zero) == 0.0);

  SpatialParam b;
  b.beta1 = {2.25, -0.30, -0.02};
  CHECK(model_h(cov, b) == doctest::Approx(2.25 - 0.30 * 2.3026).epsilon(1e-12));
  CHECK(model_h(cov, b) == doctest::Approx(1.5592).epsilon(1e-4));

  // intercept-only perturbation shifts every edge of the tree equally
  EdgeCovariates cov2 = cov;
  cov2.ln_d_ij = 4.0;
  cov2.ln_e_ij = 1.5;
  SpatialParam shifted = b;
  shifted.beta1[0] += 0.37;
  CHECK(model_h(cov, shifted) - model_h(cov, b) == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(model_h(cov2, shifted) - model_h(cov2, b) == doctest::Approx(0.37).epsilon(1e-12));

  EdgeCovariates bad;
  bad.tree = 4;
  CHECK_THROWS_AS(model_h(bad, b), input_error);
}

TEST_CASE("theta_spatial: chained closed forms and clamp boundary") {
  SpatialParam zero;
  EdgeCovariates cov;
  cov.tree = 1;
  CHECK(theta_spatial(cov, {FamilyKind::gaussian, 0}, zero) == doctest::Approx(0.0));

  SpatialParam b;
  b.beta1 = {0.5493, 0.0, 0.0};
  CHECK(std::tanh(0.5493) == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(theta_spatial(cov, {FamilyKind::gaussian, 0}, b) ==
        doctest::Approx(0.70711).epsilon(1e-4));

  SpatialParam neg;
  neg.beta1 = {-5.0, 0.0, 0.0};
  ClampStats stats;
  const double th = theta_spatial(cov, {FamilyKind::gumbel, 0}, neg, &stats);
  CHECK(stats.tau_clamps == 1);
  CHECK(th == doctest::Approx(1.0 / (1.0 - 0.001)).epsilon(1e-9));  // about 1.001
}

TEST_CASE("nu_spatial: arithmetic value, lower clamp, monotone in distance") {
  SpatialParam b;
  b.beta_nu = {0.40, 0.02, 0.27};
  EdgeCovariates cov;
  cov.tree = 1;
  cov.ln_d_ij = 4.0;
  CHECK(nu_spatial(cov, b) == doctest::Approx(std::exp(1.50)).epsilon(1e-12));
  CHECK(nu_spatial(cov, b) == doctest::Approx(4.4817).epsilon(1e-4));

  SpatialParam zero;
  ClampStats stats;
  CHECK(nu_spatial(cov, zero, &stats) == doctest::Approx(2.0 + 1e-6));  // exp(0) = 1, clamped
  CHECK(stats.nu_clamps == 1);

  double prev = 0.0;
  for (double lnd : {1.0, 2.0, 4.0, 6.0}) {
    cov.ln_d_ij = lnd;
    const double nu = nu_spatial(cov, b);
    CHECK(nu > prev);
    prev = nu;
  }
}

TEST_CASE("start_values: exact recovery from noise-free link-generated estimates") {
  const auto st = equator_stations(9, 1.0);
  VineCollection col = build_collection(build_covariates(st));
  const SpatialParam truth = known_beta();
  for (Slot& s : col.slots) s.family = Family{FamilyKind::student_t, 0};

  FittedLcvcl fitted;
  fitted.slot_params = spatial_slot_params(col, truth);
  const SpatialParam rec = start_values(col, fitted);
  for (int i = 0; i < SpatialParam::kDim; ++i)
    CHECK(rec.get(i) == doctest::Approx(truth.get(i)).epsilon(1e-9));
}

TEST_CASE("constant nu estimates give an intercept-only nu regression") {
  const auto st = equator_stations(8, 1.0);
  VineCollection col = build_collection(build_covariates(st));
  for (Slot& s : col.slots) s.family = Family{FamilyKind::student_t, 0};
  SpatialParam gen = known_beta();
  gen.beta_nu = {std::log(7.5), 0.0, 0.0};  // nu identically 7.5
  FittedLcvcl fitted;
  fitted.slot_params = spatial_slot_params(col, gen);
  const SpatialParam rec = start_values(col, fitted);
  CHECK(rec.beta_nu[0] == doctest::Approx(std::log(7.5)).epsilon(1e-9));
  CHECK(rec.beta_nu[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rec.beta_nu[2] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("free-parameter dimension is 16 for d in {4, 10, 54}") {
  CHECK(SpatialParam::kDim == 16);
  CHECK(SlcvclFit::n_free_params == 16);
  for (int d : {4, 10, 54}) {
    SynthOptions opts;
    opts.d = d;
    opts.seed = 60 + d;
    opts.calibrate = false;
    const SyntheticWorld world = make_world(opts);
    const SynthData data = generate(world, 80);
    VineCollection col = build_collection(world.table);
    select_families(col, data.copula, {FamilyKind::gaussian});
    SlcvclOptions so;
    so.max_iter = 2;
    const SlcvclFit fit = fit_slcvcl(col, data.copula, world.beta, so);
    CHECK(fit.n_free_params == 16);
  }
}

TEST_CASE("link consistency: fisher_z of the generated tau reproduces model_h") {
  const auto st = equator_stations(10, 1.0);
  VineCollection col = build_collection(build_covariates(st));
  for (Slot& s : col.slots) s.family = Family{FamilyKind::gaussian, 0};
  const SpatialParam beta = known_beta();
  ClampStats stats;
  const auto params = spatial_slot_params(col, beta, &stats);
  REQUIRE(stats.tau_clamps == 0);
  for (size_t i = 0; i < col.slots.size(); ++i) {
    const double xi = fisher_z(tau_from_theta(params[i].family, params[i].theta));
    CHECK(xi == doctest::Approx(model_h(col.slots[i].covariates, beta)).epsilon(1e-9));
  }
}

TEST_CASE("zero optimizer iterations return the start objective exactly") {
  SynthOptions opts;
  opts.d = 5;
  opts.seed = 4;
  const SyntheticWorld world = make_world(opts);
  const SynthData data = generate(world, 150);
  VineCollection col = build_collection(world.table);
  select_families(col, data.copula, {FamilyKind::gaussian});
  SlcvclOptions so;
  so.max_iter = 0;
  const SlcvclFit fit = fit_slcvcl(col, data.copula, world.beta, so);
  CHECK(fit.cll == fit.start_cll);
  for (int i = 0; i < 16; ++i) CHECK(fit.beta.get(i) == world.beta.get(i));
}

TEST_CASE("nestedness: the 16-parameter fit cannot beat the free fit") {
  SynthOptions opts;
  opts.d = 6;
  opts.seed = 8;
  const SyntheticWorld world = make_world(opts);
  const SynthData data = generate(world, 500);
  VineCollection col = build_collection(world.table);
  const SelectedFamilies sel = select_families(col, data.copula, {FamilyKind::gaussian});
  const FittedLcvcl lfit = fit_lcvcl(col, data.copula, sel);
  const SpatialParam start = start_values(col, lfit);
  const SlcvclFit sfit = fit_slcvcl(col, data.copula, start);
  CHECK(sfit.cll <= lfit.cll + 1e-4);
  CHECK(sfit.cll >= sfit.start_cll - 1e-9);
}

TEST_CASE("distance-unit shift: intercepts move, fitted link values do not") {
  const SpatialParam truth = known_beta();
  const double scale = std::exp(0.7);  // lnD shifts by exactly 0.7

  // OLS stage, exact: identical fitted estimates attached to both geometries.
  const auto st1 = equator_stations(9, 1.0);
  const auto st2 = equator_stations(9, scale);
  VineCollection col1 = build_collection(build_covariates(st1));
  VineCollection col2 = build_collection(build_covariates(st2));
  REQUIRE(col1.slots.size() == col2.slots.size());
  for (Slot& s : col1.slots) s.family = Family{FamilyKind::gaussian, 0};
  for (Slot& s : col2.slots) s.family = Family{FamilyKind::gaussian, 0};

  FittedLcvcl fitted;
  fitted.slot_params = spatial_slot_params(col1, truth);
  const SpatialParam b1 = start_values(col1, fitted);
  const SpatialParam b2 = start_values(col2, fitted);  // same responses, shifted regressors
  for (size_t i = 0; i < col1.slots.size(); ++i) {
    const double h1 = model_h(col1.slots[i].covariates, b1);
    const double h2 = model_h(col2.slots[i].covariates, b2);
    CHECK(h1 == doctest::Approx(h2).epsilon(1e-9));
  }
  // slopes identical, intercepts absorb the shift
  CHECK(b1.beta1[1] == doctest::Approx(b2.beta1[1]).epsilon(1e-9));
  CHECK(b1.beta1[0] != doctest::Approx(b2.beta1[0]).epsilon(1e-6));

  // MLE stage, within optimizer tolerance: the scaled geometry is an exact
  // affine reparametrization, so the two fits must land on the same link
  // values at corresponding slots when given the same data.
  const int n = 300;
  Matrix u(n, 9);
  {
    FittedLcvcl gen_fit;
    gen_fit.slot_params = spatial_slot_params(col1, truth);
    // sample each local-vine variable chainwise from pair copulas (simple
    // stationary driver; the invariant needs no particular law)
    const PairCopula chain{{FamilyKind::gaussian, 0}, 0.45, 0.0};
    spatvine::CounterRng rng(90);
    for (int t = 0; t < n; ++t) {
      u(t, 0) = rng.uniform(10 * t);
      for (int s = 1; s < 9; ++s)
        u(t, s) = bicop_hinv1(chain, u(t, s - 1), rng.uniform(10 * t + s));
    }
  }
  const SelectedFamilies sel1 = select_families(col1, u, {FamilyKind::gaussian});
  const SelectedFamilies sel2 = select_families(col2, u, {FamilyKind::gaussian});
  const SlcvclFit fit1 = fit_slcvcl(col1, u, start_values(col1, fit_lcvcl(col1, u, sel1)));
  const SlcvclFit fit2 = fit_slcvcl(col2, u, start_values(col2, fit_lcvcl(col2, u, sel2)));
  CHECK(fit1.cll == doctest::Approx(fit2.cll).epsilon(1e-6));
  for (size_t i = 0; i < col1.slots.size(); ++i) {
    const double h1 = model_h(col1.slots[i].covariates, fit1.beta);
    const double h2 = model_h(col2.slots[i].covariates, fit2.beta);
    CHECK(h1 == doctest::Approx(h2).epsilon(2e-3));
  }
}
