// Spatial reparametrization of the composite likelihood: tree-level link
// functions from log-distances/log-elevation-differences to Kendall's tau
// (through Fisher z) and to the Student-t degrees of freedom, OLS start
// values, and joint estimation of the 16 regression coefficients.
#pragma once

#include <array>
#include <string>

#include "spatvine/lcvcl.hpp"

namespace spatvine {

struct SpatialParam {
  static constexpr int kDim = 16;

  std::array<double, 3> beta1{};    // intercept, lnD_ij, lnE_ij
  std::array<double, 4> beta2{};    // intercept, lnD_ij, lnD_ik, lnD_jk
  std::array<double, 6> beta3{};    // intercept, lnD_ij, lnD_ik, lnD_im, lnD_jk, lnD_jm
  std::array<double, 3> beta_nu{};  // intercept, tree level, lnD_ij

  double get(int i) const;
  void set(int i, double v);
  // Component labels in reporting order (tree-1 block, tree-2, tree-3, nu).
  static const std::array<std::string, kDim>& names();
  // Indices of intercept components (0, 3, 7) and of slope components.
  static bool is_intercept(int i) { return i == 0 || i == 3 || i == 7; }
  static bool is_theta_slope(int i) {
    return !is_intercept(i) && i < 13;
  }
};

// Fisher-z scale linear predictor of an edge.
double model_h(const EdgeCovariates& cov, const SpatialParam& beta);

// theta = g_tau^{-1}(tanh(model_h); family). Clamps are counted in stats.
double theta_spatial(const EdgeCovariates& cov, const Family& family, const SpatialParam& beta,
                     ClampStats* stats = nullptr);

// nu = exp(beta0 + beta1 * tree + beta2 * lnD_ij), clamped into (2, 100].
double nu_spatial(const EdgeCovariates& cov, const SpatialParam& beta,
                  ClampStats* stats = nullptr);

// Slot parameter vector generated from the links, keeping each slot's family.
std::vector<PairCopula> spatial_slot_params(const VineCollection& col, const SpatialParam& beta,
                                            ClampStats* stats = nullptr);

// OLS of fisher_z(tau-hat) per tree and of log(nu-hat) over Student-t edges,
// fitted to the joint LCVCL estimates.
SpatialParam start_values(const VineCollection& col, const FittedLcvcl& fitted);

struct SlcvclOptions {
  int max_iter = 500;
  double rel_ftol = 1e-8;
  double fd_step = 1e-5;
};

struct SlcvclFit {
  SpatialParam beta;
  SpatialParam start;
  double cll = 0.0;
  double start_cll = 0.0;
  bool converged = false;
  int iterations = 0;
  ClampStats clamps;  // counted once at the final beta
  static constexpr int n_free_params = SpatialParam::kDim;
};

SlcvclFit fit_slcvcl(const VineCollection& col, const Matrix& copula_data,
                     const SpatialParam& start, const SlcvclOptions& opts = {});

}  // namespace spatvine
