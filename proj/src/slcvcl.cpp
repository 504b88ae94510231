#include "spatvine/slcvcl.hpp"

#include <algorithm>
#include <cmath>

#include "spatvine/optim.hpp"
#include "spatvine/stats.hpp"

namespace spatvine {

double SpatialParam::get(int i) const {
  if (i < 3) return beta1[i];
  if (i < 7) return beta2[i - 3];
  if (i < 13) return beta3[i - 7];
  return beta_nu[i - 13];
}

void SpatialParam::set(int i, double v) {
  if (i < 3) beta1[i] = v;
  else if (i < 7) beta2[i - 3] = v;
  else if (i < 13) beta3[i - 7] = v;
  else beta_nu[i - 13] = v;
}

const std::array<std::string, SpatialParam::kDim>& SpatialParam::names() {
  static const std::array<std::string, kDim> n = {
      "beta_{0;1}",     "beta^1_{i,j;1}", "beta^2_{i,j;1}", "beta_{0;2}",
      "beta^1_{i,j;2}", "beta^1_{i,k;2}", "beta^1_{j,k;2}", "beta_{0;3}",
      "beta^1_{i,j;3}", "beta^1_{i,k;3}", "beta^1_{i,m;3}", "beta^1_{j,k;3}",
      "beta^1_{j,m;3}", "beta_0^nu",      "beta_1^nu",      "beta_2^nu"};
  return n;
}

double model_h(const EdgeCovariates& cov, const SpatialParam& beta) {
  switch (cov.tree) {
    case 1:
      return beta.beta1[0] + beta.beta1[1] * cov.ln_d_ij + beta.beta1[2] * cov.ln_e_ij;
    case 2:
      return beta.beta2[0] + beta.beta2[1] * cov.ln_d_ij + beta.beta2[2] * cov.ln_d_ik +
             beta.beta2[3] * cov.ln_d_jk;
    case 3:
      return beta.beta3[0] + beta.beta3[1] * cov.ln_d_ij + beta.beta3[2] * cov.ln_d_ik +
             beta.beta3[3] * cov.ln_d_im + beta.beta3[4] * cov.ln_d_jk +
             beta.beta3[5] * cov.ln_d_jm;
    default:
      throw input_error("model_h: tree level must be 1, 2 or 3");
  }
}

double theta_spatial(const EdgeCovariates& cov, const Family& family, const SpatialParam& beta,
                     ClampStats* stats) {
  const double tau = std::tanh(model_h(cov, beta));
  return theta_from_tau(family, tau, stats);
}

double nu_spatial(const EdgeCovariates& cov, const SpatialParam& beta, ClampStats* stats) {
  const double nu = std::exp(beta.beta_nu[0] + beta.beta_nu[1] * cov.tree +
                             beta.beta_nu[2] * cov.ln_d_ij);
  if (nu <= 2.0 + 1e-6 || nu > 100.0) {
    if (stats) ++stats->nu_clamps;
    return std::clamp(nu, 2.0 + 1e-6, 100.0);
  }
  return nu;
}

std::vector<PairCopula> spatial_slot_params(const VineCollection& col, const SpatialParam& beta,
                                            ClampStats* stats) {
  std::vector<PairCopula> params(col.slots.size());
  for (size_t i = 0; i < col.slots.size(); ++i) {
    const Slot& slot = col.slots[i];
    PairCopula c;
    c.family = slot.family;
    if (slot.family.kind != FamilyKind::independence)
      c.theta = theta_spatial(slot.covariates, slot.family, beta, stats);
    if (slot.family.kind == FamilyKind::student_t)
      c.nu = nu_spatial(slot.covariates, beta, stats);
    params[i] = c;
  }
  return params;
}

SpatialParam start_values(const VineCollection& col, const FittedLcvcl& fitted) {
  SpatialParam beta;
  for (int tree = 1; tree <= 3; ++tree) {
    const int k = tree == 1 ? 3 : (tree == 2 ? 4 : 6);
    std::vector<double> X;
    std::vector<double> y;
    for (size_t i = 0; i < col.slots.size(); ++i) {
      const Slot& slot = col.slots[i];
      if (slot.tree != tree || slot.family.kind == FamilyKind::independence) continue;
      const PairCopula& c = fitted.slot_params[i];
      const double tau = tau_from_theta(c.family, c.theta);
      y.push_back(fisher_z(std::clamp(tau, -1.0 + 1e-12, 1.0 - 1e-12)));
      const EdgeCovariates& cov = slot.covariates;
      X.push_back(1.0);
      X.push_back(cov.ln_d_ij);
      if (tree == 1) {
        X.push_back(cov.ln_e_ij);
      } else if (tree == 2) {
        X.push_back(cov.ln_d_ik);
        X.push_back(cov.ln_d_jk);
      } else {
        X.push_back(cov.ln_d_ik);
        X.push_back(cov.ln_d_im);
        X.push_back(cov.ln_d_jk);
        X.push_back(cov.ln_d_jm);
      }
    }
    const int n = static_cast<int>(y.size());
    if (n == 0) continue;  // no parametric edges in this tree
    if (n < k)
      throw numeric_error("start_values: " + std::to_string(n) + " tree-" + std::to_string(tree) +
                          " edges cannot identify " + std::to_string(k) +
                          " link coefficients (the spatial mode needs at least 6 stations)");
    const std::vector<double> b = ols(X, n, k, y);
    for (int j = 0; j < k; ++j) {
      if (tree == 1) beta.beta1[j] = b[j];
      else if (tree == 2) beta.beta2[j] = b[j];
      else beta.beta3[j] = b[j];
    }
  }

  // nu regression over Student-t edges only.
  std::vector<double> Xn, yn;
  for (size_t i = 0; i < col.slots.size(); ++i) {
    const Slot& slot = col.slots[i];
    if (slot.family.kind != FamilyKind::student_t) continue;
    yn.push_back(std::log(fitted.slot_params[i].nu));
    Xn.push_back(1.0);
    Xn.push_back(static_cast<double>(slot.tree));
    Xn.push_back(slot.covariates.ln_d_ij);
  }
  if (yn.empty()) {
    beta.beta_nu = {std::log(10.0), 0.0, 0.0};  // no t edges; inert default
  } else {
    try {
      const std::vector<double> b = ols(Xn, static_cast<int>(yn.size()), 3, yn);
      beta.beta_nu = {b[0], b[1], b[2]};
    } catch (const numeric_error&) {
      double m = 0.0;
      for (double v : yn) m += v;
      beta.beta_nu = {m / yn.size(), 0.0, 0.0};
    }
  }
  return beta;
}

SlcvclFit fit_slcvcl(const VineCollection& col, const Matrix& copula_data,
                     const SpatialParam& start, const SlcvclOptions& opts) {
  // Active coordinates: a tree block is active when the tree has parametric
  // edges; the nu block when any Student-t edge exists.
  std::array<bool, 3> tree_active = {false, false, false};
  bool nu_active = false;
  for (const Slot& slot : col.slots) {
    if (slot.family.kind != FamilyKind::independence) tree_active[slot.tree - 1] = true;
    if (slot.family.kind == FamilyKind::student_t) nu_active = true;
  }
  std::vector<int> active;
  for (int i = 0; i < SpatialParam::kDim; ++i) {
    const int tree = i < 3 ? 1 : (i < 7 ? 2 : (i < 13 ? 3 : 0));
    if (tree == 0 ? nu_active : tree_active[tree - 1]) active.push_back(i);
  }

  CompositeEvaluator eval(col, copula_data);
  auto cll_at = [&](const SpatialParam& b) {
    return eval.loglik(spatial_slot_params(col, b, nullptr));
  };

  SlcvclFit fit;
  fit.start = start;
  fit.beta = start;
  fit.start_cll = cll_at(start);

  auto expand = [&](const std::vector<double>& x) {
    SpatialParam b = start;
    for (size_t j = 0; j < active.size(); ++j) b.set(active[j], x[j]);
    return b;
  };
  auto objective = [&](const std::vector<double>& x) { return -cll_at(expand(x)); };
  auto gradient = [&](const std::vector<double>& x) {
    std::vector<double> g(x.size());
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < static_cast<int>(x.size()); ++j) {
      std::vector<double> xp = x;
      xp[j] = x[j] + opts.fd_step;
      const double up = -cll_at(expand(xp));
      xp[j] = x[j] - opts.fd_step;
      const double dn = -cll_at(expand(xp));
      g[j] = (up - dn) / (2.0 * opts.fd_step);
    }
    return g;
  };

  std::vector<double> x0(active.size());
  for (size_t j = 0; j < active.size(); ++j) x0[j] = start.get(active[j]);

  LbfgsOptions lopts;
  lopts.max_iter = opts.max_iter;
  lopts.rel_ftol = opts.rel_ftol;
  const LbfgsResult r = lbfgs_min(objective, gradient, x0, lopts);

  fit.beta = expand(r.x);
  fit.cll = -r.fmin;
  fit.converged = r.converged;
  fit.iterations = r.iterations;
  spatial_slot_params(col, fit.beta, &fit.clamps);  // clamp diagnostics at the optimum
  return fit;
}

}  // namespace spatvine
