#include "spatvine/lcvcl.hpp"

#include <algorithm>
#include <cmath>

#include "spatvine/optim.hpp"
#include "spatvine/stats.hpp"

namespace spatvine {

namespace {

constexpr double kThetaCapGauss = 0.9999;

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double checked(double lp, const EdgeSpec& e) {
  if (!std::isfinite(lp))
    throw numeric_error("non-finite pair log-density at edge {" + std::to_string(e.var_i + 1) +
                        "," + std::to_string(e.var_j + 1) + "} tree " + std::to_string(e.tree));
  return lp;
}

}  // namespace

double vine_loglik(const CVineSpec& spec, std::span<const PairCopula> slot_params,
                   std::span<const double, 4> u4) {
  const double us = clamp_unit(u4[0]);
  const double uo[3] = {clamp_unit(u4[1]), clamp_unit(u4[2]), clamp_unit(u4[3])};
  double ll = 0.0;
  double cond1[3];
  for (int e = 0; e < 3; ++e) {
    const EdgeSpec& edge = spec.edges[e];
    const PairView view{&slot_params[edge.slot], edge.swapped};
    ll += checked(view.logpdf(us, uo[e]), edge);
    cond1[e] = clamp_unit(view.hfunc1(us, uo[e]));
  }
  double cond2[2];
  for (int e = 3; e <= 4; ++e) {
    const EdgeSpec& edge = spec.edges[e];
    const PairView view{&slot_params[edge.slot], edge.swapped};
    ll += checked(view.logpdf(cond1[0], cond1[e - 2]), edge);
    cond2[e - 3] = clamp_unit(view.hfunc1(cond1[0], cond1[e - 2]));
  }
  const EdgeSpec& edge3 = spec.edges[5];
  const PairView view{&slot_params[edge3.slot], edge3.swapped};
  ll += checked(view.logpdf(cond2[0], cond2[1]), edge3);
  return ll;
}

// ---- evaluator ----

struct CompositeEvaluator::Impl {
  const VineCollection& col;
  const Matrix& u;
  Matrix z;          // norm_quantile(u), filled lazily for the Gaussian path
  bool z_ready = false;
  double z_cap = 0.0;

  // The quantile transform is precomputed eagerly: it is cheap relative to
  // any fit and keeps the evaluator safe to call from parallel regions.
  Impl(const VineCollection& c, const Matrix& data) : col(c), u(data) {
    z_cap = norm_quantile(1.0 - 1e-10);
    z = Matrix(u.rows(), u.cols());
#pragma omp parallel for schedule(static)
    for (int t = 0; t < u.rows(); ++t)
      for (int s = 0; s < u.cols(); ++s) z(t, s) = norm_quantile(clamp_unit(u(t, s)));
    z_ready = true;
  }

  static bool gaussian_only(std::span<const PairCopula> params) {
    return std::all_of(params.begin(), params.end(), [](const PairCopula& c) {
      return c.family.kind == FamilyKind::gaussian || c.family.kind == FamilyKind::independence;
    });
  }

  // z-scale Gaussian vine evaluation; analytically identical to the generic
  // path (conditional quantiles computed directly instead of via Phi).
  double vine_series_gauss(int s, std::span<const PairCopula> params) const {
    const CVineSpec& spec = col.vines[s];
    const int n = u.rows();
    std::vector<double> buf(n);
    double theta[6];
    bool indep[6];
    for (int e = 0; e < 6; ++e) {
      const PairCopula& c = params[spec.edges[e].slot];
      indep[e] = c.family.kind == FamilyKind::independence;
      theta[e] = indep[e] ? 0.0 : c.theta;
    }
    auto lpdf = [](double x, double y, double th) {
      const double r2 = 1.0 - th * th;
      return -0.5 * std::log(r2) - (th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * r2);
    };
    auto zcond = [this](double x, double y, double th) {
      return std::clamp((x - th * y) / std::sqrt(1.0 - th * th), -z_cap, z_cap);
    };
    for (int t = 0; t < n; ++t) {
      const double zs = z(t, spec.roots[0]);
      const double zo[3] = {z(t, spec.roots[1]), z(t, spec.roots[2]), z(t, spec.roots[3])};
      double ll = 0.0, c1[3];
      for (int e = 0; e < 3; ++e) {
        if (indep[e]) {
          c1[e] = zo[e];
        } else {
          ll += lpdf(zs, zo[e], theta[e]);
          c1[e] = zcond(zo[e], zs, theta[e]);
        }
      }
      double c2[2];
      for (int e = 3; e <= 4; ++e) {
        if (indep[e]) {
          c2[e - 3] = c1[e - 2];
        } else {
          ll += lpdf(c1[0], c1[e - 2], theta[e]);
          c2[e - 3] = zcond(c1[e - 2], c1[0], theta[e]);
        }
      }
      if (!indep[5]) ll += lpdf(c2[0], c2[1], theta[5]);
      buf[t] = ll;
    }
    return pairwise_sum(buf);
  }

  double vine_series_generic(int s, std::span<const PairCopula> params) const {
    const CVineSpec& spec = col.vines[s];
    const int n = u.rows();
    std::vector<double> buf(n);
    for (int t = 0; t < n; ++t) {
      const double u4[4] = {u(t, spec.roots[0]), u(t, spec.roots[1]), u(t, spec.roots[2]),
                            u(t, spec.roots[3])};
      buf[t] = vine_loglik(spec, params, std::span<const double, 4>(u4, 4));
    }
    return pairwise_sum(buf);
  }
};

CompositeEvaluator::CompositeEvaluator(const VineCollection& col, const Matrix& copula_data)
    : impl_(std::make_unique<Impl>(col, copula_data)) {}

CompositeEvaluator::~CompositeEvaluator() = default;

double CompositeEvaluator::vine_series(int s, std::span<const PairCopula> slot_params) const {
  if (Impl::gaussian_only(slot_params)) return impl_->vine_series_gauss(s, slot_params);
  return impl_->vine_series_generic(s, slot_params);
}

double CompositeEvaluator::loglik(std::span<const PairCopula> slot_params) const {
  const int d = impl_->col.station_count();
  const bool gauss = Impl::gaussian_only(slot_params);
  std::vector<double> per_vine(d);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < d; ++s) {
    const double ls = gauss ? impl_->vine_series_gauss(s, slot_params)
                            : impl_->vine_series_generic(s, slot_params);
    per_vine[s] = impl_->col.weights[s] * ls;
  }
  return pairwise_sum(per_vine);
}

double composite_loglik(const VineCollection& col, std::span<const PairCopula> slot_params,
                        const Matrix& copula_data) {
  return CompositeEvaluator(col, copula_data).loglik(slot_params);
}

// Serial reference: expands each vine into six edge-local copulas and walks
// the pair-copula factorization directly, no slot views, no fast path.
double composite_loglik_reference(const VineCollection& col,
                                  std::span<const PairCopula> slot_params,
                                  const Matrix& copula_data) {
  const int d = col.station_count();
  const int n = copula_data.rows();
  std::vector<double> per_vine(d);
  std::vector<double> buf(n);
  for (int s = 0; s < d; ++s) {
    const CVineSpec& spec = col.vines[s];
    PairCopula local[6];
    for (int e = 0; e < 6; ++e) local[e] = slot_params[spec.edges[e].slot];
    for (int t = 0; t < n; ++t) {
      const double us = clamp_unit(copula_data(t, spec.roots[0]));
      const double uo[3] = {clamp_unit(copula_data(t, spec.roots[1])),
                            clamp_unit(copula_data(t, spec.roots[2])),
                            clamp_unit(copula_data(t, spec.roots[3]))};
      double ll = 0.0, c1[3];
      for (int e = 0; e < 3; ++e) {
        if (spec.edges[e].swapped) {
          ll += bicop_logpdf(local[e], uo[e], us);
          c1[e] = clamp_unit(bicop_hfunc2(local[e], uo[e], us));
        } else {
          ll += bicop_logpdf(local[e], us, uo[e]);
          c1[e] = clamp_unit(bicop_hfunc1(local[e], us, uo[e]));
        }
      }
      double c2[2];
      for (int e = 3; e <= 4; ++e) {
        ll += bicop_logpdf(local[e], c1[0], c1[e - 2]);
        c2[e - 3] = clamp_unit(bicop_hfunc1(local[e], c1[0], c1[e - 2]));
      }
      ll += bicop_logpdf(local[5], c2[0], c2[1]);
      buf[t] = ll;
    }
    per_vine[s] = col.weights[s] * pairwise_sum(buf);
  }
  return pairwise_sum(per_vine);
}

// ---- layout ----

ParamLayout ParamLayout::make(std::span<const PairCopula> slot_params) {
  ParamLayout layout;
  for (size_t i = 0; i < slot_params.size(); ++i) {
    const FamilyKind k = slot_params[i].family.kind;
    if (param_count(k) >= 1) {
      layout.entries_.push_back({static_cast<int>(i), false});
      layout.families_.push_back(slot_params[i].family);
    }
    if (param_count(k) == 2) {
      layout.entries_.push_back({static_cast<int>(i), true});
      layout.families_.push_back(slot_params[i].family);
    }
  }
  return layout;
}

std::vector<double> ParamLayout::pack(std::span<const PairCopula> slot_params) const {
  std::vector<double> x(entries_.size());
  for (size_t j = 0; j < entries_.size(); ++j) {
    const Entry& e = entries_[j];
    const PairCopula& c = slot_params[e.slot];
    if (e.is_nu) {
      const double nu = std::clamp(c.nu, 2.0 + 1e-8, 100.0 - 1e-8);
      x[j] = logit((nu - 2.0) / 98.0);
      continue;
    }
    switch (c.family.kind) {
      case FamilyKind::gaussian:
      case FamilyKind::student_t: {
        const double th = std::clamp(c.theta, -kThetaCapGauss + 1e-9, kThetaCapGauss - 1e-9);
        x[j] = std::atanh(th / kThetaCapGauss);
        break;
      }
      case FamilyKind::clayton: {
        const double th = std::clamp(c.theta, 1e-6, 28.0 - 1e-9);
        x[j] = logit(th / 28.0);
        break;
      }
      case FamilyKind::gumbel: {
        const double th = std::clamp(c.theta, 1.0 + 1e-9, 17.0 - 1e-9);
        x[j] = logit((th - 1.0) / 16.0);
        break;
      }
      case FamilyKind::frank: {
        double th = std::clamp(c.theta, -35.0 + 1e-9, 35.0 - 1e-9);
        if (std::fabs(th) < 1e-8) th = 1e-8;
        x[j] = std::atanh(th / 35.0);
        break;
      }
      default:
        x[j] = 0.0;
    }
  }
  return x;
}

void ParamLayout::unpack(std::span<const double> x, std::span<PairCopula> slot_params) const {
  for (size_t j = 0; j < entries_.size(); ++j) {
    const Entry& e = entries_[j];
    PairCopula& c = slot_params[e.slot];
    if (e.is_nu) {
      c.nu = 2.0 + 98.0 * sigmoid(x[j]);
      continue;
    }
    switch (c.family.kind) {
      case FamilyKind::gaussian:
      case FamilyKind::student_t:
        c.theta = kThetaCapGauss * std::tanh(x[j]);
        break;
      case FamilyKind::clayton:
        c.theta = std::max(1e-8, 28.0 * sigmoid(x[j]));
        break;
      case FamilyKind::gumbel:
        c.theta = 1.0 + 16.0 * sigmoid(x[j]);
        break;
      case FamilyKind::frank: {
        double th = 35.0 * std::tanh(x[j]);
        if (std::fabs(th) < 1e-8) th = 1e-8;
        c.theta = th;
        break;
      }
      default:
        break;
    }
  }
}

FittedLcvcl fit_lcvcl(const VineCollection& col, const Matrix& copula_data,
                      const SelectedFamilies& start, const LcvclOptions& opts) {
  FittedLcvcl fit;
  fit.slot_params = start.slot_params;
  fit.layout = ParamLayout::make(fit.slot_params);
  fit.n_free_params = fit.layout.size();

  CompositeEvaluator eval(col, copula_data);
  const std::vector<double> x0 = fit.layout.pack(fit.slot_params);
  fit.start_cll = eval.loglik(fit.slot_params);

  if (fit.layout.size() == 0) {  // all-independence model: nothing to optimize
    fit.cll = fit.start_cll;
    fit.converged = true;
    return fit;
  }

  auto objective = [&](const std::vector<double>& x) {
    std::vector<PairCopula> params = fit.slot_params;
    fit.layout.unpack(x, params);
    return -eval.loglik(params);
  };
  // Sparse central differences: an entry only touches the vines that contain
  // its slot's edge.
  auto gradient = [&](const std::vector<double>& x) {
    std::vector<PairCopula> base = fit.slot_params;
    fit.layout.unpack(x, base);
    const auto& entries = fit.layout.entries();
    std::vector<double> g(entries.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < static_cast<int>(entries.size()); ++j) {
      std::vector<PairCopula> params = base;
      std::vector<double> xp(x);
      const std::vector<int>& vines = col.slots[entries[j].slot].vines;
      xp[j] = x[j] + opts.fd_step;
      fit.layout.unpack(xp, params);
      double up = 0.0, dn = 0.0;
      for (int s : vines) up += col.weights[s] * eval.vine_series(s, params);
      xp[j] = x[j] - opts.fd_step;
      fit.layout.unpack(xp, params);
      for (int s : vines) dn += col.weights[s] * eval.vine_series(s, params);
      g[j] = -(up - dn) / (2.0 * opts.fd_step);
    }
    return g;
  };

  LbfgsOptions lopts;
  lopts.max_iter = opts.max_iter;
  lopts.rel_ftol = opts.rel_ftol;
  const LbfgsResult r = lbfgs_min(objective, gradient, x0, lopts);
  fit.layout.unpack(r.x, fit.slot_params);
  fit.cll = -r.fmin;
  fit.converged = r.converged;
  fit.iterations = r.iterations;
  return fit;
}

}  // namespace spatvine
