#include "spatvine/bicop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "spatvine/optim.hpp"
#include "spatvine/stats.hpp"
#include "spatvine/util.hpp"

namespace spatvine {

namespace {

constexpr double kClampEps = 1e-10;
constexpr double kThetaCapGauss = 0.9999;

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// ---- base (unrotated, exchangeable) family primitives ----
// h2 is dC/dv, i.e. the conditional CDF of the first argument given the
// second. Rotations are layered on top of these.

// log(e^a + e^b - 1) for a, b >= 0 without overflow.
inline double log_sum_m1(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

// --- Gaussian ---
double gauss_logpdf(double u, double v, double th) {
  const double x = norm_quantile(u), y = norm_quantile(v);
  const double r2 = 1.0 - th * th;
  return -0.5 * std::log(r2) - (th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * r2);
}
double gauss_cdf(double u, double v, double th) {
  return bvn_cdf(norm_quantile(u), norm_quantile(v), th);
}
double gauss_h2(double u, double v, double th) {
  const double x = norm_quantile(u), y = norm_quantile(v);
  return norm_cdf((x - th * y) / std::sqrt(1.0 - th * th));
}
double gauss_hinv2(double w, double v, double th) {
  const double y = norm_quantile(v);
  const double x = norm_quantile(w) * std::sqrt(1.0 - th * th) + th * y;
  return norm_cdf(x);
}

// --- Student t ---
double t_logpdf(double u, double v, double th, double nu) {
  const double x = student_t_quantile(u, nu), y = student_t_quantile(v, nu);
  const double r2 = 1.0 - th * th;
  const double q = (x * x - 2.0 * th * x * y + y * y) / r2;
  thread_local double cnu = -1.0, cnorm = 0.0;
  if (nu != cnu) {
    cnu = nu;
    cnorm = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
            2.0 * std::lgamma(0.5 * (nu + 1.0));
  }
  return cnorm - 0.5 * std::log(r2) - 0.5 * (nu + 2.0) * std::log1p(q / nu) +
         0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}
double t_h2(double u, double v, double th, double nu) {
  const double x = student_t_quantile(u, nu), y = student_t_quantile(v, nu);
  const double s = std::sqrt((nu + y * y) * (1.0 - th * th) / (nu + 1.0));
  return student_t_cdf((x - th * y) / s, nu + 1.0);
}
double t_hinv2(double w, double v, double th, double nu) {
  const double y = student_t_quantile(v, nu);
  const double s = std::sqrt((nu + y * y) * (1.0 - th * th) / (nu + 1.0));
  const double x = student_t_quantile(w, nu + 1.0) * s + th * y;
  return student_t_cdf(x, nu);
}
double t_cdf(double u, double v, double th, double nu) {
  // C(u, v) = Int_0^v P(U <= u | V = w) dw
  return adaptive_simpson(
      [&](double w) { return t_h2(u, clamp_unit(w, kClampEps), th, nu); }, 0.0, v, 1e-11, 44);
}

// --- Clayton (theta > 0) ---
double clayton_logpdf(double u, double v, double th) {
  const double lu = std::log(u), lv = std::log(v);
  const double s = log_sum_m1(-th * lu, -th * lv);
  return std::log1p(th) - (th + 1.0) * (lu + lv) - (2.0 + 1.0 / th) * s;
}
double clayton_cdf(double u, double v, double th) {
  return std::exp(-log_sum_m1(-th * std::log(u), -th * std::log(v)) / th);
}
double clayton_h2(double u, double v, double th) {
  const double lu = std::log(u), lv = std::log(v);
  const double s = log_sum_m1(-th * lu, -th * lv);
  return std::exp(-(th + 1.0) * lv - (1.0 + 1.0 / th) * s);
}
double clayton_hinv2(double w, double v, double th) {
  const double b = -th * std::log(v);
  const double c = -th / (th + 1.0) * std::log(w);
  const double l = b + std::log(std::expm1(c));
  const double inner_log = l > 35.0 ? l : std::log1p(std::exp(l));
  return std::exp(-inner_log / th);
}

// --- Gumbel (theta >= 1) ---
double gumbel_logpdf(double u, double v, double th) {
  const double xt = -std::log(u), yt = -std::log(v);
  const double lx = std::log(xt), ly = std::log(yt);
  const double m = th * std::max(lx, ly);
  const double slog = m + std::log(std::exp(th * lx - m) + std::exp(th * ly - m));
  const double ln_a = slog / th;
  const double a = std::exp(ln_a);
  return -a + xt + yt + (th - 1.0) * (lx + ly) + (1.0 - 2.0 * th) * ln_a +
         std::log(a + th - 1.0);
}
double gumbel_cdf(double u, double v, double th) {
  const double lx = std::log(-std::log(u)), ly = std::log(-std::log(v));
  const double m = th * std::max(lx, ly);
  const double slog = m + std::log(std::exp(th * lx - m) + std::exp(th * ly - m));
  return std::exp(-std::exp(slog / th));
}
double gumbel_h2(double u, double v, double th) {
  const double yt = -std::log(v);
  const double lx = std::log(-std::log(u)), ly = std::log(yt);
  const double m = th * std::max(lx, ly);
  const double slog = m + std::log(std::exp(th * lx - m) + std::exp(th * ly - m));
  const double ln_a = slog / th;
  return std::exp(-std::exp(ln_a) + (th - 1.0) * (ly - ln_a) + yt);
}

// --- Frank (theta != 0) ---
double frank_logpdf(double u, double v, double th) {
  if (std::fabs(th) < 1e-10) return 0.0;
  const double g1 = std::expm1(-th);
  const double e = g1 + std::expm1(-th * u) * std::expm1(-th * v);
  return std::log(-th * g1) - th * (u + v) - 2.0 * std::log(std::fabs(e));
}
double frank_cdf(double u, double v, double th) {
  if (std::fabs(th) < 1e-10) return u * v;
  return -std::log1p(std::expm1(-th * u) * std::expm1(-th * v) / std::expm1(-th)) / th;
}
double frank_h2(double u, double v, double th) {
  if (std::fabs(th) < 1e-10) return u;
  const double e = std::expm1(-th) + std::expm1(-th * u) * std::expm1(-th * v);
  return std::exp(-th * v) * std::expm1(-th * u) / e;
}
double frank_hinv2(double w, double v, double th) {
  if (std::fabs(th) < 1e-10) return w;
  const double denom = std::exp(-th * v) - w * std::expm1(-th * v);
  return -std::log1p(w * std::expm1(-th) / denom) / th;
}

// Monotone solve of h2(u, v) = w in u. Newton accelerated, with a forced
// bisection every third step so the bracket provably collapses.
template <typename H, typename Pdf>
double solve_hinv2(const H& h2, const Pdf& pdf, double w, double v) {
  double lo = 1e-14, hi = 1.0 - 1e-14;
  double u = std::clamp(w, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double f = h2(u, v) - w;
    if (f > 0.0) hi = u; else lo = u;
    if (hi - lo < 1e-16) break;
    double un = 0.5 * (lo + hi);
    if (it % 3 != 2) {
      const double d = pdf(u, v);
      if (d > 1e-300 && std::isfinite(d)) {
        const double newton = u - f / d;
        if (newton > lo && newton < hi) un = newton;
      }
    }
    u = un;
  }
  return 0.5 * (lo + hi);
}

struct BaseOps {
  double (*logpdf)(double, double, double, double);
  double (*cdf)(double, double, double, double);
  double (*h2)(double, double, double, double);
  double (*hinv2)(double, double, double, double);
};

double gum_hinv2(double w, double v, double th) {
  return solve_hinv2([th](double uu, double vv) { return gumbel_h2(uu, vv, th); },
                     [th](double uu, double vv) { return std::exp(gumbel_logpdf(uu, vv, th)); },
                     w, v);
}

BaseOps base_ops(FamilyKind k) {
  switch (k) {
    case FamilyKind::independence:
      return {[](double, double, double, double) { return 0.0; },
              [](double u, double v, double, double) { return u * v; },
              [](double u, double, double, double) { return u; },
              [](double w, double, double, double) { return w; }};
    case FamilyKind::gaussian:
      return {[](double u, double v, double th, double) { return gauss_logpdf(u, v, th); },
              [](double u, double v, double th, double) { return gauss_cdf(u, v, th); },
              [](double u, double v, double th, double) { return gauss_h2(u, v, th); },
              [](double w, double v, double th, double) { return gauss_hinv2(w, v, th); }};
    case FamilyKind::student_t:
      return {t_logpdf, t_cdf, t_h2, t_hinv2};
    case FamilyKind::clayton:
      return {[](double u, double v, double th, double) { return clayton_logpdf(u, v, th); },
              [](double u, double v, double th, double) { return clayton_cdf(u, v, th); },
              [](double u, double v, double th, double) { return clayton_h2(u, v, th); },
              [](double w, double v, double th, double) { return clayton_hinv2(w, v, th); }};
    case FamilyKind::gumbel:
      return {[](double u, double v, double th, double) { return gumbel_logpdf(u, v, th); },
              [](double u, double v, double th, double) { return gumbel_cdf(u, v, th); },
              [](double u, double v, double th, double) { return gumbel_h2(u, v, th); },
              [](double w, double v, double th, double) { return gum_hinv2(w, v, th); }};
    case FamilyKind::frank:
      return {[](double u, double v, double th, double) { return frank_logpdf(u, v, th); },
              [](double u, double v, double th, double) { return frank_cdf(u, v, th); },
              [](double u, double v, double th, double) { return frank_h2(u, v, th); },
              [](double w, double v, double th, double) { return frank_hinv2(w, v, th); }};
  }
  throw numeric_error("unknown family");
}

}  // namespace

std::string family_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::independence: return "independence";
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::student_t: return "studentt";
    case FamilyKind::clayton: return "clayton";
    case FamilyKind::gumbel: return "gumbel";
    case FamilyKind::frank: return "frank";
  }
  return "?";
}

FamilyKind family_from_name(const std::string& name) {
  if (name == "independence" || name == "indep") return FamilyKind::independence;
  if (name == "gaussian" || name == "normal") return FamilyKind::gaussian;
  if (name == "studentt" || name == "t" || name == "student") return FamilyKind::student_t;
  if (name == "clayton") return FamilyKind::clayton;
  if (name == "gumbel") return FamilyKind::gumbel;
  if (name == "frank") return FamilyKind::frank;
  throw input_error("unknown copula family: " + name);
}

ParamRange param_range(FamilyKind k) {
  switch (k) {
    case FamilyKind::independence: return {0.0, 0.0, 0.0, 0.0};
    case FamilyKind::gaussian: return {-kThetaCapGauss, kThetaCapGauss, 0.0, 0.0};
    case FamilyKind::student_t: return {-kThetaCapGauss, kThetaCapGauss, 2.0, 100.0};
    case FamilyKind::clayton: return {1e-8, 28.0, 0.0, 0.0};
    case FamilyKind::gumbel: return {1.0, 17.0, 0.0, 0.0};
    case FamilyKind::frank: return {-35.0, 35.0, 0.0, 0.0};
  }
  return {0, 0, 0, 0};
}

int param_count(FamilyKind k) {
  switch (k) {
    case FamilyKind::independence: return 0;
    case FamilyKind::student_t: return 2;
    default: return 1;
  }
}

void validate_params(const PairCopula& c) {
  const FamilyKind k = c.family.kind;
  const int rot = c.family.rotation;
  if (rot != 0 && rot != 90 && rot != 180 && rot != 270)
    throw input_error("invalid rotation " + std::to_string(rot));
  if (rot != 0 && k != FamilyKind::clayton && k != FamilyKind::gumbel)
    throw input_error("rotation only defined for clayton/gumbel");
  const ParamRange r = param_range(k);
  switch (k) {
    case FamilyKind::independence:
      return;
    case FamilyKind::gaussian:
      if (!(c.theta > -1.0 && c.theta < 1.0))
        throw input_error("gaussian theta outside (-1,1)");
      return;
    case FamilyKind::student_t:
      if (!(c.theta > -1.0 && c.theta < 1.0))
        throw input_error("student_t theta outside (-1,1)");
      if (!(c.nu > r.nu_min && c.nu <= r.nu_max))
        throw input_error("student_t nu outside (2,100]");
      return;
    case FamilyKind::clayton:
      if (!(c.theta > 0.0 && c.theta <= r.theta_max))
        throw input_error("clayton theta outside (0,28]");
      return;
    case FamilyKind::gumbel:
      if (!(c.theta >= 1.0 && c.theta <= r.theta_max))
        throw input_error("gumbel theta outside [1,17]");
      return;
    case FamilyKind::frank:
      if (!(c.theta != 0.0 && std::fabs(c.theta) <= r.theta_max))
        throw input_error("frank theta outside [-35,35] \\ {0}");
      return;
  }
}

// Rotation layer. Convention: 90 degrees flips the first argument,
// 270 the second, 180 both; 90/270 negate Kendall's tau.
double bicop_logpdf(const PairCopula& c, double u, double v) {
  validate_params(c);
  u = clamp_unit(u, kClampEps);
  v = clamp_unit(v, kClampEps);
  const BaseOps ops = base_ops(c.family.kind);
  switch (c.family.rotation) {
    case 0: return ops.logpdf(u, v, c.theta, c.nu);
    case 90: return ops.logpdf(1.0 - u, v, c.theta, c.nu);
    case 180: return ops.logpdf(1.0 - u, 1.0 - v, c.theta, c.nu);
    default: return ops.logpdf(u, 1.0 - v, c.theta, c.nu);
  }
}

double bicop_pdf(const PairCopula& c, double u, double v) {
  return std::exp(bicop_logpdf(c, u, v));
}

double bicop_cdf(const PairCopula& c, double u, double v) {
  validate_params(c);
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0 && v >= 1.0) return 1.0;
  if (u >= 1.0) return v;
  if (v >= 1.0) return u;
  const BaseOps ops = base_ops(c.family.kind);
  switch (c.family.rotation) {
    case 0: return ops.cdf(u, v, c.theta, c.nu);
    case 90: return v - ops.cdf(1.0 - u, v, c.theta, c.nu);
    case 180: return u + v - 1.0 + ops.cdf(1.0 - u, 1.0 - v, c.theta, c.nu);
    default: return u - ops.cdf(u, 1.0 - v, c.theta, c.nu);
  }
}

double bicop_hfunc2(const PairCopula& c, double u, double v) {
  validate_params(c);
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  u = clamp_unit(u, kClampEps);
  v = clamp_unit(v, kClampEps);
  const BaseOps ops = base_ops(c.family.kind);
  switch (c.family.rotation) {
    case 0: return ops.h2(u, v, c.theta, c.nu);
    case 90: return 1.0 - ops.h2(1.0 - u, v, c.theta, c.nu);
    case 180: return 1.0 - ops.h2(1.0 - u, 1.0 - v, c.theta, c.nu);
    default: return ops.h2(u, 1.0 - v, c.theta, c.nu);
  }
}

double bicop_hfunc1(const PairCopula& c, double u, double v) {
  validate_params(c);
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  u = clamp_unit(u, kClampEps);
  v = clamp_unit(v, kClampEps);
  const BaseOps ops = base_ops(c.family.kind);
  // Exchangeable base: dC0/du at (a,b) equals h2(b, a).
  switch (c.family.rotation) {
    case 0: return ops.h2(v, u, c.theta, c.nu);
    case 90: return ops.h2(v, 1.0 - u, c.theta, c.nu);
    case 180: return 1.0 - ops.h2(1.0 - v, 1.0 - u, c.theta, c.nu);
    default: return 1.0 - ops.h2(1.0 - v, u, c.theta, c.nu);
  }
}

double bicop_hinv2(const PairCopula& c, double w, double v) {
  validate_params(c);
  w = clamp_unit(w, kClampEps);
  v = clamp_unit(v, kClampEps);
  const BaseOps ops = base_ops(c.family.kind);
  switch (c.family.rotation) {
    case 0: return ops.hinv2(w, v, c.theta, c.nu);
    case 90: return 1.0 - ops.hinv2(1.0 - w, v, c.theta, c.nu);
    case 180: return 1.0 - ops.hinv2(1.0 - w, 1.0 - v, c.theta, c.nu);
    default: return ops.hinv2(w, 1.0 - v, c.theta, c.nu);
  }
}

double bicop_hinv1(const PairCopula& c, double u, double w) {
  validate_params(c);
  u = clamp_unit(u, kClampEps);
  w = clamp_unit(w, kClampEps);
  const BaseOps ops = base_ops(c.family.kind);
  switch (c.family.rotation) {
    case 0: return ops.hinv2(w, u, c.theta, c.nu);
    case 90: return ops.hinv2(w, 1.0 - u, c.theta, c.nu);
    case 180: return 1.0 - ops.hinv2(1.0 - w, 1.0 - u, c.theta, c.nu);
    default: return 1.0 - ops.hinv2(1.0 - w, u, c.theta, c.nu);
  }
}

double tau_from_theta(const Family& f, double theta) {
  const bool neg = (f.rotation == 90 || f.rotation == 270);
  switch (f.kind) {
    case FamilyKind::independence:
      return 0.0;
    case FamilyKind::gaussian:
    case FamilyKind::student_t:
      return 2.0 / std::numbers::pi_v<double> * std::asin(theta);
    case FamilyKind::clayton: {
      const double t = theta / (theta + 2.0);
      return neg ? -t : t;
    }
    case FamilyKind::gumbel: {
      const double t = 1.0 - 1.0 / theta;
      return neg ? -t : t;
    }
    case FamilyKind::frank: {
      if (std::fabs(theta) < 1e-6) return theta / 9.0;
      return 1.0 - 4.0 / theta * (1.0 - debye1(theta));
    }
  }
  return 0.0;
}

double theta_from_tau(const Family& f, double tau, ClampStats* stats) {
  const bool neg = (f.rotation == 90 || f.rotation == 270);
  auto clamp_count = [&](double x, double lo, double hi) {
    if (x < lo || x > hi) {
      if (stats) ++stats->tau_clamps;
      return std::clamp(x, lo, hi);
    }
    return x;
  };
  switch (f.kind) {
    case FamilyKind::independence:
      return 0.0;
    case FamilyKind::gaussian:
    case FamilyKind::student_t: {
      const double tmax = 2.0 / std::numbers::pi_v<double> * std::asin(kThetaCapGauss);
      tau = clamp_count(tau, -tmax, tmax);
      return std::sin(std::numbers::pi_v<double> * tau / 2.0);
    }
    case FamilyKind::clayton: {
      double t = neg ? -tau : tau;
      t = clamp_count(t, 0.001, 0.95);
      return std::min(2.0 * t / (1.0 - t), param_range(f.kind).theta_max);
    }
    case FamilyKind::gumbel: {
      double t = neg ? -tau : tau;
      t = clamp_count(t, 0.001, 0.95);
      return std::min(1.0 / (1.0 - t), param_range(f.kind).theta_max);
    }
    case FamilyKind::frank: {
      const Family base{FamilyKind::frank, 0};
      const double tmax = tau_from_theta(base, 35.0) - 1e-9;
      tau = clamp_count(tau, -tmax, tmax);
      if (std::fabs(tau) < 1e-10) return 1e-8;
      // Bisection; tau(theta) is increasing.
      double lo = tau > 0 ? 1e-8 : -35.0;
      double hi = tau > 0 ? 35.0 : -1e-8;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tau_from_theta(base, mid) < tau) lo = mid; else hi = mid;
        if (hi - lo < 1e-10) break;
      }
      return 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

double fisher_z(double r) {
  if (!(r > -1.0 && r < 1.0)) throw input_error("fisher_z: |r| must be < 1");
  return 0.5 * std::log((1.0 + r) / (1.0 - r));
}

double fisher_z_inv(double xi) { return std::tanh(xi); }

double pair_loglik(const PairCopula& c, std::span<const double> u, std::span<const double> v) {
  double ll = 0.0;
  for (size_t i = 0; i < u.size(); ++i) ll += bicop_logpdf(c, u[i], v[i]);
  return ll;
}

// ---- fitting ----

namespace {

// Per-family likelihoods on pre-rotated, clamped data with cached transforms.
struct FitData {
  std::vector<double> u, v;  // rotation applied
};

FitData rotate_data(std::span<const double> u, std::span<const double> v, int rotation) {
  FitData d;
  const size_t n = u.size();
  d.u.resize(n);
  d.v.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double uu = clamp_unit(u[i], kClampEps), vv = clamp_unit(v[i], kClampEps);
    switch (rotation) {
      case 90: uu = 1.0 - uu; break;
      case 180: uu = 1.0 - uu; vv = 1.0 - vv; break;
      case 270: vv = 1.0 - vv; break;
      default: break;
    }
    d.u[i] = uu;
    d.v[i] = vv;
  }
  return d;
}

struct FamilyFit {
  double theta = 0.0, nu = 0.0, loglik = 0.0;
  bool converged = true;
};

FamilyFit fit_gaussian(const FitData& d) {
  const size_t n = d.u.size();
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double x = norm_quantile(d.u[i]), y = norm_quantile(d.v[i]);
    sxx += x * x + y * y;
    sxy += x * y;
  }
  auto ll = [&](double th) {
    const double r2 = 1.0 - th * th;
    return -0.5 * n * std::log(r2) - (th * th * sxx - 2.0 * th * sxy) / (2.0 * r2);
  };
  const double th = golden_section_max(ll, -kThetaCapGauss, kThetaCapGauss, 1e-9);
  return {th, 0.0, ll(th), true};
}

FamilyFit fit_clayton(const FitData& d) {
  std::vector<double> lu(d.u.size()), lv(d.u.size());
  for (size_t i = 0; i < d.u.size(); ++i) {
    lu[i] = std::log(d.u[i]);
    lv[i] = std::log(d.v[i]);
  }
  auto ll = [&](double th) {
    double s = 0.0;
    for (size_t i = 0; i < lu.size(); ++i)
      s += std::log1p(th) - (th + 1.0) * (lu[i] + lv[i]) -
           (2.0 + 1.0 / th) * log_sum_m1(-th * lu[i], -th * lv[i]);
    return s;
  };
  const double th = golden_section_max(ll, 1e-4, 28.0, 1e-7);
  return {th, 0.0, ll(th), true};
}

FamilyFit fit_gumbel(const FitData& d) {
  std::vector<double> xt(d.u.size()), yt(d.u.size()), lx(d.u.size()), ly(d.u.size());
  for (size_t i = 0; i < d.u.size(); ++i) {
    xt[i] = -std::log(d.u[i]);
    yt[i] = -std::log(d.v[i]);
    lx[i] = std::log(xt[i]);
    ly[i] = std::log(yt[i]);
  }
  auto ll = [&](double th) {
    double s = 0.0;
    for (size_t i = 0; i < xt.size(); ++i) {
      const double m = th * std::max(lx[i], ly[i]);
      const double slog = m + std::log(std::exp(th * lx[i] - m) + std::exp(th * ly[i] - m));
      const double ln_a = slog / th;
      const double a = std::exp(ln_a);
      s += -a + xt[i] + yt[i] + (th - 1.0) * (lx[i] + ly[i]) + (1.0 - 2.0 * th) * ln_a +
           std::log(a + th - 1.0);
    }
    return s;
  };
  const double th = golden_section_max(ll, 1.0 + 1e-9, 17.0, 1e-7);
  return {th, 0.0, ll(th), true};
}

FamilyFit fit_frank(const FitData& d, double tau_hat) {
  auto ll = [&](double th) {
    double s = 0.0;
    for (size_t i = 0; i < d.u.size(); ++i) s += frank_logpdf(d.u[i], d.v[i], th);
    return s;
  };
  const double lo = tau_hat >= 0.0 ? 1e-4 : -35.0;
  const double hi = tau_hat >= 0.0 ? 35.0 : -1e-4;
  const double th = golden_section_max(ll, lo, hi, 1e-7);
  return {th, 0.0, ll(th), true};
}

FamilyFit fit_student_t(const FitData& d, double tau_hat) {
  auto ll = [&](double th, double nu) {
    double s = 0.0;
    for (size_t i = 0; i < d.u.size(); ++i) s += t_logpdf(d.u[i], d.v[i], th, nu);
    return s;
  };
  const double th0 = std::clamp(std::sin(std::numbers::pi_v<double> * tau_hat / 2.0), -0.99, 0.99);
  const std::vector<double> x0 = {std::atanh(th0 / kThetaCapGauss), logit(6.0 / 98.0)};
  auto obj = [&](const std::vector<double>& z) {
    const double th = kThetaCapGauss * std::tanh(z[0]);
    const double nu = 2.0 + 98.0 * sigmoid(z[1]);
    return -ll(th, nu);
  };
  const NelderMeadResult r = nelder_mead_min(obj, x0, 0.5, 1e-9, 400);
  FamilyFit f;
  f.theta = kThetaCapGauss * std::tanh(r.x[0]);
  f.nu = 2.0 + 98.0 * sigmoid(r.x[1]);
  f.loglik = -r.fmin;
  f.converged = r.converged;
  return f;
}

}  // namespace

PairFit fit_pair(std::span<const double> u, std::span<const double> v,
                 const std::vector<FamilyKind>& allowed) {
  if (u.size() != v.size()) throw input_error("fit_pair: length mismatch");
  if (u.size() < 20) throw input_error("fit_pair: need at least 20 observations");
  for (size_t i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0 && u[i] < 1.0 && v[i] > 0.0 && v[i] < 1.0))
      throw input_error("fit_pair: data must lie strictly inside (0,1)");

  std::vector<FamilyKind> fams = allowed;
  std::sort(fams.begin(), fams.end());
  fams.erase(std::unique(fams.begin(), fams.end()), fams.end());
  if (fams.empty()) throw input_error("fit_pair: empty family set");

  const double tau_hat = kendall_tau(u, v);
  const FitData d0 = rotate_data(u, v, 0);

  PairFit best;
  bool have = false;
  for (FamilyKind k : fams) {
    std::vector<int> rotations = {0};
    if (k == FamilyKind::clayton || k == FamilyKind::gumbel)
      rotations = tau_hat >= 0.0 ? std::vector<int>{0, 180} : std::vector<int>{90, 270};
    for (int rot : rotations) {
      FamilyFit ff;
      const FitData d = rot == 0 ? FitData{} : rotate_data(u, v, rot);
      const FitData& dd = rot == 0 ? d0 : d;
      switch (k) {
        case FamilyKind::independence: ff = {0.0, 0.0, 0.0, true}; break;
        case FamilyKind::gaussian: ff = fit_gaussian(dd); break;
        case FamilyKind::student_t: ff = fit_student_t(dd, tau_hat); break;
        case FamilyKind::clayton: ff = fit_clayton(dd); break;
        case FamilyKind::gumbel: ff = fit_gumbel(dd); break;
        case FamilyKind::frank: ff = fit_frank(dd, tau_hat); break;
      }
      if (!ff.converged || !std::isfinite(ff.loglik)) {
        std::fprintf(stderr, "warning: %s (rotation %d) fit did not converge; family skipped\n",
                     family_name(k).c_str(), rot);
        continue;
      }
      const int np = param_count(k);
      const double aic = -2.0 * ff.loglik + 2.0 * np;
      if (!have || aic < best.aic) {
        best.copula = PairCopula{Family{k, rot}, ff.theta, ff.nu};
        best.loglik = ff.loglik;
        best.aic = aic;
        best.n_params = np;
        best.converged = true;
        have = true;
      }
    }
  }
  if (!have) throw numeric_error("fit_pair: no family converged");
  return best;
}

}  // namespace spatvine
