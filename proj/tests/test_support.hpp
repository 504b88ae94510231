// Shared helpers for the test suites: independent oracles kept away from the
// library implementation paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "spatvine/stats.hpp"
#include "spatvine/util.hpp"

namespace testsup {

// Standard normal CDF from erfc only.
inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Normal quantile by pure bisection on phi; independent of the library's
// rational approximation.
inline double phi_inv_bisect(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Kolmogorov-Smirnov statistic against U(0,1).
inline double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, std::fabs((i + 1) / n - u[i]));
    d = std::max(d, std::fabs(u[i] - i / n));
  }
  return d;
}

// Kolmogorov-Smirnov statistic of a sample against an arbitrary CDF.
inline double ks_cdf(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max(d, std::fabs((i + 1) / n - f));
    d = std::max(d, std::fabs(f - i / n));
  }
  return d;
}

// KS distance of a sample against the distribution with the given density on
// (0,1); the CDF is accumulated over the gaps between sorted sample points
// (composite Simpson per gap).
inline double ks_density(std::vector<double> x, const std::function<double(double)>& density) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  auto simpson = [&](double a, double b) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (density(a) + 4.0 * density(m) + density(b));
  };
  auto segment = [&](double a, double b) {
    // split each gap a few times; gaps between order statistics are tiny
    double s = 0.0;
    const int k = 4;
    for (int i = 0; i < k; ++i) s += simpson(a + (b - a) * i / k, a + (b - a) * (i + 1) / k);
    return s;
  };
  double cum = segment(1e-12, x[0]);
  double d = std::max(std::fabs(cum), std::fabs(cum - 1.0 / n));
  for (size_t i = 1; i < x.size(); ++i) {
    cum += segment(x[i - 1], x[i]);
    d = std::max(d, std::fabs(cum - i / n));
    d = std::max(d, std::fabs(cum - (i + 1) / n));
  }
  return d;
}

// Dense symmetric positive definite solve / log-determinant via Cholesky,
// plain textbook implementation.
struct Chol {
  int n = 0;
  std::vector<double> l;  // row-major lower triangle

  explicit Chol(const std::vector<double>& a, int dim) : n(dim), l(a) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        double s = l[i * n + j];
        for (int k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
        l[i * n + j] = (i == j) ? std::sqrt(s) : s / l[j * n + j];
      }
  }
  double logdet() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += 2.0 * std::log(l[i * n + i]);
    return s;
  }
  std::vector<double> solve(std::vector<double> b) const {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) b[i] -= l[i * n + j] * b[j];
      b[i] /= l[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
      for (int j = i + 1; j < n; ++j) b[i] -= l[j * n + i] * b[j];
      b[i] /= l[i * n + i];
    }
    return b;
  }
};

// Log-density of the d-variate Gaussian copula with correlation matrix r at
// u, quantiles taken by bisection.
inline double gauss_copula_logpdf(const std::vector<double>& u, const std::vector<double>& r,
                                  int d) {
  std::vector<double> z(d);
  for (int i = 0; i < d; ++i) z[i] = phi_inv_bisect(u[i]);
  const Chol ch(r, d);
  const std::vector<double> rinv_z = ch.solve(z);
  double quad = 0.0, zz = 0.0;
  for (int i = 0; i < d; ++i) {
    quad += z[i] * rinv_z[i];
    zz += z[i] * z[i];
  }
  return -0.5 * ch.logdet() - 0.5 * (quad - zz);
}

// n-point Gauss-Legendre on (-1,1), computed by Newton iteration (kept local
// to the tests).
inline void gl_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p0 / pp;
      if (std::fabs(z - z1) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

inline double gl_integrate_2d_impl(const std::function<double(double, double)>& f, double a,
                                   double b, double c, double d, int reps) {
  std::vector<double> x, w;
  gl_nodes(64, x, w);
  double total = 0.0;
  // Composite rule: reps x reps panels of 64 x 64 nodes.
  const double hx = (b - a) / reps, hy = (d - c) / reps;
  for (int px = 0; px < reps; ++px)
    for (int py = 0; py < reps; ++py) {
      const double x0 = a + px * hx, y0 = c + py * hy;
      for (size_t i = 0; i < x.size(); ++i) {
        const double xi = x0 + 0.5 * hx * (x[i] + 1.0);
        double row = 0.0;
        for (size_t j = 0; j < x.size(); ++j) {
          const double yj = y0 + 0.5 * hy * (x[j] + 1.0);
          row += w[j] * f(xi, yj);
        }
        total += w[i] * row;
      }
    }
  return total * 0.25 * hx * hy;
}

inline double gl_integrate_2d(const std::function<double(double, double)>& f, double a, double b,
                              double c, double d, int reps = 2) {
  return gl_integrate_2d_impl(f, a, b, c, d, reps);
}

// Tensor Gauss-Legendre on a mesh graded geometrically toward the edges of
// the unit square; panel sizes shrink with the distance to the boundary, so
// the corner ridges of tail-dependent copula densities are resolved.
inline double graded_integrate_unit_square(const std::function<double(double, double)>& f,
                                           int gl_n = 24) {
  const std::vector<double> bp = {1e-7, 1e-5, 1e-3, 1e-2, 0.05,  0.15,    0.3,       0.5,
                                  0.7,  0.85, 0.95, 0.99, 0.999, 0.99999, 1.0 - 1e-7};
  std::vector<double> x, w;
  gl_nodes(gl_n, x, w);
  double total = 0.0;
  for (size_t px = 0; px + 1 < bp.size(); ++px)
    for (size_t py = 0; py + 1 < bp.size(); ++py) {
      const double ax = bp[px], bx = bp[px + 1], ay = bp[py], by = bp[py + 1];
      double s = 0.0;
      for (size_t i = 0; i < x.size(); ++i) {
        const double xi = ax + 0.5 * (bx - ax) * (x[i] + 1.0);
        double row = 0.0;
        for (size_t j = 0; j < x.size(); ++j) {
          const double yj = ay + 0.5 * (by - ay) * (x[j] + 1.0);
          row += w[j] * f(xi, yj);
        }
        s += w[i] * row;
      }
      total += s * 0.25 * (bx - ax) * (by - ay);
    }
  return total;
}

}  // namespace testsup
