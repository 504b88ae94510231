#include "spatvine/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace spatvine {

double golden_section_max(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_iter) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2; f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1; f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

NelderMeadResult nelder_mead_min(const Objective& f, const std::vector<double>& x0, double step,
                                 double ftol, int max_iter) {
  const size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  for (size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  NelderMeadResult res;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<size_t> ord(n + 1);
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](size_t a, size_t b) { return fv[a] < fv[b]; });
    const size_t best = ord[0], worst = ord[n], second = ord[n - 1];
    if (std::fabs(fv[worst] - fv[best]) <= ftol * (1.0 + std::fabs(fv[best]))) {
      res.converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / n;
    }
    auto blend = [&](double coef) {
      std::vector<double> x(n);
      for (size_t j = 0; j < n; ++j) x[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
      return x;
    };
    std::vector<double> xr = blend(-alpha);
    const double fr = f(xr);
    if (fr < fv[ord[0]]) {
      std::vector<double> xe = blend(-gamma);
      const double fe = f(xe);
      if (fe < fr) { simplex[worst] = std::move(xe); fv[worst] = fe; }
      else { simplex[worst] = std::move(xr); fv[worst] = fr; }
    } else if (fr < fv[second]) {
      simplex[worst] = std::move(xr);
      fv[worst] = fr;
    } else {
      std::vector<double> xc = blend(fr < fv[worst] ? -rho : rho);
      const double fc = f(xc);
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = std::move(xc);
        fv[worst] = fc;
      } else {
        for (size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (size_t j = 0; j < n; ++j)
            simplex[i][j] = simplex[best][j] + sigma * (simplex[i][j] - simplex[best][j]);
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  size_t bi = 0;
  for (size_t i = 1; i <= n; ++i)
    if (fv[i] < fv[bi]) bi = i;
  res.x = simplex[bi];
  res.fmin = fv[bi];
  res.iterations = it;
  return res;
}

std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x, double step) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  for (size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + step;
    const double fp = f(xp);
    xp[i] = xi - step;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

LbfgsResult lbfgs_min(const Objective& f, const Gradient& grad, const std::vector<double>& x0,
                      const LbfgsOptions& opts) {
  const size_t n = x0.size();
  std::vector<double> x = x0;
  double fx = f(x);
  std::vector<double> g = grad(x);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  LbfgsResult res;
  res.x = x;
  res.fmin = fx;

  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const double gnorm = std::sqrt(dot(g, g));
    if (gnorm < opts.gtol * (1.0 + std::fabs(fx))) {
      res.converged = true;
      break;
    }
    // Two-loop recursion for d = -H g.
    std::vector<double> q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * dot(s_hist[i], q);
      for (size_t j = 0; j < n; ++j) q[j] -= alpha[i] * y_hist[i][j];
    }
    double h0 = 1.0;
    if (!s_hist.empty()) {
      const double sy = dot(s_hist.back(), y_hist.back());
      const double yy = dot(y_hist.back(), y_hist.back());
      if (yy > 0.0) h0 = sy / yy;
    }
    for (size_t j = 0; j < n; ++j) q[j] *= h0;
    for (size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], q);
      for (size_t j = 0; j < n; ++j) q[j] += s_hist[i][j] * (alpha[i] - beta);
    }
    std::vector<double> d(n);
    for (size_t j = 0; j < n; ++j) d[j] = -q[j];
    double dg = dot(d, g);
    if (dg >= 0.0) {  // not a descent direction; fall back to steepest descent
      for (size_t j = 0; j < n; ++j) d[j] = -g[j];
      dg = -gnorm * gnorm;
      s_hist.clear(); y_hist.clear(); rho_hist.clear();
    }

    // Backtracking Armijo line search.
    double step = (it == 0 && s_hist.empty()) ? std::min(1.0, 1.0 / std::max(1.0, gnorm)) : 1.0;
    const double c1 = 1e-4;
    std::vector<double> xn(n);
    double fn = fx;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (size_t j = 0; j < n; ++j) xn[j] = x[j] + step * d[j];
      fn = f(xn);
      if (std::isfinite(fn) && fn <= fx + c1 * step * dg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no improving step; finite-difference noise floor

    std::vector<double> gn = grad(xn);
    std::vector<double> s(n), yv(n);
    for (size_t j = 0; j < n; ++j) {
      s[j] = xn[j] - x[j];
      yv[j] = gn[j] - g[j];
    }
    const double sy = dot(s, yv);
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double rel = std::fabs(fx - fn) / std::max({std::fabs(fx), std::fabs(fn), 1.0});
    x = std::move(xn);
    fx = fn;
    g = std::move(gn);
    if (rel < opts.rel_ftol) {
      res.converged = true;
      ++it;
      break;
    }
  }
  res.x = x;
  res.fmin = fx;
  res.iterations = it;
  return res;
}

}  // namespace spatvine
