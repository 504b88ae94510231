#include "spatvine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "spatvine/util.hpp"

namespace spatvine {

double norm_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2_v<double> / 2.0);
}

// Wichura's algorithm AS 241, PPND16. Relative accuracy ~1e-15.
double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw numeric_error("norm_quantile: p outside (0,1)");
  const double q = p - 0.5;
  double r, val;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    val = q *
          (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
              1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
            1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
          (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
              5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
            4.2313330701600911252e+1) * r + 1.0);
    return val;
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

namespace {

// Continued fraction for the incomplete beta (Lentz), NR-style.
double beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double eps = 3e-15;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // The (a, b) pair is constant across long evaluation loops (fixed degrees
  // of freedom); memoize the log-beta term.
  thread_local double ca = -1.0, cb = -1.0, clbeta = 0.0;
  if (a != ca || b != cb) {
    ca = a;
    cb = b;
    clbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  }
  const double lbeta = clbeta;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - lbeta) * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_logpdf(double x, double nu) {
  thread_local double cnu = -1.0, cnorm = 0.0;
  if (nu != cnu) {
    cnu = nu;
    cnorm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
            0.5 * std::log(nu * std::numbers::pi_v<double>);
  }
  return cnorm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double student_t_pdf(double x, double nu) { return std::exp(student_t_logpdf(x, nu)); }

double student_t_cdf(double x, double nu) {
  if (x == 0.0) return 0.5;
  const double z = nu / (nu + x * x);
  const double p = 0.5 * inc_beta(0.5 * nu, 0.5, z);
  return x > 0.0 ? 1.0 - p : p;
}

double student_t_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0)) throw numeric_error("student_t_quantile: p outside (0,1)");
  if (p == 0.5) return 0.0;
  // Vine evaluations hit the same (p, nu) pairs back to back (density then
  // h-function at one observation); a two-entry memo catches those.
  struct Memo {
    double p = -1.0, nu = -1.0, x = 0.0;
  };
  thread_local Memo memo[2];
  thread_local int next = 0;
  for (const Memo& m : memo)
    if (m.p == p && m.nu == nu) return m.x;
  const bool lower = p < 0.5;
  const double pp = lower ? p : 1.0 - p;  // tail mass, <= 0.5

  // Initial guess: scaled normal quantile for large nu, tail power law for
  // small tail mass.
  double x;
  if (nu > 4.0) {
    const double z = norm_quantile(pp);
    const double g = (z * z * z + z) / (4.0 * nu);  // first Cornish-Fisher term
    x = z - g;
    x = std::fabs(x);
  } else {
    const double lb = std::lgamma(0.5 * nu) + std::lgamma(0.5) - std::lgamma(0.5 * (nu + 1.0));
    // From the tail expansion 1-F(x) ~ x^-nu * nu^{nu/2-1} / B(nu/2,1/2)
    const double t = std::pow(pp * nu * std::exp(lb) / std::pow(nu, 0.5 * nu), -1.0 / nu);
    x = std::max(1.0, t);
  }
  // Safeguarded Newton on F(-x) = pp (x > 0 is the magnitude of the lower
  // quantile).
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    const double f = student_t_cdf(-x, nu) - pp;
    if (f > 0.0) lo = x; else hi = x;
    const double df = -student_t_pdf(x, nu);
    double step = f / df;
    double xn = x - step;
    if (!(xn > lo && (hi == std::numeric_limits<double>::infinity() || xn < hi))) {
      xn = (hi == std::numeric_limits<double>::infinity()) ? 2.0 * x + 1.0 : 0.5 * (lo + hi);
    }
    if (std::fabs(xn - x) <= 1e-14 * (1.0 + std::fabs(x))) { x = xn; break; }
    x = xn;
  }
  const double result = lower ? -x : x;
  memo[next] = {p, nu, result};
  next = 1 - next;
  return result;
}

// Port of the Drezner-Wesolowsky / Genz bivariate normal algorithm
// (see e.g. Genz 2004, "Numerical computation of rectangular bivariate ...").
namespace {

const double gl_w6[3] = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
const double gl_x6[3] = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
const double gl_w12[6] = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                          0.2031674267230659, 0.2334925365383547, 0.2491470458134029};
const double gl_x12[6] = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                          0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
const double gl_w20[10] = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                           0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                           0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                           0.1527533871307259};
const double gl_x20[10] = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                           0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                           0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                           0.07652652113349733};

// Upper-tail probability P(X > dh, Y > dk).
double bvnu(double dh, double dk, double r) {
  if (std::isinf(dh) && dh > 0) return 0.0;
  if (std::isinf(dk) && dk > 0) return 0.0;
  if (std::isinf(dh) && dh < 0) return std::isinf(dk) && dk < 0 ? 1.0 : norm_cdf(-dk);
  if (std::isinf(dk) && dk < 0) return norm_cdf(-dh);
  if (r == 0.0) return norm_cdf(-dh) * norm_cdf(-dk);

  const double tp = 2.0 * std::numbers::pi_v<double>;
  double h = dh, k = dk, hk = h * k, bvn = 0.0;
  // 20-point rule throughout; the shorter rules trade accuracy for nothing
  // we care about here.
  const double* w = gl_w20;
  const double* x = gl_x20;
  const int ng = 10;
  (void)gl_w6;
  (void)gl_x6;
  (void)gl_w12;
  (void)gl_x12;

  if (std::fabs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = 0.5 * std::asin(r);
    for (int i = 0; i < ng; ++i) {
      for (int sign = -1; sign <= 1; sign += 2) {
        const double sn = std::sin(asr * (1.0 + sign * x[i]));
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / tp + norm_cdf(-h) * norm_cdf(-k);
  } else {
    if (r < 0.0) { k = -k; hk = -hk; }
    if (std::fabs(r) < 1.0) {
      const double as = 1.0 - r * r;
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double asr0 = -0.5 * (bs / as + hk);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      if (asr0 > -100.0)
        bvn = a * std::exp(asr0) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(tp) * norm_cdf(-b / a);
        bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a *= 0.5;
      double quad = 0.0;
      for (int i = 0; i < ng; ++i) {
        for (int sign = -1; sign <= 1; sign += 2) {
          const double xs = a * (1.0 + sign * x[i]);
          const double xs2 = xs * xs;
          const double asr = -0.5 * (bs / xs2 + hk);
          if (asr > -100.0) {
            const double sp = 1.0 + c * xs2 * (1.0 + 5.0 * d * xs2);
            const double rs = std::sqrt(1.0 - xs2);
            const double ep = std::exp(-0.5 * hk * xs2 / ((1.0 + rs) * (1.0 + rs))) / rs;
            quad += a * w[i] * std::exp(asr) * (sp - ep);
          }
        }
      }
      bvn = (quad - bvn) / tp;
    }
    if (r > 0.0) {
      bvn += norm_cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double l = (h < 0.0) ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
      bvn = l - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace

double bvn_cdf(double h, double k, double rho) { return bvnu(-h, -k, rho); }

const GaussLegendre& gauss_legendre(int n) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi_v<double> * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
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
    gl.nodes[i] = -z;
    gl.nodes[n - 1 - i] = z;
    gl.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    gl.weights[n - 1 - i] = gl.weights[i];
  }
  auto [pos, inserted] = cache.emplace(n, std::move(gl));
  (void)inserted;
  return pos->second;
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double debye1(double x) {
  if (x == 0.0) return 1.0;
  const double ax = std::fabs(x);
  const auto& gl = gauss_legendre(64);
  double s = 0.0;
  for (size_t i = 0; i < gl.nodes.size(); ++i) {
    const double t = 0.5 * ax * (gl.nodes[i] + 1.0);
    const double integrand = (t < 1e-12) ? 1.0 : t / std::expm1(t);
    s += gl.weights[i] * integrand;
  }
  const double d = s * 0.5;  // (1/x) * (x/2) * sum
  // D1(-x) = D1(x) + x/2
  return x > 0.0 ? d : d + ax / 2.0;
}

namespace {

// Counts inversions while merge-sorting y (used by Knight's algorithm).
long long merge_count(std::vector<double>& y, std::vector<double>& buf, size_t lo, size_t hi) {
  if (hi - lo < 2) return 0;
  const size_t mid = lo + (hi - lo) / 2;
  long long inv = merge_count(y, buf, lo, mid) + merge_count(y, buf, mid, hi);
  size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (y[j] < y[i]) {
      inv += static_cast<long long>(mid - i);
      buf[k++] = y[j++];
    } else {
      buf[k++] = y[i++];
    }
  }
  while (i < mid) buf[k++] = y[i++];
  while (j < hi) buf[k++] = y[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, y.begin() + lo);
  return inv;
}

long long tie_pairs(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  long long t = 0, run = 1;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] == v[i - 1]) {
      ++run;
    } else {
      t += run * (run - 1) / 2;
      run = 1;
    }
  }
  t += run * (run - 1) / 2;
  return t;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  if (n != y.size() || n < 2) throw input_error("kendall_tau: need two equal series, n >= 2");
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });
  std::vector<double> ys(n);
  for (size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];

  // Joint ties (pairs tied in both x and y).
  long long txy = 0;
  {
    long long run = 1;
    for (size_t i = 1; i < n; ++i) {
      if (x[idx[i]] == x[idx[i - 1]] && ys[i] == ys[i - 1]) ++run;
      else { txy += run * (run - 1) / 2; run = 1; }
    }
    txy += run * (run - 1) / 2;
  }
  const long long tx = tie_pairs(std::vector<double>(x.begin(), x.end()));
  const long long ty = tie_pairs(std::vector<double>(y.begin(), y.end()));

  std::vector<double> buf(n);
  std::vector<double> ysort = ys;
  const long long swaps = merge_count(ysort, buf, 0, n);

  const long long n0 = static_cast<long long>(n) * (n - 1) / 2;
  // Concordant minus discordant = n0 - tx - ty + txy - 2*swaps.
  const double num = static_cast<double>(n0 - tx - ty + txy - 2 * swaps);
  const double den = std::sqrt(static_cast<double>(n0 - tx)) * std::sqrt(static_cast<double>(n0 - ty));
  if (den == 0.0) return 0.0;
  return num / den;
}

bool cholesky(std::vector<double>& A, int k) {
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = A[i * k + j];
      for (int m = 0; m < j; ++m) s -= A[i * k + m] * A[j * k + m];
      if (i == j) {
        if (s <= 0.0) return false;
        A[i * k + i] = std::sqrt(s);
      } else {
        A[i * k + j] = s / A[j * k + j];
      }
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& L, int k, std::vector<double>& b) {
  for (int i = 0; i < k; ++i) {
    double s = b[i];
    for (int j = 0; j < i; ++j) s -= L[i * k + j] * b[j];
    b[i] = s / L[i * k + i];
  }
  for (int i = k - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < k; ++j) s -= L[j * k + i] * b[j];
    b[i] = s / L[i * k + i];
  }
}

std::vector<double> ols(const std::vector<double>& X, int n, int k, std::span<const double> y) {
  std::vector<double> G(static_cast<size_t>(k) * k, 0.0);
  std::vector<double> b(k, 0.0);
  for (int r = 0; r < n; ++r) {
    const double* xr = X.data() + static_cast<size_t>(r) * k;
    for (int i = 0; i < k; ++i) {
      b[i] += xr[i] * y[r];
      for (int j = 0; j <= i; ++j) G[i * k + j] += xr[i] * xr[j];
    }
  }
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) G[i * k + j] = G[j * k + i];
  if (!cholesky(G, k)) throw numeric_error("ols: rank-deficient design matrix");
  cholesky_solve(G, k, b);
  return b;
}

}  // namespace spatvine
