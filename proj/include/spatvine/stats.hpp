// Scalar distribution functions and small numerical building blocks.
#pragma once

#include <functional>
#include <span>
#include <vector>

namespace spatvine {

// --- Standard normal ---
double norm_pdf(double x);
double norm_cdf(double x);
double norm_quantile(double p);  // AS 241 (PPND16)

// --- Student t (standardized, df nu > 0) ---
double student_t_pdf(double x, double nu);
double student_t_cdf(double x, double nu);
double student_t_quantile(double p, double nu);
double student_t_logpdf(double x, double nu);

// Regularized incomplete beta I_x(a, b).
double inc_beta(double a, double b, double x);

// Bivariate standard normal CDF P(X <= h, Y <= k) with correlation rho.
// Drezner-Wesolowsky/Genz quadrature scheme.
double bvn_cdf(double h, double k, double rho);

// --- Quadrature ---
struct GaussLegendre {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};
// Nodes/weights computed by Newton iteration on Legendre polynomials; cached
// per order.
const GaussLegendre& gauss_legendre(int n);

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 48);

// Order-1 Debye function D1(x) = (1/x) Int_0^x t/(e^t - 1) dt, x > 0.
// 64-node Gauss-Legendre on [0, x].
double debye1(double x);

// --- Rank statistics ---
// Kendall's tau-b, O(n log n) (Knight's algorithm with tie corrections).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// --- Least squares ---
// Solves min ||X b - y||^2 via normal equations + Cholesky. X is row-major
// n x k. Throws numeric_error when the Gram matrix is numerically singular.
std::vector<double> ols(const std::vector<double>& X, int n, int k,
                        std::span<const double> y);

// Cholesky factorization in place of a symmetric positive definite k x k
// matrix (row-major, lower triangle written). Returns false when not SPD.
bool cholesky(std::vector<double>& A, int k);
void cholesky_solve(const std::vector<double>& L, int k, std::vector<double>& b);

}  // namespace spatvine
