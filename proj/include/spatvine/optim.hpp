// Derivative-free and quasi-Newton optimizers used by the fitting stages.
#pragma once

#include <functional>
#include <vector>

namespace spatvine {

using Objective = std::function<double(const std::vector<double>&)>;
using Gradient = std::function<std::vector<double>(const std::vector<double>&)>;

// Maximizes a unimodal f on [a, b]. Returns argmax.
double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-8, int max_iter = 200);

struct NelderMeadResult {
  std::vector<double> x;
  double fmin = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Minimizes f starting from x0; initial simplex spread `step` per coordinate.
NelderMeadResult nelder_mead_min(const Objective& f, const std::vector<double>& x0,
                                 double step = 0.5, double ftol = 1e-10, int max_iter = 500);

struct LbfgsOptions {
  int max_iter = 500;
  double rel_ftol = 1e-8;
  double gtol = 1e-7;
  int memory = 8;
};

struct LbfgsResult {
  std::vector<double> x;
  double fmin = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Limited-memory BFGS with backtracking Armijo line search. Minimizes f.
// The gradient callback may be finite differences; descent is monotone
// (steps accepted only on improvement), so fmin <= f(x0) always.
LbfgsResult lbfgs_min(const Objective& f, const Gradient& grad, const std::vector<double>& x0,
                      const LbfgsOptions& opts = {});

// Central finite-difference gradient helper.
std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x,
                                double step = 1e-5);

}  // namespace spatvine
