// Bivariate copula kernel: families, densities, h-functions and inverses,
// Kendall-tau maps, Fisher z, single-pair fitting with AIC selection.
#pragma once

#include <span>
#include <string>
#include <vector>

namespace spatvine {

enum class FamilyKind { independence, gaussian, student_t, clayton, gumbel, frank };

std::string family_name(FamilyKind k);
FamilyKind family_from_name(const std::string& name);

struct Family {
  FamilyKind kind = FamilyKind::independence;
  int rotation = 0;  // 0/90/180/270; nonzero only for clayton and gumbel

  bool operator==(const Family&) const = default;
};

// Parameter ranges (numeric-stability caps; the base copula of a rotated
// family always stores the positive-dependence parameter).
struct ParamRange {
  double theta_min, theta_max;
  double nu_min, nu_max;  // student_t only
};
ParamRange param_range(FamilyKind k);
int param_count(FamilyKind k);  // 0, 1 or 2

struct PairCopula {
  Family family;
  double theta = 0.0;
  double nu = 0.0;  // student_t degrees of freedom; 0 sentinel otherwise
};

void validate_params(const PairCopula& c);

// Inputs to pdf/hfunc are clamped to [1e-10, 1 - 1e-10].
double bicop_pdf(const PairCopula& c, double u, double v);
double bicop_logpdf(const PairCopula& c, double u, double v);
double bicop_cdf(const PairCopula& c, double u, double v);

// hfunc1(u, v) = P(V <= v | U = u) = dC/du   (condition on the first slot)
// hfunc2(u, v) = P(U <= u | V = v) = dC/dv   (condition on the second slot)
double bicop_hfunc1(const PairCopula& c, double u, double v);
double bicop_hfunc2(const PairCopula& c, double u, double v);
// hinv1(u, w): the v with hfunc1(u, v) = w; hinv2(w, v): the u with
// hfunc2(u, v) = w.
double bicop_hinv1(const PairCopula& c, double u, double w);
double bicop_hinv2(const PairCopula& c, double w, double v);

// A copula viewed with its two argument slots exchanged. The exchangeable
// base families make this a pure bookkeeping device for shared first-tree
// edges used from both endpoint vines.
struct PairView {
  const PairCopula* c = nullptr;
  bool swapped = false;

  double logpdf(double u, double v) const {
    return swapped ? bicop_logpdf(*c, v, u) : bicop_logpdf(*c, u, v);
  }
  double hfunc1(double u, double v) const {
    return swapped ? bicop_hfunc2(*c, v, u) : bicop_hfunc1(*c, u, v);
  }
  double hinv1(double u, double w) const {
    return swapped ? bicop_hinv2(*c, w, u) : bicop_hinv1(*c, u, w);
  }
};

// --- Kendall tau <-> theta ---
struct ClampStats {
  long tau_clamps = 0;
  long nu_clamps = 0;
};

double tau_from_theta(const Family& f, double theta);
// Inverse map. For Clayton/Gumbel the attainable tau range is one-signed;
// out-of-range values are clamped to [0.001, 0.95] (mirrored for 90/270)
// and counted in `stats` when given.
double theta_from_tau(const Family& f, double tau, ClampStats* stats = nullptr);

double fisher_z(double r);
double fisher_z_inv(double xi);

// --- Single-pair fitting ---
struct PairFit {
  PairCopula copula;
  double loglik = 0.0;
  double aic = 0.0;
  int n_params = 0;
  bool converged = false;
};

// Fits each allowed family by maximum likelihood (golden section for
// one-parameter families, Nelder-Mead for student_t) and returns the AIC
// minimizer. Candidate rotations for Clayton/Gumbel follow the sign of the
// empirical tau: {0, 180} when tau >= 0, {90, 270} otherwise.
PairFit fit_pair(std::span<const double> u, std::span<const double> v,
                 const std::vector<FamilyKind>& allowed);

// Log-likelihood of a fixed copula over paired samples.
double pair_loglik(const PairCopula& c, std::span<const double> u, std::span<const double> v);

}  // namespace spatvine
