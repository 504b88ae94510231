// Local C-vine composite likelihood: per-vine log-density, weighted composite
// objective with deduplicated parameter slots, and joint maximum composite
// likelihood estimation.
//
// Three evaluation kernels back the same objective:
//   composite_loglik            OpenMP-parallel, generic families
//   composite_loglik_reference  serial naive per-edge walk kept for testing
//   (internal Gaussian z-scale fast path, used when every slot is Gaussian
//    or independence)
// All kernels reduce with fixed-order pairwise summation, so results do not
// depend on the thread count.
#pragma once

#include <memory>
#include <span>

#include "spatvine/structure.hpp"

namespace spatvine {

// Log-density of one 4-dimensional C-vine at u4 = (u_s, u_p, u_q, u_r).
double vine_loglik(const CVineSpec& spec, std::span<const PairCopula> slot_params,
                   std::span<const double, 4> u4);

double composite_loglik(const VineCollection& col, std::span<const PairCopula> slot_params,
                        const Matrix& copula_data);
double composite_loglik_reference(const VineCollection& col,
                                  std::span<const PairCopula> slot_params,
                                  const Matrix& copula_data);

// Caches the quantile transform of the data so repeated objective evaluations
// (optimizer iterations) reuse it. Evaluations are thread-parallel.
class CompositeEvaluator {
public:
  CompositeEvaluator(const VineCollection& col, const Matrix& copula_data);
  ~CompositeEvaluator();

  double loglik(std::span<const PairCopula> slot_params) const;
  // Sum over t of one vine's log-density (used for sparse gradients).
  double vine_series(int s, std::span<const PairCopula> slot_params) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Unconstrained reparametrization of the free parameters. Shared tree-1
// slots appear once; independence slots contribute nothing.
class ParamLayout {
public:
  struct Entry {
    int slot = -1;
    bool is_nu = false;
  };

  static ParamLayout make(std::span<const PairCopula> slot_params);

  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<Entry>& entries() const { return entries_; }

  std::vector<double> pack(std::span<const PairCopula> slot_params) const;
  void unpack(std::span<const double> x, std::span<PairCopula> slot_params) const;

private:
  std::vector<Entry> entries_;
  std::vector<Family> families_;  // per entry
};

struct LcvclOptions {
  int max_iter = 500;
  double rel_ftol = 1e-8;
  double fd_step = 1e-5;
};

struct FittedLcvcl {
  std::vector<PairCopula> slot_params;
  ParamLayout layout;
  double cll = 0.0;
  double start_cll = 0.0;
  bool converged = false;
  int iterations = 0;
  int n_free_params = 0;
};

// Joint maximization over all slot parameters, started from the sequential
// estimates of select_families.
FittedLcvcl fit_lcvcl(const VineCollection& col, const Matrix& copula_data,
                      const SelectedFamilies& start, const LcvclOptions& opts = {});

}  // namespace spatvine
