// Local C-vine collection: one 4-dimensional C-vine per station rooted at it
// and its three nearest neighbors, composite-likelihood weights, shared
// first-tree parameter slots, and the reordered predictive C-vine.
#pragma once

#include <array>
#include <vector>

#include "spatvine/bicop.hpp"
#include "spatvine/geo.hpp"
#include "spatvine/util.hpp"

namespace spatvine {

// Covariates of a vine edge {i,j;D}: log-distance/log-elevation-difference of
// the pair plus log-distances to the conditioning stations (k for tree 2,
// k and m for tree 3). i is the tree-root-side variable.
struct EdgeCovariates {
  int tree = 1;
  double ln_d_ij = 0.0, ln_e_ij = 0.0;
  double ln_d_ik = 0.0, ln_d_jk = 0.0;
  double ln_d_im = 0.0, ln_d_jm = 0.0;
};

struct EdgeSpec {
  int tree = 1;        // 1, 2 or 3
  int var_i = -1;      // tree-root-side variable (0-based station index)
  int var_j = -1;
  std::array<int, 2> cond = {-1, -1};  // conditioning stations (tree 2: [0]; tree 3: both)
  int slot = -1;       // parameter slot
  bool swapped = false;  // slot copula stored with arguments (var_j, var_i)
};

// Roots (s, p, q, r) and the six edges in the fixed order
// (s,p) (s,q) (s,r) | (p,q;s) (p,r;s) | (q,r;s,p).
struct CVineSpec {
  std::array<int, 4> roots{};
  std::array<EdgeSpec, 6> edges{};
};

// One parameter slot: a pair copula shared by every edge mapped to it.
// First-tree slots can be used by up to two vines; higher-tree slots are
// unique to their vine.
struct Slot {
  int tree = 1;
  int var_i = -1, var_j = -1;  // canonical order (tree 1: var_i < var_j)
  std::array<int, 2> cond = {-1, -1};
  Family family;  // assigned by select_families
  EdgeCovariates covariates;
  std::vector<int> vines;  // vines whose edges reference this slot
};

struct VineCollection {
  std::vector<CVineSpec> vines;  // indexed by first-root station
  std::vector<int> counts;       // n_s = number of vines containing station s
  std::vector<double> weights;   // w_s = 1 / n_s
  std::vector<Slot> slots;       // tree-1 slots first, then tree 2, then tree 3
  int tree1_slot_count = 0;

  int station_count() const { return static_cast<int>(vines.size()); }
};

VineCollection build_collection(const CovariateTable& table);

// Sequential AIC family selection, tree by tree. Each unique first-tree pair
// is fitted once and shares family and parameters across the (up to two)
// vines containing it. Returns per-slot fits used as start values later.
struct SelectedFamilies {
  std::vector<PairCopula> slot_params;  // aligned with collection.slots
  std::vector<double> slot_loglik;
};

SelectedFamilies select_families(VineCollection& collection, const Matrix& copula_data,
                                 const std::vector<FamilyKind>& allowed);

// Predictive C-vine for a new location s given neighbors (p, q, r):
// tree 1 root p: (p,s) (p,q) (p,r); tree 2 root q: (q,s;p) (q,r;p);
// tree 3: (r,s;p,q). Edge index order matches this listing.
struct PredictiveCVineSpec {
  std::array<int, 3> neighbors{};  // p, q, r (0-based station indices)
  std::array<EdgeSpec, 6> edges{};
  std::array<EdgeCovariates, 6> covariates{};
  std::array<Family, 6> families{};  // all student_t by construction
};

PredictiveCVineSpec build_predictive(double lon, double lat, double elev,
                                     const std::vector<Station>& stations,
                                     const CovariateTable& table);

// Edge covariates of a slot in the local collection.
EdgeCovariates edge_covariates(int tree, int vi, int vj, int k, int m, const CovariateTable& table);

}  // namespace spatvine
