#include "spatvine/structure.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace spatvine {

EdgeCovariates edge_covariates(int tree, int vi, int vj, int k, int m,
                               const CovariateTable& table) {
  EdgeCovariates cov;
  cov.tree = tree;
  cov.ln_d_ij = table.log_dist(vi, vj);
  cov.ln_e_ij = table.log_elev_diff(vi, vj);
  if (tree >= 2) {
    cov.ln_d_ik = table.log_dist(vi, k);
    cov.ln_d_jk = table.log_dist(vj, k);
  }
  if (tree >= 3) {
    cov.ln_d_im = table.log_dist(vi, m);
    cov.ln_d_jm = table.log_dist(vj, m);
  }
  return cov;
}

VineCollection build_collection(const CovariateTable& table) {
  const int d = table.size();
  if (d < 4) throw input_error("build_collection: need at least 4 stations");

  VineCollection col;
  col.vines.resize(d);
  col.counts.assign(d, 0);
  col.weights.assign(d, 0.0);

  for (int s = 0; s < d; ++s) {
    const std::vector<int> nn = nearest_neighbors(s, 3, table);
    col.vines[s].roots = {s, nn[0], nn[1], nn[2]};
    for (int r : col.vines[s].roots) ++col.counts[r];
  }
  for (int s = 0; s < d; ++s) col.weights[s] = 1.0 / col.counts[s];

  // Tree-1 slots: one per unique unordered pair {s, neighbor}.
  std::map<std::pair<int, int>, int> pair_slot;
  for (int s = 0; s < d; ++s) {
    const auto& roots = col.vines[s].roots;
    for (int e = 0; e < 3; ++e) {
      const int o = roots[e + 1];
      const std::pair<int, int> key{std::min(s, o), std::max(s, o)};
      auto it = pair_slot.find(key);
      if (it == pair_slot.end()) {
        Slot slot;
        slot.tree = 1;
        slot.var_i = key.first;
        slot.var_j = key.second;
        slot.covariates = edge_covariates(1, key.first, key.second, -1, -1, table);
        col.slots.push_back(slot);
        it = pair_slot.emplace(key, static_cast<int>(col.slots.size()) - 1).first;
      }
      col.slots[it->second].vines.push_back(s);
      EdgeSpec& edge = col.vines[s].edges[e];
      edge.tree = 1;
      edge.var_i = s;
      edge.var_j = o;
      edge.slot = it->second;
      edge.swapped = (s != key.first);
    }
  }
  col.tree1_slot_count = static_cast<int>(col.slots.size());

  // Higher-tree slots are unique per vine: (p,q;s), (p,r;s), (q,r;s,p).
  auto add_unique_slot = [&](int s, int e, int tree, int vi, int vj, int k, int m) {
    Slot slot;
    slot.tree = tree;
    slot.var_i = vi;
    slot.var_j = vj;
    slot.cond = {k, m};
    slot.covariates = edge_covariates(tree, vi, vj, k, m, table);
    slot.vines.push_back(s);
    col.slots.push_back(slot);
    EdgeSpec& edge = col.vines[s].edges[e];
    edge.tree = tree;
    edge.var_i = vi;
    edge.var_j = vj;
    edge.cond = {k, m};
    edge.slot = static_cast<int>(col.slots.size()) - 1;
    edge.swapped = false;
  };
  for (int s = 0; s < d; ++s) {
    const auto& r = col.vines[s].roots;
    add_unique_slot(s, 3, 2, r[1], r[2], r[0], -1);
    add_unique_slot(s, 4, 2, r[1], r[3], r[0], -1);
  }
  for (int s = 0; s < d; ++s) {
    const auto& r = col.vines[s].roots;
    add_unique_slot(s, 5, 3, r[2], r[3], r[0], r[1]);
  }
  // Keep slot blocks ordered tree 1 | tree 2 | tree 3. The interleaved
  // construction above appends tree-2 pairs then tree-3, so the order holds.
  return col;
}

SelectedFamilies select_families(VineCollection& collection, const Matrix& copula_data,
                                 const std::vector<FamilyKind>& allowed) {
  const int d = collection.station_count();
  const int n = copula_data.rows();
  if (copula_data.cols() != d) throw input_error("select_families: data/station mismatch");

  SelectedFamilies out;
  out.slot_params.resize(collection.slots.size());
  out.slot_loglik.assign(collection.slots.size(), 0.0);

  // Tree 1: one fit per unique pair, pooled across the vines sharing it.
  const int n1 = collection.tree1_slot_count;
#pragma omp parallel for schedule(dynamic)
  for (int si = 0; si < n1; ++si) {
    Slot& slot = collection.slots[si];
    const std::vector<double> ua = copula_data.column(slot.var_i);
    const std::vector<double> ub = copula_data.column(slot.var_j);
    const PairFit fit = fit_pair(ua, ub, allowed);
    slot.family = fit.copula.family;
    out.slot_params[si] = fit.copula;
    out.slot_loglik[si] = fit.loglik;
  }

  // Trees 2 and 3 per vine, pseudo-observations through the h-functions.
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < d; ++s) {
    CVineSpec& vine = collection.vines[s];
    const std::vector<double> us = copula_data.column(s);
    std::array<std::vector<double>, 3> cond1;  // u^{o|s} for o = p, q, r
    for (int e = 0; e < 3; ++e) {
      const EdgeSpec& edge = vine.edges[e];
      const PairView view{&out.slot_params[edge.slot], edge.swapped};
      const std::vector<double> uo = copula_data.column(edge.var_j);
      cond1[e].resize(n);
      for (int t = 0; t < n; ++t) cond1[e][t] = clamp_unit(view.hfunc1(us[t], uo[t]));
    }
    for (int e = 3; e <= 4; ++e) {
      EdgeSpec& edge = vine.edges[e];
      const PairFit fit = fit_pair(cond1[0], cond1[e - 2], allowed);
      collection.slots[edge.slot].family = fit.copula.family;
      out.slot_params[edge.slot] = fit.copula;
      out.slot_loglik[edge.slot] = fit.loglik;
    }
    std::array<std::vector<double>, 2> cond2;  // u^{o|s,p} for o = q, r
    for (int e = 3; e <= 4; ++e) {
      const EdgeSpec& edge = vine.edges[e];
      const PairView view{&out.slot_params[edge.slot], false};
      cond2[e - 3].resize(n);
      for (int t = 0; t < n; ++t)
        cond2[e - 3][t] = clamp_unit(view.hfunc1(cond1[0][t], cond1[e - 2][t]));
    }
    EdgeSpec& edge3 = vine.edges[5];
    const PairFit fit3 = fit_pair(cond2[0], cond2[1], allowed);
    collection.slots[edge3.slot].family = fit3.copula.family;
    out.slot_params[edge3.slot] = fit3.copula;
    out.slot_loglik[edge3.slot] = fit3.loglik;
  }
  return out;
}

PredictiveCVineSpec build_predictive(double lon, double lat, double elev,
                                     const std::vector<Station>& stations,
                                     const CovariateTable& table) {
  const int d = static_cast<int>(stations.size());
  if (d < 3) throw input_error("build_predictive: need at least 3 stations");
  for (const Station& st : stations)
    if (st.lon == lon && st.lat == lat)
      throw input_error("build_predictive: coordinates coincide with station " +
                        std::to_string(st.id));

  std::vector<int> idx(d);
  std::vector<double> dist(d);
  for (int i = 0; i < d; ++i) {
    idx[i] = i;
    dist[i] = distance_km(lon, lat, stations[i].lon, stations[i].lat);
  }
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });
  const int p = idx[0], q = idx[1], r = idx[2];

  PredictiveCVineSpec spec;
  spec.neighbors = {p, q, r};
  auto ln_d_to = [&](int j) { return std::log(dist[j]); };
  auto ln_e_to = [&](int j) { return std::log(std::fabs(stations[j].elev - elev) + 1.0); };

  // Edge order: (p,s) (p,q) (p,r) | (q,s;p) (q,r;p) | (r,s;p,q).
  // var_j == -1 denotes the new location.
  auto set_edge = [&](int e, int tree, int vi, int vj, int k, int m) {
    spec.edges[e] = EdgeSpec{tree, vi, vj, {k, m}, -1, false};
    spec.families[e] = Family{FamilyKind::student_t, 0};
    EdgeCovariates& cov = spec.covariates[e];
    cov.tree = tree;
    auto ln_d = [&](int a, int b) { return (a == -1) ? ln_d_to(b) : (b == -1 ? ln_d_to(a) : table.log_dist(a, b)); };
    cov.ln_d_ij = ln_d(vi, vj);
    cov.ln_e_ij = (vj == -1) ? ln_e_to(vi) : table.log_elev_diff(vi, vj);
    if (tree >= 2) {
      cov.ln_d_ik = ln_d(vi, k);
      cov.ln_d_jk = ln_d(vj, k);
    }
    if (tree >= 3) {
      cov.ln_d_im = ln_d(vi, m);
      cov.ln_d_jm = ln_d(vj, m);
    }
  };
  set_edge(0, 1, p, -1, -1, -1);
  set_edge(1, 1, p, q, -1, -1);
  set_edge(2, 1, p, r, -1, -1);
  set_edge(3, 2, q, -1, p, -1);
  set_edge(4, 2, q, r, p, -1);
  set_edge(5, 3, r, -1, p, q);
  return spec;
}

}  // namespace spatvine
