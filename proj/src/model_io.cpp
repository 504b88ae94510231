#include "spatvine/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace spatvine {

namespace {

using Json = nlohmann::ordered_json;

Json station_json(const Station& s) {
  return Json{{"id", s.id}, {"name", s.name}, {"lon", s.lon}, {"lat", s.lat}, {"elev", s.elev}};
}

Json beta_json(const SpatialParam& beta) {
  Json j;
  for (int i = 0; i < SpatialParam::kDim; ++i) j[SpatialParam::names()[i]] = beta.get(i);
  return j;
}

SpatialParam beta_from_json(const Json& j) {
  SpatialParam beta;
  for (int i = 0; i < SpatialParam::kDim; ++i) beta.set(i, j.at(SpatialParam::names()[i]).get<double>());
  return beta;
}

}  // namespace

void save_model(const FittedModel& model, const std::string& path) {
  Json j;
  j["schema_version"] = model.schema_version;
  j["mode"] = fit_mode_name(model.mode);
  j["seed"] = model.seed;

  Json stations = Json::array();
  for (const Station& s : model.stations) stations.push_back(station_json(s));
  j["stations"] = std::move(stations);

  Json margins;
  margins["period"] = model.margins.period;
  margins["t0_day"] = model.margins.t0_day;
  margins["ar1"] = model.margins.ar1;
  margins["elev_coef"] = model.margins.elev_coef;
  Json mstations = Json::array();
  for (const StationMargin& m : model.margins.margins) {
    mstations.push_back(Json{{"intercept", m.reg[0]},
                             {"sin_annual", m.reg[1]},
                             {"cos_annual", m.reg[2]},
                             {"sin_semiannual", m.reg[3]},
                             {"cos_semiannual", m.reg[4]},
                             {"mu", m.mu},
                             {"sigma", m.sigma},
                             {"eta", m.eta},
                             {"phi", m.phi}});
  }
  margins["stations"] = std::move(mstations);
  j["margins"] = std::move(margins);

  Json structure;
  structure["neighbor_count"] = 3;
  Json vines = Json::array();
  for (const CVineSpec& vine : model.collection.vines) {
    Json edges = Json::array();
    for (const EdgeSpec& e : vine.edges) {
      Json cond = Json::array();
      for (int c : e.cond)
        if (c >= 0) cond.push_back(c + 1);
      const Family fam = model.collection.slots[e.slot].family;
      edges.push_back(Json{{"tree", e.tree},
                           {"i", e.var_i + 1},
                           {"j", e.var_j + 1},
                           {"cond", std::move(cond)},
                           {"family", family_name(fam.kind)},
                           {"rotation", fam.rotation},
                           {"slot", e.slot}});
    }
    vines.push_back(Json{{"roots", Json::array({vine.roots[0] + 1, vine.roots[1] + 1,
                                                vine.roots[2] + 1, vine.roots[3] + 1})},
                         {"edges", std::move(edges)}});
  }
  structure["vines"] = std::move(vines);
  Json slots = Json::array();
  for (const Slot& s : model.collection.slots) {
    Json cond = Json::array();
    for (int c : s.cond)
      if (c >= 0) cond.push_back(c + 1);
    slots.push_back(Json{{"tree", s.tree},
                         {"i", s.var_i + 1},
                         {"j", s.var_j + 1},
                         {"cond", std::move(cond)},
                         {"family", family_name(s.family.kind)},
                         {"rotation", s.family.rotation}});
  }
  structure["slots"] = std::move(slots);
  j["structure"] = std::move(structure);

  Json lcvcl;
  lcvcl["cll"] = model.lcvcl_cll;
  lcvcl["start_cll"] = model.lcvcl_start_cll;
  lcvcl["converged"] = model.lcvcl_converged;
  lcvcl["iterations"] = model.lcvcl_iterations;
  lcvcl["n_params"] = model.lcvcl_n_params;
  Json params = Json::array();
  for (const PairCopula& c : model.lcvcl_params)
    params.push_back(Json{{"theta", c.theta}, {"nu", c.nu}});
  lcvcl["params"] = std::move(params);
  j["lcvcl"] = std::move(lcvcl);

  if (model.slcvcl.has_value()) {
    const SlcvclFit& s = *model.slcvcl;
    Json slcvcl;
    slcvcl["cll"] = s.cll;
    slcvcl["start_cll"] = s.start_cll;
    slcvcl["converged"] = s.converged;
    slcvcl["iterations"] = s.iterations;
    slcvcl["n_params"] = SlcvclFit::n_free_params;
    slcvcl["beta"] = beta_json(s.beta);
    slcvcl["start"] = beta_json(s.start);
    slcvcl["clamp_tau"] = s.clamps.tau_clamps;
    slcvcl["clamp_nu"] = s.clamps.nu_clamps;
    j["slcvcl"] = std::move(slcvcl);
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw input_error("cannot write " + path);
  f << j.dump(2) << '\n';
}

FittedModel load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw input_error("cannot read " + path);
  Json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw input_error(std::string("bad model file: ") + e.what());
  }

  FittedModel model;
  model.schema_version = j.at("schema_version").get<int>();
  model.mode = fit_mode_from_name(j.at("mode").get<std::string>());
  model.seed = j.at("seed").get<uint64_t>();

  for (const Json& js : j.at("stations")) {
    Station s;
    s.id = js.at("id").get<int>();
    s.name = js.at("name").get<std::string>();
    s.lon = js.at("lon").get<double>();
    s.lat = js.at("lat").get<double>();
    s.elev = js.at("elev").get<double>();
    model.stations.push_back(std::move(s));
  }
  validate_stations(model.stations);

  const Json& jm = j.at("margins");
  model.margins.stations = model.stations;
  model.margins.period = jm.at("period").get<double>();
  model.margins.t0_day = jm.at("t0_day").get<long>();
  model.margins.ar1 = jm.at("ar1").get<bool>();
  model.margins.elev_coef = jm.at("elev_coef").get<double>();
  for (const Json& js : jm.at("stations")) {
    StationMargin m;
    m.reg = {js.at("intercept").get<double>(), js.at("sin_annual").get<double>(),
             js.at("cos_annual").get<double>(), js.at("sin_semiannual").get<double>(),
             js.at("cos_semiannual").get<double>()};
    m.mu = js.at("mu").get<double>();
    m.sigma = js.at("sigma").get<double>();
    m.eta = js.at("eta").get<double>();
    m.phi = js.at("phi").get<double>();
    model.margins.margins.push_back(m);
  }
  if (model.margins.margins.size() != model.stations.size())
    throw input_error("model file: margins/stations mismatch");

  // The collection is reconstructed from the station geometry (the build is
  // deterministic) and checked against the stored structure.
  const CovariateTable table = build_covariates(model.stations);
  model.collection = build_collection(table);
  const Json& jstr = j.at("structure");
  const Json& jvines = jstr.at("vines");
  if (jvines.size() != model.collection.vines.size())
    throw input_error("model file: vine count mismatch");
  for (size_t s = 0; s < jvines.size(); ++s) {
    const auto roots = jvines[s].at("roots");
    for (int k = 0; k < 4; ++k)
      if (roots[k].get<int>() != model.collection.vines[s].roots[k] + 1)
        throw input_error("model file: vine roots do not match the station geometry");
  }
  const Json& jslots = jstr.at("slots");
  if (jslots.size() != model.collection.slots.size())
    throw input_error("model file: slot count mismatch");
  for (size_t i = 0; i < jslots.size(); ++i) {
    Slot& slot = model.collection.slots[i];
    if (jslots[i].at("tree").get<int>() != slot.tree ||
        jslots[i].at("i").get<int>() != slot.var_i + 1 ||
        jslots[i].at("j").get<int>() != slot.var_j + 1)
      throw input_error("model file: slot layout does not match the station geometry");
    slot.family.kind = family_from_name(jslots[i].at("family").get<std::string>());
    slot.family.rotation = jslots[i].at("rotation").get<int>();
  }

  const Json& jl = j.at("lcvcl");
  model.lcvcl_cll = jl.at("cll").get<double>();
  model.lcvcl_start_cll = jl.at("start_cll").get<double>();
  model.lcvcl_converged = jl.at("converged").get<bool>();
  model.lcvcl_iterations = jl.at("iterations").get<int>();
  model.lcvcl_n_params = jl.at("n_params").get<int>();
  const Json& jp = jl.at("params");
  if (jp.size() != model.collection.slots.size())
    throw input_error("model file: parameter count mismatch");
  model.lcvcl_params.resize(jp.size());
  for (size_t i = 0; i < jp.size(); ++i) {
    model.lcvcl_params[i].family = model.collection.slots[i].family;
    model.lcvcl_params[i].theta = jp[i].at("theta").get<double>();
    model.lcvcl_params[i].nu = jp[i].at("nu").get<double>();
  }

  if (j.contains("slcvcl")) {
    const Json& js = j.at("slcvcl");
    SlcvclFit s;
    s.cll = js.at("cll").get<double>();
    s.start_cll = js.at("start_cll").get<double>();
    s.converged = js.at("converged").get<bool>();
    s.iterations = js.at("iterations").get<int>();
    s.beta = beta_from_json(js.at("beta"));
    s.start = beta_from_json(js.at("start"));
    s.clamps.tau_clamps = js.at("clamp_tau").get<long>();
    s.clamps.nu_clamps = js.at("clamp_nu").get<long>();
    model.slcvcl = s;
  }
  return model;
}

}  // namespace spatvine
