// spatvine command line: simulate | fit | predict | validate.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "spatvine/model_io.hpp"
#include "spatvine/synth.hpp"

namespace sv = spatvine;
namespace fs = std::filesystem;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNoConvergence = 4;
constexpr int kExitMissingTime = 5;

std::vector<sv::FamilyKind> parse_families(const std::string& spec) {
  if (spec == "all")
    return {sv::FamilyKind::gaussian, sv::FamilyKind::student_t, sv::FamilyKind::clayton,
            sv::FamilyKind::gumbel, sv::FamilyKind::frank};
  if (spec == "gaussian-only") return {sv::FamilyKind::gaussian};
  std::vector<sv::FamilyKind> out;
  std::string cur;
  for (char c : spec + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(sv::family_from_name(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (out.empty()) throw sv::input_error("empty family set");
  return out;
}

void print_beta_table(const sv::SlcvclFit& fit) {
  std::printf("%-4s %-16s %10s %10s\n", "no.", "par", "start", "mcle");
  for (int i = 0; i < sv::SpatialParam::kDim; ++i)
    std::printf("%-4d %-16s %10.4f %10.4f\n", i + 1, sv::SpatialParam::names()[i].c_str(),
                fit.start.get(i), fit.beta.get(i));
}

sv::Matrix obs_matrix_checked(const sv::ObsTable& obs, const std::vector<sv::Station>& stations) {
  if (obs.station_ids.size() != stations.size())
    throw sv::input_error("observation columns do not match the station list");
  for (size_t i = 0; i < stations.size(); ++i)
    if (obs.station_ids[i] != stations[i].id)
      throw sv::input_error("observation column order must follow station ids");
  return obs.y;
}

int cmd_fit(const std::string& stations_path, const std::string& obs_path,
            const std::string& families, const std::string& mode, const std::string& out,
            bool ar1, uint64_t seed) {
  const std::vector<sv::Station> stations = sv::read_stations_csv(stations_path);
  const sv::ObsTable obs = sv::read_obs_csv(obs_path);
  const sv::Matrix y = obs_matrix_checked(obs, stations);

  sv::FitConfig cfg;
  cfg.mode = sv::fit_mode_from_name(mode);
  cfg.families = parse_families(families);
  cfg.margins.ar1 = ar1;
  cfg.seed = seed;

  const sv::FittedModel model = sv::fit_pipeline(stations, y, obs.days, cfg);
  sv::save_model(model, out);

  std::printf("margins: %d stations, period %.2f\n", model.margins.station_count(),
              model.margins.period);
  std::printf("lcvcl: cll %.4f (start %.4f), %d free parameters, %s\n", model.lcvcl_cll,
              model.lcvcl_start_cll, model.lcvcl_n_params,
              model.lcvcl_converged ? "converged" : "NOT converged");
  bool converged = model.lcvcl_converged;
  if (model.slcvcl.has_value()) {
    std::printf("slcvcl: cll %.4f (start %.4f), %d free parameters, %s\n", model.slcvcl->cll,
                model.slcvcl->start_cll, sv::SlcvclFit::n_free_params,
                model.slcvcl->converged ? "converged" : "NOT converged");
    std::printf("clamp diagnostics: tau %ld, nu %ld\n", model.slcvcl->clamps.tau_clamps,
                model.slcvcl->clamps.nu_clamps);
    print_beta_table(*model.slcvcl);
    converged = converged && model.slcvcl->converged;
  }
  std::printf("model written to %s\n", out.c_str());
  return converged ? 0 : kExitNoConvergence;
}

int cmd_predict(const std::string& model_path, const std::string& coords,
                const std::string& obs_path, const std::string& times, int m, uint64_t seed,
                const std::string& out, bool with_samples) {
  const sv::FittedModel model = sv::load_model(model_path);
  const sv::ObsTable obs = sv::read_obs_csv(obs_path);

  double lon, lat, elev;
  if (std::sscanf(coords.c_str(), "%lf,%lf,%lf", &lon, &lat, &elev) != 3)
    throw sv::input_error("--coords expects LON,LAT,ELEV");

  sv::PredictRequest req;
  req.lon = lon;
  req.lat = lat;
  req.elev = elev;
  req.ensemble = m;
  req.seed = seed;

  std::vector<std::string> dates;
  if (times == "all") {
    req.rows.resize(obs.days.size());
    for (size_t i = 0; i < obs.days.size(); ++i) req.rows[i] = static_cast<int>(i);
    dates = obs.dates;
  } else {
    const size_t colon = times.find(':');
    if (colon == std::string::npos)
      throw sv::input_error("--times expects FROM:TO (ISO dates) or 'all'");
    const long from = sv::parse_iso_date(times.substr(0, colon));
    const long to = sv::parse_iso_date(times.substr(colon + 1));
    if (to < from) throw sv::input_error("--times range is empty");
    std::map<long, int> row_of;
    for (size_t i = 0; i < obs.days.size(); ++i) row_of[obs.days[i]] = static_cast<int>(i);
    for (long day = from; day <= to; ++day) {
      const auto it = row_of.find(day);
      if (it == row_of.end()) {
        std::fprintf(stderr, "error: requested time %s not present in observations\n",
                     sv::iso_from_days(day).c_str());
        return kExitMissingTime;
      }
      req.rows.push_back(it->second);
      dates.push_back(sv::iso_from_days(day));
    }
  }

  const sv::PredictResult res = sv::predict_from_model(model, obs, req);
  sv::write_prediction_csv(out, dates, res.samples, res.missing, with_samples);
  std::printf("predictions for %zu times written to %s\n", dates.size(), out.c_str());
  return 0;
}

int cmd_validate(const std::vector<std::string>& model_paths, const std::string& stations_path,
                 const std::string& truth_path, const std::string& obs_path,
                 const std::string& out_dir, int m, uint64_t seed) {
  const std::vector<sv::Station> val_stations = sv::read_stations_csv(stations_path);
  const sv::ObsTable truth = sv::read_obs_csv(truth_path);
  const sv::ObsTable train_obs = sv::read_obs_csv(obs_path);
  if (truth.station_ids.size() != val_stations.size())
    throw sv::input_error("truth columns do not match the validation station list");

  fs::create_directories(out_dir);

  std::vector<std::string> names;
  std::vector<std::vector<sv::ScoreSeries>> scores;
  for (const std::string& path : model_paths) {
    const sv::FittedModel model = sv::load_model(path);
    names.push_back(fs::path(path).stem().string());
    scores.push_back(sv::validate_model(model, train_obs, val_stations, truth, m, seed));
    sv::write_scores_csv(out_dir + "/scores_" + names.back() + ".csv", scores.back(),
                         truth.dates);
  }

  // Comparison table: per-station mean CRPS per model, then pairwise
  // outperformance shares.
  const std::string table_path = out_dir + "/comparison.csv";
  std::ofstream tf(table_path, std::ios::binary);
  tf << "station,name";
  for (const std::string& n : names) tf << ",crps_" << n;
  for (size_t a = 0; a < names.size(); ++a)
    for (size_t b = 0; b < names.size(); ++b)
      if (a != b) tf << ",outperf_" << names[a] << "_vs_" << names[b];
  tf << '\n';
  std::vector<sv::AveragedScores> avg;
  for (const auto& sc : scores) avg.push_back(sv::averaged_scores(sc));
  std::vector<std::vector<double>> outp;
  for (size_t a = 0; a < names.size(); ++a)
    for (size_t b = 0; b < names.size(); ++b)
      if (a != b) outp.push_back(sv::outperformance(scores[a], scores[b]));
  for (size_t v = 0; v < val_stations.size(); ++v) {
    tf << val_stations[v].id << ',' << val_stations[v].name;
    for (const auto& a : avg) tf << ',' << sv::format_double(a.per_station[v]);
    for (const auto& o : outp) tf << ',' << sv::format_double(o[v]);
    tf << '\n';
  }
  tf << "mean,";
  for (const auto& a : avg) tf << ',' << sv::format_double(a.overall);
  for (const auto& o : outp) {
    double s = 0.0;
    for (double x : o) s += x;
    tf << ',' << sv::format_double(s / o.size());
  }
  tf << '\n';
  tf.close();

  for (size_t a = 0; a < names.size(); ++a)
    for (size_t b = a + 1; b < names.size(); ++b) {
      const sv::ScoreDifference diff = sv::score_difference_series(scores[a], scores[b]);
      sv::write_difference_csv(out_dir + "/diff_" + names[a] + "_" + names[b] + ".csv",
                               truth.dates, diff, names[a], names[b]);
    }

  std::printf("validation outputs written to %s\n", out_dir.c_str());
  for (size_t i = 0; i < names.size(); ++i)
    std::printf("  %-20s mean CRPS %.4f\n", names[i].c_str(), avg[i].overall);
  return 0;
}

sv::Placement parse_placement(const std::string& s) {
  if (s == "clustered") return sv::Placement::clustered;
  if (s == "uniform") return sv::Placement::uniform;
  if (s == "grid") return sv::Placement::grid;
  throw sv::input_error("unknown placement: " + s);
}

int cmd_simulate(int d, int n, uint64_t seed, const std::string& beta_path,
                 const std::string& family, const std::string& placement, bool no_calibrate,
                 const std::string& out_dir) {
  sv::SynthOptions opts;
  opts.d = d;
  opts.seed = seed;
  opts.placement = parse_placement(placement);
  opts.calibrate = !no_calibrate;
  opts.family = sv::family_from_name(family);
  if (!beta_path.empty()) {
    // A beta file is a JSON object keyed by the 16 component labels.
    std::ifstream f(beta_path);
    if (!f) throw sv::input_error("cannot read " + beta_path);
    nlohmann::json j;
    try {
      f >> j;
    } catch (const std::exception& e) {
      throw sv::input_error(std::string("bad beta file: ") + e.what());
    }
    for (int i = 0; i < sv::SpatialParam::kDim; ++i)
      opts.beta.set(i, j.at(sv::SpatialParam::names()[i]).get<double>());
  }

  const sv::SyntheticWorld world = sv::make_world(opts);
  const sv::SynthData data = sv::generate(world, n);

  fs::create_directories(out_dir);
  sv::write_stations_csv(out_dir + "/stations.csv", world.stations);
  sv::ObsTable obs;
  obs.dates = data.dates;
  obs.days = data.days;
  for (const sv::Station& s : world.stations) obs.station_ids.push_back(s.id);
  obs.y = data.obs;
  sv::write_obs_csv(out_dir + "/obs.csv", obs);
  sv::ObsTable cop = obs;
  cop.y = data.copula;
  sv::write_obs_csv(out_dir + "/copula_truth.csv", cop);

  nlohmann::ordered_json jb;
  for (int i = 0; i < sv::SpatialParam::kDim; ++i)
    jb[sv::SpatialParam::names()[i]] = world.beta.get(i);
  std::ofstream bf(out_dir + "/truth_beta.json", std::ios::binary);
  bf << jb.dump(2) << '\n';

  std::printf("synthetic world: d=%d n=%d seed=%llu written to %s\n", d, n,
              static_cast<unsigned long long>(seed), out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatial dependence modeling with local C-vine composite likelihoods"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker thread count (0 = hardware default)");

  auto* fit = app.add_subcommand("fit", "fit a model from station and observation CSVs");
  std::string f_stations, f_obs, f_out, f_families = "all", f_mode = "slcvcl";
  bool f_ar1 = false;
  uint64_t f_seed = 0;
  fit->add_option("--stations", f_stations, "station CSV")->required();
  fit->add_option("--obs", f_obs, "observation CSV")->required();
  fit->add_option("--families", f_families, "allowed families: 'all' or comma list");
  fit->add_option("--mode", f_mode, "lcvcl | slcvcl | gauss-baseline");
  fit->add_option("--out", f_out, "output model JSON")->required();
  fit->add_flag("--ar1", f_ar1, "AR(1) pre-whitening of marginal residuals");
  fit->add_option("--seed", f_seed, "seed recorded in the model file");

  auto* predict = app.add_subcommand("predict", "predict at coordinates from a fitted model");
  std::string p_model, p_coords, p_obs, p_times = "all", p_out;
  int p_m = 1000;
  uint64_t p_seed = 1;
  bool p_samples = false;
  predict->add_option("--model", p_model, "model JSON")->required();
  predict->add_option("--coords", p_coords, "LON,LAT,ELEV")->required();
  predict->add_option("--obs", p_obs, "neighbor observation CSV")->required();
  predict->add_option("--times", p_times, "FROM:TO (ISO dates) or 'all'");
  predict->add_option("--m", p_m, "ensemble size");
  predict->add_option("--seed", p_seed, "random seed");
  predict->add_option("--out", p_out, "output CSV")->required();
  predict->add_flag("--samples", p_samples, "emit individual sample columns");

  auto* validate = app.add_subcommand("validate", "score models at held-out stations");
  std::vector<std::string> v_models;
  std::string v_stations, v_truth, v_obs, v_outdir;
  int v_m = 1000;
  uint64_t v_seed = 1;
  validate->add_option("--model", v_models, "model JSON (repeatable)")->required();
  validate->add_option("--stations", v_stations, "validation station CSV")->required();
  validate->add_option("--truth", v_truth, "validation observation CSV")->required();
  validate->add_option("--obs", v_obs, "training observation CSV")->required();
  validate->add_option("--out-dir", v_outdir, "output directory")->required();
  validate->add_option("--m", v_m, "ensemble size");
  validate->add_option("--seed", v_seed, "random seed");

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic world");
  int s_d = 10, s_n = 1000;
  uint64_t s_seed = 1;
  std::string s_beta, s_outdir, s_family = "gaussian", s_placement = "clustered";
  bool s_nocal = false;
  simulate->add_option("--d", s_d, "station count (>= 4)");
  simulate->add_option("--n", s_n, "series length");
  simulate->add_option("--seed", s_seed, "random seed");
  simulate->add_option("--beta", s_beta, "JSON file with the 16 link coefficients");
  simulate->add_option("--family", s_family, "generator family");
  simulate->add_option("--placement", s_placement, "clustered | uniform | grid");
  simulate->add_flag("--no-calibrate", s_nocal, "use the link coefficients as given");
  simulate->add_option("--out-dir", s_outdir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitInput;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (*fit) return cmd_fit(f_stations, f_obs, f_families, f_mode, f_out, f_ar1, f_seed);
    if (*predict)
      return cmd_predict(p_model, p_coords, p_obs, p_times, p_m, p_seed, p_out, p_samples);
    if (*validate)
      return cmd_validate(v_models, v_stations, v_truth, v_obs, v_outdir, v_m, v_seed);
    if (*simulate)
      return cmd_simulate(s_d, s_n, s_seed, s_beta, s_family, s_placement, s_nocal, s_outdir);
  } catch (const sv::input_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const sv::numeric_error& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return 0;
}
