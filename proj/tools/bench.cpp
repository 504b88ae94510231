// Benchmark of the composite-likelihood kernels: serial reference walk vs
// the parallel generic kernel vs the Gaussian z-scale fast path, plus
// conditional-sampling throughput.
#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "spatvine/lcvcl.hpp"
#include "spatvine/predict.hpp"
#include "spatvine/rng.hpp"
#include "spatvine/synth.hpp"

namespace sv = spatvine;
using clock_type = std::chrono::steady_clock;

namespace {

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  int d = 30, n = 2000, reps = 5;
  if (argc > 1) d = std::atoi(argv[1]);
  if (argc > 2) n = std::atoi(argv[2]);
  if (argc > 3) reps = std::atoi(argv[3]);

  sv::SynthOptions opts;
  opts.d = d;
  opts.seed = 99;
  const sv::SyntheticWorld world = sv::make_world(opts);
  const sv::SynthData data = sv::generate(world, n);
  sv::VineCollection col = sv::build_collection(world.table);

  // Gaussian parameter set from the generating links.
  for (sv::Slot& s : col.slots) s.family = sv::Family{sv::FamilyKind::gaussian, 0};
  const std::vector<sv::PairCopula> gauss_params =
      sv::spatial_slot_params(col, world.beta);

  // Student-t parameter set exercises the generic kernel.
  for (sv::Slot& s : col.slots) s.family = sv::Family{sv::FamilyKind::student_t, 0};
  const std::vector<sv::PairCopula> t_params = sv::spatial_slot_params(col, world.beta);

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("composite log-likelihood kernels, d=%d n=%d (%d threads, best of %d)\n", d, n,
              threads, reps);

  auto time_best = [&](auto&& fn) {
    double best = 1e300, value = 0.0;
    for (int r = 0; r < reps; ++r) {
      const auto t0 = clock_type::now();
      value = fn();
      best = std::min(best, ms_since(t0));
    }
    return std::pair<double, double>(best, value);
  };

  {
    auto [t_ref, v_ref] = time_best(
        [&] { return sv::composite_loglik_reference(col, gauss_params, data.copula); });
    sv::CompositeEvaluator eval(col, data.copula);
    auto [t_fast, v_fast] = time_best([&] { return eval.loglik(gauss_params); });
    std::printf("  gaussian   reference %10.2f ms   kernel %10.2f ms   speedup %6.1fx   |dcll| %.2e\n",
                t_ref, t_fast, t_ref / t_fast, std::fabs(v_ref - v_fast));
  }
  {
    auto [t_ref, v_ref] =
        time_best([&] { return sv::composite_loglik_reference(col, t_params, data.copula); });
    sv::CompositeEvaluator eval(col, data.copula);
    auto [t_gen, v_gen] = time_best([&] { return eval.loglik(t_params); });
    std::printf("  student-t  reference %10.2f ms   kernel %10.2f ms   speedup %6.1fx   |dcll| %.2e\n",
                t_ref, t_gen, t_ref / t_gen, std::fabs(v_ref - v_gen));
  }

  {
    const sv::Station& target = world.stations[d - 1];
    std::vector<sv::Station> train(world.stations.begin(), world.stations.end() - 1);
    for (size_t i = 0; i < train.size(); ++i) train[i].id = static_cast<int>(i) + 1;
    const sv::CovariateTable table = sv::build_covariates(train);
    const sv::PredictiveModel pm = sv::build_predictive_model(
        target.lon, target.lat, target.elev, train, table, world.beta);
    const sv::CounterRng rng(7);
    const int draws = 20000;
    const auto t0 = clock_type::now();
    double acc = 0.0;
    for (int i = 0; i < draws; ++i)
      acc += sv::condition_sample(pm, {0.3, 0.6, 0.5}, rng.uniform(i));
    const double dt = ms_since(t0);
    std::printf("conditional sampling: %d draws in %.2f ms (%.1f kdraw/s, mean %.3f)\n", draws,
                dt, draws / dt, acc / draws);
  }
  return 0;
}
