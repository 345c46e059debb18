// Serial reference against the OpenMP kernels; also checks that both
// produce identical output.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include <omp.h>

#include "commoncv/datasets.hpp"
#include "commoncv/gpq.hpp"
#include "commoncv/simharness.hpp"

using namespace commoncv;

namespace {

double best_of(int runs, const std::function<void()>& f) {
  double best = 1e300;
  for (int i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-34s %10.4f %10.4f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::int64_t m = argc > 1 ? std::atoll(argv[1]) : 1'000'000;
  const std::int64_t reps = argc > 2 ? std::atoll(argv[2]) : 500;
  std::printf("threads=%d  m=%lld  reps=%lld\n", omp_get_max_threads(), static_cast<long long>(m),
              static_cast<long long>(reps));
  std::printf("%-34s %10s %10s %9s\n", "", "serial[s]", "openmp[s]", "speedup");

  for (const auto& [name, study] : {std::pair{"draws, two surveys (k=2)", datasets::mcv_surveys()},
                                    std::pair{"draws, four hospitals (k=4)", datasets::hospitals()}}) {
    PivotalDrawSet a, b;
    const double ts = best_of(3, [&] { a = reference::generate_all_draws(study, m, 1); });
    const double tp = best_of(3, [&] { b = generate_all_draws(study, m, 1); });
    row(name, ts, tp, a.combined == b.combined && a.tian == b.tian && a.fresh == b.fresh);
  }

  SimConfig c;
  c.phi = 0.3;
  c.mus = {1, 5, 10};
  c.ns = {10, 20, 30};
  c.reps = reps;
  c.m = kDeskDraws;
  SimResult a, b;
  const double ts = best_of(1, [&] { a = run_study_serial(c); });
  const double tp = best_of(1, [&] { b = run_study(c); });
  bool same = true;
  for (std::size_t j = 0; j < a.methods.size(); ++j) {
    same = same && a.methods[j].covered == b.methods[j].covered &&
           a.methods[j].avg_length == b.methods[j].avg_length;
  }
  row("coverage study, one cell", ts, tp, same);
  return 0;
}
