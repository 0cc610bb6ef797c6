// Serial reference kernels against their OpenMP counterparts.
//
//   bench_kernels [P] [n] [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "ultra/experiment.hpp"
#include "ultra/generate.hpp"
#include "ultra/metric.hpp"
#include "ultra/serial.hpp"
#include "ultra/ultrametry.hpp"

namespace {

double seconds(const std::function<void()>& fn, int repeats) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / repeats;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-24s serial %10.4f ms   omp %10.4f ms   speedup %5.2fx\n", name, serial * 1e3,
              parallel * 1e3, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t levels = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 6;  // P = 2^levels
  const std::size_t n = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 4096;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 5;

  ultra::GenSpecIndependent spec{std::vector<std::size_t>(levels, 2),
                                 std::vector<double>(levels, 10.0), n};
  const ultra::PointCloud cloud = ultra::generate_independent(spec, ultra::Seed{1, {}});
  std::printf("P = %zu points, n = %zu, threads = %d\n", cloud.size(), n, omp_get_max_threads());

  ultra::DistanceMatrix d;
  const double ds = seconds([&] { d = ultra::serial::distance_matrix(cloud.points, 2.0); }, repeats);
  const double dp = seconds([&] { d = ultra::distance_matrix(cloud.points, 2.0); }, repeats);
  report("distance_matrix", ds, dp);

  double u = 0.0;
  const double us = seconds([&] { u = ultra::serial::ultrametricity_degree(d.entries); }, repeats);
  const double up = seconds([&] { u = ultra::ultrametricity_degree(d.entries); }, repeats);
  report("ultrametricity_degree", us, up);
  std::printf("U = %.6f\n", u);

  ultra::Matrix sub;
  const double ss = seconds([&] { sub = ultra::serial::subdominant_ultrametric(d.entries); }, repeats);
  const double sp = seconds([&] { sub = ultra::subdominant_ultrametric(d.entries); }, repeats);
  report("subdominant (FW vs MST)", ss, sp);

  const std::vector<std::size_t> ns{64, 256, 1024};
  ultra::GenSpecIndependent small{{2, 2, 2}, {10, 10, 10}, 1};
  const auto sweep = [&] { ultra::sweep_ultrametricity(small, ns, 64, 7); };
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double ws = seconds(sweep, 1);
  omp_set_num_threads(saved);
  const double wp = seconds(sweep, 1);
  report("sweep (R=64)", ws, wp);
  return 0;
}
