// Offline stage and source parts, serial against OpenMP, on one problem.
#include <chrono>
#include <cstdio>

#include "ecms/sweep.hpp"

using namespace ecms;

namespace {

double seconds(auto &&fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char **argv) {
  const int nH = argc > 1 ? std::atoi(argv[1]) : 8;
  const int refine = argc > 2 ? std::atoi(argv[2]) : 16;
  const int m = argc > 3 ? std::atoi(argv[3]) : 5;
  const Problem problem = instantiate(planar_wave_problem(32.0), GridSpec{nH, refine});
  std::printf("planar wave k=32 nH=%d refine=%d m=%d threads=%d\n", nH, refine, m, max_threads());

  double diff = 0.0;
  Vector offsets[2];
  for (Execution exec : {Execution::serial, Execution::parallel}) {
    std::optional<OfflineStage> off;
    const double t_off = seconds([&] { off.emplace(build_offline(problem, m, exec)); });
    std::optional<SourceParts> parts;
    const double t_src = seconds([&] { parts.emplace(build_source_parts(problem, *off, exec)); });
    offsets[exec == Execution::parallel] = parts->offset;
    std::printf("%-8s offline %8.3f s   source parts %8.3f s\n",
                exec == Execution::serial ? "serial" : "parallel", t_off, t_src);
  }
  diff = (offsets[0] - offsets[1]).cwiseAbs().maxCoeff();
  std::printf("max |serial - parallel| = %.3e\n", diff);
  return diff == 0.0 ? 0 : 1;
}
