#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ecms/basis.hpp"
#include "ecms/galerkin.hpp"
#include "ecms/local.hpp"
#include "ecms/problems.hpp"

namespace ecms {

/// Everything that depends on the coefficients but not on the data.
struct OfflineStage {
  ElementSolvers elements;
  PatchSolvers patches;
  NodalBasis nodal;
  EdgeBasisSet edges;
  bool from_cache = false;
  double seconds = 0.0;
};

/// Number of times build_offline has run in this process.
int offline_stage_count();

OfflineStage build_offline(const Problem &problem, int m, Execution exec,
                           const std::string &basis_cache = "");

/// u^b (+ u^p) and u^s for the problem data, plus their sum.
struct SourceParts {
  Vector bubble;
  Vector special;
  Vector offset;
  double seconds = 0.0;
};

SourceParts build_source_parts(const Problem &problem, const OfflineStage &offline, Execution exec);

/// Fine system shared by every online solve.
struct FineSystem {
  SparseMatrix K;
  SparseMatrix G; ///< energy Gram
  Vector F;
};
FineSystem assemble_fine_system(const Problem &problem);

struct OnlineResult {
  OnlineSolution solution;
  CoarseSystem system;
  bool truncated = false;
};

OnlineResult run_online(const Problem &problem, const OfflineStage &offline, const FineSystem &fine,
                        const SourceParts &parts, int m, Method method);

/// Relative differences between the solutions at h and h/2, measured on the
/// h/2 grid.
struct HalvingReport {
  static constexpr double kEnergyThreshold = 5e-2;
  static constexpr double kL2Threshold = 5e-4;

  double diff_L2 = 0.0;
  double diff_H = 0.0;
  bool pass_L2 = false;
  bool pass_H = false;
  bool passed() const { return pass_L2 && pass_H; }
};

HalvingReport verify_reference(const ProblemSpec &spec, const GridSpec &grid);

struct SweepResult {
  std::vector<SolveReport> rows;
  MeshAssumption assumption;
  std::optional<HalvingReport> halving;
  int offline_builds = 0;
  bool any_error = false;
};

SweepResult run_sweep(const RunConfig &cfg, std::ostream *log = nullptr);

std::string csv_header();
/// Errors with 17 significant digits, timings with microsecond resolution.
std::string csv_row(const SolveReport &r);
void write_csv(std::ostream &os, const std::vector<SolveReport> &rows);

/// All singular values of R_e for one edge.
RealVector edge_spectrum(const RunConfig &cfg, int edge);

/// Mesh, coefficient and assumption summary.
std::string describe(const RunConfig &cfg);

} // namespace ecms
