#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecms/common.hpp"
#include "ecms/fem.hpp"
#include "ecms/galerkin.hpp"
#include "ecms/local.hpp"
#include "ecms/mesh.hpp"

namespace ecms {

// Counter-based random numbers (SplitMix64 finalizer over seed, stream and index).

std::uint64_t splitmix64(std::uint64_t z);

class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t bits(std::uint64_t index) const;
  /// Uniform in (0, 1] with 53 random bits.
  double uniform(std::uint64_t index) const;
  /// Unit Gaussian by Box-Muller on uniforms 2i and 2i+1 (cosine branch).
  double gaussian(std::uint64_t index) const;

private:
  std::uint64_t key_;
};

/// xi on the unit square: i.i.d. unit Gaussians on a (cells+1)^2 lattice,
/// interpolated bilinearly.
class LatticeField {
public:
  LatticeField(std::uint64_t seed, std::uint64_t stream, int cells = 128);
  double operator()(double x, double y) const;
  double at_lattice(int i, int j) const { return values_[j * (cells_ + 1) + i]; }
  int cells() const { return cells_; }

private:
  int cells_;
  std::vector<double> values_;
};

/// Sub-streams for the three random coefficients.
enum class FieldStream : std::uint64_t { A = 1, V = 2, beta = 3 };

/// Membership in the inclusion set of the high-contrast example.
bool in_mie_inclusion(double epsilon, double x, double y);
double mie_A(double epsilon, double x, double y);

struct CoefficientRecipe {
  enum class Kind { constant, mie, random_field, grid_file } kind = Kind::constant;
  double A = 1.0, V = 1.0, beta = 1.0; ///< constants (beta also for mie and grid_file)
  double epsilon = 0.0625;
  std::uint64_t seed = 0;
  int lattice = 128;
  std::string path;
};

/// Samples at fine-cell midpoints and boundary fine-edge midpoints.
CoefficientField build_coefficients(const TwoLevelMesh &mesh, double k,
                                    const CoefficientRecipe &recipe);

struct PolynomialTerm {
  double coefficient = 0.0;
  int px = 0, py = 0;
};

struct RhsRecipe {
  enum class Kind { zero, constant, bump, polynomial } kind = Kind::zero;
  Complex value = 0.0;
  std::array<double, 2> center{0.125, 0.5};
  double scale = 10000.0;
  double radius_sq = 1.0 / 400.0;
  std::vector<PolynomialTerm> terms;
};

ScalarField make_rhs(const RhsRecipe &recipe);

/// scale * exp(-1 / (1 - dist^2 / radius_sq)) inside the disk, 0 outside.
ScalarField rhs_bump(double zx, double zy, double scale, double radius_sq = 1.0 / 400.0);

struct PlaneWave {
  double dx = 0.6, dy = 0.8;
};

/// exp(-ik (dx x + dy y)).
ScalarField plane_wave(double k, const PlaneWave &pw);
/// g = A grad(u).nu - ik beta u for A = beta = 1 on every side.
BoundaryFlux plane_wave_flux(double k, const PlaneWave &pw);

struct ProblemSpec {
  std::string name;
  double k = 0.0;
  CoefficientRecipe coefficients;
  BoundaryClassification boundary;
  RhsRecipe rhs;
  std::optional<PlaneWave> exact;
};

/// Everything a solve needs at one resolution.
struct Problem {
  TwoLevelMesh mesh;
  CoefficientField coeff;
  SourceTerms src;
  ScalarField exact; ///< empty without an exact solution
};

Problem instantiate(const ProblemSpec &spec, const GridSpec &grid);

// Built-in experiments at desk scale.
ProblemSpec planar_wave_problem(double k = 32.0);
ProblemSpec mie_problem(double epsilon = 0.0625, double k = 9.0);
ProblemSpec mixed_random_problem(std::uint64_t seed = 2024, double k = 32.0);

enum class ReferencePolicy { compute, cached, verify_halving };
std::string to_string(ReferencePolicy p);

struct RunConfig {
  ProblemSpec problem;
  GridSpec grid;
  std::vector<int> m_list;
  std::vector<Method> methods;
  ReferencePolicy reference = ReferencePolicy::compute;
  std::string reference_file; ///< used by the cached policy
  std::string basis_cache;    ///< optional
  double C_P = 1.0;
  bool parallel = true;
};

/// Throws ConfigError with a path-like location on malformed input.
RunConfig parse_config(const std::string &json_text);
RunConfig load_config(const std::string &path);
std::string config_to_json(const RunConfig &cfg);

} // namespace ecms
