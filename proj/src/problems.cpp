#include "ecms/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace ecms {

std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed) ^ (stream * kGolden))) {}

std::uint64_t CounterRng::bits(std::uint64_t index) const {
  return splitmix64(key_ + (index + 1) * kGolden);
}

double CounterRng::uniform(std::uint64_t index) const {
  return static_cast<double>((bits(index) >> 11) + 1) * 0x1.0p-53;
}

double CounterRng::gaussian(std::uint64_t index) const {
  const double u1 = uniform(2 * index);
  const double u2 = uniform(2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

LatticeField::LatticeField(std::uint64_t seed, std::uint64_t stream, int cells) : cells_(cells) {
  if (cells < 1)
    throw ConfigError("random field lattice needs at least one cell");
  const CounterRng rng(seed, stream);
  values_.resize(static_cast<std::size_t>(cells + 1) * (cells + 1));
  for (std::size_t i = 0; i < values_.size(); ++i)
    values_[i] = rng.gaussian(i);
}

double LatticeField::operator()(double x, double y) const {
  const double sx = x * cells_, sy = y * cells_;
  const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, cells_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, cells_ - 1);
  const double a = sx - i, b = sy - j;
  return (1 - a) * (1 - b) * at_lattice(i, j) + a * (1 - b) * at_lattice(i + 1, j) +
         (1 - a) * b * at_lattice(i, j + 1) + a * b * at_lattice(i + 1, j + 1);
}

bool in_mie_inclusion(double epsilon, double x, double y) {
  auto inside = [](double t) { return t > 0.25 && t < 0.75; };
  if (!inside(x) || !inside(y))
    return false;
  const double fx = x / epsilon - std::floor(x / epsilon);
  const double fy = y / epsilon - std::floor(y / epsilon);
  return inside(fx) && inside(fy);
}

double mie_A(double epsilon, double x, double y) {
  return in_mie_inclusion(epsilon, x, y) ? epsilon * epsilon : 1.0;
}

namespace {

struct GridFile {
  int nx = 0, ny = 0;
  std::vector<double> A, V;

  double lookup(const std::vector<double> &v, double x, double y) const {
    const int i = std::clamp(static_cast<int>(std::floor(x * nx)), 0, nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor(y * ny)), 0, ny - 1);
    return v[static_cast<std::size_t>(j) * nx + i];
  }
};

// Plain text: "nx ny", then nx*ny values of A (rows bottom to top), then V.
GridFile read_grid_file(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw ConfigError("cannot open coefficient grid file '" + path + "'");
  GridFile g;
  if (!(is >> g.nx >> g.ny) || g.nx < 1 || g.ny < 1)
    throw ConfigError("coefficient grid file '" + path + "': bad header");
  const std::size_t count = static_cast<std::size_t>(g.nx) * g.ny;
  for (auto *v : {&g.A, &g.V}) {
    v->resize(count);
    for (auto &x : *v)
      if (!(is >> x) || !(x > 0.0))
        throw ConfigError("coefficient grid file '" + path + "': expected " +
                          std::to_string(2 * count) + " positive values");
  }
  return g;
}

// Midpoint of fine boundary edge t on a side.
std::pair<double, double> boundary_midpoint(Side side, int t, double h) {
  const double s = (t + 0.5) * h;
  switch (side) {
  case Side::bottom: return {s, 0.0};
  case Side::top: return {s, 1.0};
  case Side::left: return {0.0, s};
  case Side::right: return {1.0, s};
  }
  return {0.0, 0.0};
}

} // namespace

CoefficientField build_coefficients(const TwoLevelMesh &mesh, double k,
                                    const CoefficientRecipe &recipe) {
  if (!(k >= 0.0))
    throw ConfigError("wavenumber must be nonnegative");
  using Kind = CoefficientRecipe::Kind;
  if (recipe.kind == Kind::constant) {
    if (!(recipe.A > 0.0 && recipe.V > 0.0 && recipe.beta > 0.0))
      throw ConfigError("constant coefficients must be positive");
    return CoefficientField::constant(mesh, k, recipe.A, recipe.V, recipe.beta);
  }
  CoefficientField c = CoefficientField::constant(mesh, k, 1.0, 1.0, recipe.beta);
  const int n = mesh.n();
  const double h = mesh.spec.h();
  auto each_cell = [&](auto &&fn) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        fn(static_cast<std::size_t>(j) * n + i, (i + 0.5) * h, (j + 0.5) * h);
  };
  switch (recipe.kind) {
  case Kind::mie:
    if (!(recipe.epsilon > 0.0))
      throw ConfigError("mie epsilon must be positive");
    each_cell([&](std::size_t c_id, double x, double y) { c.A[c_id] = mie_A(recipe.epsilon, x, y); });
    break;
  case Kind::random_field: {
    const LatticeField xa(recipe.seed, static_cast<std::uint64_t>(FieldStream::A), recipe.lattice);
    const LatticeField xv(recipe.seed, static_cast<std::uint64_t>(FieldStream::V), recipe.lattice);
    const LatticeField xb(recipe.seed, static_cast<std::uint64_t>(FieldStream::beta),
                          recipe.lattice);
    each_cell([&](std::size_t c_id, double x, double y) {
      c.A[c_id] = std::abs(xa(x, y)) + 0.5;
      c.V[c_id] = std::abs(xv(x, y)) + 0.5;
    });
    for (int s = 0; s < 4; ++s)
      for (int t = 0; t < n; ++t) {
        const auto [x, y] = boundary_midpoint(static_cast<Side>(s), t, h);
        c.beta[s][t] = std::abs(xb(x, y)) + 0.5;
      }
    break;
  }
  case Kind::grid_file: {
    const GridFile g = read_grid_file(recipe.path);
    each_cell([&](std::size_t c_id, double x, double y) {
      c.A[c_id] = g.lookup(g.A, x, y);
      c.V[c_id] = g.lookup(g.V, x, y);
    });
    break;
  }
  case Kind::constant: break;
  }
  return c;
}

ScalarField rhs_bump(double zx, double zy, double scale, double radius_sq) {
  return [=](double x, double y) -> Complex {
    const double d2 = (x - zx) * (x - zx) + (y - zy) * (y - zy);
    if (d2 >= radius_sq)
      return 0.0;
    return scale * std::exp(-1.0 / (1.0 - d2 / radius_sq));
  };
}

ScalarField make_rhs(const RhsRecipe &recipe) {
  switch (recipe.kind) {
  case RhsRecipe::Kind::zero: return {};
  case RhsRecipe::Kind::constant: {
    const Complex v = recipe.value;
    return [v](double, double) -> Complex { return v; };
  }
  case RhsRecipe::Kind::bump:
    return rhs_bump(recipe.center[0], recipe.center[1], recipe.scale, recipe.radius_sq);
  case RhsRecipe::Kind::polynomial: {
    const auto terms = recipe.terms;
    return [terms](double x, double y) -> Complex {
      double s = 0.0;
      for (const auto &t : terms)
        s += t.coefficient * std::pow(x, t.px) * std::pow(y, t.py);
      return s;
    };
  }
  }
  return {};
}

ScalarField plane_wave(double k, const PlaneWave &pw) {
  return [=](double x, double y) { return std::exp(-I * k * (pw.dx * x + pw.dy * y)); };
}

BoundaryFlux plane_wave_flux(double k, const PlaneWave &pw) {
  return [=](double x, double y, Side side) {
    const Complex u = std::exp(-I * k * (pw.dx * x + pw.dy * y));
    double dn = 0.0; // d . nu
    switch (side) {
    case Side::bottom: dn = -pw.dy; break;
    case Side::top: dn = pw.dy; break;
    case Side::left: dn = -pw.dx; break;
    case Side::right: dn = pw.dx; break;
    }
    return -I * k * dn * u - I * k * u;
  };
}

Problem instantiate(const ProblemSpec &spec, const GridSpec &grid) {
  Problem p{build_mesh(grid, spec.boundary), {}, {}, {}};
  p.coeff = build_coefficients(p.mesh, spec.k, spec.coefficients);
  p.src.f = make_rhs(spec.rhs);
  if (spec.exact) {
    p.exact = plane_wave(spec.k, *spec.exact);
    p.src.g = plane_wave_flux(spec.k, *spec.exact);
    p.src.dirichlet = p.exact;
  }
  return p;
}

ProblemSpec planar_wave_problem(double k) {
  ProblemSpec s;
  s.name = "planar_wave";
  s.k = k;
  s.boundary = BoundaryClassification::uniform(BoundaryKind::robin);
  s.exact = PlaneWave{};
  return s;
}

ProblemSpec mie_problem(double epsilon, double k) {
  ProblemSpec s;
  s.name = "mie";
  s.k = k;
  s.coefficients.kind = CoefficientRecipe::Kind::mie;
  s.coefficients.epsilon = epsilon;
  s.boundary = BoundaryClassification::uniform(BoundaryKind::robin);
  s.rhs.kind = RhsRecipe::Kind::bump;
  return s;
}

ProblemSpec mixed_random_problem(std::uint64_t seed, double k) {
  ProblemSpec s;
  s.name = "mixed_random";
  s.k = k;
  s.coefficients.kind = CoefficientRecipe::Kind::random_field;
  s.coefficients.seed = seed;
  s.boundary.segments = {{Side::bottom, 0.0, 1.0, BoundaryKind::dirichlet},
                         {Side::top, 0.0, 1.0, BoundaryKind::neumann},
                         {Side::left, 0.0, 1.0, BoundaryKind::robin},
                         {Side::right, 0.0, 1.0, BoundaryKind::robin}};
  s.rhs.kind = RhsRecipe::Kind::polynomial;
  s.rhs.terms = {{1.0, 4, 0}, {-1.0, 0, 3}, {1.0, 0, 0}};
  return s;
}

std::string to_string(ReferencePolicy p) {
  switch (p) {
  case ReferencePolicy::compute: return "compute";
  case ReferencePolicy::cached: return "cached";
  case ReferencePolicy::verify_halving: return "verify-halving";
  }
  return "";
}

} // namespace ecms
