#include "ecms/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace ecms {

namespace {

std::atomic<int> g_offline_builds{0};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string format(const char *fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

void append_flag(std::string &flags, const std::string &flag) {
  if (!flags.empty())
    flags += ';';
  flags += flag;
}

// Reference cache: magic, coefficient hash, node count, complex values.
constexpr char kRefMagic[8] = {'E', 'C', 'M', 'S', 'R', 'E', 'F', '\0'};

std::optional<Vector> load_reference(const std::string &path, std::uint64_t hash, int nodes) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    return std::nullopt;
  char magic[8];
  std::uint64_t h = 0;
  std::int64_t n = 0;
  is.read(magic, 8);
  is.read(reinterpret_cast<char *>(&h), sizeof(h));
  is.read(reinterpret_cast<char *>(&n), sizeof(n));
  if (!is || std::memcmp(magic, kRefMagic, 8) != 0 || h != hash || n != nodes)
    return std::nullopt;
  Vector u(nodes);
  is.read(reinterpret_cast<char *>(u.data()), static_cast<std::streamsize>(nodes * sizeof(Complex)));
  if (!is)
    return std::nullopt;
  return u;
}

void save_reference(const std::string &path, std::uint64_t hash, const Vector &u) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot write reference cache " + path);
  const std::int64_t n = u.size();
  os.write(kRefMagic, 8);
  os.write(reinterpret_cast<const char *>(&hash), sizeof(hash));
  os.write(reinterpret_cast<const char *>(&n), sizeof(n));
  os.write(reinterpret_cast<const char *>(u.data()), static_cast<std::streamsize>(n * sizeof(Complex)));
}

// The data enters the cache key as well as the coefficients.
std::uint64_t reference_hash(const Problem &p, const ProblemSpec &spec) {
  std::uint64_t h = coefficient_hash(p.mesh, p.coeff);
  for (char c : spec.name)
    h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  const std::string rhs = std::to_string(static_cast<int>(spec.rhs.kind)) +
                          format("%.17g", spec.rhs.scale) + format("%.17g", spec.rhs.value.real()) +
                          std::to_string(spec.rhs.terms.size()) + (spec.exact ? "pw" : "");
  for (char c : rhs)
    h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  return h;
}

} // namespace

int offline_stage_count() { return g_offline_builds.load(); }

OfflineStage build_offline(const Problem &problem, int m, Execution exec,
                           const std::string &basis_cache) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto &mesh = problem.mesh;
  ElementSolvers elements(mesh, problem.coeff, exec);
  PatchSolvers patches(mesh, problem.coeff, exec);
  NodalBasis nodal = build_nodal_basis(mesh, elements, exec);
  OfflineStage stage{std::move(elements), std::move(patches), std::move(nodal), {}, false, 0.0};
  const std::uint64_t hash = coefficient_hash(mesh, problem.coeff);
  std::optional<EdgeBasisSet> cached;
  if (!basis_cache.empty())
    cached = load_edge_bases(basis_cache, hash, mesh, stage.elements, m);
  if (cached) {
    stage.edges = std::move(*cached);
    stage.from_cache = true;
  } else {
    stage.edges = build_edge_bases(mesh, problem.coeff, stage.elements, &stage.patches, m, exec);
    if (!basis_cache.empty())
      save_edge_bases(basis_cache, hash, mesh, stage.edges);
  }
  stage.seconds = seconds_since(t0);
  ++g_offline_builds;
  return stage;
}

SourceParts build_source_parts(const Problem &problem, const OfflineStage &offline, Execution exec) {
  const auto t0 = std::chrono::steady_clock::now();
  SourceParts parts;
  parts.bubble = bubble_part(problem.mesh, offline.elements, problem.src, exec);
  parts.special = build_u_s(problem.mesh, problem.coeff, offline.elements, &offline.patches,
                            problem.src, exec);
  parts.offset = parts.bubble + parts.special;
  parts.seconds = seconds_since(t0);
  return parts;
}

FineSystem assemble_fine_system(const Problem &problem) {
  const Rect all = problem.mesh.full_rect();
  FineSystem fs;
  fs.K = assemble_sesquilinear(problem.mesh, problem.coeff, all, FormKind::primal);
  fs.G = assemble_energy_gram(problem.mesh, problem.coeff, all);
  fs.F = assemble_load(problem.mesh, all, problem.src.f) +
         assemble_boundary_load(problem.mesh, all, problem.src.g);
  return fs;
}

OnlineResult run_online(const Problem &problem, const OfflineStage &offline, const FineSystem &fine,
                        const SourceParts &parts, int m, Method method) {
  if (m > offline.edges.m)
    throw NumericalError("m=" + std::to_string(m) + " exceeds the offline basis size " +
                         std::to_string(offline.edges.m));
  const TrialSpace ts = assemble_trial_space(problem.mesh, offline.nodal, offline.edges, m);
  OnlineResult out;
  for (const auto &e : offline.edges.edges)
    if (static_cast<int>(e.functions.size()) < m)
      out.truncated = true;
  out.system = assemble_coarse(fine.K, fine.G, ts, method);
  out.solution = solve_online(out.system, fine.K, fine.F, parts.offset);
  return out;
}

HalvingReport verify_reference(const ProblemSpec &spec, const GridSpec &grid) {
  const Problem coarse = instantiate(spec, grid);
  const Problem fine = instantiate(spec, GridSpec{grid.nH, 2 * grid.refine});
  const ReferenceSolution uc = solve_reference(coarse.mesh, coarse.coeff, coarse.src);
  const ReferenceSolution uf = solve_reference(fine.mesh, fine.coeff, fine.src);
  const Vector up = prolongate(uc.u, coarse.mesh.n());
  const ErrorNorms norms(fine.mesh, fine.coeff);
  const ErrorPair e = compute_errors(norms, up, uf.u);
  HalvingReport r;
  r.diff_L2 = e.e_L2;
  r.diff_H = e.e_H;
  r.pass_L2 = e.e_L2 <= HalvingReport::kL2Threshold;
  r.pass_H = e.e_H <= HalvingReport::kEnergyThreshold;
  return r;
}

SweepResult run_sweep(const RunConfig &cfg, std::ostream *log) {
  const Execution exec = cfg.parallel ? Execution::parallel : Execution::serial;
  auto say = [&](const std::string &s) {
    if (log)
      *log << s << std::endl;
  };
  SweepResult result;
  const Problem problem = instantiate(cfg.problem, cfg.grid);
  result.assumption = check_mesh_assumption(problem.mesh, problem.coeff, cfg.C_P);

  std::string common_flags;
  if (!result.assumption.satisfied) {
    append_flag(common_flags, "mesh_assumption_violated");
    say("warning: H=" + format("%g", result.assumption.H) + " exceeds the mesh-size bound " +
        format("%g", result.assumption.bound));
  }

  auto make_row = [&](int m, Method method) {
    SolveReport r;
    r.problem = cfg.problem.name;
    r.method = method;
    r.k = cfg.problem.k;
    r.nH = cfg.grid.nH;
    r.refine = cfg.grid.refine;
    r.m = m;
    return r;
  };
  auto fail_all = [&](const std::string &what) {
    for (int m : cfg.m_list)
      for (Method method : cfg.methods) {
        SolveReport r = make_row(m, method);
        r.e_L2 = r.e_H = std::numeric_limits<double>::quiet_NaN();
        r.flags = common_flags;
        append_flag(r.flags, "error:" + what);
        result.rows.push_back(r);
      }
    result.any_error = true;
  };

  if (cfg.reference == ReferencePolicy::verify_halving) {
    say("verifying the reference against the h/2 solution");
    try {
      result.halving = verify_reference(cfg.problem, cfg.grid);
      append_flag(common_flags, "halving_L2=" + format("%.3e", result.halving->diff_L2));
      append_flag(common_flags, "halving_H=" + format("%.3e", result.halving->diff_H));
      append_flag(common_flags, result.halving->passed() ? "halving_pass" : "halving_fail");
    } catch (const NumericalError &e) {
      append_flag(common_flags, "halving_error");
      say(std::string("halving check failed: ") + e.what());
    }
  }

  Vector u_ref;
  try {
    say("reference solve");
    std::optional<Vector> cached;
    const std::uint64_t hash = reference_hash(problem, cfg.problem);
    if (cfg.reference == ReferencePolicy::cached)
      cached = load_reference(cfg.reference_file, hash, problem.mesh.num_fine_nodes());
    if (cached) {
      u_ref = std::move(*cached);
    } else {
      u_ref = solve_reference(problem.mesh, problem.coeff, problem.src).u;
      if (cfg.reference == ReferencePolicy::cached)
        save_reference(cfg.reference_file, hash, u_ref);
    }
  } catch (const NumericalError &e) {
    fail_all(std::string("reference: ") + e.what());
    return result;
  }

  int m_max = 0;
  for (int m : cfg.m_list)
    m_max = std::max(m_max, m);
  std::optional<OfflineStage> offline;
  std::optional<SourceParts> parts;
  try {
    say("offline stage, m=" + std::to_string(m_max));
    offline.emplace(build_offline(problem, m_max, exec, cfg.basis_cache));
    ++result.offline_builds;
    parts.emplace(build_source_parts(problem, *offline, exec));
  } catch (const NumericalError &e) {
    fail_all(std::string("offline: ") + e.what());
    return result;
  }
  bool regularized = false;
  for (const auto &e : offline->edges.edges)
    regularized = regularized || e.regularized;
  if (regularized)
    append_flag(common_flags, "regularized");

  const FineSystem fine = assemble_fine_system(problem);
  const ErrorNorms norms(problem.mesh, problem.coeff);
  for (int m : cfg.m_list) {
    for (Method method : cfg.methods) {
      SolveReport r = make_row(m, method);
      r.offline_sec = offline->seconds;
      r.flags = common_flags;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const OnlineResult online = run_online(problem, *offline, fine, *parts, m, method);
        const ErrorPair e = compute_errors(norms, online.solution.u, u_ref);
        r.coarse_dim = online.system.dim();
        r.e_L2 = e.e_L2;
        r.e_H = e.e_H;
        if (e.absolute)
          append_flag(r.flags, "absolute_error");
        if (online.truncated)
          append_flag(r.flags, "truncated");
        if (online.system.global_rank_check)
          append_flag(r.flags, "rank_check_dropped=" + std::to_string(online.system.dropped_columns));
        append_flag(r.flags, "sigma_min=" + format("%.3e", online.solution.sigma_min));
      } catch (const NumericalError &e) {
        r.e_L2 = r.e_H = std::numeric_limits<double>::quiet_NaN();
        append_flag(r.flags, std::string("error:") + e.what());
        result.any_error = true;
      }
      r.online_sec = seconds_since(t0) + parts->seconds;
      say(to_string(method) + " m=" + std::to_string(m) + " e_L2=" + format("%.3e", r.e_L2) +
          " e_H=" + format("%.3e", r.e_H));
      result.rows.push_back(r);
    }
  }
  return result;
}

std::string csv_header() {
  return "problem,method,k,nH,refine,m,coarse_dim,e_L2,e_H,offline_sec,online_sec,flags";
}

std::string csv_row(const SolveReport &r) {
  std::ostringstream os;
  std::string flags = r.flags;
  for (char &c : flags)
    if (c == ',' || c == '\n' || c == '"')
      c = ' ';
  os << r.problem << ',' << to_string(r.method) << ',' << format("%.17g", r.k) << ',' << r.nH << ','
     << r.refine << ',' << r.m << ',' << r.coarse_dim << ',' << format("%.17g", r.e_L2) << ','
     << format("%.17g", r.e_H) << ',' << format("%.6f", r.offline_sec) << ','
     << format("%.6f", r.online_sec) << ',' << flags;
  return os.str();
}

void write_csv(std::ostream &os, const std::vector<SolveReport> &rows) {
  os << csv_header() << '\n';
  for (const auto &r : rows)
    os << csv_row(r) << '\n';
}

RealVector edge_spectrum(const RunConfig &cfg, int edge) {
  const Problem problem = instantiate(cfg.problem, cfg.grid);
  if (edge < 0 || edge >= static_cast<int>(problem.mesh.edges.size()))
    throw ConfigError("edge id " + std::to_string(edge) + " out of range [0, " +
                      std::to_string(problem.mesh.edges.size()) + ")");
  const ElementSolvers elements(problem.mesh, problem.coeff, Execution::serial);
  const LocalProblem patch(problem.mesh, problem.coeff, oversampling_domain(problem.mesh, edge).rect,
                           "oversampling patch of edge " + std::to_string(edge));
  const auto rd = build_restriction(problem.mesh, problem.coeff, patch, elements, edge);
  return edge_svd(rd, 0).singular_values;
}

std::string describe(const RunConfig &cfg) {
  const Problem p = instantiate(cfg.problem, cfg.grid);
  const auto &mesh = p.mesh;
  const MeshAssumption a = check_mesh_assumption(mesh, p.coeff, cfg.C_P);
  int counts[4] = {0, 0, 0, 0};
  for (NodeTag t : mesh.tags)
    ++counts[static_cast<int>(t)];
  std::ostringstream os;
  os << "problem      " << cfg.problem.name << "\n"
     << "k            " << cfg.problem.k << "\n"
     << "grid         nH=" << cfg.grid.nH << " refine=" << cfg.grid.refine
     << " H=" << mesh.spec.H() << " h=" << mesh.spec.h() << "\n"
     << "fine nodes   " << mesh.num_fine_nodes() << " (interior " << counts[0] << ", dirichlet "
     << counts[1] << ", neumann " << counts[2] << ", robin " << counts[3] << ")\n"
     << "coarse       |N_H|=" << mesh.coarse_nodes.size() << " |E_H|=" << mesh.edges.size()
     << " |T_H|=" << mesh.elements.size() << "\n"
     << "A            [" << p.coeff.A_min() << ", " << p.coeff.A_max() << "]\n"
     << "V            [" << p.coeff.V_min() << ", " << p.coeff.V_max() << "]\n";
  os << "boundary    ";
  for (const auto &s : mesh.bc.segments)
    os << ' ' << to_string(s.side) << "[" << s.from << "," << s.to << "]=" << to_string(s.kind);
  os << "\n";
  int m_max = 0;
  for (int m : cfg.m_list)
    m_max = std::max(m_max, m);
  os << "coarse dim   " << mesh.coarse_nodes.size() + static_cast<std::size_t>(m_max) * mesh.edges.size()
     << " at m=" << m_max << " (Petrov)\n";
  os << "mesh check   H=" << a.H << " bound=" << a.bound << " (C_P=" << cfg.C_P << ") "
     << (a.satisfied ? "satisfied" : "VIOLATED (advisory)") << "\n";
  return os.str();
}

} // namespace ecms
