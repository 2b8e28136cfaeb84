#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ecms/problems.hpp"

namespace ecms {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string &where, const std::string &what) {
  throw ConfigError(where + ": " + what);
}

const json &require(const json &obj, const char *key, const std::string &where) {
  if (!obj.is_object() || !obj.contains(key))
    fail(where, std::string("missing field '") + key + "'");
  return obj.at(key);
}

double number(const json &v, const std::string &where) {
  if (!v.is_number())
    fail(where, "expected a number");
  return v.get<double>();
}

int integer(const json &v, const std::string &where) {
  if (!v.is_number_integer())
    fail(where, "expected an integer");
  return v.get<int>();
}

std::string text(const json &v, const std::string &where) {
  if (!v.is_string())
    fail(where, "expected a string");
  return v.get<std::string>();
}

double number_or(const json &obj, const char *key, double fallback, const std::string &where) {
  return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

CoefficientRecipe parse_coefficients(const json &j, const std::string &where) {
  CoefficientRecipe r;
  const std::string type = text(require(j, "type", where), where + ".type");
  r.beta = number_or(j, "beta", 1.0, where);
  if (type == "constant") {
    r.kind = CoefficientRecipe::Kind::constant;
    r.A = number_or(j, "A", 1.0, where);
    r.V = number_or(j, "V", 1.0, where);
  } else if (type == "mie") {
    r.kind = CoefficientRecipe::Kind::mie;
    r.epsilon = number(require(j, "epsilon", where), where + ".epsilon");
    const double p = -std::log2(r.epsilon);
    if (!(r.epsilon > 0.0) || p != std::floor(p))
      fail(where + ".epsilon", "must be a power of two 2^-p");
  } else if (type == "random_field") {
    r.kind = CoefficientRecipe::Kind::random_field;
    const json &seed = require(j, "seed", where);
    if (!seed.is_number_unsigned() && !seed.is_number_integer())
      fail(where + ".seed", "expected a nonnegative integer");
    r.seed = seed.get<std::uint64_t>();
    if (j.contains("lattice"))
      r.lattice = integer(j.at("lattice"), where + ".lattice");
  } else if (type == "grid_file") {
    r.kind = CoefficientRecipe::Kind::grid_file;
    r.path = text(require(j, "path", where), where + ".path");
  } else {
    fail(where + ".type", "unknown coefficient recipe '" + type + "'");
  }
  return r;
}

BoundaryClassification parse_boundary(const json &j, const std::string &where) {
  try {
    if (j.is_string())
      return BoundaryClassification::uniform(boundary_kind_from_string(j.get<std::string>()));
    if (!j.is_array())
      fail(where, "expected a kind name or a list of segments");
    BoundaryClassification bc;
    for (std::size_t s = 0; s < j.size(); ++s) {
      const std::string w = where + "[" + std::to_string(s) + "]";
      const json &seg = j[s];
      BoundarySegment b{};
      b.side = side_from_string(text(require(seg, "side", w), w + ".side"));
      b.kind = boundary_kind_from_string(text(require(seg, "kind", w), w + ".kind"));
      b.from = number_or(seg, "from", 0.0, w);
      b.to = number_or(seg, "to", 1.0, w);
      bc.segments.push_back(b);
    }
    return bc;
  } catch (const ConfigError &e) {
    if (std::string(e.what()).rfind(where, 0) == 0)
      throw;
    fail(where, e.what());
  } catch (const std::exception &e) {
    fail(where, e.what());
  }
}

RhsRecipe parse_rhs(const json &j, const std::string &where) {
  RhsRecipe r;
  const std::string type = text(require(j, "type", where), where + ".type");
  if (type == "zero") {
    r.kind = RhsRecipe::Kind::zero;
  } else if (type == "constant") {
    r.kind = RhsRecipe::Kind::constant;
    r.value = number(require(j, "value", where), where + ".value");
  } else if (type == "bump") {
    r.kind = RhsRecipe::Kind::bump;
    if (j.contains("center")) {
      const json &c = j.at("center");
      if (!c.is_array() || c.size() != 2)
        fail(where + ".center", "expected [x, y]");
      r.center = {number(c[0], where + ".center[0]"), number(c[1], where + ".center[1]")};
    }
    r.scale = number_or(j, "scale", r.scale, where);
    r.radius_sq = number_or(j, "radius_sq", r.radius_sq, where);
  } else if (type == "polynomial") {
    r.kind = RhsRecipe::Kind::polynomial;
    const json &terms = require(j, "terms", where);
    if (!terms.is_array())
      fail(where + ".terms", "expected a list of [coefficient, px, py]");
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string w = where + ".terms[" + std::to_string(t) + "]";
      if (!terms[t].is_array() || terms[t].size() != 3)
        fail(w, "expected [coefficient, px, py]");
      r.terms.push_back({number(terms[t][0], w), integer(terms[t][1], w), integer(terms[t][2], w)});
    }
  } else {
    fail(where + ".type", "unknown rhs recipe '" + type + "'");
  }
  return r;
}

ProblemSpec parse_problem(const json &j, const std::string &where) {
  ProblemSpec p;
  p.name = text(require(j, "name", where), where + ".name");
  p.k = number(require(j, "k", where), where + ".k");
  if (!(p.k >= 0.0))
    fail(where + ".k", "must be nonnegative");
  p.coefficients = parse_coefficients(require(j, "coefficients", where), where + ".coefficients");
  p.boundary = parse_boundary(require(j, "boundary", where), where + ".boundary");
  p.rhs = j.contains("rhs") ? parse_rhs(j.at("rhs"), where + ".rhs") : RhsRecipe{};
  if (j.contains("exact")) {
    const json &e = j.at("exact");
    const std::string w = where + ".exact";
    if (text(require(e, "type", w), w + ".type") != "plane_wave")
      fail(w + ".type", "only plane_wave is supported");
    PlaneWave pw;
    if (e.contains("direction")) {
      const json &d = e.at("direction");
      if (!d.is_array() || d.size() != 2)
        fail(w + ".direction", "expected [dx, dy]");
      pw.dx = number(d[0], w + ".direction[0]");
      pw.dy = number(d[1], w + ".direction[1]");
    }
    if (p.coefficients.kind != CoefficientRecipe::Kind::constant || p.coefficients.A != 1.0 ||
        p.coefficients.V != 1.0 || p.coefficients.beta != 1.0)
      fail(w, "plane_wave needs constant coefficients A = V = beta = 1");
    if (std::abs(pw.dx * pw.dx + pw.dy * pw.dy - 1.0) > 1e-12)
      fail(w + ".direction", "must be a unit vector");
    p.exact = pw;
  }
  return p;
}

} // namespace

RunConfig parse_config(const std::string &json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error &e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  cfg.problem = parse_problem(require(root, "problem", "config"), "problem");

  const json &mesh = require(root, "mesh", "config");
  cfg.grid.nH = integer(require(mesh, "nH", "mesh"), "mesh.nH");
  cfg.grid.refine = integer(require(mesh, "refine", "mesh"), "mesh.refine");
  if (cfg.grid.nH < 2 || cfg.grid.refine < 2)
    fail("mesh", "nH and refine must be at least 2");

  const json &run = require(root, "run", "config");
  const json &ms = require(run, "m_list", "run");
  if (!ms.is_array() || ms.empty())
    fail("run.m_list", "expected a nonempty list");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const int m = integer(ms[i], "run.m_list[" + std::to_string(i) + "]");
    if (m < 0)
      fail("run.m_list", "entries must be nonnegative");
    if (!cfg.m_list.empty() && m <= cfg.m_list.back())
      fail("run.m_list", "must be strictly ascending");
    cfg.m_list.push_back(m);
  }
  if (run.contains("methods")) {
    const json &methods = run.at("methods");
    if (!methods.is_array() || methods.empty())
      fail("run.methods", "expected a nonempty list");
    for (const auto &m : methods) {
      try {
        cfg.methods.push_back(method_from_string(text(m, "run.methods")));
      } catch (const ConfigError &e) {
        if (std::string(e.what()).rfind("run.methods", 0) == 0)
          throw;
        fail("run.methods", e.what());
      }
    }
  } else {
    cfg.methods = {Method::ritz, Method::petrov};
  }
  if (run.contains("reference")) {
    const std::string p = text(run.at("reference"), "run.reference");
    if (p == "compute")
      cfg.reference = ReferencePolicy::compute;
    else if (p == "cached")
      cfg.reference = ReferencePolicy::cached;
    else if (p == "verify-halving")
      cfg.reference = ReferencePolicy::verify_halving;
    else
      fail("run.reference", "expected compute, cached or verify-halving");
  }
  if (run.contains("reference_file"))
    cfg.reference_file = text(run.at("reference_file"), "run.reference_file");
  if (cfg.reference == ReferencePolicy::cached && cfg.reference_file.empty())
    fail("run.reference_file", "required by the cached reference policy");
  if (run.contains("basis_cache"))
    cfg.basis_cache = text(run.at("basis_cache"), "run.basis_cache");
  cfg.C_P = number_or(run, "C_P", 1.0, "run");
  if (!(cfg.C_P > 0.0))
    fail("run.C_P", "must be positive");
  if (run.contains("parallel")) {
    if (!run.at("parallel").is_boolean())
      fail("run.parallel", "expected true or false");
    cfg.parallel = run.at("parallel").get<bool>();
  }
  return cfg;
}

RunConfig load_config(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig &cfg) {
  json j;
  const auto &p = cfg.problem;
  j["problem"]["name"] = p.name;
  j["problem"]["k"] = p.k;
  json c;
  switch (p.coefficients.kind) {
  case CoefficientRecipe::Kind::constant:
    c = {{"type", "constant"}, {"A", p.coefficients.A}, {"V", p.coefficients.V}};
    break;
  case CoefficientRecipe::Kind::mie: c = {{"type", "mie"}, {"epsilon", p.coefficients.epsilon}}; break;
  case CoefficientRecipe::Kind::random_field:
    c = {{"type", "random_field"}, {"seed", p.coefficients.seed}, {"lattice", p.coefficients.lattice}};
    break;
  case CoefficientRecipe::Kind::grid_file: c = {{"type", "grid_file"}, {"path", p.coefficients.path}}; break;
  }
  c["beta"] = p.coefficients.beta;
  j["problem"]["coefficients"] = c;
  json segs = json::array();
  for (const auto &s : p.boundary.segments)
    segs.push_back({{"side", to_string(s.side)}, {"from", s.from}, {"to", s.to}, {"kind", to_string(s.kind)}});
  j["problem"]["boundary"] = segs;
  json rhs;
  switch (p.rhs.kind) {
  case RhsRecipe::Kind::zero: rhs = {{"type", "zero"}}; break;
  case RhsRecipe::Kind::constant: rhs = {{"type", "constant"}, {"value", p.rhs.value.real()}}; break;
  case RhsRecipe::Kind::bump:
    rhs = {{"type", "bump"}, {"center", {p.rhs.center[0], p.rhs.center[1]}}, {"scale", p.rhs.scale},
           {"radius_sq", p.rhs.radius_sq}};
    break;
  case RhsRecipe::Kind::polynomial: {
    json terms = json::array();
    for (const auto &t : p.rhs.terms)
      terms.push_back({t.coefficient, t.px, t.py});
    rhs = {{"type", "polynomial"}, {"terms", terms}};
    break;
  }
  }
  j["problem"]["rhs"] = rhs;
  if (p.exact)
    j["problem"]["exact"] = {{"type", "plane_wave"}, {"direction", {p.exact->dx, p.exact->dy}}};
  j["mesh"] = {{"nH", cfg.grid.nH}, {"refine", cfg.grid.refine}};
  json methods = json::array();
  for (Method m : cfg.methods)
    methods.push_back(to_string(m));
  j["run"] = {{"m_list", cfg.m_list}, {"methods", methods}, {"reference", to_string(cfg.reference)},
              {"C_P", cfg.C_P}, {"parallel", cfg.parallel}};
  if (!cfg.reference_file.empty())
    j["run"]["reference_file"] = cfg.reference_file;
  if (!cfg.basis_cache.empty())
    j["run"]["basis_cache"] = cfg.basis_cache;
  return j.dump(2);
}

} // namespace ecms
