#include <cstring>
#include <fstream>

#include "ecms/basis.hpp"

namespace ecms {

namespace {

constexpr char kMagic[8] = {'E', 'C', 'M', 'S', 'B', 'A', 'S', '\0'};
constexpr std::uint32_t kVersion = 1;

struct Fnv1a {
  std::uint64_t h = 14695981039346656037ull;
  void bytes(const void *p, std::size_t n) {
    const auto *c = static_cast<const unsigned char *>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ull;
    }
  }
  template <class T> void value(const T &v) { bytes(&v, sizeof(T)); }
  void doubles(const std::vector<double> &v) {
    value(v.size());
    bytes(v.data(), v.size() * sizeof(double));
  }
};

template <class T> void put(std::ostream &os, const T &v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <class T> bool get(std::istream &is, T &v) {
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  return static_cast<bool>(is);
}

} // namespace

std::uint64_t coefficient_hash(const TwoLevelMesh &mesh, const CoefficientField &coeff) {
  Fnv1a f;
  f.value(coeff.k);
  f.value(mesh.spec.nH);
  f.value(mesh.spec.refine);
  for (const auto &s : mesh.bc.segments) {
    f.value(s.side);
    f.value(s.from);
    f.value(s.to);
    f.value(s.kind);
  }
  f.doubles(coeff.A);
  f.doubles(coeff.V);
  for (const auto &b : coeff.beta)
    f.doubles(b);
  return f.h;
}

void save_edge_bases(const std::string &path, std::uint64_t hash, const TwoLevelMesh &mesh,
                     const EdgeBasisSet &set) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot write basis cache " + path);
  os.write(kMagic, sizeof(kMagic));
  put(os, kVersion);
  put(os, hash);
  put(os, static_cast<std::int32_t>(mesh.spec.nH));
  put(os, static_cast<std::int32_t>(mesh.spec.refine));
  put(os, static_cast<std::int32_t>(set.edges.size()));
  put(os, static_cast<std::int32_t>(set.m));
  for (const auto &b : set.edges) {
    put(os, static_cast<std::int32_t>(b.edge));
    put(os, static_cast<std::int32_t>(b.singular_values.size()));
    os.write(reinterpret_cast<const char *>(b.singular_values.data()),
             static_cast<std::streamsize>(b.singular_values.size() * sizeof(double)));
    put(os, static_cast<std::int32_t>(b.vectors.rows()));
    put(os, static_cast<std::int32_t>(b.vectors.cols()));
    // column-major, re/im interleaved
    os.write(reinterpret_cast<const char *>(b.vectors.data()),
             static_cast<std::streamsize>(b.vectors.size() * sizeof(Complex)));
    put(os, static_cast<std::uint8_t>(b.truncated));
    put(os, static_cast<std::uint8_t>(b.regularized));
  }
  if (!os)
    throw std::runtime_error("failed writing basis cache " + path);
}

std::optional<EdgeBasisSet> load_edge_bases(const std::string &path, std::uint64_t hash,
                                            const TwoLevelMesh &mesh,
                                            const ElementSolvers &elements, int m) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    return std::nullopt;
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    return std::nullopt;
  std::uint32_t version = 0;
  std::uint64_t stored_hash = 0;
  std::int32_t nH = 0, refine = 0, num_edges = 0, stored_m = 0;
  if (!get(is, version) || version != kVersion || !get(is, stored_hash) || stored_hash != hash ||
      !get(is, nH) || !get(is, refine) || !get(is, num_edges) || !get(is, stored_m))
    return std::nullopt;
  if (nH != mesh.spec.nH || refine != mesh.spec.refine ||
      num_edges != static_cast<std::int32_t>(mesh.edges.size()) || stored_m < m)
    return std::nullopt;

  EdgeBasisSet set;
  set.m = m;
  set.edges.resize(num_edges);
  for (auto &b : set.edges) {
    std::int32_t edge = 0, nvalues = 0, rows = 0, cols = 0;
    if (!get(is, edge) || !get(is, nvalues) || edge < 0 || edge >= num_edges || nvalues < 0)
      return std::nullopt;
    b.edge = edge;
    b.singular_values.resize(nvalues);
    is.read(reinterpret_cast<char *>(b.singular_values.data()),
            static_cast<std::streamsize>(nvalues * sizeof(double)));
    if (!get(is, rows) || !get(is, cols) || rows < 0 || cols < 0)
      return std::nullopt;
    Matrix vectors(rows, cols);
    is.read(reinterpret_cast<char *>(vectors.data()),
            static_cast<std::streamsize>(vectors.size() * sizeof(Complex)));
    std::uint8_t truncated = 0, regularized = 0;
    if (!get(is, truncated) || !get(is, regularized))
      return std::nullopt;
    if (rows != static_cast<std::int32_t>(mesh.edge_dofs(edge).size()))
      return std::nullopt;
    const int keep = std::min<int>(cols, m);
    b.vectors = vectors.leftCols(keep);
    b.truncated = keep < m;
    b.regularized = regularized != 0;
  }
  for (auto &b : set.edges)
    attach_edge_functions(mesh, elements, b);
  return set;
}

} // namespace ecms
