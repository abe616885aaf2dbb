#pragma once

// Triangulated-disc domain: storage, validation, uniform refinement and the
// small pile of combinatorial helpers (edge tables, subcomplex rims, cotangent
// weights) that the analysis modules share.
//
// Conventions: triangles are CCW in the domain plane; `boundary` lists the
// boundary vertices as one CCW cycle.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "core.hpp"

namespace saddlekit {

struct DiscMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> boundary;  // cyclic, CCW

  [[nodiscard]] int vertex_count() const { return static_cast<int>(vertices.size()); }
  [[nodiscard]] int triangle_count() const { return static_cast<int>(triangles.size()); }
};

inline double triangle_area(const DiscMesh& m, int t) {
  const auto& tr = m.triangles[static_cast<size_t>(t)];
  Vec2 a = m.vertices[static_cast<size_t>(tr[0])];
  Vec2 b = m.vertices[static_cast<size_t>(tr[1])];
  Vec2 c = m.vertices[static_cast<size_t>(tr[2])];
  return 0.5 * (b - a).cross(c - a);
}

inline double mesh_area(const DiscMesh& m) {
  double s = 0;
  for (int t = 0; t < m.triangle_count(); ++t) s += triangle_area(m, t);
  return s;
}

// ---- edge table -----------------------------------------------------------

struct MeshEdge {
  int a = -1, b = -1;    // a < b
  int tri[2] = {-1, -1}; // incident triangles (tri[1] == -1 on the boundary)
  [[nodiscard]] bool on_boundary() const { return tri[1] < 0; }
};

struct EdgeTable {
  std::vector<MeshEdge> edges;
  std::unordered_map<std::uint64_t, int> index;  // key(a,b) -> edge id

  static std::uint64_t key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }
  [[nodiscard]] int find(int a, int b) const {
    auto it = index.find(key(a, b));
    return it == index.end() ? -1 : it->second;
  }
};

inline EdgeTable build_edge_table(const DiscMesh& m) {
  EdgeTable et;
  et.edges.reserve(m.triangles.size() * 2);
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto& tr = m.triangles[static_cast<size_t>(t)];
    for (int k = 0; k < 3; ++k) {
      int a = tr[static_cast<size_t>(k)], b = tr[static_cast<size_t>((k + 1) % 3)];
      std::uint64_t kk = EdgeTable::key(a, b);
      auto it = et.index.find(kk);
      if (it == et.index.end()) {
        MeshEdge e;
        e.a = std::min(a, b); e.b = std::max(a, b);
        e.tri[0] = t;
        et.index.emplace(kk, static_cast<int>(et.edges.size()));
        et.edges.push_back(e);
      } else {
        MeshEdge& e = et.edges[static_cast<size_t>(it->second)];
        if (e.tri[1] < 0) e.tri[1] = t;
        else e.tri[1] = -2;  // over-shared; validation reports it
      }
    }
  }
  return et;
}

inline std::vector<bool> boundary_vertex_flags(const DiscMesh& m) {
  std::vector<bool> flags(static_cast<size_t>(m.vertex_count()), false);
  for (int v : m.boundary) {
    if (v >= 0 && v < m.vertex_count()) flags[static_cast<size_t>(v)] = true;
  }
  return flags;
}

// ---- validation -----------------------------------------------------------

struct Violation {
  std::string code;
  std::string message;
  std::vector<int> indices;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;

  void add(std::string code, std::string message, std::vector<int> idx = {}) {
    ok = false;
    violations.push_back({std::move(code), std::move(message), std::move(idx)});
  }
};

namespace detail {

// Duplicate detection on a hash grid, so validation stays near-linear.
inline void check_duplicate_vertices(const DiscMesh& m, ValidationReport& rep) {
  double cell = std::max(kTolGeom * 4.0, 1e-12);
  auto key = [cell](Vec2 p) {
    auto qx = static_cast<std::int64_t>(std::floor(p.x / cell));
    auto qy = static_cast<std::int64_t>(std::floor(p.y / cell));
    return (static_cast<std::uint64_t>(qx) << 32) ^ static_cast<std::uint64_t>(qy & 0xffffffff);
  };
  std::unordered_map<std::uint64_t, std::vector<int>> grid;
  for (int v = 0; v < m.vertex_count(); ++v) {
    Vec2 p = m.vertices[static_cast<size_t>(v)];
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(key({p.x + dx * cell, p.y + dy * cell}));
        if (it == grid.end()) continue;
        for (int u : it->second) {
          if ((m.vertices[static_cast<size_t>(u)] - p).norm() <= kTolGeom) {
            rep.add("duplicate_vertex", "vertices closer than 1e-9", {u, v});
            return;  // one witness pair is enough
          }
        }
      }
    }
    grid[key(p)].push_back(v);
  }
}

}  // namespace detail

// Checks the disc invariants: index ranges, no duplicate vertices, CCW
// non-degenerate triangles, 1-or-2 triangles per edge with opposite oriented
// use, a single boundary cycle matching `boundary`, and V - E + F = 1.
inline ValidationReport validate_disc_mesh(const DiscMesh& m) {
  ValidationReport rep;
  int nv = m.vertex_count();

  if (nv < 3 || m.triangles.empty()) {
    rep.add("empty", "mesh needs at least one triangle and three vertices");
    return rep;
  }
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto& tr = m.triangles[static_cast<size_t>(t)];
    for (int k = 0; k < 3; ++k) {
      if (tr[static_cast<size_t>(k)] < 0 || tr[static_cast<size_t>(k)] >= nv) {
        rep.add("index_range", "triangle references a missing vertex", {t});
        return rep;
      }
    }
    if (tr[0] == tr[1] || tr[1] == tr[2] || tr[0] == tr[2]) {
      rep.add("degenerate_triangle", "repeated vertex in triangle", {t});
    }
  }
  for (int v : m.boundary) {
    if (v < 0 || v >= nv) {
      rep.add("index_range", "boundary references a missing vertex", {v});
      return rep;
    }
  }

  detail::check_duplicate_vertices(m, rep);

  for (int t = 0; t < m.triangle_count(); ++t) {
    double a = triangle_area(m, t);
    if (std::abs(a) <= kTolGeom * kTolGeom) {
      rep.add("degenerate_triangle", "triangle area below tolerance", {t});
    } else if (a < 0) {
      rep.add("inconsistent_orientation", "triangle wound clockwise", {t});
    }
  }

  // Oriented edge use: each directed edge at most once, i.e. the two triangles
  // of an interior edge traverse it in opposite directions.
  std::unordered_map<std::uint64_t, int> directed;
  auto dkey = [](int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  };
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto& tr = m.triangles[static_cast<size_t>(t)];
    for (int k = 0; k < 3; ++k) {
      int a = tr[static_cast<size_t>(k)], b = tr[static_cast<size_t>((k + 1) % 3)];
      auto [it, inserted] = directed.emplace(dkey(a, b), t);
      if (!inserted) {
        rep.add("inconsistent_orientation",
                "directed edge used by two triangles", {it->second, t});
      }
    }
  }

  EdgeTable et = build_edge_table(m);
  std::vector<std::pair<int, int>> boundary_dir;  // directed boundary edges a->b
  for (const auto& e : et.edges) {
    if (e.tri[1] == -2) {
      rep.add("edge_incidence", "edge shared by more than two triangles", {e.a, e.b});
    }
    if (e.on_boundary()) {
      // Recover the direction the unique triangle uses.
      const auto& tr = m.triangles[static_cast<size_t>(e.tri[0])];
      for (int k = 0; k < 3; ++k) {
        int a = tr[static_cast<size_t>(k)], b = tr[static_cast<size_t>((k + 1) % 3)];
        if (EdgeTable::key(a, b) == EdgeTable::key(e.a, e.b)) {
          boundary_dir.emplace_back(a, b);
          break;
        }
      }
    }
  }

  // Euler characteristic of a disc.
  long chi = static_cast<long>(nv) - static_cast<long>(et.edges.size()) +
             static_cast<long>(m.triangle_count());
  if (chi != 1) {
    std::ostringstream msg;
    msg << "Euler characteristic " << chi << ", expected 1";
    rep.add("euler_characteristic", msg.str());
  }

  // Boundary edges must chain into a single cycle equal (cyclically) to the
  // stored boundary.
  if (boundary_dir.empty()) {
    rep.add("boundary_cycle", "mesh has no boundary edges");
    return rep;
  }
  std::unordered_map<int, int> next;
  bool branching = false;
  for (auto [a, b] : boundary_dir) {
    if (!next.emplace(a, b).second) branching = true;
  }
  if (branching) {
    rep.add("boundary_cycle", "boundary edges branch");
    return rep;
  }
  std::vector<int> cycle;
  cycle.push_back(boundary_dir.front().first);
  for (size_t i = 0; i < boundary_dir.size(); ++i) {
    auto it = next.find(cycle.back());
    if (it == next.end()) break;
    if (it->second == cycle.front()) break;
    cycle.push_back(it->second);
  }
  if (cycle.size() != boundary_dir.size()) {
    rep.add("boundary_cycle", "boundary edges form more than one cycle");
  } else if (cycle.size() != m.boundary.size()) {
    rep.add("boundary_mismatch", "stored boundary has the wrong length");
  } else {
    // Compare cyclically (orientation included).
    auto rot = std::find(cycle.begin(), cycle.end(), m.boundary.front());
    bool match = rot != cycle.end();
    if (match) {
      size_t off = static_cast<size_t>(rot - cycle.begin());
      for (size_t i = 0; i < cycle.size(); ++i) {
        if (m.boundary[i] != cycle[(off + i) % cycle.size()]) { match = false; break; }
      }
    }
    if (!match) rep.add("boundary_mismatch", "stored boundary differs from traced cycle");
  }

  return rep;
}

// ---- cotangent machinery ---------------------------------------------------

// Corner angle at triangle vertex `k` (0..2) in the domain metric.
inline double corner_angle(const DiscMesh& m, int t, int k) {
  const auto& tr = m.triangles[static_cast<size_t>(t)];
  Vec2 p = m.vertices[static_cast<size_t>(tr[static_cast<size_t>(k)])];
  Vec2 q = m.vertices[static_cast<size_t>(tr[static_cast<size_t>((k + 1) % 3)])];
  Vec2 r = m.vertices[static_cast<size_t>(tr[static_cast<size_t>((k + 2) % 3)])];
  Vec2 u = q - p, v = r - p;
  return std::atan2(std::abs(u.cross(v)), u.dot(v));
}

inline double cotangent(double angle) {
  return std::cos(angle) / std::sin(angle);
}

// Per-edge weights w_e = (cot a + cot b)/2 over the domain metric; a boundary
// edge has a single cotangent. With these weights the Dirichlet energy of a PL
// map is exactly  sum_e w_e |f(i)-f(j)|^2.
inline std::vector<double> cotangent_edge_weights(const DiscMesh& m, const EdgeTable& et) {
  std::vector<double> w(et.edges.size(), 0.0);
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto& tr = m.triangles[static_cast<size_t>(t)];
    for (int k = 0; k < 3; ++k) {
      int a = tr[static_cast<size_t>((k + 1) % 3)], b = tr[static_cast<size_t>((k + 2) % 3)];
      int e = et.find(a, b);
      w[static_cast<size_t>(e)] += 0.5 * cotangent(corner_angle(m, t, k));
    }
  }
  return w;
}

inline double min_cotangent_weight(const DiscMesh& m) {
  EdgeTable et = build_edge_table(m);
  auto w = cotangent_edge_weights(m, et);
  double mn = std::numeric_limits<double>::infinity();
  for (double x : w) mn = std::min(mn, x);
  return mn;
}

// ---- uniform 1->4 refinement ----------------------------------------------

struct MeshRefinement {
  DiscMesh mesh;
  // For each new vertex >= old vertex count: the parent edge endpoints.
  std::vector<std::array<int, 2>> midpoint_of;
  int old_vertex_count = 0;
};

inline MeshRefinement refine_mesh(const DiscMesh& m) {
  MeshRefinement out;
  out.old_vertex_count = m.vertex_count();
  out.mesh.vertices = m.vertices;

  EdgeTable et = build_edge_table(m);
  std::vector<int> midpoint(et.edges.size(), -1);
  for (size_t e = 0; e < et.edges.size(); ++e) {
    const MeshEdge& ed = et.edges[e];
    Vec2 mid = (m.vertices[static_cast<size_t>(ed.a)] + m.vertices[static_cast<size_t>(ed.b)]) * 0.5;
    midpoint[e] = out.mesh.vertex_count();
    out.mesh.vertices.push_back(mid);
    out.midpoint_of.push_back({ed.a, ed.b});
  }

  out.mesh.triangles.reserve(m.triangles.size() * 4);
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto& tr = m.triangles[static_cast<size_t>(t)];
    int m01 = midpoint[static_cast<size_t>(et.find(tr[0], tr[1]))];
    int m12 = midpoint[static_cast<size_t>(et.find(tr[1], tr[2]))];
    int m20 = midpoint[static_cast<size_t>(et.find(tr[2], tr[0]))];
    out.mesh.triangles.push_back({tr[0], m01, m20});
    out.mesh.triangles.push_back({tr[1], m12, m01});
    out.mesh.triangles.push_back({tr[2], m20, m12});
    out.mesh.triangles.push_back({m01, m12, m20});
  }

  out.mesh.boundary.reserve(m.boundary.size() * 2);
  for (size_t i = 0; i < m.boundary.size(); ++i) {
    int a = m.boundary[i], b = m.boundary[(i + 1) % m.boundary.size()];
    out.mesh.boundary.push_back(a);
    out.mesh.boundary.push_back(midpoint[static_cast<size_t>(et.find(a, b))]);
  }
  return out;
}

// ---- subcomplex helpers ----------------------------------------------------

// Rim edges of a cell set: edges incident to exactly one selected triangle
// (boundary edges of selected triangles included).
inline std::vector<int> rim_edges(const EdgeTable& et, const std::vector<bool>& in_set) {
  std::vector<int> rim;
  for (size_t e = 0; e < et.edges.size(); ++e) {
    const MeshEdge& ed = et.edges[e];
    int count = 0;
    if (ed.tri[0] >= 0 && in_set[static_cast<size_t>(ed.tri[0])]) count++;
    if (ed.tri[1] >= 0 && in_set[static_cast<size_t>(ed.tri[1])]) count++;
    if (count == 1) rim.push_back(static_cast<int>(e));
  }
  return rim;
}

inline bool cells_connected(const DiscMesh& m, const EdgeTable& et, const std::vector<int>& cells) {
  if (cells.empty()) return false;
  std::vector<bool> in_set(static_cast<size_t>(m.triangle_count()), false);
  for (int c : cells) in_set[static_cast<size_t>(c)] = true;
  UnionFind uf(m.triangle_count());
  for (const auto& e : et.edges) {
    if (e.tri[1] >= 0 && in_set[static_cast<size_t>(e.tri[0])] && in_set[static_cast<size_t>(e.tri[1])]) {
      uf.unite(e.tri[0], e.tri[1]);
    }
  }
  int root = uf.find(cells[0]);
  for (int c : cells) {
    if (uf.find(c) != root) return false;
  }
  return true;
}

// Attempts to trace the rim of a cell set as a single vertex cycle. Returns an
// empty vector if the rim does not form exactly one simple cycle.
inline std::vector<int> rim_cycle(const DiscMesh& m, const EdgeTable& et,
                                  const std::vector<int>& cells) {
  std::vector<bool> in_set(static_cast<size_t>(m.triangle_count()), false);
  for (int c : cells) in_set[static_cast<size_t>(c)] = true;
  std::vector<int> rim = rim_edges(et, in_set);
  if (rim.empty()) return {};

  // Orient each rim edge so the selected triangle lies on its left.
  std::unordered_map<int, int> next;
  for (int e : rim) {
    const MeshEdge& ed = et.edges[static_cast<size_t>(e)];
    int t = (ed.tri[0] >= 0 && in_set[static_cast<size_t>(ed.tri[0])]) ? ed.tri[0] : ed.tri[1];
    const auto& tr = m.triangles[static_cast<size_t>(t)];
    int a = -1, b = -1;
    for (int k = 0; k < 3; ++k) {
      int u = tr[static_cast<size_t>(k)], v = tr[static_cast<size_t>((k + 1) % 3)];
      if (EdgeTable::key(u, v) == EdgeTable::key(ed.a, ed.b)) { a = u; b = v; break; }
    }
    if (a < 0 || !next.emplace(a, b).second) return {};
  }
  std::vector<int> cycle;
  int start = et.edges[static_cast<size_t>(rim[0])].a;
  if (next.find(start) == next.end()) start = et.edges[static_cast<size_t>(rim[0])].b;
  cycle.push_back(start);
  for (size_t i = 0; i < rim.size(); ++i) {
    auto it = next.find(cycle.back());
    if (it == next.end()) return {};
    if (it->second == cycle.front()) break;
    cycle.push_back(it->second);
  }
  if (cycle.size() != rim.size()) return {};
  return cycle;
}

// Euler characteristic of the closed subcomplex spanned by `cells`.
inline long subcomplex_euler(const DiscMesh& m, const EdgeTable& et, const std::vector<int>& cells) {
  std::vector<bool> in_set(static_cast<size_t>(m.triangle_count()), false);
  for (int c : cells) in_set[static_cast<size_t>(c)] = true;
  std::vector<bool> vtx(static_cast<size_t>(m.vertex_count()), false);
  long E = 0;
  for (const auto& e : et.edges) {
    bool used = (e.tri[0] >= 0 && in_set[static_cast<size_t>(e.tri[0])]) ||
                (e.tri[1] >= 0 && in_set[static_cast<size_t>(e.tri[1])]);
    if (used) E++;
  }
  for (int c : cells) {
    for (int k = 0; k < 3; ++k) vtx[static_cast<size_t>(m.triangles[static_cast<size_t>(c)][static_cast<size_t>(k)])] = true;
  }
  long V = std::count(vtx.begin(), vtx.end(), true);
  return V - E + static_cast<long>(cells.size());
}

// A subdisc is a connected, simply connected cell set: one rim cycle, chi = 1.
inline bool is_subdisc(const DiscMesh& m, const EdgeTable& et, const std::vector<int>& cells) {
  if (cells.empty()) return false;
  if (!cells_connected(m, et, cells)) return false;
  if (subcomplex_euler(m, et, cells) != 1) return false;
  return !rim_cycle(m, et, cells).empty();
}

}  // namespace saddlekit
