#pragma once

// Cutting a piecewise-linear map along a halfspace or a geodesic segment and
// classifying the connected components of the part of the domain that misses
// the cut locus. Components that stay away from the domain boundary ("hats")
// are what the energy-decreasing relocation in energy.hpp removes.
//
// Halfspace cuts are combinatorially exact: inside a triangle the image is
// affine, so each side of the hyperplane meets the triangle in at most one
// convex piece, and pieces of adjacent triangles join exactly when the shared
// edge carries the corresponding sign. Vertex values inside a machine-scale
// band around the hyperplane count as on it, which absorbs the rounding left
// by hat relocation. Geodesic-segment cuts are tolerance-based: a cell
// counts as off-segment when all its corner images are farther than tol_cut
// from the segment, which over-approximates the true preimage as long as
// tol_cut exceeds the cell image diameter (the default is twice the largest
// cell image diameter, so refinement tightens the test).

#include <variant>

#include "convex.hpp"
#include "parallel.hpp"
#include "plmap.hpp"

namespace saddlekit {

using Cutter = std::variant<HalfSpace, GeodesicSegment>;

inline bool cutter_is_exact(const Cutter& c) {
  return std::holds_alternative<HalfSpace>(c);
}

struct CutComponent {
  std::vector<int> cells;      // triangle indices of the cut map's mesh
  int side = 0;                // +1 / -1 for halfspace sides, 0 for segment cuts
  bool touches_boundary = false;
  BBox3 image_bounds;          // over corner images of member cells
};

struct CutDecomposition {
  PLMap map;                   // the map that was actually cut (refined copy)
  int refinement_levels = 0;
  std::vector<CutComponent> components;
  std::vector<int> hat_indices;  // components with touches_boundary == false
  double tol_cut_used = 0.0;     // 0 for exact halfspace cuts
  bool exact = false;
};

struct CutOptions {
  int refinement = 0;
  std::optional<double> tol_cut;  // segment cuts only; default derived from the map
};

// ---------------------------------------------------------------------------
// decomposition
// ---------------------------------------------------------------------------

namespace detail {

inline double halfspace_value(const HalfSpace& h, const TargetSpace& space,
                              const TargetPoint& p) {
  if (space.kind == TargetKind::cone)
    throw std::invalid_argument("halfspace cutters require a flat target");
  if (h.dim == 2) {
    if (space.dim() != 2)
      throw std::invalid_argument("2d halfspace cutter applied to a 3d map");
    return h.eval2(p.as_vec2());
  }
  if (space.dim() != 3)
    throw std::invalid_argument("3d halfspace cutter applied to a 2d map");
  return h.eval(p.as_vec3());
}

inline Vec3 report_coords(const TargetSpace& space, const TargetPoint& p) {
  if (space.kind == TargetKind::cone)
    return {p.r() * std::cos(p.theta()), p.r() * std::sin(p.theta()), 0.0};
  return p.as_vec3();
}

// Components of one side-sign over the triangles, connected across shared
// edges and shared vertices, with boundary contact tracking.
struct ComponentCollector {
  const DiscMesh& mesh;
  const EdgeTable& edges;
  UnionFind uf;
  std::vector<char> boundary_flag;  // indexed by union-find node

  ComponentCollector(const DiscMesh& m, const EdgeTable& e, int nodes)
      : mesh(m), edges(e), uf(nodes), boundary_flag(nodes, 0) {}

  void gather(const std::vector<int>& piece_node,  // node id per piece slot, -1 if absent
              const std::vector<int>& piece_tri,   // owning triangle per node
              const std::vector<int>& piece_side,
              const PLMap& f, std::vector<CutComponent>& out) {
    // push boundary flags to roots
    for (size_t n = 0; n < boundary_flag.size(); n++) {
      if (boundary_flag[n]) boundary_flag[uf.find(int(n))] = 1;
    }
    std::unordered_map<int, int> root_to_index;
    for (int node = 0; node < int(piece_tri.size()); node++) {
      if (piece_tri[node] < 0) continue;
      int root = uf.find(node);
      auto [it, fresh] = root_to_index.try_emplace(root, int(out.size()));
      if (fresh) {
        CutComponent c;
        c.side = piece_side[node];
        c.touches_boundary = boundary_flag[root] != 0;
        out.push_back(std::move(c));
      }
      CutComponent& c = out[it->second];
      int t = piece_tri[node];
      c.cells.push_back(t);
      for (int k = 0; k < 3; k++)
        c.image_bounds.expand(report_coords(f.space, f.image(f.mesh.triangles[t][k])));
    }
    (void)piece_node;
  }
};

inline void decompose_halfspace(const PLMap& f, const HalfSpace& h, const EdgeTable& edges,
                                const std::vector<bool>& on_boundary,
                                CutDecomposition& out) {
  const DiscMesh& m = f.mesh;
  int F = m.triangle_count();
  std::vector<double> value(m.vertex_count());
  double scale = std::max(1.0, std::abs(h.offset));
  for (int v = 0; v < m.vertex_count(); v++) {
    value[v] = halfspace_value(h, f.space, f.images[v]);
    scale = std::max(scale, std::abs(value[v]) + std::abs(h.offset));
  }
  // Vertices that cut_hat projected onto the hyperplane land within rounding
  // of it, not exactly on it. Snap those to the plane, otherwise a freshly
  // removed hat resurfaces as a sliver of width ~1e-16 and relocation loops.
  double snap = 1e-13 * scale;
  for (double& val : value)
    if (std::abs(val) <= snap) val = 0.0;

  // Node layout: 2*t for the positive piece of triangle t, 2*t+1 for the
  // negative piece. A piece exists iff the triangle has a corner of that sign.
  std::vector<int> piece_tri(2 * F, -1), piece_side(2 * F, 0);
  for (int t = 0; t < F; t++) {
    double lo = value[m.triangles[t][0]], hi = lo;
    for (int k = 1; k < 3; k++) {
      double v = value[m.triangles[t][k]];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi > 0) { piece_tri[2 * t] = t; piece_side[2 * t] = +1; }
    if (lo < 0) { piece_tri[2 * t + 1] = t; piece_side[2 * t + 1] = -1; }
  }

  ComponentCollector cc(m, edges, 2 * F);
  for (const MeshEdge& e : edges.edges) {
    double hi = std::max(value[e.a], value[e.b]);
    double lo = std::min(value[e.a], value[e.b]);
    if (e.on_boundary()) {
      int t = e.tri[0];
      if (hi > 0) cc.boundary_flag[2 * t] = 1;
      if (lo < 0) cc.boundary_flag[2 * t + 1] = 1;
    } else {
      if (hi > 0) cc.uf.unite(2 * e.tri[0], 2 * e.tri[1]);
      if (lo < 0) cc.uf.unite(2 * e.tri[0] + 1, 2 * e.tri[1] + 1);
    }
  }
  // A piece can also reach the boundary through a lone boundary vertex whose
  // two boundary edges otherwise carry the opposite sign.
  for (int t = 0; t < F; t++) {
    for (int k = 0; k < 3; k++) {
      int v = m.triangles[t][k];
      if (!on_boundary[v]) continue;
      if (value[v] > 0) cc.boundary_flag[2 * t] = 1;
      if (value[v] < 0) cc.boundary_flag[2 * t + 1] = 1;
    }
  }

  cc.gather({}, piece_tri, piece_side, f, out.components);
  out.exact = true;
  out.tol_cut_used = 0.0;
}

inline void decompose_segment(const PLMap& f, const GeodesicSegment& seg, double tol,
                              const EdgeTable& edges, const std::vector<bool>& on_boundary,
                              CutDecomposition& out) {
  const DiscMesh& m = f.mesh;
  int F = m.triangle_count();
  std::vector<double> dist(m.vertex_count());
  parallel_for(m.vertex_count(), [&](int v) {
    dist[v] = point_segment_distance(f.space, f.images[v], seg);
  });

  std::vector<int> piece_tri(F, -1), piece_side(F, 0);
  std::vector<char> off(F, 0);
  for (int t = 0; t < F; t++) {
    double lo = dist[m.triangles[t][0]];
    for (int k = 1; k < 3; k++) lo = std::min(lo, dist[m.triangles[t][k]]);
    if (lo > tol) {
      off[t] = 1;
      piece_tri[t] = t;
    }
  }

  ComponentCollector cc(m, edges, F);
  for (const MeshEdge& e : edges.edges) {
    if (e.on_boundary()) continue;
    if (off[e.tri[0]] && off[e.tri[1]]) cc.uf.unite(e.tri[0], e.tri[1]);
  }
  // Off-cells meeting only at a vertex still belong to one complement
  // component (the vertex itself lies in both).
  std::vector<int> seen_at_vertex(m.vertex_count(), -1);
  for (int t = 0; t < F; t++) {
    if (!off[t]) continue;
    for (int k = 0; k < 3; k++) {
      int v = m.triangles[t][k];
      if (seen_at_vertex[v] >= 0) cc.uf.unite(seen_at_vertex[v], t);
      seen_at_vertex[v] = t;
      if (on_boundary[v]) cc.boundary_flag[t] = 1;
    }
  }

  cc.gather({}, piece_tri, piece_side, f, out.components);
  out.exact = false;
  out.tol_cut_used = tol;
}

}  // namespace detail

inline CutDecomposition cut_components(const PLMap& f, const Cutter& cutter,
                                       const CutOptions& opts = {}) {
  require_map_sizes(f);
  CutDecomposition out;
  out.map = opts.refinement > 0 ? refine_plmap(f, opts.refinement) : f;
  out.refinement_levels = opts.refinement;

  EdgeTable edges = build_edge_table(out.map.mesh);
  std::vector<bool> on_boundary = boundary_vertex_flags(out.map.mesh);

  if (const HalfSpace* h = std::get_if<HalfSpace>(&cutter)) {
    detail::decompose_halfspace(out.map, *h, edges, on_boundary, out);
  } else {
    const GeodesicSegment& seg = std::get<GeodesicSegment>(cutter);
    double tol = opts.tol_cut.value_or(2.0 * max_cell_image_diameter(out.map));
    detail::decompose_segment(out.map, seg, tol, edges, on_boundary, out);
  }
  for (int i = 0; i < int(out.components.size()); i++) {
    if (!out.components[i].touches_boundary) out.hat_indices.push_back(i);
  }
  return out;
}

inline bool has_hat(const CutDecomposition& d) { return !d.hat_indices.empty(); }

// ---------------------------------------------------------------------------
// canonical cutter families
// ---------------------------------------------------------------------------

// For each direction, sweeping the offset across the sorted projections of the
// vertex images realizes every sign pattern a halfspace of that direction can
// induce on the cells, so offsets at midpoints between consecutive distinct
// projections cover all combinatorially distinct cuts. `density` bounds the
// number of directions; density == 0 keeps every direction derived from the
// vertex images (pairwise differences), with no quasi-random supplement.
namespace detail {

inline std::vector<double> sweep_offsets(std::vector<double> proj) {
  std::sort(proj.begin(), proj.end());
  std::vector<double> offsets;
  double span = proj.empty() ? 0.0 : proj.back() - proj.front();
  double min_gap = std::max(span, 1.0) * 1e-12;
  for (size_t i = 0; i + 1 < proj.size(); i++) {
    if (proj[i + 1] - proj[i] > min_gap) offsets.push_back(0.5 * (proj[i] + proj[i + 1]));
  }
  return offsets;
}

}  // namespace detail

inline std::vector<Cutter> canonical_cut_family(const PLMap& f, int density = 200,
                                                uint64_t seed = 1) {
  require_map_sizes(f);
  std::vector<Cutter> family;
  int V = f.mesh.vertex_count();

  if (f.space.kind == TargetKind::plane) {
    // Directions normal to vertex image differences, deduplicated by angle.
    double diam = std::max(image_diameter(f), 1e-30);
    std::vector<double> angles;
    for (int i = 0; i < V; i++) {
      for (int j = i + 1; j < V; j++) {
        Vec2 d = f.image2(j) - f.image2(i);
        if (d.norm() < 1e-12 * diam) continue;
        double a = std::atan2(d.y, d.x);
        if (a < 0) a += kPi;            // lines are unoriented
        if (a >= kPi) a -= kPi;
        angles.push_back(a);
      }
    }
    std::sort(angles.begin(), angles.end());
    std::vector<double> dirs;
    for (double a : angles) {
      if (dirs.empty() || a - dirs.back() > 1e-9) dirs.push_back(a);
    }
    if (density > 0 && int(dirs.size()) > density) {
      std::vector<double> kept;
      for (int k = 0; k < density; k++)
        kept.push_back(dirs[size_t(k) * dirs.size() / size_t(density)]);
      dirs = std::move(kept);
    }
    for (double a : dirs) {
      Vec2 n{-std::sin(a), std::cos(a)};  // normal to direction angle a
      std::vector<double> proj(V);
      for (int v = 0; v < V; v++) proj[v] = dot(n, f.image2(v));
      for (double c : detail::sweep_offsets(std::move(proj)))
        family.emplace_back(HalfSpace::line(n, c));
    }
  } else if (f.space.kind == TargetKind::space3) {
    std::vector<Vec3> normals;
    if (density == 0) {
      double diam = std::max(image_diameter(f), 1e-30);
      for (int i = 0; i < V; i++) {
        for (int j = i + 1; j < V; j++) {
          Vec3 d = f.image3(j) - f.image3(i);
          if (d.norm() < 1e-12 * diam) continue;
          normals.push_back(d.normalized());
        }
      }
      normals.push_back({0, 0, 1});
      normals.push_back({0, 1, 0});
      normals.push_back({1, 0, 0});
    } else {
      normals.push_back({0, 0, 1});
      normals.push_back({0, 1, 0});
      normals.push_back({1, 0, 0});
      for (int k = 0; k < density; k++) normals.push_back(fibonacci_sphere_dir(k, density));
    }
    (void)seed;
    for (const Vec3& n : normals) {
      std::vector<double> proj(V);
      for (int v = 0; v < V; v++) proj[v] = dot(n, f.image3(v));
      for (double c : detail::sweep_offsets(std::move(proj)))
        family.emplace_back(HalfSpace::plane3(n, c));
    }
  } else {
    // Cone targets: geodesic segments between vertex images. Always include
    // spokes from the tip to each boundary image (these detect collapse onto
    // radial arcs); supplement with seeded random image pairs.
    std::vector<bool> on_boundary = boundary_vertex_flags(f.mesh);
    TargetPoint tip = TargetPoint::cone(0.0, 0.0);
    for (int v = 0; v < V; v++) {
      if (!on_boundary[v] || f.images[v].r() <= kSnap) continue;
      family.emplace_back(geodesic(f.space, tip, f.images[v]));
    }
    if (density == 0) {
      std::vector<int> bnd;
      for (int v = 0; v < V; v++)
        if (on_boundary[v]) bnd.push_back(v);
      for (size_t i = 0; i < bnd.size(); i++) {
        for (size_t j = i + 1; j < bnd.size(); j++) {
          const TargetPoint &a = f.images[bnd[i]], &b = f.images[bnd[j]];
          if (distance(f.space, a, b) < kSnap) continue;
          family.emplace_back(geodesic(f.space, a, b));
        }
      }
    } else {
      Rng rng(seed);
      int made = 0, guard = 0;
      while (made < density && guard < 50 * density) {
        guard++;
        int i = rng.index(V), j = rng.index(V);
        if (i == j) continue;
        const TargetPoint &a = f.images[i], &b = f.images[j];
        if (distance(f.space, a, b) < kSnap) continue;
        family.emplace_back(geodesic(f.space, a, b));
        made++;
      }
    }
  }
  return family;
}

// ---------------------------------------------------------------------------
// saddle check
// ---------------------------------------------------------------------------

struct SaddleOptions {
  int refinement = 0;
  int density = 200;
  uint64_t seed = 1;
  int max_witnesses = 10;
  std::optional<double> tol_cut;  // segment cutters only
};

struct HatWitness {
  int cutter_index = -1;
  Cutter cutter;
  CutComponent component;  // cells refer to the decomposition's (refined) mesh
  double tol_cut_used = 0.0;
  bool exact = false;
};

struct SaddleReport {
  std::string verdict;  // "saddle" | "not_saddle" | "inconclusive"
  int cutters_checked = 0;
  int refinement = 0;
  bool custom_family = false;
  bool tolerance_limited = false;  // some cutters were tolerance-based
  std::vector<HatWitness> witnesses;
};

inline SaddleReport check_saddle(const PLMap& f, const std::vector<Cutter>& family,
                                 const SaddleOptions& opts, bool custom_family) {
  SaddleReport report;
  report.custom_family = custom_family;
  report.refinement = opts.refinement;
  report.cutters_checked = int(family.size());

  PLMap refined = opts.refinement > 0 ? refine_plmap(f, opts.refinement) : f;
  CutOptions cut_opts;
  cut_opts.tol_cut = opts.tol_cut;

  // Evaluate in fixed-size blocks: cutters within a block run in parallel,
  // blocks are scanned in order so the witness list is deterministic.
  const int block = 256;
  std::vector<std::vector<HatWitness>> slot(std::min<size_t>(family.size(), block));
  for (size_t base = 0; base < family.size(); base += block) {
    size_t count = std::min<size_t>(block, family.size() - base);
    parallel_for(int(count), [&](int k) {
      slot[k].clear();
      const Cutter& cutter = family[base + k];
      CutDecomposition dec = cut_components(refined, cutter, cut_opts);
      for (int hi : dec.hat_indices) {
        HatWitness w;
        w.cutter_index = int(base + k);
        w.cutter = cutter;
        w.component = dec.components[hi];
        w.tol_cut_used = dec.tol_cut_used;
        w.exact = dec.exact;
        slot[k].push_back(std::move(w));
      }
    });
    for (size_t k = 0; k < count; k++) {
      for (HatWitness& w : slot[k]) {
        if (int(report.witnesses.size()) < opts.max_witnesses)
          report.witnesses.push_back(std::move(w));
      }
    }
    if (int(report.witnesses.size()) >= opts.max_witnesses) break;
  }

  for (const Cutter& c : family)
    if (!cutter_is_exact(c)) report.tolerance_limited = true;

  if (!report.witnesses.empty()) {
    report.verdict = "not_saddle";
  } else if (custom_family || report.tolerance_limited) {
    // A clean sweep of a non-exhaustive or tolerance-based family is evidence,
    // not proof.
    report.verdict = "inconclusive";
  } else {
    report.verdict = "saddle";
  }
  return report;
}

inline SaddleReport is_saddle(const PLMap& f, const SaddleOptions& opts = {}) {
  std::vector<Cutter> family = canonical_cut_family(f, opts.density, opts.seed);
  return check_saddle(f, family, opts, /*custom_family=*/false);
}

// ---------------------------------------------------------------------------
// compact components away from a convex region (plane targets)
// ---------------------------------------------------------------------------

struct ClaimReport {
  bool holds = true;               // no compact component avoids the region
  int outside_cells = 0;
  std::vector<CutComponent> witnesses;  // compact components, if any
  int refinement = 0;
};

// Components of the set of cells whose image triangles miss the closed convex
// region entirely; the claim under test is that each such component reaches
// the domain boundary.
inline ClaimReport check_claim_i(const PLMap& f, const ConvexRegion& region,
                                 int refinement = 0) {
  require_map_sizes(f);
  if (f.space.kind != TargetKind::plane)
    throw std::invalid_argument("check_claim_i supports plane targets only");
  if (region.open)
    throw std::invalid_argument("check_claim_i needs a closed (compact) region");
  if (region.poly.size() < 1) throw std::invalid_argument("check_claim_i: empty region");

  ClaimReport report;
  report.refinement = refinement;
  PLMap g = refinement > 0 ? refine_plmap(f, refinement) : f;
  const DiscMesh& m = g.mesh;
  int F = m.triangle_count();

  std::vector<char> outside(F, 0);
  parallel_for(F, [&](int t) {
    std::vector<Vec2> tri{g.image2(m.triangles[t][0]), g.image2(m.triangles[t][1]),
                          g.image2(m.triangles[t][2])};
    outside[t] = convex_separation_gap_2d(tri, region.poly) > 0 ? 1 : 0;
  });
  for (int t = 0; t < F; t++) report.outside_cells += outside[t];

  EdgeTable edges = build_edge_table(m);
  std::vector<bool> on_boundary = boundary_vertex_flags(m);
  UnionFind uf(F);
  for (const MeshEdge& e : edges.edges) {
    if (!e.on_boundary() && outside[e.tri[0]] && outside[e.tri[1]]) uf.unite(e.tri[0], e.tri[1]);
  }
  std::vector<int> seen_at_vertex(m.vertex_count(), -1);
  std::vector<char> touches(F, 0);
  for (int t = 0; t < F; t++) {
    if (!outside[t]) continue;
    for (int k = 0; k < 3; k++) {
      int v = m.triangles[t][k];
      if (seen_at_vertex[v] >= 0) uf.unite(seen_at_vertex[v], t);
      seen_at_vertex[v] = t;
      if (on_boundary[v]) touches[t] = 1;
    }
  }
  std::unordered_map<int, int> root_to_index;
  std::vector<CutComponent> comps;
  for (int t = 0; t < F; t++) {
    if (!outside[t]) continue;
    int root = uf.find(t);
    auto [it, fresh] = root_to_index.try_emplace(root, int(comps.size()));
    if (fresh) comps.emplace_back();
    CutComponent& c = comps[it->second];
    c.cells.push_back(t);
    if (touches[t]) c.touches_boundary = true;
    for (int k = 0; k < 3; k++)
      c.image_bounds.expand(detail::report_coords(g.space, g.image(m.triangles[t][k])));
  }
  for (CutComponent& c : comps) {
    if (!c.touches_boundary) {
      report.holds = false;
      report.witnesses.push_back(std::move(c));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// convex hull property on sub-discs
// ---------------------------------------------------------------------------

struct HullReport {
  bool holds = true;
  double violation = 0.0;   // max signed distance of a sub-disc vertex image
                            // outside the hull of the rim images
  int worst_vertex = -1;
  double tol_used = 0.0;
  int rim_length = 0;
};

// For a sub-complex that is itself a disc, every vertex image must lie in the
// convex hull of the rim-cycle images (up to tol_hull; default scales with
// the image diameter).
inline HullReport check_convex_hull_property(const PLMap& f, const std::vector<int>& cells,
                                             std::optional<double> tol_hull = {}) {
  require_map_sizes(f);
  if (f.space.kind == TargetKind::cone)
    throw std::invalid_argument("convex hull check requires a flat target");
  EdgeTable et = build_edge_table(f.mesh);
  if (!is_subdisc(f.mesh, et, cells))
    throw std::invalid_argument("convex hull check needs a sub-complex that is a disc");

  HullReport report;
  report.tol_used = tol_hull.value_or(1e-6 * std::max(image_diameter(f), 1e-30));

  std::vector<int> rim = rim_cycle(f.mesh, et, cells);
  report.rim_length = int(rim.size());
  std::vector<char> in_scope(f.mesh.vertex_count(), 0);
  for (int t : cells)
    for (int k = 0; k < 3; k++) in_scope[f.mesh.triangles[t][k]] = 1;

  if (f.space.kind == TargetKind::plane) {
    std::vector<Vec2> rim_pts;
    rim_pts.reserve(rim.size());
    for (int v : rim) rim_pts.push_back(f.image2(v));
    std::vector<Vec2> hull = convex_hull_2d(rim_pts);
    for (int v = 0; v < f.mesh.vertex_count(); v++) {
      if (!in_scope[v]) continue;
      double d = signed_violation_2d(hull, f.image2(v));
      if (d > report.violation) {
        report.violation = d;
        report.worst_vertex = v;
      }
    }
  } else {
    std::vector<Vec3> rim_pts;
    rim_pts.reserve(rim.size());
    for (int v : rim) rim_pts.push_back(f.image3(v));
    Hull3D hull = build_hull_3d(rim_pts);
    for (int v = 0; v < f.mesh.vertex_count(); v++) {
      if (!in_scope[v]) continue;
      double d = signed_violation_3d(hull, f.image3(v));
      if (d > report.violation) {
        report.violation = d;
        report.worst_vertex = v;
      }
    }
  }
  report.holds = report.violation <= report.tol_used;
  return report;
}

}  // namespace saddlekit
