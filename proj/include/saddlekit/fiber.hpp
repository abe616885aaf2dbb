#pragma once

// Point preimages (fibers) of a piecewise-linear map, computed cell by cell.
// Inside one triangle the map is affine, so the fiber of a point is either
// empty, a single point, a segment (degenerate image triangle), or the whole
// cell (constant image). Pieces from different cells are glued when their
// domain distance is at most tol_fiber; a map is monotone when every nonempty
// fiber is connected, and light when every fiber component has domain
// diameter at most the tolerance.
//
// Cone targets are handled through a local chart per cell (valid when the
// cell's image does not straddle the tip); the tip itself unfolds to the
// chart origin, so tip fibers are exact.

#include "convex.hpp"
#include "parallel.hpp"
#include "plmap.hpp"

namespace saddlekit {

enum class PieceKind { point, segment, cell };

struct FiberPiece {
  int tri = -1;
  PieceKind kind = PieceKind::point;
  Vec2 p0, p1;  // domain coords; point uses p0, segment uses p0..p1
};

struct FiberComponent {
  std::vector<int> pieces;  // indices into FiberReport::pieces
  double diameter = 0.0;    // domain diameter of the component's sample points
  bool touches_boundary = false;
};

struct FiberReport {
  std::vector<FiberPiece> pieces;
  std::vector<FiberComponent> components;
  bool nonempty = false;
  bool connected = true;  // vacuously true only when nonempty is false
  double tol_fiber = 0.0;
};

namespace detail {

inline void piece_sample_points(const DiscMesh& m, const FiberPiece& p, std::vector<Vec2>& out) {
  out.clear();
  switch (p.kind) {
    case PieceKind::point: out.push_back(p.p0); break;
    case PieceKind::segment: out.push_back(p.p0); out.push_back(p.p1); break;
    case PieceKind::cell:
      for (int k = 0; k < 3; k++) out.push_back(m.vertices[m.triangles[p.tri][k]]);
      break;
  }
}

inline double point_triangle_distance_2d(const Vec2& p, const Vec2& a, const Vec2& b,
                                         const Vec2& c) {
  if (point_in_triangle_2d(p, a, b, c, 0.0)) return 0.0;
  return std::min({point_segment_distance_2d(p, a, b), point_segment_distance_2d(p, b, c),
                   point_segment_distance_2d(p, c, a)});
}

inline double piece_distance(const DiscMesh& m, const FiberPiece& x, const FiberPiece& y) {
  // Segments and cells are convex, so the distance between two pieces is
  // realized between their edges or at a containment.
  std::vector<Vec2> xs, ys;
  piece_sample_points(m, x, xs);
  piece_sample_points(m, y, ys);
  auto edges_of = [](const std::vector<Vec2>& pts, std::vector<std::pair<Vec2, Vec2>>& out) {
    out.clear();
    if (pts.size() == 1) out.push_back({pts[0], pts[0]});
    else if (pts.size() == 2) out.push_back({pts[0], pts[1]});
    else
      for (size_t i = 0; i < pts.size(); i++)
        out.push_back({pts[i], pts[(i + 1) % pts.size()]});
  };
  std::vector<std::pair<Vec2, Vec2>> ex, ey;
  edges_of(xs, ex);
  edges_of(ys, ey);
  double best = 1e300;
  for (const auto& [a, b] : ex)
    for (const auto& [c, d] : ey) best = std::min(best, segment_segment_distance_2d(a, b, c, d));
  if (x.kind == PieceKind::cell)
    for (const Vec2& q : ys)
      best = std::min(best, point_triangle_distance_2d(q, xs[0], xs[1], xs[2]));
  if (y.kind == PieceKind::cell)
    for (const Vec2& q : xs)
      best = std::min(best, point_triangle_distance_2d(q, ys[0], ys[1], ys[2]));
  return best;
}

// Image corners of one cell in 2D coordinates, plus the query point, in a
// shared chart. Returns false when the query cannot lie over this cell.
inline bool cell_chart(const PLMap& f, int t, const TargetPoint& q, std::array<Vec2, 3>& corners,
                       Vec2& query) {
  const auto& tri = f.mesh.triangles[t];
  if (f.space.kind == TargetKind::plane) {
    for (int k = 0; k < 3; k++) corners[k] = f.image2(tri[k]);
    query = q.as_vec2();
    return true;
  }
  if (f.space.kind == TargetKind::space3) {
    // Build an orthonormal basis of the image plane; the query must lie on it.
    Vec3 A = f.image3(tri[0]), B = f.image3(tri[1]), C = f.image3(tri[2]);
    Vec3 u = B - A, v = C - A;
    Vec3 n = cross(u, v);
    double scale = std::max({u.norm(), v.norm(), 1e-30});
    Vec3 bu, bv;
    if (n.norm() > 1e-14 * scale * scale) {
      bu = u.normalized();
      bv = cross(n.normalized(), bu);
    } else if (u.norm() > 1e-14 * scale || v.norm() > 1e-14 * scale) {
      bu = (u.norm() >= v.norm() ? u : v).normalized();
      Vec3 any = std::fabs(bu.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
      bv = cross(bu, any).normalized();
    } else {
      bu = {1, 0, 0};
      bv = {0, 1, 0};
    }
    auto to2d = [&](const Vec3& p) { return Vec2{dot(p - A, bu), dot(p - A, bv)}; };
    for (int k = 0; k < 3; k++) corners[k] = to2d(f.image3(tri[k]));
    Vec3 qq = q.as_vec3();
    Vec3 off_plane = qq - A - bu * dot(qq - A, bu) - bv * dot(qq - A, bv);
    double snap = 1e-9 * std::max(image_diameter(f), 1e-30);
    if (off_plane.norm() > snap) return false;
    query = to2d(qq);
    return true;
  }
  // cone: unfold around the angle of the largest-radius corner
  double omega = f.space.cone_angle;
  double ref = 0.0, rmax = -1.0;
  for (int k = 0; k < 3; k++) {
    const TargetPoint& p = f.images[tri[k]];
    if (p.r() > rmax) { rmax = p.r(); ref = p.theta(); }
  }
  for (int k = 0; k < 3; k++) {
    const TargetPoint& p = f.images[tri[k]];
    double off = p.r() > kSnap ? wrap_signed(p.theta() - ref, omega) : 0.0;
    if (std::fabs(off) >= kPi) return false;  // cell straddles the tip: no chart
    corners[k] = {p.r() * std::cos(off), p.r() * std::sin(off)};
  }
  if (q.r() <= kSnap) {
    query = {0.0, 0.0};
    return true;
  }
  double offq = wrap_signed(q.theta() - ref, omega);
  if (std::fabs(offq) >= kPi) return false;  // outside the chart wedge
  query = {q.r() * std::cos(offq), q.r() * std::sin(offq)};
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// fiber computation
// ---------------------------------------------------------------------------

inline FiberReport fiber_components(const PLMap& f, const TargetPoint& q,
                                    double tol_fiber = 1e-6) {
  require_map_sizes(f);
  FiberReport report;
  report.tol_fiber = tol_fiber;
  const DiscMesh& m = f.mesh;
  double img_scale = std::max(image_diameter(f), 1e-30);
  double snap = 1e-12 * img_scale;

  for (int t = 0; t < m.triangle_count(); t++) {
    std::array<Vec2, 3> img;
    Vec2 qq;
    if (!detail::cell_chart(f, t, q, img, qq)) continue;
    Vec2 a = m.vertices[m.triangles[t][0]];
    Vec2 b = m.vertices[m.triangles[t][1]];
    Vec2 c = m.vertices[m.triangles[t][2]];

    double area2 = cross(img[1] - img[0], img[2] - img[0]);
    double extent = std::max({(img[1] - img[0]).norm(), (img[2] - img[0]).norm(),
                              (img[2] - img[1]).norm()});
    if (std::fabs(area2) > std::max(extent * snap, snap * snap)) {
      // full-rank cell: unique affine preimage
      Vec2 r = qq - img[0];
      Vec2 u = img[1] - img[0], v = img[2] - img[0];
      double det = cross(u, v);
      double l1 = cross(r, v) / det, l2 = cross(u, r) / det;
      double eps_b = 1e-9;
      if (l1 >= -eps_b && l2 >= -eps_b && l1 + l2 <= 1.0 + eps_b) {
        FiberPiece piece;
        piece.tri = t;
        piece.kind = PieceKind::point;
        piece.p0 = a + (b - a) * l1 + (c - a) * l2;
        report.pieces.push_back(piece);
      }
    } else if (extent > snap) {
      // rank-one cell: image is a segment; the fiber is a level set of the
      // affine parameter along it
      Vec2 d = (extent == (img[1] - img[0]).norm())   ? (img[1] - img[0])
               : (extent == (img[2] - img[0]).norm()) ? (img[2] - img[0])
                                                      : (img[2] - img[1]);
      d = d.normalized();
      double off_line = std::fabs(cross(qq - img[0], d));
      if (off_line > snap) continue;
      double sq = dot(qq - img[0], d);
      double g0 = dot(img[0] - img[0], d) - sq;
      double g1 = dot(img[1] - img[0], d) - sq;
      double g2 = dot(img[2] - img[0], d) - sq;
      const double gs[3] = {g0, g1, g2};
      const Vec2 dom[3] = {a, b, c};
      std::vector<Vec2> hits;
      for (int k = 0; k < 3; k++) {
        if (std::fabs(gs[k]) <= snap) hits.push_back(dom[k]);
        int k2 = (k + 1) % 3;
        if ((gs[k] > snap && gs[k2] < -snap) || (gs[k] < -snap && gs[k2] > snap)) {
          double s = gs[k] / (gs[k] - gs[k2]);
          hits.push_back(dom[k] + (dom[k2] - dom[k]) * s);
        }
      }
      if (hits.empty()) continue;
      // keep the two extreme hits
      size_t lo = 0, hi = 0;
      for (size_t i = 0; i < hits.size(); i++) {
        for (size_t j = i + 1; j < hits.size(); j++) {
          if ((hits[i] - hits[j]).norm2() > (hits[lo] - hits[hi]).norm2()) { lo = i; hi = j; }
        }
      }
      FiberPiece piece;
      piece.tri = t;
      if ((hits[lo] - hits[hi]).norm() <= 1e-12) {
        piece.kind = PieceKind::point;
        piece.p0 = hits[lo];
      } else {
        piece.kind = PieceKind::segment;
        piece.p0 = hits[lo];
        piece.p1 = hits[hi];
      }
      report.pieces.push_back(piece);
    } else {
      // constant cell
      if ((qq - img[0]).norm() <= snap) {
        FiberPiece piece;
        piece.tri = t;
        piece.kind = PieceKind::cell;
        report.pieces.push_back(piece);
      }
    }
  }

  report.nonempty = !report.pieces.empty();
  if (!report.nonempty) return report;  // connected stays vacuously true

  int P = int(report.pieces.size());
  UnionFind uf(P);
  for (int i = 0; i < P; i++) {
    for (int j = i + 1; j < P; j++) {
      if (detail::piece_distance(m, report.pieces[i], report.pieces[j]) <= tol_fiber)
        uf.unite(i, j);
    }
  }

  // boundary contact: distance from a piece to the domain boundary polygon
  std::vector<char> on_boundary(P, 0);
  {
    std::vector<Vec2> samples;
    for (int i = 0; i < P; i++) {
      detail::piece_sample_points(m, report.pieces[i], samples);
      double d = 1e300;
      for (const Vec2& s : samples) {
        for (size_t k = 0; k < m.boundary.size(); k++) {
          const Vec2& u = m.vertices[m.boundary[k]];
          const Vec2& v = m.vertices[m.boundary[(k + 1) % m.boundary.size()]];
          d = std::min(d, point_segment_distance_2d(s, u, v));
        }
      }
      on_boundary[i] = d <= 1e-9 ? 1 : 0;
    }
  }

  std::unordered_map<int, int> root_to_index;
  for (int i = 0; i < P; i++) {
    int root = uf.find(i);
    auto [it, fresh] = root_to_index.try_emplace(root, int(report.components.size()));
    if (fresh) report.components.emplace_back();
    FiberComponent& comp = report.components[it->second];
    comp.pieces.push_back(i);
    if (on_boundary[i]) comp.touches_boundary = true;
  }
  std::vector<Vec2> pts, other;
  for (FiberComponent& comp : report.components) {
    pts.clear();
    for (int i : comp.pieces) {
      detail::piece_sample_points(m, report.pieces[i], other);
      pts.insert(pts.end(), other.begin(), other.end());
    }
    for (size_t i = 0; i < pts.size(); i++)
      for (size_t j = i + 1; j < pts.size(); j++)
        comp.diameter = std::max(comp.diameter, (pts[i] - pts[j]).norm());
  }
  report.connected = report.components.size() == 1;
  return report;
}

// ---------------------------------------------------------------------------
// monotone / light checks
// ---------------------------------------------------------------------------

struct FiberCheckOptions {
  double tol_fiber = 1e-6;
  int grid = 0;  // extra grid samples per axis over the image bounds (flat targets)
  int max_witnesses = 10;
};

struct FiberWitness {
  TargetPoint q;
  int component_count = 0;
  double max_diameter = 0.0;
};

struct FiberCheckReport {
  bool passed = true;
  int samples_checked = 0;
  std::vector<FiberWitness> witnesses;
};

namespace detail {

inline std::vector<TargetPoint> fiber_sample_points(const PLMap& f, int grid) {
  std::vector<TargetPoint> samples = f.images;
  const DiscMesh& m = f.mesh;
  for (int t = 0; t < m.triangle_count(); t++) {
    const auto& tri = m.triangles[t];
    if (f.space.kind == TargetKind::cone) {
      // chart midpoint of the three corners where the cell unfolds
      std::array<Vec2, 3> img;
      Vec2 dummy;
      if (!cell_chart(f, t, f.images[tri[0]], img, dummy)) continue;
      Vec2 c = (img[0] + img[1] + img[2]) / 3.0;
      double ref = 0.0, rmax = -1.0;
      for (int k = 0; k < 3; k++)
        if (f.images[tri[k]].r() > rmax) { rmax = f.images[tri[k]].r(); ref = f.images[tri[k]].theta(); }
      double rr = c.norm();
      samples.push_back(TargetPoint::cone(
          rr, rr > 0 ? wrap_angle(ref + std::atan2(c.y, c.x), f.space.cone_angle) : ref));
    } else if (f.space.kind == TargetKind::plane) {
      Vec2 c = (f.image2(tri[0]) + f.image2(tri[1]) + f.image2(tri[2])) / 3.0;
      samples.push_back(TargetPoint::plane(c.x, c.y));
    } else {
      Vec3 c = (f.image3(tri[0]) + f.image3(tri[1]) + f.image3(tri[2])) / 3.0;
      samples.push_back(TargetPoint::space(c.x, c.y, c.z));
    }
  }
  if (grid > 1 && f.space.kind == TargetKind::plane) {
    BBox2 bb;
    for (int v = 0; v < m.vertex_count(); v++) bb.expand(f.image2(v));
    for (int i = 0; i < grid; i++) {
      for (int j = 0; j < grid; j++) {
        double x = bb.lo.x + (bb.hi.x - bb.lo.x) * (i + 0.5) / grid;
        double y = bb.lo.y + (bb.hi.y - bb.lo.y) * (j + 0.5) / grid;
        samples.push_back(TargetPoint::plane(x, y));
      }
    }
  }
  return samples;
}

}  // namespace detail

inline FiberCheckReport is_monotone(const PLMap& f, const FiberCheckOptions& opts = {}) {
  std::vector<TargetPoint> samples = detail::fiber_sample_points(f, opts.grid);
  FiberCheckReport report;
  report.samples_checked = int(samples.size());
  std::vector<char> bad(samples.size(), 0);
  std::vector<FiberWitness> found(samples.size());
  parallel_for(int(samples.size()), [&](int i) {
    FiberReport fr = fiber_components(f, samples[i], opts.tol_fiber);
    if (fr.nonempty && !fr.connected) {
      bad[i] = 1;
      found[i] = {samples[i], int(fr.components.size()), 0.0};
    }
  });
  for (size_t i = 0; i < samples.size(); i++) {
    if (!bad[i]) continue;
    report.passed = false;
    if (int(report.witnesses.size()) < opts.max_witnesses) report.witnesses.push_back(found[i]);
  }
  return report;
}

inline FiberCheckReport is_light(const PLMap& f, const FiberCheckOptions& opts = {}) {
  std::vector<TargetPoint> samples = detail::fiber_sample_points(f, opts.grid);
  FiberCheckReport report;
  report.samples_checked = int(samples.size());
  std::vector<char> bad(samples.size(), 0);
  std::vector<FiberWitness> found(samples.size());
  parallel_for(int(samples.size()), [&](int i) {
    FiberReport fr = fiber_components(f, samples[i], opts.tol_fiber);
    double worst = 0.0;
    for (const FiberComponent& c : fr.components) worst = std::max(worst, c.diameter);
    if (worst > opts.tol_fiber) {
      bad[i] = 1;
      found[i] = {samples[i], int(fr.components.size()), worst};
    }
  });
  for (size_t i = 0; i < samples.size(); i++) {
    if (!bad[i]) continue;
    report.passed = false;
    if (int(report.witnesses.size()) < opts.max_witnesses) report.witnesses.push_back(found[i]);
  }
  return report;
}

// ---------------------------------------------------------------------------
// boundary winding degree (plane targets)
// ---------------------------------------------------------------------------

// Winding number of the boundary image polygon around q, by exact angle
// summation. Throws if q lies on the boundary image curve.
inline int boundary_degree(const PLMap& f, const TargetPoint& q) {
  require_map_sizes(f);
  if (f.space.kind != TargetKind::plane)
    throw std::invalid_argument("boundary_degree is defined for plane targets");
  Vec2 base = q.as_vec2();
  double scale = std::max(image_diameter(f), 1e-30);
  const auto& bnd = f.mesh.boundary;
  for (size_t k = 0; k < bnd.size(); k++) {
    Vec2 u = f.image2(bnd[k]), v = f.image2(bnd[(k + 1) % bnd.size()]);
    if (point_segment_distance_2d(base, u, v) <= 1e-9 * scale)
      throw std::invalid_argument("boundary_degree: point lies on the boundary image");
  }
  double total = 0.0;
  for (size_t k = 0; k < bnd.size(); k++) {
    Vec2 u = f.image2(bnd[k]) - base, v = f.image2(bnd[(k + 1) % bnd.size()]) - base;
    total += std::atan2(cross(u, v), dot(u, v));
  }
  double winding = total / (2.0 * kPi);
  double nearest = std::round(winding);
  if (std::fabs(winding - nearest) > 1e-6)
    throw std::runtime_error("boundary_degree: winding sum is not an integer");
  return int(nearest);
}

// ---------------------------------------------------------------------------
// monotone-light factorization
// ---------------------------------------------------------------------------

// Collapse the combinatorially visible point fibers: vertices joined by edges
// whose endpoint images coincide exactly fall into one class. The monotone
// part g sends each vertex to its class; the light part h sends each class to
// the shared image. h(g(v)) reproduces f(v) exactly at every vertex.
struct Factorization {
  DiscMesh quotient;                    // positions: domain centroid per class
  std::vector<int> vertex_class;        // g on vertices
  std::vector<TargetPoint> class_image; // h on classes
  int class_count = 0;
  int collapsed_edges = 0;
  bool quotient_is_disc = false;
};

namespace detail {

inline bool same_image(const TargetSpace& space, const TargetPoint& a, const TargetPoint& b) {
  if (space.kind == TargetKind::cone) {
    if (a.r() != b.r()) return false;
    if (a.r() == 0.0) return true;
    return wrap_signed(a.theta() - b.theta(), space.cone_angle) == 0.0;
  }
  for (int d = 0; d < space.dim(); d++)
    if (a.v[size_t(d)] != b.v[size_t(d)]) return false;
  return true;
}

}  // namespace detail

inline Factorization monotone_light_factorize(const PLMap& f) {
  require_map_sizes(f);
  const DiscMesh& m = f.mesh;
  int V = m.vertex_count();
  UnionFind uf(V);
  EdgeTable edges = build_edge_table(m);
  Factorization out;
  for (const MeshEdge& e : edges.edges) {
    if (detail::same_image(f.space, f.images[e.a], f.images[e.b])) {
      uf.unite(e.a, e.b);
      out.collapsed_edges++;
    }
  }

  out.vertex_class.assign(V, -1);
  std::vector<Vec2> centroid;
  std::vector<int> count;
  for (int v = 0; v < V; v++) {
    int root = uf.find(v);
    if (out.vertex_class[root] < 0) {
      out.vertex_class[root] = out.class_count++;
      centroid.push_back({0, 0});
      count.push_back(0);
      out.class_image.push_back(f.images[v]);
    }
    out.vertex_class[v] = out.vertex_class[root];
    centroid[out.vertex_class[v]] = centroid[out.vertex_class[v]] + m.vertices[v];
    count[out.vertex_class[v]]++;
  }
  out.quotient.vertices.resize(out.class_count);
  for (int c = 0; c < out.class_count; c++) out.quotient.vertices[c] = centroid[c] / double(count[c]);

  for (const auto& tri : m.triangles) {
    int a = out.vertex_class[tri[0]], b = out.vertex_class[tri[1]], c = out.vertex_class[tri[2]];
    if (a == b || b == c || a == c) continue;  // cell collapsed by g
    out.quotient.triangles.push_back({a, b, c});
  }
  for (int v : m.boundary) {
    int c = out.vertex_class[v];
    if (out.quotient.boundary.empty() || out.quotient.boundary.back() != c)
      out.quotient.boundary.push_back(c);
  }
  while (out.quotient.boundary.size() > 1 &&
         out.quotient.boundary.front() == out.quotient.boundary.back())
    out.quotient.boundary.pop_back();

  out.quotient_is_disc = validate_disc_mesh(out.quotient).ok;
  return out;
}

// The light part of the factorization as a map on the quotient complex.
inline PLMap factorization_light_part(const PLMap& f, const Factorization& fac) {
  PLMap h;
  h.mesh = fac.quotient;
  h.space = f.space;
  h.images = fac.class_image;
  return h;
}

}  // namespace saddlekit
