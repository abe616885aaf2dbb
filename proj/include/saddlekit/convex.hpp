#pragma once

// Convex primitives: halfspaces, convex regions of the target plane, 2D hulls
// (monotone chain), 3D hulls (quickhull with a planar fallback) and the small
// exact-style predicates built on eps-snapped orientation tests.

#include <map>
#include <utility>

#include "core.hpp"

namespace saddlekit {

// ---- 2D predicates ----------------------------------------------------------

inline double orient2d(Vec2 a, Vec2 b, Vec2 c) { return (b - a).cross(c - a); }

inline double point_segment_distance_2d(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double den = ab.norm2();
  double t = den > 0 ? std::clamp((p - a).dot(ab) / den, 0.0, 1.0) : 0.0;
  return (p - (a + ab * t)).norm();
}

inline double segment_segment_distance_2d(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  double o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
  double o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
  if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != o2 && o3 != o4) return 0.0;
  return std::min(std::min(point_segment_distance_2d(a, c, d), point_segment_distance_2d(b, c, d)),
                  std::min(point_segment_distance_2d(c, a, b), point_segment_distance_2d(d, a, b)));
}

// Strict interior crossing of two segments (shared endpoints do not count).
inline bool segments_properly_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double eps) {
  double o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
  double o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
  bool ab_splits = (o1 > eps && o2 < -eps) || (o1 < -eps && o2 > eps);
  bool cd_splits = (o3 > eps && o4 < -eps) || (o3 < -eps && o4 > eps);
  return ab_splits && cd_splits;
}

// Strict interior: points on edges or at vertices (within eps) do not count.
inline bool point_in_triangle_2d(Vec2 p, Vec2 a, Vec2 b, Vec2 c, double eps) {
  double o1 = orient2d(a, b, p), o2 = orient2d(b, c, p), o3 = orient2d(c, a, p);
  bool pos = o1 > eps && o2 > eps && o3 > eps;
  bool neg = o1 < -eps && o2 < -eps && o3 < -eps;
  return pos || neg;
}

// ---- halfspaces -------------------------------------------------------------

// Oriented hyperplane of the target (line in the plane, plane in 3-space).
// eval(p) = normal . p - offset; the positive side is eval > 0. The normal is
// kept unit length.
struct HalfSpace {
  Vec3 normal{0, 0, 0};
  double offset = 0.0;
  int dim = 2;

  static HalfSpace line(Vec2 n, double offset) {
    double len = n.norm();
    if (len <= 0) throw std::invalid_argument("halfspace normal must be nonzero");
    return {{n.x / len, n.y / len, 0.0}, offset / len, 2};
  }
  static HalfSpace plane3(Vec3 n, double offset) {
    double len = n.norm();
    if (len <= 0) throw std::invalid_argument("halfspace normal must be nonzero");
    return {n / len, offset / len, 3};
  }
  [[nodiscard]] double eval(Vec3 p) const { return normal.dot(p) - offset; }
  [[nodiscard]] double eval2(Vec2 p) const { return normal.x * p.x + normal.y * p.y - offset; }
};

// ---- 2D convex hull ----------------------------------------------------------

// Andrew monotone chain; returns the hull CCW. Collinear inputs degrade to a
// 2-point (segment) or 1-point hull.
inline std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts) {
  if (pts.empty()) return {};
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
              return a.x == b.x && a.y == b.y;
            }), pts.end());
  int n = static_cast<int>(pts.size());
  if (n <= 2) return pts;

  double scale = 0;
  for (Vec2 p : pts) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  double eps = kSnap * std::max(1.0, scale * scale);

  std::vector<Vec2> hull(static_cast<size_t>(2 * n));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && orient2d(hull[static_cast<size_t>(k - 2)], hull[static_cast<size_t>(k - 1)], pts[static_cast<size_t>(i)]) <= eps) k--;
    hull[static_cast<size_t>(k++)] = pts[static_cast<size_t>(i)];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {
    while (k >= lower && orient2d(hull[static_cast<size_t>(k - 2)], hull[static_cast<size_t>(k - 1)], pts[static_cast<size_t>(i)]) <= eps) k--;
    hull[static_cast<size_t>(k++)] = pts[static_cast<size_t>(i)];
  }
  hull.resize(static_cast<size_t>(k - 1));
  if (hull.size() == 2 && (hull[0] - hull[1]).norm() == 0) hull.pop_back();
  return hull;
}

// Support-slack violation of p against a 2D hull: max over hull edges of the
// outward-normal excess. Negative inside a full-dimensional hull; for
// degenerate hulls (segment/point) it is the plain distance.
inline double signed_violation_2d(const std::vector<Vec2>& hull, Vec2 p) {
  if (hull.empty()) return std::numeric_limits<double>::infinity();
  if (hull.size() == 1) return (p - hull[0]).norm();
  if (hull.size() == 2) return point_segment_distance_2d(p, hull[0], hull[1]);
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < hull.size(); ++i) {
    Vec2 a = hull[i], b = hull[(i + 1) % hull.size()];
    Vec2 n = (b - a).perp().normalized() * -1.0;  // CCW polygon: outward is -perp
    worst = std::max(worst, n.dot(p - a));
  }
  return worst;
}

// ---- convex regions of the target plane --------------------------------------

// Closed (or open) convex subset of the plane stored as its hull polygon.
// A region can be a single point, a segment, or a full polygon.
struct ConvexRegion {
  std::vector<Vec2> poly;  // CCW hull
  bool open = false;

  static ConvexRegion from_points(const std::vector<Vec2>& pts, bool open_region = false) {
    ConvexRegion r;
    r.poly = convex_hull_2d(pts);
    r.open = open_region;
    return r;
  }
  // Intersection of halfplanes, realized by clipping a large box.
  static ConvexRegion from_halfplanes(const std::vector<HalfSpace>& hs, double extent,
                                      bool open_region = false) {
    std::vector<Vec2> poly = {{-extent, -extent}, {extent, -extent}, {extent, extent}, {-extent, extent}};
    for (const auto& h : hs) {
      std::vector<Vec2> next;
      size_t n = poly.size();
      for (size_t i = 0; i < n && n >= 1; ++i) {
        Vec2 cur = poly[i], prv = poly[(i + n - 1) % n];
        double fc = -h.eval2(cur), fp = -h.eval2(prv);  // keep eval <= 0 side
        bool cin = fc >= 0, pin = fp >= 0;
        if (cin != pin) {
          double t = fp / (fp - fc);
          next.push_back(prv + (cur - prv) * t);
        }
        if (cin) next.push_back(cur);
      }
      poly = std::move(next);
      if (poly.empty()) break;
    }
    ConvexRegion r;
    r.poly = convex_hull_2d(poly);
    r.open = open_region;
    return r;
  }

  [[nodiscard]] bool empty() const { return poly.empty(); }
  [[nodiscard]] bool contains(Vec2 p, double tol = 0.0) const {
    if (poly.empty()) return false;
    return signed_violation_2d(poly, p) <= tol;
  }
  [[nodiscard]] BBox2 bbox() const {
    BBox2 b;
    for (Vec2 p : poly) b.expand(p);
    return b;
  }
};

// Separating-axis disjointness of two closed convex polygons (degenerate
// shapes allowed). Returns the largest separation gap over candidate axes;
// the sets are disjoint iff the gap is positive.
inline double convex_separation_gap_2d(const std::vector<Vec2>& A, const std::vector<Vec2>& B) {
  double best = -std::numeric_limits<double>::infinity();
  auto axes_of = [](const std::vector<Vec2>& P, std::vector<Vec2>& out) {
    size_t n = P.size();
    if (n == 1) return;
    if (n == 2) {
      Vec2 d = (P[1] - P[0]).normalized();
      out.push_back(d);
      out.push_back(d.perp());
      return;
    }
    for (size_t i = 0; i < n; ++i) {
      Vec2 d = P[(i + 1) % n] - P[i];
      if (d.norm() > 0) out.push_back(d.perp().normalized());
    }
  };
  std::vector<Vec2> axes;
  axes_of(A, axes);
  axes_of(B, axes);
  if (axes.empty()) {  // two points
    return (A[0] - B[0]).norm() > 0 ? (A[0] - B[0]).norm() : 0.0;
  }
  for (Vec2 ax : axes) {
    auto range = [&](const std::vector<Vec2>& P) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (Vec2 p : P) {
        double t = ax.dot(p);
        lo = std::min(lo, t); hi = std::max(hi, t);
      }
      return std::pair<double, double>{lo, hi};
    };
    auto [alo, ahi] = range(A);
    auto [blo, bhi] = range(B);
    double gap = std::max(blo - ahi, alo - bhi);
    best = std::max(best, gap);
  }
  return best;
}

inline bool convex_disjoint_2d(const std::vector<Vec2>& A, const std::vector<Vec2>& B, double eps) {
  return convex_separation_gap_2d(A, B) > eps;
}

// Interiors of two triangles intersect iff the projections overlap strictly on
// every candidate axis. Shared edges and vertices of mesh neighbours project
// to a zero-width overlap on the shared edge's normal, so adjacency is not
// flagged. Degenerate triangles have no interior.
inline bool triangle_interiors_overlap_2d(const std::array<Vec2, 3>& A,
                                          const std::array<Vec2, 3>& B, double eps) {
  double min_overlap = std::numeric_limits<double>::infinity();
  for (int which = 0; which < 2; ++which) {
    const auto& P = which == 0 ? A : B;
    for (int i = 0; i < 3; ++i) {
      Vec2 d = P[static_cast<size_t>((i + 1) % 3)] - P[static_cast<size_t>(i)];
      if (d.norm() == 0) return false;
      Vec2 ax = d.perp().normalized();
      double alo = std::numeric_limits<double>::infinity(), ahi = -alo;
      double blo = alo, bhi = -alo;
      for (int k = 0; k < 3; ++k) {
        double ta = ax.dot(A[static_cast<size_t>(k)]), tb = ax.dot(B[static_cast<size_t>(k)]);
        alo = std::min(alo, ta); ahi = std::max(ahi, ta);
        blo = std::min(blo, tb); bhi = std::max(bhi, tb);
      }
      min_overlap = std::min(min_overlap, std::min(ahi, bhi) - std::max(alo, blo));
      if (min_overlap <= eps) return false;
    }
  }
  return min_overlap > eps;
}

// ---- 3D hull (quickhull) -----------------------------------------------------

struct Hull3D {
  bool planar = false;
  // Full-dimensional case: faces as outward halfspaces n.p <= d.
  std::vector<std::pair<Vec3, double>> faces;
  // Planar case: the hull lives in the plane n.p = d with an in-plane 2D hull.
  Vec3 plane_n{0, 0, 1};
  double plane_d = 0.0;
  Vec3 origin{0, 0, 0}, bu{1, 0, 0}, bv{0, 1, 0};
  std::vector<Vec2> flat_hull;
};

namespace detail {

struct QhFace {
  int a, b, c;
  Vec3 n;
  double d;
  bool alive = true;
  std::vector<int> outside;
};

inline Hull3D planar_hull(const std::vector<Vec3>& pts, Vec3 origin, Vec3 bu, Vec3 bv, Vec3 n) {
  Hull3D h;
  h.planar = true;
  h.origin = origin;
  h.bu = bu;
  h.bv = bv;
  h.plane_n = n;
  h.plane_d = n.dot(origin);
  std::vector<Vec2> flat;
  flat.reserve(pts.size());
  for (const Vec3& p : pts) flat.push_back({bu.dot(p - origin), bv.dot(p - origin)});
  h.flat_hull = convex_hull_2d(flat);
  return h;
}

}  // namespace detail

inline Hull3D build_hull_3d(const std::vector<Vec3>& pts) {
  if (pts.empty()) throw std::invalid_argument("hull of an empty point set");
  BBox3 bb;
  for (const Vec3& p : pts) bb.expand(p);
  double scale = std::max(1e-300, bb.diagonal());
  double eps = 1e-10 * scale;

  int n = static_cast<int>(pts.size());
  // Initial extreme pair.
  int i0 = 0, i1 = 0;
  double best = -1;
  for (int ax = 0; ax < 3; ++ax) {
    int lo = 0, hi = 0;
    auto coord = [&](int i) { return ax == 0 ? pts[static_cast<size_t>(i)].x : ax == 1 ? pts[static_cast<size_t>(i)].y : pts[static_cast<size_t>(i)].z; };
    for (int i = 1; i < n; ++i) {
      if (coord(i) < coord(lo)) lo = i;
      if (coord(i) > coord(hi)) hi = i;
    }
    double d = (pts[static_cast<size_t>(hi)] - pts[static_cast<size_t>(lo)]).norm();
    if (d > best) { best = d; i0 = lo; i1 = hi; }
  }
  if (best <= eps) {  // all points coincide
    return detail::planar_hull(pts, pts[0], {1, 0, 0}, {0, 1, 0}, {0, 0, 1});
  }
  Vec3 dir = (pts[static_cast<size_t>(i1)] - pts[static_cast<size_t>(i0)]).normalized();

  // Farthest from the line.
  int i2 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    Vec3 rel = pts[static_cast<size_t>(i)] - pts[static_cast<size_t>(i0)];
    double d = (rel - dir * rel.dot(dir)).norm();
    if (d > best) { best = d; i2 = i; }
  }
  if (i2 < 0) {  // collinear: embed in any plane containing the line
    Vec3 helper = std::abs(dir.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    Vec3 bv = dir.cross(helper).normalized();
    return detail::planar_hull(pts, pts[static_cast<size_t>(i0)], dir, bv, dir.cross(bv));
  }
  Vec3 nrm = dir.cross((pts[static_cast<size_t>(i2)] - pts[static_cast<size_t>(i0)])).normalized();

  // Farthest from the plane.
  int i3 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    double d = std::abs(nrm.dot(pts[static_cast<size_t>(i)] - pts[static_cast<size_t>(i0)]));
    if (d > best) { best = d; i3 = i; }
  }
  if (i3 < 0) {  // coplanar point cloud
    Vec3 bu = dir;
    Vec3 bv = nrm.cross(dir).normalized();
    return detail::planar_hull(pts, pts[static_cast<size_t>(i0)], bu, bv, nrm);
  }

  // Quickhull proper.
  std::vector<detail::QhFace> faces;
  auto make_face = [&](int a, int b, int c, Vec3 inside) {
    detail::QhFace f;
    f.a = a; f.b = b; f.c = c;
    f.n = (pts[static_cast<size_t>(b)] - pts[static_cast<size_t>(a)]).cross(pts[static_cast<size_t>(c)] - pts[static_cast<size_t>(a)]).normalized();
    f.d = f.n.dot(pts[static_cast<size_t>(a)]);
    if (f.n.dot(inside) > f.d) {  // flip so `inside` is on the non-positive side
      std::swap(f.b, f.c);
      f.n = f.n * -1.0;
      f.d = -f.d;
    }
    return f;
  };
  Vec3 centroid = (pts[static_cast<size_t>(i0)] + pts[static_cast<size_t>(i1)] + pts[static_cast<size_t>(i2)] + pts[static_cast<size_t>(i3)]) * 0.25;
  faces.push_back(make_face(i0, i1, i2, centroid));
  faces.push_back(make_face(i0, i1, i3, centroid));
  faces.push_back(make_face(i0, i2, i3, centroid));
  faces.push_back(make_face(i1, i2, i3, centroid));

  for (int i = 0; i < n; ++i) {
    for (auto& f : faces) {
      if (f.n.dot(pts[static_cast<size_t>(i)]) - f.d > eps) { f.outside.push_back(i); break; }
    }
  }

  for (int iter = 0; iter < 8 * n + 64; ++iter) {
    int fi = -1;
    for (size_t k = 0; k < faces.size(); ++k) {
      if (faces[k].alive && !faces[k].outside.empty()) { fi = static_cast<int>(k); break; }
    }
    if (fi < 0) break;
    // Farthest outside point of that face.
    int apex = faces[static_cast<size_t>(fi)].outside[0];
    double dmax = -1;
    for (int i : faces[static_cast<size_t>(fi)].outside) {
      double d = faces[static_cast<size_t>(fi)].n.dot(pts[static_cast<size_t>(i)]) - faces[static_cast<size_t>(fi)].d;
      if (d > dmax) { dmax = d; apex = i; }
    }
    // Visible faces and horizon.
    std::vector<int> visible;
    for (size_t k = 0; k < faces.size(); ++k) {
      if (faces[k].alive && faces[k].n.dot(pts[static_cast<size_t>(apex)]) - faces[k].d > eps) {
        visible.push_back(static_cast<int>(k));
      }
    }
    std::map<std::pair<int, int>, int> edge_use;
    for (int k : visible) {
      const auto& f = faces[static_cast<size_t>(k)];
      int vs[3] = {f.a, f.b, f.c};
      for (int e = 0; e < 3; ++e) {
        int u = vs[e], v = vs[(e + 1) % 3];
        edge_use[{std::min(u, v), std::max(u, v)}]++;
      }
    }
    std::vector<int> orphans;
    for (int k : visible) {
      for (int i : faces[static_cast<size_t>(k)].outside) {
        if (i != apex) orphans.push_back(i);
      }
      faces[static_cast<size_t>(k)].alive = false;
      faces[static_cast<size_t>(k)].outside.clear();
    }
    std::vector<size_t> fresh;
    for (const auto& [edge, uses] : edge_use) {
      if (uses != 1) continue;  // interior to the visible set
      detail::QhFace nf = make_face(edge.first, edge.second, apex, centroid);
      fresh.push_back(faces.size());
      faces.push_back(nf);
    }
    for (int i : orphans) {
      for (size_t k : fresh) {
        if (faces[k].n.dot(pts[static_cast<size_t>(i)]) - faces[k].d > eps) {
          faces[k].outside.push_back(i);
          break;
        }
      }
    }
  }

  Hull3D h;
  for (const auto& f : faces) {
    if (f.alive) h.faces.emplace_back(f.n, f.d);
  }
  return h;
}

// Support-slack violation against a 3D hull: positive outside, negative depth
// inside; planar hulls report max(in-plane violation, off-plane distance).
inline double signed_violation_3d(const Hull3D& h, Vec3 p) {
  if (h.planar) {
    double off = std::abs(h.plane_n.dot(p) - h.plane_d);
    Vec2 flat{h.bu.dot(p - h.origin), h.bv.dot(p - h.origin)};
    double inplane = signed_violation_2d(h.flat_hull, flat);
    // Exactly on the carrier plane the rim polygon decides, so interior
    // points keep their negative clearance instead of flattening to zero.
    if (off > 0.0) return std::max(inplane, off);
    return inplane;
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [n, d] : h.faces) worst = std::max(worst, n.dot(p) - d);
  return worst;
}

}  // namespace saddlekit
