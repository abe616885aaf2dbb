#pragma once

// Vertical-projection analysis of maps into 3-space: is the image surface the
// graph of a function over its projected domain? The combinatorial test asks
// for consistently oriented, pairwise interior-disjoint projected triangles;
// the numerical test compares the lower and upper envelopes over a grid. A
// failure of the interior maximum principle for a linear functional on a
// sub-disc certifies that some halfspace cut leaves a hat.

#include "convex.hpp"
#include "parallel.hpp"
#include "plmap.hpp"

namespace saddlekit {

inline PLMap project_xy(const PLMap& f) {
  require_map_sizes(f);
  if (f.space.kind != TargetKind::space3)
    throw std::invalid_argument("project_xy expects a map into 3-space");
  PLMap g;
  g.mesh = f.mesh;
  g.space = TargetSpace::plane();
  g.images.reserve(f.images.size());
  for (const TargetPoint& p : f.images) g.images.push_back(TargetPoint::plane(p.x(), p.y()));
  return g;
}

// ---------------------------------------------------------------------------
// boundary shape
// ---------------------------------------------------------------------------

struct BoundaryShapeReport {
  bool simple = false;    // no proper self-crossings
  bool convex = false;    // all turns one way (collinear allowed)
  int winding = 0;        // total turning / 2 pi; +1 for a CCW simple loop
};

inline BoundaryShapeReport check_boundary_convex(const std::vector<Vec2>& poly) {
  BoundaryShapeReport report;
  size_t n = poly.size();
  if (n < 3) return report;
  double scale = 0.0;
  for (size_t i = 0; i < n; i++) scale = std::max(scale, (poly[(i + 1) % n] - poly[i]).norm());
  double eps = 1e-12 * std::max(scale, 1e-30);

  report.simple = true;
  for (size_t i = 0; i < n && report.simple; i++) {
    for (size_t j = i + 1; j < n; j++) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;  // share a vertex
      if (segments_properly_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n], eps)) {
        report.simple = false;
        break;
      }
    }
  }

  bool has_pos = false, has_neg = false;
  double turning = 0.0;
  for (size_t i = 0; i < n; i++) {
    Vec2 d0 = poly[(i + 1) % n] - poly[i];
    Vec2 d1 = poly[(i + 2) % n] - poly[(i + 1) % n];
    double turn = cross(d0, d1);
    if (turn > eps * scale) has_pos = true;
    if (turn < -eps * scale) has_neg = true;
    turning += std::atan2(cross(d0, d1), dot(d0, d1));
  }
  report.convex = report.simple && !(has_pos && has_neg);
  report.winding = int(std::lround(turning / (2.0 * kPi)));
  return report;
}

inline BoundaryShapeReport check_boundary_convex(const PLMap& f) {
  const PLMap* flat = &f;
  PLMap projected;
  if (f.space.kind == TargetKind::space3) {
    projected = project_xy(f);
    flat = &projected;
  } else if (f.space.kind != TargetKind::plane) {
    throw std::invalid_argument("check_boundary_convex expects a flat target");
  }
  std::vector<Vec2> poly;
  poly.reserve(f.mesh.boundary.size());
  for (int v : f.mesh.boundary) poly.push_back(flat->image2(v));
  return check_boundary_convex(poly);
}

// ---------------------------------------------------------------------------
// graph property
// ---------------------------------------------------------------------------

struct GraphReport {
  BoundaryShapeReport boundary;
  bool orientation_consistent = false;  // projected triangles all positively oriented
  int flipped_cells = 0;
  int degenerate_cells = 0;
  std::vector<std::pair<int, int>> overlap_pairs;  // witnesses, capped
  int overlap_count = 0;
  bool graph = false;  // no overlaps and consistent orientation
};

inline GraphReport check_graph_property(const PLMap& f, int max_witnesses = 10) {
  PLMap p = f.space.kind == TargetKind::space3 ? project_xy(f) : f;
  if (p.space.kind != TargetKind::plane)
    throw std::invalid_argument("check_graph_property expects a plane or 3-space target");
  const DiscMesh& m = p.mesh;
  int F = m.triangle_count();
  GraphReport report;
  report.boundary = check_boundary_convex(p);

  double scale = std::max(image_diameter(p), 1e-30);
  double eps = 1e-12 * scale;

  std::vector<std::array<Vec2, 3>> proj(F);
  std::vector<BBox2> boxes(F);
  for (int t = 0; t < F; t++) {
    for (int k = 0; k < 3; k++) {
      proj[t][k] = p.image2(m.triangles[t][k]);
      boxes[t].expand(proj[t][k]);
    }
  }
  report.orientation_consistent = true;
  for (int t = 0; t < F; t++) {
    double a2 = cross(proj[t][1] - proj[t][0], proj[t][2] - proj[t][0]);
    if (a2 < -eps * scale) {
      report.flipped_cells++;
      report.orientation_consistent = false;
    } else if (a2 <= eps * scale) {
      report.degenerate_cells++;
      report.orientation_consistent = false;
    }
  }

  // Candidate pairs via a uniform bin grid over the projection, then the
  // exact strict-overlap test. Triangles sharing a mesh edge or vertex touch
  // with zero width, which the strict test does not flag.
  BBox2 all;
  for (int t = 0; t < F; t++) { all.expand(boxes[t].lo); all.expand(boxes[t].hi); }
  int bins = std::max(1, int(std::floor(std::sqrt(double(F)))));
  Vec2 ext = all.extent();
  double bx = std::max(ext.x, 1e-30) / bins, by = std::max(ext.y, 1e-30) / bins;
  std::vector<std::vector<int>> bucket(size_t(bins) * size_t(bins));
  auto bin_range = [&](const BBox2& b, int& x0, int& x1, int& y0, int& y1) {
    x0 = std::clamp(int((b.lo.x - all.lo.x) / bx), 0, bins - 1);
    x1 = std::clamp(int((b.hi.x - all.lo.x) / bx), 0, bins - 1);
    y0 = std::clamp(int((b.lo.y - all.lo.y) / by), 0, bins - 1);
    y1 = std::clamp(int((b.hi.y - all.lo.y) / by), 0, bins - 1);
  };
  for (int t = 0; t < F; t++) {
    int x0, x1, y0, y1;
    bin_range(boxes[t], x0, x1, y0, y1);
    for (int x = x0; x <= x1; x++)
      for (int y = y0; y <= y1; y++) bucket[size_t(y) * bins + x].push_back(t);
  }
  std::vector<std::pair<int, int>> candidates;
  for (const auto& cell : bucket) {
    for (size_t i = 0; i < cell.size(); i++)
      for (size_t j = i + 1; j < cell.size(); j++) candidates.push_back({cell[i], cell[j]});
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<char> hit(candidates.size(), 0);
  parallel_for(int(candidates.size()), [&](int i) {
    auto [s, t] = candidates[i];
    if (!boxes[s].overlaps(boxes[t], eps)) return;
    hit[i] = triangle_interiors_overlap_2d(proj[s], proj[t], eps) ? 1 : 0;
  });
  for (size_t i = 0; i < candidates.size(); i++) {
    if (!hit[i]) continue;
    report.overlap_count++;
    if (int(report.overlap_pairs.size()) < max_witnesses)
      report.overlap_pairs.push_back(candidates[i]);
  }
  report.graph = report.overlap_count == 0 && report.orientation_consistent;
  return report;
}

// ---------------------------------------------------------------------------
// lower/upper envelopes over the projection
// ---------------------------------------------------------------------------

struct EnvelopeField {
  int grid_n = 0;
  BBox2 bounds;
  std::vector<double> alpha, beta;  // row-major grid_n x grid_n; NaN off-surface
  std::vector<char> covered;
  double max_gap = 0.0;  // max beta - alpha over covered nodes
  int covered_count = 0;

  double node_x(int i) const { return bounds.lo.x + (bounds.hi.x - bounds.lo.x) * (i + 0.5) / grid_n; }
  double node_y(int j) const { return bounds.lo.y + (bounds.hi.y - bounds.lo.y) * (j + 0.5) / grid_n; }
};

inline EnvelopeField envelopes(const PLMap& f, int grid_n = 128) {
  if (f.space.kind != TargetKind::space3)
    throw std::invalid_argument("envelopes expects a map into 3-space");
  require_map_sizes(f);
  const DiscMesh& m = f.mesh;
  EnvelopeField field;
  field.grid_n = grid_n;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  field.alpha.assign(size_t(grid_n) * grid_n, nan);
  field.beta.assign(size_t(grid_n) * grid_n, nan);
  field.covered.assign(size_t(grid_n) * grid_n, 0);

  for (int v = 0; v < m.vertex_count(); v++)
    field.bounds.expand({f.images[v].x(), f.images[v].y()});
  double scale = std::max(field.bounds.extent().norm(), 1e-30);
  double eps = 1e-12 * scale;

  parallel_for(grid_n, [&](int j) {
    double y = field.node_y(j);
    for (int i = 0; i < grid_n; i++) {
      double x = field.node_x(i);
      Vec2 q{x, y};
      double lo = 0, hi = 0;
      bool any = false;
      for (int t = 0; t < m.triangle_count(); t++) {
        Vec2 a{f.images[m.triangles[t][0]].x(), f.images[m.triangles[t][0]].y()};
        Vec2 b{f.images[m.triangles[t][1]].x(), f.images[m.triangles[t][1]].y()};
        Vec2 c{f.images[m.triangles[t][2]].x(), f.images[m.triangles[t][2]].y()};
        double det = cross(b - a, c - a);
        if (std::fabs(det) <= eps * scale) continue;  // vertical cell: no height sample
        double l1 = cross(q - a, c - a) / det;
        double l2 = cross(b - a, q - a) / det;
        if (l1 < -1e-12 || l2 < -1e-12 || l1 + l2 > 1.0 + 1e-12) continue;
        double z = f.images[m.triangles[t][0]].z() * (1.0 - l1 - l2) +
                   f.images[m.triangles[t][1]].z() * l1 + f.images[m.triangles[t][2]].z() * l2;
        if (!any) { lo = hi = z; any = true; }
        lo = std::min(lo, z);
        hi = std::max(hi, z);
      }
      if (any) {
        size_t idx = size_t(j) * grid_n + i;
        field.alpha[idx] = lo;
        field.beta[idx] = hi;
        field.covered[idx] = 1;
      }
    }
  });
  for (size_t idx = 0; idx < field.covered.size(); idx++) {
    if (!field.covered[idx]) continue;
    field.covered_count++;
    field.max_gap = std::max(field.max_gap, field.beta[idx] - field.alpha[idx]);
  }
  return field;
}

// ---------------------------------------------------------------------------
// interior maximum principle for linear functionals
// ---------------------------------------------------------------------------

struct MaxPrincipleReport {
  bool holds = false;
  double rim_max = 0.0;
  double interior_max = 0.0;
  double excess = 0.0;  // interior_max - rim_max, clamped at 0
  double tol_used = 0.0;
  int worst_vertex = -1;
  int rim_length = 0;
};

// Max of the linear functional lambda . f over a sub-disc must be attained on
// its rim cycle (within a tolerance scaled by the functional's range over the
// whole map). A violation means the halfspace { lambda . q > c } cuts a hat
// out of the sub-disc for c just below the interior maximum.
inline MaxPrincipleReport check_max_principle(const PLMap& f, const Vec3& lambda,
                                              const std::vector<int>& cells) {
  require_map_sizes(f);
  if (f.space.kind == TargetKind::cone)
    throw std::invalid_argument("check_max_principle expects a flat target");
  EdgeTable et = build_edge_table(f.mesh);
  if (!is_subdisc(f.mesh, et, cells))
    throw std::invalid_argument("check_max_principle needs a sub-complex that is a disc");

  MaxPrincipleReport report;
  std::vector<int> rim = rim_cycle(f.mesh, et, cells);
  report.rim_length = int(rim.size());

  auto value = [&](int v) { return dot(lambda, f.image3(v)); };
  double global_lo = value(0), global_hi = global_lo;
  for (int v = 1; v < f.mesh.vertex_count(); v++) {
    double x = value(v);
    global_lo = std::min(global_lo, x);
    global_hi = std::max(global_hi, x);
  }
  report.tol_used = 1e-7 * std::max(global_hi - global_lo, 1e-30);

  std::vector<char> on_rim(f.mesh.vertex_count(), 0);
  for (int v : rim) on_rim[v] = 1;
  bool have_rim = false, have_interior = false;
  std::vector<char> in_scope(f.mesh.vertex_count(), 0);
  for (int t : cells)
    for (int k = 0; k < 3; k++) in_scope[f.mesh.triangles[t][k]] = 1;
  for (int v = 0; v < f.mesh.vertex_count(); v++) {
    if (!in_scope[v]) continue;
    double x = value(v);
    if (on_rim[v]) {
      report.rim_max = have_rim ? std::max(report.rim_max, x) : x;
      have_rim = true;
    } else {
      if (!have_interior || x > report.interior_max) {
        report.interior_max = x;
        report.worst_vertex = v;
      }
      have_interior = true;
    }
  }
  if (!have_interior) {
    // no interior vertices: the principle holds trivially
    report.interior_max = report.rim_max;
    report.holds = true;
    return report;
  }
  report.excess = std::max(0.0, report.interior_max - report.rim_max);
  report.holds = report.excess <= report.tol_used;
  return report;
}

}  // namespace saddlekit
