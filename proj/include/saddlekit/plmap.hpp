#pragma once

// Piecewise-linear map from a triangulated disc into a target space: one image
// per vertex, interpolated affinely on each triangle (cone triangles are
// affine in their unfolded chart and must not straddle the tip).

#include "mesh.hpp"
#include "target.hpp"

namespace saddlekit {

struct PLMap {
  DiscMesh mesh;
  TargetSpace space;
  std::vector<TargetPoint> images;

  [[nodiscard]] const TargetPoint& image(int v) const { return images[static_cast<size_t>(v)]; }
  [[nodiscard]] Vec2 image2(int v) const { return images[static_cast<size_t>(v)].as_vec2(); }
  [[nodiscard]] Vec3 image3(int v) const { return images[static_cast<size_t>(v)].as_vec3(); }
};

inline void require_map_sizes(const PLMap& f) {
  if (f.images.size() != f.mesh.vertices.size()) {
    throw std::invalid_argument("image count does not match vertex count");
  }
}

inline PLMap identity_map(const DiscMesh& m) {
  PLMap f;
  f.mesh = m;
  f.space = TargetSpace::plane();
  f.images.reserve(m.vertices.size());
  for (const Vec2& p : m.vertices) f.images.push_back(TargetPoint::plane(p.x, p.y));
  return f;
}

inline double image_edge_length(const PLMap& f, int a, int b) {
  return distance(f.space, f.image(a), f.image(b));
}

// Scale of the image, used to size relative tolerances. For flat targets this
// is the bounding-box diagonal; for the cone, the diameter through the tip.
inline double image_diameter(const PLMap& f) {
  if (f.space.kind == TargetKind::cone) {
    double rmax = 0;
    for (const auto& p : f.images) rmax = std::max(rmax, p.r());
    return 2.0 * rmax;
  }
  BBox3 bb;
  for (const auto& p : f.images) {
    Vec3 q = p.as_vec3();
    if (f.space.kind == TargetKind::plane) q.z = 0;
    bb.expand(q);
  }
  return bb.diagonal();
}

// Largest image diameter of a single cell; the default fattening tolerance of
// geodesic cuts is twice this.
inline double max_cell_image_diameter(const PLMap& f) {
  double worst = 0;
  for (const auto& tr : f.mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      worst = std::max(worst, image_edge_length(f, tr[static_cast<size_t>(k)], tr[static_cast<size_t>((k + 1) % 3)]));
    }
  }
  return worst;
}

// Uniform 1->4 refinement of the map: edge midpoints take the geodesic
// midpoint of their endpoint images, so the refined map is pointwise the same
// map on flat targets and chart-affine-compatible on the cone.
inline PLMap refine_plmap(const PLMap& f) {
  require_map_sizes(f);
  MeshRefinement r = refine_mesh(f.mesh);
  PLMap out;
  out.mesh = std::move(r.mesh);
  out.space = f.space;
  out.images = f.images;
  out.images.reserve(out.mesh.vertices.size());
  for (const auto& [a, b] : r.midpoint_of) {
    if (f.space.kind == TargetKind::cone) {
      GeodesicSegment g = geodesic(f.space, f.image(a), f.image(b));
      out.images.push_back(g.eval(0.5 * g.length));
    } else {
      const TargetPoint& pa = f.image(a);
      const TargetPoint& pb = f.image(b);
      out.images.push_back({{0.5 * (pa.v[0] + pb.v[0]), 0.5 * (pa.v[1] + pb.v[1]),
                             0.5 * (pa.v[2] + pb.v[2])}});
    }
  }
  return out;
}

inline PLMap refine_plmap(PLMap f, int levels) {
  for (int i = 0; i < levels; ++i) f = refine_plmap(f);
  return f;
}

}  // namespace saddlekit
