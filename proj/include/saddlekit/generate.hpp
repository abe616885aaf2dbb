#pragma once

// Built-in domain meshes and example maps. The workhorse is disc_grid(n): a
// hexagonal polar triangulation of the unit disc whose ring k carries 6k
// vertices at radius k/n. Its triangles are near-equilateral, which keeps the
// cotangent weights positive (Delaunay) — several algorithms rely on that.

#include <optional>

#include "expr.hpp"
#include "mesh.hpp"
#include "plmap.hpp"

namespace saddlekit {

// ---------------------------------------------------------------------------
// disc_grid
// ---------------------------------------------------------------------------

inline int disc_grid_ring_start(int k) { return k == 0 ? 0 : 1 + 3 * k * (k - 1); }
inline int disc_grid_ring_size(int k) { return k == 0 ? 1 : 6 * k; }

inline DiscMesh disc_grid(int n) {
  if (n < 1) throw std::invalid_argument("disc_grid: n must be >= 1");
  DiscMesh m;
  m.vertices.reserve(1 + 3 * n * (n + 1));
  m.vertices.push_back({0.0, 0.0});
  for (int k = 1; k <= n; k++) {
    double radius = double(k) / double(n);
    int count = 6 * k;
    for (int j = 0; j < count; j++) {
      double theta = 2.0 * kPi * double(j) / double(count);
      m.vertices.push_back({radius * std::cos(theta), radius * std::sin(theta)});
    }
  }

  // Innermost fan around the center.
  int r1 = disc_grid_ring_start(1);
  for (int j = 0; j < 6; j++) {
    m.triangles.push_back({0, r1 + j, r1 + (j + 1) % 6});
  }

  // Zipper between consecutive rings, advancing whichever side has the
  // smaller next angle. Each advance emits one triangle; a full band between
  // ring k and ring k+1 has 6k + 6(k+1) triangles.
  for (int k = 1; k < n; k++) {
    int inner_start = disc_grid_ring_start(k), inner_count = 6 * k;
    int outer_start = disc_grid_ring_start(k + 1), outer_count = 6 * (k + 1);
    int i = 0, j = 0;
    auto inner_at = [&](int idx) { return inner_start + idx % inner_count; };
    auto outer_at = [&](int idx) { return outer_start + idx % outer_count; };
    while (i < inner_count || j < outer_count) {
      double next_inner = 2.0 * kPi * double(i + 1) / double(inner_count);
      double next_outer = 2.0 * kPi * double(j + 1) / double(outer_count);
      bool advance_outer;
      if (i >= inner_count) advance_outer = true;
      else if (j >= outer_count) advance_outer = false;
      // Advance the inner ring on angle ties (the shared sector corners).
      // Taking the outer ring there fans a single inner vertex across the
      // corner and produces obtuse pairs with negative cotangent weights;
      // the inner advance keeps the short diagonal and the band Delaunay.
      else advance_outer = next_outer < next_inner - 1e-12;
      if (advance_outer) {
        m.triangles.push_back({inner_at(i), outer_at(j), outer_at(j + 1)});
        j++;
      } else {
        m.triangles.push_back({inner_at(i), outer_at(j), inner_at(i + 1)});
        i++;
      }
    }
  }

  int bstart = disc_grid_ring_start(n);
  for (int j = 0; j < 6 * n; j++) m.boundary.push_back(bstart + j);
  return m;
}

// ---------------------------------------------------------------------------
// piecewise-linear radial profiles
// ---------------------------------------------------------------------------

struct RadialProfile {
  // (r, value) control points with strictly increasing r covering [0, 1].
  std::vector<std::pair<double, double>> points;

  double operator()(double r) const {
    if (points.empty()) return 0.0;
    if (r <= points.front().first) return points.front().second;
    for (size_t i = 0; i + 1 < points.size(); i++) {
      auto [r0, v0] = points[i];
      auto [r1, v1] = points[i + 1];
      if (r <= r1) {
        double t = (r - r0) / (r1 - r0);
        return v0 + t * (v1 - v0);
      }
    }
    return points.back().second;
  }
};

// Crater profile used by the fold generators: radius first rises above 0.5,
// then folds back down to 0.3 before climbing out to 1 at the boundary. The
// image annulus 0.3 < |w| < 0.5 is covered three times, so discs and
// half-planes cutting into that annulus leave compact islands in the domain.
// Breakpoints sit on multiples of 1/8 so they are sampled exactly whenever
// 8 divides n.
inline RadialProfile fold_profile() {
  return RadialProfile{{{0.0, 0.0},
                        {0.25, 0.5},
                        {0.375, 0.5},
                        {0.5, 0.3},
                        {0.625, 0.45},
                        {0.75, 0.62},
                        {1.0, 1.0}}};
}

// Vertical lift for the embedded fold: a cap over the crater that dies out at
// r = 0.625, leaving the outer annulus and the boundary in the z = 0 plane.
inline RadialProfile fold_lift_profile(double lift) {
  return RadialProfile{{{0.0, lift}, {0.625, 0.0}, {1.0, 0.0}}};
}

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

struct Generated {
  DiscMesh mesh;
  std::optional<PLMap> map;  // absent for the bare domain mesh
};

inline Generated generate_disc(int n) { return Generated{disc_grid(n), std::nullopt}; }

inline Generated generate_graph(int n, const HeightFn& height) {
  Generated g{disc_grid(n), std::nullopt};
  PLMap f;
  f.mesh = g.mesh;
  f.space = TargetSpace::space3();
  f.images.reserve(f.mesh.vertex_count());
  for (const Vec2& v : f.mesh.vertices) {
    f.images.push_back(TargetPoint::space(v.x, v.y, height(v.x, v.y)));
  }
  g.map = std::move(f);
  return g;
}

inline Generated generate_bump(int n, double height, double width) {
  if (width <= 0) throw std::invalid_argument("bump: width must be positive");
  return generate_graph(n, [height, width](double x, double y) {
    double r = std::hypot(x, y);
    return height * std::exp(-(r / width) * (r / width));
  });
}

// Planar crater fold: v at polar (r, theta) maps to fold_profile()(r) * e(theta).
inline Generated generate_fold(int n) {
  Generated g{disc_grid(n), std::nullopt};
  RadialProfile rho = fold_profile();
  PLMap f;
  f.mesh = g.mesh;
  f.space = TargetSpace::plane();
  f.images.reserve(f.mesh.vertex_count());
  for (const Vec2& v : f.mesh.vertices) {
    double r = v.norm();
    Vec2 dir = r > 0 ? v / r : Vec2{1.0, 0.0};
    double s = rho(r);
    f.images.push_back(TargetPoint::plane(s * dir.x, s * dir.y));
  }
  g.map = std::move(f);
  return g;
}

// The same crater, embedded in 3-space with a vertical lift over the center.
// The result is an injective surface with an overhang: vertical projection is
// 3-to-1 over the annulus 0.3 < |(x,y)| < 0.5.
inline Generated generate_fold_surface(int n, double lift) {
  Generated g{disc_grid(n), std::nullopt};
  RadialProfile rho = fold_profile();
  RadialProfile zeta = fold_lift_profile(lift);
  PLMap f;
  f.mesh = g.mesh;
  f.space = TargetSpace::space3();
  f.images.reserve(f.mesh.vertex_count());
  for (const Vec2& v : f.mesh.vertices) {
    double r = v.norm();
    Vec2 dir = r > 0 ? v / r : Vec2{1.0, 0.0};
    double s = rho(r);
    f.images.push_back(TargetPoint::space(s * dir.x, s * dir.y, zeta(r)));
  }
  g.map = std::move(f);
  return g;
}

// Map onto a cone of total angle `cone_angle`: (r, theta) in the domain goes
// to (r, theta * cone_angle / (2 pi)), so the boundary circle winds once
// around the tip at angular speed cone_angle / (2 pi).
inline Generated generate_cone_disc(int n, double cone_angle) {
  Generated g{disc_grid(n), std::nullopt};
  PLMap f;
  f.mesh = g.mesh;
  f.space = TargetSpace::cone(cone_angle, 1.0);
  f.images.reserve(f.mesh.vertex_count());
  double speedup = cone_angle / (2.0 * kPi);
  for (const Vec2& v : f.mesh.vertices) {
    double r = v.norm();
    double theta = std::atan2(v.y, v.x);
    if (theta < 0) theta += 2.0 * kPi;
    f.images.push_back(TargetPoint::cone(r, wrap_angle(theta * speedup, cone_angle)));
  }
  g.map = std::move(f);
  return g;
}

}  // namespace saddlekit
