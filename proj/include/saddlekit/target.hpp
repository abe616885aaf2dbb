#pragma once

// Target geometries a disc can map into: the Euclidean plane, Euclidean
// 3-space, and the flat cone of total angle >= 2*pi (a CAT(0) disc with one
// singular point at the tip). Cone points are polar pairs (r, theta) with
// theta in [0, angle).
//
// Geodesics on the cone: let d be the smaller angular separation of the two
// points around the tip. For d < pi the geodesic avoids the tip and is the
// chord of the unfolded wedge; for d >= pi it is the two-leg radial path
// through the tip of length r_x + r_y (the tie d == pi also runs through the
// tip; both descriptions have equal length there).

#include "core.hpp"

namespace saddlekit {

enum class TargetKind { plane, space3, cone };

struct TargetSpace {
  TargetKind kind = TargetKind::plane;
  double cone_angle = 2.0 * kPi;   // total angle at the tip, >= 2*pi
  double cone_radius = 1.0;        // radial extent of the cone disc

  [[nodiscard]] int dim() const { return kind == TargetKind::space3 ? 3 : 2; }

  static TargetSpace plane() { return {TargetKind::plane, 2.0 * kPi, 1.0}; }
  static TargetSpace space3() { return {TargetKind::space3, 2.0 * kPi, 1.0}; }
  static TargetSpace cone(double angle, double radius = 1.0) {
    if (!(angle >= 2.0 * kPi - 1e-12)) {
      throw std::invalid_argument("cone angle must be at least 2*pi");
    }
    return {TargetKind::cone, angle, radius};
  }
};

// One point of a target space. Interpretation depends on the space kind:
// plane (x, y), space3 (x, y, z), cone (r, theta).
struct TargetPoint {
  std::array<double, 3> v{0.0, 0.0, 0.0};

  static TargetPoint plane(double x, double y) { return {{x, y, 0.0}}; }
  static TargetPoint space(double x, double y, double z) { return {{x, y, z}}; }
  static TargetPoint cone(double r, double theta) { return {{r, theta, 0.0}}; }

  [[nodiscard]] double x() const { return v[0]; }
  [[nodiscard]] double y() const { return v[1]; }
  [[nodiscard]] double z() const { return v[2]; }
  [[nodiscard]] double r() const { return v[0]; }
  [[nodiscard]] double theta() const { return v[1]; }
  [[nodiscard]] Vec2 as_vec2() const { return {v[0], v[1]}; }
  [[nodiscard]] Vec3 as_vec3() const { return {v[0], v[1], v[2]}; }

  [[nodiscard]] bool same_bits(const TargetPoint& o) const {
    return v[0] == o.v[0] && v[1] == o.v[1] && v[2] == o.v[2];
  }
};

inline void require_valid_point(const TargetSpace& s, const TargetPoint& p) {
  if (s.kind == TargetKind::cone) {
    if (p.r() < 0.0 || p.r() > s.cone_radius + 1e-12) {
      throw std::invalid_argument("cone point radius out of bounds");
    }
  }
}

namespace detail {

// Chart position of a cone point relative to a reference angle: the wedge is
// unrolled so that angular offsets become plain polar angles. Only meaningful
// while the offset stays below pi in magnitude.
inline Vec2 cone_chart(const TargetPoint& p, double ref_theta, double period) {
  double off = wrap_signed(p.theta() - ref_theta, period);
  return {p.r() * std::cos(off), p.r() * std::sin(off)};
}

}  // namespace detail

inline double distance(const TargetSpace& s, const TargetPoint& a, const TargetPoint& b) {
  switch (s.kind) {
    case TargetKind::plane:
      return (a.as_vec2() - b.as_vec2()).norm();
    case TargetKind::space3:
      return (a.as_vec3() - b.as_vec3()).norm();
    case TargetKind::cone: {
      double d = std::abs(wrap_signed(b.theta() - a.theta(), s.cone_angle));
      if (d >= kPi) return a.r() + b.r();
      return std::sqrt(std::max(0.0, a.r() * a.r() + b.r() * b.r() -
                                          2.0 * a.r() * b.r() * std::cos(d)));
    }
  }
  return 0.0;
}

// Unit-speed geodesic between two target points. eval(0) == x, eval(length) == y.
struct GeodesicSegment {
  TargetSpace space;
  TargetPoint a, b;
  double length = 0.0;
  bool through_tip = false;  // cone only
  double dtheta = 0.0;       // cone, signed angular travel a -> b (|dtheta| < pi)

  [[nodiscard]] TargetPoint eval(double t) const {
    t = std::clamp(t, 0.0, length);
    switch (space.kind) {
      case TargetKind::plane: {
        Vec2 pa = a.as_vec2(), pb = b.as_vec2();
        Vec2 q = length > 0 ? pa + (pb - pa) * (t / length) : pa;
        return TargetPoint::plane(q.x, q.y);
      }
      case TargetKind::space3: {
        Vec3 pa = a.as_vec3(), pb = b.as_vec3();
        Vec3 q = length > 0 ? pa + (pb - pa) * (t / length) : pa;
        return TargetPoint::space(q.x, q.y, q.z);
      }
      case TargetKind::cone: {
        if (through_tip) {
          if (t <= a.r()) return TargetPoint::cone(a.r() - t, a.theta());
          return TargetPoint::cone(t - a.r(), b.theta());
        }
        // Chord in the unfolded wedge with `a` on the positive axis.
        Vec2 pa{a.r(), 0.0};
        Vec2 pb{b.r() * std::cos(dtheta), b.r() * std::sin(dtheta)};
        Vec2 q = length > 0 ? pa + (pb - pa) * (t / length) : pa;
        double r = q.norm();
        double theta = wrap_angle(a.theta() + std::atan2(q.y, q.x), space.cone_angle);
        return TargetPoint::cone(r, theta);
      }
    }
    return a;
  }
};

inline GeodesicSegment geodesic(const TargetSpace& s, const TargetPoint& x, const TargetPoint& y) {
  require_valid_point(s, x);
  require_valid_point(s, y);
  GeodesicSegment g;
  g.space = s;
  g.a = x;
  g.b = y;
  if (s.kind == TargetKind::cone) {
    double d = wrap_signed(y.theta() - x.theta(), s.cone_angle);
    if (std::abs(d) >= kPi) {
      g.through_tip = true;
      g.length = x.r() + y.r();
    } else {
      g.dtheta = d;
      g.length = distance(s, x, y);
    }
  } else {
    g.length = distance(s, x, y);
  }
  return g;
}

// Distance from a point to a geodesic segment. Flat targets are closed-form;
// on the cone, t -> d(p, gamma(t)) is convex (CAT(0)), so golden-section
// search converges to the global minimum.
inline double point_segment_distance(const TargetSpace& s, const TargetPoint& p,
                                     const GeodesicSegment& g) {
  if (s.kind == TargetKind::plane || s.kind == TargetKind::space3) {
    Vec3 a = g.a.as_vec3(), b = g.b.as_vec3(), q = p.as_vec3();
    if (s.kind == TargetKind::plane) { a.z = b.z = q.z = 0.0; }
    Vec3 ab = b - a;
    double den = ab.norm2();
    double t = den > 0 ? std::clamp((q - a).dot(ab) / den, 0.0, 1.0) : 0.0;
    return (q - (a + ab * t)).norm();
  }
  double lo = 0.0, hi = g.length;
  auto f = [&](double t) { return distance(s, p, g.eval(t)); };
  const double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 120 && hi - lo > 1e-14 * std::max(1.0, g.length); ++it) {
    if (f1 <= f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - inv_phi * (hi - lo); f1 = f(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + inv_phi * (hi - lo); f2 = f(x2);
    }
  }
  return std::min({f(lo), f1, f2, f(hi)});
}

}  // namespace saddlekit
