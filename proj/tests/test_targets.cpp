#include <catch2/catch_amalgamated.hpp>

#include <saddlekit/convex.hpp>
#include <saddlekit/target.hpp>

#include <cmath>
#include <queue>
#include <vector>

using namespace saddlekit;

TEST_CASE("flat target distances are euclidean") {
  TargetSpace p2 = TargetSpace::plane();
  CHECK(distance(p2, TargetPoint::plane(0, 0), TargetPoint::plane(3, 4)) ==
        Catch::Approx(5.0).margin(1e-15));

  TargetSpace s3 = TargetSpace::space3();
  CHECK(distance(s3, TargetPoint::space(1, 2, 3), TargetPoint::space(1, 2, 3)) == 0.0);
  CHECK(distance(s3, TargetPoint::space(0, 0, 0), TargetPoint::space(2, 3, 6)) ==
        Catch::Approx(7.0).margin(1e-15));
}

TEST_CASE("cone distances match the wedge geometry") {
  double omega = 3.0 * kPi;
  TargetSpace cone = TargetSpace::cone(omega, 2.0);

  SECTION("along one ray") {
    CHECK(distance(cone, TargetPoint::cone(0.3, 1.0), TargetPoint::cone(0.9, 1.0)) ==
          Catch::Approx(0.6).margin(1e-15));
  }

  SECTION("tip to anywhere is the radius") {
    CHECK(distance(cone, TargetPoint::cone(0, 0), TargetPoint::cone(0.75, 4.0)) ==
          Catch::Approx(0.75).margin(1e-15));
  }

  SECTION("short angular gap: unfolded chord") {
    double d = distance(cone, TargetPoint::cone(1, 0), TargetPoint::cone(1, 1.0));
    CHECK(d == Catch::Approx(2.0 * std::sin(0.5)).margin(1e-12));
  }

  SECTION("wide angular gap routes through the tip") {
    // angular separation 1.5 pi (>= pi either way around the 3 pi cone)
    double d = distance(cone, TargetPoint::cone(1, 0), TargetPoint::cone(1, 1.5 * kPi));
    CHECK(d == Catch::Approx(2.0).margin(1e-15));
    // wrap the long way: 1.6 pi forward = 1.4 pi backward, still >= pi
    d = distance(cone, TargetPoint::cone(0.5, 0.1), TargetPoint::cone(0.7, 0.1 + 1.6 * kPi));
    CHECK(d == Catch::Approx(1.2).margin(1e-15));
  }

  SECTION("symmetry and identity") {
    Rng rng(7);
    for (int k = 0; k < 200; k++) {
      TargetPoint a = TargetPoint::cone(rng.uniform(0, 1), rng.uniform(0, omega));
      TargetPoint b = TargetPoint::cone(rng.uniform(0, 1), rng.uniform(0, omega));
      CHECK(distance(cone, a, b) == Catch::Approx(distance(cone, b, a)).margin(1e-15));
      CHECK(distance(cone, a, a) == 0.0);
    }
  }
}

TEST_CASE("cone distance agrees with a dense shortest-path graph") {
  // Independent check: build a graph on a polar grid of the cone with exact
  // pairwise lengths on short edges, then compare Dijkstra to the closed form.
  double omega = 3.0 * kPi;
  TargetSpace cone = TargetSpace::cone(omega, 1.0);

  const int nr = 40, nt = 180;
  auto node = [&](int i, int j) { return (i - 1) * nt + j; };  // i in 1..nr
  const int apex = nr * nt;
  auto radius = [&](int i) { return double(i) / nr; };
  auto angle = [&](int j) { return omega * double(j) / nt; };

  // Chord length for small angular separation, independent of distance().
  auto chord = [&](double r1, double t1, double r2, double t2) {
    double d = std::remainder(t1 - t2, omega);
    return std::sqrt(std::max(0.0, r1 * r1 + r2 * r2 - 2 * r1 * r2 * std::cos(d)));
  };

  std::vector<std::vector<std::pair<int, double>>> adj(size_t(apex) + 1);
  auto link = [&](int u, int v, double w) {
    adj[size_t(u)].push_back({v, w});
    adj[size_t(v)].push_back({u, w});
  };
  for (int i = 1; i <= nr; i++) {
    for (int j = 0; j < nt; j++) {
      int jn = (j + 1) % nt;
      link(node(i, j), node(i, jn), chord(radius(i), angle(j), radius(i), angle(jn)));
      if (i < nr) {
        link(node(i, j), node(i + 1, j), radius(i + 1) - radius(i));
        link(node(i, j), node(i + 1, jn), chord(radius(i), angle(j), radius(i + 1), angle(jn)));
        link(node(i + 1, j), node(i, jn), chord(radius(i + 1), angle(j), radius(i), angle(jn)));
      }
    }
    if (i == 1)
      for (int j = 0; j < nt; j++) link(apex, node(1, j), radius(1));
  }

  auto dijkstra = [&](int src) {
    std::vector<double> dist(adj.size(), std::numeric_limits<double>::infinity());
    std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                        std::greater<>> pq;
    dist[size_t(src)] = 0;
    pq.push({0.0, src});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[size_t(u)]) continue;
      for (auto [v, w] : adj[size_t(u)])
        if (d + w < dist[size_t(v)]) {
          dist[size_t(v)] = d + w;
          pq.push({dist[size_t(v)], v});
        }
    }
    return dist;
  };

  Rng rng(11);
  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> pairs;
  for (int k = 0; k < 12; k++)
    pairs.push_back({{1 + rng.index(nr), rng.index(nt)}, {1 + rng.index(nr), rng.index(nt)}});
  // forced wide-angle pairs that must route through the tip
  pairs.push_back({{nr, 0}, {nr, nt / 2}});
  pairs.push_back({{nr / 2, 10}, {nr, 10 + nt / 2 - 6}});

  for (auto [pa, pb] : pairs) {
    TargetPoint a = TargetPoint::cone(radius(pa.first), angle(pa.second));
    TargetPoint b = TargetPoint::cone(radius(pb.first), angle(pb.second));
    double formula = distance(cone, a, b);
    std::vector<double> dist = dijkstra(node(pa.first, pa.second));
    double graph = dist[size_t(node(pb.first, pb.second))];
    CAPTURE(a.r(), a.theta(), b.r(), b.theta(), formula, graph);
    // graph paths are concatenations of true distances: never below the metric
    CHECK(graph >= formula - 1e-9);
    // and a fine grid contains a path close to the geodesic
    CHECK(graph <= 1.05 * formula + 0.05);
  }
}

TEST_CASE("cone triangle inequality holds on random triples") {
  double omega = 2.5 * kPi;
  TargetSpace cone = TargetSpace::cone(omega, 1.0);
  Rng rng(3);
  for (int k = 0; k < 10000; k++) {
    TargetPoint a = TargetPoint::cone(rng.uniform(0, 1), rng.uniform(0, omega));
    TargetPoint b = TargetPoint::cone(rng.uniform(0, 1), rng.uniform(0, omega));
    TargetPoint c = TargetPoint::cone(rng.uniform(0, 1), rng.uniform(0, omega));
    double ab = distance(cone, a, b), bc = distance(cone, b, c), ac = distance(cone, a, c);
    REQUIRE(ac <= ab + bc + 1e-12);
  }
}

TEST_CASE("geodesics parameterize by arc length") {
  double omega = 3.0 * kPi;
  TargetSpace cone = TargetSpace::cone(omega, 2.0);

  auto check_parametrization = [&](const TargetSpace& s, TargetPoint a, TargetPoint b) {
    GeodesicSegment g = geodesic(s, a, b);
    CHECK(distance(s, g.eval(0), a) < 1e-12);
    CHECK(distance(s, g.eval(g.length), b) < 1e-12);
    for (double frac : {0.25, 0.5, 0.75}) {
      double t = frac * g.length;
      CHECK(distance(s, a, g.eval(t)) == Catch::Approx(t).margin(1e-9));
      CHECK(distance(s, g.eval(t), b) == Catch::Approx(g.length - t).margin(1e-9));
    }
  };

  SECTION("plane and 3-space chords") {
    check_parametrization(TargetSpace::plane(), TargetPoint::plane(0, 1), TargetPoint::plane(4, -2));
    check_parametrization(TargetSpace::space3(), TargetPoint::space(1, 0, 2),
                          TargetPoint::space(-1, 3, 0));
  }

  SECTION("cone chord stays off the tip") {
    TargetPoint a = TargetPoint::cone(1.0, 0.2), b = TargetPoint::cone(0.8, 0.2 + 2.0);
    GeodesicSegment g = geodesic(cone, a, b);
    CHECK_FALSE(g.through_tip);
    check_parametrization(cone, a, b);
  }

  SECTION("wide-gap cone geodesic passes the tip") {
    TargetPoint a = TargetPoint::cone(0.6, 0.0), b = TargetPoint::cone(0.9, 1.5 * kPi);
    GeodesicSegment g = geodesic(cone, a, b);
    CHECK(g.through_tip);
    CHECK(g.length == Catch::Approx(1.5).margin(1e-15));
    CHECK(g.eval(0.6).r() == Catch::Approx(0.0).margin(1e-15));
    check_parametrization(cone, a, b);
  }

  SECTION("random cone pairs") {
    Rng rng(5);
    for (int k = 0; k < 50; k++) {
      TargetPoint a = TargetPoint::cone(rng.uniform(0.01, 2), rng.uniform(0, omega));
      TargetPoint b = TargetPoint::cone(rng.uniform(0.01, 2), rng.uniform(0, omega));
      check_parametrization(cone, a, b);
    }
  }
}

TEST_CASE("point-to-segment distance") {
  SECTION("plane closed forms") {
    TargetSpace p2 = TargetSpace::plane();
    GeodesicSegment g = geodesic(p2, TargetPoint::plane(-1, 0), TargetPoint::plane(1, 0));
    CHECK(point_segment_distance(p2, TargetPoint::plane(0.3, 2), g) ==
          Catch::Approx(2.0).margin(1e-15));
    CHECK(point_segment_distance(p2, TargetPoint::plane(2, 1), g) ==
          Catch::Approx(std::sqrt(2.0)).margin(1e-15));
    CHECK(point_segment_distance(p2, TargetPoint::plane(0.5, 0), g) == 0.0);
  }

  SECTION("cone distance matches dense sampling") {
    double omega = 2.5 * kPi;
    TargetSpace cone = TargetSpace::cone(omega, 1.5);
    Rng rng(13);
    for (int k = 0; k < 40; k++) {
      TargetPoint a = TargetPoint::cone(rng.uniform(0.01, 1.5), rng.uniform(0, omega));
      TargetPoint b = TargetPoint::cone(rng.uniform(0.01, 1.5), rng.uniform(0, omega));
      TargetPoint p = TargetPoint::cone(rng.uniform(0, 1.5), rng.uniform(0, omega));
      GeodesicSegment g = geodesic(cone, a, b);
      double lib = point_segment_distance(cone, p, g);
      double brute = std::numeric_limits<double>::infinity();
      const int steps = 2000;
      for (int i = 0; i <= steps; i++)
        brute = std::min(brute, distance(cone, p, g.eval(g.length * i / steps)));
      CAPTURE(a.r(), a.theta(), b.r(), b.theta(), p.r(), p.theta(), g.through_tip);
      CHECK(lib <= brute + 1e-9);
      CHECK(lib >= brute - (g.length / steps + 1e-9));
    }
  }
}

TEST_CASE("wrap helpers") {
  CHECK(wrap_angle(2 * kPi + 0.1, 2 * kPi) == Catch::Approx(0.1).margin(1e-12));
  CHECK(wrap_angle(-0.1, 2 * kPi) == Catch::Approx(2 * kPi - 0.1).margin(1e-12));
  double omega = 3 * kPi;
  CHECK(wrap_signed(omega - 0.1, omega) == Catch::Approx(-0.1).margin(1e-12));
  CHECK(wrap_signed(0.1, omega) == Catch::Approx(0.1).margin(1e-12));
  CHECK(std::abs(wrap_signed(1.5 * kPi, omega)) == Catch::Approx(1.5 * kPi).margin(1e-12));
}

TEST_CASE("2d convex hulls certify every input point") {
  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    Rng rng(seed);
    std::vector<Vec2> pts;
    for (int k = 0; k < 200; k++) pts.push_back({rng.uniform(-2, 2), rng.uniform(-1, 3)});
    std::vector<Vec2> hull = convex_hull_2d(pts);
    REQUIRE(hull.size() >= 3);

    // hull vertices are input points
    for (Vec2 h : hull) {
      bool found = false;
      for (Vec2 p : pts) found = found || (p - h).norm() == 0.0;
      CHECK(found);
    }
    // CCW and convex
    for (size_t i = 0; i < hull.size(); i++) {
      Vec2 a = hull[i], b = hull[(i + 1) % hull.size()], c = hull[(i + 2) % hull.size()];
      CHECK(orient2d(a, b, c) >= 0.0);
    }
    // every input point lies weakly inside every edge halfplane
    for (Vec2 p : pts) CHECK(signed_violation_2d(hull, p) <= 1e-9);
    // and clearly-outside points are reported with the right clearance
    Vec2 far{10, 0};
    double v = signed_violation_2d(hull, far);
    double best = std::numeric_limits<double>::infinity();
    for (Vec2 h : hull) best = std::min(best, (far - h).norm());
    CHECK(v > 0);
    CHECK(v <= best + 1e-9);
  }
}

TEST_CASE("convex regions from halfplanes") {
  std::vector<HalfSpace> box = {
      HalfSpace::line({1, 0}, 1), HalfSpace::line({-1, 0}, 0),
      HalfSpace::line({0, 1}, 1), HalfSpace::line({0, -1}, 0)};
  // eval <= 0 side kept: { 0 <= x <= 1, 0 <= y <= 1 }
  ConvexRegion unit = ConvexRegion::from_halfplanes(box, 10.0);
  REQUIRE_FALSE(unit.empty());
  CHECK(unit.contains({0.5, 0.5}));
  CHECK(unit.contains({1.0, 1.0}, 1e-12));
  CHECK_FALSE(unit.contains({1.5, 0.5}));
  BBox2 bb = unit.bbox();
  CHECK(bb.lo.x == Catch::Approx(0.0).margin(1e-12));
  CHECK(bb.hi.y == Catch::Approx(1.0).margin(1e-12));

  std::vector<Vec2> A = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<Vec2> B = {{2, 0}, {3, 0}, {3, 1}, {2, 1}};
  CHECK(convex_separation_gap_2d(A, B) == Catch::Approx(1.0).margin(1e-12));
  CHECK(convex_disjoint_2d(A, B, 1e-9));
  std::vector<Vec2> C = {{0.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}, {0.5, 1.5}};
  CHECK_FALSE(convex_disjoint_2d(A, C, 1e-9));
}

TEST_CASE("3d hulls flag exterior points") {
  SECTION("unit cube") {
    std::vector<Vec3> corners;
    for (int k = 0; k < 8; k++)
      corners.push_back({double(k & 1), double((k >> 1) & 1), double((k >> 2) & 1)});
    Hull3D hull = build_hull_3d(corners);
    REQUIRE_FALSE(hull.planar);
    CHECK(signed_violation_3d(hull, {0.5, 0.5, 0.5}) == Catch::Approx(-0.5).margin(1e-12));
    CHECK(signed_violation_3d(hull, {2.0, 0.5, 0.5}) == Catch::Approx(1.0).margin(1e-12));
    CHECK(signed_violation_3d(hull, {0.0, 0.0, 0.0}) == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("planar input keeps the off-plane distance") {
    std::vector<Vec3> square = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0.5, 0.5, 0}};
    Hull3D hull = build_hull_3d(square);
    REQUIRE(hull.planar);
    CHECK(signed_violation_3d(hull, {0.5, 0.5, 0.7}) == Catch::Approx(0.7).margin(1e-12));
    CHECK(signed_violation_3d(hull, {2.0, 0.5, 0.0}) == Catch::Approx(1.0).margin(1e-12));
    CHECK(signed_violation_3d(hull, {0.5, 0.5, 0.0}) < 0.0);
  }
}

TEST_CASE("segment and triangle predicates") {
  SECTION("proper crossings only") {
    CHECK(segments_properly_cross({-1, 0}, {1, 0}, {0, -1}, {0, 1}, 1e-12));
    // shared endpoint
    CHECK_FALSE(segments_properly_cross({0, 0}, {1, 0}, {0, 0}, {0, 1}, 1e-12));
    // T-junction: touches mid-edge but does not cross
    CHECK_FALSE(segments_properly_cross({-1, 0}, {1, 0}, {0, 0}, {0, 1}, 1e-12));
    // disjoint
    CHECK_FALSE(segments_properly_cross({-1, 0}, {1, 0}, {2, 1}, {3, -1}, 1e-12));
  }

  SECTION("strict triangle interior") {
    Vec2 a{0, 0}, b{2, 0}, c{0, 2};
    CHECK(point_in_triangle_2d({0.5, 0.5}, a, b, c, 1e-12));
    CHECK_FALSE(point_in_triangle_2d({0, 0}, a, b, c, 1e-12));
    CHECK_FALSE(point_in_triangle_2d({1, 0}, a, b, c, 1e-12));
    CHECK_FALSE(point_in_triangle_2d({3, 3}, a, b, c, 1e-12));
  }

  SECTION("triangle interior overlap ignores shared edges") {
    std::array<Vec2, 3> A = {Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}};
    std::array<Vec2, 3> B = {Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};  // shares edge
    CHECK_FALSE(triangle_interiors_overlap_2d(A, B, 1e-12));
    std::array<Vec2, 3> C = {Vec2{0.2, 0.2}, Vec2{1.2, 0.2}, Vec2{0.2, 1.2}};
    CHECK(triangle_interiors_overlap_2d(A, C, 1e-12));
    std::array<Vec2, 3> D = {Vec2{5, 5}, Vec2{6, 5}, Vec2{5, 6}};
    CHECK_FALSE(triangle_interiors_overlap_2d(A, D, 1e-12));
  }
}
