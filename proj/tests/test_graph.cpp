#include <catch2/catch_amalgamated.hpp>

#include <saddlekit/energy.hpp>
#include <saddlekit/expr.hpp>
#include <saddlekit/generate.hpp>
#include <saddlekit/graph.hpp>

#include <cmath>

using namespace saddlekit;

namespace {

// Harmonic surface over the disc: xy from the circle boundary, z from a given
// boundary profile. Discretely harmonic in every coordinate by construction.
PLMap harmonic_surface(int n, const std::function<double(double)>& z_of_angle) {
  DiscMesh m = disc_grid(n);
  std::vector<TargetPoint> boundary_values;
  for (int v : m.boundary) {
    Vec2 p = m.vertices[size_t(v)].normalized();
    boundary_values.push_back(TargetPoint::space(p.x, p.y, z_of_angle(std::atan2(p.y, p.x))));
  }
  HarmonicResult res = harmonic_solve(m, boundary_values, TargetSpace::space3());
  REQUIRE(res.converged);
  return res.map;
}

// Cells within `steps` edge-hops of a seed triangle.
std::vector<int> grow_patch(const DiscMesh& m, const EdgeTable& et, int seed, int steps) {
  std::vector<char> in(size_t(m.triangle_count()), 0);
  std::vector<int> frontier = {seed};
  in[size_t(seed)] = 1;
  for (int s = 0; s < steps; s++) {
    std::vector<int> next;
    for (int t : frontier) {
      for (const MeshEdge& e : et.edges) {
        if (e.on_boundary()) continue;
        int other = e.tri[0] == t ? e.tri[1] : (e.tri[1] == t ? e.tri[0] : -1);
        if (other >= 0 && !in[size_t(other)]) {
          in[size_t(other)] = 1;
          next.push_back(other);
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<int> cells;
  for (int t = 0; t < m.triangle_count(); t++)
    if (in[size_t(t)]) cells.push_back(t);
  return cells;
}

}  // namespace

TEST_CASE("height expressions parse and evaluate") {
  HeightFn f = parse_height_expression("x^2 - y^2");
  CHECK(f(0.3, 0.7) == Catch::Approx(0.09 - 0.49).margin(1e-15));

  HeightFn g = parse_height_expression("0.5 * exp(-r^2) + sin(x) * cos(y)");
  double x = 0.4, y = -1.1, r = std::hypot(x, y);
  CHECK(g(x, y) ==
        Catch::Approx(0.5 * std::exp(-r * r) + std::sin(x) * std::cos(y)).margin(1e-12));

  // exponentiation is right-associative and binds tighter than unary minus
  CHECK(parse_height_expression("2^3^2")(0, 0) == Catch::Approx(512.0).margin(1e-12));
  CHECK(parse_height_expression("-x^2")(2, 0) == Catch::Approx(-4.0).margin(1e-15));
  CHECK(parse_height_expression("0 - x^2")(2, 0) == Catch::Approx(-4.0).margin(1e-15));
  CHECK(parse_height_expression("(-x)^2")(2, 0) == Catch::Approx(4.0).margin(1e-15));
  CHECK(parse_height_expression("2^-3")(0, 0) == Catch::Approx(0.125).margin(1e-15));
  CHECK(parse_height_expression("pi + e")(0, 0) ==
        Catch::Approx(kPi + std::exp(1.0)).margin(1e-12));

  CHECK_THROWS_AS(parse_height_expression("x +"), ExprError);
  CHECK_THROWS_AS(parse_height_expression("(x"), ExprError);
  CHECK_THROWS_AS(parse_height_expression("nope(x)"), ExprError);
  CHECK_THROWS_AS(parse_height_expression("x y"), ExprError);
}

TEST_CASE("bump graphs project cleanly") {
  Generated gen = generate_bump(8, 1.0, 0.35);
  const PLMap& f = *gen.map;

  GraphReport rep = check_graph_property(f);
  CHECK(rep.graph);
  CHECK(rep.orientation_consistent);
  CHECK(rep.overlap_count == 0);
  CHECK(rep.flipped_cells == 0);
  CHECK(rep.boundary.simple);
  CHECK(rep.boundary.convex);
  CHECK(rep.boundary.winding == 1);

  SECTION("projection drops the height exactly") {
    PLMap flat = project_xy(f);
    CHECK(flat.space.kind == TargetKind::plane);
    for (int v = 0; v < f.mesh.vertex_count(); v++) {
      CHECK(flat.images[size_t(v)].x() == f.images[size_t(v)].x());
      CHECK(flat.images[size_t(v)].y() == f.images[size_t(v)].y());
    }
  }

  SECTION("envelopes of a single sheet coincide and track the height") {
    EnvelopeField field = envelopes(f, 64);
    CHECK(field.covered_count > 0);
    CHECK(field.max_gap <= 1e-9);
    for (int i = 0; i < field.grid_n; i += 7) {
      for (int j = 0; j < field.grid_n; j += 7) {
        size_t node = size_t(j) * size_t(field.grid_n) + size_t(i);
        if (!field.covered[node]) continue;
        double x = field.node_x(i), y = field.node_y(j);
        double r = std::hypot(x, y);
        double h = std::exp(-(r / 0.35) * (r / 0.35));
        CHECK(field.alpha[node] == Catch::Approx(h).margin(0.08));
      }
    }
  }
}

TEST_CASE("affine graphs have exact envelopes") {
  Generated gen = generate_graph(5, parse_height_expression("0.2*x + 0.1*y - 0.3"));
  EnvelopeField field = envelopes(*gen.map, 48);
  CHECK(field.max_gap <= 1e-12);
  int checked = 0;
  for (int i = 0; i < field.grid_n; i++) {
    for (int j = 0; j < field.grid_n; j++) {
      size_t node = size_t(j) * size_t(field.grid_n) + size_t(i);
      if (!field.covered[node]) continue;
      double expect = 0.2 * field.node_x(i) + 0.1 * field.node_y(j) - 0.3;
      CHECK(field.alpha[node] == Catch::Approx(expect).margin(1e-9));
      checked++;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("the folded surface is not a graph") {
  Generated gen = generate_fold_surface(8, 0.4);
  const PLMap& f = *gen.map;

  GraphReport rep = check_graph_property(f);
  CHECK_FALSE(rep.graph);
  CHECK(rep.overlap_count > 0);
  REQUIRE_FALSE(rep.overlap_pairs.empty());
  CHECK(rep.flipped_cells > 0);  // the fold-back band reverses orientation

  // witnesses are genuine: re-run the exact overlap test on the first pair
  auto [s, t] = rep.overlap_pairs[0];
  PLMap flat = project_xy(f);
  std::array<Vec2, 3> A, B;
  for (int k = 0; k < 3; k++) {
    A[size_t(k)] = flat.image2(f.mesh.triangles[size_t(s)][size_t(k)]);
    B[size_t(k)] = flat.image2(f.mesh.triangles[size_t(t)][size_t(k)]);
  }
  CHECK(triangle_interiors_overlap_2d(A, B, 1e-12));

  SECTION("the envelopes gap over the threefold annulus") {
    EnvelopeField field = envelopes(f, 96);
    CHECK(field.max_gap > 0.1);
  }
}

TEST_CASE("boundary shape classification") {
  SECTION("squares both ways") {
    std::vector<Vec2> ccw = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    BoundaryShapeReport rep = check_boundary_convex(ccw);
    CHECK(rep.simple);
    CHECK(rep.convex);
    CHECK(rep.winding == 1);

    std::vector<Vec2> cw(ccw.rbegin(), ccw.rend());
    rep = check_boundary_convex(cw);
    CHECK(rep.simple);
    CHECK(rep.convex);
    CHECK(rep.winding == -1);
  }

  SECTION("collinear boundary points stay convex") {
    std::vector<Vec2> poly = {{0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {0, 1}};
    BoundaryShapeReport rep = check_boundary_convex(poly);
    CHECK(rep.simple);
    CHECK(rep.convex);
    CHECK(rep.winding == 1);
  }

  SECTION("an L-shape is simple but not convex") {
    std::vector<Vec2> poly = {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    BoundaryShapeReport rep = check_boundary_convex(poly);
    CHECK(rep.simple);
    CHECK_FALSE(rep.convex);
    CHECK(rep.winding == 1);
  }

  SECTION("a bow tie is not simple") {
    std::vector<Vec2> poly = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    BoundaryShapeReport rep = check_boundary_convex(poly);
    CHECK_FALSE(rep.simple);
  }
}

TEST_CASE("maximum principle on sub-discs") {
  SECTION("harmonic surfaces pass for any functional and patch") {
    PLMap f = harmonic_surface(5, [](double a) { return 0.3 * std::cos(2 * a); });
    EdgeTable et = build_edge_table(f.mesh);
    Rng rng(23);
    int checked = 0;
    for (int trial = 0; trial < 60 && checked < 25; trial++) {
      std::vector<int> cells =
          grow_patch(f.mesh, et, rng.index(f.mesh.triangle_count()), 1 + rng.index(3));
      if (!is_subdisc(f.mesh, et, cells)) continue;
      Vec3 lambda{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      MaxPrincipleReport rep = check_max_principle(f, lambda, cells);
      CAPTURE(trial, cells.size(), lambda.x, lambda.y, lambda.z);
      CHECK(rep.holds);
      checked++;
    }
    CHECK(checked >= 25);
  }

  SECTION("the bump peak violates the height functional") {
    Generated gen = generate_bump(6, 1.0, 0.5);
    const PLMap& f = *gen.map;
    std::vector<int> cells;
    for (int t = 0; t < f.mesh.triangle_count(); t++) {
      const auto& tri = f.mesh.triangles[size_t(t)];
      if (std::max({tri[0], tri[1], tri[2]}) < disc_grid_ring_start(4)) cells.push_back(t);
    }
    MaxPrincipleReport rep = check_max_principle(f, {0, 0, 1}, cells);
    CHECK_FALSE(rep.holds);
    CHECK(rep.interior_max == Catch::Approx(1.0).margin(1e-12));
    CHECK(rep.rim_max == Catch::Approx(std::exp(-1.0)).margin(1e-12));
    CHECK(rep.excess > 0.6);
    CHECK(rep.worst_vertex == 0);
  }

  SECTION("scattered cells are rejected") {
    PLMap f = identity_map(disc_grid(3));
    REQUIRE_THROWS_AS(check_max_principle(f, {0, 0, 1}, {0, 53}), std::invalid_argument);
  }
}
