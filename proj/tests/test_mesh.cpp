#include <catch2/catch_amalgamated.hpp>

#include <saddlekit/generate.hpp>
#include <saddlekit/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <set>

using namespace saddlekit;

namespace {

bool has_code(const ValidationReport& rep, const std::string& code) {
  for (const Violation& v : rep.violations)
    if (v.code == code) return true;
  return false;
}

// A mesh that validates: one CCW triangle.
DiscMesh one_triangle() {
  DiscMesh m;
  m.vertices = {{0, 0}, {1, 0}, {0.5, 1}};
  m.triangles = {{0, 1, 2}};
  m.boundary = {0, 1, 2};
  return m;
}

}  // namespace

TEST_CASE("disc grids have the advertised counts and validate") {
  for (int n = 1; n <= 6; n++) {
    DiscMesh m = disc_grid(n);
    CHECK(m.vertex_count() == 1 + 3 * n * (n + 1));
    CHECK(m.triangle_count() == 6 * n * n);
    CHECK(int(m.boundary.size()) == 6 * n);
    ValidationReport rep = validate_disc_mesh(m);
    CAPTURE(n);
    if (!rep.ok) UNSCOPED_INFO(rep.violations[0].code << ": " << rep.violations[0].message);
    REQUIRE(rep.ok);
  }
}

TEST_CASE("disc grid triangles tile the inscribed polygon exactly") {
  for (int n : {1, 2, 3, 5, 8}) {
    DiscMesh m = disc_grid(n);
    int sides = 6 * n;
    double polygon = 0.5 * sides * std::sin(2.0 * kPi / sides);
    CHECK(mesh_area(m) == Catch::Approx(polygon).margin(1e-12));
    for (int t = 0; t < m.triangle_count(); t++) CHECK(triangle_area(m, t) > 0.0);
  }
}

TEST_CASE("disc grids are Delaunay: no negative cotangent weights") {
  for (int n : {1, 2, 3, 4, 6, 8, 16}) {
    CAPTURE(n);
    CHECK(min_cotangent_weight(disc_grid(n)) >= -1e-12);
  }
}

TEST_CASE("validator reports each defect class") {
  SECTION("empty mesh") {
    DiscMesh m;
    ValidationReport rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "empty"));
  }

  SECTION("out-of-range vertex index") {
    DiscMesh m = one_triangle();
    m.triangles.push_back({0, 1, 5});
    ValidationReport rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "index_range"));
  }

  SECTION("repeated vertex in a triangle") {
    DiscMesh m = one_triangle();
    m.triangles[0] = {0, 1, 1};
    ValidationReport rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "degenerate_triangle"));
  }

  SECTION("zero-area triangle") {
    DiscMesh m;
    m.vertices = {{0, 0}, {1, 0}, {2, 0}};
    m.triangles = {{0, 1, 2}};
    m.boundary = {0, 1, 2};
    ValidationReport rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "degenerate_triangle"));
  }

  SECTION("clockwise triangle") {
    DiscMesh m = one_triangle();
    std::swap(m.triangles[0][1], m.triangles[0][2]);
    ValidationReport rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "inconsistent_orientation"));
  }

  SECTION("overlapping triangles reuse a directed edge") {
    DiscMesh m = one_triangle();
    m.vertices.push_back({0.5, 0.5});       // inside the first triangle
    m.triangles.push_back({0, 1, 3});       // also CCW, overlaps
    ValidationReport rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "inconsistent_orientation"));
  }

  SECTION("edge shared by three triangles") {
    DiscMesh m = one_triangle();
    m.vertices.push_back({0.5, 0.5});
    m.vertices.push_back({0.5, 0.25});
    m.triangles.push_back({0, 1, 3});
    m.triangles.push_back({0, 1, 4});
    ValidationReport rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "edge_incidence"));
  }

  SECTION("annulus fails the Euler count") {
    // Drop the center fan of a two-ring grid and remove the hub vertex.
    DiscMesh g = disc_grid(2);
    DiscMesh m;
    m.vertices.assign(g.vertices.begin() + 1, g.vertices.end());
    for (const auto& tri : g.triangles) {
      if (tri[0] == 0 || tri[1] == 0 || tri[2] == 0) continue;
      m.triangles.push_back({tri[0] - 1, tri[1] - 1, tri[2] - 1});
    }
    for (int v : g.boundary) m.boundary.push_back(v - 1);
    ValidationReport rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "euler_characteristic"));
  }

  SECTION("bow tie: boundary branches at the pinch vertex") {
    DiscMesh m;
    m.vertices = {{-1, -1}, {0, -0.2}, {-1, 1}, {1, 1}, {0, 0.2}};
    // two triangles meeting only at vertex 1
    m.triangles = {{0, 1, 2}, {1, 3, 4}};
    m.boundary = {0, 1, 2};
    ValidationReport rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "boundary_cycle"));
  }

  SECTION("stored boundary must match the traced cycle") {
    DiscMesh m = one_triangle();
    m.boundary = {0, 2, 1};  // wrong direction
    ValidationReport rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "boundary_mismatch"));

    m.boundary = {0, 1};  // wrong length
    rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "boundary_mismatch"));
  }

  SECTION("near-coincident vertices are flagged") {
    DiscMesh m = one_triangle();
    m.vertices.push_back({0.5 + 1e-12, 1.0});
    m.triangles.push_back({0, 2, 3});
    ValidationReport rep = validate_disc_mesh(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(has_code(rep, "duplicate_vertex"));
  }
}

TEST_CASE("edge table pairs interior triangles and finds the boundary") {
  DiscMesh m = disc_grid(2);
  EdgeTable et = build_edge_table(m);

  // V - E + F = 1 for a disc
  CHECK(int(et.edges.size()) == m.vertex_count() + m.triangle_count() - 1);

  int boundary_edges = 0;
  for (const MeshEdge& e : et.edges) {
    REQUIRE(e.tri[0] >= 0);
    if (e.on_boundary()) boundary_edges++;
  }
  CHECK(boundary_edges == int(m.boundary.size()));

  std::vector<bool> on_boundary = boundary_vertex_flags(m);
  int flagged = int(std::count(on_boundary.begin(), on_boundary.end(), true));
  CHECK(flagged == int(m.boundary.size()));
}

TEST_CASE("midpoint refinement splits each triangle in four") {
  DiscMesh m = disc_grid(2);
  EdgeTable et = build_edge_table(m);
  MeshRefinement ref = refine_mesh(m);

  CHECK(ref.old_vertex_count == m.vertex_count());
  CHECK(ref.mesh.vertex_count() == m.vertex_count() + int(et.edges.size()));
  CHECK(ref.mesh.triangle_count() == 4 * m.triangle_count());
  CHECK(int(ref.mesh.boundary.size()) == 2 * int(m.boundary.size()));
  CHECK(int(ref.midpoint_of.size()) == ref.mesh.vertex_count() - m.vertex_count());
  CHECK(mesh_area(ref.mesh) == Catch::Approx(mesh_area(m)).margin(1e-12));
  CHECK(validate_disc_mesh(ref.mesh).ok);

  // every recorded midpoint is the average of its parents
  for (size_t k = 0; k < ref.midpoint_of.size(); k++) {
    auto [a, b] = ref.midpoint_of[k];
    Vec2 mid = (m.vertices[size_t(a)] + m.vertices[size_t(b)]) * 0.5;
    Vec2 got = ref.mesh.vertices[size_t(ref.old_vertex_count) + k];
    CHECK((got - mid).norm() < 1e-15);
  }
}

TEST_CASE("rim cycles and sub-disc recognition") {
  DiscMesh m = disc_grid(3);
  EdgeTable et = build_edge_table(m);

  SECTION("the center fan is a sub-disc with the first ring as rim") {
    std::vector<int> fan;
    for (int t = 0; t < m.triangle_count(); t++) {
      const auto& tri = m.triangles[size_t(t)];
      if (tri[0] == 0 || tri[1] == 0 || tri[2] == 0) fan.push_back(t);
    }
    REQUIRE(fan.size() == 6);
    CHECK(cells_connected(m, et, fan));
    CHECK(subcomplex_euler(m, et, fan) == 1);
    CHECK(is_subdisc(m, et, fan));

    std::vector<int> rim = rim_cycle(m, et, fan);
    std::set<int> rim_set(rim.begin(), rim.end());
    CHECK(rim_set == std::set<int>{1, 2, 3, 4, 5, 6});
  }

  SECTION("an annulus of cells is connected but not a sub-disc") {
    // cells whose vertices all live on rings 1 and 2
    int lo = disc_grid_ring_start(1), hi = disc_grid_ring_start(3);
    std::vector<int> band;
    for (int t = 0; t < m.triangle_count(); t++) {
      const auto& tri = m.triangles[size_t(t)];
      int mn = std::min({tri[0], tri[1], tri[2]});
      int mx = std::max({tri[0], tri[1], tri[2]});
      if (mn >= lo && mx < hi) band.push_back(t);
    }
    REQUIRE(band.size() == 18);  // 6 + 12 cells between rings 1 and 2
    CHECK(cells_connected(m, et, band));
    CHECK(subcomplex_euler(m, et, band) == 0);
    CHECK_FALSE(is_subdisc(m, et, band));
  }

  SECTION("two far-apart cells are not connected") {
    std::vector<int> cells = {0, m.triangle_count() - 1};
    CHECK_FALSE(cells_connected(m, et, cells));
    CHECK_FALSE(is_subdisc(m, et, cells));
  }
}

TEST_CASE("corner angles and cotangents") {
  DiscMesh m = disc_grid(2);
  for (int t = 0; t < m.triangle_count(); t++) {
    double sum = corner_angle(m, t, 0) + corner_angle(m, t, 1) + corner_angle(m, t, 2);
    CHECK(sum == Catch::Approx(kPi).margin(1e-12));
  }
  CHECK(cotangent(kPi / 2) == Catch::Approx(0.0).margin(1e-15));
  CHECK(cotangent(kPi / 4) == Catch::Approx(1.0).margin(1e-12));

  SECTION("unit square split along the diagonal") {
    DiscMesh sq;
    sq.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    sq.triangles = {{0, 1, 2}, {0, 2, 3}};
    sq.boundary = {0, 1, 2, 3};
    REQUIRE(validate_disc_mesh(sq).ok);

    EdgeTable et = build_edge_table(sq);
    std::vector<double> w = cotangent_edge_weights(sq, et);
    for (size_t e = 0; e < et.edges.size(); e++) {
      const MeshEdge& ed = et.edges[e];
      bool diagonal = (ed.a == 0 && ed.b == 2) || (ed.a == 2 && ed.b == 0);
      if (diagonal) {
        // opposite corners are right angles: weight (cot a + cot b) / 2 = 0
        CHECK(w[e] == Catch::Approx(0.0).margin(1e-12));
      } else {
        // boundary edge, single 45-degree opposite corner
        CHECK(w[e] == Catch::Approx(0.5).margin(1e-12));
      }
    }
  }
}
