#include <catch2/catch_amalgamated.hpp>

#include <saddlekit/energy.hpp>
#include <saddlekit/generate.hpp>

#include <cmath>
#include <set>

using namespace saddlekit;

namespace {

// Same plateau construction as the cut tests: a compact island in the image
// far from the dip ring, used here to exercise segment-cutter hat removal.
PLMap plateau_map(int n) {
  RadialProfile profile{{{0.0, 0.4}, {0.375, 0.4}, {0.5, 0.01}, {0.625, 0.45},
                         {0.75, 0.62}, {1.0, 1.0}}};
  DiscMesh m = disc_grid(n);
  PLMap f;
  f.space = TargetSpace::plane();
  f.mesh = m;
  for (const Vec2& p : m.vertices) {
    double r = p.norm();
    double rho = profile(r);
    Vec2 q = r > 1e-15 ? p * (rho / r) : Vec2{profile(0.0), 0.0};
    f.images.push_back(TargetPoint::plane(q.x, q.y));
  }
  return f;
}

std::vector<TargetPoint> circle_boundary(const DiscMesh& m) {
  std::vector<TargetPoint> values;
  for (int v : m.boundary) {
    Vec2 p = m.vertices[size_t(v)].normalized();
    values.push_back(TargetPoint::plane(p.x, p.y));
  }
  return values;
}

}  // namespace

TEST_CASE("identity energy is twice the mesh area") {
  for (int n : {2, 4, 6}) {
    PLMap f = identity_map(disc_grid(n));
    EnergyReport rep = dirichlet_energy(f);
    CHECK(rep.total == Catch::Approx(2.0 * mesh_area(f.mesh)).margin(1e-10));

    double sum = 0.0;
    for (double e : rep.per_triangle) sum += e;
    CHECK(sum == Catch::Approx(rep.total).margin(1e-12));
    CHECK(rep.edge_quadratic_total == Catch::Approx(rep.total).margin(1e-9));
  }
}

TEST_CASE("energy is preserved by flat embeddings and refinement") {
  SECTION("the same disc in the z = 0 plane of 3-space") {
    DiscMesh m = disc_grid(3);
    PLMap flat = identity_map(m);
    PLMap lifted;
    lifted.mesh = m;
    lifted.space = TargetSpace::space3();
    for (const Vec2& p : m.vertices) lifted.images.push_back(TargetPoint::space(p.x, p.y, 0));
    CHECK(dirichlet_energy(lifted).total ==
          Catch::Approx(dirichlet_energy(flat).total).margin(1e-10));
  }

  SECTION("midpoint refinement keeps the piecewise-linear surface") {
    Generated gen = generate_bump(4, 1.0, 0.5);
    double coarse = dirichlet_energy(*gen.map).total;
    double fine = dirichlet_energy(refine_plmap(*gen.map)).total;
    CHECK(fine == Catch::Approx(coarse).margin(1e-9 * coarse));
  }

  SECTION("cone energies are finite and positive") {
    Generated gen = generate_cone_disc(4, 2.5 * kPi);
    EnergyReport rep = dirichlet_energy(*gen.map);
    CHECK(rep.total > 0);
    CHECK(std::isfinite(rep.total));
  }
}

TEST_CASE("flat harmonic solve") {
  DiscMesh m = disc_grid(5);
  HarmonicResult res = harmonic_solve(m, circle_boundary(m), TargetSpace::plane());
  REQUIRE(res.converged);
  CHECK(res.residual < 1e-8);

  SECTION("interior vertices satisfy the weighted balance equations") {
    EdgeTable et = build_edge_table(m);
    std::vector<double> w = cotangent_edge_weights(m, et);
    std::vector<bool> on_boundary = boundary_vertex_flags(m);
    std::vector<Vec2> defect(size_t(m.vertex_count()), Vec2{0, 0});
    for (size_t e = 0; e < et.edges.size(); e++) {
      int a = et.edges[e].a, b = et.edges[e].b;
      Vec2 d = res.map.image2(b) - res.map.image2(a);
      defect[size_t(a)] += d * w[e];
      defect[size_t(b)] -= d * w[e];
    }
    for (int v = 0; v < m.vertex_count(); v++) {
      if (on_boundary[size_t(v)]) continue;
      CHECK(defect[size_t(v)].norm() < 1e-9);
    }
  }

  SECTION("the solution minimizes energy among maps with the same boundary") {
    double optimal = dirichlet_energy(res.map).total;
    CHECK(optimal <= dirichlet_energy(identity_map(m)).total + 1e-12);

    Rng rng(17);
    std::vector<bool> on_boundary = boundary_vertex_flags(m);
    for (int trial = 0; trial < 3; trial++) {
      PLMap jiggled = res.map;
      for (int v = 0; v < m.vertex_count(); v++) {
        if (on_boundary[size_t(v)]) continue;
        Vec2 p = jiggled.image2(v) + Vec2{rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02)};
        jiggled.images[size_t(v)] = TargetPoint::plane(p.x, p.y);
      }
      CHECK(dirichlet_energy(jiggled).total >= optimal - 1e-12);
    }
  }

  SECTION("the identity disc is already harmonic") {
    // cotangent balance holds identically for planar meshes, so the solver
    // must reproduce the input positions
    for (int v = 0; v < m.vertex_count(); v++)
      CHECK((res.map.image2(v) - m.vertices[size_t(v)]).norm() < 1e-9);
  }
}

TEST_CASE("mean-value weights keep solutions in the boundary hull") {
  // an interior vertex pushed toward one side makes several corners obtuse,
  // so cotangent weights go negative while mean-value weights stay positive
  DiscMesh m;
  m.vertices = {{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1.0, 0.2}};
  m.triangles = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  m.boundary = {0, 1, 2, 3};
  REQUIRE(validate_disc_mesh(m).ok);
  REQUIRE(min_cotangent_weight(m) < 0);

  std::vector<TargetPoint> corners;
  for (int v : m.boundary)
    corners.push_back(TargetPoint::plane(m.vertices[size_t(v)].x, m.vertices[size_t(v)].y));

  SolverConfig config;
  config.weights = WeightScheme::mean_value;
  HarmonicResult res = harmonic_solve(m, corners, TargetSpace::plane(), config);
  REQUIRE(res.converged);

  std::vector<Vec2> hull = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(signed_violation_2d(hull, res.map.image2(4)) <= 1e-9);

  SECTION("mean-value stays close to identity on a round grid") {
    DiscMesh g = disc_grid(4);
    HarmonicResult round = harmonic_solve(g, circle_boundary(g), TargetSpace::plane(), config);
    REQUIRE(round.converged);
    for (int v = 0; v < g.vertex_count(); v++)
      CHECK((round.map.image2(v) - g.vertices[size_t(v)]).norm() < 0.05);
  }
}

TEST_CASE("cone harmonic solve descends and settles") {
  Generated gen = generate_cone_disc(5, 3 * kPi);
  const PLMap& f0 = *gen.map;
  std::vector<TargetPoint> boundary_values;
  for (int v : f0.mesh.boundary) boundary_values.push_back(f0.images[size_t(v)]);

  HarmonicResult res = harmonic_solve(f0.mesh, boundary_values, f0.space);
  REQUIRE(res.converged);
  double optimized = dirichlet_energy(res.map).total;
  CHECK(optimized <= dirichlet_energy(f0).total + 1e-12);

  // settled: re-solving from the result must not find further descent
  HarmonicResult again =
      harmonic_solve(f0.mesh, boundary_values, f0.space, SolverConfig{}, res.map.images);
  CHECK(dirichlet_energy(again.map).total <= optimized + 1e-9);
  CHECK(dirichlet_energy(again.map).total >= optimized - 1e-6 * std::max(1.0, optimized));
}

TEST_CASE("cutting a bump cap lowers the energy without stretching any edge") {
  Generated gen = generate_bump(6, 1.0, 0.5);
  const PLMap& f = *gen.map;
  HalfSpace cap{HalfSpace::plane3({0, 0, 1}, 0.7)};
  CutDecomposition dec = cut_components(f, cap);
  REQUIRE(dec.hat_indices.size() == 1);

  CutHatResult step = cut_hat(dec.map, cap, dec.components[size_t(dec.hat_indices[0])]);
  CHECK(step.energy_after < step.energy_before);
  CHECK(step.max_edge_expansion <= 1e-12);
  REQUIRE_FALSE(step.relocated_vertices.empty());

  std::set<int> moved(step.relocated_vertices.begin(), step.relocated_vertices.end());
  for (int v = 0; v < f.mesh.vertex_count(); v++) {
    if (moved.count(v)) {
      // relocated points land on the cutting plane
      CHECK(step.map.images[size_t(v)].z() == Catch::Approx(0.7).margin(1e-12));
      CHECK(f.images[size_t(v)].z() > 0.7);
    } else {
      CHECK(step.map.images[size_t(v)].same_bits(f.images[size_t(v)]));
    }
  }

  // nudging the plane past the landing zone shows the hat is gone
  CutDecomposition after = cut_components(step.map, HalfSpace::plane3({0, 0, 1}, 0.7 + 1e-9));
  CHECK_FALSE(has_hat(after));
}

TEST_CASE("segment hat cut collapses the plateau island") {
  PLMap f = plateau_map(8);
  GeodesicSegment seg =
      geodesic(f.space, TargetPoint::plane(0, 0), TargetPoint::plane(1e-6, 0));
  CutOptions opts;
  opts.tol_cut = 0.05;
  CutDecomposition dec = cut_components(f, seg, opts);
  REQUIRE(dec.hat_indices.size() == 1);

  CutHatResult step = cut_hat(dec.map, seg, dec.components[size_t(dec.hat_indices[0])]);
  CHECK(int(step.relocated_vertices.size()) == disc_grid_ring_start(4));  // rings 0..3
  CHECK(step.energy_after < step.energy_before);
  // every relocated vertex moves toward the short segment near the origin,
  // closer to all its neighbors than before: nothing may expand
  CHECK(step.max_edge_expansion <= 1e-12);

  CutDecomposition after = cut_components(step.map, seg, opts);
  CHECK_FALSE(has_hat(after));
}

TEST_CASE("hat-removal descent reaches a clean sweep on the fold map") {
  Generated gen = generate_fold(8);
  std::vector<Cutter> family = canonical_cut_family(*gen.map, 60, 1);
  DescentOptions opts;
  // Cutter pairs that intersect inside the flap trade vertices back and
  // forth with geometrically shrinking moves; the fold needs 17 rounds
  // before the leftover heights drop below the on-plane snap.
  opts.rounds = 25;
  DescentResult res = saddle_by_descent(*gen.map, family, opts);

  REQUIRE_FALSE(res.trace.empty());
  CHECK(res.trace.front().cutter_index == -1);
  CHECK(res.cuts_total >= 1);
  for (size_t i = 0; i + 1 < res.trace.size(); i++)
    CHECK(res.trace[i + 1].energy <= res.trace[i].energy + 1e-9);
  CHECK(res.trace.back().energy < res.trace.front().energy);
  REQUIRE(res.completed);

  SaddleReport swept = check_saddle(res.map, family, SaddleOptions{}, /*custom_family=*/true);
  CHECK(swept.witnesses.empty());
}
