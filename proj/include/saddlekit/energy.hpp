#pragma once

// Dirichlet energy of piecewise-linear maps, discrete harmonic solves, and
// the energy-decreasing hat removal that drives saddle_by_descent.
//
// The per-triangle energy is computed from the image side lengths against the
// domain corner angles: E_T = 1/2 * sum_i cot(alpha_i) * len_i^2 with len_i
// opposite corner i. Summed over triangles and regrouped by edges this equals
// sum_e w_e * len_e^2 with the cotangent edge weights from mesh.hpp, which is
// the form the solvers minimize. For flat targets it agrees with the usual
// area * |df|^2 formula; for cone targets it is the energy of the Euclidean
// comparison triangle with the same side lengths.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "cut.hpp"

namespace saddlekit {

// ---------------------------------------------------------------------------
// energy
// ---------------------------------------------------------------------------

struct EnergyReport {
  double total = 0.0;
  std::vector<double> per_triangle;
  double edge_quadratic_total = 0.0;  // sum over edges of w_e * len_e^2
};

inline EnergyReport dirichlet_energy(const PLMap& f) {
  require_map_sizes(f);
  const DiscMesh& m = f.mesh;
  EnergyReport report;
  report.per_triangle.resize(m.triangle_count());
  for (int t = 0; t < m.triangle_count(); t++) {
    if (triangle_area(m, t) <= 0)
      throw std::invalid_argument("dirichlet_energy: degenerate domain triangle " +
                                  std::to_string(t));
    double e = 0.0;
    for (int k = 0; k < 3; k++) {
      int a = m.triangles[t][(k + 1) % 3], b = m.triangles[t][(k + 2) % 3];
      double len = distance(f.space, f.images[a], f.images[b]);  // side opposite corner k
      e += 0.5 * cotangent(corner_angle(m, t, k)) * len * len;
    }
    report.per_triangle[t] = e;
    report.total += e;
  }
  EdgeTable edges = build_edge_table(m);
  std::vector<double> w = cotangent_edge_weights(m, edges);
  for (size_t i = 0; i < edges.edges.size(); i++) {
    double len = image_edge_length(f, edges.edges[i].a, edges.edges[i].b);
    report.edge_quadratic_total += w[i] * len * len;
  }
  return report;
}

// ---------------------------------------------------------------------------
// harmonic solve
// ---------------------------------------------------------------------------

enum class WeightScheme { cotangent, mean_value };
enum class SolveMode { automatic, direct_linear, iterative_descent };

struct SolverConfig {
  WeightScheme weights = WeightScheme::cotangent;
  SolveMode mode = SolveMode::automatic;
  double tol_solve = -1.0;  // <0: 1e-10 for flat targets, 1e-7 for cones
  int max_iterations = 100000;
};

struct HarmonicResult {
  PLMap map;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // flat: max relative defect of the balance equations;
                          // cone: largest vertex move in the final sweep
};

namespace detail {

// Mean-value coordinates: positive for any triangulation, but asymmetric.
// For the edge (i, j), the relevant angles are the corners at i of the two
// triangles incident to the edge.
inline std::vector<std::vector<std::pair<int, double>>> vertex_weights(
    const DiscMesh& m, const EdgeTable& edges, WeightScheme scheme) {
  int V = m.vertex_count();
  std::vector<std::vector<std::pair<int, double>>> nbr(V);
  if (scheme == WeightScheme::cotangent) {
    std::vector<double> w = cotangent_edge_weights(m, edges);
    for (size_t e = 0; e < edges.edges.size(); e++) {
      int a = edges.edges[e].a, b = edges.edges[e].b;
      nbr[a].push_back({b, w[e]});
      nbr[b].push_back({a, w[e]});
    }
    return nbr;
  }
  // mean value: accumulate tan(angle/2) contributions per directed edge
  std::unordered_map<uint64_t, double> tan_sum;
  for (int t = 0; t < m.triangle_count(); t++) {
    for (int k = 0; k < 3; k++) {
      int i = m.triangles[t][k];
      int j1 = m.triangles[t][(k + 1) % 3], j2 = m.triangles[t][(k + 2) % 3];
      double half_tan = std::tan(0.5 * corner_angle(m, t, k));
      tan_sum[EdgeTable::key(i, j1) * 2 + (i < j1 ? 0 : 1)] += half_tan;
      tan_sum[EdgeTable::key(i, j2) * 2 + (i < j2 ? 0 : 1)] += half_tan;
    }
  }
  for (const MeshEdge& e : edges.edges) {
    double len = (m.vertices[e.a] - m.vertices[e.b]).norm();
    double w_ab = tan_sum[EdgeTable::key(e.a, e.b) * 2 + 0] / len;  // weight of b at a
    double w_ba = tan_sum[EdgeTable::key(e.a, e.b) * 2 + 1] / len;  // weight of a at b
    nbr[e.a].push_back({e.b, w_ab});
    nbr[e.b].push_back({e.a, w_ba});
  }
  return nbr;
}

inline HarmonicResult solve_flat(const DiscMesh& m, const std::vector<TargetPoint>& boundary_values,
                                 const TargetSpace& space, const SolverConfig& config) {
  int V = m.vertex_count();
  int dim = space.dim();
  std::vector<bool> on_boundary = boundary_vertex_flags(m);
  std::vector<int> interior_index(V, -1);
  int N = 0;
  for (int v = 0; v < V; v++)
    if (!on_boundary[v]) interior_index[v] = N++;

  std::vector<std::array<double, 3>> coords(V, {0, 0, 0});
  for (size_t k = 0; k < m.boundary.size(); k++) {
    const TargetPoint& p = boundary_values[k];
    coords[m.boundary[k]] = {p.x(), p.y(), p.z()};
  }

  EdgeTable edges = build_edge_table(m);
  auto nbr = vertex_weights(m, edges, config.weights);

  HarmonicResult result;
  if (N > 0) {
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(N, dim);
    for (int v = 0; v < V; v++) {
      int row = interior_index[v];
      if (row < 0) continue;
      double diag = 0.0;
      for (auto [j, w] : nbr[v]) {
        diag += w;
        if (interior_index[j] >= 0) {
          trips.emplace_back(row, interior_index[j], -w);
        } else {
          for (int d = 0; d < dim; d++) rhs(row, d) += w * coords[j][d];
        }
      }
      trips.emplace_back(row, row, diag);
    }
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trips.begin(), trips.end());

    Eigen::MatrixXd sol;
    bool ok = false;
    bool symmetric = config.weights == WeightScheme::cotangent;
    if (symmetric && min_cotangent_weight(m) >= 0.0) {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
      solver.compute(A);
      if (solver.info() == Eigen::Success) {
        sol = solver.solve(rhs);
        ok = solver.info() == Eigen::Success;
      }
    }
    if (!ok) {
      Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
      solver.compute(A);
      if (solver.info() != Eigen::Success)
        throw std::runtime_error("harmonic_solve: sparse factorization failed");
      sol = solver.solve(rhs);
      ok = solver.info() == Eigen::Success;
    }
    for (int v = 0; v < V; v++) {
      if (interior_index[v] < 0) continue;
      for (int d = 0; d < dim; d++) coords[v][d] = sol(interior_index[v], d);
    }
    result.converged = ok;
  } else {
    result.converged = true;
  }
  result.iterations = 1;

  PLMap f;
  f.mesh = m;
  f.space = space;
  f.images.reserve(V);
  for (int v = 0; v < V; v++) {
    if (dim == 2) f.images.push_back(TargetPoint::plane(coords[v][0], coords[v][1]));
    else f.images.push_back(TargetPoint::space(coords[v][0], coords[v][1], coords[v][2]));
  }

  // balance-equation defect, relative to the image size
  double scale = std::max(image_diameter(f), 1e-30);
  double worst = 0.0;
  for (int v = 0; v < V; v++) {
    if (on_boundary[v]) continue;
    std::array<double, 3> acc{0, 0, 0};
    double wsum = 0.0;
    for (auto [j, w] : nbr[v]) {
      wsum += w;
      for (int d = 0; d < dim; d++) acc[d] += w * coords[j][d];
    }
    if (wsum <= 0) continue;
    double defect = 0.0;
    for (int d = 0; d < dim; d++) {
      double diff = coords[v][d] - acc[d] / wsum;
      defect += diff * diff;
    }
    worst = std::max(worst, std::sqrt(defect));
  }
  result.residual = worst / scale;
  f.space = space;
  result.map = std::move(f);
  return result;
}

// One-vertex relocation on a cone: unfold the image star into a flat chart
// around the current image direction, take the weighted neighbor mean as a
// candidate (plus damped versions and the tip), and keep the best candidate
// only if it does not increase the true cone energy of the star. Every
// accepted move decreases the total edge-quadratic energy, so sweeps are
// monotone regardless of chart distortion.
inline HarmonicResult solve_cone(const DiscMesh& m, const std::vector<TargetPoint>& boundary_values,
                                 const TargetSpace& space, const SolverConfig& config,
                                 const std::optional<std::vector<TargetPoint>>& initial) {
  int V = m.vertex_count();
  double omega = space.cone_angle;
  std::vector<bool> on_boundary = boundary_vertex_flags(m);
  EdgeTable edges = build_edge_table(m);
  auto nbr = vertex_weights(m, edges, WeightScheme::cotangent);

  PLMap f;
  f.mesh = m;
  f.space = space;
  if (initial) {
    if (int(initial->size()) != V)
      throw std::invalid_argument("harmonic_solve: initial guess has wrong size");
    f.images = *initial;
  } else {
    // Radial interpolation from the boundary data: unwrap the boundary image
    // angles into a monotone lift, then give each interior vertex the angle
    // of its domain direction and a proportional radius.
    f.images.assign(V, TargetPoint::cone(0.0, 0.0));
    size_t B = m.boundary.size();
    std::vector<double> dom_angle(B), lift(B), brad(B);
    for (size_t k = 0; k < B; k++) {
      const Vec2& p = m.vertices[m.boundary[k]];
      dom_angle[k] = std::atan2(p.y, p.x);
      brad[k] = boundary_values[k].r();
    }
    lift[0] = boundary_values[0].theta();
    for (size_t k = 1; k < B; k++) {
      lift[k] = lift[k - 1] +
                wrap_signed(boundary_values[k].theta() - boundary_values[k - 1].theta(), omega);
    }
    for (int v = 0; v < V; v++) {
      if (on_boundary[v]) continue;
      const Vec2& p = m.vertices[v];
      double a = std::atan2(p.y, p.x);
      // closest boundary vertex by domain angle
      size_t best = 0;
      double best_gap = 1e300;
      for (size_t k = 0; k < B; k++) {
        double gap = std::fabs(wrap_signed(a - dom_angle[k], 2.0 * kPi));
        if (gap < best_gap) { best_gap = gap; best = k; }
      }
      double rr = p.norm() * brad[best];
      f.images[v] = TargetPoint::cone(rr, wrap_angle(lift[best], omega));
    }
  }
  for (size_t k = 0; k < m.boundary.size(); k++) f.images[m.boundary[k]] = boundary_values[k];

  double tol = config.tol_solve >= 0 ? config.tol_solve : 1e-7;
  double scale = std::max(image_diameter(f), 1e-30);

  auto star_energy = [&](int v, const TargetPoint& p) {
    double e = 0.0;
    for (auto [j, w] : nbr[v]) {
      double d = distance(space, p, f.images[j]);
      e += w * d * d;
    }
    return e;
  };

  HarmonicResult result;
  double last_move = 0.0;
  int sweep = 0;
  for (; sweep < config.max_iterations; sweep++) {
    double max_move = 0.0;
    for (int v = 0; v < V; v++) {
      if (on_boundary[v] || nbr[v].empty()) continue;
      const TargetPoint cur = f.images[v];
      double ref = cur.theta();
      if (cur.r() <= kSnap) {
        for (auto [j, w] : nbr[v]) {
          if (f.images[j].r() > kSnap) { ref = f.images[j].theta(); break; }
        }
      }
      Vec2 mean{0, 0};
      double wsum = 0.0;
      for (auto [j, w] : nbr[v]) {
        const TargetPoint& q = f.images[j];
        double off = wrap_signed(q.theta() - ref, omega);
        Vec2 c = std::fabs(off) < kPi ? Vec2{q.r() * std::cos(off), q.r() * std::sin(off)}
                                      : Vec2{-q.r(), 0.0};
        mean = mean + c * w;
        wsum += w;
      }
      if (wsum <= 0) continue;
      mean = mean / wsum;

      Vec2 here{cur.r(), 0.0};
      Vec2 cand_chart[3] = {mean, (here + mean) * 0.5, (here + mean * 3.0) * 0.25};
      TargetPoint best = cur;
      double best_e = star_energy(v, cur);
      auto consider = [&](const TargetPoint& p) {
        double e = star_energy(v, p);
        if (e < best_e) { best_e = e; best = p; }
      };
      for (const Vec2& c : cand_chart) {
        double rr = c.norm();
        double th = rr > 0 ? wrap_angle(ref + std::atan2(c.y, c.x), omega) : ref;
        consider(TargetPoint::cone(std::min(rr, space.cone_radius), th));
      }
      consider(TargetPoint::cone(0.0, ref));

      double move = distance(space, cur, best);
      if (move > 0) f.images[v] = best;
      max_move = std::max(max_move, move);
    }
    last_move = max_move;
    if (max_move < tol * scale) { sweep++; break; }
  }

  result.map = std::move(f);
  result.iterations = sweep;
  result.residual = last_move / scale;
  result.converged = last_move < tol * scale;
  return result;
}

}  // namespace detail

inline HarmonicResult harmonic_solve(const DiscMesh& mesh,
                                     const std::vector<TargetPoint>& boundary_values,
                                     const TargetSpace& space, const SolverConfig& config = {},
                                     const std::optional<std::vector<TargetPoint>>& initial = {}) {
  ValidationReport vr = validate_disc_mesh(mesh);
  if (!vr.ok) throw std::invalid_argument("harmonic_solve: invalid mesh: " + vr.violations[0].message);
  if (boundary_values.size() != mesh.boundary.size())
    throw std::invalid_argument("harmonic_solve: boundary value count mismatch");
  for (const TargetPoint& p : boundary_values) require_valid_point(space, p);

  if (space.kind == TargetKind::cone) {
    if (config.mode == SolveMode::direct_linear)
      throw std::invalid_argument("harmonic_solve: cone targets need the iterative solver");
    if (config.weights == WeightScheme::mean_value)
      throw std::invalid_argument("harmonic_solve: cone targets use cotangent weights");
    return detail::solve_cone(mesh, boundary_values, space, config, initial);
  }
  if (config.mode == SolveMode::iterative_descent) {
    // Flat targets converge with the same machinery only for cotangent
    // weights; just run the direct solve, which is the fixed point.
    return detail::solve_flat(mesh, boundary_values, space, config);
  }
  return detail::solve_flat(mesh, boundary_values, space, config);
}

// ---------------------------------------------------------------------------
// hat removal
// ---------------------------------------------------------------------------

struct CutHatResult {
  PLMap map;
  std::vector<int> relocated_vertices;
  double max_edge_expansion = 0.0;  // over mesh edges: image length after - before
  double energy_before = 0.0;
  double energy_after = 0.0;
};

// Relocate a hat component onto its cutter. For a halfspace, vertices on the
// hat's side project orthogonally onto the hyperplane; this is sampling a
// 1-Lipschitz retraction, so no image edge can grow. For a geodesic segment
// [x, y], every vertex of the hat's cells moves to gamma(min(d(x, q), len)),
// the nearest-parameter point on the segment. Edges between relocated
// vertices cannot grow; edges crossing the hat rim can grow by roughly the
// cut tolerance (their outer endpoints are only within tol_cut of the
// segment), which is what max_edge_expansion reports.
inline CutHatResult cut_hat(const PLMap& f, const Cutter& cutter, const CutComponent& hat) {
  require_map_sizes(f);
  if (hat.touches_boundary)
    throw std::invalid_argument("cut_hat: component touches the domain boundary");
  std::vector<bool> on_boundary = boundary_vertex_flags(f.mesh);
  std::vector<char> in_hat(f.mesh.vertex_count(), 0);
  for (int t : hat.cells) {
    if (t < 0 || t >= f.mesh.triangle_count())
      throw std::invalid_argument("cut_hat: cell index out of range");
    for (int k = 0; k < 3; k++) in_hat[f.mesh.triangles[t][k]] = 1;
  }

  CutHatResult result;
  result.map = f;
  if (const HalfSpace* h = std::get_if<HalfSpace>(&cutter)) {
    if (hat.side == 0) throw std::invalid_argument("cut_hat: halfspace hat needs a side");
    for (int v = 0; v < f.mesh.vertex_count(); v++) {
      if (!in_hat[v]) continue;
      double val = detail::halfspace_value(*h, f.space, f.images[v]);
      if (val * hat.side <= 0) continue;  // rim vertices on the far side stay put
      if (on_boundary[v])
        throw std::invalid_argument("cut_hat: relocation would move a boundary vertex");
      if (f.space.dim() == 2) {
        Vec2 q = f.image2(v);
        Vec2 n{h->normal.x, h->normal.y};
        Vec2 moved = q - n * val;
        result.map.images[v] = TargetPoint::plane(moved.x, moved.y);
      } else {
        Vec3 moved = f.image3(v) - h->normal * val;
        result.map.images[v] = TargetPoint::space(moved.x, moved.y, moved.z);
      }
      result.relocated_vertices.push_back(v);
    }
  } else {
    const GeodesicSegment& seg = std::get<GeodesicSegment>(cutter);
    for (int v = 0; v < f.mesh.vertex_count(); v++) {
      if (!in_hat[v]) continue;
      if (on_boundary[v])
        throw std::invalid_argument("cut_hat: relocation would move a boundary vertex");
      double t = std::min(distance(f.space, seg.a, f.images[v]), seg.length);
      result.map.images[v] = seg.eval(t);
      result.relocated_vertices.push_back(v);
    }
  }

  EdgeTable edges = build_edge_table(f.mesh);
  for (const MeshEdge& e : edges.edges) {
    if (!in_hat[e.a] && !in_hat[e.b]) continue;
    double before = image_edge_length(f, e.a, e.b);
    double after = image_edge_length(result.map, e.a, e.b);
    result.max_edge_expansion = std::max(result.max_edge_expansion, after - before);
  }
  result.energy_before = dirichlet_energy(f).total;
  result.energy_after = dirichlet_energy(result.map).total;
  return result;
}

// ---------------------------------------------------------------------------
// descent: repeatedly find and remove hats
// ---------------------------------------------------------------------------

struct DescentOptions {
  int rounds = 10;
  int refinement = 0;             // applied once, up front
  std::optional<double> tol_cut;  // for segment cutters
};

struct DescentTraceRow {
  int round = 0;
  int cutter_index = -1;  // -1 on the initial row
  double energy = 0.0;
  int hat_cells = 0;
};

struct DescentResult {
  PLMap map;
  std::vector<DescentTraceRow> trace;
  bool completed = false;  // a full round found no hats
  int cuts_total = 0;
};

inline DescentResult saddle_by_descent(const PLMap& f0, const std::vector<Cutter>& family,
                                       const DescentOptions& opts = {}) {
  require_map_sizes(f0);
  DescentResult result;
  result.map = opts.refinement > 0 ? refine_plmap(f0, opts.refinement) : f0;

  // Energy monotonicity of hat removal needs nonnegative edge weights.
  if (min_cotangent_weight(result.map.mesh) < -1e-12)
    throw std::invalid_argument(
        "saddle_by_descent: mesh has negative cotangent weights (not Delaunay)");

  double energy = dirichlet_energy(result.map).total;
  result.trace.push_back({0, -1, energy, 0});
  double slack = 1e-9 * std::max(1.0, energy);

  CutOptions cut_opts;
  cut_opts.tol_cut = opts.tol_cut;

  for (int round = 1; round <= opts.rounds; round++) {
    int cuts_this_round = 0;
    for (size_t ci = 0; ci < family.size(); ci++) {
      // Removing one hat can merge or reveal others for the same cutter, so
      // re-decompose until this cutter is clean.
      for (int guard = 0; guard <= result.map.mesh.triangle_count(); guard++) {
        CutDecomposition dec = cut_components(result.map, family[ci], cut_opts);
        if (dec.hat_indices.empty()) break;
        CutHatResult step = cut_hat(result.map, family[ci], dec.components[dec.hat_indices[0]]);
        if (step.energy_after > energy + slack)
          throw std::runtime_error("saddle_by_descent: hat removal increased the energy");
        result.map = std::move(step.map);
        energy = step.energy_after;
        result.trace.push_back({round, int(ci), energy,
                                int(dec.components[dec.hat_indices[0]].cells.size())});
        result.cuts_total++;
        cuts_this_round++;
      }
    }
    if (cuts_this_round == 0) {
      result.completed = true;
      break;
    }
  }
  return result;
}

}  // namespace saddlekit
