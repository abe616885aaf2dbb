#pragma once

// Command-line front end. Every subcommand reads/writes the JSON formats from
// io.hpp and reports through a JSON envelope {schema, command, config, ...}.
// Exit codes: 0 = success / check passed, 1 = check failed (witnesses are in
// the report), 2 = usage or input error.

#include <CLI11.hpp>

#include "generate.hpp"
#include "io.hpp"

namespace saddlekit::cli {

using io::json;

namespace detail {

inline std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    size_t used = 0;
    out.push_back(std::stod(item, &used));
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
  }
  return out;
}

inline TargetPoint parse_point(const TargetSpace& space, const std::string& text) {
  std::vector<double> v = parse_numbers(text);
  if (space.kind == TargetKind::cone) {
    if (v.size() != 2) throw std::invalid_argument("cone points are r,theta");
    return TargetPoint::cone(v[0], v[1]);
  }
  if (space.kind == TargetKind::plane) {
    if (v.size() != 2) throw std::invalid_argument("plane points are x,y");
    return TargetPoint::plane(v[0], v[1]);
  }
  if (v.size() != 3) throw std::invalid_argument("3-space points are x,y,z");
  return TargetPoint::space(v[0], v[1], v[2]);
}

// --plane "nx,ny,c" (plane target) or "nx,ny,nz,c" (3-space target);
// --segment "a:b" with each endpoint in the target's point syntax
inline Cutter parse_cutter(const PLMap& f, const std::string& plane_arg,
                           const std::string& segment_arg) {
  if (!plane_arg.empty() && !segment_arg.empty())
    throw std::invalid_argument("give either --plane or --segment, not both");
  if (!plane_arg.empty()) {
    std::vector<double> v = parse_numbers(plane_arg);
    if (f.space.kind == TargetKind::plane) {
      if (v.size() != 3) throw std::invalid_argument("--plane needs nx,ny,c for plane targets");
      return HalfSpace::line({v[0], v[1]}, v[2]);
    }
    if (f.space.kind == TargetKind::space3) {
      if (v.size() != 4) throw std::invalid_argument("--plane needs nx,ny,nz,c for 3-space targets");
      return HalfSpace::plane3({v[0], v[1], v[2]}, v[3]);
    }
    throw std::invalid_argument("halfspace cutters need a flat target; use --segment");
  }
  if (!segment_arg.empty()) {
    size_t colon = segment_arg.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("--segment needs a:b");
    TargetPoint a = parse_point(f.space, segment_arg.substr(0, colon));
    TargetPoint b = parse_point(f.space, segment_arg.substr(colon + 1));
    return geodesic(f.space, a, b);
  }
  throw std::invalid_argument("a cutter is required: --plane or --segment");
}

inline void write_report(const std::string& path, const json& report) {
  io::write_text(path, report.dump(2) + "\n");
}

inline json validation_to_json(const ValidationReport& vr) {
  json out;
  out["ok"] = vr.ok;
  json items = json::array();
  for (const Violation& v : vr.violations) {
    json item;
    item["code"] = v.code;
    item["message"] = v.message;
    item["indices"] = v.indices;
    items.push_back(std::move(item));
  }
  out["violations"] = std::move(items);
  return out;
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
  CLI::App app{"piecewise-linear saddle map toolkit"};
  app.name("saddlekit");
  app.require_subcommand(1);
  int rc = 0;

  std::string threads;
  app.add_option("--threads", threads, "worker thread cap (overrides SADDLEKIT_THREADS)");

  // ---- gen -----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a built-in mesh or map");
  struct {
    std::string shape = "disc";
    int n = 8;
    std::string expr;
    double height = 1.0, width = 0.5, cone_angle = 3.0 * kPi, lift = 0.25;
    std::string out = "-", obj;
  } g;
  gen->add_option("--shape", g.shape, "disc|graph|bump|fold|fold3d|cone")
      ->check(CLI::IsMember({"disc", "graph", "bump", "fold", "fold3d", "cone"}));
  gen->add_option("--n", g.n, "rings in the disc grid (vertices: 1+3n(n+1))")
      ->check(CLI::PositiveNumber);
  gen->add_option("--expr", g.expr, "height expression in x,y,r for --shape graph");
  gen->add_option("--height", g.height, "bump height");
  gen->add_option("--width", g.width, "bump width");
  gen->add_option("--cone-angle", g.cone_angle, "total cone angle (radians, >= 2 pi)");
  gen->add_option("--lift", g.lift, "vertical lift for --shape fold3d");
  gen->add_option("--out", g.out, "output JSON path ('-' = stdout)");
  gen->add_option("--obj", g.obj, "also export OBJ here");
  gen->callback([&]() {
    Generated made;
    if (g.shape == "disc") made = generate_disc(g.n);
    else if (g.shape == "graph") {
      if (g.expr.empty()) throw std::invalid_argument("--shape graph needs --expr");
      made = generate_graph(g.n, parse_height_expression(g.expr));
    } else if (g.shape == "bump") made = generate_bump(g.n, g.height, g.width);
    else if (g.shape == "fold") made = generate_fold(g.n);
    else if (g.shape == "fold3d") made = generate_fold_surface(g.n, g.lift);
    else made = generate_cone_disc(g.n, g.cone_angle);

    if (made.map) io::write_text(g.out, io::plmap_to_json(*made.map).dump(2) + "\n");
    else io::write_text(g.out, io::mesh_file_json(made.mesh).dump(2) + "\n");
    if (!g.obj.empty()) {
      if (made.map) io::export_obj(g.obj, *made.map);
      else io::export_obj(g.obj, made.mesh);
    }
  });

  // ---- validate --------------------------------------------------------------
  auto* validate = app.add_subcommand("validate", "validate a mesh or map file");
  struct {
    std::string in, out = "-";
  } va;
  validate->add_option("--in", va.in, "mesh or plmap JSON")->required();
  validate->add_option("--out", va.out, "report path");
  validate->callback([&]() {
    json in = io::parse_json(io::read_file(va.in));
    DiscMesh mesh = io::mesh_from_json(in.at("mesh"));
    ValidationReport vr = validate_disc_mesh(mesh);
    json report = io::new_report("validate");
    report["config"] = {{"in", va.in}};
    report["result"] = detail::validation_to_json(vr);
    if (vr.ok && in.value("kind", "") == "plmap") {
      PLMap f = io::plmap_from_json(in);  // throws on bad sizes or out-of-range points
      report["result"]["images_checked"] = int(f.images.size());
    }
    detail::write_report(va.out, report);
    rc = vr.ok ? 0 : 1;
  });

  // ---- check-saddle ----------------------------------------------------------
  auto* saddle = app.add_subcommand("check-saddle", "sweep cutters and look for hats");
  struct {
    std::string in, out = "-", svg;
    int refine = 0, density = 200, max_witnesses = 10;
    uint64_t seed = 1;
    double tol_cut = -1;
  } sa;
  saddle->add_option("--in", sa.in)->required();
  saddle->add_option("--refine", sa.refine, "refinement levels before cutting");
  saddle->add_option("--density", sa.density, "cutter family density (0 = exhaustive)");
  saddle->add_option("--seed", sa.seed, "seed for randomized cutter supplements");
  saddle->add_option("--max-witnesses", sa.max_witnesses);
  saddle->add_option("--tol-cut", sa.tol_cut, "segment cut tolerance (default: derived)");
  saddle->add_option("--out", sa.out, "report path");
  saddle->add_option("--svg", sa.svg, "render the first witness decomposition");
  saddle->callback([&]() {
    PLMap f = io::load_plmap(sa.in);
    SaddleOptions opts;
    opts.refinement = sa.refine;
    opts.density = sa.density;
    opts.seed = sa.seed;
    opts.max_witnesses = sa.max_witnesses;
    if (sa.tol_cut >= 0) opts.tol_cut = sa.tol_cut;
    SaddleReport sr = is_saddle(f, opts);
    json report = io::new_report("check-saddle");
    report["config"] = {{"in", sa.in},         {"refine", sa.refine}, {"density", sa.density},
                        {"seed", sa.seed},     {"max_witnesses", sa.max_witnesses},
                        {"tol_cut", sa.tol_cut}};
    report["result"]["verdict"] = sr.verdict;
    report["result"]["cutters_checked"] = sr.cutters_checked;
    report["result"]["tolerance_limited"] = sr.tolerance_limited;
    json wits = json::array();
    for (const HatWitness& w : sr.witnesses) {
      json jw;
      jw["cutter_index"] = w.cutter_index;
      jw["cutter"] = io::cutter_to_json(w.cutter);
      jw["component"] = io::component_to_json(w.component);
      jw["exact"] = w.exact;
      if (!w.exact) jw["tol_cut_used"] = w.tol_cut_used;
      wits.push_back(std::move(jw));
    }
    report["result"]["witnesses"] = std::move(wits);
    detail::write_report(sa.out, report);
    if (!sa.svg.empty() && !sr.witnesses.empty()) {
      CutOptions co;
      if (sa.tol_cut >= 0) co.tol_cut = sa.tol_cut;
      co.refinement = sa.refine;
      CutDecomposition dec = cut_components(f, sr.witnesses[0].cutter, co);
      io::write_text(sa.svg, io::svg_cut_decomposition(dec));
    }
    rc = sr.verdict == "not_saddle" ? 1 : 0;
  });

  // ---- find-hats ---------------------------------------------------------------
  auto* hats = app.add_subcommand("find-hats", "decompose along one cutter");
  struct {
    std::string in, plane, segment, out = "-", svg;
    int refine = 0;
    double tol_cut = -1;
  } fh;
  hats->add_option("--in", fh.in)->required();
  hats->add_option("--plane", fh.plane, "halfspace nx,ny,c (or nx,ny,nz,c)");
  hats->add_option("--segment", fh.segment, "geodesic segment a:b");
  hats->add_option("--refine", fh.refine);
  hats->add_option("--tol-cut", fh.tol_cut);
  hats->add_option("--out", fh.out, "report path");
  hats->add_option("--svg", fh.svg, "render the decomposition");
  hats->callback([&]() {
    PLMap f = io::load_plmap(fh.in);
    Cutter cutter = detail::parse_cutter(f, fh.plane, fh.segment);
    CutOptions opts;
    opts.refinement = fh.refine;
    if (fh.tol_cut >= 0) opts.tol_cut = fh.tol_cut;
    CutDecomposition dec = cut_components(f, cutter, opts);
    json report = io::new_report("find-hats");
    report["config"] = {{"in", fh.in},
                        {"cutter", io::cutter_to_json(cutter)},
                        {"refine", fh.refine},
                        {"tol_cut", fh.tol_cut}};
    report["result"]["exact"] = dec.exact;
    report["result"]["tol_cut_used"] = dec.tol_cut_used;
    report["result"]["component_count"] = int(dec.components.size());
    report["result"]["hat_count"] = int(dec.hat_indices.size());
    json comps = json::array();
    for (const CutComponent& c : dec.components) comps.push_back(io::component_to_json(c));
    report["result"]["components"] = std::move(comps);
    report["result"]["hat_indices"] = dec.hat_indices;
    detail::write_report(fh.out, report);
    if (!fh.svg.empty()) io::write_text(fh.svg, io::svg_cut_decomposition(dec));
    rc = dec.hat_indices.empty() ? 0 : 1;
  });

  // ---- cut-hat ------------------------------------------------------------------
  auto* cut = app.add_subcommand("cut-hat", "relocate one hat onto its cutter");
  struct {
    std::string in, plane, segment, out = "-", out_map;
    int hat = 0, refine = 0;
    double tol_cut = -1;
  } ch;
  cut->add_option("--in", ch.in)->required();
  cut->add_option("--plane", ch.plane);
  cut->add_option("--segment", ch.segment);
  cut->add_option("--hat", ch.hat, "index into the hat list (default 0)");
  cut->add_option("--refine", ch.refine);
  cut->add_option("--tol-cut", ch.tol_cut);
  cut->add_option("--out", ch.out, "report path");
  cut->add_option("--out-map", ch.out_map, "write the cut map here");
  cut->callback([&]() {
    PLMap f = io::load_plmap(ch.in);
    Cutter cutter = detail::parse_cutter(f, ch.plane, ch.segment);
    CutOptions opts;
    opts.refinement = ch.refine;
    if (ch.tol_cut >= 0) opts.tol_cut = ch.tol_cut;
    CutDecomposition dec = cut_components(f, cutter, opts);
    json report = io::new_report("cut-hat");
    report["config"] = {{"in", ch.in},
                        {"cutter", io::cutter_to_json(cutter)},
                        {"hat", ch.hat},
                        {"refine", ch.refine},
                        {"tol_cut", ch.tol_cut}};
    if (ch.hat < 0 || ch.hat >= int(dec.hat_indices.size())) {
      report["result"]["hat_count"] = int(dec.hat_indices.size());
      report["result"]["error"] = "no hat with that index";
      detail::write_report(ch.out, report);
      rc = 1;
      return;
    }
    CutHatResult step = cut_hat(dec.map, cutter, dec.components[dec.hat_indices[ch.hat]]);
    report["result"]["hat_count"] = int(dec.hat_indices.size());
    report["result"]["relocated_vertices"] = int(step.relocated_vertices.size());
    report["result"]["energy_before"] = step.energy_before;
    report["result"]["energy_after"] = step.energy_after;
    report["result"]["max_edge_expansion"] = step.max_edge_expansion;
    detail::write_report(ch.out, report);
    if (!ch.out_map.empty()) io::save_plmap(ch.out_map, step.map);
    rc = 0;
  });

  // ---- energy ---------------------------------------------------------------------
  auto* energy = app.add_subcommand("energy", "Dirichlet energy of a map");
  struct {
    std::string in, out = "-";
  } en;
  energy->add_option("--in", en.in)->required();
  energy->add_option("--out", en.out, "report path");
  energy->callback([&]() {
    PLMap f = io::load_plmap(en.in);
    EnergyReport er = dirichlet_energy(f);
    json report = io::new_report("energy");
    report["config"] = {{"in", en.in}};
    report["result"]["total"] = er.total;
    report["result"]["edge_quadratic_total"] = er.edge_quadratic_total;
    double lo = er.per_triangle.empty() ? 0 : er.per_triangle[0], hi = lo;
    for (double e : er.per_triangle) { lo = std::min(lo, e); hi = std::max(hi, e); }
    report["result"]["per_triangle_min"] = lo;
    report["result"]["per_triangle_max"] = hi;
    report["result"]["triangles"] = int(er.per_triangle.size());
    detail::write_report(en.out, report);
  });

  // ---- harmonize --------------------------------------------------------------------
  auto* harm = app.add_subcommand("harmonize",
                                  "solve for the discrete harmonic map with the input's "
                                  "boundary values");
  struct {
    std::string in, out = "-", out_map, weights = "cotangent";
    double tol = -1;
    int max_iter = 100000;
  } ha;
  harm->add_option("--in", ha.in, "plmap (boundary images kept) or mesh (identity boundary)")
      ->required();
  harm->add_option("--weights", ha.weights, "cotangent|mean_value")
      ->check(CLI::IsMember({"cotangent", "mean_value"}));
  harm->add_option("--tol", ha.tol, "solver tolerance");
  harm->add_option("--max-iter", ha.max_iter);
  harm->add_option("--out", ha.out, "report path");
  harm->add_option("--out-map", ha.out_map, "write the harmonic map here");
  harm->callback([&]() {
    json in = io::parse_json(io::read_file(ha.in));
    DiscMesh mesh;
    TargetSpace space = TargetSpace::plane();
    std::vector<TargetPoint> boundary_values;
    std::optional<std::vector<TargetPoint>> initial;
    if (in.value("kind", "") == "plmap") {
      PLMap f = io::plmap_from_json(in);
      mesh = f.mesh;
      space = f.space;
      for (int v : mesh.boundary) boundary_values.push_back(f.images[v]);
      if (space.kind == TargetKind::cone) initial = f.images;  // warm start
    } else {
      mesh = io::mesh_from_json(in.at("mesh"));
      for (int v : mesh.boundary)
        boundary_values.push_back(TargetPoint::plane(mesh.vertices[v].x, mesh.vertices[v].y));
    }
    SolverConfig config;
    config.weights = ha.weights == "mean_value" ? WeightScheme::mean_value : WeightScheme::cotangent;
    config.tol_solve = ha.tol;
    config.max_iterations = ha.max_iter;
    HarmonicResult hr = harmonic_solve(mesh, boundary_values, space, config, initial);
    json report = io::new_report("harmonize");
    report["config"] = {{"in", ha.in}, {"weights", ha.weights}, {"tol", ha.tol},
                        {"max_iter", ha.max_iter}};
    report["result"]["converged"] = hr.converged;
    report["result"]["iterations"] = hr.iterations;
    report["result"]["residual"] = hr.residual;
    report["result"]["energy"] = dirichlet_energy(hr.map).total;
    detail::write_report(ha.out, report);
    if (!ha.out_map.empty()) io::save_plmap(ha.out_map, hr.map);
    rc = hr.converged ? 0 : 1;
  });

  // ---- descent ------------------------------------------------------------------------
  auto* descent = app.add_subcommand("descent", "repeatedly find and remove hats");
  struct {
    std::string in, out = "-", out_map, trace;
    int rounds = 10, refine = 0, density = 200;
    uint64_t seed = 1;
    double tol_cut = -1;
  } de;
  descent->add_option("--in", de.in)->required();
  descent->add_option("--rounds", de.rounds);
  descent->add_option("--refine", de.refine);
  descent->add_option("--density", de.density);
  descent->add_option("--seed", de.seed);
  descent->add_option("--tol-cut", de.tol_cut);
  descent->add_option("--out", de.out, "report path");
  descent->add_option("--out-map", de.out_map);
  descent->add_option("--trace", de.trace, "write the energy trace CSV here");
  descent->callback([&]() {
    PLMap f = io::load_plmap(de.in);
    if (de.refine > 0) f = refine_plmap(f, de.refine);
    std::vector<Cutter> family = canonical_cut_family(f, de.density, de.seed);
    DescentOptions opts;
    opts.rounds = de.rounds;
    if (de.tol_cut >= 0) opts.tol_cut = de.tol_cut;
    DescentResult dr = saddle_by_descent(f, family, opts);
    json report = io::new_report("descent");
    report["config"] = {{"in", de.in},     {"rounds", de.rounds}, {"refine", de.refine},
                        {"density", de.density}, {"seed", de.seed}, {"tol_cut", de.tol_cut}};
    report["result"]["completed"] = dr.completed;
    report["result"]["cuts_total"] = dr.cuts_total;
    report["result"]["cutters"] = int(family.size());
    report["result"]["energy_initial"] = dr.trace.front().energy;
    report["result"]["energy_final"] = dr.trace.back().energy;
    detail::write_report(de.out, report);
    if (!de.out_map.empty()) io::save_plmap(de.out_map, dr.map);
    if (!de.trace.empty()) io::write_text(de.trace, io::csv_trace(dr.trace));
    rc = dr.completed ? 0 : 1;
  });

  // ---- check-monotone / check-light ------------------------------------------------------
  auto* mono = app.add_subcommand("check-monotone", "are all nonempty fibers connected?");
  auto* light = app.add_subcommand("check-light", "are all fiber components small?");
  struct FiberCli {
    std::string in, out = "-";
    double tol_fiber = 1e-6;
    int grid = 0, max_witnesses = 10;
  };
  FiberCli mo, li;
  for (auto [cmd, opt] : {std::pair{mono, &mo}, std::pair{light, &li}}) {
    cmd->add_option("--in", opt->in)->required();
    cmd->add_option("--tol-fiber", opt->tol_fiber);
    cmd->add_option("--grid", opt->grid, "extra grid samples per axis");
    cmd->add_option("--max-witnesses", opt->max_witnesses);
    cmd->add_option("--out", opt->out, "report path");
  }
  auto run_fiber_check = [&rc](const FiberCli& opt, bool monotone_mode, const char* command) {
    PLMap f = io::load_plmap(opt.in);
    FiberCheckOptions fo;
    fo.tol_fiber = opt.tol_fiber;
    fo.grid = opt.grid;
    fo.max_witnesses = opt.max_witnesses;
    FiberCheckReport fr = monotone_mode ? is_monotone(f, fo) : is_light(f, fo);
    json report = io::new_report(command);
    report["config"] = {{"in", opt.in}, {"tol_fiber", opt.tol_fiber}, {"grid", opt.grid},
                        {"max_witnesses", opt.max_witnesses}};
    report["result"]["passed"] = fr.passed;
    report["result"]["samples_checked"] = fr.samples_checked;
    json wits = json::array();
    for (const FiberWitness& w : fr.witnesses) {
      json jw;
      jw["point"] = io::point_to_json(f.space, w.q);
      jw["components"] = w.component_count;
      jw["max_diameter"] = w.max_diameter;
      wits.push_back(std::move(jw));
    }
    report["result"]["witnesses"] = std::move(wits);
    detail::write_report(opt.out, report);
    rc = fr.passed ? 0 : 1;
  };
  mono->callback([&]() { run_fiber_check(mo, true, "check-monotone"); });
  light->callback([&]() { run_fiber_check(li, false, "check-light"); });

  // ---- degree -----------------------------------------------------------------------------
  auto* degree = app.add_subcommand("degree", "boundary winding degree around a point");
  struct {
    std::string in, point, out = "-";
  } dg;
  degree->add_option("--in", dg.in)->required();
  degree->add_option("--point", dg.point, "x,y")->required();
  degree->add_option("--out", dg.out, "report path");
  degree->callback([&]() {
    PLMap f = io::load_plmap(dg.in);
    TargetPoint q = detail::parse_point(f.space, dg.point);
    int deg = boundary_degree(f, q);
    json report = io::new_report("degree");
    report["config"] = {{"in", dg.in}, {"point", dg.point}};
    report["result"]["degree"] = deg;
    detail::write_report(dg.out, report);
  });

  // ---- factorize --------------------------------------------------------------------------
  auto* factor = app.add_subcommand("factorize", "monotone-light factorization");
  struct {
    std::string in, out = "-", out_light;
  } fa;
  factor->add_option("--in", fa.in)->required();
  factor->add_option("--out", fa.out, "report path");
  factor->add_option("--out-light", fa.out_light, "write the light part as a plmap");
  factor->callback([&]() {
    PLMap f = io::load_plmap(fa.in);
    Factorization fac = monotone_light_factorize(f);
    json report = io::new_report("factorize");
    report["config"] = {{"in", fa.in}};
    report["result"]["classes"] = fac.class_count;
    report["result"]["vertices"] = f.mesh.vertex_count();
    report["result"]["collapsed_edges"] = fac.collapsed_edges;
    report["result"]["quotient_is_disc"] = fac.quotient_is_disc;
    report["result"]["quotient_triangles"] = int(fac.quotient.triangles.size());
    detail::write_report(fa.out, report);
    if (!fa.out_light.empty()) io::save_plmap(fa.out_light, factorization_light_part(f, fac));
  });

  // ---- project-check ------------------------------------------------------------------------
  auto* project = app.add_subcommand("project-check", "is the surface a graph over the plane?");
  struct {
    std::string in, out = "-", svg;
    int max_witnesses = 10;
  } pc;
  project->add_option("--in", pc.in)->required();
  project->add_option("--max-witnesses", pc.max_witnesses);
  project->add_option("--out", pc.out, "report path");
  project->add_option("--svg", pc.svg, "render the projection");
  project->callback([&]() {
    PLMap f = io::load_plmap(pc.in);
    GraphReport gr = check_graph_property(f, pc.max_witnesses);
    json report = io::new_report("project-check");
    report["config"] = {{"in", pc.in}, {"max_witnesses", pc.max_witnesses}};
    report["result"]["graph"] = gr.graph;
    report["result"]["boundary_simple"] = gr.boundary.simple;
    report["result"]["boundary_convex"] = gr.boundary.convex;
    report["result"]["boundary_winding"] = gr.boundary.winding;
    report["result"]["orientation_consistent"] = gr.orientation_consistent;
    report["result"]["flipped_cells"] = gr.flipped_cells;
    report["result"]["degenerate_cells"] = gr.degenerate_cells;
    report["result"]["overlap_count"] = gr.overlap_count;
    json pairs = json::array();
    for (auto [a, b] : gr.overlap_pairs) pairs.push_back({a, b});
    report["result"]["overlap_pairs"] = std::move(pairs);
    detail::write_report(pc.out, report);
    if (!pc.svg.empty()) io::write_text(pc.svg, io::svg_projection(f, gr));
    rc = gr.graph ? 0 : 1;
  });

  // ---- envelopes ------------------------------------------------------------------------------
  auto* env = app.add_subcommand("envelopes", "lower/upper envelopes over the projection");
  struct {
    std::string in, out = "-", csv;
    int grid_n = 128;
  } ev;
  env->add_option("--in", ev.in)->required();
  env->add_option("--grid-n", ev.grid_n)->check(CLI::PositiveNumber);
  env->add_option("--out", ev.out, "report path");
  env->add_option("--csv", ev.csv, "write the heightfields CSV here");
  env->callback([&]() {
    PLMap f = io::load_plmap(ev.in);
    EnvelopeField field = envelopes(f, ev.grid_n);
    json report = io::new_report("envelopes");
    report["config"] = {{"in", ev.in}, {"grid_n", ev.grid_n}};
    report["result"]["covered_nodes"] = field.covered_count;
    report["result"]["max_gap"] = field.max_gap;
    detail::write_report(ev.out, report);
    if (!ev.csv.empty()) io::write_text(ev.csv, io::csv_envelopes(field));
  });

  // ---- max-principle ----------------------------------------------------------------------------
  auto* maxp = app.add_subcommand("max-principle",
                                  "linear functional max on a sub-disc vs its rim");
  struct {
    std::string in, lambda = "0,0,1", cells, out = "-";
  } mp;
  maxp->add_option("--in", mp.in)->required();
  maxp->add_option("--lambda", mp.lambda, "functional coefficients a,b,c (default height)");
  maxp->add_option("--cells", mp.cells,
                   "comma-separated cell indices or @file with a JSON array (default: all)");
  maxp->add_option("--out", mp.out, "report path");
  maxp->callback([&]() {
    PLMap f = io::load_plmap(mp.in);
    std::vector<double> lv = detail::parse_numbers(mp.lambda);
    if (lv.size() == 2) lv.push_back(0.0);
    if (lv.size() != 3) throw std::invalid_argument("--lambda needs a,b,c");
    std::vector<int> cells;
    if (mp.cells.empty()) {
      cells.resize(f.mesh.triangle_count());
      for (int t = 0; t < f.mesh.triangle_count(); t++) cells[t] = t;
    } else if (mp.cells[0] == '@') {
      json arr = io::parse_json(io::read_file(mp.cells.substr(1)));
      cells = arr.get<std::vector<int>>();
    } else {
      for (double x : detail::parse_numbers(mp.cells)) cells.push_back(int(x));
    }
    MaxPrincipleReport mr = check_max_principle(f, {lv[0], lv[1], lv[2]}, cells);
    json report = io::new_report("max-principle");
    report["config"] = {{"in", mp.in}, {"lambda", mp.lambda}, {"cells", int(cells.size())}};
    report["result"]["holds"] = mr.holds;
    report["result"]["rim_max"] = mr.rim_max;
    report["result"]["interior_max"] = mr.interior_max;
    report["result"]["excess"] = mr.excess;
    report["result"]["tol_used"] = mr.tol_used;
    report["result"]["worst_vertex"] = mr.worst_vertex;
    report["result"]["rim_length"] = mr.rim_length;
    detail::write_report(mp.out, report);
    rc = mr.holds ? 0 : 1;
  });

  // Apply the thread cap before any callback can start parallel work.
  for (int i = 1; i < argc; i++) {
    std::string arg = argv[i];
    if (arg == "--threads" && i + 1 < argc) setenv("SADDLEKIT_THREADS", argv[i + 1], 1);
    else if (arg.rfind("--threads=", 0) == 0) setenv("SADDLEKIT_THREADS", arg.substr(10).c_str(), 1);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    fprintf(stderr, "saddlekit: %s\n", e.what());
    return 2;
  }
  return rc;
}

inline int run(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.push_back("saddlekit");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& s : full) argv.push_back(s.c_str());
  return run(int(argv.size()), argv.data());
}

}  // namespace saddlekit::cli
