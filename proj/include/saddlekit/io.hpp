#pragma once

// File formats: JSON meshes/maps (schema "saddlekit/1"), Wavefront OBJ import
// and export, CSV tables, and small SVG renderings of decompositions, fibers,
// and projections. All writes go through atomic_write (temp file + rename).
// JSON output uses ordered_json with insertion order preserved, so a given
// report serializes byte-identically across runs.

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cut.hpp"
#include "energy.hpp"
#include "fiber.hpp"
#include "graph.hpp"

namespace saddlekit::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// basic file plumbing
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void atomic_write(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

// path "-" means stdout
inline void write_text(const std::string& path, const std::string& content) {
  if (path == "-") {
    fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  atomic_write(path, content);
}

// ---------------------------------------------------------------------------
// JSON: meshes, targets, maps, reports
// ---------------------------------------------------------------------------

inline constexpr const char* kSchema = "saddlekit/1";

inline json mesh_to_json(const DiscMesh& m) {
  json j;
  json verts = json::array();
  for (const Vec2& v : m.vertices) verts.push_back({v.x, v.y});
  json tris = json::array();
  for (const auto& t : m.triangles) tris.push_back({t[0], t[1], t[2]});
  j["vertices"] = std::move(verts);
  j["triangles"] = std::move(tris);
  j["boundary"] = m.boundary;
  return j;
}

inline DiscMesh mesh_from_json(const json& j) {
  DiscMesh m;
  for (const auto& v : j.at("vertices")) m.vertices.push_back({v.at(0), v.at(1)});
  for (const auto& t : j.at("triangles"))
    m.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
  m.boundary = j.at("boundary").get<std::vector<int>>();
  return m;
}

inline json target_to_json(const TargetSpace& s) {
  json j;
  switch (s.kind) {
    case TargetKind::plane: j["kind"] = "plane"; break;
    case TargetKind::space3: j["kind"] = "space3"; break;
    case TargetKind::cone:
      j["kind"] = "cone";
      j["cone_angle"] = s.cone_angle;
      j["cone_radius"] = s.cone_radius;
      break;
  }
  return j;
}

inline TargetSpace target_from_json(const json& j) {
  std::string kind = j.at("kind");
  if (kind == "plane") return TargetSpace::plane();
  if (kind == "space3") return TargetSpace::space3();
  if (kind == "cone")
    return TargetSpace::cone(j.at("cone_angle"), j.value("cone_radius", 1.0));
  throw std::runtime_error("unknown target kind '" + kind + "'");
}

inline json point_to_json(const TargetSpace& s, const TargetPoint& p) {
  if (s.kind == TargetKind::plane) return json::array({p.x(), p.y()});
  if (s.kind == TargetKind::space3) return json::array({p.x(), p.y(), p.z()});
  json j;
  j["r"] = p.r();
  j["theta"] = p.theta();
  return j;
}

inline TargetPoint point_from_json(const TargetSpace& s, const json& j) {
  if (s.kind == TargetKind::plane) return TargetPoint::plane(j.at(0), j.at(1));
  if (s.kind == TargetKind::space3) return TargetPoint::space(j.at(0), j.at(1), j.at(2));
  return TargetPoint::cone(j.at("r"), j.at("theta"));
}

inline json plmap_to_json(const PLMap& f) {
  json j;
  j["schema"] = kSchema;
  j["kind"] = "plmap";
  j["mesh"] = mesh_to_json(f.mesh);
  j["target"] = target_to_json(f.space);
  json images = json::array();
  for (const TargetPoint& p : f.images) images.push_back(point_to_json(f.space, p));
  j["images"] = std::move(images);
  return j;
}

inline PLMap plmap_from_json(const json& j) {
  PLMap f;
  f.mesh = mesh_from_json(j.at("mesh"));
  f.space = target_from_json(j.at("target"));
  for (const auto& p : j.at("images")) f.images.push_back(point_from_json(f.space, p));
  require_map_sizes(f);
  for (const TargetPoint& p : f.images) require_valid_point(f.space, p);
  return f;
}

inline json mesh_file_json(const DiscMesh& m) {
  json j;
  j["schema"] = kSchema;
  j["kind"] = "mesh";
  j["mesh"] = mesh_to_json(m);
  return j;
}

inline json parse_json(const std::string& text) {
  return json::parse(text);  // throws nlohmann parse_error on bad input
}

inline void save_plmap(const std::string& path, const PLMap& f) {
  write_text(path, plmap_to_json(f).dump(2) + "\n");
}

inline void save_mesh(const std::string& path, const DiscMesh& m) {
  write_text(path, mesh_file_json(m).dump(2) + "\n");
}

inline PLMap load_plmap(const std::string& path) {
  json j = parse_json(read_file(path));
  if (j.value("kind", "") != "plmap")
    throw std::runtime_error(path + ": expected a plmap file");
  return plmap_from_json(j);
}

// accepts either a bare mesh file or a plmap file (using its mesh)
inline DiscMesh load_mesh(const std::string& path) {
  json j = parse_json(read_file(path));
  return mesh_from_json(j.at("mesh"));
}

inline json new_report(const std::string& command) {
  json j;
  j["schema"] = kSchema;
  j["command"] = command;
  return j;
}

// serialize a cutter for witness reports
inline json cutter_to_json(const Cutter& c) {
  json j;
  if (const HalfSpace* h = std::get_if<HalfSpace>(&c)) {
    j["type"] = "halfspace";
    if (h->dim == 2) j["normal"] = {h->normal.x, h->normal.y};
    else j["normal"] = {h->normal.x, h->normal.y, h->normal.z};
    j["offset"] = h->offset;
  } else {
    const GeodesicSegment& s = std::get<GeodesicSegment>(c);
    j["type"] = "segment";
    j["a"] = point_to_json(s.space, s.a);
    j["b"] = point_to_json(s.space, s.b);
    j["length"] = s.length;
    j["through_tip"] = s.through_tip;
  }
  return j;
}

inline json component_to_json(const CutComponent& c) {
  json j;
  j["cells"] = c.cells;
  j["cell_count"] = int(c.cells.size());
  if (c.side != 0) j["side"] = c.side;
  j["touches_boundary"] = c.touches_boundary;
  if (c.image_bounds.valid()) {
    j["image_bounds"] = {{"lo", {c.image_bounds.lo.x, c.image_bounds.lo.y, c.image_bounds.lo.z}},
                         {"hi", {c.image_bounds.hi.x, c.image_bounds.hi.y, c.image_bounds.hi.z}}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// OBJ
// ---------------------------------------------------------------------------

inline std::string obj_text(const PLMap& f) {
  if (f.space.kind == TargetKind::cone)
    throw std::invalid_argument("OBJ export needs a flat target");
  std::ostringstream out;
  out.precision(17);
  for (const TargetPoint& p : f.images)
    out << "v " << p.x() << " " << p.y() << " " << (f.space.dim() == 3 ? p.z() : 0.0) << "\n";
  for (const auto& t : f.mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  return out.str();
}

inline std::string obj_text(const DiscMesh& m) {
  std::ostringstream out;
  out.precision(17);
  for (const Vec2& v : m.vertices) out << "v " << v.x << " " << v.y << " 0\n";
  for (const auto& t : m.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  return out.str();
}

inline void export_obj(const std::string& path, const PLMap& f) { write_text(path, obj_text(f)); }
inline void export_obj(const std::string& path, const DiscMesh& m) { write_text(path, obj_text(m)); }

// Import a triangulated disc from OBJ. The 3D positions become the images of
// a map into 3-space; the domain disc is rebuilt intrinsically: the boundary
// goes onto the unit circle by arclength, the interior is placed by a
// mean-value weighted graph Laplace solve using the 3D corner angles. With
// positive weights and a convex boundary this yields an embedded domain
// triangulation.
inline PLMap import_obj(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<Vec3> pos;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z))
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad vertex");
      pos.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string token;
      while (ls >> token) {
        // accept v, v/vt, v//vn, v/vt/vn
        size_t slash = token.find('/');
        int v = std::stoi(slash == std::string::npos ? token : token.substr(0, slash));
        if (v < 0) v = int(pos.size()) + v + 1;  // negative indices count from the end
        if (v < 1 || v > int(pos.size()))
          throw std::runtime_error(path + ":" + std::to_string(lineno) + ": face index out of range");
        idx.push_back(v - 1);
      }
      if (idx.size() < 3)
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": face needs 3 vertices");
      for (size_t k = 1; k + 1 < idx.size(); k++)
        faces.push_back({idx[0], idx[k], idx[k + 1]});  // fan-triangulate polygons
    }
  }
  if (pos.empty() || faces.empty()) throw std::runtime_error(path + ": no usable geometry");

  int V = int(pos.size());
  // directed boundary edges: appear in exactly one face, reverse absent
  std::unordered_map<uint64_t, int> directed;
  auto dkey = [V](int a, int b) { return uint64_t(a) * uint64_t(V) + uint64_t(b); };
  for (const auto& f : faces) {
    for (int k = 0; k < 3; k++) {
      int a = f[k], b = f[(k + 1) % 3];
      if (a == b) throw std::runtime_error(path + ": degenerate face");
      directed[dkey(a, b)]++;
    }
  }
  std::unordered_map<int, int> next;  // boundary walk, face interior on the left
  for (const auto& [key, count] : directed) {
    if (count > 1) throw std::runtime_error(path + ": non-manifold or inconsistently oriented");
    int a = int(key / uint64_t(V)), b = int(key % uint64_t(V));
    if (directed.find(dkey(b, a)) == directed.end()) {
      if (next.count(a)) throw std::runtime_error(path + ": branching boundary");
      next[a] = b;
    }
  }
  if (next.empty()) throw std::runtime_error(path + ": surface has no boundary");
  std::vector<int> cycle;
  int start = next.begin()->first;
  for (int v = start;;) {
    cycle.push_back(v);
    auto it = next.find(v);
    if (it == next.end()) throw std::runtime_error(path + ": open boundary chain");
    v = it->second;
    if (v == start) break;
    if (int(cycle.size()) > V) throw std::runtime_error(path + ": boundary walk does not close");
  }
  if (cycle.size() != next.size()) throw std::runtime_error(path + ": multiple boundary loops");

  // boundary onto the unit circle by 3D arclength
  std::vector<Vec2> domain(V, {0, 0});
  std::vector<char> fixed(V, 0);
  {
    double total = 0.0;
    std::vector<double> acc(cycle.size(), 0.0);
    for (size_t k = 0; k < cycle.size(); k++) {
      acc[k] = total;
      total += (pos[cycle[(k + 1) % cycle.size()]] - pos[cycle[k]]).norm();
    }
    if (total <= 0) throw std::runtime_error(path + ": boundary has zero length");
    for (size_t k = 0; k < cycle.size(); k++) {
      double a = 2.0 * kPi * acc[k] / total;
      domain[cycle[k]] = {std::cos(a), std::sin(a)};
      fixed[cycle[k]] = 1;
    }
  }

  // mean-value weights from the 3D corner angles
  std::vector<std::unordered_map<int, double>> weight(V);
  for (const auto& f : faces) {
    for (int k = 0; k < 3; k++) {
      int i = f[k], j1 = f[(k + 1) % 3], j2 = f[(k + 2) % 3];
      Vec3 u = pos[j1] - pos[i], w = pos[j2] - pos[i];
      double lu = u.norm(), lw = w.norm();
      if (lu <= 0 || lw <= 0) throw std::runtime_error(path + ": coincident vertices in a face");
      double cosang = std::clamp(dot(u, w) / (lu * lw), -1.0, 1.0);
      double half_tan = std::tan(0.5 * std::acos(cosang));
      weight[i][j1] += half_tan / lu;
      weight[i][j2] += half_tan / lw;
    }
  }

  std::vector<int> interior_index(V, -1);
  int N = 0;
  for (int v = 0; v < V; v++)
    if (!fixed[v]) interior_index[v] = N++;
  if (N > 0) {
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(N, 2);
    for (int v = 0; v < V; v++) {
      int row = interior_index[v];
      if (row < 0) continue;
      double diag = 0.0;
      for (const auto& [j, w] : weight[v]) {
        diag += w;
        if (interior_index[j] >= 0) trips.emplace_back(row, interior_index[j], -w);
        else {
          rhs(row, 0) += w * domain[j].x;
          rhs(row, 1) += w * domain[j].y;
        }
      }
      if (diag <= 0) throw std::runtime_error(path + ": isolated interior vertex");
      trips.emplace_back(row, row, diag);
    }
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error(path + ": domain flattening solve failed");
    Eigen::MatrixXd sol = solver.solve(rhs);
    for (int v = 0; v < V; v++)
      if (interior_index[v] >= 0) domain[v] = {sol(interior_index[v], 0), sol(interior_index[v], 1)};
  }

  PLMap f;
  f.mesh.vertices = std::move(domain);
  f.mesh.triangles = std::move(faces);
  f.mesh.boundary = std::move(cycle);
  f.space = TargetSpace::space3();
  f.images.reserve(V);
  for (const Vec3& p : pos) f.images.push_back(TargetPoint::space(p.x, p.y, p.z));

  ValidationReport vr = validate_disc_mesh(f.mesh);
  if (!vr.ok)
    throw std::runtime_error(path + ": imported surface is not a disc (" +
                             vr.violations[0].message + ")");
  return f;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string csv_trace(const std::vector<DescentTraceRow>& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "round,cutter,energy,hat_cells\n";
  for (const DescentTraceRow& row : trace)
    out << row.round << "," << row.cutter_index << "," << row.energy << "," << row.hat_cells
        << "\n";
  return out.str();
}

inline std::string csv_envelopes(const EnvelopeField& field) {
  std::ostringstream out;
  out.precision(17);
  out << "i,j,x,y,alpha,beta\n";
  for (int j = 0; j < field.grid_n; j++) {
    for (int i = 0; i < field.grid_n; i++) {
      size_t idx = size_t(j) * field.grid_n + i;
      if (!field.covered[idx]) continue;
      out << i << "," << j << "," << field.node_x(i) << "," << field.node_y(j) << ","
          << field.alpha[idx] << "," << field.beta[idx] << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace detail {

struct SvgCanvas {
  std::ostringstream body;
  BBox2 box;
  double stroke_width = 0.0;

  void begin(const BBox2& bounds) {
    box = bounds;
    Vec2 ext = box.extent();
    double pad = 0.04 * std::max({ext.x, ext.y, 1e-9});
    box.expand(box.lo - Vec2{pad, pad});
    box.expand(box.hi + Vec2{pad, pad});
    stroke_width = 0.002 * std::max(box.extent().x, box.extent().y);
  }
  // SVG y grows downward; flip so the picture matches math orientation
  double fy(double y) const { return box.lo.y + box.hi.y - y; }

  void polygon(const std::vector<Vec2>& pts, const std::string& fill, const std::string& stroke) {
    body << "<polygon points=\"";
    for (const Vec2& p : pts) body << p.x << "," << fy(p.y) << " ";
    body << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\""
         << stroke_width << "\"/>\n";
  }
  void line(Vec2 a, Vec2 b, const std::string& stroke, double width_mul = 1.0) {
    body << "<line x1=\"" << a.x << "\" y1=\"" << fy(a.y) << "\" x2=\"" << b.x << "\" y2=\""
         << fy(b.y) << "\" stroke=\"" << stroke << "\" stroke-width=\""
         << stroke_width * width_mul << "\"/>\n";
  }
  void circle(Vec2 c, double radius, const std::string& fill) {
    body << "<circle cx=\"" << c.x << "\" cy=\"" << fy(c.y) << "\" r=\"" << radius
         << "\" fill=\"" << fill << "\"/>\n";
  }
  std::string finish() const {
    std::ostringstream out;
    Vec2 ext = box.extent();
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << box.lo.x << " " << box.lo.y
        << " " << ext.x << " " << ext.y << "\" width=\"800\" height=\""
        << 800.0 * ext.y / std::max(ext.x, 1e-30) << "\">\n"
        << body.str() << "</svg>\n";
    return out.str();
  }
};

inline BBox2 mesh_bbox(const DiscMesh& m) {
  BBox2 b;
  for (const Vec2& v : m.vertices) b.expand(v);
  return b;
}

inline void draw_mesh(SvgCanvas& canvas, const DiscMesh& m, const std::string& fill,
                      const std::string& stroke) {
  for (const auto& t : m.triangles)
    canvas.polygon({m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]}, fill, stroke);
}

}  // namespace detail

// domain picture of a decomposition: hats highlighted, other components shaded
inline std::string svg_cut_decomposition(const CutDecomposition& dec) {
  detail::SvgCanvas canvas;
  canvas.begin(detail::mesh_bbox(dec.map.mesh));
  detail::draw_mesh(canvas, dec.map.mesh, "#f3f3f3", "#cccccc");
  static const char* shades[] = {"#b3cde3", "#ccebc5", "#decbe4", "#fed9a6", "#ffffcc"};
  int shade = 0;
  for (int ci = 0; ci < int(dec.components.size()); ci++) {
    const CutComponent& comp = dec.components[ci];
    bool hat = !comp.touches_boundary;
    std::string fill = hat ? "#e41a1c" : shades[shade++ % 5];
    for (int t : comp.cells) {
      const auto& tri = dec.map.mesh.triangles[t];
      canvas.polygon({dec.map.mesh.vertices[tri[0]], dec.map.mesh.vertices[tri[1]],
                      dec.map.mesh.vertices[tri[2]]},
                     fill, hat ? "#99000d" : "#888888");
    }
  }
  return canvas.finish();
}

// domain picture of one fiber: pieces drawn over the mesh
inline std::string svg_fiber(const PLMap& f, const FiberReport& fiber) {
  detail::SvgCanvas canvas;
  canvas.begin(detail::mesh_bbox(f.mesh));
  detail::draw_mesh(canvas, f.mesh, "#f3f3f3", "#cccccc");
  double dot_r = 0.008 * std::max(canvas.box.extent().x, canvas.box.extent().y);
  for (const FiberPiece& piece : fiber.pieces) {
    switch (piece.kind) {
      case PieceKind::point: canvas.circle(piece.p0, dot_r, "#e41a1c"); break;
      case PieceKind::segment: canvas.line(piece.p0, piece.p1, "#e41a1c", 3.0); break;
      case PieceKind::cell: {
        const auto& tri = f.mesh.triangles[piece.tri];
        canvas.polygon({f.mesh.vertices[tri[0]], f.mesh.vertices[tri[1]], f.mesh.vertices[tri[2]]},
                       "#e41a1c", "#99000d");
        break;
      }
    }
  }
  return canvas.finish();
}

// projected image triangles; overlap witnesses filled red
inline std::string svg_projection(const PLMap& f, const GraphReport& report) {
  PLMap p = f.space.kind == TargetKind::space3 ? project_xy(f) : f;
  detail::SvgCanvas canvas;
  BBox2 box;
  for (int v = 0; v < p.mesh.vertex_count(); v++) box.expand(p.image2(v));
  canvas.begin(box);
  std::vector<char> flagged(p.mesh.triangle_count(), 0);
  for (auto [s, t] : report.overlap_pairs) { flagged[s] = 1; flagged[t] = 1; }
  for (int t = 0; t < p.mesh.triangle_count(); t++) {
    const auto& tri = p.mesh.triangles[t];
    canvas.polygon({p.image2(tri[0]), p.image2(tri[1]), p.image2(tri[2])},
                   flagged[t] ? "#e41a1c" : "none", flagged[t] ? "#99000d" : "#555555");
  }
  return canvas.finish();
}

}  // namespace saddlekit::io
