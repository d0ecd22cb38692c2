#pragma once

#include "linetension/core.hpp"

#include <fstream>
#include <sstream>

namespace linetension {

/// Oriented non-degenerate tetrahedron. The constructor fixes the orientation
/// so the signed volume is strictly positive.
class Tetra {
 public:
  explicit Tetra(std::array<Vec3, 4> vertices) : v_(vertices) {
    double sv = signed_volume_of(v_);
    const double d = diameter_of(v_);
    if (!(d > 0) || std::abs(sv) <= 1e-14 * d * d * d)
      throw std::invalid_argument("Tetra: degenerate vertex set");
    if (sv < 0) std::swap(v_[2], v_[3]);
  }

  const std::array<Vec3, 4>& vertices() const { return v_; }
  const Vec3& vertex(int i) const { return v_.at(i); }

  Vec3 barycenter() const { return 0.25 * (v_[0] + v_[1] + v_[2] + v_[3]); }
  double diameter() const { return diameter_of(v_); }
  double signed_volume() const { return signed_volume_of(v_); }
  double volume() const { return std::abs(signed_volume()); }

  double surface_area() const {
    double s = 0;
    for (int f = 0; f < 4; ++f) {
      auto [a, b, c] = face_vertices(f);
      s += 0.5 * (b - a).cross(c - a).norm();
    }
    return s;
  }
  double inradius() const { return 3.0 * volume() / surface_area(); }

  /// Vertices of face f (the face opposite vertex f), outward-ordered.
  std::array<Vec3, 3> face_vertices(int f) const {
    static constexpr int idx[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    return {v_[idx[f][0]], v_[idx[f][1]], v_[idx[f][2]]};
  }
  static constexpr std::array<std::array<int, 3>, 4> face_indices() {
    return {{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};
  }

  Vec3 outward_normal(int f) const {
    auto [a, b, c] = face_vertices(f);
    return (b - a).cross(c - a).normalized();
  }

  bool contains(const Vec3& p, double tol = 0.0) const {
    for (int f = 0; f < 4; ++f) {
      auto [a, b, c] = face_vertices(f);
      const Vec3 n = (b - a).cross(c - a).normalized();
      if ((p - a).dot(n) > tol) return false;
    }
    return true;
  }

  AABox bounding_box() const {
    AABox b{v_[0], v_[0]};
    for (const auto& p : v_) b.absorb(p);
    return b;
  }

  /// Similar tetrahedron scaled by factor about the barycenter.
  Tetra scaled_about_barycenter(double factor) const {
    if (!(factor > 0)) throw std::invalid_argument("Tetra: scale factor must be positive");
    const Vec3 g = barycenter();
    std::array<Vec3, 4> w;
    for (int i = 0; i < 4; ++i) w[i] = g + factor * (v_[i] - g);
    return Tetra(w);
  }

 private:
  static double signed_volume_of(const std::array<Vec3, 4>& v) {
    return (v[1] - v[0]).cross(v[2] - v[0]).dot(v[3] - v[0]) / 6.0;
  }
  static double diameter_of(const std::array<Vec3, 4>& v) {
    double d = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) d = std::max(d, (v[i] - v[j]).norm());
    return d;
  }

  std::array<Vec3, 4> v_;
};

/// One closed triangle of a boundary subdivision, with the data the lattice
/// construction consumes: barycenter, outer unit normal, area.
struct SubTriangle {
  Vec3 a, b, c;
  Vec3 barycenter;
  Vec3 outward_normal;
  double area = 0.0;
  int face = -1;  // parent face 0..3

  double diameter() const {
    return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
  }
};

namespace detail {

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

inline SubTriangle make_subtriangle(const Vec3& a, const Vec3& b, const Vec3& c,
                                    const Vec3& outward, int face) {
  SubTriangle t;
  t.a = a;
  t.b = b;
  t.c = c;
  t.barycenter = (a + b + c) / 3.0;
  t.outward_normal = outward;
  t.area = triangle_area(a, b, c);
  t.face = face;
  return t;
}

}  // namespace detail

/// Subdivision of the boundary of a tetrahedron into 4k^2 congruent closed
/// triangles per face, together with the shrunken copies on the inner
/// tetrahedron (1 - 1/k^2) T used by the lattice construction.
///
/// Shared faces of adjacent tetrahedra are subdivided from the lexicographically
/// sorted face vertices, so two tetrahedra sharing a face produce bit-identical
/// triangles and barycenters on it.
struct FaceGrid {
  Tetra parent;
  int k = 0;
  std::vector<SubTriangle> outer;  // the 4k^2 triangles tiling the boundary
  std::vector<SubTriangle> inner;  // shrunken triangles on the inner tetra (empty until shrink)
  double shrink_factor = 1.0;      // 1 - 1/k^2 once inner triangles exist

  Tetra inner_tetra() const { return parent.scaled_about_barycenter(shrink_factor); }
};

inline FaceGrid subdivide_boundary(const Tetra& T, int k) {
  if (k < 1) throw std::invalid_argument("subdivide_boundary: k must be >= 1");
  FaceGrid g{T, k, {}, {}, 1.0};
  g.outer.reserve(std::size_t(4) * k * k);
  for (int f = 0; f < 4; ++f) {
    auto fv = T.face_vertices(f);
    const Vec3 outward = T.outward_normal(f);
    // Canonical vertex order: subdivision points depend only on the vertex
    // set, so both tetrahedra incident to a shared face generate the same
    // floating-point triangles.
    std::array<Vec3, 3> s = {fv[0], fv[1], fv[2]};
    std::sort(s.begin(), s.end(), lex_less);
    auto pt = [&](int i, int j) {
      return s[0] + (double(i) / k) * (s[1] - s[0]) + (double(j) / k) * (s[2] - s[0]);
    };
    for (int i = 0; i + 1 <= k; ++i)
      for (int j = 0; i + j + 1 <= k; ++j) {
        g.outer.push_back(detail::make_subtriangle(pt(i, j), pt(i + 1, j), pt(i, j + 1), outward, f));
        if (i + j + 2 <= k)
          g.outer.push_back(
              detail::make_subtriangle(pt(i + 1, j), pt(i + 1, j + 1), pt(i, j + 1), outward, f));
      }
  }
  return g;
}

/// Populates the inner triangles delta(k,h) = (1 - 1/k^2) Delta(k,h), obtained
/// by projecting the boundary subdivision from the barycenter onto the inner
/// tetrahedron. Requires k >= 2 so the scale factor stays positive.
inline FaceGrid shrink_and_project(const Tetra& T, FaceGrid grid) {
  const int k = grid.k;
  if (k < 2) throw std::invalid_argument("shrink_and_project: k must be >= 2");
  const double f = 1.0 - 1.0 / (double(k) * k);
  const Vec3 g = T.barycenter();
  grid.shrink_factor = f;
  grid.inner.clear();
  grid.inner.reserve(grid.outer.size());
  for (const auto& t : grid.outer) {
    SubTriangle s = detail::make_subtriangle(g + f * (t.a - g), g + f * (t.b - g),
                                             g + f * (t.c - g), t.outward_normal, t.face);
    grid.inner.push_back(s);
  }
  return grid;
}

enum class HitKind { point, empty, degenerate };

struct LineTriHit {
  HitKind kind = HitKind::empty;
  Vec3 point = Vec3::Zero();
  double t = 0.0;  // line parameter of the intersection
};

namespace detail {
inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double l2 = d.squaredNorm();
  if (l2 == 0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(d) / l2, 0.0, 1.0);
  return (p - (a + s * d)).norm();
}
}  // namespace detail

/// Classifies the intersection of an infinite line (origin + unit direction)
/// with a closed triangle. `point` is returned only for a transversal hit
/// strictly inside the triangle at distance > eps from the contour;
/// grazing incidences (near-parallel within eps of the plane, or a hit within
/// eps of the contour) are `degenerate` and are meant to be culled upstream.
inline LineTriHit line_triangle_intersection(const Vec3& origin, const Vec3& dir,
                                             const SubTriangle& tri, double eps) {
  constexpr double kAngleTol = 1e-9;
  const Vec3 n = (tri.b - tri.a).cross(tri.c - tri.a);
  const double nn = n.norm();
  if (nn == 0) return {HitKind::degenerate, Vec3::Zero(), 0.0};
  const Vec3 un = n / nn;
  const double denom = dir.dot(un);
  const double s = (tri.a - origin).dot(un);
  if (std::abs(denom) <= kAngleTol) {
    return {std::abs(s) <= eps ? HitKind::degenerate : HitKind::empty, Vec3::Zero(), 0.0};
  }
  const double t = s / denom;
  const Vec3 x = origin + t * dir;
  const double dcont = std::min({detail::point_segment_distance(x, tri.a, tri.b),
                                 detail::point_segment_distance(x, tri.b, tri.c),
                                 detail::point_segment_distance(x, tri.c, tri.a)});
  if (dcont <= eps) return {HitKind::degenerate, x, t};
  bool inside = true;
  for (const auto& [u, w] : {std::pair{tri.a, tri.b}, {tri.b, tri.c}, {tri.c, tri.a}}) {
    const Vec3 edge_in = un.cross(w - u);  // points into the triangle
    if ((x - u).dot(edge_in) < 0) {
      inside = false;
      break;
    }
  }
  if (!inside) return {HitKind::empty, x, t};
  return {HitKind::point, x, t};
}

struct ConformityReport {
  bool conforming = true;
  std::string detail;
  int bad_tet_a = -1, bad_tet_b = -1;
};

/// Conforming tetrahedral triangulation. Tetrahedra must tile the covered
/// region face-to-face: every face is either matched exactly by one other
/// tetrahedron or lies on the outer boundary.
class Triangulation {
 public:
  Triangulation(std::vector<Tetra> tets, std::optional<AABox> domain = std::nullopt)
      : tets_(std::move(tets)) {
    if (tets_.empty()) throw std::invalid_argument("Triangulation: no tetrahedra");
    AABox bb = tets_[0].bounding_box();
    for (const auto& t : tets_) {
      const auto b = t.bounding_box();
      bb.absorb(b.lo);
      bb.absorb(b.hi);
    }
    domain_ = domain.value_or(bb);
    size_ = 0;
    for (const auto& t : tets_) size_ = std::max(size_, t.diameter());
    aspect_ratio_ = std::numeric_limits<double>::max();
    for (const auto& t : tets_) aspect_ratio_ = std::min(aspect_ratio_, t.inradius() / size_);
    build_faces();
  }

  const std::vector<Tetra>& tets() const { return tets_; }
  std::size_t size_count() const { return tets_.size(); }
  double size() const { return size_; }                  // r = max diameter
  double aspect_ratio() const { return aspect_ratio_; }  // C0
  const AABox& domain() const { return domain_; }

  struct Face {
    std::array<NodeKey, 3> key;
    int tet_a = -1, face_a = -1;
    int tet_b = -1, face_b = -1;  // -1 when on the boundary
    Vec3 normal = Vec3::Zero();   // outward from tet_a
    Vec3 rep = Vec3::Zero();      // a point on the face plane
    bool interior() const { return tet_b >= 0; }
  };
  const std::vector<Face>& faces() const { return faces_; }

  /// All face planes as (point, unit normal) pairs, deduplicated; this is the
  /// forbidden family the correction rays must avoid lying inside.
  std::vector<std::pair<Vec3, Vec3>> face_planes() const {
    std::vector<std::pair<Vec3, Vec3>> planes;
    const double q = 1e-9 * std::max(domain_.diameter(), 1e-30);
    std::map<std::array<std::int64_t, 4>, bool> seen;
    for (const auto& f : faces_) {
      Vec3 n = f.normal;
      if (n.x() < 0 || (n.x() == 0 && (n.y() < 0 || (n.y() == 0 && n.z() < 0)))) n = -n;
      const double off = n.dot(f.rep);
      std::array<std::int64_t, 4> key{std::llround(n.x() / 1e-9), std::llround(n.y() / 1e-9),
                                      std::llround(n.z() / 1e-9), std::llround(off / q)};
      if (seen.emplace(key, true).second) planes.emplace_back(f.rep, n);
    }
    return planes;
  }

  const ConformityReport& conformity() const { return conformity_; }
  void require_conforming() const {
    if (!conformity_.conforming)
      throw std::runtime_error("Triangulation: mesh is not conforming: " + conformity_.detail);
  }

 private:
  void build_faces() {
    const double quantum = 1e-12 * std::max(domain_.diameter(), 1e-30);
    std::map<std::array<NodeKey, 3>, std::size_t> index;
    for (int ti = 0; ti < int(tets_.size()); ++ti) {
      const auto& T = tets_[ti];
      for (int f = 0; f < 4; ++f) {
        auto fv = T.face_vertices(f);
        std::array<NodeKey, 3> key{quantize_key(fv[0], quantum), quantize_key(fv[1], quantum),
                                   quantize_key(fv[2], quantum)};
        std::sort(key.begin(), key.end());
        auto it = index.find(key);
        if (it == index.end()) {
          Face face;
          face.key = key;
          face.tet_a = ti;
          face.face_a = f;
          face.normal = T.outward_normal(f);
          face.rep = fv[0];
          index.emplace(key, faces_.size());
          faces_.push_back(face);
        } else {
          Face& face = faces_[it->second];
          if (face.tet_b >= 0) {
            conformity_ = {false, "face shared by more than two tetrahedra", face.tet_a, ti};
            continue;
          }
          face.tet_b = ti;
          face.face_b = f;
          // Outward normals of a shared face must oppose for positively
          // oriented tetrahedra.
          if (face.normal.dot(T.outward_normal(f)) > -0.999)
            conformity_ = {false, "shared face normals are not opposite", face.tet_a, ti};
        }
      }
    }
    if (!conformity_.conforming) return;
    // Vertex-sharing sanity: tets sharing 3 quantized vertices must share a
    // whole face (caught above via the face map); overlapping interiors with
    // few shared vertices are screened by a barycenter containment probe.
    for (std::size_t i = 0; i < tets_.size() && conformity_.conforming; ++i)
      for (std::size_t j = i + 1; j < tets_.size(); ++j) {
        const Vec3 gi = tets_[i].barycenter();
        const Vec3 gj = tets_[j].barycenter();
        const double tol = -1e-12 * size_;
        if (tets_[i].contains(gj, tol) || tets_[j].contains(gi, tol)) {
          conformity_ = {false, "tetrahedron barycenter inside another tetrahedron", int(i), int(j)};
          break;
        }
      }
  }

  std::vector<Tetra> tets_;
  std::vector<Face> faces_;
  AABox domain_;
  double size_ = 0.0;
  double aspect_ratio_ = 0.0;
  ConformityReport conformity_;
};

// ---------------------------------------------------------------------------
// Built-in generators and plain-text mesh IO
// ---------------------------------------------------------------------------

/// Kuhn split of the axis cube [lo, lo+h]^3 into 6 positively oriented
/// tetrahedra; adjacent cubes split this way match face-to-face.
inline void append_kuhn_cube(std::vector<Tetra>& out, const Vec3& lo, double h) {
  static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                      {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& p : perms) {
    std::array<Vec3, 4> v;
    Vec3 x = lo;
    v[0] = x;
    for (int s = 0; s < 3; ++s) {
      x[p[s]] += h;
      v[s + 1] = x;
    }
    out.push_back(Tetra(v));
  }
}

inline Triangulation make_single_tet() {
  return Triangulation({Tetra({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)})});
}

inline Triangulation make_kuhn_cube_mesh(int n) {
  if (n < 1) throw std::invalid_argument("kuhn-subdivision: n must be >= 1");
  std::vector<Tetra> tets;
  const double h = 1.0 / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) append_kuhn_cube(tets, Vec3(i * h, j * h, k * h), h);
  return Triangulation(std::move(tets), AABox{Vec3(0, 0, 0), Vec3(1, 1, 1)});
}

inline Triangulation make_unit_cube_6tet() { return make_kuhn_cube_mesh(1); }

/// One tetrahedron per line: 12 floats (x y z for each of the 4 vertices).
inline Triangulation load_mesh_text(std::istream& in) {
  std::vector<Tetra> tets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::array<double, 12> x{};
    for (auto& v : x)
      if (!(ss >> v))
        throw std::runtime_error("mesh line " + std::to_string(lineno) + ": expected 12 floats");
    tets.push_back(Tetra({Vec3(x[0], x[1], x[2]), Vec3(x[3], x[4], x[5]), Vec3(x[6], x[7], x[8]),
                          Vec3(x[9], x[10], x[11])}));
  }
  if (tets.empty()) throw std::runtime_error("mesh file contains no tetrahedra");
  return Triangulation(std::move(tets));
}

inline Triangulation load_mesh_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open mesh file: " + path);
  return load_mesh_text(f);
}

inline Triangulation make_mesh_generator(const std::string& name, int n = 1) {
  if (name == "single-tet") return make_single_tet();
  if (name == "unit-cube-6tet") return make_unit_cube_6tet();
  if (name == "kuhn-subdivision" || name == "kuhn") return make_kuhn_cube_mesh(n);
  throw std::invalid_argument("unknown mesh generator: " + name);
}

// ---------------------------------------------------------------------------
// Clipping helpers
// ---------------------------------------------------------------------------

/// Length of the part of segment [a,b] inside the box.
inline double segment_box_length(const Vec3& a, const Vec3& b, const AABox& box) {
  const Vec3 d = b - a;
  double t0 = 0.0, t1 = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (a[i] < box.lo[i] || a[i] > box.hi[i]) return 0.0;
      continue;
    }
    double u = (box.lo[i] - a[i]) / d[i];
    double v = (box.hi[i] - a[i]) / d[i];
    if (u > v) std::swap(u, v);
    t0 = std::max(t0, u);
    t1 = std::min(t1, v);
    if (t0 >= t1) return 0.0;
  }
  return (t1 - t0) * d.norm();
}

/// Length of the part of segment [a,b] inside the tetrahedron.
inline double segment_tet_length(const Vec3& a, const Vec3& b, const Tetra& T) {
  const Vec3 d = b - a;
  double t0 = 0.0, t1 = 1.0;
  for (int f = 0; f < 4; ++f) {
    auto [p, q, r] = T.face_vertices(f);
    const Vec3 n = (q - p).cross(r - p);
    const double num = (p - a).dot(n);
    const double den = d.dot(n);
    if (den == 0.0) {
      if (num < 0) return 0.0;  // entirely outside this half space
      continue;
    }
    const double t = num / den;
    if (den > 0)
      t1 = std::min(t1, t);
    else
      t0 = std::max(t0, t);
    if (t0 >= t1) return 0.0;
  }
  return (t1 - t0) * d.norm();
}

namespace detail {

/// Clips a tetrahedron against the half space {x : n.x <= c} and appends the
/// inside part as up to three tetrahedra.
inline void clip_tet_halfspace(const std::array<Vec3, 4>& v, const Vec3& n, double c,
                               std::vector<std::array<Vec3, 4>>& out) {
  std::array<double, 4> d;
  int inside[4], outside[4], ni = 0, no = 0;
  for (int i = 0; i < 4; ++i) {
    d[i] = c - n.dot(v[i]);
    if (d[i] >= 0)
      inside[ni++] = i;
    else
      outside[no++] = i;
  }
  auto cut = [&](int i, int o) {
    const double t = d[i] / (d[i] - d[o]);
    return Vec3(v[i] + t * (v[o] - v[i]));
  };
  if (ni == 4) {
    out.push_back(v);
  } else if (ni == 1) {
    const int i0 = inside[0];
    out.push_back({v[i0], cut(i0, outside[0]), cut(i0, outside[1]), cut(i0, outside[2])});
  } else if (ni == 2) {
    const int a = inside[0], b = inside[1], o0 = outside[0], o1 = outside[1];
    const Vec3 a0 = cut(a, o0), a1 = cut(a, o1), b0 = cut(b, o0), b1 = cut(b, o1);
    // wedge v[a], v[b], a0, a1, b0, b1 as three tetrahedra
    out.push_back({v[a], v[b], a0, a1});
    out.push_back({v[b], a0, a1, b1});
    out.push_back({v[b], a0, b0, b1});
  } else if (ni == 3) {
    const int o = outside[0], a = inside[0], b = inside[1], cidx = inside[2];
    const Vec3 pa = cut(a, o), pb = cut(b, o), pc = cut(cidx, o);
    out.push_back({v[a], v[b], v[cidx], pa});
    out.push_back({v[b], v[cidx], pa, pb});
    out.push_back({v[cidx], pa, pb, pc});
  }
}

}  // namespace detail

/// Evaluation window: intersection of an optional box and an optional open
/// tetrahedron interior. Both absent means all of R^3.
struct Region {
  std::optional<AABox> box;
  std::optional<Tetra> tet;

  static Region all() { return {}; }
  static Region of_box(const AABox& b) { return {b, std::nullopt}; }
  static Region of_tet(const Tetra& t) { return {std::nullopt, t}; }
  static Region box_and_tet(const AABox& b, const Tetra& t) { return {b, t}; }

  /// Parameter interval of [a,b] inside the region, or nullopt when disjoint.
  std::optional<std::pair<double, double>> clip_interval(const Vec3& a, const Vec3& b) const {
    const Vec3 d = b - a;
    double t0 = 0.0, t1 = 1.0;
    if (box) {
      for (int i = 0; i < 3; ++i) {
        if (d[i] == 0.0) {
          if (a[i] < box->lo[i] || a[i] > box->hi[i]) return std::nullopt;
          continue;
        }
        double u = (box->lo[i] - a[i]) / d[i], v = (box->hi[i] - a[i]) / d[i];
        if (u > v) std::swap(u, v);
        t0 = std::max(t0, u);
        t1 = std::min(t1, v);
        if (t0 >= t1) return std::nullopt;
      }
    }
    if (tet) {
      for (int f = 0; f < 4; ++f) {
        auto [p, q, r] = tet->face_vertices(f);
        const Vec3 n = (q - p).cross(r - p);
        const double num = (p - a).dot(n), den = d.dot(n);
        if (den == 0.0) {
          if (num < 0) return std::nullopt;
          continue;
        }
        const double t = num / den;
        if (den > 0)
          t1 = std::min(t1, t);
        else
          t0 = std::max(t0, t);
        if (t0 >= t1) return std::nullopt;
      }
    }
    return std::make_pair(t0, t1);
  }

  /// Length of segment [a,b] inside the region.
  double clip_length(const Vec3& a, const Vec3& b) const {
    const auto iv = clip_interval(a, b);
    return iv ? (iv->second - iv->first) * (b - a).norm() : 0.0;
  }

  bool contains(const Vec3& p) const {
    if (box && !box->contains(p)) return false;
    if (tet && !tet->contains(p)) return false;
    return true;
  }
};

/// Volume of T intersected with the box, via successive half-space clipping.
inline double tet_box_volume(const Tetra& T, const AABox& box) {
  std::vector<std::array<Vec3, 4>> work = {T.vertices()}, next;
  auto clip_all = [&](const Vec3& n, double c) {
    next.clear();
    for (const auto& t : work) detail::clip_tet_halfspace(t, n, c, next);
    work.swap(next);
  };
  for (int i = 0; i < 3; ++i) {
    Vec3 n = Vec3::Zero();
    n[i] = 1;
    clip_all(n, box.hi[i]);
    n[i] = -1;
    clip_all(n, -box.lo[i]);
  }
  double vol = 0;
  for (const auto& t : work)
    vol += std::abs((t[1] - t[0]).cross(t[2] - t[0]).dot(t[3] - t[0])) / 6.0;
  return vol;
}

}  // namespace linetension
