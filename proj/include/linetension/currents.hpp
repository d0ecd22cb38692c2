#pragma once

#include "linetension/geometry.hpp"
#include "linetension/quadrature.hpp"

#include <fstream>
#include <numeric>
#include <unordered_map>

namespace linetension {

/// Oriented straight segment carrying a multiplicity vector in R^N.
/// Reversing the orientation and negating the multiplicity gives an
/// equivalent segment; `canonical()` normalizes to the lexicographically
/// smaller endpoint first.
struct Segment {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  Burgers burgers;

  double length() const { return (b - a).norm(); }
  Vec3 tangent() const { return (b - a).normalized(); }

  Segment canonical() const {
    if (lex_less(b, a)) return {b, a, -burgers};
    return *this;
  }
};

/// Matrix-valued measure mu = theta (x) tau H^1 on finitely many segments.
class PolyhedralCurrent {
 public:
  explicit PolyhedralCurrent(int burgers_dim) : n_(burgers_dim) {
    if (burgers_dim < 1) throw std::invalid_argument("PolyhedralCurrent: burgers dim >= 1");
  }

  int burgers_dim() const { return n_; }
  const std::vector<Segment>& segments() const { return segs_; }
  std::size_t size() const { return segs_.size(); }
  bool empty() const { return segs_.empty(); }

  void add(const Vec3& a, const Vec3& b, const Burgers& burgers) {
    if (burgers.size() != n_) throw std::invalid_argument("segment burgers dimension mismatch");
    if (!((b - a).norm() > 0)) throw std::invalid_argument("segment endpoints coincide");
    if (burgers.norm() == 0.0) return;
    segs_.push_back({a, b, burgers});
  }
  void add(const Segment& s) { add(s.a, s.b, s.burgers); }
  void append(const PolyhedralCurrent& other) {
    if (other.n_ != n_) throw std::invalid_argument("append: burgers dimension mismatch");
    segs_.insert(segs_.end(), other.segs_.begin(), other.segs_.end());
  }

  PolyhedralCurrent canonicalized() const {
    PolyhedralCurrent c(n_);
    c.segs_.reserve(segs_.size());
    for (const auto& s : segs_) c.segs_.push_back(s.canonical());
    return c;
  }

  double max_burgers_norm() const {
    double m = 0;
    for (const auto& s : segs_) m = std::max(m, s.burgers.norm());
    return m;
  }

  AABox bounding_box() const {
    if (segs_.empty()) return AABox{};
    AABox b{segs_[0].a, segs_[0].a};
    for (const auto& s : segs_) {
      b.absorb(s.a);
      b.absorb(s.b);
    }
    return b;
  }

  /// Splits collinear overlapping segments at all mutual endpoints and sums
  /// the multiplicities, so distinct supports become H^1-a.e. disjoint.
  PolyhedralCurrent flattened() const;

  /// True when every multiplicity is in sigma Z^N up to `tol` (relative to
  /// sigma).
  bool is_lattice(double sigma, double tol = 1e-9) const {
    for (const auto& s : segs_)
      for (int i = 0; i < n_; ++i) {
        const double q = s.burgers[i] / sigma;
        if (std::abs(q - std::round(q)) > tol) return false;
      }
    return true;
  }

  /// Multiplicity class tag set by builders when known (e.g. rounding).
  std::optional<double> lattice_sigma;

 private:
  std::vector<Segment> segs_;
  int n_;
};

// ---------------------------------------------------------------------------
// Boundary ledger (the distributional divergence of the current)
// ---------------------------------------------------------------------------

/// Node-indexed vector masses of Div mu. A segment from a to b with
/// multiplicity theta carries +theta at a and -theta at b, so closed loops
/// leave an empty ledger and <mu, grad phi> = -sum_nodes <mass, phi(node)>.
struct BoundaryLedger {
  struct Entry {
    Vec3 pos = Vec3::Zero();
    Burgers mass;
  };
  std::map<NodeKey, Entry> entries;
  double quantum = 0.0;
  int burgers_dim = 0;

  double max_mass_norm() const {
    double m = 0;
    for (const auto& [k, e] : entries) m = std::max(m, e.mass.norm());
    return m;
  }
};

struct LedgerOptions {
  double quantum = 0.0;          // 0 -> 2^-30 times the bounding-box diameter
  double mass_drop_rel = 1e-14;  // entries below this times max |burgers| are dropped
  bool check_ambiguity = true;   // error on nodes closer than the quantum in distinct cells
};

inline BoundaryLedger boundary_ledger(const PolyhedralCurrent& mu, LedgerOptions opt = {}) {
  BoundaryLedger led;
  led.burgers_dim = mu.burgers_dim();
  double quantum = opt.quantum;
  if (quantum <= 0) {
    const double diam = mu.empty() ? 1.0 : std::max(mu.bounding_box().diameter(), 1e-30);
    quantum = std::ldexp(diam, -30);
  }
  led.quantum = quantum;
  auto deposit = [&](const Vec3& p, const Burgers& m) {
    const NodeKey k = quantize_key(p, quantum);
    auto it = led.entries.find(k);
    if (it == led.entries.end()) {
      led.entries.emplace(k, BoundaryLedger::Entry{p, m});
    } else {
      it->second.mass += m;
    }
  };
  for (const auto& s : mu.segments()) {
    deposit(s.a, s.burgers);
    deposit(s.b, Burgers(-s.burgers));
  }
  if (opt.check_ambiguity) {
    for (const auto& [k, e] : led.entries) {
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dz = -1; dz <= 1; ++dz) {
            if (!dx && !dy && !dz) continue;
            NodeKey nk{{k.c[0] + dx, k.c[1] + dy, k.c[2] + dz}};
            auto it = led.entries.find(nk);
            if (it != led.entries.end() && (it->second.pos - e.pos).norm() < quantum)
              throw std::runtime_error("ambiguous node merge near (" + format_g17(e.pos.x()) +
                                       ", " + format_g17(e.pos.y()) + ", " +
                                       format_g17(e.pos.z()) + ")");
          }
    }
  }
  if (opt.mass_drop_rel > 0) {
    const double drop = opt.mass_drop_rel * mu.max_burgers_norm();
    std::erase_if(led.entries, [&](const auto& kv) { return kv.second.mass.norm() <= drop; });
  }
  return led;
}

struct DivergenceReport {
  bool divergence_free = true;
  double worst_mass_norm = 0.0;
  Vec3 worst_node = Vec3::Zero();
  std::size_t offending_nodes = 0;
};

/// Checks |Div mu| <= tol at every ledger node strictly inside the open box;
/// nodes on (or outside) the boundary are exempt.
inline DivergenceReport check_divergence_free(const PolyhedralCurrent& mu, const AABox& omega,
                                              double tol, double boundary_margin = -1.0) {
  LedgerOptions opt;
  opt.mass_drop_rel = 0.0;
  const BoundaryLedger led = boundary_ledger(mu, opt);
  if (boundary_margin < 0) boundary_margin = 1e-9 * std::max(omega.diameter(), 1e-30);
  DivergenceReport rep;
  for (const auto& [k, e] : led.entries) {
    if (omega.interior_margin(e.pos) <= boundary_margin) continue;
    const double m = e.mass.norm();
    if (m > tol) {
      rep.divergence_free = false;
      ++rep.offending_nodes;
      if (m > rep.worst_mass_norm) {
        rep.worst_mass_norm = m;
        rep.worst_node = e.pos;
      }
    } else {
      rep.worst_mass_norm = std::max(rep.worst_mass_norm, m);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Pairings and mass
// ---------------------------------------------------------------------------

/// <mu, grad phi> for phi : R^3 -> R^N. The segment multiplicities are
/// constant, so the line integral reduces to endpoint evaluations; this is
/// exact, no quadrature.
template <class PhiFn>
double pair_with_gradient(const PolyhedralCurrent& mu, PhiFn&& phi) {
  double s = 0;
  for (const auto& seg : mu.segments()) {
    const Eigen::VectorXd va = phi(seg.a);
    const Eigen::VectorXd vb = phi(seg.b);
    s += seg.burgers.dot(vb - va);
  }
  return s;
}

/// <mu, phi> for a continuous matrix field phi : R^3 -> R^{N x 3}, by
/// Gauss-Legendre quadrature of order q on each segment (exact for polynomial
/// phi of degree <= 2q-1). An optional region restricts the integration.
template <class PhiFn>
double pair_with_matrix_field(const PolyhedralCurrent& mu, PhiFn&& phi, int q,
                              const Region& region = Region::all()) {
  if (q < 1) throw std::invalid_argument("pair_with_matrix_field: quadrature order >= 1");
  double s = 0;
  for (const auto& seg : mu.segments()) {
    const auto iv = region.clip_interval(seg.a, seg.b);
    if (!iv) continue;
    const Vec3 a = seg.a + iv->first * (seg.b - seg.a);
    const Vec3 b = seg.a + iv->second * (seg.b - seg.a);
    const Vec3 tau = seg.tangent();
    s += integrate_segment(a, b, q, [&](const Vec3& x) -> double {
      const Eigen::MatrixXd m = phi(x);
      return seg.burgers.dot(m * tau);
    });
  }
  return s;
}

inline double total_variation(const PolyhedralCurrent& mu) {
  double s = 0;
  for (const auto& seg : mu.segments()) s += seg.burgers.norm() * seg.length();
  return s;
}

inline double total_variation_on(const PolyhedralCurrent& mu, const AABox& box) {
  double s = 0;
  for (const auto& seg : mu.segments())
    s += seg.burgers.norm() * segment_box_length(seg.a, seg.b, box);
  return s;
}

inline double total_variation_on(const PolyhedralCurrent& mu, const Region& region) {
  double s = 0;
  for (const auto& seg : mu.segments()) s += seg.burgers.norm() * region.clip_length(seg.a, seg.b);
  return s;
}

// ---------------------------------------------------------------------------
// Flatten: canonical splitting of collinear overlaps
// ---------------------------------------------------------------------------

inline PolyhedralCurrent PolyhedralCurrent::flattened() const {
  struct LineKey {
    std::array<std::int64_t, 6> v;
    bool operator<(const LineKey& o) const { return v < o.v; }
  };
  PolyhedralCurrent out(n_);
  if (segs_.empty()) return out;

  const double scale = std::max(bounding_box().diameter(), 1e-30);
  const double dir_q = 1e-12;
  const double pos_q = 1e-12 * scale;
  const double len_tol = 1e-13 * scale;

  struct Item {
    double t0, t1;
    Segment seg;
  };
  std::map<LineKey, std::pair<std::pair<Vec3, Vec3>, std::vector<Item>>> groups;

  for (const auto& raw : segs_) {
    Segment s = raw.canonical();
    Vec3 d = s.tangent();
    // canonical() already makes d lexicographically positive
    const Vec3 anchor = s.a - s.a.dot(d) * d;
    LineKey key{{std::llround(d.x() / dir_q), std::llround(d.y() / dir_q),
                 std::llround(d.z() / dir_q), std::llround(anchor.x() / pos_q),
                 std::llround(anchor.y() / pos_q), std::llround(anchor.z() / pos_q)}};
    auto& g = groups[key];
    if (g.second.empty()) g.first = {anchor, d};
    const double t0 = (s.a - g.first.first).dot(g.first.second);
    const double t1 = (s.b - g.first.first).dot(g.first.second);
    g.second.push_back({t0, t1, std::move(s)});
  }

  for (auto& [key, g] : groups) {
    const auto& [anchor, d] = g.first;
    auto& items = g.second;
    if (items.size() == 1) {
      out.add(items[0].seg);  // untouched segments keep their exact endpoints
      continue;
    }
    std::vector<double> cuts;
    cuts.reserve(items.size() * 2);
    for (const auto& it : items) {
      cuts.push_back(it.t0);
      cuts.push_back(it.t1);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [&](double a, double b) { return std::abs(a - b) <= len_tol; }),
               cuts.end());
    const double drop = 1e-14 * max_burgers_norm();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double m0 = cuts[i], m1 = cuts[i + 1];
      const double mid = 0.5 * (m0 + m1);
      Burgers total = Burgers::Zero(n_);
      for (const auto& it : items)
        if (it.t0 <= mid && mid <= it.t1) total += it.seg.burgers;
      if (total.norm() > drop && m1 - m0 > len_tol)
        out.add(anchor + m0 * d, anchor + m1 * d, total);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loop decomposition and multiplicity rounding
// ---------------------------------------------------------------------------

/// Closed polyhedral loop with constant multiplicity. Vertices are implicitly
/// closed (last connects back to first).
struct Loop {
  std::vector<Vec3> nodes;
  Burgers burgers;

  double length() const {
    double s = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      s += (nodes[(i + 1) % nodes.size()] - nodes[i]).norm();
    return s;
  }
  double length_in(const Region& region) const {
    double s = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      s += region.clip_length(nodes[i], nodes[(i + 1) % nodes.size()]);
    return s;
  }
  void append_to(PolyhedralCurrent& mu) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Vec3& a = nodes[i];
      const Vec3& b = nodes[(i + 1) % nodes.size()];
      if ((b - a).norm() > 0 && burgers.norm() > 0) mu.add(a, b, burgers);
    }
  }
};

inline PolyhedralCurrent loops_to_current(const std::vector<Loop>& loops, int burgers_dim) {
  PolyhedralCurrent mu(burgers_dim);
  for (const auto& l : loops) l.append_to(mu);
  return mu;
}

namespace detail {

struct FlowEdge {
  int u = 0, v = 0;
  double flow = 0.0;  // positive: traversable u -> v
};

/// Peels a balanced scalar flow into cycles of constant weight. Walks follow
/// positive residual flow with lexicographic next-edge tie-breaking and resume
/// from the junction after each extraction, so the total work stays near
/// linear in the number of edges.
inline std::vector<std::pair<std::vector<int>, double>> peel_cycles(
    int n_nodes, std::vector<FlowEdge> edges, const std::vector<Vec3>& pos, double tol) {
  std::vector<std::vector<int>> adj(n_nodes);  // edge ids incident to node
  for (int e = 0; e < int(edges.size()); ++e) {
    adj[edges[e].u].push_back(e);
    adj[edges[e].v].push_back(e);
  }
  // lexicographic next-edge tie-breaking: order by far endpoint, then edge id
  for (int u = 0; u < n_nodes; ++u)
    std::sort(adj[u].begin(), adj[u].end(), [&](int e1, int e2) {
      const int w1 = edges[e1].u == u ? edges[e1].v : edges[e1].u;
      const int w2 = edges[e2].u == u ? edges[e2].v : edges[e2].u;
      if (w1 != w2) return lex_less(pos[w1], pos[w2]);
      return e1 < e2;
    });
  std::vector<std::size_t> cursor(n_nodes, 0);

  auto next_edge = [&](int u) -> int {
    auto& lst = adj[u];
    while (cursor[u] < lst.size()) {
      const int e = lst[cursor[u]];
      const auto& E = edges[e];
      if (E.u == u && E.flow > tol) return e;
      if (E.v == u && E.flow < -tol) return e;
      ++cursor[u];
    }
    return -1;
  };

  std::vector<std::pair<std::vector<int>, double>> cycles;
  std::vector<int> path_nodes;
  std::vector<int> path_edges;
  std::unordered_map<int, int> on_path;  // node -> index in path_nodes

  auto order_nodes = [&]() {
    std::vector<int> ids(n_nodes);
    std::iota(ids.begin(), ids.end(), 0);
    std::sort(ids.begin(), ids.end(), [&](int a, int b) { return lex_less(pos[a], pos[b]); });
    return ids;
  };
  const std::vector<int> start_order = order_nodes();

  for (int start : start_order) {
    if (next_edge(start) < 0) continue;
    path_nodes = {start};
    path_edges.clear();
    on_path.clear();
    on_path[start] = 0;
    while (!path_nodes.empty()) {
      const int u = path_nodes.back();
      const int e = next_edge(u);
      if (e < 0) {
        if (path_edges.empty()) break;
        throw std::runtime_error("decompose_into_loops: flow imbalance at node (" +
                                 format_g17(pos[u].x()) + ", " + format_g17(pos[u].y()) + ", " +
                                 format_g17(pos[u].z()) + ")");
      }
      const auto& E = edges[e];
      const int w = (E.u == u) ? E.v : E.u;
      auto hit = on_path.find(w);
      if (hit == on_path.end()) {
        on_path[w] = int(path_nodes.size());
        path_nodes.push_back(w);
        path_edges.push_back(e);
        continue;
      }
      // found a cycle: path_nodes[hit..end] -> w
      const int s = hit->second;
      std::vector<int> cyc_edges(path_edges.begin() + s, path_edges.end());
      cyc_edges.push_back(e);
      double m = std::numeric_limits<double>::max();
      for (std::size_t i = 0; i < cyc_edges.size(); ++i) {
        const int ce = cyc_edges[i];
        m = std::min(m, std::abs(edges[ce].flow));
      }
      std::vector<int> cyc_nodes(path_nodes.begin() + s, path_nodes.end());
      for (std::size_t i = 0; i < cyc_edges.size(); ++i) {
        const int ce = cyc_edges[i];
        const int from = cyc_nodes[i];
        edges[ce].flow -= (edges[ce].u == from) ? m : -m;
      }
      cycles.emplace_back(std::move(cyc_nodes), m);
      // resume from the junction node
      for (std::size_t i = s + 1; i < path_nodes.size(); ++i) on_path.erase(path_nodes[i]);
      path_nodes.resize(s + 1);
      path_edges.resize(s);
    }
  }
  for (const auto& E : edges)
    if (std::abs(E.flow) > tol)
      throw std::runtime_error("decompose_into_loops: residual flow after peeling");
  return cycles;
}

/// Best rational approximation p/q with q <= qmax via continued fractions.
inline bool rationalize(double x, std::int64_t qmax, double tol, std::int64_t& p,
                        std::int64_t& q) {
  double v = x;
  std::int64_t p0 = 1, q0 = 0, p1 = std::int64_t(std::floor(v)), q1 = 1;
  v -= std::floor(v);
  for (int it = 0; it < 64; ++it) {
    if (std::abs(x - double(p1) / double(q1)) <= tol) {
      p = p1;
      q = q1;
      return true;
    }
    if (v == 0) break;
    v = 1.0 / v;
    const double fl = std::floor(v);
    if (fl > 9e17) break;
    const std::int64_t a = std::int64_t(fl);
    v -= fl;
    const std::int64_t p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > qmax || q2 <= 0) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
  }
  if (std::abs(x - double(p1) / double(q1)) <= tol) {
    p = p1;
    q = q1;
    return true;
  }
  return false;
}

inline std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  a = std::abs(a);
  b = std::abs(b);
  while (b) {
    a %= b;
    std::swap(a, b);
  }
  return a;
}

/// Hermite-style integer row reduction; returns basis rows of the Z-span.
inline std::vector<std::vector<std::int64_t>> integer_row_basis(
    std::vector<std::vector<std::int64_t>> rows) {
  if (rows.empty()) return {};
  const std::size_t m = rows[0].size();
  std::vector<std::vector<std::int64_t>> basis;
  for (std::size_t col = 0; col < m; ++col) {
    // reduce all rows against each other on this column by Euclid
    while (true) {
      int best = -1;
      for (int r = 0; r < int(rows.size()); ++r)
        if (rows[r][col] != 0 && (best < 0 || std::abs(rows[r][col]) < std::abs(rows[best][col])))
          best = r;
      if (best < 0) break;
      bool others = false;
      for (int r = 0; r < int(rows.size()); ++r) {
        if (r == best || rows[r][col] == 0) continue;
        others = true;
        const std::int64_t f = rows[r][col] / rows[best][col];
        for (std::size_t cc = 0; cc < m; ++cc) rows[r][cc] -= f * rows[best][cc];
      }
      if (!others) {
        // pivot row isolated; move it to the basis
        basis.push_back(rows[best]);
        rows.erase(rows.begin() + best);
        break;
      }
    }
  }
  return basis;
}

}  // namespace detail

struct DecomposeOptions {
  double quantum = 0.0;          // node merge quantum; 0 -> 2^-30 * diameter
  double divergence_tol = 0.0;   // 0 -> 1e-9 * max |burgers|
  std::int64_t qmax = 1 << 14;   // denominator bound for the rational lattice
  double rational_tol = 1e-9;
  bool allow_component_fallback = true;  // peel per coordinate when incommensurable
};

/// Decomposes a divergence-free polyhedral current into closed loops with
/// constant multiplicity. The primary route expresses all multiplicities on a
/// common rational lattice and peels integer edge-flows per lattice direction;
/// inputs whose multiplicities are not commensurable fall back to
/// per-coordinate real flows (one loop family per standard basis direction),
/// which still re-sums to the input exactly.
inline std::vector<Loop> decompose_into_loops(const PolyhedralCurrent& mu_in,
                                              DecomposeOptions opt = {}) {
  const int N = mu_in.burgers_dim();
  PolyhedralCurrent mu = mu_in.flattened();
  std::vector<Loop> loops;
  if (mu.empty()) return loops;

  const double scale = mu.max_burgers_norm();
  const double div_tol = opt.divergence_tol > 0 ? opt.divergence_tol : 1e-9 * scale;
  double quantum = opt.quantum;
  if (quantum <= 0) quantum = std::ldexp(std::max(mu.bounding_box().diameter(), 1e-30), -30);

  // node table
  std::map<NodeKey, int> node_id;
  std::vector<Vec3> pos;
  auto intern = [&](const Vec3& p) {
    const NodeKey k = quantize_key(p, quantum);
    auto it = node_id.find(k);
    if (it != node_id.end()) return it->second;
    node_id.emplace(k, int(pos.size()));
    pos.push_back(p);
    return int(pos.size()) - 1;
  };
  struct GEdge {
    int u, v;
    Burgers b;
  };
  std::vector<GEdge> gedges;
  gedges.reserve(mu.size());
  for (const auto& s : mu.segments()) {
    const int u = intern(s.a), v = intern(s.b);
    if (u == v) continue;  // degenerate after quantization
    gedges.push_back({u, v, s.burgers});
  }
  {
    std::vector<Burgers> mass(pos.size(), Burgers::Zero(N));
    for (const auto& e : gedges) {
      mass[e.u] += e.b;
      mass[e.v] -= e.b;
    }
    for (std::size_t i = 0; i < mass.size(); ++i)
      if (mass[i].norm() > div_tol)
        throw std::runtime_error("decompose_into_loops: input not divergence free at node (" +
                                 format_g17(pos[i].x()) + ", " + format_g17(pos[i].y()) + ", " +
                                 format_g17(pos[i].z()) + "), |mass| = " +
                                 format_g17(mass[i].norm()));
  }

  // ---- primary route: common rational lattice --------------------------
  auto try_lattice = [&]() -> bool {
    // orthonormal basis of the burgers span
    std::vector<Eigen::VectorXd> basis;
    for (const auto& e : gedges) {
      Eigen::VectorXd r = e.b;
      for (const auto& q : basis) r -= q.dot(e.b) * q;
      if (r.norm() > 1e-10 * scale) basis.push_back(r.normalized());
    }
    if (basis.empty()) return false;
    const int m = int(basis.size());
    std::vector<Eigen::VectorXd> coords(gedges.size(), Eigen::VectorXd::Zero(m));
    double cmax = 0;
    for (std::size_t i = 0; i < gedges.size(); ++i) {
      for (int r = 0; r < m; ++r) coords[i][r] = basis[r].dot(gedges[i].b);
      Eigen::VectorXd rec = Eigen::VectorXd::Zero(N);
      for (int r = 0; r < m; ++r) rec += coords[i][r] * basis[r];
      if ((rec - gedges[i].b).norm() > 1e-9 * scale) return false;
      cmax = std::max(cmax, coords[i].lpNorm<Eigen::Infinity>());
    }
    // rationalize all normalized coordinates on a common denominator
    std::int64_t D = 1;
    for (const auto& c : coords)
      for (int r = 0; r < m; ++r) {
        const double v = c[r] / cmax;
        std::int64_t p, q;
        if (!detail::rationalize(v, opt.qmax, opt.rational_tol, p, q)) return false;
        const std::int64_t g = detail::gcd64(D, q);
        if (D > (std::int64_t(1) << 40) / std::max<std::int64_t>(1, q / g)) return false;
        D = D / g * q;
      }
    std::vector<std::vector<std::int64_t>> ivecs(gedges.size(), std::vector<std::int64_t>(m, 0));
    for (std::size_t i = 0; i < gedges.size(); ++i)
      for (int r = 0; r < m; ++r) {
        const double y = coords[i][r] / cmax * double(D);
        const std::int64_t yi = std::llround(y);
        if (std::abs(y - double(yi)) > 1e-5) return false;
        ivecs[i][r] = yi;
      }
    auto H = detail::integer_row_basis(ivecs);
    if (H.empty()) return false;
    // integer coefficients of each edge vector in the basis H (H rows are in
    // echelon form after the reduction; solve by elimination on pivots)
    std::vector<int> pivot_col(H.size(), -1);
    for (std::size_t r = 0; r < H.size(); ++r) {
      for (int c = 0; c < m; ++c)
        if (H[r][c] != 0) {
          pivot_col[r] = c;
          break;
        }
      if (pivot_col[r] < 0) return false;
    }
    // order rows by pivot column
    std::vector<int> row_order(H.size());
    std::iota(row_order.begin(), row_order.end(), 0);
    std::sort(row_order.begin(), row_order.end(),
              [&](int a, int b) { return pivot_col[a] < pivot_col[b]; });
    std::vector<std::vector<double>> flows(H.size(), std::vector<double>(gedges.size(), 0.0));
    for (std::size_t i = 0; i < gedges.size(); ++i) {
      std::vector<std::int64_t> y = ivecs[i];
      for (int rr : row_order) {
        const int pc = pivot_col[rr];
        if (y[pc] % H[rr][pc] != 0) return false;
        const std::int64_t coef = y[pc] / H[rr][pc];
        for (int c = 0; c < m; ++c) y[c] -= coef * H[rr][c];
        flows[rr][i] = double(coef);
      }
      for (int c = 0; c < m; ++c)
        if (y[c] != 0) return false;
    }
    // lattice generator vectors in R^N
    std::vector<Eigen::VectorXd> beta(H.size(), Eigen::VectorXd::Zero(N));
    for (std::size_t r = 0; r < H.size(); ++r)
      for (int c = 0; c < m; ++c) beta[r] += (double(H[r][c]) * cmax / double(D)) * basis[c];

    for (std::size_t r = 0; r < H.size(); ++r) {
      std::vector<detail::FlowEdge> fe;
      fe.reserve(gedges.size());
      for (std::size_t i = 0; i < gedges.size(); ++i)
        fe.push_back({gedges[i].u, gedges[i].v, flows[r][i]});
      auto cycles = detail::peel_cycles(int(pos.size()), std::move(fe), pos, 0.25);
      for (auto& [cyc, mult] : cycles) {
        Loop l;
        l.nodes.reserve(cyc.size());
        for (int id : cyc) l.nodes.push_back(pos[id]);
        l.burgers = mult * beta[r];
        loops.push_back(std::move(l));
      }
    }
    return true;
  };

  bool ok = try_lattice();
  if (!ok) {
    if (!opt.allow_component_fallback)
      throw std::runtime_error(
          "decompose_into_loops: multiplicities are not commensurable over a rational lattice");
    loops.clear();
    for (int i = 0; i < N; ++i) {
      std::vector<detail::FlowEdge> fe;
      fe.reserve(gedges.size());
      bool any = false;
      for (const auto& e : gedges) {
        fe.push_back({e.u, e.v, e.b[i]});
        any = any || std::abs(e.b[i]) > 0;
      }
      if (!any) continue;
      auto cycles = detail::peel_cycles(int(pos.size()), std::move(fe), pos, 1e-12 * scale);
      for (auto& [cyc, mult] : cycles) {
        Loop l;
        l.nodes.reserve(cyc.size());
        for (int id : cyc) l.nodes.push_back(pos[id]);
        l.burgers = Burgers::Zero(N);
        l.burgers[i] = mult;
        loops.push_back(std::move(l));
      }
    }
  }
  return loops;
}

/// Componentwise floor rounding of loop multiplicities onto sigma Z^N.
/// Rounding is applied per loop before re-summation; each loop stays closed
/// with constant multiplicity, so the result is divergence free.
inline std::vector<Loop> round_multiplicities(const std::vector<Loop>& loops, double sigma) {
  if (!(sigma > 0)) throw std::invalid_argument("round_multiplicities: sigma must be positive");
  std::vector<Loop> out;
  out.reserve(loops.size());
  for (const auto& l : loops) {
    Loop r = l;
    for (int i = 0; i < r.burgers.size(); ++i)
      r.burgers[i] = sigma * std::floor(l.burgers[i] / sigma);
    if (r.burgers.norm() > 0) out.push_back(std::move(r));
  }
  return out;
}

inline PolyhedralCurrent rounded_current(const std::vector<Loop>& loops, double sigma,
                                         int burgers_dim) {
  PolyhedralCurrent mu = loops_to_current(round_multiplicities(loops, sigma), burgers_dim);
  mu.lattice_sigma = sigma;
  return mu;
}

// ---------------------------------------------------------------------------
// Export / import
// ---------------------------------------------------------------------------

/// CSV schema x0,y0,z0,x1,y1,z1,b1..bN; %.17g makes the round trip bit exact.
inline void export_csv(const PolyhedralCurrent& mu, std::ostream& out) {
  out << "x0,y0,z0,x1,y1,z1";
  for (int i = 1; i <= mu.burgers_dim(); ++i) out << ",b" << i;
  out << "\n";
  for (const auto& s : mu.segments()) {
    out << format_g17(s.a.x()) << ',' << format_g17(s.a.y()) << ',' << format_g17(s.a.z()) << ','
        << format_g17(s.b.x()) << ',' << format_g17(s.b.y()) << ',' << format_g17(s.b.z());
    for (int i = 0; i < mu.burgers_dim(); ++i) out << ',' << format_g17(s.burgers[i]);
    out << "\n";
  }
}

inline void export_csv(const PolyhedralCurrent& mu, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  export_csv(mu, f);
}

inline PolyhedralCurrent import_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("import_csv: empty stream");
  const int cols = int(std::count(header.begin(), header.end(), ',')) + 1;
  if (cols < 7) throw std::runtime_error("import_csv: expected at least 7 columns");
  const int N = cols - 6;
  PolyhedralCurrent mu(N);
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<double> vals;
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
    if (int(vals.size()) != cols)
      throw std::runtime_error("import_csv: bad column count on line " + std::to_string(lineno));
    Burgers b(N);
    for (int i = 0; i < N; ++i) b[i] = vals[6 + i];
    mu.add(Vec3(vals[0], vals[1], vals[2]), Vec3(vals[3], vals[4], vals[5]), b);
  }
  return mu;
}

inline PolyhedralCurrent import_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return import_csv(f);
}

/// OBJ polylines, one object per loop, multiplicity encoded in the name.
inline void export_obj(const std::vector<Loop>& loops, std::ostream& out) {
  std::size_t base = 1;
  for (std::size_t li = 0; li < loops.size(); ++li) {
    const auto& l = loops[li];
    out << "o loop_" << li << "_b";
    for (int i = 0; i < l.burgers.size(); ++i) out << '_' << format_g17(l.burgers[i]);
    out << "\n";
    for (const auto& p : l.nodes)
      out << "v " << format_g17(p.x()) << ' ' << format_g17(p.y()) << ' ' << format_g17(p.z())
          << "\n";
    out << "l";
    for (std::size_t i = 0; i < l.nodes.size(); ++i) out << ' ' << (base + i);
    out << ' ' << base << "\n";
    base += l.nodes.size();
  }
}

inline void export_obj(const std::vector<Loop>& loops, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  export_obj(loops, f);
}

}  // namespace linetension
