#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace linetension {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Burgers = Eigen::VectorXd;   // multiplicity vector in R^N
using FieldMat = Eigen::MatrixXd;  // N x 3 density matrix

inline constexpr double kPi = 3.14159265358979323846;

/// A nonnegative energy value that may be the +infinity flag.
/// Infinities are never encoded as large floats.
struct EnergyValue {
  double value = 0.0;
  bool finite = true;

  static EnergyValue infinity() { return {0.0, false}; }
  EnergyValue& operator+=(const EnergyValue& o) {
    if (!o.finite) finite = false;
    if (finite) value += o.value;
    return *this;
  }
  EnergyValue& operator+=(double v) {
    if (finite) value += v;
    return *this;
  }
};

inline bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

/// Integer cell key used to merge floating-point node coordinates.
struct NodeKey {
  std::array<std::int64_t, 3> c{};
  friend bool operator<(const NodeKey& a, const NodeKey& b) { return a.c < b.c; }
  friend bool operator==(const NodeKey& a, const NodeKey& b) { return a.c == b.c; }
};

inline NodeKey quantize_key(const Vec3& p, double quantum) {
  if (!(quantum > 0)) throw std::invalid_argument("quantize_key: quantum must be positive");
  NodeKey k;
  for (int i = 0; i < 3; ++i) k.c[i] = static_cast<std::int64_t>(std::llround(p[i] / quantum));
  return k;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (0x632be59bd9b4e019ULL + (b << 1)));
}

/// Uniform double in [0,1) from a counter-based generator.
inline double unit_uniform(std::uint64_t& state) {
  state = splitmix64(state);
  return double(state >> 11) * 0x1.0p-53;
}

/// Least-squares slope of log(y) against log(x). Nonpositive y is rejected.
inline double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_loglog_slope: need two or more samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0))
      throw std::invalid_argument("fit_loglog_slope: samples must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Shortest text that round-trips an IEEE double exactly.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct AABox {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 center() const { return 0.5 * (lo + hi); }
  double diameter() const { return (hi - lo).norm(); }
  double volume() const { return std::max(0.0, (hi - lo).prod()); }
  bool contains(const Vec3& p, double margin = 0.0) const {
    for (int i = 0; i < 3; ++i)
      if (p[i] < lo[i] + margin || p[i] > hi[i] - margin) return false;
    return true;
  }
  /// Distance from p to the boundary of the box, positive inside.
  double interior_margin(const Vec3& p) const {
    double m = std::numeric_limits<double>::max();
    for (int i = 0; i < 3; ++i) m = std::min({m, p[i] - lo[i], hi[i] - p[i]});
    return m;
  }
  AABox inflated(double t) const { return {lo.array() - t, hi.array() + t}; }
  void absorb(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  static AABox of_points(const std::vector<Vec3>& pts) {
    if (pts.empty()) throw std::invalid_argument("AABox::of_points: empty");
    AABox b{pts[0], pts[0]};
    for (const auto& p : pts) b.absorb(p);
    return b;
  }
};

/// Deterministic index-space parallel loop; results must be written by index.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned max_threads = 0) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (max_threads) hw = std::min(hw, max_threads);
  if (hw <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned nt = unsigned(std::min<std::size_t>(hw, n));
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(nt);
  for (unsigned t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace linetension
