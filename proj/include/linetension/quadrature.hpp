#pragma once

#include "linetension/core.hpp"

#include <mutex>

namespace linetension {

/// Gauss-Legendre nodes and weights on (-1,1), exact for degree <= 2q-1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline const GaussRule& gauss_legendre(int q) {
  if (q < 1 || q > 128) throw std::invalid_argument("gauss_legendre: order out of range");
  static std::map<int, GaussRule> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(q);
  if (it != cache.end()) return it->second;

  GaussRule r;
  r.nodes.resize(q);
  r.weights.resize(q);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    // Newton iteration on P_q from the Tricomi initial guess.
    double x = std::cos(kPi * (i + 0.75) / (q + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= q; ++n) {
        const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.weights[i] = w;
    r.nodes[q - 1 - i] = x;
    r.weights[q - 1 - i] = w;
  }
  if (q % 2 == 1) r.nodes[q / 2] = 0.0;
  return cache.emplace(q, std::move(r)).first->second;
}

/// Integral of f along the straight segment [a,b] with a q-point rule.
template <class Fn>
double integrate_segment(const Vec3& a, const Vec3& b, int q, Fn&& f) {
  const auto& rule = gauss_legendre(q);
  const double half = 0.5 * (b - a).norm();
  double s = 0.0;
  for (int i = 0; i < q; ++i) {
    const Vec3 x = 0.5 * (a + b) + 0.5 * rule.nodes[i] * (b - a);
    s += rule.weights[i] * f(x);
  }
  return s * half;
}

namespace detail {
struct RefTetMap {
  // Duffy-type collapsed map from the unit cube onto the reference tetrahedron
  // {u>=0, v>=0, w>=0, u+v+w<=1}; the Jacobian is polynomial, so product
  // Gauss rules stay exact for polynomial integrands.
  static Vec3 point(double a, double b, double c) {
    const double u = a;
    const double v = b * (1.0 - a);
    const double w = c * (1.0 - a) * (1.0 - b);
    return {u, v, w};
  }
  static double jacobian(double a, double b, double /*c*/) {
    return (1.0 - a) * (1.0 - a) * (1.0 - b);
  }
};
}  // namespace detail

/// Integral of f over the tetrahedron with the given vertices; exact for
/// polynomial f of total degree <= deg.
template <class Fn>
double integrate_tet(const std::array<Vec3, 4>& v, int deg, Fn&& f) {
  const int q = std::max(1, (deg + 4) / 2);  // covers the degree-3 Jacobian factors
  const auto& rule = gauss_legendre(q);
  const Eigen::Matrix3d J = (Eigen::Matrix3d() << v[1] - v[0], v[2] - v[0], v[3] - v[0]).finished();
  const double vol6 = std::abs(J.determinant());
  double s = 0.0;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < q; ++k) {
        const double a = 0.5 * (rule.nodes[i] + 1.0);
        const double b = 0.5 * (rule.nodes[j] + 1.0);
        const double c = 0.5 * (rule.nodes[k] + 1.0);
        const Vec3 r = detail::RefTetMap::point(a, b, c);
        const Vec3 x = v[0] + J * r;
        s += rule.weights[i] * rule.weights[j] * rule.weights[k] *
             detail::RefTetMap::jacobian(a, b, c) * f(x);
      }
  return s * vol6 * 0.125;
}

}  // namespace linetension
