#pragma once

#include "linetension/core.hpp"

namespace linetension {

/// Sparse trivariate polynomial with exact coefficient arithmetic for
/// evaluation and differentiation.
class Polynomial3 {
 public:
  struct Term {
    int ax = 0, ay = 0, az = 0;
    double coeff = 0.0;
  };

  Polynomial3() = default;
  explicit Polynomial3(std::vector<Term> terms) : terms_(std::move(terms)) { compress(); }

  static Polynomial3 constant(double c) { return Polynomial3({{0, 0, 0, c}}); }
  static Polynomial3 monomial(int ax, int ay, int az, double c = 1.0) {
    return Polynomial3({{ax, ay, az, c}});
  }

  void add_term(int ax, int ay, int az, double c) {
    terms_.push_back({ax, ay, az, c});
    compress();
  }

  double operator()(const Vec3& p) const {
    double s = 0.0;
    for (const auto& t : terms_)
      s += t.coeff * ipow(p.x(), t.ax) * ipow(p.y(), t.ay) * ipow(p.z(), t.az);
    return s;
  }

  /// Exact partial derivative along axis 0,1,2.
  Polynomial3 derivative(int axis) const {
    std::vector<Term> out;
    for (const auto& t : terms_) {
      Term d = t;
      int* e = axis == 0 ? &d.ax : axis == 1 ? &d.ay : &d.az;
      if (*e == 0) continue;
      d.coeff *= *e;
      *e -= 1;
      out.push_back(d);
    }
    return Polynomial3(std::move(out));
  }

  int degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, t.ax + t.ay + t.az);
    return d;
  }

  bool empty() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

 private:
  static double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }
  void compress() {
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
      return std::tie(a.ax, a.ay, a.az) < std::tie(b.ax, b.ay, b.az);
    });
    std::vector<Term> out;
    for (const auto& t : terms_) {
      if (!out.empty() && out.back().ax == t.ax && out.back().ay == t.ay && out.back().az == t.az)
        out.back().coeff += t.coeff;
      else
        out.push_back(t);
    }
    std::erase_if(out, [](const Term& t) { return t.coeff == 0.0; });
    terms_ = std::move(out);
  }

  std::vector<Term> terms_;
};

/// Matrix of polynomials R^3 -> R^{rows x cols}. Used both for vector
/// potentials (rows x 3) and for polynomial matrix test functions.
class PolynomialMatrix {
 public:
  PolynomialMatrix() = default;
  PolynomialMatrix(int rows, int cols) : rows_(rows), cols_(cols), entries_(rows * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Polynomial3& at(int r, int c) { return entries_.at(std::size_t(r) * cols_ + c); }
  const Polynomial3& at(int r, int c) const { return entries_.at(std::size_t(r) * cols_ + c); }

  Eigen::MatrixXd operator()(const Vec3& p) const {
    Eigen::MatrixXd m(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) m(r, c) = at(r, c)(p);
    return m;
  }

  int degree() const {
    int d = 0;
    for (const auto& e : entries_) d = std::max(d, e.degree());
    return d;
  }

  /// Row-wise curl: row r of the result is curl of the 3-vector field in row r.
  /// Requires cols == 3.
  PolynomialMatrix row_curl() const {
    if (cols_ != 3) throw std::invalid_argument("row_curl: potential must have 3 columns");
    PolynomialMatrix out(rows_, 3);
    for (int r = 0; r < rows_; ++r) {
      const auto& fx = at(r, 0);
      const auto& fy = at(r, 1);
      const auto& fz = at(r, 2);
      out.at(r, 0) = sub(fz.derivative(1), fy.derivative(2));
      out.at(r, 1) = sub(fx.derivative(2), fz.derivative(0));
      out.at(r, 2) = sub(fy.derivative(0), fx.derivative(1));
    }
    return out;
  }

 private:
  static Polynomial3 sub(const Polynomial3& a, const Polynomial3& b) {
    std::vector<Polynomial3::Term> t = a.terms();
    for (auto term : b.terms()) {
      term.coeff = -term.coeff;
      t.push_back(term);
    }
    return Polynomial3(std::move(t));
  }

  int rows_ = 0, cols_ = 0;
  std::vector<Polynomial3> entries_;
};

}  // namespace linetension
