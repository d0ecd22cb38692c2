#pragma once

#include "linetension/geometry.hpp"
#include "linetension/polynomial.hpp"

#include <fstream>
#include <sstream>

namespace linetension {

/// Divergence-free piecewise-constant field: one N x 3 matrix per tetrahedron
/// of a conforming triangulation. Measure interpretation: mu = A L^3.
struct PiecewiseConstantField {
  Triangulation mesh;
  std::vector<FieldMat> matrices;  // one per tetrahedron
  int burgers_dim = 0;

  PiecewiseConstantField(Triangulation m, std::vector<FieldMat> mats)
      : mesh(std::move(m)), matrices(std::move(mats)) {
    if (matrices.size() != mesh.tets().size())
      throw std::invalid_argument("field: one matrix per tetrahedron required");
    if (matrices.empty()) throw std::invalid_argument("field: empty");
    burgers_dim = int(matrices[0].rows());
    for (const auto& A : matrices)
      if (A.rows() != burgers_dim || A.cols() != 3)
        throw std::invalid_argument("field: matrices must all be N x 3");
  }

  double max_matrix_norm() const {
    double m = 0;
    for (const auto& A : matrices) m = std::max(m, A.norm());
    return m;
  }
  /// integral of |A| over the covered region
  double l1_norm() const {
    double s = 0;
    for (std::size_t i = 0; i < matrices.size(); ++i)
      s += matrices[i].norm() * mesh.tets()[i].volume();
    return s;
  }
};

struct NormalJumpReport {
  double max_violation = 0.0;      // max |(A_i - A_j) nu| over interior faces
  double max_relative = 0.0;       // violation / max |A|
  int worst_face = -1;             // index into mesh.faces()
  bool pass(double rel_tol = 1e-10) const { return max_relative <= rel_tol; }
};

/// A_i nu = A_j nu across every interior face; exact in exact arithmetic for
/// curl-built fields, checked here to a relative tolerance.
inline NormalJumpReport check_normal_jumps(const PiecewiseConstantField& field) {
  NormalJumpReport rep;
  const double scale = std::max(field.max_matrix_norm(), 1e-300);
  const auto& faces = field.mesh.faces();
  for (int fi = 0; fi < int(faces.size()); ++fi) {
    const auto& f = faces[fi];
    if (!f.interior()) continue;
    const Eigen::VectorXd jump =
        (field.matrices[f.tet_a] - field.matrices[f.tet_b]) * f.normal;
    const double v = jump.norm();
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.worst_face = fi;
    }
  }
  rep.max_relative = rep.max_violation / scale;
  return rep;
}

/// Per-tetrahedron row-wise curl of the affine interpolant of a polynomial
/// potential (N rows of vector potentials, each R^3 -> R^3). Tangential
/// components of the interpolant match across shared faces, so the resulting
/// piecewise-constant field satisfies A_i nu = A_j nu exactly in exact
/// arithmetic and is divergence free as a measure.
inline PiecewiseConstantField curl_of_interpolated_potential(const PolynomialMatrix& potential,
                                                             const Triangulation& mesh) {
  if (potential.cols() != 3)
    throw std::invalid_argument("potential must map into N x 3 (row-wise vector potentials)");
  const int N = potential.rows();
  std::vector<FieldMat> mats;
  mats.reserve(mesh.tets().size());
  for (const auto& T : mesh.tets()) {
    // gradient of the scalar affine interpolant: solve [1 x y z] alpha = vals
    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i) {
      M(i, 0) = 1.0;
      M.row(i).tail(3) = T.vertex(i).transpose();
    }
    Eigen::PartialPivLU<Eigen::Matrix4d> lu(M);
    FieldMat A(N, 3);
    for (int r = 0; r < N; ++r) {
      Eigen::Matrix3d J;  // J(c, d) = d phi_c / d x_d of the interpolant
      for (int c = 0; c < 3; ++c) {
        Eigen::Vector4d vals;
        for (int i = 0; i < 4; ++i) vals[i] = potential.at(r, c)(T.vertex(i));
        const Eigen::Vector4d alpha = lu.solve(vals);
        J.row(c) = alpha.tail(3).transpose();
      }
      A(r, 0) = J(2, 1) - J(1, 2);
      A(r, 1) = J(0, 2) - J(2, 0);
      A(r, 2) = J(1, 0) - J(0, 1);
    }
    mats.push_back(std::move(A));
  }
  return PiecewiseConstantField(mesh, std::move(mats));
}

/// Exact rank-one splitting A = sum_{ij} (A_ij e_i) (x) e_j over the nonzero
/// entries; at most 3N terms, each multiplicity a (signed) multiple of a
/// standard integer basis vector.
struct RankOneDecomposition {
  struct Term {
    Burgers b;
    Vec3 t;
  };
  std::vector<Term> terms;
  FieldMat target;

  FieldMat reconstruct() const {
    FieldMat A = FieldMat::Zero(target.rows(), target.cols());
    for (const auto& term : terms) A += term.b * term.t.transpose();
    return A;
  }
};

inline RankOneDecomposition coordinate_rank_one_decomposition(const FieldMat& A) {
  RankOneDecomposition d;
  d.target = A;
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < 3; ++j) {
      if (A(i, j) == 0.0) continue;
      Burgers b = Burgers::Zero(A.rows());
      b[i] = A(i, j);
      Vec3 t = Vec3::Zero();
      t[j] = 1.0;
      d.terms.push_back({std::move(b), t});
    }
  return d;
}

/// E_0 of the field: sum_i g(A_i) vol(T_i intersect Omega) for a 1-homogeneous
/// integrand g supplied by the caller (typically the certified envelope).
template <class GFn>
double e0_energy(const PiecewiseConstantField& field, GFn&& g, const AABox& omega) {
  double s = 0;
  for (std::size_t i = 0; i < field.matrices.size(); ++i) {
    if (field.matrices[i].norm() == 0.0) continue;
    const double vol = tet_box_volume(field.mesh.tets()[i], omega);
    if (vol > 0) s += g(field.matrices[i]) * vol;
  }
  return s;
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// Per-tet matrix table: tet index followed by the N x 3 entries row-major.
inline void save_field_csv(const PiecewiseConstantField& field, std::ostream& out) {
  out << "tet";
  for (int r = 0; r < field.burgers_dim; ++r)
    for (int c = 0; c < 3; ++c) out << ",a" << r + 1 << c + 1;
  out << "\n";
  for (std::size_t i = 0; i < field.matrices.size(); ++i) {
    out << i;
    for (int r = 0; r < field.burgers_dim; ++r)
      for (int c = 0; c < 3; ++c) out << ',' << format_g17(field.matrices[i](r, c));
    out << "\n";
  }
}

inline std::vector<FieldMat> load_field_matrices(std::istream& in, std::size_t n_tets) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("field file: empty");
  const int cols = int(std::count(header.begin(), header.end(), ',')) + 1;
  if (cols < 4 || (cols - 1) % 3 != 0)
    throw std::runtime_error("field file: expected tet,N*3 matrix columns");
  const int N = (cols - 1) / 3;
  std::vector<FieldMat> mats(n_tets, FieldMat::Zero(N, 3));
  std::vector<bool> seen(n_tets, false);
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
      throw std::runtime_error("field file line " + std::to_string(lineno) + ": bad column count");
    const auto ti = std::size_t(vals[0]);
    if (ti >= n_tets)
      throw std::runtime_error("field file line " + std::to_string(lineno) +
                               ": tet index out of range");
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < 3; ++c) mats[ti](r, c) = vals[1 + r * 3 + c];
    seen[ti] = true;
  }
  for (std::size_t i = 0; i < n_tets; ++i)
    if (!seen[i]) throw std::runtime_error("field file: missing matrix for tet " + std::to_string(i));
  return mats;
}

/// Potential coefficient list: row,component,ax,ay,az,coeff (row is the field
/// row the vector potential belongs to, component the R^3 component).
inline PolynomialMatrix load_potential_csv(std::istream& in, int burgers_dim) {
  PolynomialMatrix phi(burgers_dim, 3);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (first && line.find("row") != std::string::npos) {
      first = false;
      continue;  // header
    }
    first = false;
    std::istringstream ss(line);
    std::vector<double> vals;
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
    if (vals.size() != 6)
      throw std::runtime_error("potential file line " + std::to_string(lineno) +
                               ": expected row,comp,ax,ay,az,coeff");
    const int r = int(vals[0]) - 1, c = int(vals[1]) - 1;
    if (r < 0 || r >= burgers_dim || c < 0 || c >= 3)
      throw std::runtime_error("potential file line " + std::to_string(lineno) +
                               ": row/component out of range");
    phi.at(r, c).add_term(int(vals[2]), int(vals[3]), int(vals[4]), vals[5]);
  }
  return phi;
}

}  // namespace linetension
