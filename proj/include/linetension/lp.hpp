#pragma once

#include "linetension/core.hpp"

namespace linetension {

/// Result of min c'x s.t. Ax = rhs, x >= 0. `basis` lists the basic column
/// indices, so optimal vertex solutions have at most m nonzero entries.
struct LPResult {
  enum class Status { optimal, infeasible, unbounded, iteration_limit };
  Status status = Status::optimal;
  double objective = 0.0;
  std::vector<int> basis;
  Eigen::VectorXd basic_values;
  int iterations = 0;

  bool ok() const { return status == Status::optimal; }
};

/// Dense two-phase revised simplex for small row counts and many columns.
/// Dantzig pricing with a switch to Bland's rule after a degenerate streak,
/// which keeps the method anti-cycling while staying fast in practice.
class SimplexSolver {
 public:
  explicit SimplexSolver(double tol = 1e-9, int max_iter = 200000)
      : tol_(tol), max_iter_(max_iter) {}

  LPResult solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs,
                 const Eigen::VectorXd& cost) const {
    const int m = int(A.rows());
    const int n = int(A.cols());
    if (rhs.size() != m || cost.size() != n)
      throw std::invalid_argument("SimplexSolver: dimension mismatch");

    // Phase 1 with one artificial per row; flip rows so the rhs is >= 0.
    Eigen::MatrixXd Aw(m, n + m);
    Eigen::VectorXd bw = rhs;
    Aw.leftCols(n) = A;
    Aw.rightCols(m).setZero();
    for (int i = 0; i < m; ++i) {
      if (bw[i] < 0) {
        bw[i] = -bw[i];
        Aw.row(i).head(n) = -Aw.row(i).head(n);
      }
      Aw(i, n + i) = 1.0;
    }
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;

    Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(n + m);
    phase1_cost.tail(m).setOnes();
    LPResult r1 = run(Aw, bw, phase1_cost, basis, n + m);
    if (!r1.ok()) return r1;
    if (r1.objective > tol_ * std::max(1.0, bw.lpNorm<Eigen::Infinity>())) {
      LPResult r;
      r.status = LPResult::Status::infeasible;
      r.iterations = r1.iterations;
      return r;
    }
    basis = r1.basis;

    // Drive leftover artificials out of the basis; rows where no structural
    // pivot exists are redundant and get dropped.
    std::vector<int> keep_rows;
    {
      Eigen::MatrixXd B(m, m);
      for (int i = 0; i < m; ++i) B.col(i) = Aw.col(basis[i]);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      std::vector<bool> drop(m, false);
      for (int i = 0; i < m; ++i) {
        if (basis[i] < n) continue;
        int pivot = -1;
        for (int j = 0; j < n && pivot < 0; ++j) {
          const Eigen::VectorXd dj = lu.solve(Aw.col(j));
          if (std::abs(dj[i]) > tol_ &&
              std::find(basis.begin(), basis.end(), j) == basis.end())
            pivot = j;
        }
        if (pivot >= 0) {
          basis[i] = pivot;
          for (int r = 0; r < m; ++r) B.col(r) = Aw.col(basis[r]);
          lu.compute(B);
        } else {
          drop[i] = true;
        }
      }
      for (int i = 0; i < m; ++i)
        if (!drop[i]) keep_rows.push_back(i);
    }
    if (int(keep_rows.size()) < m) {
      const int m2 = int(keep_rows.size());
      Eigen::MatrixXd A2(m2, n);
      Eigen::VectorXd b2(m2);
      std::vector<int> basis2;
      for (int i = 0; i < m2; ++i) {
        A2.row(i) = Aw.row(keep_rows[i]).head(n);
        b2[i] = bw[keep_rows[i]];
      }
      for (int i : keep_rows) basis2.push_back(basis[i]);
      LPResult r2 = run(A2, b2, cost, basis2, n);
      r2.iterations += r1.iterations;
      return r2;
    }

    LPResult r2 = run(Aw.leftCols(n), bw, cost, basis, n);
    r2.iterations += r1.iterations;
    return r2;
  }

 private:
  LPResult run(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& cost,
               std::vector<int> basis, int priceable) const {
    const int m = int(A.rows());
    LPResult res;
    Eigen::MatrixXd B(m, m);
    Eigen::VectorXd xb(m), y(m), cb(m), d(m);
    int degenerate_streak = 0;
    // Degenerate basic values below this count as exact zeros in the ratio
    // test, so Bland's tie-break engages and cycling cannot occur. The
    // threshold scales with the right-hand side, which keeps the pivot path
    // invariant under power-of-two scalings.
    const double zero_tol = tol_ * std::max(b.lpNorm<Eigen::Infinity>(), 1e-300);

    for (int iter = 0; iter < max_iter_; ++iter) {
      for (int i = 0; i < m; ++i) B.col(i) = A.col(basis[i]);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      xb = lu.solve(b);
      for (int i = 0; i < m; ++i) cb[i] = cost[basis[i]];
      Eigen::PartialPivLU<Eigen::MatrixXd> luT(B.transpose());
      y = luT.solve(cb);

      // pricing: Dantzig, with Bland's rule after a degenerate streak
      const bool bland = degenerate_streak > 20;
      int enter = -1;
      double best = -tol_;
      for (int j = 0; j < priceable; ++j) {
        const double rc = cost[j] - y.dot(A.col(j));
        if (rc < -tol_) {
          if (bland) {
            enter = j;
            break;
          }
          if (rc < best) {
            best = rc;
            enter = j;
          }
        }
      }
      if (enter < 0) {
        res.status = LPResult::Status::optimal;
        res.basis = basis;
        res.basic_values = xb;
        res.iterations = iter;
        res.objective = cb.dot(xb);
        return res;
      }

      d = lu.solve(A.col(enter));
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (d[i] > tol_) {
          const double ratio = xb[i] <= zero_tol ? 0.0 : xb[i] / d[i];
          if (leave < 0 || ratio < best_ratio ||
              (ratio == best_ratio && basis[i] < basis[leave])) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) {
        res.status = LPResult::Status::unbounded;
        res.iterations = iter;
        return res;
      }
      degenerate_streak = best_ratio <= zero_tol ? degenerate_streak + 1 : 0;
      basis[leave] = enter;
    }
    res.status = LPResult::Status::iteration_limit;
    res.iterations = max_iter_;
    return res;
  }

  double tol_;
  int max_iter_;
};

}  // namespace linetension
