#pragma once

#include "linetension/core.hpp"
#include "linetension/lp.hpp"

#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

namespace linetension {

/// Line-tension density psi(z, t) on Z^N x S^2 with declared growth constants
/// c |z| <= psi(z,t) <= cbar |z|. psi(0, t) = 0 by convention.
class Density {
 public:
  using EvalFn = std::function<double(const Burgers& z, const Vec3& t)>;

  Density(std::string kind, int burgers_dim, EvalFn fn, double c_lower, double c_upper,
          bool assumed_elliptic = false)
      : kind_(std::move(kind)),
        n_(burgers_dim),
        fn_(std::move(fn)),
        c_lower_(c_lower),
        c_upper_(c_upper),
        assumed_elliptic_(assumed_elliptic) {}

  double operator()(const Burgers& z, const Vec3& t) const {
    if (z.size() != n_) throw std::invalid_argument("Density: burgers dimension mismatch");
    if (z.norm() == 0.0) return 0.0;
    return fn_(z, t);
  }

  int burgers_dim() const { return n_; }
  const std::string& kind() const { return kind_; }
  double c_lower() const { return c_lower_; }
  double c_upper() const { return c_upper_; }
  /// Table densities cannot be certified elliptic from finitely many samples;
  /// reports label them accordingly.
  bool assumed_elliptic() const { return assumed_elliptic_; }

  static Density isotropic(int n) {
    return Density("iso", n, [](const Burgers& z, const Vec3&) { return z.norm(); }, 1.0, 1.0);
  }
  /// |z| + 1 off the origin: subadditive with a bounded offset that washes out
  /// in the recession limit.
  static Density isotropic_offset(int n) {
    return Density("iso+1", n, [](const Burgers& z, const Vec3&) { return z.norm() + 1.0; }, 1.0,
                   2.0);
  }
  /// |z|^2 violates subadditivity; used as the negative control.
  static Density isotropic_squared(int n) {
    return Density("iso^2", n, [](const Burgers& z, const Vec3&) { return z.squaredNorm(); }, 1.0,
                   0.0);
  }
  /// (2 - |<t, e3>|) |z|: anisotropic with c = 1, cbar = 2.
  static Density anisotropic_axis(int n) {
    return Density(
        "aniso:axis", n,
        [](const Burgers& z, const Vec3& t) { return (2.0 - std::abs(t.z())) * z.norm(); }, 1.0,
        2.0);
  }

  static Density from_builtin(const std::string& name, int n) {
    if (name == "iso") return isotropic(n);
    if (name == "iso+1") return isotropic_offset(n);
    if (name == "iso^2") return isotropic_squared(n);
    if (name == "aniso:axis") return anisotropic_axis(n);
    throw std::invalid_argument("unknown density builtin: " + name);
  }

  static Density from_table(std::istream& in, int n, double c_lower, double c_upper);
  static Density from_table_file(const std::string& path, int n, double c_lower, double c_upper) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open psi table: " + path);
    return from_table(f, n, c_lower, c_upper);
  }

 private:
  std::string kind_;
  int n_;
  EvalFn fn_;
  double c_lower_, c_upper_;
  bool assumed_elliptic_ = false;
};

namespace detail {

struct TableKey {
  std::vector<long long> z;
  bool operator<(const TableKey& o) const { return z < o.z; }
};

inline Eigen::VectorXi reduce_gcd(Eigen::VectorXi z) {
  long long g = 0;
  for (int i = 0; i < z.size(); ++i) g = std::gcd(g, (long long)std::abs(z[i]));
  if (g > 1)
    for (int i = 0; i < z.size(); ++i) z[i] /= int(g);
  return z;
}

}  // namespace detail

/// CSV rows: z1..zN,theta,phi,value with t = (sin th cos ph, sin th sin ph, cos th).
/// Lookup is exact in z with nearest-direction interpolation in t; integer
/// multiples of tabulated vectors extend linearly, anything else falls back to
/// the declared upper growth. Such densities are reported "assumed elliptic".
inline Density Density::from_table(std::istream& in, int n, double c_lower, double c_upper) {
  struct Sample {
    Vec3 t;
    double value;
  };
  auto table = std::make_shared<std::map<detail::TableKey, std::vector<Sample>>>();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> vals;
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
    if (int(vals.size()) != n + 3)
      throw std::runtime_error("psi table row " + std::to_string(lineno) + ": expected " +
                               std::to_string(n + 3) + " columns");
    detail::TableKey key;
    key.z.resize(n);
    for (int i = 0; i < n; ++i) {
      key.z[i] = std::llround(vals[i]);
      if (std::abs(vals[i] - double(key.z[i])) > 1e-9)
        throw std::runtime_error("psi table row " + std::to_string(lineno) +
                                 ": z entries must be integers");
    }
    const double th = vals[n], ph = vals[n + 1], v = vals[n + 2];
    if (!(v >= 0) || !std::isfinite(v))
      throw std::runtime_error("psi table row " + std::to_string(lineno) +
                               ": value must be finite and nonnegative");
    (*table)[key].push_back(
        {Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)), v});
  }
  if (table->empty()) throw std::runtime_error("psi table is empty");

  auto lookup = [table, n, c_upper](const Burgers& z, const Vec3& t) -> double {
    detail::TableKey key;
    key.z.resize(n);
    Eigen::VectorXi zi(n);
    for (int i = 0; i < n; ++i) {
      key.z[i] = std::llround(z[i]);
      zi[i] = int(key.z[i]);
    }
    auto nearest = [&](const std::vector<Sample>& samples) {
      double best = samples[0].value, bestdot = samples[0].t.dot(t);
      for (const auto& s : samples)
        if (s.t.dot(t) > bestdot) {
          bestdot = s.t.dot(t);
          best = s.value;
        }
      return best;
    };
    if (auto it = table->find(key); it != table->end()) return nearest(it->second);
    // linear extension along tabulated directions
    const Eigen::VectorXi z0 = detail::reduce_gcd(zi);
    detail::TableKey k0;
    k0.z.assign(z0.data(), z0.data() + n);
    if (auto it = table->find(k0); it != table->end()) {
      const double mult = z.norm() / z0.cast<double>().norm();
      return mult * nearest(it->second);
    }
    return c_upper * z.norm();
  };
  return Density("table", n, lookup, c_lower, c_upper, /*assumed_elliptic=*/true);
}

// ---------------------------------------------------------------------------
// Structural property checks
// ---------------------------------------------------------------------------

struct DensityPropertyReport {
  bool growth_ok = true;
  bool subadditive_ok = true;
  double fitted_c_lower = 0.0;
  double fitted_c_upper = 0.0;
  // worst witnesses
  Burgers growth_witness_z;
  Vec3 growth_witness_t = Vec3::Zero();
  double growth_margin = 0.0;  // most negative slack of c|z| <= psi <= cbar|z|
  Burgers subadd_witness_z1, subadd_witness_z2;
  Vec3 subadd_witness_t = Vec3::Zero();
  double subadd_violation = 0.0;  // max of psi(z+z') - psi(z) - psi(z')
  bool assumed_elliptic = false;
};

/// Fibonacci sphere sample, deterministic and roughly uniform.
inline std::vector<Vec3> fibonacci_sphere(int count) {
  std::vector<Vec3> pts;
  pts.reserve(count);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double y = 1.0 - 2.0 * (i + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double th = golden * i;
    pts.emplace_back(r * std::cos(th), y, r * std::sin(th));
  }
  return pts;
}

inline DensityPropertyReport check_density_properties(const Density& psi, int z_samples = 512,
                                                      int t_samples = 1024,
                                                      std::uint64_t seed = 2024) {
  const int n = psi.burgers_dim();
  DensityPropertyReport rep;
  rep.assumed_elliptic = psi.assumed_elliptic();
  rep.fitted_c_lower = std::numeric_limits<double>::max();
  rep.fitted_c_upper = 0.0;
  rep.growth_margin = std::numeric_limits<double>::max();

  const auto ts = fibonacci_sphere(std::max(t_samples, 8));
  std::uint64_t state = seed;
  auto random_z = [&]() {
    Burgers z(n);
    do {
      for (int i = 0; i < n; ++i) z[i] = std::floor(unit_uniform(state) * 21.0) - 10.0;
    } while (z.norm() == 0.0);
    return z;
  };

  const double rel = 1e-12;
  for (int s = 0; s < z_samples; ++s) {
    const Burgers z1 = random_z();
    const Burgers z2 = random_z();
    const Vec3& t = ts[s % ts.size()];
    const double v1 = psi(z1, t);
    const double v2 = psi(z2, t);
    rep.fitted_c_lower = std::min(rep.fitted_c_lower, v1 / z1.norm());
    rep.fitted_c_upper = std::max(rep.fitted_c_upper, v1 / z1.norm());
    const double margin =
        std::min(v1 - psi.c_lower() * z1.norm(),
                 psi.c_upper() > 0 ? psi.c_upper() * z1.norm() - v1 : 0.0);
    if (margin < rep.growth_margin) {
      rep.growth_margin = margin;
      rep.growth_witness_z = z1;
      rep.growth_witness_t = t;
    }
    if (margin < -rel * std::max(1.0, v1)) rep.growth_ok = false;

    const Burgers zs = z1 + z2;
    if (zs.norm() > 0) {
      const double lhs = psi(zs, t);
      const double violation = lhs - v1 - v2;
      if (violation > rep.subadd_violation) {
        rep.subadd_violation = violation;
        rep.subadd_witness_z1 = z1;
        rep.subadd_witness_z2 = z2;
        rep.subadd_witness_t = t;
      }
      if (violation > rel * std::max(1.0, lhs)) rep.subadditive_ok = false;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Recession function psi_inf
// ---------------------------------------------------------------------------

struct RecessionResult {
  EnergyValue value;          // |b| * min_j psi(j z0, t)/(j |z0|), or the +inf flag
  double oscillation = 0.0;   // spread of psi(j z0,t)/(j|z0|) over the last quartile
  Eigen::VectorXi direction;  // primitive integer direction, empty if none
};

/// Numerical liminf of psi(s b, t)/s. Finite exactly on the cone of positive
/// multiples of integer vectors: the direction of b is rationalized to a
/// primitive z0 and the running minimum of psi(j z0, t)/(j |z0|) is taken over
/// j <= s_max. The result is 1-homogeneous in b by construction.
class Recession {
 public:
  explicit Recession(Density base, int s_max = 64, double dir_tol = 1e-9,
                     std::int64_t qmax = 4096)
      : base_(std::move(base)), s_max_(s_max), dir_tol_(dir_tol), qmax_(qmax) {
    if (s_max_ < 1) throw std::invalid_argument("Recession: s_max must be >= 1");
  }

  const Density& base() const { return base_; }
  int s_max() const { return s_max_; }

  /// Primitive integer vector z0 with b = lambda z0, lambda > 0; nullopt when
  /// the direction admits no rational representation within tolerance.
  std::optional<Eigen::VectorXi> integer_direction(const Burgers& b) const {
    const int n = int(b.size());
    int pivot = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(b[i]) > std::abs(b[pivot])) pivot = i;
    if (b[pivot] == 0.0) return std::nullopt;
    std::int64_t den = 1;
    std::vector<std::int64_t> nums(n);
    for (int i = 0; i < n; ++i) {
      const double r = b[i] / b[pivot];
      std::int64_t p, q;
      if (!ratio_to_fraction(r, p, q)) return std::nullopt;
      const std::int64_t g = std::gcd(den, q);
      if (den / g > (std::int64_t(1) << 40) / q) return std::nullopt;
      den = den / g * q;
    }
    Eigen::VectorXi z(n);
    long long gall = 0;
    for (int i = 0; i < n; ++i) {
      const double y = b[i] / b[pivot] * double(den);
      const long long yi = std::llround(y);
      if (std::abs(y - double(yi)) > 1e-6) return std::nullopt;
      z[i] = int(yi);
      gall = std::gcd(gall, std::abs(yi));
    }
    if (gall == 0) return std::nullopt;
    for (int i = 0; i < n; ++i) z[i] = int(z[i] / gall);
    if (b[pivot] < 0) z = -z;
    // safety: directions must agree
    const Eigen::VectorXd zd = z.cast<double>();
    if ((b / b.norm() - zd / zd.norm()).lpNorm<Eigen::Infinity>() > 16 * dir_tol_ + 1e-12)
      return std::nullopt;
    return z;
  }

  RecessionResult evaluate(const Burgers& b, const Vec3& t) const {
    RecessionResult r;
    if (b.size() != base_.burgers_dim())
      throw std::invalid_argument("Recession: burgers dimension mismatch");
    if (b.norm() == 0.0) return r;  // psi_inf(0, t) = 0 by homogeneity
    auto z0 = integer_direction(b);
    if (!z0) {
      r.value = EnergyValue::infinity();
      return r;
    }
    r.direction = *z0;
    const Eigen::VectorXd zd = z0->cast<double>();
    const double zn = zd.norm();
    double running_min = std::numeric_limits<double>::max();
    std::vector<double> tail;
    for (int j = 1; j <= s_max_; ++j) {
      const double v = base_(j * zd, t) / (j * zn);
      running_min = std::min(running_min, v);
      if (4 * j >= 3 * s_max_) tail.push_back(v);
    }
    r.value = EnergyValue{b.norm() * running_min, true};
    if (!tail.empty()) {
      const auto [mn, mx] = std::minmax_element(tail.begin(), tail.end());
      r.oscillation = (*mx - *mn) * b.norm();
    }
    return r;
  }

  EnergyValue operator()(const Burgers& b, const Vec3& t) const { return evaluate(b, t).value; }

 private:
  bool ratio_to_fraction(double x, std::int64_t& p, std::int64_t& q) const {
    // continued fractions with bounded denominator
    double v = x;
    std::int64_t p0 = 1, q0 = 0, p1 = std::int64_t(std::floor(v)), q1 = 1;
    v -= std::floor(v);
    for (int it = 0; it < 64; ++it) {
      if (std::abs(x - double(p1) / double(q1)) <= dir_tol_) {
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
      if (q2 > qmax_ || q2 <= 0) break;
      p0 = p1;
      q0 = q1;
      p1 = p2;
      q1 = q2;
    }
    if (std::abs(x - double(p1) / double(q1)) <= dir_tol_) {
      p = p1;
      q = q1;
      return true;
    }
    return false;
  }

  Density base_;
  int s_max_;
  double dir_tol_;
  std::int64_t qmax_;
};

/// g_inf(A) = psi_inf(b, t) when A = b (x) t is rank one, +inf otherwise.
/// Rank one is detected through the second singular value.
inline EnergyValue g_infinity(const FieldMat& A, const Recession& rec) {
  const double norm = A.norm();
  if (norm == 0.0) return {0.0, true};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() > 1 && s[1] > 1e-10 * norm) return EnergyValue::infinity();
  const Burgers b = s[0] * svd.matrixU().col(0);
  const Vec3 t = svd.matrixV().col(0);
  return rec(b, t);
}

// ---------------------------------------------------------------------------
// Convex envelope by linear programming
// ---------------------------------------------------------------------------

struct EnvelopeParams {
  int z_max = 3;        // dictionary covers primitive integer z with |z|_inf <= z_max
  int directions = 256; // Fibonacci sphere sample size
  double lp_tol = 1e-9;
};

struct EnvelopeTerm {
  Burgers b;          // weight * z, a positive multiple of an integer vector
  Vec3 t;
  double weight = 0;  // LP coefficient
  Eigen::VectorXi z;  // integer direction of the dictionary column
};

struct EnvelopeCertificate {
  double value = 0.0;
  std::vector<EnvelopeTerm> terms;
  int lp_iterations = 0;

  FieldMat reconstruct(int burgers_dim) const {
    FieldMat A = FieldMat::Zero(burgers_dim, 3);
    for (const auto& term : terms) A += term.b * term.t.transpose();
    return A;
  }
};

/// Upper approximation g~ of the convex envelope g = (g_inf)^**:
///   minimize sum_d c_d psi_inf(z_d, t_d)  s.t.  sum_d c_d z_d (x) t_d = A, c_d >= 0,
/// solved by revised simplex so the optimum is a vertex with at most 3N
/// nonzero weights. The coordinate directions of A are always part of the
/// dictionary, which makes the program feasible by construction; the value is
/// an upper bound on g(A) that decreases as the dictionary refines.
class EnvelopeSolver {
 public:
  EnvelopeSolver(const Recession& rec, EnvelopeParams params = {})
      : rec_(&rec), params_(params), n_(rec.base().burgers_dim()) {
    build_z_dictionary();
    base_dirs_ = fibonacci_sphere(params_.directions);
  }

  const EnvelopeParams& params() const { return params_; }

  EnvelopeCertificate solve(const FieldMat& A) const {
    if (A.rows() != n_ || A.cols() != 3)
      throw std::invalid_argument("EnvelopeSolver: target must be N x 3");
    EnvelopeCertificate cert;
    if (A.norm() == 0.0) return cert;

    // direction set: Fibonacci sample plus the exact coordinate axes and the
    // right singular vectors of the target
    std::vector<Vec3> dirs = base_dirs_;
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e[j] = 1;
      dirs.push_back(e);
      dirs.push_back(-e);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    for (int j = 0; j < svd.matrixV().cols(); ++j) {
      const Vec3 v = svd.matrixV().col(j);
      dirs.push_back(v);
      dirs.push_back(-v);
    }
    // multiplicity-side injection: left singular directions that rationalize
    // to integer vectors join the dictionary even beyond |z|_inf <= z_max, so
    // rank-one targets with integer directions are solved exactly
    std::vector<Eigen::VectorXi> zall = zs_;
    for (int j = 0; j < svd.matrixU().cols(); ++j) {
      if (svd.singularValues()[j] <= 1e-12 * svd.singularValues()[0]) continue;
      const Burgers u = svd.matrixU().col(j);
      if (auto z0 = rec_->integer_direction(u)) {
        Eigen::VectorXi z = *z0;
        for (int i = 0; i < z.size(); ++i) {
          if (z[i] > 0) break;
          if (z[i] < 0) {
            z = -z;
            break;
          }
        }
        if (std::find(zall.begin(), zall.end(), z) == zall.end()) zall.push_back(z);
      }
    }

    const int m = 3 * n_;
    const std::size_t ncols = zall.size() * dirs.size();
    Eigen::MatrixXd M(m, ncols);
    Eigen::VectorXd cost(ncols);
    std::size_t col = 0;
    for (std::size_t zi = 0; zi < zall.size(); ++zi) {
      const Eigen::VectorXd zd = zall[zi].cast<double>();
      for (const auto& t : dirs) {
        const EnergyValue v = (*rec_)(zd, t);
        if (!v.finite)
          throw std::logic_error("EnvelopeSolver: recession infinite on an integer direction");
        cost[col] = v.value;
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < 3; ++j) M(i * 3 + j, col) = zd[i] * t[j];
        ++col;
      }
    }
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < 3; ++j) rhs[i * 3 + j] = A(i, j);

    SimplexSolver lp(params_.lp_tol);
    const LPResult res = lp.solve(M, rhs, cost);
    if (!res.ok())
      throw std::runtime_error(
          "convex_envelope: dictionary cannot express the target; increase z_max or the "
          "direction count");
    cert.lp_iterations = res.iterations;
    cert.value = res.objective;
    for (std::size_t i = 0; i < res.basis.size(); ++i) {
      const double w = res.basic_values[int(i)];
      const int b = res.basis[i];
      if (b >= int(ncols) || w <= params_.lp_tol) continue;
      EnvelopeTerm term;
      term.z = zall[b / dirs.size()];
      term.t = dirs[b % dirs.size()];
      term.weight = w;
      term.b = w * term.z.cast<double>();
      cert.terms.push_back(std::move(term));
    }
    return cert;
  }

  /// Value only.
  double value(const FieldMat& A) const { return solve(A).value; }

 private:
  void build_z_dictionary() {
    const int zm = params_.z_max;
    if (zm < 1) throw std::invalid_argument("EnvelopeParams: z_max must be >= 1");
    Eigen::VectorXi z(n_);
    std::function<void(int)> rec_build = [&](int idx) {
      if (idx == n_) {
        if (z.isZero()) return;
        // canonical sign: first nonzero positive
        for (int i = 0; i < n_; ++i) {
          if (z[i] > 0) break;
          if (z[i] < 0) return;
        }
        long long g = 0;
        for (int i = 0; i < n_; ++i) g = std::gcd(g, (long long)std::abs(z[i]));
        if (g != 1) return;  // primitive only: scalar multiples are redundant
        zs_.push_back(z);
        return;
      }
      for (int v = -zm; v <= zm; ++v) {
        z[idx] = v;
        rec_build(idx + 1);
      }
    };
    rec_build(0);
  }

  const Recession* rec_;
  EnvelopeParams params_;
  int n_;
  std::vector<Eigen::VectorXi> zs_;
  std::vector<Vec3> base_dirs_;
};

// ---------------------------------------------------------------------------
// The lower-bound inequality chain
// ---------------------------------------------------------------------------

struct ChainReport {
  bool monotone_ok = true;      // psi(s z,t)/s >= psi(k s z,t)/(k s)
  bool chain_ok = true;         // psi(z,t) >= psi_inf(z,t) >= g~(z (x) t) - lp slack
  double worst_monotone = 0.0;  // most negative slack
  double worst_chain = 0.0;
  std::string worst_detail;
};

inline ChainReport inequality_chain_check(const Density& psi, const Recession& rec,
                                          const EnvelopeSolver& env, int samples = 32,
                                          std::uint64_t seed = 7) {
  ChainReport rep;
  const int n = psi.burgers_dim();
  std::uint64_t state = seed;
  const auto ts = fibonacci_sphere(64);
  const double tol = 1e-9;
  for (int it = 0; it < samples; ++it) {
    Burgers z(n);
    do {
      for (int i = 0; i < n; ++i) z[i] = std::floor(unit_uniform(state) * 7.0) - 3.0;
    } while (z.norm() == 0.0);
    const Vec3& t = ts[it % ts.size()];
    for (int s = 1; s <= 3; ++s)
      for (int k = 2; k <= 4; ++k) {
        const double lhs = psi(double(s) * z, t) / s;
        const double rhs = psi(double(k * s) * z, t) / (k * s);
        const double slack = lhs - rhs;
        if (slack < rep.worst_monotone) {
          rep.worst_monotone = slack;
          rep.worst_detail = "monotone at s=" + std::to_string(s) + " k=" + std::to_string(k);
        }
        if (slack < -tol * std::max(1.0, lhs)) rep.monotone_ok = false;
      }
    const double pz = psi(z, t);
    const EnergyValue pinf = rec(z, t);
    if (!pinf.finite) continue;
    const double gt = env.solve(z * t.transpose()).value;
    const double s1 = pz - pinf.value;
    const double s2 = pinf.value - gt;
    const double worst = std::min(s1, s2 + env.params().lp_tol * std::max(1.0, gt));
    if (worst < rep.worst_chain) rep.worst_chain = worst;
    if (worst < -tol * std::max(1.0, pz)) rep.chain_ok = false;
  }
  return rep;
}

}  // namespace linetension
