// Acceptance suite: every criterion prints one PASS/FAIL line with the
// measured quantities; the exit code is the number of failed criteria.

#include "linetension/harness.hpp"

#include "oracles.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>

using namespace linetension;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": " << detail << "\n";
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PiecewiseConstantField cube_field() {
  return curl_of_interpolated_potential(oracle::quadratic_potential(), make_unit_cube_6tet());
}

auto bump(const Vec3& c, double R, const Burgers& dir) {
  return [c, R, dir](const Vec3& x) -> Eigen::VectorXd {
    const double s = (x - c).squaredNorm() / (R * R);
    if (s >= 1.0) return Eigen::VectorXd::Zero(dir.size());
    const double w = (1.0 - s) * (1.0 - s);
    return w * dir;
  };
}

// 1. Divergence-free gluing on the unit cube.
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto field = cube_field();
  const AABox box = field.mesh.domain();
  const auto dec = coordinate_decompositions(field);
  bool pass = true;
  std::ostringstream detail;
  for (int k : {2, 4, 8}) {
    const auto g = glue(field, dec, k, ConstructionConfig{});
    const double mass = total_variation_on(g.mu, box);
    LedgerOptions lopt;
    lopt.mass_drop_rel = 0.0;
    const auto led = boundary_ledger(g.mu, lopt);
    double resid = 0;
    const double margin = 1e-9 * box.diameter();
    for (const auto& [key, e] : led.entries)
      if (box.interior_margin(e.pos) > margin) resid = std::max(resid, e.mass.norm());
    pass = pass && resid <= 1e-10 * mass;

    std::uint64_t st = 2024 + k;
    double worst_pair = 0;
    for (int i = 0; i < 20; ++i) {
      const Vec3 c(0.15 + 0.7 * unit_uniform(st), 0.15 + 0.7 * unit_uniform(st),
                   0.15 + 0.7 * unit_uniform(st));
      const double R = std::min(0.05 + 0.1 * unit_uniform(st), box.interior_margin(c));
      Burgers dir(3);
      dir << unit_uniform(st) - 0.5, unit_uniform(st) - 0.5, unit_uniform(st) - 0.5;
      dir.normalize();
      const double lip = 2.0 / R;  // quartic cutoff gradient bound
      const double got = std::abs(pair_with_gradient(g.mu, bump(c, R, dir)));
      worst_pair = std::max(worst_pair, got / (mass * lip));
      pass = pass && got <= 1e-10 * mass * lip;
    }
    detail << "k=" << k << " residual/mass=" << format_g17(resid / mass)
           << " pairing/(mass Lip)=" << format_g17(worst_pair) << "; ";
  }
  const double dt = seconds_since(t0);
  pass = pass && dt <= 120.0;
  detail << "runtime " << int(dt) << "s (limit 120s)";
  report(1, pass, detail.str());
}

// 2. Lattice-count estimate against the brute-force oracle. The constant of
// the estimate is taken per k over the whole sample (5 random shapes, 3 line
// directions each) and must stay within a factor 2 across k.
void criterion_2() {
  bool pass = true;
  bool oracle_ok = true;
  std::ostringstream detail;
  Burgers b(3);
  b << 1, 0, 0;
  std::vector<double> pooled;
  for (int k : {2, 4, 8, 16}) {
    double c_k = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Tetra T = oracle::random_tet(seed);
      std::uint64_t st = splitmix64(seed * 77 + 5);
      std::vector<Vec3> dirs;
      dirs.push_back(Vec3(2 * unit_uniform(st) - 1, 2 * unit_uniform(st) - 1,
                          2 * unit_uniform(st) - 1)
                         .normalized());
      dirs.push_back(Vec3(0, 0, 1));
      dirs.push_back(Vec3(1, 0, 0));
      const FaceGrid grid = shrink_and_project(T, subdivide_boundary(T, k));
      for (std::size_t j = 0; j < dirs.size(); ++j) {
        const auto lat =
            build_line_lattice(b, dirs[j], k, Vec2(0.351 + 0.1 * seed + 0.07 * j, 0.617));
        const auto clip = clip_cull_and_count(lat, grid, {}, 1e-9 * T.diameter());
        const double k4 = std::pow(double(k), 4);
        double worst = 0;
        for (std::size_t h = 0; h < grid.inner.size(); ++h) {
          if (clip.culled_lines == 0)
            oracle_ok = oracle_ok &&
                        clip.counts[h] == oracle::lattice_points_in_triangle(lat, grid.inner[h]);
          const double cosv = std::abs(dirs[j].dot(grid.inner[h].outward_normal));
          const double expected = grid.inner[h].area * k4 * cosv;  // H^2(delta)/H^2(P)
          worst = std::max(worst, std::abs(expected - clip.counts[h]));
        }
        c_k = std::max(c_k, worst / (T.diameter() * k));
      }
    }
    pooled.push_back(c_k);
    detail << "C(k=" << k << ")=" << format_g17(c_k) << "; ";
  }
  const double cmin = *std::min_element(pooled.begin(), pooled.end());
  const double cmax = *std::max_element(pooled.begin(), pooled.end());
  pass = pass && oracle_ok && cmax <= 2.0 * cmin;
  detail << "spread " << format_g17(cmax / cmin) << " (limit 2), counts "
         << (oracle_ok ? "match" : "DIVERGE from") << " the brute-force oracle";
  report(2, pass, detail.str());
}

// 3. Vanishing correctors: fitted slopes over k = 2..16.
void criterion_3() {
  const Tetra T({Vec3(0.05, 0, 0.1), Vec3(1.1, 0.15, 0), Vec3(0.2, 0.9, 0.1),
                 Vec3(0.3, 0.2, 1.05)});
  FieldMat A(3, 3);
  A << 1.0, 0.4, -0.2, 0.3, -0.7, 0.5, -0.6, 0.2, 0.9;
  std::vector<std::pair<Burgers, Vec3>> terms;
  for (const auto& t : coordinate_rank_one_decomposition(A).terms) terms.emplace_back(t.b, t.t);
  const AABox omega = T.bounding_box().inflated(0.2);
  ConstructionConfig cfg;
  cfg.truncation_radius = 4.0 * omega.diameter();
  std::vector<double> ks, omegas, rhos;
  for (int k = 2; k <= 16; ++k) {
    const auto c = build_tetra_measure(T, terms, k, {}, cfg, 3, 0);
    ks.push_back(k);
    omegas.push_back(total_variation(c.omega));
    rhos.push_back(total_variation_on(c.rho, omega));
  }
  const double so = fit_loglog_slope(ks, omegas);
  const double sr = fit_loglog_slope(ks, rhos);
  const bool pass = so <= -0.8 && sr <= -0.8;
  std::ostringstream detail;
  detail << "omega slope " << format_g17(so) << ", rho slope " << format_g17(sr)
         << " (limit -0.8, fit over all integer k in [2,16])";
  if (!pass) {
    // asymptotic window for reference
    std::vector<double> k4(ks.begin() + 2, ks.end()), o4(omegas.begin() + 2, omegas.end());
    detail << "; k>=4 window: omega slope " << format_g17(fit_loglog_slope(k4, o4));
  }
  report(3, pass, detail.str());
}

// 4. Weak* convergence against 10 polynomial test functions: dense direction
// matrices times monomials up to degree 2, so every test function carries an
// order-one signal against the field.
void criterion_4() {
  const Tetra T({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)});
  FieldMat A(3, 3);
  A << 1.0, 0.4, -0.2, 0.3, -0.7, 0.5, -0.6, 0.2, 0.9;
  std::vector<std::pair<Burgers, Vec3>> terms;
  for (const auto& t : coordinate_rank_one_decomposition(A).terms) terms.emplace_back(t.b, t.t);
  const Region inside = Region::of_tet(T);
  const std::vector<std::array<int, 3>> monos = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                                 {1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {2, 0, 0},
                                                 {0, 2, 0}, {0, 0, 2}};
  std::uint64_t st = 4242;
  std::vector<Eigen::MatrixXd> mats;
  for (std::size_t i = 0; i < monos.size(); ++i) {
    Eigen::MatrixXd M(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) M(r, c) = 2 * unit_uniform(st) - 1;
    mats.push_back(M);
  }
  auto monomial = [&](std::size_t i, const Vec3& x) {
    const auto [ax, ay, az] = monos[i];
    return std::pow(x.x(), ax) * std::pow(x.y(), ay) * std::pow(x.z(), az);
  };
  std::vector<double> exact;
  for (std::size_t i = 0; i < monos.size(); ++i) {
    const auto [ax, ay, az] = monos[i];
    exact.push_back(integrate_tet(T.vertices(), ax + ay + az, [&](const Vec3& x) {
      return (mats[i].cwiseProduct(A)).sum() * monomial(i, x);
    }));
  }
  ConstructionConfig cfg;
  bool pass = true;
  std::ostringstream detail;
  // gaps already below 0.1% of the field integral count as converged
  const double scale = A.norm() * T.volume();
  const double floor_gap = 1e-3 * scale;
  std::vector<double> prev(monos.size(), std::numeric_limits<double>::max());
  double final_gap = 0;
  for (int k : {2, 4, 8, 16}) {
    const auto c = build_tetra_measure(T, terms, k, {}, cfg, 3, 0);
    PolyhedralCurrent inT = c.nu;
    inT.append(c.omega);
    double worst = 0;
    for (std::size_t i = 0; i < monos.size(); ++i) {
      const double got = pair_with_matrix_field(
          inT, [&](const Vec3& x) { return Eigen::MatrixXd(mats[i] * monomial(i, x)); }, 3,
          inside);
      const double gap = std::abs(got - exact[i]);
      pass = pass && (gap < prev[i] || gap <= floor_gap);
      prev[i] = gap;
      worst = std::max(worst, gap);
    }
    final_gap = worst;
    detail << "k=" << k << " max gap " << format_g17(worst) << "; ";
  }
  const double budget = 0.05 * scale;
  pass = pass && final_gap <= budget;
  detail << "final vs 5% budget " << format_g17(budget) << " (noise floor "
         << format_g17(floor_gap) << ")";
  report(4, pass, detail.str());
}

// 5. Convex envelope against the SVD nuclear-norm oracle.
void criterion_5() {
  Density psi = Density::isotropic(3);
  Recession rec(psi);
  EnvelopeSolver env(rec, {.z_max = 3, .directions = 256, .lp_tol = 1e-9});
  bool pass = true;
  double worst_rel = 0;
  std::size_t worst_terms = 0;
  for (std::uint64_t seed = 200; seed < 210; ++seed) {
    const FieldMat A = oracle::random_matrix(3, seed);
    const auto cert = env.solve(A);
    const double nuc = oracle::nuclear_norm(A);
    const double rel = (cert.value - nuc) / nuc;
    worst_rel = std::max(worst_rel, rel);
    worst_terms = std::max(worst_terms, cert.terms.size());
    pass = pass && rel >= -1e-9 && rel <= 0.02;
    pass = pass && cert.terms.size() <= 9;
    const auto cert2 = env.solve(2.0 * A);
    pass = pass && cert2.value == 2.0 * cert.value;
  }
  std::ostringstream detail;
  detail << "worst gap to nuclear norm " << format_g17(100 * worst_rel)
         << "% (limit 2%), max certificate size " << worst_terms
         << " (limit 9), doubling exact";
  report(5, pass, detail.str());
}

// 6. Upper-bound sandwich on the unit cube.
void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto field = cube_field();
  Density psi = Density::isotropic(3);
  Recession rec(psi);
  UpperBoundConfig cfg;
  cfg.ks = {2, 4, 8};
  cfg.eps = 0.01;
  cfg.sigmas = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  const auto res = upper_bound_experiment(field, psi, rec, cfg);

  const double rhs = res.chain_rhs;  // E0 + eps L^3(Omega)
  const bool chain_ok = res.chain_lhs <= rhs * 1.03;
  bool sigma_ok = true;
  for (const auto& r : res.rows) {
    if (r.k != res.k_max) continue;
    sigma_ok = sigma_ok && r.e_sigma_finite && r.sigma_gap <= r.sigma_bound + 1e-9;
  }
  const double dt = seconds_since(t0);
  const bool pass = chain_ok && sigma_ok && dt <= 600.0;
  std::ostringstream detail;
  detail << "F_inf(mu_8) = " << format_g17(res.chain_lhs) << " vs E0 + eps L^3 = "
         << format_g17(rhs) << " (ratio " << format_g17(res.chain_lhs / rhs)
         << ", limit 1.03): " << (chain_ok ? "ok" : "exceeded")
         << "; sigma gaps within c_bar sigma sqrt(N) len: " << (sigma_ok ? "ok" : "violated")
         << "; k-trend of F_inf:";
  for (const auto& r : res.rows)
    if (r.sigma == cfg.sigmas[0]) detail << " " << format_g17(r.f_inf_full);
  detail << "; runtime " << int(dt) << "s (limit 600s)";
  report(6, pass, detail.str());
}

// 7. Density property suite.
void criterion_7() {
  bool pass = true;
  std::ostringstream detail;
  {
    const auto rep = check_density_properties(Density::isotropic(3));
    pass = pass && rep.growth_ok && rep.subadditive_ok;
    detail << "iso: " << (rep.growth_ok && rep.subadditive_ok ? "all pass" : "FAILED") << "; ";
  }
  {
    const Density sq = Density::isotropic_squared(3);
    const auto rep = check_density_properties(sq);
    const bool found = !rep.subadditive_ok && rep.subadd_violation > 0;
    pass = pass && found;
    if (found)
      detail << "|z|^2 witness: z=(" << rep.subadd_witness_z1.transpose() << "), z'=("
             << rep.subadd_witness_z2.transpose() << ") violates by "
             << format_g17(rep.subadd_violation) << "; ";
    else
      detail << "|z|^2 subadditivity violation NOT detected; ";
  }
  {
    const int s_max = 64;
    Recession rec(Density::isotropic_offset(3), s_max);
    Burgers b(3);
    b << 1, 0, 0;
    const auto r = rec.evaluate(b, Vec3(0, 0, 1));
    const bool ok = r.value.finite && std::abs(r.value.value - 1.0) <= 1.0 / s_max + 1e-12;
    pass = pass && ok;
    detail << "recession of |z|+1 at e1: " << format_g17(r.value.value) << " (|b|=1, slack 1/"
           << s_max << ")";
  }
  report(7, pass, detail.str());
}

// 8. Determinism: identical config and seed give byte-identical reports.
void criterion_8() {
  auto make_cfg = [](const std::string& out) {
    nlohmann::json j;
    j["schema"] = 1;
    j["mesh"] = {{"generator", "unit-cube-6tet"}};
    j["field"] = {{"potential_builtin", "quadratic-demo"}, {"burgers_dim", 3}};
    j["psi"] = {{"builtin", "iso"}};
    j["k"] = {2, 3};
    j["sigma"] = {0.5};
    j["envelope"] = {{"zmax", 2}, {"d", 48}};
    j["seed"] = 12345;
    j["out"] = out;
    return parse_config(j);
  };
  const fs::path base = fs::temp_directory_path() / "lt_acceptance_det";
  fs::remove_all(base);
  fs::create_directories(base);
  std::ostringstream sink;
  cmd_approximate(make_cfg((base / "a").string()), sink);
  cmd_approximate(make_cfg((base / "b").string()), sink);
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  bool pass = true;
  for (const std::string name :
       {"approximation.csv", "measure_k2.csv", "measure_k3.csv", "summary.txt"}) {
    const std::string sa = slurp(base / "a" / name), sb = slurp(base / "b" / name);
    pass = pass && !sa.empty() && sa == sb;
  }
  fs::remove_all(base);
  report(8, pass, pass ? "reports byte-identical across reruns" : "reports differ");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) +
                                                            " criteria failed")
            << "\n";
  return failures;
}
