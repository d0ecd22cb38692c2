#pragma once

#include "linetension/energy.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace linetension {

inline constexpr const char* kCodeVersion = "0.1.0";
inline constexpr int kConfigSchema = 1;

/// Experiment configuration, parsed from a JSON file. Validation collects
/// every violated constraint instead of stopping at the first.
struct RunConfig {
  int schema = kConfigSchema;
  // mesh
  std::string mesh_generator = "unit-cube-6tet";  // or "single-tet", "kuhn"
  int mesh_n = 1;
  std::string mesh_file;  // overrides the generator when nonempty
  // field
  std::string field_matrix_file;     // per-tet matrices
  std::string potential_file;        // coefficient list
  std::string potential_builtin;     // named demo potentials
  int burgers_dim = 3;
  // density
  std::string psi_builtin = "iso";
  std::string psi_table_file;
  double psi_c_lower = 1.0;
  double psi_c_upper = 1.0;
  // experiment
  std::vector<int> ks = {2, 4, 8};
  std::vector<double> sigmas = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  double eps = 0.01;
  EnvelopeParams envelope;
  // numerics
  std::uint64_t seed = 1;
  ConstructionConfig construction;
  int quadrature_order = 4;
  // output
  std::string out_dir = "out";
  std::string geometry_format = "csv";  // csv | obj

  std::string canonical_json() const;
};

namespace detail {

inline void config_errors(const RunConfig& c, std::vector<std::string>& errs) {
  if (c.schema != kConfigSchema) errs.push_back("schema: expected " + std::to_string(kConfigSchema));
  if (c.ks.empty()) errs.push_back("k: list must be nonempty");
  for (int k : c.ks)
    if (k < 2) errs.push_back("k: values must be >= 2 (got " + std::to_string(k) + ")");
  if (c.sigmas.empty()) errs.push_back("sigma: list must be nonempty");
  for (double s : c.sigmas)
    if (!(s > 0)) errs.push_back("sigma: values must be positive");
  if (!(c.eps >= 0)) errs.push_back("eps: must be nonnegative");
  if (c.envelope.z_max < 1) errs.push_back("envelope.zmax: must be >= 1");
  if (c.envelope.directions < 1) errs.push_back("envelope.d: must be >= 1");
  if (c.burgers_dim < 1) errs.push_back("burgers_dim: must be >= 1");
  if (c.mesh_file.empty() && c.mesh_generator != "single-tet" &&
      c.mesh_generator != "unit-cube-6tet" && c.mesh_generator != "kuhn" &&
      c.mesh_generator != "kuhn-subdivision")
    errs.push_back("mesh.generator: unknown '" + c.mesh_generator + "'");
  if (c.mesh_generator == "kuhn" && c.mesh_n < 1) errs.push_back("mesh.n: must be >= 1");
  const int sources = int(!c.field_matrix_file.empty()) + int(!c.potential_file.empty()) +
                      int(!c.potential_builtin.empty());
  if (sources != 1)
    errs.push_back("field: exactly one of matrix_file, potential_file, potential_builtin");
  if (c.psi_builtin.empty() && c.psi_table_file.empty())
    errs.push_back("psi: builtin or table required");
  if (c.geometry_format != "csv" && c.geometry_format != "obj")
    errs.push_back("format: must be csv or obj");
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig c;
  c.schema = j.value("schema", kConfigSchema);
  if (j.contains("mesh")) {
    const auto& m = j.at("mesh");
    c.mesh_generator = m.value("generator", c.mesh_generator);
    c.mesh_n = m.value("n", c.mesh_n);
    c.mesh_file = m.value("file", c.mesh_file);
  }
  if (j.contains("field")) {
    const auto& f = j.at("field");
    c.field_matrix_file = f.value("matrix_file", c.field_matrix_file);
    c.potential_file = f.value("potential_file", c.potential_file);
    c.potential_builtin = f.value("potential_builtin", c.potential_builtin);
    c.burgers_dim = f.value("burgers_dim", c.burgers_dim);
  }
  if (j.contains("psi")) {
    const auto& p = j.at("psi");
    c.psi_builtin = p.value("builtin", std::string());
    c.psi_table_file = p.value("table", std::string());
    c.psi_c_lower = p.value("c", 1.0);
    c.psi_c_upper = p.value("cbar", 1.0);
    if (c.psi_builtin.empty() && c.psi_table_file.empty()) c.psi_builtin = "iso";
  }
  c.ks = j.value("k", c.ks);
  c.sigmas = j.value("sigma", c.sigmas);
  c.eps = j.value("eps", c.eps);
  if (j.contains("envelope")) {
    c.envelope.z_max = j.at("envelope").value("zmax", c.envelope.z_max);
    c.envelope.directions = j.at("envelope").value("d", c.envelope.directions);
    c.envelope.lp_tol = j.at("envelope").value("lp_tol", c.envelope.lp_tol);
  }
  c.seed = j.value("seed", c.seed);
  c.construction.seed = c.seed;
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    c.construction.eps_rel = t.value("intersection_eps_rel", c.construction.eps_rel);
    c.construction.delta_angle = t.value("ray_angle", c.construction.delta_angle);
  }
  c.quadrature_order = j.value("quadrature_order", c.quadrature_order);
  c.out_dir = j.value("out", c.out_dir);
  c.geometry_format = j.value("format", c.geometry_format);

  std::vector<std::string> errs;
  detail::config_errors(c, errs);
  if (!errs.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw std::runtime_error(msg);
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  f >> j;
  return parse_config(j);
}

inline std::string RunConfig::canonical_json() const {
  nlohmann::json j;
  j["schema"] = schema;
  j["mesh"] = {{"generator", mesh_generator}, {"n", mesh_n}, {"file", mesh_file}};
  j["field"] = {{"matrix_file", field_matrix_file},
                {"potential_file", potential_file},
                {"potential_builtin", potential_builtin},
                {"burgers_dim", burgers_dim}};
  j["psi"] = {{"builtin", psi_builtin},
              {"table", psi_table_file},
              {"c", psi_c_lower},
              {"cbar", psi_c_upper}};
  j["k"] = ks;
  j["sigma"] = sigmas;
  j["eps"] = eps;
  j["envelope"] = {{"zmax", envelope.z_max}, {"d", envelope.directions}, {"lp_tol", envelope.lp_tol}};
  j["seed"] = seed;
  j["quadrature_order"] = quadrature_order;
  j["format"] = geometry_format;
  return j.dump();  // nlohmann emits object keys sorted, so this is canonical
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Assembling the experiment objects from a config
// ---------------------------------------------------------------------------

/// Demo potentials usable directly from a config.
inline PolynomialMatrix builtin_potential(const std::string& name, int burgers_dim) {
  PolynomialMatrix phi(burgers_dim, 3);
  auto poly = [](std::vector<Polynomial3::Term> t) { return Polynomial3(std::move(t)); };
  if (name == "zero") return phi;
  if (name == "linear-demo") {
    // constant curl per row
    if (burgers_dim >= 1) phi.at(0, 2) = poly({{0, 1, 0, 1.0}});   // curl row0 = e1
    if (burgers_dim >= 2) phi.at(1, 0) = poly({{0, 0, 1, 1.0}});   // curl row1 = e2
    if (burgers_dim >= 3) phi.at(2, 1) = poly({{1, 0, 0, 1.0}});   // curl row2 = e3
    return phi;
  }
  if (name == "quadratic-demo") {
    if (burgers_dim >= 1) {
      phi.at(0, 0) = poly({{0, 1, 1, 1.0}});  // y z
      phi.at(0, 2) = poly({{2, 0, 0, 1.0}});  // x^2
    }
    if (burgers_dim >= 2) phi.at(1, 1) = poly({{1, 0, 1, 0.5}});  // 0.5 x z
    if (burgers_dim >= 3) phi.at(2, 0) = poly({{0, 2, 0, 1.0}, {0, 0, 1, 0.3}});  // y^2 + 0.3 z
    return phi;
  }
  throw std::invalid_argument("unknown builtin potential: " + name);
}

inline Triangulation build_mesh(const RunConfig& c) {
  if (!c.mesh_file.empty()) return load_mesh_file(c.mesh_file);
  return make_mesh_generator(c.mesh_generator, c.mesh_n);
}

inline PiecewiseConstantField build_field(const RunConfig& c, const Triangulation& mesh) {
  if (!c.field_matrix_file.empty()) {
    std::ifstream f(c.field_matrix_file);
    if (!f) throw std::runtime_error("cannot open field file: " + c.field_matrix_file);
    return PiecewiseConstantField(mesh, load_field_matrices(f, mesh.tets().size()));
  }
  PolynomialMatrix phi = c.potential_file.empty()
                             ? builtin_potential(c.potential_builtin, c.burgers_dim)
                             : [&] {
                                 std::ifstream f(c.potential_file);
                                 if (!f)
                                   throw std::runtime_error("cannot open potential file: " +
                                                            c.potential_file);
                                 return load_potential_csv(f, c.burgers_dim);
                               }();
  return curl_of_interpolated_potential(phi, mesh);
}

inline Density build_density(const RunConfig& c) {
  if (!c.psi_table_file.empty())
    return Density::from_table_file(c.psi_table_file, c.burgers_dim, c.psi_c_lower, c.psi_c_upper);
  return Density::from_builtin(c.psi_builtin, c.burgers_dim);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ApproximationRow {
  int k = 0;
  std::size_t segments = 0;
  double mu_mass = 0, nu_mass = 0, omega_mass = 0, rho_mass = 0;
  double ledger_residual = 0;   // worst interior node mass
  double weakstar_gap = 0;      // max over the polynomial battery
  int culled = 0;
};

struct ApproximationReport {
  std::vector<ApproximationRow> rows;
  double omega_rate = 0, rho_rate = 0;
  bool gaps_decreasing = true;
};

/// Fixed low-degree matrix polynomial battery for weak* gap curves.
inline std::vector<PolynomialMatrix> weakstar_battery(int burgers_dim) {
  std::vector<PolynomialMatrix> out;
  auto mono = [&](int r, int c, int ax, int ay, int az, double coeff) {
    PolynomialMatrix m(burgers_dim, 3);
    m.at(r % burgers_dim, c) = Polynomial3::monomial(ax, ay, az, coeff);
    return m;
  };
  out.push_back(mono(0, 0, 0, 0, 0, 1.0));
  out.push_back(mono(0, 2, 0, 0, 0, 1.0));
  out.push_back(mono(1, 1, 0, 0, 0, 1.0));
  out.push_back(mono(0, 0, 1, 0, 0, 1.0));
  out.push_back(mono(1, 2, 0, 1, 0, 1.0));
  out.push_back(mono(2, 0, 0, 0, 1, 1.0));
  out.push_back(mono(2, 2, 1, 1, 0, 1.0));
  out.push_back(mono(0, 1, 2, 0, 0, 1.0));
  out.push_back(mono(1, 0, 0, 2, 0, 1.0));
  out.push_back(mono(2, 1, 0, 0, 2, 1.0));
  return out;
}

/// Runs the construction pipeline over the k list and measures masses, ledger
/// residuals and weak* gaps against the exact field integrals.
inline ApproximationReport approximate_measure_pipeline(const PiecewiseConstantField& field,
                                                        const std::vector<int>& ks,
                                                        const ConstructionConfig& cfg,
                                                        int quadrature_order = 4,
                                                        std::vector<GluedMeasure>* keep = nullptr) {
  ApproximationReport rep;
  const AABox box = field.mesh.domain();
  const Region omega = Region::of_box(box);
  const auto battery = weakstar_battery(field.burgers_dim);
  // exact integrals per test function
  std::vector<double> exact(battery.size(), 0.0);
  for (std::size_t b = 0; b < battery.size(); ++b)
    for (std::size_t i = 0; i < field.matrices.size(); ++i) {
      const auto& A = field.matrices[i];
      exact[b] += integrate_tet(field.mesh.tets()[i].vertices(), battery[b].degree(),
                                [&](const Vec3& x) {
                                  return (battery[b](x).cwiseProduct(A)).sum();
                                });
    }
  std::vector<double> kvals, omegas, rhos;
  double prev_gap = std::numeric_limits<double>::max();
  const auto decomps = coordinate_decompositions(field);
  for (int k : ks) {
    GluedMeasure g = glue(field, decomps, k, cfg);
    ApproximationRow row;
    row.k = k;
    row.segments = g.mu.size();
    row.mu_mass = total_variation_on(g.mu, box);
    row.nu_mass = g.nu_mass();
    row.omega_mass = g.omega_mass();
    row.rho_mass = g.rho_mass_on(box);
    for (const auto& t : g.per_tet) row.culled += t.culled_lines;
    LedgerOptions lopt;
    lopt.mass_drop_rel = 0.0;
    const BoundaryLedger led = boundary_ledger(g.mu, lopt);
    const double margin = 1e-9 * box.diameter();
    for (const auto& [key, e] : led.entries)
      if (box.interior_margin(e.pos) > margin)
        row.ledger_residual = std::max(row.ledger_residual, e.mass.norm());
    double gap = 0;
    for (std::size_t b = 0; b < battery.size(); ++b) {
      const double q = pair_with_matrix_field(
          g.mu, [&](const Vec3& x) { return battery[b](x); }, quadrature_order, omega);
      gap = std::max(gap, std::abs(q - exact[b]));
    }
    row.weakstar_gap = gap;
    rep.gaps_decreasing = rep.gaps_decreasing && gap <= prev_gap;
    prev_gap = gap;
    kvals.push_back(k);
    omegas.push_back(std::max(row.omega_mass, 1e-300));
    rhos.push_back(std::max(row.rho_mass, 1e-300));
    rep.rows.push_back(row);
    if (keep) keep->push_back(std::move(g));
  }
  if (kvals.size() >= 2) {
    rep.omega_rate = fit_loglog_slope(kvals, omegas);
    rep.rho_rate = fit_loglog_slope(kvals, rhos);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// CSV / summary writers (deterministic byte-for-byte for a fixed config+seed)
// ---------------------------------------------------------------------------

inline void write_approximation_csv(const ApproximationReport& rep, std::ostream& out) {
  out << "k,segments,mu_mass,nu_mass,omega_mass,rho_mass,ledger_residual,weakstar_gap,culled\n";
  for (const auto& r : rep.rows)
    out << r.k << ',' << r.segments << ',' << format_g17(r.mu_mass) << ','
        << format_g17(r.nu_mass) << ',' << format_g17(r.omega_mass) << ','
        << format_g17(r.rho_mass) << ',' << format_g17(r.ledger_residual) << ','
        << format_g17(r.weakstar_gap) << ',' << r.culled << "\n";
}

inline void write_energy_csv(const UpperBoundResult& res, std::ostream& out) {
  out << "k,sigma,eps,e0,cert_budget,f_inf_full,f_inf_main,eta_mass,mu_mass,e_sigma,"
         "e_sigma_finite,sigma_gap,sigma_bound,loop_length\n";
  for (const auto& r : res.rows)
    out << r.k << ',' << format_g17(r.sigma) << ',' << format_g17(r.eps) << ','
        << format_g17(r.e0) << ',' << format_g17(r.cert_budget) << ','
        << format_g17(r.f_inf_full) << ',' << format_g17(r.f_inf_main) << ','
        << format_g17(r.eta_mass) << ',' << format_g17(r.mu_mass) << ','
        << format_g17(r.e_sigma_value) << ',' << (r.e_sigma_finite ? 1 : 0) << ','
        << format_g17(r.sigma_gap) << ',' << format_g17(r.sigma_bound) << ','
        << format_g17(r.loop_length) << "\n";
}

inline void write_manifest(const RunConfig& cfg, const std::string& path) {
  nlohmann::json j;
  j["schema"] = cfg.schema;
  j["code_version"] = kCodeVersion;
  j["config_hash"] = fnv1a64(cfg.canonical_json());
  j["seed"] = cfg.seed;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write manifest: " + path);
  f << j.dump(2) << "\n";
}

struct SummaryData {
  ApproximationReport approx;
  std::optional<UpperBoundResult> energy;
  std::optional<LowerBoundReport> lower;
  bool psi_assumed_elliptic = false;
};

inline void write_summary(const SummaryData& s, std::ostream& out) {
  out << "line-tension run summary\n";
  out << "========================\n";
  if (!s.approx.rows.empty()) {
    out << "approximation (per k): mass curves and residuals\n";
    for (const auto& r : s.approx.rows)
      out << "  k=" << r.k << "  |mu|=" << format_g17(r.mu_mass)
          << "  |omega|=" << format_g17(r.omega_mass) << "  |rho|=" << format_g17(r.rho_mass)
          << "  ledger=" << format_g17(r.ledger_residual)
          << "  weak*gap=" << format_g17(r.weakstar_gap) << "\n";
    out << "  fitted rates: omega " << format_g17(s.approx.omega_rate) << ", rho "
        << format_g17(s.approx.rho_rate) << "\n";
    out << "  weak* gaps decreasing: " << (s.approx.gaps_decreasing ? "yes" : "no") << "\n";
  }
  if (s.energy) {
    const auto& e = *s.energy;
    out << "energy experiment\n";
    out << "  E0 = " << format_g17(e.e0) << "\n";
    out << "  F_inf(mu_k, Omega) at k=" << e.k_max << " = " << format_g17(e.chain_lhs) << "\n";
    out << "  E0 + eps L^3 = " << format_g17(e.chain_rhs) << "\n";
    out << "  fitted sigma rate of |E_sigma - F_inf| at k_max: " << format_g17(e.sigma_rate)
        << "\n";
  }
  if (s.lower) {
    out << "lower-bound diagnostics\n";
    out << "  one-sided checks: " << (s.lower->all_ok ? "pass" : "FAIL") << "\n";
    out << "  sandwich: E0 = " << format_g17(s.lower->sandwich_lo)
        << " <= E_sigma in [" << format_g17(s.lower->e_sigma_min) << ", "
        << format_g17(s.lower->e_sigma_max) << "] vs E0 + eps L^3 = "
        << format_g17(s.lower->sandwich_hi) << "\n";
  }
  if (s.psi_assumed_elliptic)
    out << "note: table density; ellipticity assumed, only the necessary conditions "
           "(subadditivity, linear growth) were checked\n";
}

// ---------------------------------------------------------------------------
// Subcommand drivers
// ---------------------------------------------------------------------------

inline void export_geometry(const PolyhedralCurrent& mu, const std::string& path,
                            const std::string& format,
                            std::optional<AABox> domain = std::nullopt) {
  if (format == "csv") {
    export_csv(mu, path);
  } else if (format == "obj") {
    const AABox box = domain.value_or(mu.bounding_box());
    export_obj(decompose_into_loops(close_at_infinity(mu, box)), path);
  } else {
    throw std::invalid_argument("export_geometry: format must be csv or obj");
  }
}

inline int cmd_approximate(const RunConfig& cfg, std::ostream& log) {
  const auto mesh = build_mesh(cfg);
  const auto field = build_field(cfg, mesh);
  std::filesystem::create_directories(cfg.out_dir);
  std::vector<GluedMeasure> measures;
  const auto rep =
      approximate_measure_pipeline(field, cfg.ks, cfg.construction, cfg.quadrature_order,
                                   &measures);
  {
    std::ofstream f(cfg.out_dir + "/approximation.csv");
    write_approximation_csv(rep, f);
  }
  for (std::size_t i = 0; i < measures.size(); ++i) {
    const std::string ext = cfg.geometry_format == "obj" ? ".obj" : ".csv";
    export_geometry(measures[i].mu,
                    cfg.out_dir + "/measure_k" + std::to_string(cfg.ks[i]) + ext,
                    cfg.geometry_format, mesh.domain());
  }
  write_manifest(cfg, cfg.out_dir + "/manifest.json");
  SummaryData s;
  s.approx = rep;
  s.psi_assumed_elliptic = false;
  {
    std::ofstream f(cfg.out_dir + "/summary.txt");
    write_summary(s, f);
  }
  write_summary(s, log);
  return 0;
}

inline int cmd_energy(const RunConfig& cfg, std::ostream& log) {
  const auto mesh = build_mesh(cfg);
  const auto field = build_field(cfg, mesh);
  const Density psi = build_density(cfg);
  Recession rec(psi);
  UpperBoundConfig ucfg;
  ucfg.ks = cfg.ks;
  ucfg.sigmas = cfg.sigmas;
  ucfg.eps = cfg.eps;
  ucfg.envelope = cfg.envelope;
  ucfg.construction = cfg.construction;
  const auto res = upper_bound_experiment(field, psi, rec, ucfg);
  const auto lower = lower_bound_diagnostics(field, psi, rec, res, cfg.envelope);
  std::filesystem::create_directories(cfg.out_dir);
  {
    std::ofstream f(cfg.out_dir + "/energy.csv");
    write_energy_csv(res, f);
  }
  {
    const std::string ext = cfg.geometry_format == "obj" ? ".obj" : ".csv";
    if (cfg.geometry_format == "obj")
      export_obj(res.loops_kmax, cfg.out_dir + "/recovery_kmax" + ext);
    else
      export_csv(res.mu_kmax, cfg.out_dir + "/recovery_kmax" + ext);
  }
  write_manifest(cfg, cfg.out_dir + "/manifest.json");
  SummaryData s;
  s.energy = res;
  s.lower = lower;
  s.psi_assumed_elliptic = psi.assumed_elliptic();
  {
    std::ofstream f(cfg.out_dir + "/summary.txt");
    write_summary(s, f);
  }
  write_summary(s, log);
  return lower.all_ok ? 0 : 1;
}

inline int cmd_envelope(const RunConfig& cfg, std::ostream& log) {
  const auto mesh = build_mesh(cfg);
  const auto field = build_field(cfg, mesh);
  const Density psi = build_density(cfg);
  Recession rec(psi);
  EnvelopeSolver env(rec, cfg.envelope);
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream f(cfg.out_dir + "/envelope.csv");
  f << "tet,g_tilde,terms,lp_iterations,certificate_residual\n";
  for (std::size_t i = 0; i < field.matrices.size(); ++i) {
    const auto cert = env.solve(field.matrices[i]);
    const double resid = (cert.reconstruct(field.burgers_dim) - field.matrices[i]).norm();
    f << i << ',' << format_g17(cert.value) << ',' << cert.terms.size() << ','
      << cert.lp_iterations << ',' << format_g17(resid) << "\n";
    log << "tet " << i << ": g~ = " << format_g17(cert.value) << " with " << cert.terms.size()
        << " terms\n";
  }
  write_manifest(cfg, cfg.out_dir + "/manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// verify: the invariant suites at desk scale
// ---------------------------------------------------------------------------

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<VerifyCheck> run_verification(const RunConfig& cfg);

inline int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const auto checks = run_verification(cfg);
  bool all = true;
  for (const auto& c : checks) {
    log << (c.pass ? "PASS" : "FAIL") << "  " << c.name;
    if (!c.detail.empty()) log << "  (" << c.detail << ")";
    log << "\n";
    all = all && c.pass;
  }
  return all ? 0 : 1;
}

inline std::vector<VerifyCheck> run_verification(const RunConfig& cfg) {
  std::vector<VerifyCheck> out;
  auto add = [&](const std::string& name, bool pass, std::string detail = "") {
    out.push_back({name, pass, std::move(detail)});
  };

  const auto mesh = build_mesh(cfg);
  add("mesh conforming", mesh.conformity().conforming, mesh.conformity().detail);

  // boundary subdivision tiles the boundary
  {
    const Tetra& T = mesh.tets()[0];
    bool ok = true;
    double worst = 0;
    for (int k = 1; k <= 8; ++k) {
      const FaceGrid g = subdivide_boundary(T, k);
      double sum = 0;
      for (const auto& t : g.outer) sum += t.area;
      const double rel = std::abs(sum - T.surface_area()) / T.surface_area();
      worst = std::max(worst, rel);
      ok = ok && rel < 1e-12 && g.outer.size() == std::size_t(4) * k * k;
    }
    add("boundary subdivision tiles dT", ok, "max rel area error " + format_g17(worst));
  }

  const auto field = build_field(cfg, mesh);
  const auto jumps = check_normal_jumps(field);
  add("normal jumps", jumps.pass(1e-10), "max rel " + format_g17(jumps.max_relative));

  // coordinate decomposition re-sums exactly
  {
    bool ok = true;
    for (const auto& A : field.matrices) {
      const auto d = coordinate_rank_one_decomposition(A);
      ok = ok && (d.reconstruct() - A).norm() <= 1e-13 * std::max(1.0, A.norm());
      ok = ok && int(d.terms.size()) <= 3 * field.burgers_dim;
    }
    add("coordinate rank-one decomposition", ok);
  }

  const int k0 = *std::min_element(cfg.ks.begin(), cfg.ks.end());
  {
    GluedMeasure g = glue(field, coordinate_decompositions(field), k0, cfg.construction);
    const double mass = total_variation_on(g.mu, mesh.domain());
    const auto div = check_divergence_free(g.mu, mesh.domain(), 1e-10 * std::max(mass, 1e-300));
    add("glued measure divergence free", div.divergence_free,
        "worst interior node " + format_g17(div.worst_mass_norm));

    // ledger identity: <nu+omega, grad phi> = sum_h <B, phi(d)> per tet
    const int N = field.burgers_dim;
    bool ledger_ok = true;
    double worst = 0;
    auto phi = [N](const Vec3& x) {
      Eigen::VectorXd v(N);
      for (int i = 0; i < N; ++i)
        v[i] = i % 3 == 0 ? std::sin(x.x() + i) : (i % 3 == 1 ? x.y() * x.z() : std::cos(x.z()));
      return v;
    };
    for (const auto& tc : g.per_tet) {
      PolyhedralCurrent nw = tc.nu;
      nw.append(tc.omega);
      double expected = 0;
      for (std::size_t h = 0; h < tc.B.size(); ++h)
        expected += tc.B[h].dot(phi(tc.grid.outer[h].barycenter));
      const double got = pair_with_gradient(nw, phi);
      const double scale = std::max(1.0, total_variation(nw));
      worst = std::max(worst, std::abs(got - expected) / scale);
      ledger_ok = ledger_ok && std::abs(got - expected) <= 1e-12 * scale;
    }
    add("boundary mass identity", ledger_ok, "worst rel " + format_g17(worst));
  }

  const Density psi = build_density(cfg);
  {
    const auto rep = check_density_properties(psi);
    add("density growth bounds", rep.growth_ok,
        "fitted c=" + format_g17(rep.fitted_c_lower) + " cbar=" + format_g17(rep.fitted_c_upper));
    add("density subadditive", rep.subadditive_ok,
        "worst violation " + format_g17(rep.subadd_violation));
  }
  {
    Recession rec(psi);
    EnvelopeSolver env(rec, cfg.envelope);
    bool ok = true;
    std::uint64_t st = cfg.seed + 17;
    for (int i = 0; i < 3; ++i) {
      FieldMat A(field.burgers_dim, 3);
      for (int r = 0; r < A.rows(); ++r)
        for (int c = 0; c < 3; ++c) A(r, c) = 2.0 * unit_uniform(st) - 1.0;
      const auto cert = env.solve(A);
      ok = ok && (cert.reconstruct(field.burgers_dim) - A).norm() <= 1e-7 * A.norm();
      ok = ok && int(cert.terms.size()) <= 3 * field.burgers_dim;
      const auto cert2 = env.solve(2.0 * A);
      ok = ok && cert2.value == 2.0 * cert.value;
    }
    add("envelope certificates", ok);
  }
  return out;
}

/// Regenerates summary.txt from the CSV artifacts of a previous run.
inline int cmd_report(const std::string& out_dir, std::ostream& log) {
  const std::string apath = out_dir + "/approximation.csv";
  const std::string epath = out_dir + "/energy.csv";
  bool any = false;
  std::ostringstream summary;
  summary << "line-tension run report (from " << out_dir << ")\n";
  summary << "==========================\n";
  auto echo_csv = [&](const std::string& path, const std::string& title) {
    std::ifstream f(path);
    if (!f) return false;
    summary << title << "\n";
    std::string line;
    while (std::getline(f, line)) summary << "  " << line << "\n";
    return true;
  };
  any |= echo_csv(apath, "approximation rows");
  any |= echo_csv(epath, "energy rows");
  if (!any) {
    log << "no report artifacts found in " << out_dir << "\n";
    return 1;
  }
  std::ofstream f(out_dir + "/summary.txt");
  f << summary.str();
  log << summary.str();
  return 0;
}

}  // namespace linetension
