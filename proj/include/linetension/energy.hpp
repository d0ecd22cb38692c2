#pragma once

#include "linetension/construction.hpp"
#include "linetension/densities.hpp"

namespace linetension {

/// E_sigma(mu) = sum sigma psi(b/sigma, tau) H^1(segment ∩ omega) for
/// multiplicities in sigma Z^N; the +infinity flag when some b/sigma is not
/// integral within tolerance. Collinear overlaps are summed before evaluating
/// psi, so coincident loop segments contribute through their total
/// multiplicity.
inline EnergyValue e_sigma(const PolyhedralCurrent& mu, const Density& psi, double sigma,
                           const Region& omega = Region::all(), double int_tol = 1e-9) {
  if (!(sigma > 0)) throw std::invalid_argument("e_sigma: sigma must be positive");
  EnergyValue total;
  const PolyhedralCurrent flat = mu.flattened();
  for (const auto& seg : flat.segments()) {
    const double len = omega.clip_length(seg.a, seg.b);
    if (len <= 0) continue;
    Burgers z = seg.burgers / sigma;
    for (int i = 0; i < z.size(); ++i) {
      const double r = std::round(z[i]);
      if (std::abs(z[i] - r) > int_tol * std::max(1.0, std::abs(z[i])))
        return EnergyValue::infinity();
      z[i] = r;
    }
    total += sigma * psi(z, seg.tangent()) * len;
  }
  return total;
}

/// F_inf(mu, omega) = integral of psi_inf(theta, tau) over the support inside
/// omega; +infinity when a multiplicity leaves the rational-direction cone.
inline EnergyValue f_infinity(const PolyhedralCurrent& mu, const Recession& rec,
                              const Region& omega = Region::all()) {
  EnergyValue total;
  const PolyhedralCurrent flat = mu.flattened();
  for (const auto& seg : flat.segments()) {
    const double len = omega.clip_length(seg.a, seg.b);
    if (len <= 0) continue;
    const EnergyValue v = rec(seg.burgers, seg.tangent());
    if (!v.finite) return EnergyValue::infinity();
    total += v.value * len;
  }
  return total;
}

/// Direction-cached evaluation of A -> g~(A) for rank-one targets; the LP is
/// 1-homogeneous so only the normalized direction is solved for. The cache is
/// capped: beyond the cap the recession value stands in (an upper bound for g
/// on rank-one matrices, reported as such).
class GTildeCache {
 public:
  GTildeCache(const EnvelopeSolver& env, const Recession& rec, std::size_t max_solves = 512)
      : env_(&env), rec_(&rec), cap_(max_solves) {}

  double rank_one_value(const Burgers& theta, const Vec3& tau) {
    const double norm = theta.norm();
    if (norm == 0.0) return 0.0;
    std::array<std::int64_t, 16> key{};
    const Burgers th = theta / norm;
    for (int i = 0; i < th.size() && i < 12; ++i) key[i] = std::llround(th[i] * 1024.0);
    for (int i = 0; i < 3; ++i) key[12 + i] = std::llround(tau[i] * 1024.0);
    auto it = cache_.find(key);
    if (it != cache_.end()) return norm * it->second;
    double unit_value;
    if (cache_.size() >= cap_) {
      ++overflow_;
      const EnergyValue v = (*rec_)(th, tau);
      unit_value = v.finite ? v.value : rec_->base().c_upper();
    } else {
      unit_value = env_->solve(th * tau.transpose()).value;
    }
    cache_.emplace(key, unit_value);
    return norm * unit_value;
  }

  std::size_t overflow_count() const { return overflow_; }

 private:
  const EnvelopeSolver* env_;
  const Recession* rec_;
  std::size_t cap_;
  std::map<std::array<std::int64_t, 16>, double> cache_;
  std::size_t overflow_ = 0;
};

/// E_0 evaluated on a singular polyhedral measure: integral of g~ of the
/// rank-one density over the support.
inline double e0_of_current(const PolyhedralCurrent& mu, GTildeCache& cache,
                            const Region& omega = Region::all()) {
  double s = 0;
  const PolyhedralCurrent flat = mu.flattened();
  for (const auto& seg : flat.segments()) {
    const double len = omega.clip_length(seg.a, seg.b);
    if (len <= 0) continue;
    s += cache.rank_one_value(seg.burgers, seg.tangent()) * len;
  }
  return s;
}

// ---------------------------------------------------------------------------
// The upper-bound experiment (recovery-sequence construction)
// ---------------------------------------------------------------------------

struct UpperBoundRow {
  int k = 0;
  double sigma = 0.0;
  double eps = 0.0;
  double e0 = 0.0;               // sum_i g~(A_i) vol(T_i ∩ Ω)
  double cert_budget = 0.0;      // sum_i (g~(A_i) + eps) vol(T_i ∩ Ω)
  double f_inf_full = 0.0;       // F_inf(mu_k, Ω)
  double f_inf_main = 0.0;       // chord part only
  double eta_mass = 0.0;         // ||omega||(Ω) + ||rho||(Ω)
  double mu_mass = 0.0;          // ||mu_k||(Ω)
  double e_sigma_value = 0.0;
  bool e_sigma_finite = true;
  double sigma_gap = 0.0;        // |E_sigma - F_inf(mu_k)|
  double sigma_bound = 0.0;      // cbar sigma sqrt(N) total loop length
  double loop_length = 0.0;      // sum of loop lengths inside Ω
};

struct UpperBoundResult {
  std::vector<UpperBoundRow> rows;
  std::vector<EnvelopeCertificate> certificates;
  double e0 = 0.0;
  double eps = 0.0;
  double domain_volume = 0.0;
  double chain_lhs = 0.0;  // F_inf at the largest k
  double chain_rhs = 0.0;  // E0 + eps * L^3(Ω)
  double sigma_rate = 0.0; // fitted slope of sigma_gap vs sigma at largest k
  int k_max = 0;
  PolyhedralCurrent mu_kmax{1};
  std::vector<Loop> loops_kmax;
};

struct UpperBoundConfig {
  std::vector<int> ks = {2, 4, 8};
  std::vector<double> sigmas = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  double eps = 0.01;
  EnvelopeParams envelope;
  ConstructionConfig construction;
  bool decompose_all_k = false;  // sigma study at every k instead of only k_max
};

/// Builds the recovery sequence of the upper-bound proof in computable form:
/// per-tetrahedron envelope certificates (the eps-optimal rank-one
/// decompositions), the glued lattice measures mu_k, the auxiliary energies
/// F_inf(mu_k), and the floor-rounded lattice measures with their E_sigma.
inline UpperBoundResult upper_bound_experiment(const PiecewiseConstantField& field,
                                               const Density& psi, const Recession& rec,
                                               const UpperBoundConfig& cfg) {
  if (cfg.ks.empty() || cfg.sigmas.empty())
    throw std::invalid_argument("upper_bound_experiment: k and sigma lists must be nonempty");
  UpperBoundResult out;
  out.eps = cfg.eps;
  out.k_max = *std::max_element(cfg.ks.begin(), cfg.ks.end());
  const AABox omega_box = field.mesh.domain();
  const Region omega = Region::of_box(omega_box);
  out.domain_volume = omega_box.volume();

  EnvelopeSolver env(rec, cfg.envelope);
  std::vector<std::vector<std::pair<Burgers, Vec3>>> decomps;
  double e0 = 0.0, budget = 0.0;
  for (std::size_t i = 0; i < field.matrices.size(); ++i) {
    EnvelopeCertificate cert = env.solve(field.matrices[i]);
    const double vol = tet_box_volume(field.mesh.tets()[i], omega_box);
    e0 += cert.value * vol;
    budget += (cert.value + cfg.eps) * vol;
    std::vector<std::pair<Burgers, Vec3>> terms;
    for (const auto& term : cert.terms) terms.emplace_back(term.b, term.t);
    decomps.push_back(std::move(terms));
    out.certificates.push_back(std::move(cert));
  }
  out.e0 = e0;
  out.chain_rhs = e0 + cfg.eps * out.domain_volume;

  const double cbar = psi.c_upper() > 0 ? psi.c_upper() : 1.0;
  const double sqrtN = std::sqrt(double(field.burgers_dim));

  std::vector<double> gaps_at_kmax, sigmas_at_kmax;
  for (int k : cfg.ks) {
    GluedMeasure glued = glue(field, decomps, k, cfg.construction);
    const EnergyValue fk = f_infinity(glued.mu, rec, omega);
    EnergyValue fmain;
    for (const auto& t : glued.per_tet) fmain += f_infinity(t.nu, rec, omega);
    const double eta_mass = glued.omega_mass() + glued.rho_mass_on(omega_box);
    const double mu_mass = total_variation_on(glued.mu, omega_box);
    if (k == out.k_max) out.chain_lhs = fk.finite ? fk.value : -1.0;

    const bool do_sigma = cfg.decompose_all_k || k == out.k_max;
    std::vector<Loop> loops;
    double loop_len = 0.0;
    if (do_sigma) {
      loops = decompose_into_loops(close_at_infinity(glued.mu, field.mesh));
      for (const auto& l : loops) loop_len += l.length_in(omega);
    }
    for (double sigma : cfg.sigmas) {
      UpperBoundRow row;
      row.k = k;
      row.sigma = sigma;
      row.eps = cfg.eps;
      row.e0 = e0;
      row.cert_budget = budget;
      row.f_inf_full = fk.finite ? fk.value : -1.0;
      row.f_inf_main = fmain.finite ? fmain.value : -1.0;
      row.eta_mass = eta_mass;
      row.mu_mass = mu_mass;
      row.loop_length = loop_len;
      if (do_sigma) {
        const PolyhedralCurrent mu_hat = rounded_current(loops, sigma, field.burgers_dim);
        const EnergyValue es = e_sigma(mu_hat, psi, sigma, omega);
        row.e_sigma_finite = es.finite;
        row.e_sigma_value = es.finite ? es.value : -1.0;
        if (es.finite && fk.finite) {
          row.sigma_gap = std::abs(es.value - fk.value);
          row.sigma_bound = cbar * sigma * sqrtN * loop_len;
          if (k == out.k_max) {
            gaps_at_kmax.push_back(std::max(row.sigma_gap, 1e-300));
            sigmas_at_kmax.push_back(sigma);
          }
        }
      }
      out.rows.push_back(row);
    }
    if (k == out.k_max) {
      out.mu_kmax = glued.mu;
      out.loops_kmax = std::move(loops);
    }
  }
  if (sigmas_at_kmax.size() >= 2) {
    bool positive = true;
    for (double g : gaps_at_kmax) positive = positive && g > 1e-250;
    out.sigma_rate = positive ? fit_loglog_slope(sigmas_at_kmax, gaps_at_kmax) : 1.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lower-bound diagnostics
// ---------------------------------------------------------------------------

struct LowerBoundRow {
  double sigma = 0.0;
  double e_sigma_value = 0.0;
  double f_inf_rounded = 0.0;   // F_inf(mu_hat_sigma) with the recession estimate
  double e0_rounded = 0.0;      // integral of g~ (cached) over mu_hat_sigma
  double slack = 0.0;           // tolerance granted to the one-sided checks
  bool e_sigma_ge_f_inf = true;
  bool e_sigma_ge_e0 = true;
};

struct LowerBoundReport {
  std::vector<LowerBoundRow> rows;
  bool all_ok = true;
  double sandwich_lo = 0.0;   // E0 of the field
  double sandwich_hi = 0.0;   // E0 + eps L^3
  double e_sigma_min = 0.0, e_sigma_max = 0.0;
  std::size_t cache_overflow = 0;
};

/// One-sided checks justified by the inequality chain: E_sigma(mu_hat) is
/// bounded below by F_inf(mu_hat) (psi >= psi_inf pointwise) and by the
/// envelope integral (g <= g_inf = psi_inf on rank-one densities), up to the
/// recession-estimate slack cbar |theta| / s_max per unit length.
inline LowerBoundReport lower_bound_diagnostics(const PiecewiseConstantField& field,
                                                const Density& psi, const Recession& rec,
                                                const UpperBoundResult& ub,
                                                EnvelopeParams env_params = {}) {
  LowerBoundReport rep;
  rep.sandwich_lo = ub.e0;
  rep.sandwich_hi = ub.chain_rhs;
  const Region omega = Region::of_box(field.mesh.domain());
  EnvelopeSolver env(rec, env_params);
  GTildeCache cache(env, rec);
  rep.e_sigma_min = std::numeric_limits<double>::max();
  rep.e_sigma_max = 0.0;
  const double cbar = psi.c_upper() > 0 ? psi.c_upper() : 1.0;
  for (const auto& row : ub.rows) {
    if (row.k != ub.k_max || !row.e_sigma_finite) continue;
    const PolyhedralCurrent mu_hat =
        rounded_current(ub.loops_kmax, row.sigma, field.burgers_dim);
    LowerBoundRow lr;
    lr.sigma = row.sigma;
    lr.e_sigma_value = row.e_sigma_value;
    const EnergyValue fi = f_infinity(mu_hat, rec, omega);
    lr.f_inf_rounded = fi.finite ? fi.value : -1.0;
    lr.e0_rounded = e0_of_current(mu_hat, cache, omega);
    const double tv = total_variation_on(mu_hat, omega);
    lr.slack = cbar * tv / rec.s_max() + 1e-9 * std::max(1.0, row.e_sigma_value);
    lr.e_sigma_ge_f_inf = !fi.finite || row.e_sigma_value >= fi.value - lr.slack;
    lr.e_sigma_ge_e0 = row.e_sigma_value >= lr.e0_rounded - lr.slack;
    rep.all_ok = rep.all_ok && lr.e_sigma_ge_f_inf && lr.e_sigma_ge_e0;
    rep.e_sigma_min = std::min(rep.e_sigma_min, row.e_sigma_value);
    rep.e_sigma_max = std::max(rep.e_sigma_max, row.e_sigma_value);
    rep.rows.push_back(lr);
  }
  rep.cache_overflow = cache.overflow_count();
  if (rep.rows.empty()) rep.e_sigma_min = rep.e_sigma_max = 0.0;
  return rep;
}

}  // namespace linetension
