#include "mobsim/moments.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mobsim/errors.hpp"

namespace mobsim {

namespace {

constexpr int kMaxLag = 64;

void check_max_k(int max_k) {
  if (max_k < 1 || max_k > kMaxLag) {
    throw UsageError("max_k must lie in [1, " + std::to_string(kMaxLag) + "], got " +
                     std::to_string(max_k));
  }
}

// Values that underflow toward zero clamp exactly to zero so long series
// stay comparable across platforms.
double clamp_tiny(double v) { return std::abs(v) < 1e-300 ? 0.0 : v; }

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double iterated_prediction(double beta1, int k) {
  if (k < 1) throw UsageError("iterated prediction requires k >= 1, got " + std::to_string(k));
  if (!std::isfinite(beta1) || std::abs(beta1) > 1.0) {
    throw UsageError("iterated prediction requires |beta1| <= 1");
  }
  return clamp_tiny(std::pow(beta1, k));
}

double duality_gp_coefficient(double beta1, double beta2) {
  if (!std::isfinite(beta1) || !std::isfinite(beta2)) {
    throw UsageError("duality coefficient requires finite correlations");
  }
  const double b1_sq = beta1 * beta1;
  if (b1_sq >= 1.0) {
    throw UsageError("duality coefficient is singular at |beta1| >= 1");
  }
  return (beta2 - b1_sq) / (1.0 - b1_sq);
}

MomentSet latent_factor_moments(const LatentFactorParams& p, int max_k) {
  require_valid(ModelSpec{p});
  check_max_k(max_k);
  const double rho_sq = p.returns_rho * p.returns_rho;
  const double lam = p.transferability_lambda;
  MomentSet m;
  for (int k = 1; k <= max_k; ++k) {
    const double lam_k = std::pow(lam, k);
    m.beta_k[k] = clamp_tiny(rho_sq * lam_k);
    m.latent_beta_k[k] = clamp_tiny(lam_k);
  }
  m.sibling = rho_sq * lam * lam + p.sibling_shared_u * (1.0 - rho_sq) +
              rho_sq * p.sibling_shared_v * (1.0 - lam * lam);
  m.cousin = clamp_tiny(rho_sq * std::pow(lam, 4));
  return m;
}

double latent_factor_extrapolation_error(const LatentFactorParams& p) {
  require_valid(ModelSpec{p});
  const double rho_sq = p.returns_rho * p.returns_rho;
  const double lam = p.transferability_lambda;
  return (rho_sq - 1.0) * rho_sq * lam * lam;
}

MomentSet ar2_moments(const Ar2Params& p, int max_k) {
  require_valid(ModelSpec{p});
  check_max_k(max_k);
  MomentSet m;
  const double beta1 = p.gamma_p / (1.0 - p.gamma_gp);
  m.beta_k[1] = beta1;
  if (max_k >= 2) m.beta_k[2] = p.gamma_p * beta1 + p.gamma_gp;
  for (int k = 3; k <= max_k; ++k) {
    m.beta_k[k] = clamp_tiny(p.gamma_p * m.beta_k[k - 1] + p.gamma_gp * m.beta_k[k - 2]);
  }
  return m;
}

double ar2_shock_variance(const Ar2Params& p) {
  require_valid(ModelSpec{p});
  const double gp = p.gamma_p;
  const double ggp = p.gamma_gp;
  return (1.0 + ggp) * ((1.0 - ggp) * (1.0 - ggp) - gp * gp) / (1.0 - ggp);
}

MomentSet multiplicity_moments(const MultiplicityParams& p, int max_k) {
  require_valid(ModelSpec{p});
  check_max_k(max_k);
  MomentSet m;
  for (int k = 1; k <= max_k; ++k) {
    const double part1 = p.rho1_sq * std::pow(p.lambda1, k);
    const double part2 = p.rho2_sq * std::pow(p.lambda2, k);
    const double beta = clamp_tiny(part1 + part2);
    m.beta_k[k] = beta;
    m.pathway1_share[k] = beta > 0.0 ? part1 / beta : 0.0;
  }
  return m;
}

double multiplicity_extrapolation_error(const MultiplicityParams& p) {
  require_valid(ModelSpec{p});
  if (std::abs(p.rho1_sq + p.rho2_sq - 1.0) > 1e-9) {
    throw UsageError(
        "closed-form extrapolation error requires rho1_sq + rho2_sq = 1; "
        "compute beta1^2 - beta2 from multiplicity_moments instead");
  }
  const double dl = p.lambda1 - p.lambda2;
  return p.rho1_sq * (p.rho1_sq - 1.0) * dl * dl;
}

MomentSet assortative_moments(const AssortativeParams& p, int max_k) {
  require_valid(ModelSpec{p});
  check_max_k(max_k);
  const double rho_sq = p.returns_rho * p.returns_rho;
  // Effective per-generation decay of the single-ancestor endowment
  // correlation: averaging two parents halves lambda, sorting restores m/2.
  const double a = p.transferability_lambda * 0.5 * (1.0 + p.assortative_m);
  MomentSet m;
  for (int k = 1; k <= max_k; ++k) {
    const double a_k = std::pow(a, k);
    m.beta_k[k] = clamp_tiny(rho_sq * a_k);
    m.latent_beta_k[k] = clamp_tiny(a_k);
  }
  m.spousal = rho_sq * p.assortative_m;
  return m;
}

MomentSet analytic_moments(const ModelSpec& spec, int max_k) {
  struct Dispatcher {
    int max_k;
    MomentSet operator()(const LatentFactorParams& p) const {
      return latent_factor_moments(p, max_k);
    }
    MomentSet operator()(const Ar2Params& p) const { return ar2_moments(p, max_k); }
    MomentSet operator()(const MultiplicityParams& p) const {
      return multiplicity_moments(p, max_k);
    }
    MomentSet operator()(const PovertyTrapParams&) const {
      throw UsageError(
          "poverty_trap has no closed-form moments; simulate a pedigree and "
          "use the regression estimators");
    }
    MomentSet operator()(const AssortativeParams& p) const {
      return assortative_moments(p, max_k);
    }
  };
  return std::visit(Dispatcher{max_k}, spec);
}

nlohmann::ordered_json to_json(const MomentSet& m) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json beta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.beta_k) beta[std::to_string(k)] = v;
  doc["beta_k"] = std::move(beta);
  if (m.sibling) doc["sibling"] = *m.sibling;
  if (m.cousin) doc["cousin"] = *m.cousin;
  if (m.spousal) doc["spousal"] = *m.spousal;
  if (!m.latent_beta_k.empty()) {
    nlohmann::ordered_json latent = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.latent_beta_k) latent[std::to_string(k)] = v;
    doc["latent_beta_k"] = std::move(latent);
  }
  if (!m.pathway1_share.empty()) {
    nlohmann::ordered_json share = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.pathway1_share) share[std::to_string(k)] = v;
    doc["pathway1_share"] = std::move(share);
  }
  return doc;
}

std::string to_csv(const MomentSet& m) {
  std::ostringstream os;
  os << "k,beta_k";
  if (!m.latent_beta_k.empty()) os << ",latent_beta_k";
  if (!m.pathway1_share.empty()) os << ",pathway1_share";
  os << "\n";
  for (const auto& [k, v] : m.beta_k) {
    os << k << "," << fmt17(v);
    if (auto it = m.latent_beta_k.find(k); it != m.latent_beta_k.end()) {
      os << "," << fmt17(it->second);
    }
    if (auto it = m.pathway1_share.find(k); it != m.pathway1_share.end()) {
      os << "," << fmt17(it->second);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace mobsim
