#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mobsim/models.hpp"

namespace mobsim {

// Closed-form kinship correlations for one model at one parameter point.
// beta_k holds the ancestor correlations for distances 1..max_k (contiguous);
// the optional scalars are only set where the model defines them. For the
// multiplicity model pathway1_share[k] is the fraction of beta_k[k] carried
// by the first endowment.
struct MomentSet {
  std::map<int, double> beta_k;
  std::optional<double> sibling;
  std::optional<double> cousin;
  std::optional<double> spousal;
  std::map<int, double> latent_beta_k;
  std::map<int, double> pathway1_share;
};

// Naive geometric extrapolation beta1^k. Throws UsageError for k < 1 or
// |beta1| > 1.
double iterated_prediction(double beta1, int k);

// Population grandparent coefficient implied by the bivariate correlations:
// (beta2 - beta1^2) / (1 - beta1^2). Throws UsageError when beta1^2 >= 1.
double duality_gp_coefficient(double beta1, double beta2);

// beta_k[k] = rho^2 lambda^k, latent_beta_k[k] = lambda^k,
// sibling = rho^2 lambda^2 + c_u (1 - rho^2) + rho^2 c_v (1 - lambda^2),
// cousin = rho^2 lambda^4 (shared-shock terms apply to siblings only).
MomentSet latent_factor_moments(const LatentFactorParams& p, int max_k);

// Iterated-minus-actual gap at distance 2: (rho^2 - 1) rho^2 lambda^2,
// identical to beta1^2 - beta2.
double latent_factor_extrapolation_error(const LatentFactorParams& p);

// Yule-Walker correlations: beta_1 = gamma_p / (1 - gamma_gp),
// beta_2 = gamma_p beta_1 + gamma_gp, then the AR(2) recursion.
MomentSet ar2_moments(const Ar2Params& p, int max_k);

// Shock variance that makes the stationary Var(y) equal one.
double ar2_shock_variance(const Ar2Params& p);

// beta_k[k] = rho1_sq lambda1^k + rho2_sq lambda2^k with the first-pathway
// share series alongside.
MomentSet multiplicity_moments(const MultiplicityParams& p, int max_k);

// rho1_sq (rho1_sq - 1) (lambda1 - lambda2)^2, valid only when
// rho1_sq + rho2_sq = 1 (within 1e-9); equals beta1^2 - beta2 there.
double multiplicity_extrapolation_error(const MultiplicityParams& p);

// beta_k[k] = rho^2 (lambda_tilde (1+m)/2)^k; spousal outcome correlation
// rho^2 m; latent_beta_k[k] = (lambda_tilde (1+m)/2)^k.
MomentSet assortative_moments(const AssortativeParams& p, int max_k);

// Dispatch on the model family. Poverty trap has no closed form and throws
// UsageError pointing at the simulator.
MomentSet analytic_moments(const ModelSpec& spec, int max_k);

nlohmann::ordered_json to_json(const MomentSet& m);

// Two-column series "k,beta_k" plus one extra column per populated series.
std::string to_csv(const MomentSet& m);

}  // namespace mobsim
