#pragma once

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace mobsim {

// Latent factor transmission:
//   y_t = rho * e_t + u_t,      Var(u) = 1 - rho^2
//   e_t = lambda * e_{t-1} + v_t,  Var(v) = 1 - lambda^2
// so y and e are stationary with unit variance. The optional sibling shock
// correlations give u (market luck) and v (endowment luck) a common component
// within a sibship.
struct LatentFactorParams {
  double returns_rho = 0.0;
  double transferability_lambda = 0.0;
  double sibling_shared_u = 0.0;
  double sibling_shared_v = 0.0;
};

// Grandparent-effects AR(2):
//   y_t = gamma_p * y_{t-1} + gamma_gp * y_{t-2} + v_t
// with the shock variance chosen so that the stationary Var(y) = 1.
struct Ar2Params {
  double gamma_p = 0.0;
  double gamma_gp = 0.0;
};

// Two independent latent pathways:
//   y_t = rho1 * e1_t + rho2 * e2_t + u_t,  Var(u) = 1 - rho1^2 - rho2^2
//   ej_t = lambda_j * ej_{t-1} + vj_t,      Var(vj) = 1 - lambda_j^2
struct MultiplicityParams {
  double rho1_sq = 0.0;
  double rho2_sq = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// Kinked transmission with higher persistence below a threshold:
//   y_t = gamma_low  * (y_{t-1} - ybar) + u_t   if y_{t-1} <  ybar
//   y_t = gamma_high * (y_{t-1} - ybar) + u_t   if y_{t-1} >= ybar
// The process has no closed-form normalization; the simulator standardizes
// each generation and applies the threshold on the standardized scale.
struct PovertyTrapParams {
  double gamma_low = 0.0;
  double gamma_high = 0.0;
  double threshold_ybar = 0.0;
  double shock_sd = 0.5;
};

// Two-parent latent factor model with assortative matching:
//   e_t = lambda_tilde * (e^m_{t-1} + e^p_{t-1}) / 2 + v_t
//   Var(v) = 1 - lambda_tilde^2 * (1 + m) / 2
// where m is the correlation of spousal endowments.
struct AssortativeParams {
  double returns_rho = 0.0;
  double transferability_lambda = 0.0;
  double assortative_m = 0.0;
};

using ModelSpec = std::variant<LatentFactorParams, Ar2Params, MultiplicityParams,
                               PovertyTrapParams, AssortativeParams>;

enum class Severity { Error, Warning };

struct Violation {
  Severity severity = Severity::Error;
  std::string message;
};

// Reports every violated parameter invariant; never throws. Entries with
// Severity::Warning flag unusual but well-defined configurations.
std::vector<Violation> validate(const ModelSpec& spec);

// True when validate() reports no Error-severity violations.
bool is_valid(const ModelSpec& spec);

// Throws UsageError listing all Error-severity violations.
void require_valid(const ModelSpec& spec);

// Tag used in JSON documents and CLI flags: "latent_factor",
// "grandparent_ar2", "multiplicity", "poverty_trap", "assortative".
std::string model_name(const ModelSpec& spec);

// Assortative is the only two-parent family.
bool is_two_parent(const ModelSpec& spec);

// Number of latent endowment series carried per person (0, 1 or 2).
int latent_count(const ModelSpec& spec);

// JSON form: {"model": "<name>", "params": {...}}. Unknown keys are rejected
// with the offending path; missing required keys name the parameter.
nlohmann::ordered_json to_json(const ModelSpec& spec);
ModelSpec model_from_json(const nlohmann::json& doc);

}  // namespace mobsim
