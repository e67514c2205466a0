#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mobsim/moments.hpp"
#include "mobsim/pedigree.hpp"

namespace mobsim {

// OLS output. Regressor order is preserved; the intercept is always last.
// Standard errors assume homoskedasticity. Warnings carry non-fatal sample
// issues (for example very few pairs).
struct RegressionResult {
  std::vector<std::string> names;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  double r_squared = 0.0;
  std::int64_t n_obs = 0;
  std::vector<std::string> warnings;

  double coefficient(const std::string& name) const;
  double std_error(const std::string& name) const;
};

// Latent-factor parameters recovered from a moment set.
struct FitResult {
  double rho_sq = 0.0;
  double lambda = 0.0;
  // Euclidean norm of beta_k - rho_sq * lambda^k over the supplied lags.
  double residual_norm = 0.0;
  std::vector<std::string> warnings;
};

// Slope of descendant y on the single ancestor k steps up the chosen parent
// line, over every unbroken chain, with y standardized per generation first
// (slopes are correlations). The regressor is named "lag<k>". Setting
// child_generation keeps only descendants in that generation, which also
// makes the pairs independent across dynasties in chain topologies.
RegressionResult beta_k_estimate(const Pedigree& ped, int k,
                                 Pedigree::Line line = Pedigree::Line::Father,
                                 std::optional<int> child_generation = std::nullopt);

// Multivariate OLS of child y on the father-line ancestors at the given
// lags plus optional controls ("mother_y", "spouse_y"). Complete cases only:
// a child enters when every requested ancestor and control resolves.
// Regressors are named "lag<k>" in the order given, then the controls.
RegressionResult multigen_regression(const Pedigree& ped, const std::vector<int>& lags,
                                     const std::vector<std::string>& extra_controls = {});

// OLS of y on a same-father sibling's y, both orders of every pair, pooled
// across generations; optionally controls the shared father's y ("lag1").
RegressionResult sibling_regression(const Pedigree& ped, bool include_parent);

// Inverts beta_k = rho_sq * lambda^k. With exactly lags {1, 2} the solution
// is closed-form (lambda = beta2/beta1, rho_sq = beta1^2/beta2); with more
// lags a multi-start Gauss-Newton least squares over (rho_sq, lambda) in
// (0,1] x [0,1) runs to objective tolerance 1e-10. Non-decaying or
// rho_sq > 1 inputs raise InfeasibleError.
FitResult fit_latent_factor(const MomentSet& moments);

// Slope of dynasty-mean y at generation `child_gen` on dynasty-mean y at
// `parent_gen` across dynasties (y standardized per generation first).
// Averaging filters the idiosyncratic components, so with large sibships the
// slope approaches the latent transmission rate. Needs at least 30 dynasties
// observed in both generations.
double group_level_estimate(const Pedigree& ped, int parent_gen, int child_gen);

double r2_of(const RegressionResult& result);

}  // namespace mobsim
