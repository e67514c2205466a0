#include <cmath>

#include "doctest.h"
#include "mobsim/errors.hpp"
#include "mobsim/moments.hpp"
#include "mobsim/rng.hpp"
#include "oracles.hpp"

using namespace mobsim;

TEST_CASE("iterated prediction is a plain power") {
  CHECK(iterated_prediction(0.448, 1) == doctest::Approx(0.448).epsilon(1e-15));
  CHECK(iterated_prediction(0.448, 3) == doctest::Approx(0.089915392).epsilon(1e-12));
  CHECK(iterated_prediction(0.448, 2) == doctest::Approx(0.200704).epsilon(1e-12));
  CHECK_THROWS_AS(iterated_prediction(0.5, 0), UsageError);
  CHECK_THROWS_AS(iterated_prediction(1.2, 2), UsageError);
  // k is unbounded above; deep powers underflow cleanly to zero instead of
  // denormal noise.
  CHECK(iterated_prediction(0.5, 65) == doctest::Approx(std::pow(0.5, 65)));
  CHECK(iterated_prediction(1e-6, 64) == 0.0);
}

TEST_CASE("duality coefficient matches the closed form") {
  CHECK(duality_gp_coefficient(0.448, 0.3136) ==
        doctest::Approx((0.3136 - 0.200704) / (1 - 0.200704)).epsilon(1e-15));
  // No excess persistence means a zero grandparent coefficient.
  CHECK(duality_gp_coefficient(0.5, 0.25) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(duality_gp_coefficient(1.0, 0.5), UsageError);
}

TEST_CASE("latent factor moments against direct evaluation") {
  const LatentFactorParams p{0.8, 0.7, 0.0, 0.0};
  const auto m = latent_factor_moments(p, 7);
  REQUIRE(m.beta_k.size() == 7);
  for (int k = 1; k <= 7; ++k) {
    CHECK(m.beta_k.at(k) == doctest::Approx(0.64 * std::pow(0.7, k)).epsilon(1e-14));
    CHECK(m.latent_beta_k.at(k) == doctest::Approx(std::pow(0.7, k)).epsilon(1e-14));
  }
  CHECK(m.beta_k.at(3) == doctest::Approx(0.21952).epsilon(1e-12));
  CHECK(m.beta_k.at(5) == doctest::Approx(0.1075648).epsilon(1e-12));
  CHECK(m.beta_k.at(6) == doctest::Approx(0.07529536).epsilon(1e-12));
  REQUIRE(m.sibling.has_value());
  REQUIRE(m.cousin.has_value());
  CHECK(*m.sibling == doctest::Approx(0.64 * 0.49).epsilon(1e-14));
  CHECK(*m.cousin == doctest::Approx(0.64 * std::pow(0.7, 4)).epsilon(1e-14));
  CHECK_FALSE(m.spousal.has_value());
}

TEST_CASE("sibling correlation includes shared shock components") {
  const LatentFactorParams p{0.8, 0.7, 0.4, 0.25};
  const auto m = latent_factor_moments(p, 2);
  // rho^2 lambda^2 + c_u (1 - rho^2) + rho^2 c_v (1 - lambda^2)
  const double expected = 0.64 * 0.49 + 0.4 * 0.36 + 0.64 * 0.25 * 0.51;
  CHECK(*m.sibling == doctest::Approx(expected).epsilon(1e-14));
  // Shared shocks are a within-sibship phenomenon: ancestor correlations and
  // cousins are untouched.
  CHECK(m.beta_k.at(1) == doctest::Approx(0.448).epsilon(1e-14));
  CHECK(*m.cousin == doctest::Approx(0.64 * std::pow(0.7, 4)).epsilon(1e-14));
}

TEST_CASE("latent factor extrapolation error equals beta1^2 - beta2") {
  SplitMix64 rng(12345);
  for (int i = 0; i < 50; ++i) {
    const double rho = 0.3 + 0.69 * rng.next_unit();
    const double lam = 0.99 * rng.next_unit();
    const LatentFactorParams p{rho, lam, 0.0, 0.0};
    const auto m = latent_factor_moments(p, 2);
    const double direct = m.beta_k.at(1) * m.beta_k.at(1) - m.beta_k.at(2);
    CHECK(latent_factor_extrapolation_error(p) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(latent_factor_extrapolation_error(p) <= 1e-15);
  }
  CHECK(latent_factor_extrapolation_error({0.8, 0.7, 0, 0}) ==
        doctest::Approx((0.64 - 1.0) * 0.64 * 0.49).epsilon(1e-14));
}

TEST_CASE("ar2 moments match the Yule-Walker oracle") {
  const Ar2Params fig{0.4, 0.2};
  const auto m = ar2_moments(fig, 4);
  CHECK(m.beta_k.at(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m.beta_k.at(2) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(m.beta_k.at(3) == doctest::Approx(0.26).epsilon(1e-14));
  CHECK(m.beta_k.at(4) == doctest::Approx(0.184).epsilon(1e-14));
  CHECK(ar2_shock_variance(fig) == doctest::Approx(0.72).epsilon(1e-14));

  SplitMix64 rng(777);
  for (int i = 0; i < 40; ++i) {
    // Sample inside the stationarity triangle, negative lobes included.
    const double gp = -0.8 + 1.6 * rng.next_unit();
    const double ggp_hi = std::min(1.0 - gp, 1.0 + gp);
    const double ggp = -0.9 + (0.99 * ggp_hi + 0.9) * rng.next_unit();
    const Ar2Params p{gp, ggp};
    if (!is_valid(p)) continue;
    const auto ours = ar2_moments(p, 6);
    const auto ref = oracle::ar2_autocorr(gp, ggp, 6);
    for (int k = 1; k <= 6; ++k) {
      CHECK(ours.beta_k.at(k) == doctest::Approx(ref[k]).epsilon(1e-10));
    }
  }
}

TEST_CASE("ar2 shock variance keeps the stationary variance at one") {
  // Var(y) = gamma_p Cov1 + gamma_gp Cov2 + sigma_v^2 must close at 1.
  SplitMix64 rng(778);
  for (int i = 0; i < 20; ++i) {
    const double gp = -0.5 + 1.0 * rng.next_unit();
    const double ggp = -0.4 + 0.8 * rng.next_unit();
    const Ar2Params p{gp, ggp};
    if (!is_valid(p)) continue;
    const auto m = ar2_moments(p, 2);
    const double var =
        gp * m.beta_k.at(1) + ggp * m.beta_k.at(2) + ar2_shock_variance(p);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("multiplicity moments mix the two pathways") {
  const MultiplicityParams p{0.3, 0.7, 0.9, 0.5};
  const auto m = multiplicity_moments(p, 7);
  CHECK(m.beta_k.at(1) == doctest::Approx(0.62).epsilon(1e-14));
  CHECK(m.beta_k.at(2) == doctest::Approx(0.418).epsilon(1e-14));
  for (int k = 1; k <= 7; ++k) {
    CHECK(m.beta_k.at(k) ==
          doctest::Approx(0.3 * std::pow(0.9, k) + 0.7 * std::pow(0.5, k)).epsilon(1e-14));
    CHECK(m.pathway1_share.at(k) ==
          doctest::Approx(0.3 * std::pow(0.9, k) / m.beta_k.at(k)).epsilon(1e-14));
  }
  CHECK(m.pathway1_share.at(1) == doctest::Approx(0.27 / 0.62).epsilon(1e-12));
  CHECK(m.pathway1_share.at(6) == doctest::Approx(0.93580).epsilon(1e-4));
  for (int k = 2; k <= 7; ++k) {
    CHECK(m.pathway1_share.at(k) > m.pathway1_share.at(k - 1));
  }
}

TEST_CASE("multiplicity extrapolation error and the Jensen bound") {
  const MultiplicityParams fig{0.3, 0.7, 0.9, 0.5};
  CHECK(multiplicity_extrapolation_error(fig) == doctest::Approx(-0.0336).epsilon(1e-12));
  const auto m = multiplicity_moments(fig, 2);
  CHECK(multiplicity_extrapolation_error(fig) ==
        doctest::Approx(m.beta_k.at(1) * m.beta_k.at(1) - m.beta_k.at(2)).epsilon(1e-12));

  // The closed form only collapses to beta1^2 - beta2 on the full-variance
  // ridge rho1_sq + rho2_sq = 1.
  CHECK_THROWS_AS(multiplicity_extrapolation_error({0.3, 0.6, 0.9, 0.5}), UsageError);

  SplitMix64 rng(991);
  for (int i = 0; i < 20; ++i) {
    const double r1 = rng.next_unit();
    const MultiplicityParams p{r1, 1.0 - r1, 0.99 * rng.next_unit(), 0.99 * rng.next_unit()};
    CHECK(multiplicity_extrapolation_error(p) <= 1e-15);
  }
}

TEST_CASE("assortative moments decay at the effective rate") {
  const double a = 0.7 * (1.0 + 0.5) / 2.0;
  const auto m = assortative_moments({0.8, 0.7, 0.5}, 7);
  for (int k = 1; k <= 7; ++k) {
    CHECK(m.beta_k.at(k) == doctest::Approx(0.64 * std::pow(a, k)).epsilon(1e-14));
    CHECK(m.latent_beta_k.at(k) == doctest::Approx(std::pow(a, k)).epsilon(1e-14));
  }
  REQUIRE(m.spousal.has_value());
  CHECK(*m.spousal == doctest::Approx(0.64 * 0.5).epsilon(1e-14));

  CHECK(assortative_moments({0.8, 0.7, 0.0}, 1).beta_k.at(1) ==
        doctest::Approx(0.224).epsilon(1e-13));
  CHECK(assortative_moments({0.8, 0.7, 0.5}, 1).beta_k.at(1) ==
        doctest::Approx(0.336).epsilon(1e-13));
  CHECK(assortative_moments({0.8, 0.7, 0.8}, 1).beta_k.at(1) ==
        doctest::Approx(0.4032).epsilon(1e-13));
  CHECK(assortative_moments({0.8, 0.7, 0.0}, 3).beta_k.at(3) ==
        doctest::Approx(0.02744).epsilon(1e-13));
}

TEST_CASE("analytic moments dispatcher") {
  const auto m = analytic_moments(Ar2Params{0.4, 0.2}, 3);
  CHECK(m.beta_k.at(3) == doctest::Approx(0.26).epsilon(1e-14));
  CHECK_THROWS_AS(analytic_moments(PovertyTrapParams{0.9, 0.2, -0.3, 0.5}, 3), UsageError);
  CHECK_THROWS_AS(analytic_moments(LatentFactorParams{0.8, 0.7, 0, 0}, 0), UsageError);
  CHECK_THROWS_AS(analytic_moments(LatentFactorParams{0.8, 0.7, 0, 0}, 65), UsageError);
  CHECK_THROWS_AS(analytic_moments(LatentFactorParams{1.5, 0.7, 0, 0}, 3), UsageError);
  // The cap itself is usable; representable values survive while magnitudes
  // below 1e-300 clamp exactly to zero.
  const auto deep = analytic_moments(LatentFactorParams{0.8, 0.1, 0, 0}, 64);
  CHECK(deep.beta_k.at(64) == doctest::Approx(0.64 * std::pow(0.1, 64)).epsilon(1e-12));
  const auto tiny = analytic_moments(LatentFactorParams{0.8, 1e-5, 0, 0}, 64);
  CHECK(tiny.beta_k.at(64) == 0.0);
}

TEST_CASE("moment serialization") {
  const auto m = analytic_moments(MultiplicityParams{0.3, 0.7, 0.9, 0.5}, 2);
  const auto doc = to_json(m);
  CHECK(doc["beta_k"]["1"] == doctest::Approx(0.62));
  CHECK(doc["pathway1_share"]["2"].get<double>() > 0.0);
  CHECK_FALSE(doc.contains("sibling"));

  const auto csv = to_csv(m);
  CHECK(csv.find("k,beta_k,pathway1_share") == 0);
  CHECK(csv.find("\n1,") != std::string::npos);

  const auto lf = to_csv(analytic_moments(LatentFactorParams{0.8, 0.7, 0, 0}, 2));
  CHECK(lf.find("k,beta_k,latent_beta_k") == 0);
}
