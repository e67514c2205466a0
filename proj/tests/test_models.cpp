#include <string>

#include "doctest.h"
#include "mobsim/errors.hpp"
#include "mobsim/models.hpp"

using namespace mobsim;

namespace {

bool has_error_containing(const std::vector<Violation>& vs, const std::string& needle) {
  for (const auto& v : vs) {
    if (v.severity == Severity::Error && v.message.find(needle) != std::string::npos) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("valid parameter points carry no error violations") {
  CHECK(is_valid(LatentFactorParams{0.8, 0.7, 0.0, 0.0}));
  CHECK(is_valid(LatentFactorParams{1.0, 0.0, 1.0, 1.0}));
  CHECK(is_valid(Ar2Params{0.4, 0.2}));
  CHECK(is_valid(Ar2Params{-0.3, 0.5}));
  CHECK(is_valid(MultiplicityParams{0.3, 0.7, 0.9, 0.5}));
  CHECK(is_valid(PovertyTrapParams{0.9, 0.2, -0.3, 0.5}));
  CHECK(is_valid(AssortativeParams{0.8, 0.7, 0.0}));
}

TEST_CASE("latent factor bounds") {
  CHECK(has_error_containing(validate(LatentFactorParams{-0.1, 0.7, 0, 0}), "returns_rho"));
  CHECK(has_error_containing(validate(LatentFactorParams{1.1, 0.7, 0, 0}), "returns_rho"));
  // lambda = 1 breaks stationarity, so the upper bound is strict.
  CHECK(has_error_containing(validate(LatentFactorParams{0.8, 1.0, 0, 0}),
                             "transferability_lambda"));
  CHECK(is_valid(LatentFactorParams{0.8, 0.0, 0, 0}));
  CHECK(has_error_containing(validate(LatentFactorParams{0.8, 0.7, 1.2, 0}),
                             "sibling_shared_u"));
}

TEST_CASE("ar2 stationarity triangle") {
  CHECK(has_error_containing(validate(Ar2Params{0.6, 0.5}), "stationary"));
  CHECK(has_error_containing(validate(Ar2Params{0.0, 1.0}), "stationary"));
  CHECK(has_error_containing(validate(Ar2Params{-0.5, 0.6}), "stationary"));
  CHECK(is_valid(Ar2Params{0.59, 0.4}));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(has_error_containing(validate(Ar2Params{nan, 0.2}), "finite"));
}

TEST_CASE("multiplicity weights must fit in one variance budget") {
  CHECK(has_error_containing(validate(MultiplicityParams{0.6, 0.6, 0.9, 0.5}),
                             "rho1_sq + rho2_sq"));
  CHECK(is_valid(MultiplicityParams{0.5, 0.5, 0.9, 0.5}));
  CHECK(has_error_containing(validate(MultiplicityParams{0.3, 0.7, 1.0, 0.5}), "lambda1"));
}

TEST_CASE("poverty trap slopes and shock") {
  CHECK(has_error_containing(validate(PovertyTrapParams{1.0, 0.2, 0.0, 0.5}), "gamma_low"));
  CHECK(has_error_containing(validate(PovertyTrapParams{0.9, -1.0, 0.0, 0.5}), "gamma_high"));
  CHECK(has_error_containing(validate(PovertyTrapParams{0.9, 0.2, 0.0, 0.0}), "shock_sd"));
  // Weaker persistence below the threshold is legal but unusual: a warning.
  const auto vs = validate(PovertyTrapParams{0.2, 0.9, 0.0, 0.5});
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].severity == Severity::Warning);
  CHECK(is_valid(PovertyTrapParams{0.2, 0.9, 0.0, 0.5}));
}

TEST_CASE("require_valid aggregates all errors") {
  try {
    require_valid(LatentFactorParams{-1.0, 1.0, 2.0, 0.0});
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("returns_rho") != std::string::npos);
    CHECK(msg.find("transferability_lambda") != std::string::npos);
    CHECK(msg.find("sibling_shared_u") != std::string::npos);
  }
}

TEST_CASE("model metadata") {
  CHECK(model_name(LatentFactorParams{}) == "latent_factor");
  CHECK(model_name(Ar2Params{}) == "grandparent_ar2");
  CHECK(model_name(MultiplicityParams{}) == "multiplicity");
  CHECK(model_name(PovertyTrapParams{}) == "poverty_trap");
  CHECK(model_name(AssortativeParams{}) == "assortative");

  CHECK_FALSE(is_two_parent(LatentFactorParams{}));
  CHECK(is_two_parent(AssortativeParams{}));

  CHECK(latent_count(LatentFactorParams{}) == 1);
  CHECK(latent_count(MultiplicityParams{}) == 2);
  CHECK(latent_count(Ar2Params{}) == 0);
  CHECK(latent_count(PovertyTrapParams{}) == 0);
  CHECK(latent_count(AssortativeParams{}) == 1);
}

TEST_CASE("json round trip for every family") {
  const std::vector<ModelSpec> specs = {
      LatentFactorParams{0.8, 0.7, 0.25, 0.1}, Ar2Params{0.4, 0.2},
      MultiplicityParams{0.3, 0.7, 0.9, 0.5}, PovertyTrapParams{0.9, 0.2, -0.3, 0.5},
      AssortativeParams{0.8, 0.7, 0.5}};
  for (const auto& spec : specs) {
    const auto doc = to_json(spec);
    const auto back = model_from_json(doc);
    CHECK(to_json(back) == doc);
    CHECK(model_name(back) == model_name(spec));
  }
}

TEST_CASE("json shape") {
  const auto doc = to_json(ModelSpec{LatentFactorParams{0.8, 0.7, 0.0, 0.0}});
  CHECK(doc["model"] == "latent_factor");
  CHECK(doc["params"]["rho"] == 0.8);
  CHECK(doc["params"]["lambda"] == 0.7);
}

TEST_CASE("model_from_json rejects unknown and missing keys") {
  CHECK_THROWS_AS(model_from_json({{"model", "latent_factor"},
                                   {"params", {{"rho", 0.8}, {"lambda", 0.7}, {"zeta", 1}}}}),
                  UsageError);
  CHECK_THROWS_WITH_AS(
      model_from_json({{"model", "nonsense"}, {"params", nlohmann::json::object()}}),
      doctest::Contains("nonsense"), UsageError);
  // Missing required parameter names the field.
  CHECK_THROWS_WITH_AS(
      model_from_json({{"model", "assortative"}, {"params", {{"rho", 0.8}, {"lambda", 0.7}}}}),
      doctest::Contains("m"), UsageError);
  CHECK_THROWS_AS(model_from_json({{"model", "latent_factor"},
                                   {"params", {{"rho", 0.8}, {"lambda", 0.7}}},
                                   {"extra", 1}}),
                  UsageError);
  // Non-numeric parameter values are a usage error, not a crash.
  CHECK_THROWS_AS(model_from_json({{"model", "latent_factor"},
                                   {"params", {{"rho", "high"}, {"lambda", 0.7}}}}),
                  UsageError);
}

TEST_CASE("optional latent factor shocks default to zero") {
  const auto spec = model_from_json(
      {{"model", "latent_factor"}, {"params", {{"rho", 0.8}, {"lambda", 0.7}}}});
  const auto& p = std::get<LatentFactorParams>(spec);
  CHECK(p.sibling_shared_u == 0.0);
  CHECK(p.sibling_shared_v == 0.0);
}
