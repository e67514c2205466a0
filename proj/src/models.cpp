#include "mobsim/models.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "mobsim/errors.hpp"

namespace mobsim {

namespace {

void check_unit_interval(std::vector<Violation>& out, const char* name, double v,
                         bool strict_upper = false) {
  if (!std::isfinite(v)) {
    out.push_back({Severity::Error, std::string(name) + " must be finite"});
    return;
  }
  if (v < 0.0 || v > 1.0 || (strict_upper && v == 1.0)) {
    std::ostringstream os;
    os << name << " must lie in [0, 1" << (strict_upper ? ")" : "]") << ", got " << v;
    out.push_back({Severity::Error, os.str()});
  }
}

void check_finite(std::vector<Violation>& out, const char* name, double v) {
  if (!std::isfinite(v)) {
    out.push_back({Severity::Error, std::string(name) + " must be finite"});
  }
}

struct Validator {
  std::vector<Violation> operator()(const LatentFactorParams& p) const {
    std::vector<Violation> out;
    check_unit_interval(out, "returns_rho", p.returns_rho);
    check_unit_interval(out, "transferability_lambda", p.transferability_lambda, true);
    check_unit_interval(out, "sibling_shared_u", p.sibling_shared_u);
    check_unit_interval(out, "sibling_shared_v", p.sibling_shared_v);
    return out;
  }

  std::vector<Violation> operator()(const Ar2Params& p) const {
    std::vector<Violation> out;
    check_finite(out, "gamma_p", p.gamma_p);
    check_finite(out, "gamma_gp", p.gamma_gp);
    if (!out.empty()) return out;
    // Stationarity triangle for an AR(2).
    const bool stationary = std::abs(p.gamma_gp) < 1.0 && p.gamma_p + p.gamma_gp < 1.0 &&
                            p.gamma_gp - p.gamma_p < 1.0;
    if (!stationary) {
      std::ostringstream os;
      os << "(gamma_p, gamma_gp) = (" << p.gamma_p << ", " << p.gamma_gp
         << ") lies outside the stationary region";
      out.push_back({Severity::Error, os.str()});
    }
    return out;
  }

  std::vector<Violation> operator()(const MultiplicityParams& p) const {
    std::vector<Violation> out;
    check_unit_interval(out, "rho1_sq", p.rho1_sq);
    check_unit_interval(out, "rho2_sq", p.rho2_sq);
    check_unit_interval(out, "lambda1", p.lambda1, true);
    check_unit_interval(out, "lambda2", p.lambda2, true);
    if (std::isfinite(p.rho1_sq) && std::isfinite(p.rho2_sq) &&
        p.rho1_sq + p.rho2_sq > 1.0) {
      std::ostringstream os;
      os << "rho1_sq + rho2_sq must not exceed 1, got " << p.rho1_sq + p.rho2_sq;
      out.push_back({Severity::Error, os.str()});
    }
    return out;
  }

  std::vector<Violation> operator()(const PovertyTrapParams& p) const {
    std::vector<Violation> out;
    check_finite(out, "gamma_low", p.gamma_low);
    check_finite(out, "gamma_high", p.gamma_high);
    check_finite(out, "threshold_ybar", p.threshold_ybar);
    if (std::isfinite(p.gamma_low) && std::abs(p.gamma_low) >= 1.0) {
      out.push_back({Severity::Error, "gamma_low must satisfy |gamma_low| < 1"});
    }
    if (std::isfinite(p.gamma_high) && std::abs(p.gamma_high) >= 1.0) {
      out.push_back({Severity::Error, "gamma_high must satisfy |gamma_high| < 1"});
    }
    if (!std::isfinite(p.shock_sd) || p.shock_sd <= 0.0) {
      out.push_back({Severity::Error, "shock_sd must be a positive finite number"});
    }
    if (out.empty() && p.gamma_low < p.gamma_high) {
      out.push_back({Severity::Warning,
                     "gamma_low < gamma_high: persistence is weaker below the "
                     "threshold than above it"});
    }
    return out;
  }

  std::vector<Violation> operator()(const AssortativeParams& p) const {
    std::vector<Violation> out;
    check_unit_interval(out, "returns_rho", p.returns_rho);
    check_unit_interval(out, "transferability_lambda", p.transferability_lambda, true);
    check_unit_interval(out, "assortative_m", p.assortative_m);
    return out;
  }
};

template <class T>
T params_from_json(const nlohmann::json& params, const std::set<std::string>& known);

void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (known.find(it.key()) == known.end()) {
      throw UsageError("unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

double require_number(const nlohmann::json& params, const std::string& key,
                      const std::string& model) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw UsageError("model \"" + model + "\" requires parameter \"" + key + "\"");
  }
  if (!it->is_number()) {
    throw UsageError("parameter \"" + key + "\" of model \"" + model +
                     "\" must be a number");
  }
  return it->get<double>();
}

double optional_number(const nlohmann::json& params, const std::string& key,
                       double fallback, const std::string& model) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (!it->is_number()) {
    throw UsageError("parameter \"" + key + "\" of model \"" + model +
                     "\" must be a number");
  }
  return it->get<double>();
}

}  // namespace

std::vector<Violation> validate(const ModelSpec& spec) {
  return std::visit(Validator{}, spec);
}

bool is_valid(const ModelSpec& spec) {
  for (const auto& v : validate(spec)) {
    if (v.severity == Severity::Error) return false;
  }
  return true;
}

void require_valid(const ModelSpec& spec) {
  std::string msg;
  for (const auto& v : validate(spec)) {
    if (v.severity != Severity::Error) continue;
    if (!msg.empty()) msg += "; ";
    msg += v.message;
  }
  if (!msg.empty()) {
    throw UsageError("invalid " + model_name(spec) + " parameters: " + msg);
  }
}

std::string model_name(const ModelSpec& spec) {
  struct Namer {
    std::string operator()(const LatentFactorParams&) const { return "latent_factor"; }
    std::string operator()(const Ar2Params&) const { return "grandparent_ar2"; }
    std::string operator()(const MultiplicityParams&) const { return "multiplicity"; }
    std::string operator()(const PovertyTrapParams&) const { return "poverty_trap"; }
    std::string operator()(const AssortativeParams&) const { return "assortative"; }
  };
  return std::visit(Namer{}, spec);
}

bool is_two_parent(const ModelSpec& spec) {
  return std::holds_alternative<AssortativeParams>(spec);
}

int latent_count(const ModelSpec& spec) {
  struct Counter {
    int operator()(const LatentFactorParams&) const { return 1; }
    int operator()(const Ar2Params&) const { return 0; }
    int operator()(const MultiplicityParams&) const { return 2; }
    int operator()(const PovertyTrapParams&) const { return 0; }
    int operator()(const AssortativeParams&) const { return 1; }
  };
  return std::visit(Counter{}, spec);
}

nlohmann::ordered_json to_json(const ModelSpec& spec) {
  nlohmann::ordered_json params;
  struct Writer {
    nlohmann::ordered_json& params;
    void operator()(const LatentFactorParams& p) const {
      params["rho"] = p.returns_rho;
      params["lambda"] = p.transferability_lambda;
      params["sibling_shared_u"] = p.sibling_shared_u;
      params["sibling_shared_v"] = p.sibling_shared_v;
    }
    void operator()(const Ar2Params& p) const {
      params["gamma_p"] = p.gamma_p;
      params["gamma_gp"] = p.gamma_gp;
    }
    void operator()(const MultiplicityParams& p) const {
      params["rho1_sq"] = p.rho1_sq;
      params["rho2_sq"] = p.rho2_sq;
      params["lambda1"] = p.lambda1;
      params["lambda2"] = p.lambda2;
    }
    void operator()(const PovertyTrapParams& p) const {
      params["gamma_low"] = p.gamma_low;
      params["gamma_high"] = p.gamma_high;
      params["threshold_ybar"] = p.threshold_ybar;
      params["shock_sd"] = p.shock_sd;
    }
    void operator()(const AssortativeParams& p) const {
      params["rho"] = p.returns_rho;
      params["lambda"] = p.transferability_lambda;
      params["m"] = p.assortative_m;
    }
  };
  std::visit(Writer{params}, spec);
  nlohmann::ordered_json doc;
  doc["model"] = model_name(spec);
  doc["params"] = std::move(params);
  return doc;
}

ModelSpec model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw UsageError("model document must be a JSON object");
  reject_unknown_keys(doc, {"model", "params"}, "model document");
  auto model_it = doc.find("model");
  if (model_it == doc.end() || !model_it->is_string()) {
    throw UsageError("model document requires a string \"model\" field");
  }
  const std::string name = model_it->get<std::string>();
  nlohmann::json params = nlohmann::json::object();
  if (auto it = doc.find("params"); it != doc.end()) {
    if (!it->is_object()) throw UsageError("\"params\" must be a JSON object");
    params = *it;
  }

  ModelSpec spec;
  if (name == "latent_factor") {
    reject_unknown_keys(params, {"rho", "lambda", "sibling_shared_u", "sibling_shared_v"},
                        "params of model \"latent_factor\"");
    LatentFactorParams p;
    p.returns_rho = require_number(params, "rho", name);
    p.transferability_lambda = require_number(params, "lambda", name);
    p.sibling_shared_u = optional_number(params, "sibling_shared_u", 0.0, name);
    p.sibling_shared_v = optional_number(params, "sibling_shared_v", 0.0, name);
    spec = p;
  } else if (name == "grandparent_ar2") {
    reject_unknown_keys(params, {"gamma_p", "gamma_gp"},
                        "params of model \"grandparent_ar2\"");
    Ar2Params p;
    p.gamma_p = require_number(params, "gamma_p", name);
    p.gamma_gp = require_number(params, "gamma_gp", name);
    spec = p;
  } else if (name == "multiplicity") {
    reject_unknown_keys(params, {"rho1_sq", "rho2_sq", "lambda1", "lambda2"},
                        "params of model \"multiplicity\"");
    MultiplicityParams p;
    p.rho1_sq = require_number(params, "rho1_sq", name);
    p.rho2_sq = require_number(params, "rho2_sq", name);
    p.lambda1 = require_number(params, "lambda1", name);
    p.lambda2 = require_number(params, "lambda2", name);
    spec = p;
  } else if (name == "poverty_trap") {
    reject_unknown_keys(params, {"gamma_low", "gamma_high", "threshold_ybar", "shock_sd"},
                        "params of model \"poverty_trap\"");
    PovertyTrapParams p;
    p.gamma_low = require_number(params, "gamma_low", name);
    p.gamma_high = require_number(params, "gamma_high", name);
    p.threshold_ybar = require_number(params, "threshold_ybar", name);
    p.shock_sd = optional_number(params, "shock_sd", 0.5, name);
    spec = p;
  } else if (name == "assortative") {
    reject_unknown_keys(params, {"rho", "lambda", "m"},
                        "params of model \"assortative\"");
    AssortativeParams p;
    p.returns_rho = require_number(params, "rho", name);
    p.transferability_lambda = require_number(params, "lambda", name);
    p.assortative_m = require_number(params, "m", name);
    spec = p;
  } else {
    throw UsageError("unknown model \"" + name +
                     "\"; expected one of latent_factor, grandparent_ar2, "
                     "multiplicity, poverty_trap, assortative");
  }
  require_valid(spec);
  return spec;
}

}  // namespace mobsim
