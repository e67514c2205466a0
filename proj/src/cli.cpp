#include "mobsim/cli.hpp"

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "mobsim/errors.hpp"
#include "mobsim/estimators.hpp"
#include "mobsim/experiments.hpp"
#include "mobsim/models.hpp"
#include "mobsim/moments.hpp"
#include "mobsim/panel_io.hpp"
#include "mobsim/simulate.hpp"
#include "mobsim/version.hpp"

namespace mobsim {

namespace {

const char* kConfigSchema = "mobsim-config-v1";

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
}

std::string dump_json(const nlohmann::ordered_json& doc) { return doc.dump(2) + "\n"; }

// One flag of a model family. Optional parameters fall back to the defaults
// baked into the JSON loader.
struct ParamFlag {
  const char* flag;
  const char* json_key;
  const char* field_name;
  bool required;
};

const std::map<std::string, std::vector<ParamFlag>>& model_flag_table() {
  static const std::map<std::string, std::vector<ParamFlag>> table = {
      {"latent_factor",
       {{"rho", "rho", "returns_rho", true},
        {"lambda", "lambda", "transferability_lambda", true},
        {"sibling_shared_u", "sibling_shared_u", "sibling_shared_u", false},
        {"sibling_shared_v", "sibling_shared_v", "sibling_shared_v", false}}},
      {"grandparent_ar2",
       {{"gamma_p", "gamma_p", "gamma_p", true},
        {"gamma_gp", "gamma_gp", "gamma_gp", true}}},
      {"multiplicity",
       {{"rho1_sq", "rho1_sq", "rho1_sq", true},
        {"rho2_sq", "rho2_sq", "rho2_sq", true},
        {"lambda1", "lambda1", "lambda1", true},
        {"lambda2", "lambda2", "lambda2", true}}},
      {"poverty_trap",
       {{"gamma_low", "gamma_low", "gamma_low", true},
        {"gamma_high", "gamma_high", "gamma_high", true},
        {"ybar", "threshold_ybar", "threshold_ybar", true},
        {"shock_sd", "shock_sd", "shock_sd", false}}},
      {"assortative",
       {{"rho", "rho", "returns_rho", true},
        {"lambda", "lambda", "transferability_lambda_tilde", true},
        {"m", "m", "assortative_m", true}}}};
  return table;
}

// Registers --model plus every model parameter flag on a subcommand and
// rebuilds a validated ModelSpec from whichever ones were provided.
struct ModelFlags {
  std::string model;
  std::map<std::string, double> values;
  std::map<std::string, CLI::Option*> options;
  std::set<std::string> provided;
  CLI::Option* model_option = nullptr;

  void attach(CLI::App& cmd) {
    model_option = cmd.add_option("--model", model,
                                  "model family: latent_factor, grandparent_ar2, "
                                  "multiplicity, poverty_trap, assortative");
    std::set<std::string> seen;
    for (const auto& [name, flags] : model_flag_table()) {
      for (const auto& f : flags) {
        if (!seen.insert(f.flag).second) continue;
        options[f.flag] = cmd.add_option("--" + std::string(f.flag), values[f.flag],
                                         std::string("model parameter ") + f.flag);
      }
    }
  }

  void collect_provided() {
    for (const auto& [flag, opt] : options) {
      if (opt->count() > 0) provided.insert(flag);
    }
  }

  ModelSpec build() const {
    if (model.empty()) throw UsageError("--model is required");
    auto it = model_flag_table().find(model);
    if (it == model_flag_table().end()) {
      throw UsageError("unknown model \"" + model +
                       "\"; expected one of latent_factor, grandparent_ar2, "
                       "multiplicity, poverty_trap, assortative");
    }
    const auto& flags = it->second;
    for (const auto& p : provided) {
      bool applies = false;
      for (const auto& f : flags) applies = applies || p == f.flag;
      if (!applies) {
        throw UsageError("--" + p + " does not apply to model \"" + model + "\"");
      }
    }
    nlohmann::json params = nlohmann::json::object();
    for (const auto& f : flags) {
      if (provided.count(f.flag)) {
        params[f.json_key] = values.at(f.flag);
      } else if (f.required) {
        throw UsageError("model \"" + model + "\" requires " + f.field_name + " (--" +
                         f.flag + ")");
      }
    }
    return model_from_json({{"model", model}, {"params", params}});
  }
};

// Applies config-file values to every flag the command line left unset.
// Keys mirror the long flag names exactly.
struct ConfigBinding {
  CLI::Option* option;
  std::function<void(const nlohmann::json&)> apply;
};

class ConfigMerger {
 public:
  explicit ConfigMerger(std::string command) : command_(std::move(command)) {}

  void bind_double(CLI::Option* opt, double& target) {
    bindings_[opt->get_name()] = {opt, [&target, opt](const nlohmann::json& v) {
                                    if (!v.is_number()) {
                                      throw UsageError("config key \"" +
                                                       strip(opt->get_name()) +
                                                       "\" must be a number");
                                    }
                                    target = v.get<double>();
                                  }};
  }
  void bind_int(CLI::Option* opt, std::int64_t& target) {
    bindings_[opt->get_name()] = {opt, [&target, opt](const nlohmann::json& v) {
                                    if (!v.is_number_integer()) {
                                      throw UsageError("config key \"" +
                                                       strip(opt->get_name()) +
                                                       "\" must be an integer");
                                    }
                                    target = v.get<std::int64_t>();
                                  }};
  }
  void bind_int32(CLI::Option* opt, int& target) {
    bindings_[opt->get_name()] = {opt, [&target, opt](const nlohmann::json& v) {
                                    if (!v.is_number_integer()) {
                                      throw UsageError("config key \"" +
                                                       strip(opt->get_name()) +
                                                       "\" must be an integer");
                                    }
                                    target = v.get<int>();
                                  }};
  }
  void bind_uint(CLI::Option* opt, std::uint64_t& target) {
    bindings_[opt->get_name()] = {opt, [&target, opt](const nlohmann::json& v) {
                                    if (!v.is_number_unsigned() && !v.is_number_integer()) {
                                      throw UsageError("config key \"" +
                                                       strip(opt->get_name()) +
                                                       "\" must be an integer");
                                    }
                                    target = v.get<std::uint64_t>();
                                  }};
  }
  void bind_string(CLI::Option* opt, std::string& target) {
    bindings_[opt->get_name()] = {opt, [&target, opt](const nlohmann::json& v) {
                                    if (!v.is_string()) {
                                      throw UsageError("config key \"" +
                                                       strip(opt->get_name()) +
                                                       "\" must be a string");
                                    }
                                    target = v.get<std::string>();
                                  }};
  }
  void bind_flag(CLI::Option* opt, bool& target) {
    bindings_[opt->get_name()] = {opt, [&target, opt](const nlohmann::json& v) {
                                    if (!v.is_boolean()) {
                                      throw UsageError("config key \"" +
                                                       strip(opt->get_name()) +
                                                       "\" must be a boolean");
                                    }
                                    target = v.get<bool>();
                                  }};
  }
  void bind_model(ModelFlags& flags) { model_flags_ = &flags; }

  void merge(const std::string& path) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw UsageError(path + ": " + e.what());
    }
    if (!doc.is_object()) throw UsageError(path + ": config must be a JSON object");
    auto schema = doc.find("schema_id");
    if (schema == doc.end() || !schema->is_string() ||
        schema->get<std::string>() != kConfigSchema) {
      throw UsageError(path + ": config requires \"schema_id\": \"" +
                       std::string(kConfigSchema) + "\"");
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string& key = it.key();
      if (key == "schema_id") continue;
      if (key == "command") {
        if (!it->is_string() || it->get<std::string>() != command_) {
          throw UsageError(path + ": config \"command\" does not match subcommand \"" +
                           command_ + "\"");
        }
        continue;
      }
      if (auto b = bindings_.find("--" + key); b != bindings_.end()) {
        if (b->second.option->count() == 0) b->second.apply(*it);
        continue;
      }
      if (model_flags_ != nullptr) {
        if (key == "model") {
          if (!it->is_string()) throw UsageError("config key \"model\" must be a string");
          if (model_flags_->model_option->count() == 0) {
            model_flags_->model = it->get<std::string>();
          }
          continue;
        }
        if (auto opt = model_flags_->options.find(key); opt != model_flags_->options.end()) {
          if (opt->second->count() == 0) {
            if (!it->is_number()) {
              throw UsageError("config key \"" + key + "\" must be a number");
            }
            model_flags_->values[key] = it->get<double>();
            model_flags_->provided.insert(key);
          }
          continue;
        }
      }
      throw UsageError(path + ": unknown config key \"" + key + "\"");
    }
  }

 private:
  static std::string strip(const std::string& name) {
    return name.rfind("--", 0) == 0 ? name.substr(2) : name;
  }
  std::string command_;
  std::map<std::string, ConfigBinding> bindings_;
  ModelFlags* model_flags_ = nullptr;
};

std::string resolve_format(const std::string& format, const std::string& out_path,
                           const char* fallback) {
  if (format != "auto") return format;
  const auto dot = out_path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : out_path.substr(dot + 1);
  if (ext == "json") return "json";
  if (ext == "csv") return "csv";
  return fallback;
}

struct SimulateArgs {
  ModelFlags model;
  std::int64_t dynasties = 0;
  int generations = 0;
  int children = 1;
  std::uint64_t seed = 0;
  int threads = 0;
  std::int64_t person_cap = 100'000'000;
  bool include_latent = false;
  std::string out;
  std::string format = "auto";
  std::string config;
  CLI::Option* dyn_opt = nullptr;
  CLI::Option* gen_opt = nullptr;
  ConfigMerger merger{"simulate"};
};

void run_simulate(SimulateArgs& a) {
  if (!a.config.empty()) a.merger.merge(a.config);
  const ModelSpec spec = a.model.build();
  if (a.dynasties <= 0) throw UsageError("--dynasties is required and must be positive");
  if (a.generations < 2) throw UsageError("--generations is required and must be >= 2");
  SimTopology topo{a.dynasties, a.generations, a.children, a.seed};
  SimulateOptions opts;
  opts.threads = a.threads;
  opts.person_cap = a.person_cap;
  const Pedigree ped = simulate(spec, topo, opts);
  const std::string fmt = resolve_format(a.format, a.out, "csv");
  if (fmt == "csv") {
    emit_text(panel_to_csv(ped, a.include_latent), a.out);
  } else if (fmt == "json") {
    emit_text(dump_json(panel_to_json(ped, a.include_latent)), a.out);
  } else {
    throw UsageError("unknown format \"" + a.format + "\"; expected csv or json");
  }
}

struct MomentsArgs {
  ModelFlags model;
  int max_k = 7;
  std::string out;
  std::string format = "auto";
  std::string config;
  ConfigMerger merger{"moments"};
};

void run_moments(MomentsArgs& a) {
  if (!a.config.empty()) a.merger.merge(a.config);
  const ModelSpec spec = a.model.build();
  const MomentSet moments = analytic_moments(spec, a.max_k);
  const std::string fmt = resolve_format(a.format, a.out, "csv");
  if (fmt == "csv") {
    std::ostringstream os;
    os << "# mobsim-moments-v1 version=" << kVersion << " model=" << model_name(spec)
       << " max_k=" << a.max_k << "\n"
       << to_csv(moments);
    emit_text(os.str(), a.out);
  } else if (fmt == "json") {
    nlohmann::ordered_json doc;
    doc["version"] = kVersion;
    doc["model"] = to_json(spec);
    doc["max_k"] = a.max_k;
    doc["moments"] = to_json(moments);
    emit_text(dump_json(doc), a.out);
  } else {
    throw UsageError("unknown format \"" + a.format + "\"; expected csv or json");
  }
}

struct FitArgs {
  double beta1 = 0.0;
  double beta2 = 0.0;
  std::string moments_path;
  std::string out;
  std::string config;
  CLI::Option* beta1_opt = nullptr;
  CLI::Option* beta2_opt = nullptr;
  CLI::Option* moments_opt = nullptr;
  bool beta1_set = false;
  bool beta2_set = false;
  ConfigMerger merger{"fit"};
};

MomentSet moments_from_csv(const std::string& text, const std::string& path) {
  MomentSet ms;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("k,beta_k", 0) != 0) {
        throw DataError(path + ": line " + std::to_string(line_no) +
                        ": expected header starting with \"k,beta_k\"");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string k_str, beta_str;
    if (!std::getline(row, k_str, ',') || !std::getline(row, beta_str, ',')) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": malformed row");
    }
    try {
      ms.beta_k[std::stoi(k_str)] = std::stod(beta_str);
    } catch (const std::exception&) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": malformed row");
    }
  }
  if (ms.beta_k.empty()) throw DataError(path + ": no moment rows");
  return ms;
}

void run_fit(FitArgs& a) {
  if (!a.config.empty()) a.merger.merge(a.config);
  a.beta1_set = a.beta1_set || a.beta1_opt->count() > 0;
  a.beta2_set = a.beta2_set || a.beta2_opt->count() > 0;

  MomentSet moments;
  if (!a.moments_path.empty()) {
    if (a.beta1_set || a.beta2_set) {
      throw UsageError("--moments cannot be combined with --beta1/--beta2");
    }
    moments = moments_from_csv(read_file(a.moments_path), a.moments_path);
  } else {
    if (!a.beta1_set || !a.beta2_set) {
      throw UsageError("fit requires either --moments FILE or both --beta1 and --beta2");
    }
    moments.beta_k[1] = a.beta1;
    moments.beta_k[2] = a.beta2;
  }
  const FitResult fit = fit_latent_factor(moments);
  nlohmann::ordered_json doc;
  doc["version"] = kVersion;
  doc["rho_sq"] = fit.rho_sq;
  doc["lambda"] = fit.lambda;
  doc["residual_norm"] = fit.residual_norm;
  doc["warnings"] = fit.warnings;
  emit_text(dump_json(doc), a.out);
}

struct RegressArgs {
  std::string panel;
  std::string panel_format = "auto";
  std::string estimator = "beta_k";
  int k = 1;
  std::string line = "father";
  int child_generation = -1;
  std::vector<int> lags;
  std::vector<std::string> controls;
  bool with_parent = false;
  int group_from = 0;
  int group_to = 1;
  std::string out;
  std::string format = "json";
  std::string config;
  CLI::Option* child_gen_opt = nullptr;
  ConfigMerger merger{"regress"};
};

nlohmann::ordered_json panel_meta(const Pedigree& ped, const std::string& path) {
  return {{"path", path},
          {"model", ped.model},
          {"topology",
           {{"n_dynasties", ped.topology.n_dynasties},
            {"generations", ped.topology.generations},
            {"children_per_family", ped.topology.children_per_family},
            {"seed", ped.topology.seed}}}};
}

void run_regress(RegressArgs& a) {
  if (!a.config.empty()) a.merger.merge(a.config);
  if (a.panel.empty()) throw UsageError("--panel is required");
  const Pedigree ped = load_panel(a.panel, a.panel_format);

  nlohmann::ordered_json doc;
  doc["version"] = kVersion;
  doc["panel"] = panel_meta(ped, a.panel);
  doc["estimator"] = a.estimator;
  std::string text;

  if (a.estimator == "beta_k") {
    Pedigree::Line line;
    if (a.line == "father") {
      line = Pedigree::Line::Father;
    } else if (a.line == "mother") {
      line = Pedigree::Line::Mother;
    } else {
      throw UsageError("unknown --line \"" + a.line + "\"; expected father or mother");
    }
    std::optional<int> child_gen;
    if (a.child_gen_opt->count() > 0 || a.child_generation >= 0) {
      if (a.child_generation >= 0) child_gen = a.child_generation;
    }
    const RegressionResult res = beta_k_estimate(ped, a.k, line, child_gen);
    doc["result"] = to_json(res);
    text = to_text_table(res);
  } else if (a.estimator == "multigen") {
    std::vector<int> lags = a.lags.empty() ? std::vector<int>{1, 2} : a.lags;
    const RegressionResult res = multigen_regression(ped, lags, a.controls);
    doc["result"] = to_json(res);
    text = to_text_table(res);
  } else if (a.estimator == "sibling") {
    const RegressionResult res = sibling_regression(ped, a.with_parent);
    doc["result"] = to_json(res);
    text = to_text_table(res);
  } else if (a.estimator == "group") {
    const double slope = group_level_estimate(ped, a.group_from, a.group_to);
    doc["result"] = {{"group_slope", slope},
                     {"parent_generation", a.group_from},
                     {"child_generation", a.group_to}};
    text = "group_slope  " + fmt_display(slope) + "\n";
  } else {
    throw UsageError("unknown estimator \"" + a.estimator +
                     "\"; expected beta_k, multigen, sibling, or group");
  }

  if (a.format == "json") {
    emit_text(dump_json(doc), a.out);
  } else if (a.format == "text") {
    emit_text(text, a.out);
  } else {
    throw UsageError("unknown format \"" + a.format + "\"; expected json or text");
  }
}

struct ReplicateArgs {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config;
  CLI::Option* seed_opt = nullptr;
  bool seed_set = false;
  ConfigMerger merger{"replicate"};
};

void run_replicate(ReplicateArgs& a) {
  if (!a.config.empty()) a.merger.merge(a.config);
  a.seed_set = a.seed_set || a.seed_opt->count() > 0;
  std::optional<std::uint64_t> seed;
  if (a.seed_set) seed = a.seed;
  const ReplicationReport report = replicate(a.experiment, seed);

  std::error_code ec;
  std::filesystem::create_directories(a.out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + a.out_dir);

  nlohmann::ordered_json doc = to_json(report);
  doc["version"] = kVersion;
  const auto dir = std::filesystem::path(a.out_dir);
  write_file((dir / "report.json").string(), dump_json(doc));
  write_file((dir / "series.csv").string(), report.series_csv);
  if (!report.text_table.empty()) {
    write_file((dir / (report.experiment_id + ".txt")).string(), report.text_table);
  }

  std::cout << report.experiment_id << ": " << (report.pass ? "PASS" : "FAIL")
            << " max_abs_deviation=" << fmt_display(report.max_abs_deviation)
            << " tolerance=" << fmt_display(report.tolerance) << "\n";
  for (const auto& c : report.checks) {
    if (!c.pass) std::cout << "  failed check: " << c.name << " (" << c.detail << ")\n";
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"status-transmission models: simulation, moments, estimation, replication"};
  app.set_version_flag("--version", std::string("mobsim ") + kVersion);
  app.require_subcommand(0, 1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate a pedigree panel");
  sim.model.attach(*sim_cmd);
  sim.dyn_opt = sim_cmd->add_option("--dynasties", sim.dynasties, "number of independent dynasties");
  sim.gen_opt = sim_cmd->add_option("--generations", sim.generations, "generations including founders");
  auto* sim_children = sim_cmd->add_option("--children", sim.children, "children per family (default 1)");
  auto* sim_seed = sim_cmd->add_option("--seed", sim.seed, "master RNG seed (default 0)");
  auto* sim_threads = sim_cmd->add_option("--threads", sim.threads, "worker threads; 0 = auto");
  auto* sim_cap = sim_cmd->add_option("--person_cap", sim.person_cap, "maximum person records");
  auto* sim_latent = sim_cmd->add_flag("--include_latent", sim.include_latent,
                                       "export latent endowment columns");
  auto* sim_out = sim_cmd->add_option("--out", sim.out, "output path (default stdout)");
  auto* sim_fmt = sim_cmd->add_option("--format", sim.format, "csv, json, or auto");
  sim_cmd->add_option("--config", sim.config, "JSON config file; flags win");
  sim.merger.bind_model(sim.model);
  sim.merger.bind_int(sim.dyn_opt, sim.dynasties);
  sim.merger.bind_int32(sim.gen_opt, sim.generations);
  sim.merger.bind_int32(sim_children, sim.children);
  sim.merger.bind_uint(sim_seed, sim.seed);
  sim.merger.bind_int32(sim_threads, sim.threads);
  sim.merger.bind_int(sim_cap, sim.person_cap);
  sim.merger.bind_flag(sim_latent, sim.include_latent);
  sim.merger.bind_string(sim_out, sim.out);
  sim.merger.bind_string(sim_fmt, sim.format);

  MomentsArgs mom;
  auto* mom_cmd = app.add_subcommand("moments", "closed-form kinship moments");
  mom.model.attach(*mom_cmd);
  auto* mom_k = mom_cmd->add_option("--max_k", mom.max_k, "deepest ancestor distance (default 7)");
  auto* mom_out = mom_cmd->add_option("--out", mom.out, "output path (default stdout)");
  auto* mom_fmt = mom_cmd->add_option("--format", mom.format, "csv, json, or auto");
  mom_cmd->add_option("--config", mom.config, "JSON config file; flags win");
  mom.merger.bind_model(mom.model);
  mom.merger.bind_int32(mom_k, mom.max_k);
  mom.merger.bind_string(mom_out, mom.out);
  mom.merger.bind_string(mom_fmt, mom.format);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "recover latent-factor parameters from moments");
  fit.beta1_opt = fit_cmd->add_option("--beta1", fit.beta1, "ancestor correlation at distance 1");
  fit.beta2_opt = fit_cmd->add_option("--beta2", fit.beta2, "ancestor correlation at distance 2");
  fit.moments_opt = fit_cmd->add_option("--moments", fit.moments_path,
                                        "CSV of moments (header k,beta_k)");
  auto* fit_out = fit_cmd->add_option("--out", fit.out, "output path (default stdout)");
  fit_cmd->add_option("--config", fit.config, "JSON config file; flags win");
  fit.merger.bind_double(fit.beta1_opt, fit.beta1);
  fit.merger.bind_double(fit.beta2_opt, fit.beta2);
  fit.merger.bind_string(fit.moments_opt, fit.moments_path);
  fit.merger.bind_string(fit_out, fit.out);

  RegressArgs reg;
  auto* reg_cmd = app.add_subcommand("regress", "estimators over a pedigree panel");
  auto* reg_panel = reg_cmd->add_option("--panel", reg.panel, "panel file (CSV or JSON)");
  auto* reg_pfmt = reg_cmd->add_option("--panel_format", reg.panel_format, "csv, json, or auto");
  auto* reg_est = reg_cmd->add_option("--estimator", reg.estimator,
                                      "beta_k, multigen, sibling, or group");
  auto* reg_k = reg_cmd->add_option("--k", reg.k, "ancestor distance for beta_k");
  auto* reg_line = reg_cmd->add_option("--line", reg.line, "ancestor line: father or mother");
  reg.child_gen_opt = reg_cmd->add_option("--child_generation", reg.child_generation,
                                          "restrict descendants to one generation");
  auto* reg_lags = reg_cmd->add_option("--lags", reg.lags, "ancestor lags for multigen");
  reg_lags->delimiter(',');
  auto* reg_controls = reg_cmd->add_option("--controls", reg.controls,
                                           "extra controls: mother_y, spouse_y");
  reg_controls->delimiter(',');
  auto* reg_parent = reg_cmd->add_flag("--with_parent", reg.with_parent,
                                       "control the shared parent in sibling regression");
  auto* reg_from = reg_cmd->add_option("--from", reg.group_from, "group estimator: parent generation");
  auto* reg_to = reg_cmd->add_option("--to", reg.group_to, "group estimator: child generation");
  auto* reg_out = reg_cmd->add_option("--out", reg.out, "output path (default stdout)");
  auto* reg_fmt = reg_cmd->add_option("--format", reg.format, "json or text");
  reg_cmd->add_option("--config", reg.config, "JSON config file; flags win");
  reg.merger.bind_string(reg_panel, reg.panel);
  reg.merger.bind_string(reg_pfmt, reg.panel_format);
  reg.merger.bind_string(reg_est, reg.estimator);
  reg.merger.bind_int32(reg_k, reg.k);
  reg.merger.bind_string(reg_line, reg.line);
  reg.merger.bind_int32(reg.child_gen_opt, reg.child_generation);
  reg.merger.bind_flag(reg_parent, reg.with_parent);
  reg.merger.bind_int32(reg_from, reg.group_from);
  reg.merger.bind_int32(reg_to, reg.group_to);
  reg.merger.bind_string(reg_out, reg.out);
  reg.merger.bind_string(reg_fmt, reg.format);

  ReplicateArgs rep;
  auto* rep_cmd = app.add_subcommand("replicate", "rebuild a shipped figure or table");
  rep_cmd->add_option("experiment", rep.experiment,
                      "fig1a, fig1b, fig2a, fig2b, or table2")
      ->required();
  rep.seed_opt = rep_cmd->add_option("--seed", rep.seed, "override the canonical seed");
  auto* rep_out = rep_cmd->add_option("--out", rep.out_dir, "output directory (default .)");
  rep_cmd->add_option("--config", rep.config, "JSON config file; flags win");
  rep.merger.bind_uint(rep.seed_opt, rep.seed);
  rep.merger.bind_string(rep_out, rep.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sim_cmd->parsed()) {
      sim.model.collect_provided();
      run_simulate(sim);
    } else if (mom_cmd->parsed()) {
      mom.model.collect_provided();
      run_moments(mom);
    } else if (fit_cmd->parsed()) {
      run_fit(fit);
    } else if (reg_cmd->parsed()) {
      run_regress(reg);
    } else if (rep_cmd->parsed()) {
      run_replicate(rep);
    } else {
      std::cout << app.help();
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace mobsim
