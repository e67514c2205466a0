#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "mobsim/errors.hpp"
#include "mobsim/estimators.hpp"
#include "mobsim/experiments.hpp"
#include "mobsim/models.hpp"
#include "mobsim/moments.hpp"
#include "mobsim/panel_io.hpp"
#include "mobsim/simulate.hpp"
#include "mobsim/version.hpp"

namespace py = pybind11;

namespace {

// JSON is the lingua franca between the core and Python; round-tripping
// through the stdlib json module avoids a hand-written recursive converter.
nlohmann::json to_nl(const py::object& obj) {
  const py::module json = py::module::import("json");
  const auto text = py::cast<std::string>(json.attr("dumps")(obj));
  return nlohmann::json::parse(text);
}

py::object to_py(const nlohmann::ordered_json& doc) {
  const py::module json = py::module::import("json");
  return json.attr("loads")(py::str(doc.dump()));
}

mobsim::ModelSpec spec_from_py(const py::dict& model) {
  return mobsim::model_from_json(to_nl(model));
}

mobsim::Pedigree::Line line_from_string(const std::string& line) {
  if (line == "father") return mobsim::Pedigree::Line::Father;
  if (line == "mother") return mobsim::Pedigree::Line::Mother;
  throw mobsim::UsageError("unknown line \"" + line + "\"; expected father or mother");
}

py::dict topology_dict(const mobsim::Pedigree& ped) {
  py::dict d;
  d["n_dynasties"] = ped.topology.n_dynasties;
  d["generations"] = ped.topology.generations;
  d["children_per_family"] = ped.topology.children_per_family;
  d["seed"] = ped.topology.seed;
  return d;
}

py::object panel_column(const mobsim::Pedigree& ped, const std::string& name) {
  auto ints = [&](auto member) {
    py::list out;
    for (const auto& p : ped.persons) {
      const std::int64_t v = p.*member;
      if (v == mobsim::kNoPerson) {
        out.append(py::none());
      } else {
        out.append(v);
      }
    }
    return py::object(out);
  };
  if (name == "person_id") return ints(&mobsim::Person::person_id);
  if (name == "dynasty_id") return ints(&mobsim::Person::dynasty_id);
  if (name == "father_id") return ints(&mobsim::Person::father_id);
  if (name == "mother_id") return ints(&mobsim::Person::mother_id);
  if (name == "spouse_id") return ints(&mobsim::Person::spouse_id);
  if (name == "generation") {
    py::list out;
    for (const auto& p : ped.persons) out.append(p.generation);
    return py::object(out);
  }
  auto reals = [&](auto member) {
    py::list out;
    for (const auto& p : ped.persons) out.append(p.*member);
    return py::object(out);
  };
  if (name == "y") return reals(&mobsim::Person::y);
  if (name == "e1") return reals(&mobsim::Person::e1);
  if (name == "e2") return reals(&mobsim::Person::e2);
  throw mobsim::UsageError("unknown panel column \"" + name + "\"");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multigenerational status-transmission models: simulation, closed-form "
            "kinship moments, estimators, and replication experiments.";
  m.attr("__version__") = mobsim::kVersion;

  py::register_exception<mobsim::UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<mobsim::DataError>(m, "DataError", PyExc_IOError);
  py::register_exception<mobsim::InfeasibleError>(m, "InfeasibleError",
                                                  PyExc_ArithmeticError);

  py::class_<mobsim::Pedigree>(m, "Panel",
                               "Simulated or loaded pedigree panel. Columns: person_id, "
                               "dynasty_id, generation, father_id, mother_id, spouse_id, "
                               "y, e1, e2.")
      .def_property_readonly("n_persons",
                             [](const mobsim::Pedigree& p) { return p.persons.size(); })
      .def_property_readonly("model",
                             [](const mobsim::Pedigree& p) { return p.model; })
      .def_property_readonly("topology", &topology_dict)
      .def("column", &panel_column, py::arg("name"),
           "One column across all persons; missing links map to None.")
      .def("to_csv", &mobsim::panel_to_csv, py::arg("include_latent") = false)
      .def("save",
           [](const mobsim::Pedigree& p, const std::string& path, bool include_latent) {
             mobsim::write_file(path, mobsim::panel_to_csv(p, include_latent));
           },
           py::arg("path"), py::arg("include_latent") = false)
      .def("__len__", [](const mobsim::Pedigree& p) { return p.persons.size(); })
      .def("__repr__", [](const mobsim::Pedigree& p) {
        return "<Panel model=" + p.model + " persons=" + std::to_string(p.persons.size()) +
               ">";
      });

  m.def(
      "validate_model",
      [](const py::dict& model) {
        py::list out;
        mobsim::ModelSpec spec;
        try {
          spec = spec_from_py(model);
        } catch (const mobsim::UsageError& e) {
          // Parsing rejects out-of-range parameters outright; report that as
          // a violation instead of raising so this stays a total function.
          py::dict d;
          d["severity"] = "error";
          d["message"] = std::string(e.what());
          out.append(d);
          return out;
        }
        for (const auto& v : mobsim::validate(spec)) {
          py::dict d;
          d["severity"] = v.severity == mobsim::Severity::Error ? "error" : "warning";
          d["message"] = v.message;
          out.append(d);
        }
        return out;
      },
      py::arg("model"),
      "Parameter invariant violations for a model dict {\"model\": ..., \"params\": "
      "{...}}; empty means valid.");

  m.def(
      "analytic_moments",
      [](const py::dict& model, int max_k) {
        return to_py(mobsim::to_json(mobsim::analytic_moments(spec_from_py(model), max_k)));
      },
      py::arg("model"), py::arg("max_k") = 7,
      "Closed-form kinship correlations; keys beta_k, sibling, cousin, spousal, "
      "latent_beta_k, pathway1_share where defined.");

  m.def("iterated_prediction", &mobsim::iterated_prediction, py::arg("beta1"),
        py::arg("k"), "Naive geometric extrapolation beta1**k.");

  m.def("duality_gp_coefficient", &mobsim::duality_gp_coefficient, py::arg("beta1"),
        py::arg("beta2"),
        "Population grandparent coefficient (beta2 - beta1**2) / (1 - beta1**2).");

  m.def(
      "simulate",
      [](const py::dict& model, std::int64_t dynasties, int generations, int children,
         std::uint64_t seed, int threads) {
        mobsim::SimTopology topo{dynasties, generations, children, seed};
        mobsim::SimulateOptions opts;
        opts.threads = threads;
        return mobsim::simulate(spec_from_py(model), topo, opts);
      },
      py::arg("model"), py::arg("dynasties"), py::arg("generations"),
      py::arg("children") = 1, py::arg("seed") = 0, py::arg("threads") = 0,
      "Simulate a pedigree panel; deterministic in (model, topology, seed).");

  m.def("load_panel", &mobsim::load_panel, py::arg("path"), py::arg("format") = "auto",
        "Load a panel from CSV or JSON.");

  m.def(
      "beta_k_estimate",
      [](const mobsim::Pedigree& ped, int k, const std::string& line,
         std::optional<int> child_generation) {
        return to_py(mobsim::to_json(
            mobsim::beta_k_estimate(ped, k, line_from_string(line), child_generation)));
      },
      py::arg("panel"), py::arg("k") = 1, py::arg("line") = "father",
      py::arg("child_generation") = py::none(),
      "Slope of y on the ancestor k steps up, y standardized per generation.");

  m.def(
      "multigen_regression",
      [](const mobsim::Pedigree& ped, const std::vector<int>& lags,
         const std::vector<std::string>& controls) {
        return to_py(mobsim::to_json(mobsim::multigen_regression(ped, lags, controls)));
      },
      py::arg("panel"), py::arg("lags") = std::vector<int>{1, 2},
      py::arg("controls") = std::vector<std::string>{},
      "OLS of child y on father-line ancestors at the given lags plus controls.");

  m.def(
      "sibling_regression",
      [](const mobsim::Pedigree& ped, bool include_parent) {
        return to_py(mobsim::to_json(mobsim::sibling_regression(ped, include_parent)));
      },
      py::arg("panel"), py::arg("include_parent") = false,
      "OLS of y on a same-father sibling's y, optionally controlling the parent.");

  m.def(
      "fit_latent_factor",
      [](const std::map<int, double>& beta_k) {
        mobsim::MomentSet ms;
        ms.beta_k = beta_k;
        return to_py(mobsim::to_json(mobsim::fit_latent_factor(ms)));
      },
      py::arg("beta_k"),
      "Recover (rho_sq, lambda) from ancestor correlations {k: beta_k}.");

  m.def("group_level_estimate", &mobsim::group_level_estimate, py::arg("panel"),
        py::arg("parent_generation"), py::arg("child_generation"),
        "Slope of dynasty-mean y across generations.");

  m.def("poverty_persistence_curve", &mobsim::poverty_persistence_curve, py::arg("panel"),
        py::arg("ybar"), py::arg("max_k"),
        "P(descendant below ybar | founder below ybar) by generation distance.");

  m.def(
      "replicate",
      [](const std::string& experiment_id, std::optional<std::uint64_t> seed) {
        return to_py(mobsim::to_json(mobsim::replicate(experiment_id, seed)));
      },
      py::arg("experiment_id"), py::arg("seed") = py::none(),
      "Run a shipped experiment (fig1a, fig1b, fig2a, fig2b, table2) and return its "
      "report.");
}
