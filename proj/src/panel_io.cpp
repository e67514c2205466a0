#include "mobsim/panel_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "mobsim/errors.hpp"
#include "mobsim/version.hpp"

namespace mobsim {

namespace {

const char* kPanelSchema = "mobsim-panel-v1";

const std::vector<std::string> kKnownColumns = {
    "person_id", "dynasty_id", "generation", "father_id", "mother_id",
    "spouse_id", "y",          "e1",         "e2"};

bool has_finite(const Pedigree& ped, double Person::* field) {
  for (const auto& p : ped.persons) {
    if (std::isfinite(p.*field)) return true;
  }
  return false;
}

std::string link_str(std::int64_t id) {
  return id == kNoPerson ? std::string() : std::to_string(id);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::int64_t parse_int(const std::string& s, const std::string& where) {
  std::int64_t value = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw DataError(where + ": \"" + s + "\" is not an integer");
  }
  return value;
}

double parse_double(const std::string& s, const std::string& where) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw DataError(where + ": \"" + s + "\" is not a number");
  }
  return value;
}

// Structural checks shared by both loaders; `label(i)` names the source
// location of person i for error messages.
void check_loaded(const Pedigree& ped,
                  const std::function<std::string(std::size_t)>& label) {
  for (std::size_t i = 0; i < ped.persons.size(); ++i) {
    const Person& p = ped.persons[i];
    const std::string where = label(i);
    if (p.person_id < 0) throw DataError(where + ": person_id must be non-negative");
    if (p.generation < 0) throw DataError(where + ": negative generation");
    if (!std::isfinite(p.y)) throw DataError(where + ": non-finite y");
    for (auto [link, name] : {std::pair{p.father_id, "father_id"},
                              std::pair{p.mother_id, "mother_id"}}) {
      if (link == kNoPerson) continue;
      const Person* parent = ped.find(link);
      if (parent == nullptr) {
        throw DataError(where + ": " + name + " " + std::to_string(link) +
                        " does not exist");
      }
      if (parent->generation != p.generation - 1) {
        throw DataError(where + ": " + name + " " + std::to_string(link) +
                        " must be exactly one generation above the child");
      }
    }
    if (p.spouse_id != kNoPerson) {
      const Person* spouse = ped.find(p.spouse_id);
      if (spouse == nullptr) {
        throw DataError(where + ": spouse_id " + std::to_string(p.spouse_id) +
                        " does not exist");
      }
      if (spouse->generation != p.generation) {
        throw DataError(where + ": spouse " + std::to_string(p.spouse_id) +
                        " is in a different generation");
      }
      if (spouse->spouse_id != p.person_id) {
        throw DataError(where + ": spouse link to " + std::to_string(p.spouse_id) +
                        " is not symmetric");
      }
    }
  }
}

void infer_topology(Pedigree& ped) {
  std::unordered_set<std::int64_t> dynasties;
  int max_gen = 0;
  for (const auto& p : ped.persons) {
    dynasties.insert(p.dynasty_id);
    max_gen = std::max(max_gen, p.generation);
  }
  if (ped.topology.n_dynasties == 0) {
    ped.topology.n_dynasties = static_cast<std::int64_t>(dynasties.size());
  }
  if (ped.topology.generations == 0) ped.topology.generations = max_gen + 1;
}

}  // namespace

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_display(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string panel_to_csv(const Pedigree& ped, bool include_latent) {
  const bool with_e1 = include_latent && has_finite(ped, &Person::e1);
  const bool with_e2 = include_latent && has_finite(ped, &Person::e2);

  std::ostringstream os;
  os << "# " << kPanelSchema << " version=" << kVersion << " model=" << ped.model
     << " seed=" << ped.topology.seed << " n_dynasties=" << ped.topology.n_dynasties
     << " generations=" << ped.topology.generations
     << " children_per_family=" << ped.topology.children_per_family << "\n";
  os << "person_id,dynasty_id,generation,father_id,mother_id,spouse_id,y";
  if (with_e1) os << ",e1";
  if (with_e2) os << ",e2";
  os << "\n";
  for (const auto& p : ped.persons) {
    os << p.person_id << ',' << p.dynasty_id << ',' << p.generation << ','
       << link_str(p.father_id) << ',' << link_str(p.mother_id) << ','
       << link_str(p.spouse_id) << ',' << fmt_full(p.y);
    if (with_e1) os << ',' << (std::isfinite(p.e1) ? fmt_full(p.e1) : std::string());
    if (with_e2) os << ',' << (std::isfinite(p.e2) ? fmt_full(p.e2) : std::string());
    os << "\n";
  }
  return os.str();
}

nlohmann::ordered_json panel_to_json(const Pedigree& ped, bool include_latent) {
  const bool with_e1 = include_latent && has_finite(ped, &Person::e1);
  const bool with_e2 = include_latent && has_finite(ped, &Person::e2);

  nlohmann::ordered_json doc;
  doc["schema"] = kPanelSchema;
  doc["version"] = kVersion;
  doc["model"] = ped.model;
  doc["topology"] = {{"n_dynasties", ped.topology.n_dynasties},
                     {"generations", ped.topology.generations},
                     {"children_per_family", ped.topology.children_per_family},
                     {"seed", ped.topology.seed}};
  nlohmann::ordered_json persons = nlohmann::ordered_json::array();
  for (const auto& p : ped.persons) {
    nlohmann::ordered_json row;
    row["person_id"] = p.person_id;
    row["dynasty_id"] = p.dynasty_id;
    row["generation"] = p.generation;
    row["father_id"] = p.father_id == kNoPerson ? nlohmann::ordered_json()
                                                : nlohmann::ordered_json(p.father_id);
    row["mother_id"] = p.mother_id == kNoPerson ? nlohmann::ordered_json()
                                                : nlohmann::ordered_json(p.mother_id);
    row["spouse_id"] = p.spouse_id == kNoPerson ? nlohmann::ordered_json()
                                                : nlohmann::ordered_json(p.spouse_id);
    row["y"] = p.y;
    if (with_e1 && std::isfinite(p.e1)) row["e1"] = p.e1;
    if (with_e2 && std::isfinite(p.e2)) row["e2"] = p.e2;
    persons.push_back(std::move(row));
  }
  doc["persons"] = std::move(persons);
  return doc;
}

Pedigree panel_from_csv(const std::string& text) {
  Pedigree ped;
  std::vector<int> line_of;
  std::vector<std::string> header;
  std::unordered_set<std::int64_t> seen_ids;

  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      // Metadata tokens: key=value pairs; unrecognized tokens are ignored.
      std::istringstream meta(line.substr(1));
      std::string token;
      while (meta >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        try {
          if (key == "model") ped.model = value;
          else if (key == "seed") ped.topology.seed = std::stoull(value);
          else if (key == "n_dynasties") ped.topology.n_dynasties = std::stoll(value);
          else if (key == "generations") ped.topology.generations = std::stoi(value);
          else if (key == "children_per_family")
            ped.topology.children_per_family = std::stoi(value);
        } catch (const std::exception&) {
          throw DataError("line " + std::to_string(line_no) +
                          ": malformed metadata token \"" + token + "\"");
        }
      }
      continue;
    }
    if (header.empty()) {
      header = split_csv_line(line);
      for (const auto& col : header) {
        if (std::find(kKnownColumns.begin(), kKnownColumns.end(), col) ==
            kKnownColumns.end()) {
          throw DataError("line " + std::to_string(line_no) + ": unknown column \"" +
                          col + "\"");
        }
      }
      for (const char* required : {"person_id", "dynasty_id", "generation", "y"}) {
        if (std::find(header.begin(), header.end(), required) == header.end()) {
          throw DataError("panel header is missing required column \"" +
                          std::string(required) + "\"");
        }
      }
      continue;
    }

    const std::string where = "line " + std::to_string(line_no);
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(fields.size()));
    }
    Person p;
    for (std::size_t i = 0; i < header.size(); ++i) {
      const std::string& col = header[i];
      const std::string& field = fields[i];
      const std::string ctx = where + ", column " + col;
      if (col == "person_id") p.person_id = parse_int(field, ctx);
      else if (col == "dynasty_id") p.dynasty_id = parse_int(field, ctx);
      else if (col == "generation") p.generation = static_cast<int>(parse_int(field, ctx));
      else if (col == "father_id") p.father_id = field.empty() ? kNoPerson : parse_int(field, ctx);
      else if (col == "mother_id") p.mother_id = field.empty() ? kNoPerson : parse_int(field, ctx);
      else if (col == "spouse_id") p.spouse_id = field.empty() ? kNoPerson : parse_int(field, ctx);
      else if (col == "y") p.y = parse_double(field, ctx);
      else if (col == "e1") p.e1 = field.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                 : parse_double(field, ctx);
      else if (col == "e2") p.e2 = field.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                 : parse_double(field, ctx);
    }
    if (!seen_ids.insert(p.person_id).second) {
      throw DataError(where + ": duplicate person_id " + std::to_string(p.person_id));
    }
    ped.persons.push_back(p);
    line_of.push_back(line_no);
  }
  if (header.empty()) throw DataError("panel has no header row");
  if (ped.persons.empty()) throw DataError("panel has no data rows");

  ped.rebuild_index();
  check_loaded(ped, [&](std::size_t i) { return "line " + std::to_string(line_of[i]); });
  infer_topology(ped);
  return ped;
}

namespace {

Pedigree panel_from_json_impl(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DataError("panel document must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    if (key != "schema" && key != "version" && key != "model" && key != "topology" &&
        key != "persons") {
      throw DataError("unknown key \"" + key + "\" in panel document");
    }
  }
  if (auto it = doc.find("schema"); it != doc.end() && *it != kPanelSchema) {
    throw DataError("unsupported panel schema \"" + it->get<std::string>() + "\"");
  }

  Pedigree ped;
  if (auto it = doc.find("model"); it != doc.end()) ped.model = it->get<std::string>();
  if (auto it = doc.find("topology"); it != doc.end()) {
    const auto& topo = *it;
    for (auto t = topo.begin(); t != topo.end(); ++t) {
      const std::string& key = t.key();
      if (key == "n_dynasties") ped.topology.n_dynasties = t->get<std::int64_t>();
      else if (key == "generations") ped.topology.generations = t->get<int>();
      else if (key == "children_per_family")
        ped.topology.children_per_family = t->get<int>();
      else if (key == "seed") ped.topology.seed = t->get<std::uint64_t>();
      else throw DataError("unknown key \"" + key + "\" in panel topology");
    }
  }

  auto persons_it = doc.find("persons");
  if (persons_it == doc.end() || !persons_it->is_array()) {
    throw DataError("panel document requires a \"persons\" array");
  }
  std::unordered_set<std::int64_t> seen_ids;
  std::size_t idx = 0;
  for (const auto& row : *persons_it) {
    const std::string where = "persons[" + std::to_string(idx) + "]";
    if (!row.is_object()) throw DataError(where + ": person must be an object");
    Person p;
    for (auto it = row.begin(); it != row.end(); ++it) {
      const std::string& key = it.key();
      const auto& value = *it;
      if (key == "person_id") p.person_id = value.get<std::int64_t>();
      else if (key == "dynasty_id") p.dynasty_id = value.get<std::int64_t>();
      else if (key == "generation") p.generation = value.get<int>();
      else if (key == "father_id")
        p.father_id = value.is_null() ? kNoPerson : value.get<std::int64_t>();
      else if (key == "mother_id")
        p.mother_id = value.is_null() ? kNoPerson : value.get<std::int64_t>();
      else if (key == "spouse_id")
        p.spouse_id = value.is_null() ? kNoPerson : value.get<std::int64_t>();
      else if (key == "y") p.y = value.get<double>();
      else if (key == "e1") p.e1 = value.get<double>();
      else if (key == "e2") p.e2 = value.get<double>();
      else throw DataError(where + ": unknown key \"" + key + "\"");
    }
    if (!row.contains("person_id") || !row.contains("dynasty_id") ||
        !row.contains("generation") || !row.contains("y")) {
      throw DataError(where + ": person requires person_id, dynasty_id, generation, y");
    }
    if (!seen_ids.insert(p.person_id).second) {
      throw DataError(where + ": duplicate person_id " + std::to_string(p.person_id));
    }
    ped.persons.push_back(p);
    ++idx;
  }
  if (ped.persons.empty()) throw DataError("panel has no persons");

  ped.rebuild_index();
  check_loaded(ped, [](std::size_t i) { return "persons[" + std::to_string(i) + "]"; });
  infer_topology(ped);
  return ped;
}

}  // namespace

// Wrong-typed values surface as DataError like every other load failure.
Pedigree panel_from_json(const nlohmann::json& doc) {
  try {
    return panel_from_json_impl(doc);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("panel document: ") + e.what());
  }
}

Pedigree load_panel(const std::string& path, const std::string& format) {
  std::string fmt = format;
  if (fmt == "auto") {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    fmt = ext == "json" ? "json" : "csv";
  }
  const std::string text = read_file(path);
  try {
    if (fmt == "json") {
      return panel_from_json(nlohmann::json::parse(text));
    }
    if (fmt == "csv") {
      return panel_from_csv(text);
    }
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
  throw UsageError("unknown panel format \"" + format + "\"; expected csv or json");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (!in.good() && !in.eof()) throw DataError("error while reading " + path);
  return os.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << bytes;
  out.flush();
  if (!out.good()) throw DataError("error while writing " + path);
}

nlohmann::ordered_json to_json(const RegressionResult& r) {
  nlohmann::ordered_json coef = nlohmann::ordered_json::object();
  nlohmann::ordered_json se = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    coef[r.names[i]] = r.coefficients[i];
    se[r.names[i]] = r.std_errors[i];
  }
  nlohmann::ordered_json doc;
  doc["coefficients"] = std::move(coef);
  doc["std_errors"] = std::move(se);
  doc["r_squared"] = r.r_squared;
  doc["n_obs"] = r.n_obs;
  doc["warnings"] = r.warnings;
  return doc;
}

nlohmann::ordered_json to_json(const FitResult& r) {
  nlohmann::ordered_json doc;
  doc["rho_sq"] = r.rho_sq;
  doc["lambda"] = r.lambda;
  doc["residual_norm"] = r.residual_norm;
  doc["warnings"] = r.warnings;
  return doc;
}

std::string to_text_table(const RegressionResult& r) {
  std::size_t label_width = 12;
  for (const auto& name : r.names) label_width = std::max(label_width, name.size() + 2);

  std::ostringstream os;
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    os << std::left << std::setw(static_cast<int>(label_width)) << r.names[i]
       << std::right << std::setw(12) << fmt_display(r.coefficients[i]) << "\n";
    os << std::left << std::setw(static_cast<int>(label_width)) << ""
       << std::right << std::setw(12) << ("(" + fmt_display(r.std_errors[i]) + ")")
       << "\n";
  }
  os << std::left << std::setw(static_cast<int>(label_width)) << "r_squared"
     << std::right << std::setw(12) << fmt_display(r.r_squared) << "\n";
  os << std::left << std::setw(static_cast<int>(label_width)) << "n_obs"
     << std::right << std::setw(12) << r.n_obs << "\n";
  for (const auto& w : r.warnings) os << "note: " << w << "\n";
  return os.str();
}

}  // namespace mobsim
