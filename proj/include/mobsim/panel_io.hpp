#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "mobsim/estimators.hpp"
#include "mobsim/pedigree.hpp"

namespace mobsim {

// %.17g: decimal form that round-trips the exact double.
std::string fmt_full(double v);
// %.6g: display precision for human-facing tables.
std::string fmt_display(double v);

// CSV panel: one leading "#" metadata line (schema id, version, model,
// topology, seed), a header row, then one row per person. Missing links are
// empty fields; latent columns e1/e2 appear only with include_latent and
// only when the model tracks them. Numeric fields carry full round-trip
// precision.
std::string panel_to_csv(const Pedigree& ped, bool include_latent = false);

// JSON mirror of the CSV schema; missing links serialize as null.
nlohmann::ordered_json panel_to_json(const Pedigree& ped, bool include_latent = false);

// Parsers reject malformed rows, unresolvable or misaligned parent links,
// asymmetric spouse links, and duplicate ids, naming the offending line (CSV)
// or person (JSON).
Pedigree panel_from_csv(const std::string& text);
Pedigree panel_from_json(const nlohmann::json& doc);

// Reads a panel from disk; format "csv", "json", or "auto" (by extension,
// defaulting to CSV).
Pedigree load_panel(const std::string& path, const std::string& format = "auto");

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

nlohmann::ordered_json to_json(const RegressionResult& r);
nlohmann::ordered_json to_json(const FitResult& r);

// Aligned coefficient/std-error table at display precision.
std::string to_text_table(const RegressionResult& r);

}  // namespace mobsim
