#pragma once

#include <string>

#include "riskkit/config.hpp"
#include "riskkit/model_io.hpp"
#include "riskkit/svg.hpp"

namespace riskkit {

// Each command is deterministic given config + seed, writes its artifacts
// under the config's out_dir, and returns the primary report JSON it wrote.

// cohort.csv + dictionary.json + true_risk.csv from a generator spec.
json cmd_synth(const std::string& spec_path, const std::string& out_dir);

// load -> join chain -> rules -> encode; writes prepared.csv, matrix.csv,
// recipe.json, prepare_report.json.
json cmd_prepare(const RunConfig& cfg);

// Stratified k-fold CV for one family; writes cv_report_<family>.json,
// fold assignments, and the three curve CSVs.
json cmd_cv(const RunConfig& cfg, const std::string& family_override = "");

// Grid search for the family; writes tune_<family>.json and
// best_<family>.json (consumed by fit-final --from-tune).
json cmd_tune(const RunConfig& cfg, const std::string& family_override = "");

// All-subsets screening with the configured family; writes screen.json.
json cmd_screen(const RunConfig& cfg);

// Fits on all prepared rows, writes model.json (PortableModel).
json cmd_fit_final(const RunConfig& cfg, bool from_tune = false);

// Two-phase external validation of a saved model; writes
// external_report.json and external curve CSVs.
json cmd_external_validate(const RunConfig& cfg, const std::string& model_path = "");

// Stratified partial-dependence curves from the saved model; writes pdp.json.
json cmd_pdp(const RunConfig& cfg, const std::string& model_path = "");

// Renders one curve kind from a report file to SVG. swap_axes flips the
// calibration axes (observed-on-x is the stored orientation).
void cmd_plot(const std::string& report_path, const std::string& kind,
              const std::string& out_path, bool swap_axes = false);

}  // namespace riskkit
