#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "riskkit/errors.hpp"
#include "riskkit/pipeline.hpp"

using riskkit::json;

namespace {

riskkit::RunConfig load_config(const std::string& path) {
  return riskkit::RunConfig::load(path);
}

void print_metrics(const json& report) {
  const json& m = report.at("metrics");
  std::cout << "AUC   " << m.at("auc").at("formatted").get<std::string>() << "\n"
            << "AP    " << m.at("ap").at("formatted").get<std::string>() << "\n"
            << "Brier " << m.at("brier").at("formatted").get<std::string>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-model building pipeline for binary clinical outcomes"};
  app.require_subcommand(1);

  std::string config_path, spec_path, out_dir, family, model_path;
  std::string report_path, plot_kind, plot_out;
  bool from_tune = false, swap_axes = false;

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth->add_option("--spec", spec_path, "Generator spec JSON")->required();
  synth->add_option("--out-dir", out_dir, "Output directory")->required();

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run config TOML")->required();
  };

  CLI::App* prepare =
      app.add_subcommand("prepare", "Load, join, apply rules, and encode");
  add_config(prepare);

  CLI::App* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  add_config(cv);
  cv->add_option("--family", family, "Override the configured family");

  CLI::App* tune = app.add_subcommand("tune", "Hyperparameter grid search");
  add_config(tune);
  tune->add_option("--family", family, "Override the configured family");

  CLI::App* screen = app.add_subcommand("screen", "All-subsets predictor screening");
  add_config(screen);

  CLI::App* fit = app.add_subcommand("fit-final", "Fit the final model on all rows");
  add_config(fit);
  fit->add_flag("--from-tune", from_tune, "Use the best tuned hyperparameters");

  CLI::App* external =
      app.add_subcommand("external-validate", "Validate a saved model on external data");
  add_config(external);
  external->add_option("--model", model_path, "Model file (default out_dir/model.json)");

  CLI::App* pdp = app.add_subcommand("pdp", "Stratified partial-dependence curves");
  add_config(pdp);
  pdp->add_option("--model", model_path, "Model file (default out_dir/model.json)");

  CLI::App* plot = app.add_subcommand("plot", "Render a report curve to SVG");
  plot->add_option("--report", report_path, "Report JSON file")->required();
  plot->add_option("--kind", plot_kind, "roc, pr, calibration, or pdp")->required();
  plot->add_option("--out", plot_out, "Output SVG path")->required();
  plot->add_flag("--swap-axes", swap_axes, "Flip the calibration axes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad invocation is a config error
  }

  try {
    if (synth->parsed()) {
      json s = riskkit::cmd_synth(spec_path, out_dir);
      std::cout << "generated " << s.at("rows").get<std::size_t>() << " rows, "
                << s.at("cases").get<std::size_t>() << " cases -> " << out_dir << "\n";
    } else if (prepare->parsed()) {
      json r = riskkit::cmd_prepare(load_config(config_path));
      std::cout << "prepared " << r.at("rows_prepared").get<std::size_t>()
                << " rows, encoded "
                << r.at("encoding").at("rows_encoded").get<std::size_t>() << "\n";
    } else if (cv->parsed()) {
      json r = riskkit::cmd_cv(load_config(config_path), family);
      print_metrics(r.at("report"));
    } else if (tune->parsed()) {
      json r = riskkit::cmd_tune(load_config(config_path), family);
      std::cout << "best " << r.at("family").get<std::string>() << " cell: "
                << r.at("best").dump() << "\n";
    } else if (screen->parsed()) {
      json r = riskkit::cmd_screen(load_config(config_path));
      const json& top = r.at("leaderboard").at(0);
      std::cout << "top candidate: " << top.at("candidate").get<std::string>() << " ("
                << r.at("metric").get<std::string>() << " "
                << top.at("metric").get<double>() << ")\n";
    } else if (fit->parsed()) {
      json r = riskkit::cmd_fit_final(load_config(config_path), from_tune);
      std::cout << "fitted " << r.at("family").get<std::string>() << " model on "
                << r.at("provenance").at("train_rows").get<std::size_t>() << " rows\n";
    } else if (external->parsed()) {
      json r = riskkit::cmd_external_validate(load_config(config_path), model_path);
      print_metrics(r);
    } else if (pdp->parsed()) {
      json r = riskkit::cmd_pdp(load_config(config_path), model_path);
      std::cout << "pdp: " << r.at("vary").get<std::string>() << " stratified by "
                << r.at("strata").get<std::string>() << "\n";
    } else if (plot->parsed()) {
      riskkit::cmd_plot(report_path, plot_kind, plot_out, swap_axes);
      std::cout << "wrote " << plot_out << "\n";
    }
    return 0;
  } catch (const riskkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
