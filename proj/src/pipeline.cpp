#include "riskkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "riskkit/errors.hpp"
#include "riskkit/rng.hpp"
#include "riskkit/synth.hpp"
#include "riskkit/toml_lite.hpp"

namespace riskkit {

namespace {

namespace fs = std::filesystem;

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

json read_json(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + what + " '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(what + " '" + path + "' is not valid JSON: " + e.what());
  }
  return j;
}

std::string out_file(const RunConfig& cfg, const std::string& name) {
  fs::path dir = cfg.resolve(cfg.out_dir);
  fs::create_directories(dir);
  return (dir / name).string();
}

struct Prepared {
  Table table;
  json report;
};

// load -> join chain -> exclusion rules; shared by every downstream command
Prepared prepare_table(const RunConfig& cfg) {
  DataDictionary dict = DataDictionary::load(cfg.resolve(cfg.dictionary));
  json report = json::object();
  report["ingest"] = json::array();

  auto load_one = [&](const std::string& file) {
    std::string name = fs::path(file).stem().string();
    LoadResult res = load_table(cfg.resolve(file), dict, name);
    report["ingest"].push_back(json{{"table", name},
                                    {"rows", res.table.row_count},
                                    {"issues", res.log.to_json()}});
    return std::move(res.table);
  };

  Table acc = load_one(cfg.base_file);
  report["joins"] = json::array();
  for (const auto& step : cfg.joins) {
    Table right = load_one(step.file);
    JoinResult jr = join(acc, right, step.left_key, step.right_key);
    json entry = jr.report.to_json();
    entry["file"] = step.file;
    entry["left_key"] = step.left_key;
    entry["right_key"] = step.right_key;
    report["joins"].push_back(std::move(entry));
    acc = std::move(jr.table);
  }

  if (!cfg.rules_file.empty()) {
    RuleSet rules = RuleSet::load(cfg.resolve(cfg.rules_file));
    RuleApplication app = apply_rules(acc, rules);
    report["rules"] = app.report.to_json();
    acc = std::move(app.table);
  }
  report["rows_prepared"] = acc.row_count;
  return {std::move(acc), std::move(report)};
}

// svm needs a kernel; families other than the configured one run on defaults
json effective_hyper(const RunConfig& cfg, const std::string& family) {
  json hyper = family == cfg.family ? cfg.hyper : json::object();
  if (family == "svm" && !hyper.contains("kernel"))
    hyper["kernel"] = json{{"kind", "gaussian"}};
  return hyper;
}

std::string pick_family(const RunConfig& cfg, const std::string& override_name) {
  if (override_name.empty()) return cfg.family;
  if (override_name != "logit" && override_name != "svm" && override_name != "forest")
    throw ConfigError("family must be logit, svm, or forest, got '" + override_name + "'");
  return override_name;
}

struct EncodedRun {
  EncodeResult enc;
  FoldPlan plan;
};

EncodedRun encode_and_plan(const RunConfig& cfg, const Table& t) {
  EncodedRun run;
  run.enc = encode_for_training(t, cfg.outcome, cfg.predictors, cfg.interactions);
  validate_for_fit(run.enc.m);
  run.plan = make_folds(run.enc.m.n, cfg.k, cfg.seed,
                        {run.enc.m.y.data(), run.enc.m.y.size()});
  return run;
}

std::vector<double> double_list(const json& j, std::vector<double> fallback,
                                const std::string& what) {
  if (j.is_null()) return fallback;
  if (!j.is_array() || j.empty())
    throw ConfigError(what + " must be a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(what + " must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<json> svm_grid_from(const json& o, std::size_t k_features) {
  auto g1 = 1.0 / static_cast<double>(k_features);
  std::vector<std::string> kernels{"linear", "gaussian", "polynomial"};
  if (o.contains("kernels")) {
    kernels.clear();
    for (const auto& v : o["kernels"]) kernels.push_back(v.get<std::string>());
    if (kernels.empty()) throw ConfigError("tune.svm.kernels must be non-empty");
  }
  auto cs = double_list(o.value("c", json()), {0.1, 1.0, 10.0}, "tune.svm.c");
  auto gammas = double_list(o.value("gammas", json()), {0.5 * g1, g1, 2.0 * g1},
                            "tune.svm.gammas");
  auto degrees = double_list(o.value("degrees", json()), {2, 3}, "tune.svm.degrees");
  double coef0 = o.value("coef0", 1.0);
  double poly_gamma = gammas[gammas.size() / 2];
  std::vector<json> grid;
  for (const auto& kind : kernels) {
    if (kind == "linear") {
      for (double c : cs) {
        json cell;
        cell["kernel"] = json{{"kind", "linear"}};
        cell["c"] = c;
        grid.push_back(std::move(cell));
      }
    } else if (kind == "gaussian") {
      for (double c : cs)
        for (double g : gammas) {
          json cell;
          cell["kernel"] = json{{"kind", "gaussian"}, {"gamma", g}};
          cell["c"] = c;
          grid.push_back(std::move(cell));
        }
    } else if (kind == "polynomial") {
      for (double c : cs)
        for (double d : degrees) {
          json cell;
          cell["kernel"] = json{{"kind", "polynomial"},
                                {"degree", static_cast<int>(d)},
                                {"gamma", poly_gamma},
                                {"coef0", coef0}};
          cell["c"] = c;
          grid.push_back(std::move(cell));
        }
    } else {
      throw ConfigError("unknown kernel '" + kind + "' in tune.svm.kernels");
    }
  }
  return grid;
}

std::vector<json> forest_grid_from(const json& o, std::size_t k_features) {
  auto sq = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(k_features))));
  auto trees = double_list(o.value("n_trees", json()), {100, 300, 500},
                           "tune.forest.n_trees");
  std::vector<double> mtry_default;
  for (std::size_t v : {std::size_t{1}, sq, k_features}) {
    double d = static_cast<double>(v);
    if (std::find(mtry_default.begin(), mtry_default.end(), d) == mtry_default.end())
      mtry_default.push_back(d);
  }
  auto mtries = double_list(o.value("mtry", json()), mtry_default, "tune.forest.mtry");
  auto nodes = double_list(o.value("node_size", json()), {5, 10, 20},
                           "tune.forest.node_size");
  std::vector<json> grid;
  for (double t : trees)
    for (double m : mtries)
      for (double n : nodes)
        grid.push_back(json{{"n_trees", static_cast<std::size_t>(t)},
                            {"mtry", static_cast<std::size_t>(m)},
                            {"node_size", static_cast<std::size_t>(n)}});
  return grid;
}

}  // namespace

json cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  GeneratorSpec spec = GeneratorSpec::load(spec_path);
  SynthResult res = generate(spec);
  fs::create_directories(out_dir);
  fs::path dir(out_dir);
  save_table(res.table, (dir / "cohort.csv").string());
  write_json((dir / "dictionary.json").string(), res.dict.to_json());
  std::string truth = "id,true_risk\n";
  for (std::size_t i = 0; i < res.true_risk.size(); ++i) {
    truth += res.table.record_id(i);
    truth += ',';
    truth += format_double(res.true_risk[i]);
    truth += '\n';
  }
  write_text((dir / "true_risk.csv").string(), truth);
  std::size_t cases = 0;
  const Column& yc = res.table.col(spec.outcome_name);
  for (std::size_t i = 0; i < res.table.row_count; ++i) cases += yc.num[i] == 1.0;
  json summary{{"rows", res.table.row_count},
               {"cases", cases},
               {"prevalence", static_cast<double>(cases) /
                                  static_cast<double>(res.table.row_count)},
               {"outcome", spec.outcome_name}};
  write_json((dir / "synth_summary.json").string(), summary);
  return summary;
}

json cmd_prepare(const RunConfig& cfg) {
  Prepared prep = prepare_table(cfg);
  save_table(prep.table, out_file(cfg, "prepared.csv"));
  EncodeResult enc =
      encode_for_training(prep.table, cfg.outcome, cfg.predictors, cfg.interactions);
  // encoded matrix as CSV: id, features, outcome
  std::string csv = "id";
  for (const auto& name : enc.m.feature_names) csv += "," + name;
  csv += "," + cfg.outcome + "\n";
  for (std::size_t i = 0; i < enc.m.n; ++i) {
    csv += enc.m.record_ids[i];
    for (std::size_t j = 0; j < enc.m.k; ++j) csv += "," + format_double(enc.m.at(i, j));
    csv += "," + std::to_string(static_cast<int>(enc.m.y[i])) + "\n";
  }
  write_text(out_file(cfg, "matrix.csv"), csv);
  write_json(out_file(cfg, "recipe.json"), enc.recipe.to_json());
  json report = prep.report;
  report["encoding"] = json{{"rows_encoded", enc.m.n},
                            {"features", enc.m.feature_names},
                            {"dropped_incomplete_rows", enc.dropped_rows},
                            {"dropped_ids", enc.dropped_ids}};
  report["config"] = cfg.raw;
  write_json(out_file(cfg, "prepare_report.json"), report);
  return report;
}

json cmd_cv(const RunConfig& cfg, const std::string& family_override) {
  std::string family = pick_family(cfg, family_override);
  json hyper = effective_hyper(cfg, family);
  Prepared prep = prepare_table(cfg);
  EncodedRun run = encode_and_plan(cfg, prep.table);
  Learner learner = make_learner(family, hyper);
  EvalOptions opts;
  opts.bootstrap_B = cfg.bootstrap_B;
  opts.bootstrap_seed = derive_seed(cfg.seed, 0xc1);
  opts.extra_echo = json{{"family", family}, {"hyper", hyper}, {"run_config", cfg.raw}};
  CvResult cv = cross_validate(learner, run.enc.m, run.plan, opts);
  json report = cv.to_json();
  write_json(out_file(cfg, "cv_report_" + family + ".json"), report);
  write_text(out_file(cfg, "roc_" + family + ".csv"), curve_to_csv(cv.report.roc));
  write_text(out_file(cfg, "pr_" + family + ".csv"), curve_to_csv(cv.report.pr));
  write_text(out_file(cfg, "calibration_" + family + ".csv"),
             curve_to_csv(cv.report.calibration));
  write_text(out_file(cfg, "folds.csv"),
             fold_assignments_csv(run.plan, run.enc.m.record_ids));
  return report;
}

json cmd_tune(const RunConfig& cfg, const std::string& family_override) {
  std::string family = pick_family(cfg, family_override);
  Prepared prep = prepare_table(cfg);
  EncodedRun run = encode_and_plan(cfg, prep.table);
  SearchGrid grid;
  grid.family = family;
  grid.metric = cfg.metric;
  if (family == "svm")
    grid.combinations = svm_grid_from(cfg.tune.value("svm", json::object()), run.enc.m.k);
  else if (family == "forest")
    grid.combinations =
        forest_grid_from(cfg.tune.value("forest", json::object()), run.enc.m.k);
  // logit keeps an empty list: a single default-hyper cell
  GridResult res = grid_search(grid, run.enc.m, run.plan);
  json report = res.to_json();
  report["run_config"] = cfg.raw;
  write_json(out_file(cfg, "tune_" + family + ".json"), report);
  write_json(out_file(cfg, "best_" + family + ".json"),
             json{{"family", family}, {"hyper", res.cells[res.best_index].hyper}});
  return report;
}

json cmd_screen(const RunConfig& cfg) {
  Prepared prep = prepare_table(cfg);
  std::vector<PredictorSet> candidates = enumerate_candidates(
      cfg.screen_base, cfg.screen_interactions, cfg.screen_allow_large);
  Learner learner = make_learner(cfg.family, effective_hyper(cfg, cfg.family));
  ScreenResult res = screen_predictors(candidates, learner, prep.table, cfg.outcome,
                                       cfg.k, cfg.seed, cfg.metric);
  json report = res.to_json();
  report["family"] = cfg.family;
  report["run_config"] = cfg.raw;
  write_json(out_file(cfg, "screen.json"), report);
  return report;
}

json cmd_fit_final(const RunConfig& cfg, bool from_tune) {
  std::string family = cfg.family;
  json hyper = effective_hyper(cfg, family);
  if (from_tune) {
    std::string best_path = out_file(cfg, "best_" + family + ".json");
    json best = read_json(best_path, "tuning result");
    family = best.at("family").get<std::string>();
    hyper = best.at("hyper");
  }
  Prepared prep = prepare_table(cfg);
  PortableModel pm =
      fit_portable(prep.table, cfg.outcome, cfg.predictors, cfg.interactions, family,
                   hyper, derive_seed(cfg.seed, 0xf1a1));
  pm.save(out_file(cfg, "model.json"));
  return pm.to_json();
}

json cmd_external_validate(const RunConfig& cfg, const std::string& model_path) {
  if (cfg.external_data.empty())
    throw ConfigError("external.data is required for external validation");
  PortableModel pm = PortableModel::load(
      model_path.empty() ? out_file(cfg, "model.json") : model_path);
  std::string dict_path = cfg.external_dictionary.empty() ? cfg.dictionary
                                                          : cfg.external_dictionary;
  DataDictionary dict = DataDictionary::load(cfg.resolve(dict_path));
  LoadResult ext = load_table(cfg.resolve(cfg.external_data), dict, "external");
  PredictionResult pred = predict_table(pm, ext.table);
  LabeledPrediction labeled = attach_labels(pred, ext.table, pm.recipe.outcome);
  EvalOptions opts;
  opts.bootstrap_B = cfg.bootstrap_B;
  opts.bootstrap_seed = derive_seed(cfg.seed, 0xe1);
  opts.extra_echo = json{{"external_data", cfg.external_data},
                         {"model_provenance", pm.provenance},
                         {"unlabeled_rows", labeled.unlabeled_rows},
                         {"dropped_incomplete_rows", pred.dropped_rows},
                         {"run_config", cfg.raw}};
  EvaluationReport report = evaluate(labeled.sample, opts);
  report.external = true;
  json rj = report.to_json();
  write_json(out_file(cfg, "external_report.json"), rj);
  write_text(out_file(cfg, "external_roc.csv"), curve_to_csv(report.roc));
  write_text(out_file(cfg, "external_pr.csv"), curve_to_csv(report.pr));
  write_text(out_file(cfg, "external_calibration.csv"),
             curve_to_csv(report.calibration));
  return rj;
}

json cmd_pdp(const RunConfig& cfg, const std::string& model_path) {
  if (cfg.pdp_vary.empty() || cfg.pdp_strata.empty())
    throw ConfigError("pdp.vary and pdp.strata are required");
  PortableModel pm = PortableModel::load(
      model_path.empty() ? out_file(cfg, "model.json") : model_path);
  Prepared prep = prepare_table(cfg);
  EncodeResult enc = encode_with_recipe(prep.table, pm.recipe, /*require_outcome=*/true);
  StratifiedPdp pdp = partial_dependence(*pm.model, enc.m, cfg.pdp_vary,
                                         cfg.pdp_strata, cfg.pdp_grid_points);
  json report{{"kind", "pdp"},
              {"vary", pdp.vary},
              {"strata", pdp.strata},
              {"curves", json::array({curve_points_to_json(pdp.stratum0),
                                      curve_points_to_json(pdp.stratum1)})},
              {"run_config", cfg.raw}};
  write_json(out_file(cfg, "pdp.json"), report);
  return report;
}

void cmd_plot(const std::string& report_path, const std::string& kind,
              const std::string& out_path, bool swap_axes) {
  if (swap_axes && kind != "calibration")
    throw ConfigError("--swap-axes only applies to calibration plots");
  json j = read_json(report_path, "report file");
  PlotSpec spec;
  if (kind == "pdp") {
    if (j.value("kind", "") != "pdp")
      throw ReportError("report file has no pdp curves");
    spec.title = "Partial dependence";
    spec.x_label = j.value("vary", "value");
    spec.y_label = "Predicted risk";
    spec.y_range = AxisRange{0, 1};
    for (const auto& c : j.at("curves"))
      spec.series.push_back(curve_points_from_json(c, CurveKind::pdp));
    write_plot_svg(spec, out_path);
    return;
  }
  if (j.contains("report")) j = j["report"];  // CV result wrapper
  if (!j.contains("curves"))
    throw ReportError("report file has no curves for kind '" + kind + "'");
  EvaluationReport rep;
  try {
    rep = EvaluationReport::from_json(j);
  } catch (const json::exception& e) {
    throw ReportError("report file is not an evaluation report: " +
                      std::string(e.what()));
  }
  std::string suffix = rep.external ? " (external)" : "";
  if (kind == "roc") {
    spec.title = "ROC curve" + suffix;
    spec.x_label = "False positive rate";
    spec.y_label = "True positive rate";
    spec.diagonal = true;
    spec.annotation = "AUC " + format_interval(rep.auc);
    spec.series.push_back(rep.roc);
  } else if (kind == "pr") {
    spec.title = "Precision-recall curve" + suffix;
    spec.x_label = "Recall";
    spec.y_label = "Precision";
    spec.annotation = "AP " + format_interval(rep.ap);
    spec.series.push_back(rep.pr);
  } else if (kind == "calibration") {
    spec.title = "Calibration curve" + suffix;
    spec.diagonal = true;
    spec.annotation = "Brier " + format_interval(rep.brier);
    CurvePoints curve = rep.calibration;
    if (swap_axes) {
      for (auto& [x, y] : curve.pts) std::swap(x, y);
      spec.x_label = "Cumulative predicted share";
      spec.y_label = "Cumulative observed share";
    } else {
      spec.x_label = "Cumulative observed share";
      spec.y_label = "Cumulative predicted share";
    }
    spec.series.push_back(std::move(curve));
  } else {
    throw ConfigError("plot kind must be roc, pr, calibration, or pdp");
  }
  spec.x_range = AxisRange{0, 1};
  spec.y_range = AxisRange{0, 1};
  write_plot_svg(spec, out_path);
}

}  // namespace riskkit
