#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "maclab/config.hpp"
#include "maclab/dgp.hpp"
#include "maclab/error.hpp"
#include "maclab/harness.hpp"
#include "maclab/pmlb.hpp"
#include "maclab/serialize.hpp"
#include "maclab/stats.hpp"

namespace {

using namespace maclab;
namespace fs = std::filesystem;

fs::path default_cache_dir() {
  if (const char* env = std::getenv("MACLAB_CACHE")) return env;
  if (const char* home = std::getenv("HOME")) {
    return fs::path(home) / ".cache" / "maclab";
  }
  return "maclab_cache";
}

// Roughly fifteen small corpus entries for quick desk-scale runs.
const std::vector<std::string> kSmallPreset = {
    "1027_ESL",     "1028_SWD",     "1029_LEV",
    "1030_ERA",     "1089_USCrime", "1096_FacultySalaries",
    "192_vineyard", "210_cloud",    "228_elusage",
    "229_pwLinear", "230_machine_cpu", "519_vinnie",
    "522_pm10",     "547_no2",      "560_bodyfat"};

/// All method configurations derived from one optional config file, with
/// the experiment-grade defaults (full-data refit on).
struct MethodMenu {
  std::vector<MachineSpec> machines;
  MacConfig mac;
  SuperLearnerConfig sl;
  LsBoostConfig boost;
};

MethodMenu build_menu(const std::string& config_text) {
  MethodMenu menu;
  menu.machines = {MachineSpec::default_ridge(), MachineSpec::default_tree(),
                   MachineSpec::default_mlp()};
  menu.mac.refit_on_full_data = true;
  if (!config_text.empty()) {
    menu.machines = machine_specs_from_json(config_text, menu.machines);
  }
  menu.mac.machines = menu.machines;
  menu.sl.machines = menu.machines;
  menu.boost.machines = menu.machines;
  if (!config_text.empty()) {
    menu.mac = mac_config_from_json(config_text, menu.mac);
    menu.sl = sl_config_from_json(config_text, menu.sl);
    menu.boost = boost_config_from_json(config_text, menu.boost);
  }
  return menu;
}

MachineSpec spec_for(const MethodMenu& menu, MachineKind kind) {
  for (const MachineSpec& spec : menu.machines) {
    if (spec.kind == kind) return spec;
  }
  switch (kind) {
    case MachineKind::ridge:
      return MachineSpec::default_ridge();
    case MachineKind::tree:
      return MachineSpec::default_tree();
    case MachineKind::mlp:
      return MachineSpec::default_mlp();
  }
  throw Error(ErrorCode::invalid_config, "unknown machine kind");
}

std::vector<MethodFn> build_methods(const MethodMenu& menu,
                                    const std::vector<std::string>& names) {
  std::vector<MethodFn> out;
  for (const std::string& name : names) {
    if (name == "mac") {
      out.push_back(make_mac_method(menu.mac));
    } else if (name == "sl") {
      out.push_back(make_sl_method(menu.sl));
    } else if (name == "lsboost") {
      out.push_back(make_boost_method(menu.boost));
    } else if (name == "ridge" || name == "tree" || name == "mlp") {
      out.push_back(
          make_single_method(spec_for(menu, machine_kind_from_string(name))));
    } else {
      throw Error(ErrorCode::invalid_config, "unknown method '" + name + "'");
    }
  }
  return out;
}

std::string read_config_file(const std::string& path) {
  return path.empty() ? std::string() : load_text(path);
}

ReportFormat format_from_name(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw Error(ErrorCode::invalid_config, "unknown format '" + name + "'");
}

void print_summary(const RunReport& report) {
  std::cout << "method        runs        mean      median\n";
  for (const auto& agg : report.aggregates) {
    std::printf("%-12s %5d %11.4f %11.4f\n", agg.method.c_str(), agg.count,
                agg.mean, agg.median);
  }
  for (const auto& p : report.pairwise) {
    if (p.unit != "replication") continue;
    std::printf("%s vs %s: mean diff %+.4f, t = %.3f, d = %.3f (%d pairs)\n",
                p.method.c_str(), p.baseline.c_str(), p.mean_diff, p.t, p.d,
                p.pairs);
  }
  if (!report.skips.empty()) {
    std::cout << report.skips.size() << " skip(s); see the report file\n";
  }
}

struct CommonOptions {
  std::vector<std::string> methods{"mac",   "sl",   "lsboost",
                                   "ridge", "tree", "mlp"};
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 0;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOptions* opts, bool out_required) {
  cmd->add_option("--methods", opts->methods,
                  "Methods to run (mac, sl, lsboost, ridge, tree, mlp)")
      ->delimiter(',');
  cmd->add_option("--config", opts->config_path,
                  "JSON config with machine grids and method knobs");
  auto* out = cmd->add_option("--out", opts->out_path, "Report output path");
  if (out_required) out->required();
  cmd->add_option("--format", opts->format, "Report format (json or csv)")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", opts->seed,
                  "Base seed; replication r uses seed base + r");
  cmd->add_option("--jobs", opts->jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
}

int run_simulate(const CommonOptions& common, int dgp, int n, int reps,
                 std::int64_t calibration_size, const fs::path& cache_dir) {
  DgpConfig config;
  config.which = dgp_from_int(dgp);
  config.n = n;

  fs::create_directories(cache_dir);
  const fs::path calibration_file =
      cache_dir / ("dgp" + std::to_string(dgp) + "_calibration.json");
  // The standardization constants are part of the generator's definition,
  // so their Monte Carlo seed stays fixed across runs.
  config.constants =
      load_or_calibrate(config.which, calibration_size, 424242,
                        calibration_file)
          .constants;

  ExperimentPlan plan;
  plan.simulation = config;
  plan.methods = build_methods(build_menu(read_config_file(common.config_path)),
                               common.methods);
  plan.replications = reps;
  plan.base_seed = common.seed;
  plan.jobs = common.jobs;

  RunReport report = run_experiment(plan);
  emit_report(report, format_from_name(common.format), common.out_path);
  print_summary(report);
  std::cout << "report written to " << common.out_path << "\n";
  return 0;
}

int run_bench(const CommonOptions& common, const fs::path& corpus_manifest,
              std::int64_t max_rows, int reps, const std::string& preset) {
  const fs::path cache_dir = corpus_manifest.parent_path();
  std::vector<DatasetManifest> entries = cached_corpus(cache_dir);

  std::vector<SkipRecord> load_skips;
  ExperimentPlan plan;
  for (const DatasetManifest& entry : entries) {
    if (entry.rows >= max_rows) continue;
    if (preset == "small" &&
        std::find(kSmallPreset.begin(), kSmallPreset.end(), entry.name) ==
            kSmallPreset.end()) {
      continue;
    }
    try {
      plan.datasets.emplace_back(entry.name, parse(entry.cache_path));
    } catch (const Error& e) {
      load_skips.push_back({entry.name, "*", 0, e.what()});
    }
  }
  if (plan.datasets.empty() && load_skips.empty()) {
    throw Error(ErrorCode::invalid_config,
                "no cached datasets under " + std::to_string(max_rows) +
                    " rows in " + cache_dir.string() +
                    "; run `maclab pmlb fetch` first");
  }

  plan.methods = build_methods(build_menu(read_config_file(common.config_path)),
                               common.methods);
  plan.replications = reps;
  plan.base_seed = common.seed;
  plan.jobs = common.jobs;

  RunReport report = run_experiment(plan);
  report.skips.insert(report.skips.end(), load_skips.begin(),
                      load_skips.end());
  std::sort(report.skips.begin(), report.skips.end(),
            [](const SkipRecord& a, const SkipRecord& b) {
              return std::tie(a.dataset, a.method, a.replication) <
                     std::tie(b.dataset, b.method, b.replication);
            });
  emit_report(report, format_from_name(common.format), common.out_path);
  print_summary(report);
  std::cout << "report written to " << common.out_path << "\n";
  return 0;
}

int run_fit(const std::string& data_path, const std::string& method,
            const std::string& config_path, const std::string& out_path,
            std::uint64_t seed, double train_frac, double val_frac) {
  Dataset data = parse(data_path);
  const SplitFractions fractions{train_frac, val_frac,
                                 1.0 - train_frac - val_frac};
  DataSplit parts = split(data, fractions, seed);
  const Dataset train = subset(data, parts.train_idx);
  const Dataset val = subset(data, parts.val_idx);

  MethodMenu menu = build_menu(read_config_file(config_path));
  double val_risk = 0.0;
  std::string model_json;
  Eigen::VectorXd test_pred;
  const Dataset test = parts.test_idx && !parts.test_idx->empty()
                           ? subset(data, *parts.test_idx)
                           : Dataset{};

  if (method == "mac") {
    MacConfig cfg = menu.mac;
    cfg.seed = seed;
    MacModel model = fit_mac(cfg, train, val);
    val_risk = model.val_risk;
    model_json = mac_to_json(model);
    if (test.rows() > 0) test_pred = predict_mac(model, test.features);
  } else if (method == "sl") {
    SuperLearnerConfig cfg = menu.sl;
    cfg.seed = seed;
    SuperLearnerModel model = fit_super_learner(cfg, train, val);
    val_risk = model.val_risk;
    model_json = sl_to_json(model);
    if (test.rows() > 0) test_pred = predict_sl(model, test.features);
  } else if (method == "lsboost") {
    LsBoostConfig cfg = menu.boost;
    cfg.seed = seed;
    LsBoostModel model = fit_ls_boost(cfg, train, val);
    val_risk = model.val_risk;
    model_json = boost_to_json(model);
    if (test.rows() > 0) test_pred = predict_boost(model, test.features);
  } else {
    std::vector<MachineSpec> specs{
        spec_for(menu, machine_kind_from_string(method))};
    apply_run_seed(specs, seed);
    TuneResult tuned = tune(specs[0], train, val, LossKind::squared_error);
    val_risk = tuned.val_risk;
    FittedMachine full =
        menu.mac.refit_on_full_data
            ? fit_machine(specs[0].kind, tuned.best, concat(train, val))
            : tuned.machine;
    model_json = machine_to_json(full);
    if (test.rows() > 0) test_pred = full.predict(test.features);
  }

  if (!out_path.empty()) save_text(model_json, out_path);
  std::cout << "method: " << method << "\nvalidation mspe: " << val_risk
            << "\n";
  if (test.rows() > 0) {
    std::cout << "test mspe: " << mspe(test.target, test_pred) << " ("
              << test.rows() << " rows)\n";
  }
  if (!out_path.empty()) std::cout << "model written to " << out_path << "\n";
  return 0;
}

int run_report(const std::string& in_path, const std::string& format,
               const std::string& out_path) {
  RunReport report = load_report(in_path);
  if (out_path.empty()) {
    write_report(report, format_from_name(format), std::cout);
  } else {
    emit_report(report, format_from_name(format), out_path);
    std::cout << "report written to " << out_path << "\n";
  }
  return 0;
}

int run_pmlb_fetch(bool all, std::vector<std::string> names,
                   const fs::path& cache_dir, std::int64_t max_rows) {
  if (all) {
    for (const DatasetManifest& m : corpus(max_rows)) names.push_back(m.name);
  }
  if (names.empty()) {
    throw Error(ErrorCode::invalid_config,
                "nothing to fetch: pass --all or --name");
  }
  auto transport = make_http_transport();
  int failures = 0;
  for (const std::string& name : names) {
    try {
      const bool warm = fs::exists(cache_dir / (name + ".tsv.gz"));
      const fs::path path = maclab::fetch(name, cache_dir, *transport);
      std::cout << name << ": " << (warm ? "cached" : "downloaded") << " ("
                << path.string() << ")\n";
    } catch (const Error& e) {
      ++failures;
      std::cerr << name << ": " << e.what() << "\n";
    }
  }
  if (failures > 0) {
    std::cerr << failures << " of " << names.size() << " fetches failed\n";
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaborative ensemble toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  CommonOptions sim_common;
  int sim_dgp = 1, sim_n = 1000, sim_reps = 50;
  std::int64_t sim_calibration = 10000000;
  fs::path sim_cache = default_cache_dir();
  auto* sim = app.add_subcommand("simulate",
                                 "Compare methods on a synthetic generator");
  sim->add_option("--dgp", sim_dgp, "Generator id")
      ->check(CLI::IsMember({1, 2}));
  sim->add_option("--n", sim_n, "Rows per replication")
      ->check(CLI::PositiveNumber);
  sim->add_option("--reps", sim_reps, "Replications")
      ->check(CLI::PositiveNumber);
  sim->add_option("--calibration-size", sim_calibration,
                  "Monte Carlo draws for the scale constants")
      ->check(CLI::PositiveNumber);
  sim->add_option("--cache", sim_cache, "Cache directory")
      ->envname("MACLAB_CACHE");
  add_common(sim, &sim_common, /*out_required=*/true);
  sim->callback([&] {
    exit_code = run_simulate(sim_common, sim_dgp, sim_n, sim_reps,
                             sim_calibration, sim_cache);
  });

  CommonOptions bench_common;
  fs::path bench_corpus = default_cache_dir() / "manifest.json";
  std::int64_t bench_max_rows = 5000;
  int bench_reps = 5;
  std::string bench_preset;
  auto* bench =
      app.add_subcommand("bench", "Compare methods on cached corpus files");
  bench->add_option("--corpus", bench_corpus, "Cache manifest path");
  bench->add_option("--max-rows", bench_max_rows, "Row cap")
      ->check(CLI::PositiveNumber);
  bench->add_option("--reps", bench_reps, "Repeats per dataset")
      ->check(CLI::PositiveNumber);
  bench->add_option("--preset", bench_preset, "Dataset preset")
      ->check(CLI::IsMember({"small"}));
  add_common(bench, &bench_common, /*out_required=*/true);
  bench->callback([&] {
    exit_code = run_bench(bench_common, bench_corpus, bench_max_rows,
                          bench_reps, bench_preset);
  });

  std::string fit_data, fit_method, fit_config, fit_out;
  std::uint64_t fit_seed = 0;
  double fit_train = 0.6, fit_val = 0.2;
  auto* fit = app.add_subcommand("fit", "Fit one method on a tabular file");
  fit->add_option("--data", fit_data, "TSV or gzip TSV with a target column")
      ->required();
  fit->add_option("--method", fit_method, "Method to fit")
      ->required()
      ->check(CLI::IsMember({"mac", "sl", "lsboost", "ridge", "tree", "mlp"}));
  fit->add_option("--config", fit_config, "JSON config file");
  fit->add_option("--out", fit_out, "Model snapshot output path");
  fit->add_option("--seed", fit_seed, "Seed for the split and the methods");
  fit->add_option("--train-frac", fit_train, "Training fraction");
  fit->add_option("--val-frac", fit_val, "Validation fraction");
  fit->callback([&] {
    exit_code = run_fit(fit_data, fit_method, fit_config, fit_out, fit_seed,
                        fit_train, fit_val);
  });

  std::string report_in, report_format = "csv", report_out;
  auto* report =
      app.add_subcommand("report", "Convert or print a stored report");
  report->add_option("--in", report_in, "Report JSON path")->required();
  report->add_option("--format", report_format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  report->add_option("--out", report_out, "Output path (default stdout)");
  report->callback(
      [&] { exit_code = run_report(report_in, report_format, report_out); });

  auto* pmlb = app.add_subcommand("pmlb", "Benchmark corpus cache");
  pmlb->require_subcommand(1);
  bool fetch_all = false;
  std::vector<std::string> fetch_names;
  fs::path fetch_cache = default_cache_dir();
  std::int64_t fetch_max_rows = 1000000;
  auto* fetch_cmd =
      pmlb->add_subcommand("fetch", "Download datasets into the cache");
  fetch_cmd->add_flag("--all", fetch_all, "Fetch every corpus dataset");
  fetch_cmd->add_option("--name", fetch_names, "Dataset name (repeatable)");
  fetch_cmd->add_option("--cache", fetch_cache, "Cache directory")
      ->envname("MACLAB_CACHE");
  fetch_cmd->add_option("--max-rows", fetch_max_rows,
                        "Row cap applied with --all");
  fetch_cmd->callback([&] {
    exit_code =
        run_pmlb_fetch(fetch_all, fetch_names, fetch_cache, fetch_max_rows);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
