#include "maclab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <set>

#include "json.hpp"
#include "maclab/error.hpp"
#include "maclab/stats.hpp"

namespace maclab {

MethodFn make_mac_method(MacConfig config, std::string name) {
  return {std::move(name),
          [config](const Dataset& train, const Dataset& val,
                   const Dataset& test, std::uint64_t seed) {
            MacConfig c = config;
            c.seed = seed;
            MacModel model = fit_mac(c, train, val);
            return predict_mac(model, test.features);
          }};
}

MethodFn make_sl_method(SuperLearnerConfig config, std::string name) {
  return {std::move(name),
          [config](const Dataset& train, const Dataset& val,
                   const Dataset& test, std::uint64_t seed) {
            SuperLearnerConfig c = config;
            c.seed = seed;
            SuperLearnerModel model = fit_super_learner(c, train, val);
            return predict_sl(model, test.features);
          }};
}

MethodFn make_boost_method(LsBoostConfig config, std::string name) {
  return {std::move(name),
          [config](const Dataset& train, const Dataset& val,
                   const Dataset& test, std::uint64_t seed) {
            LsBoostConfig c = config;
            c.seed = seed;
            LsBoostModel model = fit_ls_boost(c, train, val);
            return predict_boost(model, test.features);
          }};
}

MethodFn make_single_method(MachineSpec spec, bool refit_on_full_data,
                            std::string name) {
  if (name.empty()) name = to_string(spec.kind);
  return {std::move(name),
          [spec, refit_on_full_data](const Dataset& train, const Dataset& val,
                                     const Dataset& test, std::uint64_t seed) {
            std::vector<MachineSpec> specs{spec};
            apply_run_seed(specs, seed);
            TuneResult tuned =
                tune(specs[0], train, val, LossKind::squared_error);
            if (!refit_on_full_data) {
              return tuned.machine.predict(test.features);
            }
            FittedMachine full =
                fit_machine(specs[0].kind, tuned.best, concat(train, val));
            return full.predict(test.features);
          }};
}

void ExperimentPlan::validate() const {
  const bool has_sim = simulation.has_value();
  const bool has_data = !datasets.empty();
  if (has_sim == has_data) {
    throw Error(ErrorCode::invalid_config,
                "plan needs exactly one data source: a generator "
                "configuration or fixed datasets");
  }
  if (has_sim) simulation->validate();
  if (methods.empty()) {
    throw Error(ErrorCode::invalid_config, "plan has no methods");
  }
  std::set<std::string> names;
  for (const auto& m : methods) {
    if (m.name.empty() || !m.fit_predict) {
      throw Error(ErrorCode::invalid_config, "method missing name or function");
    }
    if (!names.insert(m.name).second) {
      throw Error(ErrorCode::invalid_config,
                  "duplicate method name '" + m.name + "'");
    }
  }
  if (replications < 1) {
    throw Error(ErrorCode::invalid_config, "replications must be >= 1");
  }
  if (!(fractions.test > 0.0)) {
    throw Error(ErrorCode::invalid_config,
                "experiments need a held-out test fraction");
  }
  if (jobs < 1) {
    throw Error(ErrorCode::invalid_config, "jobs must be >= 1");
  }
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

}  // namespace

ReplicationResult run_replication(const std::vector<MethodFn>& methods,
                                  const Dataset& data,
                                  const std::string& dataset_name,
                                  const SplitFractions& fractions,
                                  std::uint64_t split_seed,
                                  std::uint64_t method_seed, int replication) {
  ReplicationResult out;
  DataSplit parts = split(data, fractions, split_seed);
  if (!parts.test_idx) {
    throw Error(ErrorCode::invalid_config, "replication needs a test part");
  }
  const Dataset train = subset(data, parts.train_idx);
  const Dataset val = subset(data, parts.val_idx);
  const Dataset test = subset(data, *parts.test_idx);

  for (const auto& method : methods) {
    try {
      Eigen::VectorXd pred = method.fit_predict(train, val, test, method_seed);
      out.records.push_back(
          {dataset_name, method.name, replication, mspe(test.target, pred)});
    } catch (const Error& e) {
      out.skips.push_back({dataset_name, method.name, replication, e.what()});
    }
  }
  return out;
}

namespace {

struct PreparedDataset {
  std::string name;
  Dataset data;  // empty features for the simulation source
};

void aligned_differences(const std::vector<MspeRecord>& records,
                         const std::string& alt, const std::string& baseline,
                         std::vector<double>* diffs) {
  // Key records by (dataset, replication) for both methods, intersect.
  std::map<std::pair<std::string, int>, double> base_risk;
  for (const auto& r : records) {
    if (r.method == baseline) base_risk[{r.dataset, r.replication}] = r.mspe;
  }
  for (const auto& r : records) {
    if (r.method != alt) continue;
    auto it = base_risk.find({r.dataset, r.replication});
    if (it == base_risk.end()) continue;
    diffs->push_back(r.mspe - it->second);
  }
}

PairwiseStats pair_stats(const std::string& alt, const std::string& baseline,
                         const std::string& unit,
                         const std::vector<double>& diffs) {
  PairwiseStats p;
  p.method = alt;
  p.baseline = baseline;
  p.unit = unit;
  p.pairs = static_cast<int>(diffs.size());
  for (double d : diffs) {
    if (d > 0.0) {
      ++p.wins_baseline;
    } else if (d < 0.0) {
      ++p.wins_alternative;
    } else {
      ++p.ties;
    }
  }
  if (!diffs.empty()) {
    double sum = 0.0;
    for (double d : diffs) sum += d;
    p.mean_diff = sum / static_cast<double>(diffs.size());
  }
  if (diffs.size() < 2) {
    p.degenerate = true;
    return p;
  }
  Eigen::Map<const Eigen::VectorXd> d(diffs.data(),
                                      static_cast<Eigen::Index>(diffs.size()));
  try {
    p.t = paired_t(d, Eigen::VectorXd::Zero(d.size()));
    p.d = cohens_d(d, Eigen::VectorXd::Zero(d.size()));
  } catch (const Error&) {
    p.degenerate = true;
    p.t = 0.0;
    p.d = 0.0;
  }
  return p;
}

}  // namespace

RunReport run_experiment(const ExperimentPlan& plan) {
  plan.validate();

  std::vector<PreparedDataset> prepared;
  RunReport report;
  if (plan.simulation) {
    prepared.push_back({to_string(plan.simulation->which), Dataset{}});
  } else {
    for (const auto& [name, data] : plan.datasets) {
      if (!plan.standardize_datasets) {
        prepared.push_back({name, data});
        continue;
      }
      try {
        prepared.push_back({name, standardize(data).data});
      } catch (const Error& e) {
        report.skips.push_back({name, "*", 0, e.what()});
      }
    }
  }

  struct Task {
    int dataset;
    int replication;  // 1-based
  };
  std::vector<Task> tasks;
  for (int d = 0; d < static_cast<int>(prepared.size()); ++d) {
    for (int r = 1; r <= plan.replications; ++r) tasks.push_back({d, r});
  }

  auto run_task = [&](const Task& task) {
    const PreparedDataset& entry = prepared[task.dataset];
    const std::uint64_t rep_seed = plan.base_seed + task.replication;
    const std::uint64_t split_seed = mix(rep_seed ^ fnv1a(entry.name));
    if (plan.simulation) {
      DgpConfig cfg = *plan.simulation;
      cfg.seed = rep_seed;
      Dataset data = generate(cfg);
      return run_replication(plan.methods, data, entry.name, plan.fractions,
                             split_seed, rep_seed, task.replication);
    }
    return run_replication(plan.methods, entry.data, entry.name,
                           plan.fractions, split_seed, rep_seed,
                           task.replication);
  };

  std::vector<ReplicationResult> results(tasks.size());
  if (plan.jobs == 1 || tasks.size() <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = run_task(tasks[i]);
  } else {
    // Workers pull task indices; results land in task order, so the merge
    // below is independent of scheduling.
    std::atomic<std::size_t> next{0};
    const int workers =
        std::min<int>(plan.jobs, static_cast<int>(tasks.size()));
    std::vector<std::future<void>> pool;
    for (int w = 0; w < workers; ++w) {
      pool.push_back(std::async(std::launch::async, [&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          results[i] = run_task(tasks[i]);
        }
      }));
    }
    for (auto& f : pool) f.get();
  }

  for (const auto& r : results) {
    report.records.insert(report.records.end(), r.records.begin(),
                          r.records.end());
    report.skips.insert(report.skips.end(), r.skips.begin(), r.skips.end());
  }
  auto record_key = [](const MspeRecord& r) {
    return std::tie(r.dataset, r.method, r.replication);
  };
  std::sort(report.records.begin(), report.records.end(),
            [&](const MspeRecord& a, const MspeRecord& b) {
              return record_key(a) < record_key(b);
            });
  std::sort(report.skips.begin(), report.skips.end(),
            [](const SkipRecord& a, const SkipRecord& b) {
              return std::tie(a.dataset, a.method, a.replication) <
                     std::tie(b.dataset, b.method, b.replication);
            });

  // Pooled aggregates per method.
  std::map<std::string, std::vector<double>> by_method;
  for (const auto& r : report.records) by_method[r.method].push_back(r.mspe);
  for (auto& [method, risks] : by_method) {
    MethodAggregate agg;
    agg.method = method;
    agg.count = static_cast<int>(risks.size());
    double sum = 0.0;
    for (double v : risks) sum += v;
    agg.mean = sum / risks.size();
    std::sort(risks.begin(), risks.end());
    const std::size_t mid = risks.size() / 2;
    agg.median = risks.size() % 2 == 1
                     ? risks[mid]
                     : (risks[mid - 1] + risks[mid]) / 2.0;
    report.aggregates.push_back(agg);
  }

  // Pairwise comparisons against the collaborative baseline when present.
  std::string baseline;
  for (const auto& m : plan.methods) {
    if (m.name == "mac") baseline = m.name;
  }
  report.baseline_method = baseline;
  if (!baseline.empty()) {
    std::set<std::string> dataset_names;
    for (const auto& r : report.records) dataset_names.insert(r.dataset);
    for (const auto& agg : report.aggregates) {
      const std::string& alt = agg.method;
      if (alt == baseline) continue;
      std::vector<double> diffs;
      aligned_differences(report.records, alt, baseline, &diffs);
      report.pairwise.push_back(
          pair_stats(alt, baseline, "replication", diffs));

      if (dataset_names.size() >= 2) {
        // Per-dataset means over the replications both methods completed.
        std::vector<double> dataset_diffs;
        for (const auto& name : dataset_names) {
          std::vector<MspeRecord> subset_records;
          for (const auto& r : report.records) {
            if (r.dataset == name) subset_records.push_back(r);
          }
          std::vector<double> local;
          aligned_differences(subset_records, alt, baseline, &local);
          if (local.empty()) continue;
          double diff_sum = 0.0;
          for (double v : local) diff_sum += v;
          dataset_diffs.push_back(diff_sum / local.size());
        }
        report.pairwise.push_back(
            pair_stats(alt, baseline, "dataset-mean", dataset_diffs));
      }
    }
  }
  return report;
}

namespace {

nlohmann::json to_json(const RunReport& report) {
  nlohmann::json j;
  j["version"] = 1;
  j["baseline"] = report.baseline_method;
  j["records"] = nlohmann::json::array();
  for (const auto& r : report.records) {
    j["records"].push_back({{"dataset", r.dataset},
                            {"method", r.method},
                            {"replication", r.replication},
                            {"mspe", r.mspe}});
  }
  j["skips"] = nlohmann::json::array();
  for (const auto& s : report.skips) {
    j["skips"].push_back({{"dataset", s.dataset},
                          {"method", s.method},
                          {"replication", s.replication},
                          {"reason", s.reason}});
  }
  j["aggregates"] = nlohmann::json::array();
  for (const auto& a : report.aggregates) {
    j["aggregates"].push_back({{"method", a.method},
                               {"count", a.count},
                               {"mean", a.mean},
                               {"median", a.median}});
  }
  j["pairwise"] = nlohmann::json::array();
  for (const auto& p : report.pairwise) {
    j["pairwise"].push_back({{"method", p.method},
                             {"baseline", p.baseline},
                             {"unit", p.unit},
                             {"pairs", p.pairs},
                             {"mean_diff", p.mean_diff},
                             {"t", p.t},
                             {"d", p.d},
                             {"degenerate", p.degenerate},
                             {"wins_baseline", p.wins_baseline},
                             {"wins_alternative", p.wins_alternative},
                             {"ties", p.ties}});
  }
  return j;
}

}  // namespace

std::string report_to_json(const RunReport& report) {
  return to_json(report).dump(2);
}

RunReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::bad_format,
                std::string("report is not valid JSON: ") + e.what());
  }
  try {
    RunReport report;
    report.baseline_method = j.at("baseline").get<std::string>();
    for (const auto& r : j.at("records")) {
      report.records.push_back({r.at("dataset"), r.at("method"),
                                r.at("replication"), r.at("mspe")});
    }
    for (const auto& s : j.at("skips")) {
      report.skips.push_back({s.at("dataset"), s.at("method"),
                              s.at("replication"), s.at("reason")});
    }
    for (const auto& a : j.at("aggregates")) {
      report.aggregates.push_back(
          {a.at("method"), a.at("count"), a.at("mean"), a.at("median")});
    }
    for (const auto& p : j.at("pairwise")) {
      PairwiseStats ps;
      ps.method = p.at("method");
      ps.baseline = p.at("baseline");
      ps.unit = p.at("unit");
      ps.pairs = p.at("pairs");
      ps.mean_diff = p.at("mean_diff");
      ps.t = p.at("t");
      ps.d = p.at("d");
      ps.degenerate = p.at("degenerate");
      ps.wins_baseline = p.at("wins_baseline");
      ps.wins_alternative = p.at("wins_alternative");
      ps.ties = p.at("ties");
      report.pairwise.push_back(ps);
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::bad_format,
                std::string("report is missing fields: ") + e.what());
  }
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(const RunReport& report, std::ostream& out) {
  // Per-record differences against the baseline, matching plot conventions
  // (alternative minus baseline).
  std::map<std::pair<std::string, int>, double> base_risk;
  for (const auto& r : report.records) {
    if (r.method == report.baseline_method) {
      base_risk[{r.dataset, r.replication}] = r.mspe;
    }
  }

  out << "# records\n";
  out << "dataset,method,replication,mspe,diff_vs_" <<
      (report.baseline_method.empty() ? std::string("baseline")
                                      : report.baseline_method)
      << "\n";
  for (const auto& r : report.records) {
    out << csv_quote(r.dataset) << ',' << csv_quote(r.method) << ','
        << r.replication << ',' << fmt(r.mspe) << ',';
    auto it = base_risk.find({r.dataset, r.replication});
    if (it != base_risk.end() && r.method != report.baseline_method) {
      out << fmt(r.mspe - it->second);
    }
    out << '\n';
  }

  out << "# skips\n";
  out << "dataset,method,replication,reason\n";
  for (const auto& s : report.skips) {
    out << csv_quote(s.dataset) << ',' << csv_quote(s.method) << ','
        << s.replication << ',' << csv_quote(s.reason) << '\n';
  }

  out << "# aggregates\n";
  out << "method,count,mean,median\n";
  for (const auto& a : report.aggregates) {
    out << csv_quote(a.method) << ',' << a.count << ',' << fmt(a.mean) << ','
        << fmt(a.median) << '\n';
  }

  out << "# pairwise\n";
  out << "unit,method,baseline,pairs,mean_diff,t,d,degenerate,"
         "wins_baseline,wins_alternative,ties\n";
  for (const auto& p : report.pairwise) {
    out << csv_quote(p.unit) << ',' << csv_quote(p.method) << ','
        << csv_quote(p.baseline) << ',' << p.pairs << ',' << fmt(p.mean_diff)
        << ',' << fmt(p.t) << ',' << fmt(p.d) << ','
        << (p.degenerate ? 1 : 0) << ',' << p.wins_baseline << ','
        << p.wins_alternative << ',' << p.ties << '\n';
  }
}

}  // namespace

void write_report(const RunReport& report, ReportFormat format,
                  std::ostream& out) {
  if (format == ReportFormat::json) {
    out << report_to_json(report) << '\n';
  } else {
    write_csv(report, out);
  }
}

void emit_report(const RunReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::io_error, "cannot write " + path.string());
  }
  write_report(report, format, out);
  if (!out.good()) {
    throw Error(ErrorCode::io_error, "write failed for " + path.string());
  }
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io_error, "cannot read " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return report_from_json(text);
}

}  // namespace maclab
