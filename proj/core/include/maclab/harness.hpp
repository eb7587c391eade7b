#ifndef MACLAB_HARNESS_HPP
#define MACLAB_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "maclab/data.hpp"
#include "maclab/dgp.hpp"
#include "maclab/mac.hpp"
#include "maclab/rivals.hpp"

namespace maclab {

/// A method under comparison: fits on train (tuning on val) and returns
/// predictions for the test rows. The seed lets stochastic methods vary per
/// replication while staying reproducible.
struct MethodFn {
  std::string name;
  std::function<Eigen::VectorXd(const Dataset& train, const Dataset& val,
                                const Dataset& test, std::uint64_t seed)>
      fit_predict;
};

MethodFn make_mac_method(MacConfig config, std::string name = "mac");
MethodFn make_sl_method(SuperLearnerConfig config, std::string name = "sl");
MethodFn make_boost_method(LsBoostConfig config, std::string name = "lsboost");
/// Plain tuned single machine; refits the tuned parameters on train+val
/// when `refit_on_full_data` (mirrors the collaborative default).
MethodFn make_single_method(MachineSpec spec, bool refit_on_full_data = true,
                            std::string name = {});

struct ExperimentPlan {
  // Exactly one data source: a generator configuration (fresh data each
  // replication) or fixed named datasets (fresh splits each replication).
  std::optional<DgpConfig> simulation;
  std::vector<std::pair<std::string, Dataset>> datasets;
  bool standardize_datasets = true;  // applies to the fixed-dataset source

  std::vector<MethodFn> methods;
  int replications = 1;
  SplitFractions fractions{0.6, 0.2, 0.2};
  std::uint64_t base_seed = 0;  // replication r runs with seed base + r
  int jobs = 1;

  void validate() const;
};

struct MspeRecord {
  std::string dataset;
  std::string method;
  int replication = 0;  // 1-based
  double mspe = 0.0;

  bool operator==(const MspeRecord&) const = default;
};

/// A dataset-wide skip uses method "*" and replication 0.
struct SkipRecord {
  std::string dataset;
  std::string method;
  int replication = 0;
  std::string reason;

  bool operator==(const SkipRecord&) const = default;
};

struct MethodAggregate {
  std::string method;
  int count = 0;
  double mean = 0.0;
  double median = 0.0;

  bool operator==(const MethodAggregate&) const = default;
};

/// Alternative-vs-baseline comparison over aligned pairs. `unit` is
/// "replication" (one pair per dataset x replication) or "dataset-mean"
/// (one pair per dataset, averaging over replications first).
struct PairwiseStats {
  std::string method;
  std::string baseline;
  std::string unit;
  int pairs = 0;
  double mean_diff = 0.0;  // alternative - baseline
  double t = 0.0;
  double d = 0.0;
  bool degenerate = false;  // zero-variance differences: t and d left at 0
  int wins_baseline = 0;    // baseline strictly better
  int wins_alternative = 0;
  int ties = 0;

  bool operator==(const PairwiseStats&) const = default;
};

struct RunReport {
  std::vector<MspeRecord> records;  // (dataset, method, replication) order
  std::vector<SkipRecord> skips;
  std::vector<MethodAggregate> aggregates;
  std::vector<PairwiseStats> pairwise;
  std::string baseline_method;  // empty when no baseline was present

  bool operator==(const RunReport&) const = default;
};

/// One replication on one dataset: split, fit every method on the same
/// train/val, score on the untouched test rows. Method failures become
/// skip records. Exposed separately so tests can inject spy methods.
struct ReplicationResult {
  std::vector<MspeRecord> records;
  std::vector<SkipRecord> skips;
};
ReplicationResult run_replication(const std::vector<MethodFn>& methods,
                                  const Dataset& data,
                                  const std::string& dataset_name,
                                  const SplitFractions& fractions,
                                  std::uint64_t split_seed,
                                  std::uint64_t method_seed, int replication);

RunReport run_experiment(const ExperimentPlan& plan);

enum class ReportFormat { csv, json };

void write_report(const RunReport& report, ReportFormat format,
                  std::ostream& out);
void emit_report(const RunReport& report, ReportFormat format,
                 const std::filesystem::path& path);
std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);
RunReport load_report(const std::filesystem::path& path);

}  // namespace maclab

#endif  // MACLAB_HARNESS_HPP
