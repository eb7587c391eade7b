#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "maclab/data.hpp"
#include "maclab/dgp.hpp"
#include "maclab/error.hpp"
#include "maclab/harness.hpp"
#include "maclab/stats.hpp"

using namespace maclab;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Linear target with tiny noise so a tuned ridge is nearly exact and the
// harness tests stay fast.
Dataset linear_data(int n, unsigned seed, double noise = 0.0) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> dist;
  Dataset d;
  d.features = Eigen::MatrixXd::NullaryExpr(n, 2, [&] { return dist(eng); });
  d.target = d.features * Eigen::Vector2d(2.0, -1.0);
  d.target.array() += 0.5;
  if (noise > 0.0) {
    for (int i = 0; i < n; ++i) d.target(i) += noise * dist(eng);
  }
  d.feature_names = {"x1", "x2"};
  return d;
}

MachineSpec tiny_ridge() {
  MachineSpec spec;
  spec.kind = MachineKind::ridge;
  spec.grid = {RidgeParams{1e-6}, RidgeParams{1e-3}};
  return spec;
}

// Method whose test risk is a deterministic function of the seed; lets the
// pairwise tables be exercised without fitting anything.
MethodFn shifted_method(std::string name, double base_shift) {
  return {std::move(name),
          [base_shift](const Dataset&, const Dataset&, const Dataset& test,
                       std::uint64_t seed) {
            const double shift = base_shift * (1.0 + 0.1 * (seed % 7));
            return Eigen::VectorXd(test.target.array() + shift);
          }};
}

MethodFn exact_method(std::string name) {
  return {std::move(name),
          [](const Dataset&, const Dataset&, const Dataset& test,
             std::uint64_t) { return test.target; }};
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("paired t statistic matches the closed form") {
  // d = (1, 2, 3): mean 2, sd 1, t = 2 / (1 / sqrt(3)) = 2 sqrt(3).
  const double t = paired_t(vec({2, 3, 4}), vec({1, 1, 1}));
  CHECK(std::abs(t - 2.0 * std::sqrt(3.0)) < 1e-12);
  CHECK(std::abs(cohens_d(vec({2, 3, 4}), vec({1, 1, 1})) - 2.0) < 1e-12);

  // Swapping the arguments negates both statistics.
  CHECK(paired_t(vec({1, 1, 1}), vec({2, 3, 4})) ==
        doctest::Approx(-t).epsilon(1e-15));
}

TEST_CASE("paired statistics reject degenerate input") {
  CHECK_THROWS_AS(paired_t(vec({1, 2}), vec({1})), Error);
  CHECK_THROWS_AS(paired_t(vec({1}), vec({0})), Error);
  // Constant differences have zero variance.
  CHECK_THROWS_AS(paired_t(vec({3, 3, 3}), vec({1, 1, 1})), Error);
  CHECK_THROWS_AS(cohens_d(vec({5, 5}), vec({2, 2})), Error);
}

TEST_CASE("mspe agrees with the squared-error risk") {
  CHECK(mspe(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
  CHECK(mspe(vec({0, 0}), vec({1, -1})) == doctest::Approx(1.0));

  std::mt19937_64 eng(99);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd a =
        Eigen::VectorXd::NullaryExpr(20, [&] { return dist(eng); });
    Eigen::VectorXd b =
        Eigen::VectorXd::NullaryExpr(20, [&] { return dist(eng); });
    CHECK(mspe(a, b) == empirical_risk(a, b, LossKind::squared_error));
  }
}

TEST_CASE("plan validation catches malformed experiments") {
  ExperimentPlan plan;
  plan.methods = {exact_method("m")};
  // No data source at all.
  CHECK_THROWS_AS(plan.validate(), Error);

  plan.simulation = DgpConfig{};
  plan.datasets = {{"d", linear_data(30, 1)}};
  // Both sources at once.
  CHECK_THROWS_AS(plan.validate(), Error);

  plan.datasets.clear();
  CHECK_NOTHROW(plan.validate());

  plan.methods.push_back(exact_method("m"));
  CHECK_THROWS_AS(plan.validate(), Error);  // duplicate name
  plan.methods.pop_back();

  plan.replications = 0;
  CHECK_THROWS_AS(plan.validate(), Error);
  plan.replications = 1;

  plan.fractions = {0.8, 0.2, 0.0};
  CHECK_THROWS_AS(plan.validate(), Error);  // nothing held out
  plan.fractions = {0.6, 0.2, 0.2};

  plan.jobs = 0;
  CHECK_THROWS_AS(plan.validate(), Error);
}

TEST_CASE("one replication of one method produces one record") {
  ExperimentPlan plan;
  DgpConfig sim;
  sim.n = 100;
  plan.simulation = sim;
  plan.methods = {make_single_method(tiny_ridge())};
  RunReport report = run_experiment(plan);

  REQUIRE(report.records.size() == 1);
  CHECK(report.records[0].dataset == "dgp1");
  CHECK(report.records[0].method == "ridge");
  CHECK(report.records[0].replication == 1);
  CHECK(report.records[0].mspe > 0.0);
  CHECK(report.skips.empty());
  REQUIRE(report.aggregates.size() == 1);
  CHECK(report.aggregates[0].count == 1);
  CHECK(report.aggregates[0].mean == report.records[0].mspe);
  CHECK(report.aggregates[0].median == report.records[0].mspe);
  CHECK(report.baseline_method.empty());
  CHECK(report.pairwise.empty());
}

TEST_CASE("repeated runs are byte-identical") {
  ExperimentPlan plan;
  plan.datasets = {{"lin", linear_data(80, 5, 0.1)}};
  plan.methods = {exact_method("mac"), shifted_method("rival", 0.5),
                  make_single_method(tiny_ridge())};
  plan.replications = 4;
  plan.base_seed = 11;

  RunReport a = run_experiment(plan);
  RunReport b = run_experiment(plan);
  CHECK(a == b);
  CHECK(report_to_json(a) == report_to_json(b));
}

TEST_CASE("parallel execution merges to the sequential report") {
  ExperimentPlan plan;
  plan.datasets = {{"lin_a", linear_data(70, 5, 0.1)},
                   {"lin_b", linear_data(70, 6, 0.1)}};
  plan.methods = {exact_method("mac"), shifted_method("rival", 0.5)};
  plan.replications = 3;

  RunReport serial = run_experiment(plan);
  plan.jobs = 2;
  RunReport parallel = run_experiment(plan);
  CHECK(serial == parallel);
}

TEST_CASE("a tuned ridge recovers a noiseless linear target") {
  ExperimentPlan plan;
  plan.datasets = {{"lin", linear_data(150, 3)}};
  plan.standardize_datasets = false;
  plan.methods = {make_single_method(tiny_ridge())};
  plan.replications = 2;
  RunReport report = run_experiment(plan);

  REQUIRE(report.records.size() == 2);
  for (const auto& r : report.records) CHECK(r.mspe < 1e-3);
}

TEST_CASE("replication seeds follow base + r and reach the methods") {
  std::vector<std::uint64_t> seen;
  MethodFn spy{"spy", [&](const Dataset&, const Dataset&, const Dataset& test,
                          std::uint64_t seed) {
                 seen.push_back(seed);
                 return test.target;
               }};
  ExperimentPlan plan;
  plan.datasets = {{"lin", linear_data(50, 2)}};
  plan.methods = {spy};
  plan.replications = 3;
  plan.base_seed = 40;
  run_experiment(plan);

  REQUIRE(seen.size() == 3);
  std::sort(seen.begin(), seen.end());
  CHECK(seen == std::vector<std::uint64_t>{41, 42, 43});
}

TEST_CASE("splits hand each row to exactly one of train, val and test") {
  // Row identity via a unique feature value per row.
  Dataset d;
  const int n = 60;
  d.features = Eigen::MatrixXd::Zero(n, 1);
  for (int i = 0; i < n; ++i) d.features(i, 0) = i;
  d.target = d.features.col(0);
  d.feature_names = {"id"};

  std::multiset<int> train_ids, val_ids, test_ids;
  MethodFn spy{"spy", [&](const Dataset& train, const Dataset& val,
                          const Dataset& test, std::uint64_t) {
                 for (int i = 0; i < train.rows(); ++i)
                   train_ids.insert(static_cast<int>(train.features(i, 0)));
                 for (int i = 0; i < val.rows(); ++i)
                   val_ids.insert(static_cast<int>(val.features(i, 0)));
                 for (int i = 0; i < test.rows(); ++i)
                   test_ids.insert(static_cast<int>(test.features(i, 0)));
                 return test.target;
               }};
  ReplicationResult res =
      run_replication({spy}, d, "ids", {0.6, 0.2, 0.2}, 123, 1, 1);
  REQUIRE(res.records.size() == 1);

  CHECK(train_ids.size() == 36);
  CHECK(val_ids.size() == 12);
  CHECK(test_ids.size() == 12);
  std::multiset<int> all = train_ids;
  all.insert(val_ids.begin(), val_ids.end());
  all.insert(test_ids.begin(), test_ids.end());
  std::multiset<int> expected;
  for (int i = 0; i < n; ++i) expected.insert(i);
  CHECK(all == expected);  // partition: no overlap, nothing dropped
}

TEST_CASE("failing methods become skips without stopping the run") {
  MethodFn broken{"broken",
                  [](const Dataset&, const Dataset&, const Dataset&,
                     std::uint64_t) -> Eigen::VectorXd {
                    throw Error(ErrorCode::training_diverged, "boom");
                  }};
  ExperimentPlan plan;
  plan.datasets = {{"lin", linear_data(60, 4)}};
  plan.methods = {broken, exact_method("fine")};
  plan.replications = 2;
  RunReport report = run_experiment(plan);

  REQUIRE(report.skips.size() == 2);
  for (const auto& s : report.skips) {
    CHECK(s.method == "broken");
    CHECK(s.reason.find("boom") != std::string::npos);
  }
  REQUIRE(report.records.size() == 2);
  for (const auto& r : report.records) CHECK(r.method == "fine");
  // Aggregates only cover methods that produced records.
  REQUIRE(report.aggregates.size() == 1);
  CHECK(report.aggregates[0].method == "fine");
}

TEST_CASE("an unusable dataset is skipped as a whole") {
  Dataset constant = linear_data(40, 8);
  constant.target.setConstant(3.0);  // standardization rejects this
  ExperimentPlan plan;
  plan.datasets = {{"bad", constant}, {"good", linear_data(40, 9, 0.1)}};
  plan.methods = {make_single_method(tiny_ridge())};
  RunReport report = run_experiment(plan);

  REQUIRE(report.skips.size() == 1);
  CHECK(report.skips[0].dataset == "bad");
  CHECK(report.skips[0].method == "*");
  CHECK(report.skips[0].replication == 0);
  REQUIRE(report.records.size() == 1);
  CHECK(report.records[0].dataset == "good");
}

TEST_CASE("aggregates are recomputable from the records") {
  ExperimentPlan plan;
  plan.datasets = {{"lin", linear_data(80, 7, 0.2)}};
  plan.methods = {shifted_method("a", 0.3), shifted_method("b", 0.7)};
  plan.replications = 5;
  RunReport report = run_experiment(plan);

  for (const auto& agg : report.aggregates) {
    std::vector<double> risks;
    for (const auto& r : report.records) {
      if (r.method == agg.method) risks.push_back(r.mspe);
    }
    REQUIRE(static_cast<int>(risks.size()) == agg.count);
    double sum = 0.0;
    for (double v : risks) sum += v;
    CHECK(agg.mean == doctest::Approx(sum / risks.size()).epsilon(1e-15));
    std::sort(risks.begin(), risks.end());
    const double median =
        risks.size() % 2 == 1
            ? risks[risks.size() / 2]
            : (risks[risks.size() / 2 - 1] + risks[risks.size() / 2]) / 2.0;
    CHECK(agg.median == median);
  }
}

TEST_CASE("pairwise tables compare every method against the collaboration") {
  ExperimentPlan plan;
  plan.datasets = {{"lin_a", linear_data(70, 11, 0.1)},
                   {"lin_b", linear_data(70, 12, 0.1)}};
  plan.methods = {exact_method("mac"), shifted_method("rival", 0.5)};
  plan.replications = 4;
  RunReport report = run_experiment(plan);

  CHECK(report.baseline_method == "mac");
  REQUIRE(report.pairwise.size() == 2);  // replication + dataset-mean units

  const PairwiseStats& by_rep = report.pairwise[0];
  CHECK(by_rep.method == "rival");
  CHECK(by_rep.unit == "replication");
  CHECK(by_rep.pairs == 8);
  // The exact baseline always wins, so every difference is positive.
  CHECK(by_rep.wins_baseline == 8);
  CHECK(by_rep.wins_alternative == 0);
  CHECK(by_rep.ties == 0);
  CHECK(by_rep.wins_baseline + by_rep.wins_alternative + by_rep.ties ==
        by_rep.pairs);
  CHECK(by_rep.mean_diff > 0.0);
  CHECK_FALSE(by_rep.degenerate);
  CHECK(by_rep.t > 0.0);
  CHECK(std::abs(by_rep.d - by_rep.t / std::sqrt(8.0)) < 1e-12);

  const PairwiseStats& by_dataset = report.pairwise[1];
  CHECK(by_dataset.unit == "dataset-mean");
  CHECK(by_dataset.pairs == 2);

  // Recompute the replication-level statistics from the records.
  std::vector<double> mac_risks, rival_risks;
  for (const auto& r : report.records) {
    (r.method == "mac" ? mac_risks : rival_risks).push_back(r.mspe);
  }
  Eigen::Map<Eigen::VectorXd> mv(mac_risks.data(), 8);
  Eigen::Map<Eigen::VectorXd> rv(rival_risks.data(), 8);
  CHECK(by_rep.t == doctest::Approx(paired_t(rv, mv)).epsilon(1e-15));
  CHECK(by_rep.d == doctest::Approx(cohens_d(rv, mv)).epsilon(1e-15));
}

TEST_CASE("constant differences are flagged instead of dividing by zero") {
  ExperimentPlan plan;
  plan.datasets = {{"lin", linear_data(60, 13, 0.1)}};
  // Same fixed shift every replication: rival - mac differences are constant.
  MethodFn rival{"rival", [](const Dataset&, const Dataset&,
                             const Dataset& test, std::uint64_t) {
                   return Eigen::VectorXd(test.target.array() + 1.0);
                 }};
  plan.methods = {exact_method("mac"), rival};
  plan.replications = 3;
  RunReport report = run_experiment(plan);

  REQUIRE(report.pairwise.size() == 1);
  const PairwiseStats& p = report.pairwise[0];
  CHECK(p.degenerate);
  CHECK(p.t == 0.0);
  CHECK(p.d == 0.0);
  CHECK(p.mean_diff == doctest::Approx(1.0));
  CHECK(p.wins_baseline == 3);
}

TEST_CASE("reports survive a JSON round trip") {
  ExperimentPlan plan;
  plan.datasets = {{"lin", linear_data(60, 14, 0.1)}};
  plan.methods = {exact_method("mac"), shifted_method("rival", 0.4)};
  plan.replications = 3;
  RunReport report = run_experiment(plan);

  RunReport back = report_from_json(report_to_json(report));
  CHECK(back == report);

  CHECK_THROWS_AS(report_from_json("not json"), Error);
  CHECK_THROWS_AS(report_from_json("{\"version\": 1}"), Error);
}

TEST_CASE("emitted files can be reloaded and the CSV shows differences") {
  ExperimentPlan plan;
  plan.datasets = {{"lin", linear_data(60, 15, 0.1)}};
  plan.methods = {exact_method("mac"), shifted_method("rival", 0.4)};
  plan.replications = 2;
  RunReport report = run_experiment(plan);

  const auto dir = std::filesystem::temp_directory_path() / "maclab_harness";
  std::filesystem::create_directories(dir);
  const auto json_path = dir / "report.json";
  const auto csv_path = dir / "report.csv";
  emit_report(report, ReportFormat::json, json_path);
  emit_report(report, ReportFormat::csv, csv_path);

  CHECK(load_report(json_path) == report);

  std::ifstream csv(csv_path);
  std::string text((std::istreambuf_iterator<char>(csv)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("# records") != std::string::npos);
  CHECK(text.find("# skips") != std::string::npos);
  CHECK(text.find("# aggregates") != std::string::npos);
  CHECK(text.find("# pairwise") != std::string::npos);
  CHECK(text.find("diff_vs_mac") != std::string::npos);

  // The rival rows carry mspe and difference; with an exact baseline the
  // two numbers coincide, so the rival mspe string appears twice per row.
  for (const auto& r : report.records) {
    if (r.method != "rival") continue;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", r.mspe);
    std::string row = std::string("lin,rival,") +
                      std::to_string(r.replication) + "," + buf + "," + buf;
    CHECK(text.find(row) != std::string::npos);
  }

  CHECK_THROWS_AS(
      emit_report(report, ReportFormat::json, dir / "no_dir" / "x.json"),
      Error);
  CHECK_THROWS_AS(load_report(dir / "missing.json"), Error);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
