#include <variant>

#include "doctest.h"
#include "maclab/config.hpp"
#include "maclab/error.hpp"

using namespace maclab;

TEST_SUITE("config") {

TEST_CASE("machine grids load from json") {
  const std::string text = R"({
    "machines": [
      {"kind": "ridge", "grid": [{"penalty": 0.25}, {"penalty": 4.0}]},
      {"kind": "tree", "grid": [{"max_depth": 3}]},
      {"kind": "mlp", "grid": [{"widths": [4, 4, 4, 4, 1], "epochs": 7,
                                "activations": ["tanh", "tanh", "tanh",
                                                "tanh", "linear"]}]}
    ]
  })";
  const auto specs = machine_specs_from_json(text, {});
  REQUIRE(specs.size() == 3);

  CHECK(specs[0].kind == MachineKind::ridge);
  REQUIRE(specs[0].grid.size() == 2);
  CHECK(std::get<RidgeParams>(specs[0].grid[0]).penalty == 0.25);
  CHECK(std::get<RidgeParams>(specs[0].grid[1]).penalty == 4.0);

  // Omitted fields keep the kind's defaults.
  const auto& tree = std::get<TreeParams>(specs[1].grid[0]);
  CHECK(tree.max_depth == 3);
  CHECK(tree.cc_alpha == TreeParams{}.cc_alpha);
  CHECK(tree.min_leaf == TreeParams{}.min_leaf);

  const auto& mlp = std::get<MlpConfig>(specs[2].grid[0]);
  CHECK(mlp.widths == std::vector<int>{4, 4, 4, 4, 1});
  CHECK(mlp.epochs == 7);
  CHECK(mlp.activations.back() == Activation::linear);
  CHECK(mlp.batch == MlpConfig{}.batch);
}

TEST_CASE("missing machines key keeps the fallback") {
  const auto fallback = std::vector<MachineSpec>{MachineSpec::default_ridge()};
  const auto specs = machine_specs_from_json("{}", fallback);
  REQUIRE(specs.size() == 1);
  CHECK(specs[0].kind == MachineKind::ridge);
  CHECK(specs[0].grid.size() == fallback[0].grid.size());
}

TEST_CASE("collaboration knobs override the base config") {
  MacConfig base;
  base.machines = {MachineSpec::default_ridge()};
  base.refit_on_full_data = true;

  MacConfig loaded = mac_config_from_json(
      R"({"mac": {"max_iterations": 7, "stall_tolerance": 1}})", base);
  CHECK(loaded.max_iterations == 7);
  CHECK(loaded.stall_tolerance == 1);
  CHECK(loaded.refit_on_full_data);  // untouched key keeps the base value
  CHECK(loaded.machines.size() == 1);

  loaded = mac_config_from_json(
      R"({"mac": {"refit_on_full_data": false, "seed": 9}})", base);
  CHECK_FALSE(loaded.refit_on_full_data);
  CHECK(loaded.seed == 9);
}

TEST_CASE("stacking and boosting knobs load from their sections") {
  SuperLearnerConfig sl_base;
  sl_base.machines = {MachineSpec::default_ridge()};
  SuperLearnerConfig sl = sl_config_from_json(
      R"({"super_learner": {"tolerance": 1e-6, "max_solver_iterations": 10}})",
      sl_base);
  CHECK(sl.tolerance == 1e-6);
  CHECK(sl.max_solver_iterations == 10);

  LsBoostConfig boost_base;
  boost_base.machines = {MachineSpec::default_ridge()};
  LsBoostConfig boost = boost_config_from_json(
      R"({"ls_boost": {"rounds": 3, "shrinkage": 0.5,
                       "select_best_machine": true}})",
      boost_base);
  CHECK(boost.rounds == 3);
  CHECK(boost.shrinkage == 0.5);
  CHECK(boost.select_best_machine);
  CHECK(boost.stall_tolerance == boost_base.stall_tolerance);
}

TEST_CASE("one file can configure several methods at once") {
  const std::string text = R"({
    "machines": [{"kind": "ridge", "grid": [{"penalty": 1.0}]}],
    "mac": {"max_iterations": 5},
    "ls_boost": {"rounds": 2}
  })";
  MacConfig mac = mac_config_from_json(text, {});
  LsBoostConfig boost = boost_config_from_json(text, {});
  CHECK(mac.max_iterations == 5);
  CHECK(boost.rounds == 2);
  CHECK(mac.machines.size() == 1);
  CHECK(boost.machines.size() == 1);
}

TEST_CASE("malformed and invalid configs are rejected") {
  MacConfig base;
  base.machines = {MachineSpec::default_ridge()};

  // Not JSON, not an object, wrong structure: bad-format.
  CHECK_THROWS_AS(mac_config_from_json("nope", base), Error);
  CHECK_THROWS_AS(mac_config_from_json("[1,2]", base), Error);
  CHECK_THROWS_AS(
      mac_config_from_json(R"({"machines": [{"kind": "ridge"}]})", base),
      Error);  // grid missing
  CHECK_THROWS_AS(
      mac_config_from_json(R"({"machines": [{"kind": "what", "grid": []}]})",
                           base),
      Error);  // unknown kind

  // Semantically invalid values fail validation.
  CHECK_THROWS_AS(
      mac_config_from_json(
          R"({"machines": [{"kind": "ridge", "grid": []}]})", base),
      Error);  // empty grid
  CHECK_THROWS_AS(
      mac_config_from_json(R"({"mac": {"max_iterations": 0}})", base), Error);
  CHECK_THROWS_AS(
      boost_config_from_json(R"({"ls_boost": {"shrinkage": 0.0}})",
                             LsBoostConfig{.machines = base.machines}),
      Error);
}

}  // TEST_SUITE
