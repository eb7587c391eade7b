#include "maclab/config.hpp"

#include "hyperparams_json.hpp"
#include "json.hpp"
#include "maclab/error.hpp"

namespace maclab {
namespace {

using nlohmann::json;

json parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::bad_format,
                std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::bad_format, "config must be a JSON object");
  }
  return j;
}

template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::bad_format,
                std::string("config is malformed: ") + e.what());
  }
}

std::vector<MachineSpec> specs_from_obj(const json& machines) {
  std::vector<MachineSpec> out;
  for (const auto& entry : machines) {
    MachineSpec spec;
    spec.kind = machine_kind_from_string(entry.at("kind").get<std::string>());
    for (const auto& point : entry.at("grid")) {
      spec.grid.push_back(
          detail::hyperparams_from_json(spec.kind, point, /*strict=*/false));
    }
    spec.validate();
    out.push_back(std::move(spec));
  }
  return out;
}

// Overwrites base.machines when the config carries a machine list.
void apply_machines(const json& j, std::vector<MachineSpec>* machines) {
  if (j.contains("machines")) *machines = specs_from_obj(j.at("machines"));
}

}  // namespace

std::vector<MachineSpec> machine_specs_from_json(
    const std::string& text, std::vector<MachineSpec> fallback) {
  const json j = parse_config(text);
  return guarded([&] {
    apply_machines(j, &fallback);
    return std::move(fallback);
  });
}

MacConfig mac_config_from_json(const std::string& text, MacConfig base) {
  const json j = parse_config(text);
  return guarded([&] {
    apply_machines(j, &base.machines);
    if (j.contains("mac")) {
      const json& m = j.at("mac");
      base.max_iterations = m.value("max_iterations", base.max_iterations);
      base.stall_tolerance = m.value("stall_tolerance", base.stall_tolerance);
      base.refit_on_full_data =
          m.value("refit_on_full_data", base.refit_on_full_data);
      base.seed = m.value("seed", base.seed);
    }
    base.validate();
    return base;
  });
}

SuperLearnerConfig sl_config_from_json(const std::string& text,
                                       SuperLearnerConfig base) {
  const json j = parse_config(text);
  return guarded([&] {
    apply_machines(j, &base.machines);
    if (j.contains("super_learner")) {
      const json& s = j.at("super_learner");
      base.tolerance = s.value("tolerance", base.tolerance);
      base.max_solver_iterations =
          s.value("max_solver_iterations", base.max_solver_iterations);
      base.seed = s.value("seed", base.seed);
    }
    base.validate();
    return base;
  });
}

LsBoostConfig boost_config_from_json(const std::string& text,
                                     LsBoostConfig base) {
  const json j = parse_config(text);
  return guarded([&] {
    apply_machines(j, &base.machines);
    if (j.contains("ls_boost")) {
      const json& b = j.at("ls_boost");
      base.rounds = b.value("rounds", base.rounds);
      base.shrinkage = b.value("shrinkage", base.shrinkage);
      base.stall_tolerance = b.value("stall_tolerance", base.stall_tolerance);
      base.select_best_machine =
          b.value("select_best_machine", base.select_best_machine);
      base.seed = b.value("seed", base.seed);
    }
    base.validate();
    return base;
  });
}

}  // namespace maclab
