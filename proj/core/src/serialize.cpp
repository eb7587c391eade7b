#include "maclab/serialize.hpp"

#include <fstream>

#include "hyperparams_json.hpp"
#include "json.hpp"
#include "maclab/error.hpp"

namespace maclab {

using nlohmann::json;

namespace detail {

json hyperparams_to_json(const HyperParams& params) {
  if (const auto* ridge = std::get_if<RidgeParams>(&params)) {
    return {{"penalty", ridge->penalty}};
  }
  if (const auto* tree = std::get_if<TreeParams>(&params)) {
    return {{"max_depth", tree->max_depth},
            {"cc_alpha", tree->cc_alpha},
            {"min_leaf", tree->min_leaf}};
  }
  const auto& mlp = std::get<MlpConfig>(params);
  json activations = json::array();
  for (Activation a : mlp.activations) activations.push_back(to_string(a));
  return {{"widths", mlp.widths},
          {"activations", std::move(activations)},
          {"dropout", mlp.dropout},
          {"learning_rate", mlp.learning_rate},
          {"batch", mlp.batch},
          {"epochs", mlp.epochs},
          {"seed", mlp.seed}};
}

HyperParams hyperparams_from_json(MachineKind kind, const json& j,
                                  bool strict) {
  auto field = [&](const char* name, auto fallback) {
    using T = decltype(fallback);
    if (strict) return j.at(name).get<T>();
    return j.value(name, fallback);
  };
  switch (kind) {
    case MachineKind::ridge:
      return RidgeParams{field("penalty", RidgeParams{}.penalty)};
    case MachineKind::tree: {
      const TreeParams defaults;
      return TreeParams{field("max_depth", defaults.max_depth),
                        field("cc_alpha", defaults.cc_alpha),
                        field("min_leaf", defaults.min_leaf)};
    }
    case MachineKind::mlp: {
      const MlpConfig defaults;
      MlpConfig cfg;
      cfg.widths = field("widths", defaults.widths);
      if (strict || j.contains("activations")) {
        cfg.activations.clear();
        for (const auto& name : j.at("activations")) {
          cfg.activations.push_back(
              activation_from_string(name.get<std::string>()));
        }
      }
      cfg.dropout = field("dropout", defaults.dropout);
      cfg.learning_rate = field("learning_rate", defaults.learning_rate);
      cfg.batch = field("batch", defaults.batch);
      cfg.epochs = field("epochs", defaults.epochs);
      cfg.seed = field("seed", defaults.seed);
      return cfg;
    }
  }
  throw Error(ErrorCode::bad_format, "unknown machine kind");
}

}  // namespace detail

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& x : j) v(i++) = x.get<double>();
  return v;
}

// Matrices are stored as a row-major flat array plus the shape.
json matrix_to_json(const Eigen::MatrixXd& m) {
  json flat = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(flat)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& flat = j.at("data");
  if (rows < 0 || cols < 0 ||
      static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw Error(ErrorCode::bad_format, "matrix shape does not match its data");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[i++].get<double>();
  }
  return m;
}

json state_to_json(const MachineState& state) {
  if (const auto* ridge = std::get_if<RidgeState>(&state)) {
    return {{"coef", vector_to_json(ridge->coef)},
            {"intercept", ridge->intercept}};
  }
  if (const auto* tree = std::get_if<TreeState>(&state)) {
    json feature = json::array(), threshold = json::array(),
         left = json::array(), right = json::array(), value = json::array();
    for (const TreeNode& node : tree->nodes) {
      feature.push_back(node.feature);
      threshold.push_back(node.threshold);
      left.push_back(node.left);
      right.push_back(node.right);
      value.push_back(node.value);
    }
    return {{"feature", std::move(feature)},
            {"threshold", std::move(threshold)},
            {"left", std::move(left)},
            {"right", std::move(right)},
            {"value", std::move(value)}};
  }
  const auto& mlp = std::get<MlpState>(state);
  json weights = json::array(), biases = json::array(),
       activations = json::array();
  for (const auto& w : mlp.weights) weights.push_back(matrix_to_json(w));
  for (const auto& b : mlp.biases) biases.push_back(vector_to_json(b));
  for (Activation a : mlp.activations) activations.push_back(to_string(a));
  return {{"weights", std::move(weights)},
          {"biases", std::move(biases)},
          {"activations", std::move(activations)}};
}

MachineState state_from_json(MachineKind kind, const json& j) {
  switch (kind) {
    case MachineKind::ridge:
      return RidgeState{vector_from_json(j.at("coef")),
                        j.at("intercept").get<double>()};
    case MachineKind::tree: {
      const json& feature = j.at("feature");
      const json& threshold = j.at("threshold");
      const json& left = j.at("left");
      const json& right = j.at("right");
      const json& value = j.at("value");
      const std::size_t n = feature.size();
      if (threshold.size() != n || left.size() != n || right.size() != n ||
          value.size() != n || n == 0) {
        throw Error(ErrorCode::bad_format,
                    "tree node arrays are empty or of unequal length");
      }
      TreeState state;
      state.nodes.resize(n);
      const int count = static_cast<int>(n);
      for (std::size_t i = 0; i < n; ++i) {
        TreeNode& node = state.nodes[i];
        node.feature = feature[i].get<int>();
        node.threshold = threshold[i].get<double>();
        node.left = left[i].get<int>();
        node.right = right[i].get<int>();
        node.value = value[i].get<double>();
        if (node.left >= count || node.right >= count) {
          throw Error(ErrorCode::bad_format,
                      "tree child index out of range");
        }
      }
      return state;
    }
    case MachineKind::mlp: {
      MlpState state;
      for (const auto& w : j.at("weights")) {
        state.weights.push_back(matrix_from_json(w));
      }
      for (const auto& b : j.at("biases")) {
        state.biases.push_back(vector_from_json(b));
      }
      for (const auto& name : j.at("activations")) {
        state.activations.push_back(
            activation_from_string(name.get<std::string>()));
      }
      if (state.weights.size() != state.biases.size() ||
          state.weights.size() != state.activations.size() ||
          state.weights.empty()) {
        throw Error(ErrorCode::bad_format,
                    "mlp layer lists are empty or of unequal length");
      }
      return state;
    }
  }
  throw Error(ErrorCode::bad_format, "unknown machine kind");
}

json machine_to_obj(const FittedMachine& machine) {
  return {{"version", 1},
          {"kind", to_string(machine.kind())},
          {"input_width", machine.input_width()},
          {"hyperparams", detail::hyperparams_to_json(machine.hyperparams())},
          {"state", state_to_json(machine.state())}};
}

void check_version(const json& j, const char* what) {
  if (j.value("version", 0) != 1) {
    throw Error(ErrorCode::bad_format,
                std::string(what) + " has an unsupported version");
  }
}

FittedMachine machine_from_obj(const json& j) {
  check_version(j, "machine snapshot");
  const MachineKind kind =
      machine_kind_from_string(j.at("kind").get<std::string>());
  return {kind,
          detail::hyperparams_from_json(kind, j.at("hyperparams"),
                                        /*strict=*/true),
          state_from_json(kind, j.at("state")),
          j.at("input_width").get<int>()};
}

json parse_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::bad_format,
                std::string(what) + " is not valid JSON: " + e.what());
  }
}

// json::exception from a missing or mistyped field becomes bad-format.
template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::bad_format,
                std::string(what) + " is malformed: " + e.what());
  }
}

}  // namespace

std::string machine_to_json(const FittedMachine& machine) {
  return machine_to_obj(machine).dump(2);
}

FittedMachine machine_from_json(const std::string& text) {
  const json j = parse_text(text, "machine snapshot");
  return guarded("machine snapshot", [&] { return machine_from_obj(j); });
}

std::string mac_to_json(const MacModel& model) {
  json members = json::array();
  for (const auto& member : model.members) {
    members.push_back(member ? machine_to_obj(*member) : json());
  }
  json sweep_log = json::array();
  for (const MacSweepRecord& rec : model.sweep_log) {
    sweep_log.push_back({{"iteration", rec.iteration},
                         {"machine", rec.machine},
                         {"val_risk", rec.val_risk}});
  }
  json j{{"version", 1},
         {"members", std::move(members)},
         {"val_risk", model.val_risk},
         {"best_iteration", model.best_iteration},
         {"best_machine", model.best_machine},
         {"iterations_run", model.iterations_run},
         {"accepted_risks", model.accepted_risks},
         {"sweep_log", std::move(sweep_log)}};
  return j.dump(2);
}

MacModel mac_from_json(const std::string& text) {
  const json j = parse_text(text, "collaboration snapshot");
  return guarded("collaboration snapshot", [&] {
    check_version(j, "collaboration snapshot");
    MacModel model;
    for (const auto& member : j.at("members")) {
      if (member.is_null()) {
        model.members.push_back(std::nullopt);
      } else {
        model.members.push_back(machine_from_obj(member));
      }
    }
    model.val_risk = j.at("val_risk").get<double>();
    model.best_iteration = j.at("best_iteration").get<int>();
    model.best_machine = j.at("best_machine").get<int>();
    model.iterations_run = j.at("iterations_run").get<int>();
    model.accepted_risks = j.at("accepted_risks").get<std::vector<double>>();
    for (const auto& rec : j.at("sweep_log")) {
      model.sweep_log.push_back({rec.at("iteration").get<int>(),
                                 rec.at("machine").get<int>(),
                                 rec.at("val_risk").get<double>()});
    }
    return model;
  });
}

std::string sl_to_json(const SuperLearnerModel& model) {
  json machines = json::array();
  for (const FittedMachine& m : model.machines) {
    machines.push_back(machine_to_obj(m));
  }
  json j{{"version", 1},
         {"machines", std::move(machines)},
         {"weights", vector_to_json(model.weights)},
         {"val_risk", model.val_risk}};
  return j.dump(2);
}

SuperLearnerModel sl_from_json(const std::string& text) {
  const json j = parse_text(text, "stacking snapshot");
  return guarded("stacking snapshot", [&] {
    check_version(j, "stacking snapshot");
    SuperLearnerModel model;
    for (const auto& m : j.at("machines")) {
      model.machines.push_back(machine_from_obj(m));
    }
    model.weights = vector_from_json(j.at("weights"));
    model.val_risk = j.at("val_risk").get<double>();
    if (model.weights.size() !=
        static_cast<Eigen::Index>(model.machines.size())) {
      throw Error(ErrorCode::bad_format,
                  "stacking snapshot weight count does not match machines");
    }
    return model;
  });
}

std::string boost_to_json(const LsBoostModel& model) {
  json stages = json::array();
  for (const BoostStage& stage : model.stages) {
    stages.push_back(
        {{"machine", stage.machine}, {"fitted", machine_to_obj(stage.fitted)}});
  }
  json j{{"version", 1},
         {"stages", std::move(stages)},
         {"shrinkage", model.shrinkage},
         {"stop_index", model.stop_index},
         {"val_risk", model.val_risk},
         {"val_trace", model.val_trace},
         {"input_width", model.input_width}};
  return j.dump(2);
}

LsBoostModel boost_from_json(const std::string& text) {
  const json j = parse_text(text, "boosting snapshot");
  return guarded("boosting snapshot", [&] {
    check_version(j, "boosting snapshot");
    LsBoostModel model;
    for (const auto& stage : j.at("stages")) {
      model.stages.push_back({stage.at("machine").get<int>(),
                              machine_from_obj(stage.at("fitted"))});
    }
    model.shrinkage = j.at("shrinkage").get<double>();
    model.stop_index = j.at("stop_index").get<int>();
    model.val_risk = j.at("val_risk").get<double>();
    model.val_trace = j.at("val_trace").get<std::vector<double>>();
    model.input_width = j.at("input_width").get<int>();
    return model;
  });
}

void save_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(text.data(),
                         static_cast<std::streamsize>(text.size()))) {
    throw Error(ErrorCode::io_error, "cannot write " + path.string());
  }
}

std::string load_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io_error, "cannot read " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace maclab
