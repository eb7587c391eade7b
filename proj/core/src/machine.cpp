#include "maclab/machine.hpp"

#include <cmath>

#include "maclab/error.hpp"

namespace maclab {

const char* to_string(MachineKind kind) {
  switch (kind) {
    case MachineKind::ridge: return "ridge";
    case MachineKind::tree: return "tree";
    case MachineKind::mlp: return "mlp";
  }
  return "?";
}

MachineKind machine_kind_from_string(const std::string& name) {
  if (name == "ridge") return MachineKind::ridge;
  if (name == "tree") return MachineKind::tree;
  if (name == "mlp") return MachineKind::mlp;
  throw Error(ErrorCode::invalid_config, "unknown machine kind '" + name + "'");
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "linear") return Activation::linear;
  throw Error(ErrorCode::invalid_config, "unknown activation '" + name + "'");
}

namespace {

void validate_params(const RidgeParams& p) {
  if (!(p.penalty >= 0.0) || !std::isfinite(p.penalty)) {
    throw Error(ErrorCode::invalid_config,
                "ridge penalty must be finite and >= 0, got " +
                    std::to_string(p.penalty));
  }
}

void validate_params(const TreeParams& p) {
  if (p.max_depth < 1) {
    throw Error(ErrorCode::invalid_config, "tree max_depth must be >= 1");
  }
  if (!(p.cc_alpha >= 0.0) || !std::isfinite(p.cc_alpha)) {
    throw Error(ErrorCode::invalid_config,
                "tree cc_alpha must be finite and >= 0");
  }
  if (p.min_leaf < 1) {
    throw Error(ErrorCode::invalid_config, "tree min_leaf must be >= 1");
  }
}

void validate_params(const MlpConfig& p) {
  if (p.widths.size() != 5 || p.activations.size() != 5) {
    throw Error(ErrorCode::invalid_config,
                "mlp must have exactly 5 layers (widths and activations)");
  }
  if (p.widths.back() != 1) {
    throw Error(ErrorCode::invalid_config, "mlp output layer must have width 1");
  }
  for (int w : p.widths) {
    if (w < 1) {
      throw Error(ErrorCode::invalid_config, "mlp layer widths must be >= 1");
    }
  }
  if (!(p.dropout >= 0.0 && p.dropout < 1.0)) {
    throw Error(ErrorCode::invalid_config, "mlp dropout must be in [0, 1)");
  }
  if (!(p.learning_rate > 0.0) || !std::isfinite(p.learning_rate)) {
    throw Error(ErrorCode::invalid_config, "mlp learning_rate must be > 0");
  }
  if (p.batch < 1) {
    throw Error(ErrorCode::invalid_config, "mlp batch must be >= 1");
  }
  if (p.epochs < 1) {
    throw Error(ErrorCode::invalid_config, "mlp epochs must be >= 1");
  }
}

MachineKind kind_of(const HyperParams& p) {
  if (std::holds_alternative<RidgeParams>(p)) return MachineKind::ridge;
  if (std::holds_alternative<TreeParams>(p)) return MachineKind::tree;
  return MachineKind::mlp;
}

}  // namespace

void MachineSpec::validate() const {
  if (grid.empty()) {
    throw Error(ErrorCode::invalid_config,
                std::string("empty hyperparameter grid for ") + to_string(kind));
  }
  for (const auto& p : grid) {
    if (kind_of(p) != kind) {
      throw Error(ErrorCode::invalid_config,
                  std::string("grid entry kind does not match machine kind ") +
                      to_string(kind));
    }
    std::visit([](const auto& params) { validate_params(params); }, p);
  }
}

MachineSpec MachineSpec::default_ridge() {
  MachineSpec spec;
  spec.kind = MachineKind::ridge;
  for (double penalty : {1e-4, 1e-2, 1.0, 10.0, 100.0}) {
    spec.grid.push_back(RidgeParams{penalty});
  }
  return spec;
}

MachineSpec MachineSpec::default_tree() {
  MachineSpec spec;
  spec.kind = MachineKind::tree;
  for (double alpha : {0.0, 1e-4, 1e-3, 1e-2}) {
    spec.grid.push_back(TreeParams{10, alpha, 5});
  }
  return spec;
}

MachineSpec MachineSpec::default_mlp() {
  MachineSpec spec;
  spec.kind = MachineKind::mlp;
  for (int width : {8, 32}) {
    for (Activation act : {Activation::relu, Activation::sigmoid}) {
      for (double dropout : {0.0, 0.2}) {
        for (double lr : {1e-3, 1e-2}) {
          for (int epochs : {50, 200}) {
            MlpConfig cfg;
            cfg.widths = {width, width, width, width, 1};
            cfg.activations = {act, act, act, act, Activation::linear};
            cfg.dropout = dropout;
            cfg.learning_rate = lr;
            cfg.batch = 32;
            cfg.epochs = epochs;
            spec.grid.push_back(cfg);
          }
        }
      }
    }
  }
  return spec;
}

FittedMachine::FittedMachine(MachineKind kind, HyperParams hyperparams,
                             MachineState state, int input_width)
    : kind_(kind),
      hyperparams_(std::move(hyperparams)),
      state_(std::move(state)),
      input_width_(input_width) {}

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::tanh: return std::tanh(z);
    case Activation::linear: return z;
  }
  return z;
}

Eigen::VectorXd predict_ridge_state(const RidgeState& s,
                                    const Eigen::MatrixXd& X) {
  return (X * s.coef).array() + s.intercept;
}

Eigen::VectorXd predict_tree_state(const TreeState& s,
                                   const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    int node = 0;
    while (!s.nodes[node].is_leaf()) {
      const TreeNode& t = s.nodes[node];
      node = X(i, t.feature) <= t.threshold ? t.left : t.right;
    }
    out(i) = s.nodes[node].value;
  }
  return out;
}

Eigen::VectorXd predict_mlp_state(const MlpState& s, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd h = X.transpose();  // features x rows
  for (std::size_t l = 0; l < s.weights.size(); ++l) {
    Eigen::MatrixXd z = s.weights[l] * h;
    z.colwise() += s.biases[l];
    Activation a = s.activations[l];
    h = z.unaryExpr([a](double v) { return activate(a, v); });
  }
  return h.row(0).transpose();
}

}  // namespace

Eigen::VectorXd FittedMachine::predict(const Eigen::MatrixXd& features) const {
  if (features.cols() != input_width_) {
    throw Error(ErrorCode::invalid_input,
                "prediction input has " + std::to_string(features.cols()) +
                    " features, machine expects " +
                    std::to_string(input_width_));
  }
  return std::visit(
      [&features](const auto& s) -> Eigen::VectorXd {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, RidgeState>) {
          return predict_ridge_state(s, features);
        } else if constexpr (std::is_same_v<S, TreeState>) {
          return predict_tree_state(s, features);
        } else {
          return predict_mlp_state(s, features);
        }
      },
      state_);
}

void apply_run_seed(std::vector<MachineSpec>& specs, std::uint64_t seed) {
  if (seed == 0) return;
  for (auto& spec : specs) {
    for (auto& point : spec.grid) {
      if (auto* mlp = std::get_if<MlpConfig>(&point)) {
        mlp->seed ^= seed;
      }
    }
  }
}

FittedMachine fit_machine(MachineKind kind, const HyperParams& params,
                          const Dataset& train) {
  std::visit([](const auto& p) { validate_params(p); }, params);
  if (kind_of(params) != kind) {
    throw Error(ErrorCode::invalid_config,
                "hyperparameter type does not match machine kind");
  }
  switch (kind) {
    case MachineKind::ridge:
      return fit_ridge(train, std::get<RidgeParams>(params).penalty);
    case MachineKind::tree:
      return fit_tree(train, std::get<TreeParams>(params));
    case MachineKind::mlp:
      return fit_mlp(train, std::get<MlpConfig>(params));
  }
  throw Error(ErrorCode::invalid_config, "unreachable machine kind");
}

}  // namespace maclab
