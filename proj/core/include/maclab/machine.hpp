#ifndef MACLAB_MACHINE_HPP
#define MACLAB_MACHINE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "maclab/data.hpp"

namespace maclab {

enum class MachineKind { ridge, tree, mlp };

const char* to_string(MachineKind kind);
MachineKind machine_kind_from_string(const std::string& name);

enum class Activation { relu, sigmoid, tanh, linear };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct RidgeParams {
  double penalty = 1.0;  // >= 0
};

struct TreeParams {
  int max_depth = 10;
  double cc_alpha = 0.0;  // cost-complexity pruning threshold, per-sample scale
  int min_leaf = 5;
};

/// Five dense layers; the last has width 1 and a linear output. Dropout is
/// applied after each of the first four layers during training only.
struct MlpConfig {
  std::vector<int> widths{8, 8, 8, 8, 1};
  std::vector<Activation> activations{Activation::relu, Activation::relu,
                                      Activation::relu, Activation::relu,
                                      Activation::linear};
  double dropout = 0.0;        // in [0, 1)
  double learning_rate = 1e-2;
  int batch = 32;
  int epochs = 50;
  std::uint64_t seed = 0;
};

using HyperParams = std::variant<RidgeParams, TreeParams, MlpConfig>;

/// A base machine's search space: the kind plus a finite hyperparameter grid.
struct MachineSpec {
  MachineKind kind = MachineKind::ridge;
  std::vector<HyperParams> grid;

  void validate() const;

  static MachineSpec default_ridge();
  static MachineSpec default_tree();
  static MachineSpec default_mlp();
};

/// Flat binary tree; node 0 is the root, leaves have left < 0.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return left < 0; }
};

struct RidgeState {
  Eigen::VectorXd coef;
  double intercept = 0.0;
};

struct TreeState {
  std::vector<TreeNode> nodes;
};

struct MlpState {
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: out x in
  std::vector<Eigen::VectorXd> biases;
  std::vector<Activation> activations;
};

using MachineState = std::variant<RidgeState, TreeState, MlpState>;

/// An immutable trained machine. Prediction is deterministic; dropout is
/// never active here.
class FittedMachine {
 public:
  FittedMachine(MachineKind kind, HyperParams hyperparams, MachineState state,
                int input_width);

  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;

  MachineKind kind() const { return kind_; }
  const HyperParams& hyperparams() const { return hyperparams_; }
  const MachineState& state() const { return state_; }
  int input_width() const { return input_width_; }

 private:
  MachineKind kind_;
  HyperParams hyperparams_;
  MachineState state_;
  int input_width_;
};

/// Penalized least squares with an unpenalized intercept: coefficients solve
/// (Xc' Xc + penalty I) b = Xc' yc on column-centered data.
FittedMachine fit_ridge(const Dataset& train, double penalty);

/// CART-style regression tree: greedy variance-reduction splits grown to
/// max_depth, then weakest-link cost-complexity pruned at cc_alpha.
FittedMachine fit_tree(const Dataset& train, const TreeParams& params);

/// Seeded mini-batch SGD with backpropagation on squared loss.
FittedMachine fit_mlp(const Dataset& train, const MlpConfig& cfg);

/// Dispatch on kind.
FittedMachine fit_machine(MachineKind kind, const HyperParams& params,
                          const Dataset& train);

struct TuneResult {
  HyperParams best;
  FittedMachine machine;
  double val_risk = 0.0;
  std::vector<double> grid_risks;  // one per grid point, NaN for failed fits
};

/// Fits one machine per grid point on `train`, evaluates empirical risk on
/// `val`, returns the argmin. Ties break toward the earliest grid index.
TuneResult tune(const MachineSpec& spec, const Dataset& train,
                const Dataset& val, LossKind loss);

// Test and diagnostics hooks for the MLP: forward-pass loss at the given
// state, and the backpropagated gradient of the mean squared loss.
double mlp_loss(const MlpState& state, const Eigen::MatrixXd& X,
                const Eigen::VectorXd& y);
struct MlpGradient {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};
MlpGradient mlp_gradient(const MlpState& state, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y);

/// Glorot-uniform initial state for the configuration (biases zero).
MlpState mlp_initial_state(const MlpConfig& cfg, int input_width);

/// XORs `seed` into the seed of every mlp grid entry so a per-run seed can
/// vary network initialization without editing shared grids. Zero is a no-op.
void apply_run_seed(std::vector<MachineSpec>& specs, std::uint64_t seed);

}  // namespace maclab

#endif  // MACLAB_MACHINE_HPP
