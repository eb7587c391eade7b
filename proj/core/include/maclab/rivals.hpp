#ifndef MACLAB_RIVALS_HPP
#define MACLAB_RIVALS_HPP

#include <cstdint>
#include <vector>

#include "maclab/data.hpp"
#include "maclab/machine.hpp"

namespace maclab {

/// Validation-weighted stacking over independently tuned base machines.
struct SuperLearnerConfig {
  std::vector<MachineSpec> machines;
  LossKind loss = LossKind::squared_error;
  std::uint64_t seed = 0;        // mixed into mlp grid seeds, zero = untouched
  double tolerance = 1e-8;       // projected-gradient stationarity threshold
  int max_solver_iterations = 200000;

  void validate() const;
};

struct SuperLearnerModel {
  std::vector<FittedMachine> machines;
  Eigen::VectorXd weights;  // on the simplex
  double val_risk = 0.0;
};

SuperLearnerModel fit_super_learner(const SuperLearnerConfig& config,
                                    const Dataset& train, const Dataset& val);

Eigen::VectorXd predict_sl(const SuperLearnerModel& model,
                           const Eigen::MatrixXd& features);

/// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// Simplex-constrained weights minimizing |target - predictions w|^2 / n by
/// fixed-step projected gradient with multistart at the vertices and the
/// uniform point. Columns of `predictions` are the machines.
Eigen::VectorXd stack_weights(const Eigen::MatrixXd& predictions,
                              const Eigen::VectorXd& target,
                              double tolerance = 1e-8,
                              int max_iterations = 200000);

/// Forward stagewise fitting of residuals, cycling the machine list.
struct LsBoostConfig {
  std::vector<MachineSpec> machines;
  int rounds = 5;                  // passes over the machine list
  double shrinkage = 1.0;          // in (0, 1]
  int stall_tolerance = 3;         // consecutive non-improving stages
  bool select_best_machine = false;  // per stage, instead of cycling
  LossKind loss = LossKind::squared_error;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BoostStage {
  int machine = 0;  // 1-based index into the configured machine list
  FittedMachine fitted;
};

struct LsBoostModel {
  std::vector<BoostStage> stages;  // truncated at the best stop index
  double shrinkage = 1.0;
  int stop_index = 0;              // 0 = empty ensemble
  double val_risk = 0.0;
  std::vector<double> val_trace;   // per stage, before truncation
  int input_width = 0;
};

LsBoostModel fit_ls_boost(const LsBoostConfig& config, const Dataset& train,
                          const Dataset& val);

Eigen::VectorXd predict_boost(const LsBoostModel& model,
                              const Eigen::MatrixXd& features);

}  // namespace maclab

#endif  // MACLAB_RIVALS_HPP
