#include "maclab/mac.hpp"

#include <limits>

#include "maclab/error.hpp"

namespace maclab {

void MacConfig::validate() const {
  if (machines.empty()) {
    throw Error(ErrorCode::invalid_config, "mac needs at least one machine");
  }
  for (const auto& spec : machines) spec.validate();
  if (max_iterations < 1) {
    throw Error(ErrorCode::invalid_config, "mac max_iterations must be >= 1");
  }
  if (stall_tolerance < 1) {
    throw Error(ErrorCode::invalid_config, "mac stall_tolerance must be >= 1");
  }
}

Eigen::VectorXd working_response(
    const Eigen::VectorXd& target,
    const std::vector<Eigen::VectorXd>& predictions, std::size_t excluded) {
  if (excluded >= predictions.size()) {
    throw Error(ErrorCode::invalid_input,
                "excluded machine index out of range");
  }
  Eigen::VectorXd out = target;
  for (std::size_t j = 0; j < predictions.size(); ++j) {
    if (j == excluded) continue;
    if (predictions[j].size() != target.size()) {
      throw Error(ErrorCode::invalid_input,
                  "prediction length does not match target length");
    }
    out -= predictions[j];
  }
  return out;
}

namespace {

Dataset with_target(const Dataset& base, Eigen::VectorXd target) {
  Dataset d;
  d.features = base.features;
  d.target = std::move(target);
  d.feature_names = base.feature_names;
  return d;
}

}  // namespace

MacModel fit_mac(const MacConfig& config, const Dataset& train,
                 const Dataset& val) {
  config.validate();
  train.validate();
  val.validate();
  if (train.width() != val.width()) {
    throw Error(ErrorCode::invalid_input,
                "train and validation feature widths differ");
  }

  const std::size_t K = config.machines.size();
  std::vector<MachineSpec> specs = config.machines;
  apply_run_seed(specs, config.seed);

  std::vector<std::optional<FittedMachine>> current(K);
  std::vector<std::optional<FittedMachine>> previous(K);
  std::vector<Eigen::VectorXd> pred_train(K, Eigen::VectorXd::Zero(train.rows()));
  std::vector<Eigen::VectorXd> pred_val(K, Eigen::VectorXd::Zero(val.rows()));

  MacModel model;
  model.val_risk = std::numeric_limits<double>::infinity();

  int stall = 0;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    model.iterations_run = iter;
    previous = current;

    int sweep_best_k = -1;
    double sweep_best_risk = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      Dataset train_k =
          with_target(train, working_response(train.target, pred_train, k));
      Dataset val_k =
          with_target(val, working_response(val.target, pred_val, k));

      TuneResult tuned = tune(specs[k], train_k, val_k, config.loss);
      if (config.refit_on_full_data) {
        current[k] = fit_machine(specs[k].kind, tuned.best,
                                 concat(train_k, val_k));
      } else {
        current[k] = std::move(tuned.machine);
      }
      pred_train[k] = current[k]->predict(train.features);
      pred_val[k] = current[k]->predict(val.features);

      Eigen::VectorXd ensemble_val = Eigen::VectorXd::Zero(val.rows());
      for (const auto& p : pred_val) ensemble_val += p;
      const double risk =
          empirical_risk(val.target, ensemble_val, config.loss);
      model.sweep_log.push_back(
          {iter, static_cast<int>(k) + 1, risk});
      // Ties go to the earliest machine in the sweep.
      if (risk < sweep_best_risk) {
        sweep_best_risk = risk;
        sweep_best_k = static_cast<int>(k);
      }
    }

    if (sweep_best_risk < model.val_risk) {
      model.val_risk = sweep_best_risk;
      model.best_iteration = iter;
      model.best_machine = sweep_best_k + 1;
      model.accepted_risks.push_back(sweep_best_risk);
      // Machines past the accepted slot still carried last sweep's fits when
      // this risk was measured.
      model.members.assign(K, std::nullopt);
      for (std::size_t j = 0; j < K; ++j) {
        model.members[j] =
            j <= static_cast<std::size_t>(sweep_best_k) ? current[j]
                                                        : previous[j];
      }
      stall = 0;
    } else {
      if (++stall >= config.stall_tolerance) break;
    }
  }
  return model;
}

Eigen::VectorXd predict_mac(const MacModel& model,
                            const Eigen::MatrixXd& features) {
  if (model.members.empty()) {
    throw Error(ErrorCode::invalid_input, "mac model has no members");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(features.rows());
  for (const auto& member : model.members) {
    if (member) out += member->predict(features);
  }
  return out;
}

}  // namespace maclab
