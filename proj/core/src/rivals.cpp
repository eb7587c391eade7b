#include "maclab/rivals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "maclab/error.hpp"

namespace maclab {

void SuperLearnerConfig::validate() const {
  if (machines.empty()) {
    throw Error(ErrorCode::invalid_config,
                "super learner needs at least one machine");
  }
  for (const auto& spec : machines) spec.validate();
  if (!(tolerance > 0.0)) {
    throw Error(ErrorCode::invalid_config, "solver tolerance must be > 0");
  }
  if (max_solver_iterations < 1) {
    throw Error(ErrorCode::invalid_config, "solver iteration cap must be >= 1");
  }
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const auto k = v.size();
  std::vector<double> u(v.data(), v.data() + k);
  std::sort(u.begin(), u.end(), std::greater<>());
  double running = 0.0;
  double theta = 0.0;
  int support = 0;
  for (int j = 0; j < k; ++j) {
    running += u[j];
    const double candidate = (running - 1.0) / (j + 1);
    if (u[j] - candidate > 0.0) {
      support = j + 1;
      theta = candidate;
    }
  }
  (void)support;
  return v.unaryExpr([theta](double x) { return std::max(x - theta, 0.0); });
}

// The quadratic's curvature bound gives the step size, so every iterate
// descends; starting from each vertex makes the final risk no worse than any
// single machine's.
Eigen::VectorXd stack_weights(const Eigen::MatrixXd& P,
                              const Eigen::VectorXd& y, double tolerance,
                              int max_iters) {
  if (P.rows() != y.size() || P.cols() < 1) {
    throw Error(ErrorCode::invalid_input, "prediction matrix shape mismatch");
  }
  const auto n = static_cast<double>(P.rows());
  const auto k = P.cols();
  const Eigen::MatrixXd G = P.transpose() * P / n;
  const Eigen::VectorXd b = P.transpose() * y / n;
  const double y2 = y.squaredNorm() / n;

  auto risk = [&](const Eigen::VectorXd& w) {
    return y2 - 2.0 * b.dot(w) + w.dot(G * w);
  };

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(G);
  const double lipschitz = std::max(2.0 * eigs.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / lipschitz;

  std::vector<Eigen::VectorXd> starts;
  for (Eigen::Index j = 0; j < k; ++j) {
    starts.push_back(Eigen::VectorXd::Unit(k, j));
  }
  starts.push_back(Eigen::VectorXd::Constant(k, 1.0 / k));

  Eigen::VectorXd best;
  double best_risk = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    Eigen::VectorXd w = start;
    for (int it = 0; it < max_iters; ++it) {
      Eigen::VectorXd grad = 2.0 * (G * w - b);
      Eigen::VectorXd next = project_to_simplex(w - step * grad);
      const double stationarity = (w - next).norm() / step;
      w = next;
      if (stationarity < tolerance) break;
    }
    const double r = risk(w);
    if (r < best_risk) {
      best_risk = r;
      best = w;
    }
  }
  return best;
}

SuperLearnerModel fit_super_learner(const SuperLearnerConfig& config,
                                    const Dataset& train, const Dataset& val) {
  config.validate();
  train.validate();
  val.validate();
  if (train.width() != val.width()) {
    throw Error(ErrorCode::invalid_input,
                "train and validation feature widths differ");
  }

  std::vector<MachineSpec> specs = config.machines;
  apply_run_seed(specs, config.seed);

  SuperLearnerModel model;
  Eigen::MatrixXd P(val.rows(), static_cast<Eigen::Index>(specs.size()));
  for (std::size_t k = 0; k < specs.size(); ++k) {
    try {
      TuneResult tuned = tune(specs[k], train, val, config.loss);
      P.col(static_cast<Eigen::Index>(k)) = tuned.machine.predict(val.features);
      model.machines.push_back(std::move(tuned.machine));
    } catch (const Error& e) {
      throw Error(e.code(), "machine " + std::to_string(k + 1) + ": " +
                                e.what());
    }
  }

  model.weights = stack_weights(P, val.target, config.tolerance,
                                config.max_solver_iterations);
  model.val_risk =
      empirical_risk(val.target, P * model.weights, config.loss);
  return model;
}

Eigen::VectorXd predict_sl(const SuperLearnerModel& model,
                           const Eigen::MatrixXd& features) {
  if (model.machines.empty()) {
    throw Error(ErrorCode::invalid_input, "super learner has no machines");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(features.rows());
  for (std::size_t k = 0; k < model.machines.size(); ++k) {
    out += model.weights(static_cast<Eigen::Index>(k)) *
           model.machines[k].predict(features);
  }
  return out;
}

void LsBoostConfig::validate() const {
  if (machines.empty()) {
    throw Error(ErrorCode::invalid_config, "boosting needs at least one machine");
  }
  for (const auto& spec : machines) spec.validate();
  if (rounds < 1) {
    throw Error(ErrorCode::invalid_config, "boosting rounds must be >= 1");
  }
  if (!(shrinkage > 0.0 && shrinkage <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "shrinkage must be in (0, 1]");
  }
  if (stall_tolerance < 1) {
    throw Error(ErrorCode::invalid_config, "stall tolerance must be >= 1");
  }
}

namespace {

Dataset with_target(const Dataset& base, const Eigen::VectorXd& target) {
  Dataset d;
  d.features = base.features;
  d.target = target;
  d.feature_names = base.feature_names;
  return d;
}

}  // namespace

LsBoostModel fit_ls_boost(const LsBoostConfig& config, const Dataset& train,
                          const Dataset& val) {
  config.validate();
  train.validate();
  val.validate();
  if (train.width() != val.width()) {
    throw Error(ErrorCode::invalid_input,
                "train and validation feature widths differ");
  }

  std::vector<MachineSpec> specs = config.machines;
  apply_run_seed(specs, config.seed);
  const std::size_t K = specs.size();

  Eigen::VectorXd res_train = train.target;
  Eigen::VectorXd res_val = val.target;
  const auto n_val = static_cast<double>(val.rows());

  LsBoostModel model;
  model.shrinkage = config.shrinkage;
  model.input_width = static_cast<int>(train.width());

  // The empty ensemble predicts zero; any kept stage must beat this.
  double best_risk = res_val.squaredNorm() / n_val;
  int best_stage = 0;
  int stall = 0;

  std::vector<BoostStage> stages;
  for (int round = 0; round < config.rounds && stall < config.stall_tolerance;
       ++round) {
    for (std::size_t slot = 0; slot < K; ++slot) {
      Dataset train_r = with_target(train, res_train);
      Dataset val_r = with_target(val, res_val);

      int chosen = static_cast<int>(slot);
      TuneResult tuned = [&] {
        const int stage_number = round * static_cast<int>(K) +
                                 static_cast<int>(slot) + 1;
        try {
          if (!config.select_best_machine) {
            return tune(specs[slot], train_r, val_r, config.loss);
          }
          // Free machine choice per stage: tune everything, keep the best.
          std::optional<TuneResult> best;
          for (std::size_t k = 0; k < K; ++k) {
            TuneResult r = tune(specs[k], train_r, val_r, config.loss);
            if (!best || r.val_risk < best->val_risk) {
              best = std::move(r);
              chosen = static_cast<int>(k);
            }
          }
          return std::move(*best);
        } catch (const Error& e) {
          throw Error(e.code(), "stage " + std::to_string(stage_number) +
                                    ": " + e.what());
        }
      }();

      res_train -= config.shrinkage * tuned.machine.predict(train.features);
      res_val -= config.shrinkage * tuned.machine.predict(val.features);
      stages.push_back({chosen + 1, std::move(tuned.machine)});

      const double risk = res_val.squaredNorm() / n_val;
      model.val_trace.push_back(risk);
      if (risk < best_risk) {
        best_risk = risk;
        best_stage = static_cast<int>(stages.size());
        stall = 0;
      } else if (++stall >= config.stall_tolerance) {
        break;
      }
    }
  }

  model.stop_index = best_stage;
  model.val_risk = best_risk;
  stages.erase(stages.begin() + best_stage, stages.end());
  model.stages = std::move(stages);
  return model;
}

Eigen::VectorXd predict_boost(const LsBoostModel& model,
                              const Eigen::MatrixXd& features) {
  if (features.cols() != model.input_width) {
    throw Error(ErrorCode::invalid_input,
                "prediction input width does not match the boosted model");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(features.rows());
  for (const auto& stage : model.stages) {
    out += model.shrinkage * stage.fitted.predict(features);
  }
  return out;
}

}  // namespace maclab
