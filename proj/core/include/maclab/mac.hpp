#ifndef MACLAB_MAC_HPP
#define MACLAB_MAC_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "maclab/data.hpp"
#include "maclab/machine.hpp"

namespace maclab {

/// Collaborative ensemble of K heterogeneous machines updated in round-robin
/// sweeps. Each machine is repeatedly retuned and refitted against the
/// residual left by the others; the returned ensemble is the sweep state with
/// the lowest validation risk seen.
struct MacConfig {
  std::vector<MachineSpec> machines;  // update order is the vector order
  int max_iterations = 20;            // outer sweep budget
  int stall_tolerance = 2;            // sweeps without improvement before stop
  bool refit_on_full_data = false;    // refit tuned params on train+val
  LossKind loss = LossKind::squared_error;
  // Mixed into the seeds of any mlp grid entries so replications can vary
  // initialization without editing every grid. Zero leaves grids untouched.
  std::uint64_t seed = 0;

  void validate() const;
};

struct MacSweepRecord {
  int iteration = 0;  // 1-based sweep number
  int machine = 0;    // 1-based machine slot
  double val_risk = 0.0;
};

struct MacModel {
  // Ensemble members; a slot that had not been fitted when the accepted
  // state was captured contributes zero to predictions.
  std::vector<std::optional<FittedMachine>> members;
  double val_risk = 0.0;
  int best_iteration = 0;
  int best_machine = 0;
  int iterations_run = 0;
  std::vector<double> accepted_risks;     // strictly decreasing
  std::vector<MacSweepRecord> sweep_log;  // every (iteration, machine) update
};

/// Target minus the summed predictions of every machine except `excluded`.
Eigen::VectorXd working_response(const Eigen::VectorXd& target,
                                 const std::vector<Eigen::VectorXd>& predictions,
                                 std::size_t excluded);

MacModel fit_mac(const MacConfig& config, const Dataset& train,
                 const Dataset& val);

Eigen::VectorXd predict_mac(const MacModel& model,
                            const Eigen::MatrixXd& features);

}  // namespace maclab

#endif  // MACLAB_MAC_HPP
