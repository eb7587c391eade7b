#ifndef MACLAB_CONFIG_HPP
#define MACLAB_CONFIG_HPP

#include <string>
#include <vector>

#include "maclab/mac.hpp"
#include "maclab/rivals.hpp"

namespace maclab {

// Experiment configuration files are one JSON object that can carry the
// machine grids plus per-ensemble knobs:
//
//   {
//     "machines": [
//       {"kind": "ridge", "grid": [{"penalty": 1e-4}, {"penalty": 1.0}]},
//       {"kind": "tree",  "grid": [{"max_depth": 10, "cc_alpha": 0.0}]},
//       {"kind": "mlp",   "grid": [{"widths": [8, 8, 8, 8, 1], "epochs": 50}]}
//     ],
//     "mac":           {"max_iterations": 20, "stall_tolerance": 2,
//                       "refit_on_full_data": true},
//     "super_learner": {"tolerance": 1e-8, "max_solver_iterations": 200000},
//     "ls_boost":      {"rounds": 5, "shrinkage": 1.0, "stall_tolerance": 3,
//                       "select_best_machine": false}
//   }
//
// Grid entries may omit fields, which then keep the kind's defaults. Keys
// missing from the file keep the values already in `base`, so callers seed
// whatever defaults they want. Loaders validate the result: JSON problems
// are bad-format, semantic ones invalid-config.

std::vector<MachineSpec> machine_specs_from_json(
    const std::string& text, std::vector<MachineSpec> fallback);

MacConfig mac_config_from_json(const std::string& text, MacConfig base);
SuperLearnerConfig sl_config_from_json(const std::string& text,
                                       SuperLearnerConfig base);
LsBoostConfig boost_config_from_json(const std::string& text,
                                     LsBoostConfig base);

}  // namespace maclab

#endif  // MACLAB_CONFIG_HPP
