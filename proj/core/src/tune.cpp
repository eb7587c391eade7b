#include <cmath>
#include <limits>
#include <optional>

#include "maclab/error.hpp"
#include "maclab/machine.hpp"

namespace maclab {

TuneResult tune(const MachineSpec& spec, const Dataset& train,
                const Dataset& val, LossKind loss) {
  spec.validate();
  train.validate();
  val.validate();
  if (train.width() != val.width()) {
    throw Error(ErrorCode::invalid_input,
                "train and validation feature widths differ");
  }

  std::optional<TuneResult> best;
  std::vector<double> risks;
  risks.reserve(spec.grid.size());
  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    double risk = std::numeric_limits<double>::quiet_NaN();
    try {
      FittedMachine m = fit_machine(spec.kind, spec.grid[g], train);
      risk = empirical_risk(val.target, m.predict(val.features), loss);
      // Strict comparison keeps the earliest grid point on ties.
      if (std::isfinite(risk) && (!best || risk < best->val_risk)) {
        best = TuneResult{spec.grid[g], std::move(m), risk, {}};
      }
    } catch (const Error&) {
      // A single diverged or degenerate fit only removes that grid point.
    }
    risks.push_back(risk);
  }
  if (!best) {
    throw Error(ErrorCode::tuning_failed,
                std::string("no grid point produced a finite validation risk "
                            "for ") +
                    to_string(spec.kind));
  }
  best->grid_risks = std::move(risks);
  return *best;
}

}  // namespace maclab
