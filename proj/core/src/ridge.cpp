#include <Eigen/Dense>
#include <cmath>

#include "maclab/error.hpp"
#include "maclab/machine.hpp"

namespace maclab {

FittedMachine fit_ridge(const Dataset& train, double penalty) {
  train.validate();
  const Eigen::MatrixXd& X = train.features;
  const Eigen::VectorXd& y = train.target;
  const auto n = X.rows();
  const auto l = X.cols();

  // Centering makes the intercept separable, so only slopes are penalized.
  Eigen::RowVectorXd x_mean = X.colwise().mean();
  double y_mean = y.mean();
  Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::MatrixXd gram = Xc.transpose() * Xc;
  gram.diagonal().array() += penalty;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  Eigen::VectorXd coef = ldlt.solve(Xc.transpose() * yc);
  if (ldlt.info() != Eigen::Success || !coef.allFinite()) {
    // Singular unpenalized system (e.g. duplicated columns at penalty 0):
    // retry with a tiny jitter rather than emitting NaN coefficients.
    Eigen::MatrixXd jittered = Xc.transpose() * Xc;
    jittered.diagonal().array() += penalty + 1e-12 * (1.0 + gram.diagonal().maxCoeff());
    Eigen::LDLT<Eigen::MatrixXd> retry(jittered);
    coef = retry.solve(Xc.transpose() * yc);
    if (!coef.allFinite()) {
      throw Error(ErrorCode::factorization_failed,
                  "ridge solve produced non-finite coefficients");
    }
  }

  RidgeState state;
  state.coef = coef;
  state.intercept = y_mean - x_mean * coef;
  (void)n;
  return FittedMachine(MachineKind::ridge, RidgeParams{penalty},
                       std::move(state), static_cast<int>(l));
}

}  // namespace maclab
