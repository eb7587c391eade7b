#include "maclab/stats.hpp"

#include <cmath>

#include "maclab/data.hpp"
#include "maclab/error.hpp"

namespace maclab {
namespace {

// Shared guard for the paired statistics: returns the differences after
// validating shape and variability.
Eigen::VectorXd paired_differences(const Eigen::VectorXd& a,
                                   const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::invalid_input,
                "paired vectors have different lengths");
  }
  if (a.size() < 2) {
    throw Error(ErrorCode::invalid_input,
                "paired statistics need at least two pairs");
  }
  Eigen::VectorXd d = a - b;
  const double sd = std::sqrt((d.array() - d.mean()).square().sum() /
                              (d.size() - 1));
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::degenerate_statistic,
                "paired differences have zero standard deviation");
  }
  return d;
}

}  // namespace

double mspe(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
  return empirical_risk(actual, predicted, LossKind::squared_error);
}

double paired_t(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd d = paired_differences(a, b);
  const auto m = static_cast<double>(d.size());
  const double sd = std::sqrt((d.array() - d.mean()).square().sum() / (m - 1));
  return d.mean() / (sd / std::sqrt(m));
}

double cohens_d(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd d = paired_differences(a, b);
  const auto m = static_cast<double>(d.size());
  const double sd = std::sqrt((d.array() - d.mean()).square().sum() / (m - 1));
  return d.mean() / sd;
}

}  // namespace maclab
