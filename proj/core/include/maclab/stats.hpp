#ifndef MACLAB_STATS_HPP
#define MACLAB_STATS_HPP

#include <Eigen/Dense>

namespace maclab {

/// Mean squared prediction error; identical to the squared-error empirical
/// risk and kept as the reporting-facing name.
double mspe(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);

/// Paired t statistic of a - b: mean(d) / (sd(d) / sqrt(m)) with the
/// sample standard deviation (denominator m - 1).
double paired_t(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Paired-differences effect size mean(d) / sd(d); equals paired_t / sqrt(m).
double cohens_d(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace maclab

#endif  // MACLAB_STATS_HPP
