#ifndef MACLAB_DATA_HPP
#define MACLAB_DATA_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace maclab {

/// A regression sample: n rows of l features plus a numeric target.
struct Dataset {
  Eigen::MatrixXd features;  // n x l
  Eigen::VectorXd target;    // n
  std::vector<std::string> feature_names;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index width() const { return features.cols(); }

  /// Throws invalid_input unless n >= 1, l >= 1, everything finite and the
  /// name list matches the column count.
  void validate() const;
};

/// Index partition of a Dataset into train / validation (/ test) parts.
struct DataSplit {
  std::vector<int> train_idx;
  std::vector<int> val_idx;
  std::optional<std::vector<int>> test_idx;
  double val_proportion = 0.0;
};

struct SplitFractions {
  double train = 0.0;
  double val = 0.0;
  double test = 0.0;  // zero means no test part
};

enum class LossKind { squared_error };

struct ColumnStats {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;  // sample sd, denominator n-1
};

struct StandardizedDataset {
  Dataset data;
  std::vector<ColumnStats> feature_stats;
  ColumnStats target_stats;
  std::vector<std::string> dropped_features;  // constant columns
};

/// Uniformly random index partition, reproducible from the seed. Part sizes:
/// val and test get floor(fraction * n), train gets the remainder.
DataSplit split(const Dataset& dataset, const SplitFractions& fractions,
                std::uint64_t seed);

/// Rows of `dataset` selected by `idx`, in the given order.
Dataset subset(const Dataset& dataset, std::span<const int> idx);

/// Vertical concatenation; feature names must agree.
Dataset concat(const Dataset& a, const Dataset& b);

/// Center and scale every column (features and target) to sample mean 0 and
/// sample variance 1 (denominator n-1). Constant feature columns are dropped
/// and reported; a constant target is an error.
StandardizedDataset standardize(const Dataset& dataset);

/// Mean loss over the paired entries.
double empirical_risk(const Eigen::VectorXd& actual,
                      const Eigen::VectorXd& predicted, LossKind loss);

}  // namespace maclab

#endif  // MACLAB_DATA_HPP
