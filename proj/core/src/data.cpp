#include "maclab/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "maclab/error.hpp"

namespace maclab {

void Dataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1) {
    throw Error(ErrorCode::invalid_input, "dataset needs n >= 1 and l >= 1");
  }
  if (target.size() != features.rows()) {
    throw Error(ErrorCode::invalid_input, "target length does not match row count");
  }
  if (static_cast<Eigen::Index>(feature_names.size()) != features.cols()) {
    throw Error(ErrorCode::invalid_input, "feature_names length does not match column count");
  }
  if (!features.allFinite() || !target.allFinite()) {
    throw Error(ErrorCode::invalid_input, "dataset contains NaN or infinity");
  }
}

DataSplit split(const Dataset& dataset, const SplitFractions& fractions,
                std::uint64_t seed) {
  dataset.validate();
  const double sum = fractions.train + fractions.val + fractions.test;
  if (fractions.train <= 0.0 || fractions.val <= 0.0 || fractions.test < 0.0 ||
      std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "fractions must be positive and sum to 1, got (" << fractions.train
        << ", " << fractions.val << ", " << fractions.test << ")";
    throw Error(ErrorCode::invalid_config, msg.str());
  }

  const auto n = static_cast<int>(dataset.rows());
  const bool with_test = fractions.test > 0.0;
  const int n_val = static_cast<int>(std::floor(fractions.val * n));
  const int n_test = with_test ? static_cast<int>(std::floor(fractions.test * n)) : 0;
  const int n_train = n - n_val - n_test;
  if (n_train < 1 || n_val < 1 || (with_test && n_test < 1)) {
    std::ostringstream msg;
    msg << "split of n=" << n << " leaves an empty part (train=" << n_train
        << ", val=" << n_val << ", test=" << n_test << ")";
    throw Error(ErrorCode::too_few_rows, msg.str());
  }

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  DataSplit out;
  out.train_idx.assign(idx.begin(), idx.begin() + n_train);
  out.val_idx.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  if (with_test) {
    out.test_idx.emplace(idx.begin() + n_train + n_val, idx.end());
  }
  std::sort(out.train_idx.begin(), out.train_idx.end());
  std::sort(out.val_idx.begin(), out.val_idx.end());
  if (out.test_idx) std::sort(out.test_idx->begin(), out.test_idx->end());
  out.val_proportion = fractions.val;
  return out;
}

Dataset subset(const Dataset& dataset, std::span<const int> idx) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), dataset.width());
  out.target.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int r = idx[i];
    if (r < 0 || r >= dataset.rows()) {
      throw Error(ErrorCode::invalid_input, "subset index out of range");
    }
    out.features.row(static_cast<Eigen::Index>(i)) = dataset.features.row(r);
    out.target(static_cast<Eigen::Index>(i)) = dataset.target(r);
  }
  out.feature_names = dataset.feature_names;
  return out;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.width() != b.width() || a.feature_names != b.feature_names) {
    throw Error(ErrorCode::invalid_input, "concat requires identical feature columns");
  }
  Dataset out;
  out.features.resize(a.rows() + b.rows(), a.width());
  out.features << a.features, b.features;
  out.target.resize(a.rows() + b.rows());
  out.target << a.target, b.target;
  out.feature_names = a.feature_names;
  return out;
}

namespace {

ColumnStats column_stats(const std::string& name, const Eigen::VectorXd& col) {
  const double n = static_cast<double>(col.size());
  const double mean = col.mean();
  double ss = (col.array() - mean).square().sum();
  const double sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {name, mean, sd};
}

}  // namespace

StandardizedDataset standardize(const Dataset& dataset) {
  dataset.validate();
  StandardizedDataset out;
  out.target_stats = column_stats("target", dataset.target);
  if (out.target_stats.stddev <= 0.0) {
    throw Error(ErrorCode::uninformative_target, "target column is constant");
  }

  std::vector<int> kept;
  for (int j = 0; j < dataset.width(); ++j) {
    ColumnStats stats = column_stats(dataset.feature_names[j], dataset.features.col(j));
    if (stats.stddev <= 0.0) {
      out.dropped_features.push_back(stats.name);
    } else {
      kept.push_back(j);
      out.feature_stats.push_back(stats);
    }
  }
  if (kept.empty()) {
    throw Error(ErrorCode::invalid_input, "all feature columns are constant");
  }

  out.data.features.resize(dataset.rows(), static_cast<Eigen::Index>(kept.size()));
  out.data.feature_names.reserve(kept.size());
  for (std::size_t jj = 0; jj < kept.size(); ++jj) {
    const auto& stats = out.feature_stats[jj];
    out.data.features.col(static_cast<Eigen::Index>(jj)) =
        (dataset.features.col(kept[jj]).array() - stats.mean) / stats.stddev;
    out.data.feature_names.push_back(stats.name);
  }
  out.data.target =
      (dataset.target.array() - out.target_stats.mean) / out.target_stats.stddev;
  return out;
}

double empirical_risk(const Eigen::VectorXd& actual,
                      const Eigen::VectorXd& predicted, LossKind loss) {
  if (actual.size() != predicted.size() || actual.size() == 0) {
    throw Error(ErrorCode::invalid_input, "risk requires equal nonzero lengths");
  }
  switch (loss) {
    case LossKind::squared_error:
      return (actual - predicted).squaredNorm() / static_cast<double>(actual.size());
  }
  throw Error(ErrorCode::invalid_input, "unknown loss kind");
}

}  // namespace maclab
