#ifndef MACLAB_DGP_HPP
#define MACLAB_DGP_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "maclab/data.hpp"

namespace maclab {

enum class DgpId { dgp1 = 1, dgp2 = 2 };

const char* to_string(DgpId id);
DgpId dgp_from_int(int v);

/// Scale constants for the additive terms. c[0] is the centering offset;
/// c[1..5] multiply the stochastic terms (the first generator uses c[1..4]).
struct DgpConstants {
  std::array<double, 6> c{};
};

/// Number of stochastic terms for the generator (4 or 5).
int term_count(DgpId which);

struct DgpConfig {
  DgpId which = DgpId::dgp1;
  int n = 1000;
  double rho = 0.1;
  std::uint64_t seed = 1;
  DgpConstants constants;
  bool add_noise = true;  // test hook: off leaves the noiseless signal

  void validate() const;
};

/// Ten-by-ten covariance with entries rho^|i-j|.
Eigen::MatrixXd covariance_matrix(double rho);

/// Draws n rows from N(0, sigma) through the lower Cholesky factor. The
/// engine overload lets calibration stream blocks from one generator.
Eigen::MatrixXd sample_mvn(int n, const Eigen::MatrixXd& sigma,
                           std::uint64_t seed);
Eigen::MatrixXd sample_mvn(int n, const Eigen::MatrixXd& sigma,
                           std::mt19937_64& eng);

/// The signed stochastic terms evaluated row-wise; one column per term, in
/// the generator's formula order. Only the first five feature columns are
/// read.
Eigen::MatrixXd signal_terms(DgpId which, const Eigen::MatrixXd& features);

/// Noiseless response: c0 plus the scaled sum of the terms.
Eigen::VectorXd signal(const DgpConfig& config,
                       const Eigen::MatrixXd& features);

/// Features plus response with unit-variance Gaussian noise appended.
Dataset generate(const DgpConfig& config);

struct Calibration {
  DgpId which = DgpId::dgp1;
  std::int64_t mc_size = 0;
  std::uint64_t seed = 0;
  DgpConstants constants;
  std::array<double, 6> term_means{};  // diagnostics, index 1..m used
  std::array<double, 6> term_sds{};
};

/// Monte-Carlo estimate of the standardization constants: each scale is the
/// reciprocal of the term's sampled standard deviation, and the offset
/// cancels the scaled term means.
Calibration calibrate_constants(DgpId which, std::int64_t mc_size,
                                std::uint64_t seed, double rho = 0.1);

std::string calibration_to_json(const Calibration& cal);
Calibration calibration_from_json(const std::string& text);

/// Returns the cached calibration when the file matches (id, mc_size, seed);
/// otherwise recalibrates and rewrites the file. Unreadable JSON is an error
/// rather than a silent miss.
Calibration load_or_calibrate(DgpId which, std::int64_t mc_size,
                              std::uint64_t seed,
                              const std::filesystem::path& cache_file);

}  // namespace maclab

#endif  // MACLAB_DGP_HPP
