#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "maclab/dgp.hpp"
#include "maclab/error.hpp"

using namespace maclab;

namespace {

DgpConfig calibrated_config(DgpId which, int n, std::uint64_t seed) {
  static Calibration cal1 = calibrate_constants(DgpId::dgp1, 1000000, 424242);
  static Calibration cal2 = calibrate_constants(DgpId::dgp2, 1000000, 424242);
  DgpConfig cfg;
  cfg.which = which;
  cfg.n = n;
  cfg.seed = seed;
  cfg.constants = (which == DgpId::dgp1 ? cal1 : cal2).constants;
  return cfg;
}

}  // namespace

TEST_SUITE("dgp") {

TEST_CASE("covariance entries decay geometrically") {
  Eigen::MatrixXd sigma = covariance_matrix(0.1);
  CHECK(sigma(0, 0) == 1.0);
  CHECK(sigma(0, 1) == doctest::Approx(0.1));
  CHECK(sigma(0, 2) == doctest::Approx(0.01));
  CHECK(sigma(9, 9) == 1.0);
  CHECK((sigma - sigma.transpose()).isZero(0.0));
  CHECK_THROWS_AS(covariance_matrix(1.0), Error);
  CHECK_THROWS_AS(covariance_matrix(-1.5), Error);
}

TEST_CASE("identity covariance passes the raw normal draws through") {
  const Eigen::MatrixXd x = sample_mvn(50, Eigen::MatrixXd::Identity(10, 10), 99);

  // The factor of the identity is the identity, so the output must be the
  // row-major stream of standard normals drawn from the same seed.
  std::mt19937_64 eng(99);
  std::normal_distribution<double> dist;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 10; ++j) {
      CHECK(x(i, j) == dist(eng));
    }
  }
}

TEST_CASE("multivariate sampling is deterministic per seed") {
  Eigen::MatrixXd sigma = covariance_matrix(0.1);
  CHECK(sample_mvn(20, sigma, 7) == sample_mvn(20, sigma, 7));
  CHECK(sample_mvn(20, sigma, 7) != sample_mvn(20, sigma, 8));
}

TEST_CASE("non positive definite covariance is rejected") {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(10, 10);
  bad(0, 1) = bad(1, 0) = 2.0;
  CHECK_THROWS_WITH_AS(sample_mvn(5, bad, 1),
                       doctest::Contains("factorization-failed"), Error);
}

TEST_CASE("sample covariance approaches the target") {
  Eigen::MatrixXd sigma = covariance_matrix(0.1);
  Eigen::MatrixXd x = sample_mvn(1000000, sigma, 2024);
  Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / (x.rows() - 1.0);
  CHECK((cov - sigma).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("calibration matches the analytic indicator constants") {
  Calibration cal = calibrate_constants(DgpId::dgp1, 1000000, 31337);
  for (int j = 1; j <= 4; ++j) CHECK(cal.constants.c[j] > 0.0);

  // I(x4 > 0) is Bernoulli(1/2): sd 1/2, constant 2.
  CHECK(std::abs(cal.constants.c[2] / 2.0 - 1.0) < 0.01);

  // I(x5 > 1) is Bernoulli(p) with p the upper-tail mass beyond one
  // standard deviation.
  const double p = 0.5 * std::erfc(1.0 / std::sqrt(2.0));
  const double c3 = 1.0 / std::sqrt(p * (1.0 - p));
  CHECK(std::abs(cal.constants.c[3] / c3 - 1.0) < 0.01);
  CHECK(cal.constants.c[3] == doctest::Approx(2.737).epsilon(0.01));

  // I(x1 x2 > 0): the features are nearly independent at rho = 0.1, so the
  // probability sits a little above one half.
  CHECK(cal.term_means[4] == doctest::Approx(0.53).epsilon(0.05));
}

TEST_CASE("cube-term calibration agrees across independent seeds") {
  Calibration a = calibrate_constants(DgpId::dgp1, 1000000, 1);
  Calibration b = calibrate_constants(DgpId::dgp1, 1000000, 2);
  CHECK(std::abs(a.constants.c[1] / b.constants.c[1] - 1.0) < 0.01);
}

TEST_CASE("calibrated terms have unit sample variance on fresh draws") {
  const Calibration cal = calibrate_constants(DgpId::dgp1, 1000000, 31337);
  const Eigen::MatrixXd x = sample_mvn(1000000, covariance_matrix(0.1), 555);
  const Eigen::MatrixXd terms = signal_terms(DgpId::dgp1, x);
  for (int j = 0; j < 4; ++j) {
    const Eigen::VectorXd scaled = cal.constants.c[j + 1] * terms.col(j);
    const double mean = scaled.mean();
    const double var = (scaled.array() - mean).square().mean();
    CHECK(std::abs(var - 1.0) < 0.05);
  }
}

TEST_CASE("generation is bit-reproducible and the noise has unit variance") {
  DgpConfig cfg = calibrated_config(DgpId::dgp1, 100000, 12);
  Dataset a = generate(cfg);
  Dataset b = generate(cfg);
  CHECK(a.features == b.features);
  CHECK(a.target == b.target);
  CHECK(a.feature_names.size() == 10);
  CHECK(a.feature_names[0] == "x1");
  CHECK(a.feature_names[9] == "x10");

  DgpConfig quiet = cfg;
  quiet.add_noise = false;
  Dataset c = generate(quiet);
  CHECK(a.features == c.features);
  Eigen::VectorXd eps = a.target - c.target;
  CHECK(std::abs(eps.mean()) < 0.02);
  const double var = (eps.array() - eps.mean()).square().mean();
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("the noiseless signal is centered near zero") {
  for (DgpId which : {DgpId::dgp1, DgpId::dgp2}) {
    DgpConfig cfg = calibrated_config(which, 1000000, 77);
    cfg.add_noise = false;
    Dataset d = generate(cfg);
    CHECK(std::abs(d.target.mean()) < 0.05);
  }
}

TEST_CASE("features beyond the fifth never enter the signal") {
  DgpConfig cfg = calibrated_config(DgpId::dgp2, 500, 31);
  Eigen::MatrixXd x = sample_mvn(500, covariance_matrix(0.1), 32);
  Eigen::VectorXd y = signal(cfg, x);

  Eigen::MatrixXd scrambled = x;
  std::mt19937_64 eng(5);
  std::normal_distribution<double> dist(3.0, 9.0);
  for (int j = 5; j < 10; ++j) {
    for (int i = 0; i < 500; ++i) scrambled(i, j) = dist(eng);
  }
  CHECK(signal(cfg, scrambled) == y);
}

TEST_CASE("null signal hook leaves only the offset") {
  DgpConfig cfg;
  cfg.which = DgpId::dgp1;
  cfg.n = 25;
  cfg.seed = 3;
  cfg.constants.c = {7.5, 0.0, 0.0, 0.0, 0.0, 0.0};
  cfg.add_noise = false;
  Dataset d = generate(cfg);
  CHECK((d.target.array() == 7.5).all());
}

TEST_CASE("the second generator's negative term carries its sign") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 10);
  x(0, 0) = 0.5;   // x1 < 1 and > 0
  x(0, 1) = 2.0;   // x2
  x(1, 0) = 2.0;   // x1 >= 1: term inactive
  x(1, 1) = 2.0;
  Eigen::MatrixXd terms = signal_terms(DgpId::dgp2, x);
  CHECK(terms(0, 2) == -2.0);
  CHECK(terms(1, 2) == 0.0);
  // And the exponential term follows x2 when x1 > 0.
  CHECK(terms(0, 3) == doctest::Approx(9.0));
  CHECK(terms(1, 3) == doctest::Approx(9.0));
}

TEST_CASE("config validation") {
  DgpConfig cfg;
  cfg.constants.c = {0.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  CHECK_NOTHROW(cfg.validate());
  cfg.n = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.n = 10;
  cfg.rho = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.rho = 0.1;
  cfg.constants.c[2] = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.constants.c[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK_THROWS_AS(calibrate_constants(DgpId::dgp1, 999999, 1), Error);
}

TEST_CASE("calibration cache round trip and staleness") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "maclab_dgp_test";
  fs::remove_all(dir);
  const fs::path file = dir / "calibration.json";

  Calibration cal = calibrate_constants(DgpId::dgp1, 1000000, 8);
  Calibration back = calibration_from_json(calibration_to_json(cal));
  CHECK(back.which == cal.which);
  CHECK(back.mc_size == cal.mc_size);
  CHECK(back.seed == cal.seed);
  CHECK(back.constants.c == cal.constants.c);
  CHECK(back.term_sds == cal.term_sds);

  // Seed the cache with a matching key but doctored constants: a hit must
  // return the cached values untouched, proving nothing was recomputed.
  Calibration doctored = cal;
  doctored.constants.c[1] = 123.456;
  fs::create_directories(dir);
  std::ofstream(file) << calibration_to_json(doctored);
  Calibration hit = load_or_calibrate(DgpId::dgp1, 1000000, 8, file);
  CHECK(hit.constants.c[1] == 123.456);

  // A different key is a miss: recalibrated and rewritten.
  Calibration miss = load_or_calibrate(DgpId::dgp1, 1000000, 9, file);
  CHECK(miss.seed == 9);
  CHECK(miss.constants.c[1] != 123.456);
  Calibration reread = load_or_calibrate(DgpId::dgp1, 1000000, 9, file);
  CHECK(reread.constants.c == miss.constants.c);

  std::ofstream(file, std::ios::trunc) << "{not json";
  CHECK_THROWS_WITH_AS(load_or_calibrate(DgpId::dgp1, 1000000, 9, file),
                       doctest::Contains("corrupt-cache"), Error);
  fs::remove_all(dir);
}

}  // TEST_SUITE
