#include "maclab/dgp.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "maclab/error.hpp"

namespace maclab {

const char* to_string(DgpId id) {
  return id == DgpId::dgp1 ? "dgp1" : "dgp2";
}

DgpId dgp_from_int(int v) {
  if (v == 1) return DgpId::dgp1;
  if (v == 2) return DgpId::dgp2;
  throw Error(ErrorCode::invalid_config,
              "generator id must be 1 or 2, got " + std::to_string(v));
}

int term_count(DgpId which) { return which == DgpId::dgp1 ? 4 : 5; }

void DgpConfig::validate() const {
  if (n < 1) {
    throw Error(ErrorCode::invalid_config, "sample size must be >= 1");
  }
  if (!(std::abs(rho) < 1.0)) {
    throw Error(ErrorCode::invalid_config,
                "correlation base must satisfy |rho| < 1");
  }
  for (int j = 0; j <= term_count(which); ++j) {
    if (!std::isfinite(constants.c[j])) {
      throw Error(ErrorCode::invalid_config,
                  "constant c" + std::to_string(j) + " is not finite");
    }
    if (j > 0 && constants.c[j] < 0.0) {
      throw Error(ErrorCode::invalid_config,
                  "scale constant c" + std::to_string(j) + " is negative");
    }
  }
}

Eigen::MatrixXd covariance_matrix(double rho) {
  if (!(std::abs(rho) < 1.0)) {
    throw Error(ErrorCode::invalid_config,
                "correlation base must satisfy |rho| < 1");
  }
  Eigen::MatrixXd sigma(10, 10);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      sigma(i, j) = std::pow(rho, std::abs(i - j));
    }
  }
  return sigma;
}

Eigen::MatrixXd sample_mvn(int n, const Eigen::MatrixXd& sigma,
                           std::mt19937_64& eng) {
  if (n < 1 || sigma.rows() != sigma.cols() || sigma.rows() < 1) {
    throw Error(ErrorCode::invalid_input, "bad multivariate normal request");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::factorization_failed,
                "covariance is not positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();

  std::normal_distribution<double> dist;
  const auto d = sigma.rows();
  Eigen::MatrixXd out(n, d);
  Eigen::VectorXd z(d);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) = dist(eng);
    out.row(i) = (L * z).transpose();
  }
  return out;
}

Eigen::MatrixXd sample_mvn(int n, const Eigen::MatrixXd& sigma,
                           std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  return sample_mvn(n, sigma, eng);
}

Eigen::MatrixXd signal_terms(DgpId which, const Eigen::MatrixXd& features) {
  if (features.cols() < 5) {
    throw Error(ErrorCode::invalid_input,
                "signal terms need at least five feature columns");
  }
  const auto n = features.rows();
  Eigen::MatrixXd terms(n, term_count(which));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x1 = features(i, 0), x2 = features(i, 1),
                 x3 = features(i, 2), x4 = features(i, 3),
                 x5 = features(i, 4);
    const double lin = x1 + x2 + 0.5 * x3 + 0.3 * x4 + 0.2 * x5;
    const double cube = lin * lin * lin;
    if (which == DgpId::dgp1) {
      terms(i, 0) = cube;
      terms(i, 1) = x4 > 0.0 ? 1.0 : 0.0;
      terms(i, 2) = x5 > 1.0 ? 1.0 : 0.0;
      terms(i, 3) = x1 * x2 > 0.0 ? 1.0 : 0.0;
    } else {
      terms(i, 0) = cube;
      terms(i, 1) = x1 > 0.0 ? x2 : 0.0;
      terms(i, 2) = x1 < 1.0 ? -x2 : 0.0;  // enters the response negatively
      terms(i, 3) = x1 > 0.0 ? std::pow(3.0, x2) : 0.0;
      terms(i, 4) = x3 * x4 > 0.0 ? std::sin(x5) : 0.0;
    }
  }
  return terms;
}

Eigen::VectorXd signal(const DgpConfig& config,
                       const Eigen::MatrixXd& features) {
  config.validate();
  const Eigen::MatrixXd terms = signal_terms(config.which, features);
  Eigen::VectorXd y =
      Eigen::VectorXd::Constant(features.rows(), config.constants.c[0]);
  for (int j = 0; j < terms.cols(); ++j) {
    y += config.constants.c[j + 1] * terms.col(j);
  }
  return y;
}

Dataset generate(const DgpConfig& config) {
  config.validate();
  std::mt19937_64 eng(config.seed);
  Dataset d;
  d.features = sample_mvn(config.n, covariance_matrix(config.rho), eng);
  d.target = signal(config, d.features);
  if (config.add_noise) {
    std::normal_distribution<double> dist;
    for (int i = 0; i < config.n; ++i) d.target(i) += dist(eng);
  }
  for (int j = 1; j <= 10; ++j) {
    d.feature_names.push_back("x" + std::to_string(j));
  }
  return d;
}

Calibration calibrate_constants(DgpId which, std::int64_t mc_size,
                                std::uint64_t seed, double rho) {
  if (mc_size < 1000000) {
    throw Error(ErrorCode::invalid_config,
                "calibration needs at least 1e6 draws");
  }
  const Eigen::MatrixXd sigma = covariance_matrix(rho);
  const int m = term_count(which);

  std::mt19937_64 eng(seed);
  std::array<double, 6> sum{}, sumsq{};
  std::int64_t remaining = mc_size;
  const int block = 1 << 16;
  while (remaining > 0) {
    const int take = static_cast<int>(std::min<std::int64_t>(block, remaining));
    const Eigen::MatrixXd x = sample_mvn(take, sigma, eng);
    const Eigen::MatrixXd terms = signal_terms(which, x);
    for (int j = 0; j < m; ++j) {
      sum[j + 1] += terms.col(j).sum();
      sumsq[j + 1] += terms.col(j).squaredNorm();
    }
    remaining -= take;
  }

  Calibration cal;
  cal.which = which;
  cal.mc_size = mc_size;
  cal.seed = seed;
  const auto N = static_cast<double>(mc_size);
  double offset = 0.0;
  for (int j = 1; j <= m; ++j) {
    const double mean = sum[j] / N;
    const double var = sumsq[j] / N - mean * mean;
    if (!(var > 1e-12)) {
      throw Error(ErrorCode::calibration_failed,
                  "term " + std::to_string(j) + " variance is degenerate");
    }
    const double sd = std::sqrt(var);
    cal.term_means[j] = mean;
    cal.term_sds[j] = sd;
    cal.constants.c[j] = 1.0 / sd;
    offset -= mean / sd;
  }
  cal.constants.c[0] = offset;
  return cal;
}

std::string calibration_to_json(const Calibration& cal) {
  nlohmann::json j;
  j["version"] = 1;
  j["dgp"] = static_cast<int>(cal.which);
  j["mc_size"] = cal.mc_size;
  j["seed"] = cal.seed;
  j["c"] = cal.constants.c;
  j["term_means"] = cal.term_means;
  j["term_sds"] = cal.term_sds;
  return j.dump(2);
}

Calibration calibration_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::corrupt_cache,
                std::string("calibration cache is not valid JSON: ") +
                    e.what());
  }
  try {
    Calibration cal;
    cal.which = dgp_from_int(j.at("dgp").get<int>());
    cal.mc_size = j.at("mc_size").get<std::int64_t>();
    cal.seed = j.at("seed").get<std::uint64_t>();
    cal.constants.c = j.at("c").get<std::array<double, 6>>();
    cal.term_means = j.at("term_means").get<std::array<double, 6>>();
    cal.term_sds = j.at("term_sds").get<std::array<double, 6>>();
    return cal;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::corrupt_cache,
                std::string("calibration cache is missing fields: ") +
                    e.what());
  }
}

Calibration load_or_calibrate(DgpId which, std::int64_t mc_size,
                              std::uint64_t seed,
                              const std::filesystem::path& cache_file) {
  if (std::filesystem::exists(cache_file)) {
    std::ifstream in(cache_file);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) {
      throw Error(ErrorCode::io_error,
                  "could not read " + cache_file.string());
    }
    Calibration cal = calibration_from_json(text);
    if (cal.which == which && cal.mc_size == mc_size && cal.seed == seed) {
      return cal;
    }
    // Key mismatch is a stale cache, not corruption; fall through and redo.
  }
  Calibration cal = calibrate_constants(which, mc_size, seed);
  if (!cache_file.parent_path().empty()) {
    std::filesystem::create_directories(cache_file.parent_path());
  }
  std::ofstream out(cache_file, std::ios::trunc);
  out << calibration_to_json(cal) << '\n';
  if (!out.good()) {
    throw Error(ErrorCode::io_error, "could not write " + cache_file.string());
  }
  return cal;
}

}  // namespace maclab
