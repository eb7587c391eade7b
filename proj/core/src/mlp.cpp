#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "maclab/error.hpp"
#include "maclab/machine.hpp"

namespace maclab {
namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::tanh: return std::tanh(z);
    case Activation::linear: return z;
  }
  return z;
}

// Derivative in terms of pre-activation z and activation value a.
double activate_grad(Activation act, double z, double a) {
  switch (act) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return a * (1.0 - a);
    case Activation::tanh: return 1.0 - a * a;
    case Activation::linear: return 1.0;
  }
  return 1.0;
}

struct ForwardPass {
  std::vector<Eigen::MatrixXd> z;       // pre-activations per layer
  std::vector<Eigen::MatrixXd> act;     // activations before dropout
  std::vector<Eigen::MatrixXd> mask;    // 0 or 1/(1-p); empty when unused
  std::vector<Eigen::MatrixXd> inputs;  // layer inputs (post-dropout)
  Eigen::VectorXd prediction;
};

// Columns are samples. When `dropout_eng` is set, inverted dropout is applied
// after every layer except the last.
ForwardPass forward(const MlpState& state, const Eigen::MatrixXd& X,
                    double dropout, std::mt19937_64* dropout_eng) {
  const std::size_t layers = state.weights.size();
  ForwardPass fp;
  fp.z.resize(layers);
  fp.act.resize(layers);
  fp.mask.resize(layers);
  fp.inputs.resize(layers);

  Eigen::MatrixXd h = X.transpose();
  std::bernoulli_distribution keep(1.0 - dropout);
  for (std::size_t l = 0; l < layers; ++l) {
    fp.inputs[l] = h;
    Eigen::MatrixXd z = state.weights[l] * h;
    z.colwise() += state.biases[l];
    const Activation a = state.activations[l];
    fp.z[l] = z;
    fp.act[l] = z.unaryExpr([a](double v) { return activate(a, v); });
    h = fp.act[l];
    if (dropout_eng != nullptr && dropout > 0.0 && l + 1 < layers) {
      const double scale = 1.0 / (1.0 - dropout);
      Eigen::MatrixXd m(h.rows(), h.cols());
      for (Eigen::Index c = 0; c < h.cols(); ++c) {
        for (Eigen::Index r = 0; r < h.rows(); ++r) {
          m(r, c) = keep(*dropout_eng) ? scale : 0.0;
        }
      }
      h = h.cwiseProduct(m);
      fp.mask[l] = std::move(m);
    }
  }
  fp.prediction = h.row(0).transpose();
  return fp;
}

MlpGradient backward(const MlpState& state, const ForwardPass& fp,
                     const Eigen::VectorXd& y) {
  const std::size_t layers = state.weights.size();
  const auto n = static_cast<double>(y.size());
  MlpGradient grad;
  grad.weights.resize(layers);
  grad.biases.resize(layers);

  // d(mean squared loss)/d(prediction)
  Eigen::MatrixXd delta = (2.0 / n) * (fp.prediction - y).transpose();
  for (std::size_t li = layers; li-- > 0;) {
    if (fp.mask[li].size() > 0) delta = delta.cwiseProduct(fp.mask[li]);
    const Activation a = state.activations[li];
    Eigen::MatrixXd dz(delta.rows(), delta.cols());
    for (Eigen::Index c = 0; c < delta.cols(); ++c) {
      for (Eigen::Index r = 0; r < delta.rows(); ++r) {
        dz(r, c) =
            delta(r, c) * activate_grad(a, fp.z[li](r, c), fp.act[li](r, c));
      }
    }
    grad.weights[li] = dz * fp.inputs[li].transpose();
    grad.biases[li] = dz.rowwise().sum();
    if (li > 0) delta = state.weights[li].transpose() * dz;
  }
  return grad;
}

}  // namespace

MlpState mlp_initial_state(const MlpConfig& cfg, int input_width) {
  if (input_width < 1) {
    throw Error(ErrorCode::invalid_config, "mlp input width must be >= 1");
  }
  std::mt19937_64 eng(cfg.seed);
  MlpState state;
  int fan_in = input_width;
  for (std::size_t l = 0; l < cfg.widths.size(); ++l) {
    const int fan_out = cfg.widths[l];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = dist(eng);
      }
    }
    state.weights.push_back(std::move(w));
    state.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    state.activations.push_back(cfg.activations[l]);
    fan_in = fan_out;
  }
  return state;
}

double mlp_loss(const MlpState& state, const Eigen::MatrixXd& X,
                const Eigen::VectorXd& y) {
  ForwardPass fp = forward(state, X, 0.0, nullptr);
  return (fp.prediction - y).squaredNorm() / static_cast<double>(y.size());
}

MlpGradient mlp_gradient(const MlpState& state, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y) {
  ForwardPass fp = forward(state, X, 0.0, nullptr);
  return backward(state, fp, y);
}

FittedMachine fit_mlp(const Dataset& train, const MlpConfig& cfg) {
  train.validate();
  MlpState state = mlp_initial_state(cfg, static_cast<int>(train.width()));

  // Separate stream from the one used for initialization so adding epochs
  // does not perturb the starting point.
  std::mt19937_64 eng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<int> order(train.rows());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), eng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch)) {
      const auto size = std::min<std::size_t>(cfg.batch, order.size() - start);
      Eigen::MatrixXd xb(size, train.width());
      Eigen::VectorXd yb(size);
      for (std::size_t i = 0; i < size; ++i) {
        xb.row(i) = train.features.row(order[start + i]);
        yb(i) = train.target(order[start + i]);
      }

      ForwardPass fp = forward(state, xb, cfg.dropout,
                               cfg.dropout > 0.0 ? &eng : nullptr);
      const double batch_loss =
          (fp.prediction - yb).squaredNorm() / static_cast<double>(size);
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorCode::training_diverged,
                    "mlp loss became non-finite at epoch " +
                        std::to_string(epoch));
      }
      MlpGradient grad = backward(state, fp, yb);
      for (std::size_t l = 0; l < state.weights.size(); ++l) {
        state.weights[l] -= cfg.learning_rate * grad.weights[l];
        state.biases[l] -= cfg.learning_rate * grad.biases[l];
      }
    }
  }
  return FittedMachine(MachineKind::mlp, cfg, std::move(state),
                       static_cast<int>(train.width()));
}

}  // namespace maclab
