#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace untangle {

/// Fully connected network with tanh hidden layers and a linear output.
/// Batches are column-major: one sample per column.
class Mlp {
 public:
  Mlp() = default;
  /// `sizes` = {input, hidden..., output}. Weights are drawn from a scaled
  /// normal (variance 1 / fan_in); the output layer is scaled by `output_gain`.
  Mlp(std::vector<int> sizes, std::mt19937_64& rng, double output_gain = 1.0);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t parameter_count() const;

  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input plus each layer output
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;
  Eigen::VectorXd forward_one(const Eigen::VectorXd& x) const;

  /// Flat gradient of sum_ij grad_out(i, j) * out(i, j) with respect to the
  /// parameters, using the activations stored by forward().
  Eigen::VectorXd backward(const Cache& cache, const Eigen::MatrixXd& grad_out) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Adam on a flat parameter vector, with optional global-norm clipping.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double lr, double max_grad_norm = 0.0)
      : lr_(lr), max_norm_(max_grad_norm), m_(Eigen::VectorXd::Zero(n)),
        v_(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& params, Eigen::VectorXd grad);
  double learning_rate() const { return lr_; }
  long steps() const { return t_; }

  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }
  void restore(long t, Eigen::VectorXd m, Eigen::VectorXd v) {
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  double lr_ = 1e-4;
  double max_norm_ = 0.0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

}  // namespace untangle
