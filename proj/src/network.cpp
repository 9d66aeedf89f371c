#include "untangle/network.hpp"

#include <cmath>
#include <stdexcept>

namespace untangle {

Mlp::Mlp(std::vector<int> sizes, std::mt19937_64& rng, double output_gain)
    : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("mlp needs input and output sizes");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int fan_in = sizes_[l];
    const int fan_out = sizes_[l + 1];
    const bool last = l + 2 == sizes_.size();
    const double scale = (last ? output_gain : 1.0) / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = scale * normal(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(fan_out));
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

Eigen::VectorXd Mlp::parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.segment(k, weights_[l].size()) =
        Eigen::Map<const Eigen::VectorXd>(weights_[l].data(), weights_[l].size());
    k += weights_[l].size();
    flat.segment(k, biases_[l].size()) = biases_[l];
    k += biases_[l].size();
  }
  return flat;
}

void Mlp::set_parameters(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
    throw std::invalid_argument("parameter vector size mismatch");
  }
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::Map<Eigen::VectorXd>(weights_[l].data(), weights_[l].size()) =
        flat.segment(k, weights_[l].size());
    k += weights_[l].size();
    biases_[l] = flat.segment(k, biases_[l].size());
    k += biases_[l].size();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  if (x.rows() != input_size()) throw std::invalid_argument("mlp input size mismatch");
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(x);
  }
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    if (l + 1 < weights_.size()) z = z.array().tanh().matrix();
    a = std::move(z);
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

Eigen::VectorXd Mlp::forward_one(const Eigen::VectorXd& x) const {
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * a + biases_[l];
    if (l + 1 < weights_.size()) z = z.array().tanh().matrix();
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_out) const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  std::vector<Eigen::MatrixXd> gw(weights_.size());
  std::vector<Eigen::VectorXd> gb(weights_.size());

  Eigen::MatrixXd delta = grad_out;  // d/d(pre-activation) of the current layer
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const Eigen::MatrixXd& input = cache.activations[l];
    gw[l] = delta * input.transpose();
    gb[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = weights_[l].transpose() * delta;
      // tanh' = 1 - tanh^2, with tanh values cached as this layer's input.
      delta = back.array() * (1.0 - input.array().square());
    }
  }
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.segment(k, gw[l].size()) = Eigen::Map<const Eigen::VectorXd>(gw[l].data(), gw[l].size());
    k += gw[l].size();
    flat.segment(k, gb[l].size()) = gb[l];
    k += gb[l].size();
  }
  return flat;
}

void Adam::step(Eigen::VectorXd& params, Eigen::VectorXd grad) {
  if (max_norm_ > 0.0) {
    const double n = grad.norm();
    if (n > max_norm_) grad *= max_norm_ / n;
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

}  // namespace untangle
