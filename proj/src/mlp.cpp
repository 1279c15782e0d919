#include "acd/mlp.hpp"

#include <cmath>
#include <numeric>

#include "acd/errors.hpp"
#include "acd/rng.hpp"

namespace acd {

std::string to_string(Head head) { return head == Head::kSoftmax ? "softmax" : "linear"; }

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  if (values.size() != other.values.size()) throw PreconditionError("gradient shapes differ");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

double GradientSet::norm() const {
  double s = 0.0;
  for (double g : values) s += g * g;
  return std::sqrt(s);
}

Mlp::Mlp(std::vector<std::size_t> dims, Head head) : dims_(std::move(dims)), head_(head) {
  if (dims_.size() < 2) throw PreconditionError("an MLP needs at least an input and an output layer");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    if (dims_[l] == 0 || dims_[l + 1] == 0) throw PreconditionError("zero-width layer");
    offsets_.push_back(total);
    total += dims_[l + 1] * dims_[l] + dims_[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::init(std::vector<std::size_t> dims, Head head, std::uint64_t seed) {
  Mlp net(std::move(dims), head);
  Rng rng(seed);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.dims_[l]));
    const std::size_t n = net.dims_[l + 1] * net.dims_[l];
    for (std::size_t i = 0; i < n; ++i) net.params_[net.weight_offset(l) + i] = rng.uniform(-bound, bound);
  }
  return net;
}

void Mlp::set_parameters(std::span<const double> values) {
  if (values.size() != params_.size()) throw PreconditionError("parameter count mismatch");
  std::copy(values.begin(), values.end(), params_.begin());
  ++revision_;
}

Eigen::Map<const RowMatrix> Mlp::weights(std::size_t layer) const {
  return {params_.data() + weight_offset(layer), static_cast<Eigen::Index>(dims_[layer + 1]),
          static_cast<Eigen::Index>(dims_[layer])};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t layer) const {
  return {params_.data() + bias_offset(layer), static_cast<Eigen::Index>(dims_[layer + 1])};
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    out.col(c) = (logits.col(c).array() - m).exp().matrix();
    out.col(c) /= out.col(c).sum();
  }
  return out;
}

Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    const double lse = m + std::log((logits.col(c).array() - m).exp().sum());
    out.col(c) = logits.col(c).array() - lse;
  }
  return out;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& input) const {
  if (static_cast<std::size_t>(input.size()) != input_size()) {
    throw PreconditionError("input has " + std::to_string(input.size()) + " entries, expected " +
                            std::to_string(input_size()));
  }
  Eigen::VectorXd a = input;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Eigen::VectorXd z = weights(l) * a + bias(l);
    a = (l + 1 < layer_count()) ? Eigen::VectorXd(z.array().tanh()) : z;
  }
  if (head_ == Head::kSoftmax) return softmax(a);
  return a;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs, ForwardCache* cache) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_size()) {
    throw PreconditionError("input has " + std::to_string(inputs.rows()) + " rows, expected " +
                            std::to_string(input_size()));
  }
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layer_count());
  acts.push_back(inputs);
  Eigen::MatrixXd z;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    z.noalias() = weights(l) * acts.back();
    z.colwise() += bias(l);
    if (l + 1 < layer_count()) acts.emplace_back(z.array().tanh());
  }
  Eigen::MatrixXd out = head_ == Head::kSoftmax ? softmax(z) : z;
  if (cache) {
    cache->owner = this;
    cache->revision = revision_;
    cache->activations = std::move(acts);
    cache->logits = std::move(z);
    cache->output = out;
  }
  return out;
}

GradientSet Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_output) const {
  if (head_ == Head::kLinear) return backward_logits(cache, grad_output);
  // d/dz of softmax: p * (g - <g, p>) per column.
  const Eigen::MatrixXd& p = cache.output;
  if (grad_output.rows() != p.rows() || grad_output.cols() != p.cols()) {
    throw PreconditionError("output gradient shape mismatch");
  }
  Eigen::RowVectorXd dot = (grad_output.array() * p.array()).colwise().sum();
  Eigen::MatrixXd g = p.array() * (grad_output.rowwise() - dot).array();
  return backward_logits(cache, g);
}

GradientSet Mlp::backward_logits(const ForwardCache& cache, const Eigen::MatrixXd& grad_logits) const {
  if (cache.owner != this || cache.revision != revision_) {
    throw PreconditionError("stale forward cache: parameters changed since forward()");
  }
  if (static_cast<std::size_t>(grad_logits.rows()) != output_size() ||
      grad_logits.cols() != cache.logits.cols()) {
    throw PreconditionError("output gradient shape mismatch");
  }
  GradientSet grads{std::vector<double>(params_.size(), 0.0)};
  Eigen::MatrixXd delta = grad_logits;
  for (std::size_t l = layer_count(); l-- > 0;) {
    const Eigen::MatrixXd& a_prev = cache.activations[l];
    Eigen::Map<RowMatrix> dw(grads.values.data() + weight_offset(l),
                             static_cast<Eigen::Index>(dims_[l + 1]), static_cast<Eigen::Index>(dims_[l]));
    Eigen::Map<Eigen::VectorXd> db(grads.values.data() + bias_offset(l), static_cast<Eigen::Index>(dims_[l + 1]));
    dw.noalias() = delta * a_prev.transpose();
    db = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = weights(l).transpose() * delta;
      delta = back.array() * (1.0 - a_prev.array().square());
    }
  }
  return grads;
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json doc;
  doc["version"] = "1";
  doc["layer_dims"] = dims_;
  doc["head"] = to_string(head_);
  doc["layers"] = nlohmann::json::array();
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const auto w0 = params_.begin() + static_cast<std::ptrdiff_t>(weight_offset(l));
    const auto b0 = params_.begin() + static_cast<std::ptrdiff_t>(bias_offset(l));
    doc["layers"].push_back({{"weights", std::vector<double>(w0, b0)},
                             {"biases", std::vector<double>(b0, b0 + static_cast<std::ptrdiff_t>(dims_[l + 1]))}});
  }
  return doc;
}

Mlp Mlp::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<std::string>() != "1") throw ConfigError("checkpoint: unsupported network version");
    const std::string head = doc.at("head").get<std::string>();
    if (head != "linear" && head != "softmax") throw ConfigError("checkpoint: unknown head '" + head + "'");
    Mlp net(doc.at("layer_dims").get<std::vector<std::size_t>>(), head == "softmax" ? Head::kSoftmax : Head::kLinear);
    const auto& layers = doc.at("layers");
    if (layers.size() != net.layer_count()) throw ConfigError("checkpoint: layer count mismatch");
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      auto w = layers[l].at("weights").get<std::vector<double>>();
      auto b = layers[l].at("biases").get<std::vector<double>>();
      if (w.size() != net.dims_[l + 1] * net.dims_[l] || b.size() != net.dims_[l + 1]) {
        throw ConfigError("checkpoint: layer " + std::to_string(l) + " has the wrong number of parameters");
      }
      std::copy(w.begin(), w.end(), net.params_.begin() + static_cast<std::ptrdiff_t>(net.weight_offset(l)));
      std::copy(b.begin(), b.end(), net.params_.begin() + static_cast<std::ptrdiff_t>(net.bias_offset(l)));
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer_kind(const std::string& text) {
  if (text == "sgd") return OptimizerKind::kSgd;
  if (text == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + text + "'");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, std::size_t size, double beta1, double beta2,
                     double epsilon)
    : kind_(kind), learning_rate_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (kind_ == OptimizerKind::kAdam) {
    m_.assign(size, 0.0);
    v_.assign(size, 0.0);
  }
}

void Optimizer::apply(std::span<double> params, std::span<const double> grads, Direction direction) {
  if (params.size() != grads.size()) throw PreconditionError("gradient and parameter shapes differ");
  for (double g : grads) {
    if (!std::isfinite(g)) throw DivergenceError("non-finite gradient");
  }
  const double sign = direction == Direction::kAscend ? 1.0 : -1.0;
  ++steps_;
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] += sign * learning_rate_ * grads[i];
    return;
  }
  if (m_.size() != params.size()) throw PreconditionError("optimizer was built for a different parameter count");
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(beta1_, t);
  const double c2 = 1.0 - std::pow(beta2_, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    params[i] += sign * learning_rate_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + epsilon_);
  }
}

double clip_gradient_norm(GradientSet& grads, double max_norm) {
  const double n = grads.norm();
  if (std::isfinite(n) && n > max_norm && n > 0.0) {
    const double scale = max_norm / n;
    for (double& g : grads.values) g *= scale;
  }
  return n;
}

}  // namespace acd
