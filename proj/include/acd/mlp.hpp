#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace acd {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Head { kLinear, kSoftmax };

std::string to_string(Head head);

// Per-parameter partials, laid out exactly like Mlp::parameters().
struct GradientSet {
  std::vector<double> values;

  GradientSet& operator+=(const GradientSet& other);
  double norm() const;
};

class Mlp;

// Activations of one batched forward pass. Columns are samples.
struct ForwardCache {
  const Mlp* owner = nullptr;
  std::uint64_t revision = 0;
  std::vector<Eigen::MatrixXd> activations;  // input, then each hidden layer
  Eigen::MatrixXd logits;                    // last affine output
  Eigen::MatrixXd output;                    // logits, or softmax(logits)
};

// Fully connected tanh network. Parameters live in one flat vector: for each
// layer the row-major (out x in) weight matrix followed by the bias vector.
class Mlp {
 public:
  Mlp() = default;
  // All-zero parameters.
  Mlp(std::vector<std::size_t> dims, Head head);

  // Weights uniform in +-1/sqrt(fan_in), biases zero.
  static Mlp init(std::vector<std::size_t> dims, Head head, std::uint64_t seed);

  const std::vector<std::size_t>& dims() const { return dims_; }
  Head head() const { return head_; }
  std::size_t layer_count() const { return dims_.size() - 1; }
  std::size_t input_size() const { return dims_.front(); }
  std::size_t output_size() const { return dims_.back(); }

  std::span<const double> parameters() const { return params_; }
  // Mutable access invalidates outstanding forward caches.
  std::span<double> mutable_parameters() {
    ++revision_;
    return params_;
  }
  std::size_t parameter_count() const { return params_.size(); }
  void set_parameters(std::span<const double> values);

  Eigen::Map<const RowMatrix> weights(std::size_t layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs, ForwardCache* cache) const;

  // Gradient of a scalar loss given dLoss/d(output). For the softmax head
  // `grad_output` is taken w.r.t. the probabilities.
  GradientSet backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_output) const;
  // Same, with the gradient given w.r.t. the final affine output.
  GradientSet backward_logits(const ForwardCache& cache, const Eigen::MatrixXd& grad_logits) const;

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& doc);

  friend bool operator==(const Mlp& a, const Mlp& b) {
    return a.dims_ == b.dims_ && a.head_ == b.head_ && a.params_ == b.params_;
  }

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + dims_[layer + 1] * dims_[layer];
  }

  std::vector<std::size_t> dims_;
  Head head_ = Head::kLinear;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
  std::uint64_t revision_ = 0;
};

// Column-wise numerically stable softmax / log-softmax.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits);

enum class OptimizerKind { kSgd, kAdam };
enum class Direction { kAscend, kDescend };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& text);

// theta <- theta +/- alpha * g (plain SGD) or the bias-corrected adaptive
// moment step. Throws DivergenceError on a non-finite gradient.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, double learning_rate, std::size_t size, double beta1 = 0.9,
            double beta2 = 0.999, double epsilon = 1e-8);

  void apply(std::span<double> params, std::span<const double> grads, Direction direction);
  void apply(Mlp& net, const GradientSet& grads, Direction direction) {
    apply(net.mutable_parameters(), grads.values, direction);
  }

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return learning_rate_; }
  std::uint64_t steps() const { return steps_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

 private:
  OptimizerKind kind_ = OptimizerKind::kAdam;
  double learning_rate_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double epsilon_ = 1e-8;
  std::uint64_t steps_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// Rescales `grads` in place so its L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_gradient_norm(GradientSet& grads, double max_norm);

}  // namespace acd
