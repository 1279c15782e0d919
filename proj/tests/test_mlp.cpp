#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "acd/errors.hpp"
#include "acd/mlp.hpp"
#include "acd/rng.hpp"
#include "oracles/nn_oracle.hpp"

using namespace acd;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd random_input(std::size_t n, Rng& rng) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
  return x;
}

// Sum over samples of w . output, a generic scalar loss with a known output
// gradient.
double weighted_sum(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& w) {
  return (net.forward(x, nullptr).array() * w.array()).sum();
}

double max_gradient_error(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                          const std::vector<std::size_t>& indices) {
  ForwardCache cache;
  net.forward(x, &cache);
  const auto grad = net.backward(cache, w);
  double worst = 0.0;
  for (auto i : indices) {
    const double fd = oracle::central_difference(net, i, [&](const Mlp& m) { return weighted_sum(m, x, w); });
    worst = std::max(worst, oracle::relative_error(grad.values[i], fd));
  }
  return worst;
}

std::vector<std::size_t> all_indices(const Mlp& net) {
  std::vector<std::size_t> out(net.parameter_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

}  // namespace

TEST_CASE("init") {
  const auto a = Mlp::init({17, 256, 256, 23}, Head::kLinear, 5);
  const auto b = Mlp::init({17, 256, 256, 23}, Head::kLinear, 5);
  CHECK(a == b);
  CHECK(a.parameter_count() == 17 * 256 + 256 + 256 * 256 + 256 + 256 * 23 + 23);
  CHECK_FALSE(a == Mlp::init({17, 256, 256, 23}, Head::kLinear, 6));
  for (std::size_t l = 0; l < a.layer_count(); ++l) {
    CHECK(a.bias(l).isZero());
    const double bound = 1.0 / std::sqrt(static_cast<double>(a.dims()[l]));
    CHECK(a.weights(l).cwiseAbs().maxCoeff() <= bound);
  }
  CHECK_THROWS_AS(Mlp({4}, Head::kLinear), PreconditionError);
}

TEST_CASE("forward basics") {
  const Mlp zero({5, 4, 3}, Head::kLinear);
  CHECK(zero.forward(Eigen::VectorXd::Zero(5)).isZero());

  const auto policy = Mlp::init({17, 32, 23}, Head::kSoftmax, 9);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto p = policy.forward(random_input(17, rng));
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    CHECK(p.minCoeff() > 0.0);
  }
  CHECK_THROWS_AS(policy.forward(Eigen::VectorXd::Zero(3)), PreconditionError);
}

TEST_CASE("forward matches the naive reference") {
  Rng rng(11);
  for (bool softmax : {false, true}) {
    const std::vector<std::size_t> dims{17, 64, 64, 23};
    const auto net = Mlp::init(dims, softmax ? Head::kSoftmax : Head::kLinear, 21);
    for (std::size_t s = 0; s < 17; ++s) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(17);
      x[static_cast<Eigen::Index>(s)] = 1.0;
      const auto fast = to_std(net.forward(x));
      const auto slow = oracle::naive_forward(dims, {net.parameters().begin(), net.parameters().end()}, softmax,
                                              to_std(x));
      for (std::size_t k = 0; k < fast.size(); ++k) CHECK(std::abs(fast[k] - slow[k]) < 1e-12);
    }
  }
}

TEST_CASE("batched forward equals per-column forward") {
  const auto net = Mlp::init({6, 8, 4}, Head::kSoftmax, 2);
  Rng rng(4);
  Eigen::MatrixXd x(6, 5);
  for (int c = 0; c < 5; ++c) x.col(c) = random_input(6, rng);
  const auto batch = net.forward(x, nullptr);
  for (int c = 0; c < 5; ++c) CHECK((batch.col(c) - net.forward(Eigen::VectorXd(x.col(c)))).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("softmax helpers") {
  Eigen::MatrixXd logits(3, 2);
  logits << 1000.0, 0.0, 1000.0, 0.0, 999.0, 0.0;
  const auto p = softmax(logits);
  CHECK(p.allFinite());
  CHECK(std::abs(p.col(0).sum() - 1.0) < 1e-15);
  CHECK(std::abs(p(0, 1) - 1.0 / 3.0) < 1e-15);
  const auto lp = log_softmax(logits);
  CHECK((lp.array().exp() - p.array()).abs().maxCoeff() < 1e-13);
}

TEST_CASE("gradients match finite differences on small nets") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const auto lin = Mlp::init({3, 3, 2}, Head::kLinear, seed);
    Eigen::MatrixXd x(3, 2), w(2, 2);
    for (int c = 0; c < 2; ++c) x.col(c) = random_input(3, rng);
    for (int c = 0; c < 2; ++c) w.col(c) = random_input(2, rng);
    CHECK(max_gradient_error(lin, x, w, all_indices(lin)) < 1e-4);

    const auto soft = Mlp::init({5, 4, 3}, Head::kSoftmax, seed + 100);
    Eigen::MatrixXd xs(5, 3), ws(3, 3);
    for (int c = 0; c < 3; ++c) xs.col(c) = random_input(5, rng);
    for (int c = 0; c < 3; ++c) ws.col(c) = random_input(3, rng);
    CHECK(max_gradient_error(soft, xs, ws, all_indices(soft)) < 1e-4);
  }
}

TEST_CASE("logit-space backward agrees with probability-space backward") {
  const auto net = Mlp::init({5, 4, 3}, Head::kSoftmax, 8);
  Rng rng(8);
  Eigen::MatrixXd x(5, 2), w(3, 2);
  for (int c = 0; c < 2; ++c) x.col(c) = random_input(5, rng);
  for (int c = 0; c < 2; ++c) w.col(c) = random_input(3, rng);
  ForwardCache cache;
  const auto p = net.forward(x, &cache);
  // d/dz of sum w.p = p * (w - sum(w * p)).
  Eigen::MatrixXd gz(3, 2);
  for (int c = 0; c < 2; ++c) {
    const double dot = w.col(c).dot(p.col(c));
    gz.col(c) = p.col(c).array() * (w.col(c).array() - dot);
  }
  const auto a = net.backward(cache, w);
  const auto b = net.backward_logits(cache, gz);
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-12);
}

TEST_CASE("stale cache is rejected") {
  auto net = Mlp::init({3, 3, 2}, Head::kLinear, 1);
  ForwardCache cache;
  net.forward(Eigen::MatrixXd::Ones(3, 1), &cache);
  net.mutable_parameters()[0] += 1.0;
  CHECK_THROWS_AS(net.backward(cache, Eigen::MatrixXd::Ones(2, 1)), PreconditionError);
}

TEST_CASE("network json round-trip") {
  const auto net = Mlp::init({4, 6, 3}, Head::kSoftmax, 12);
  const auto back = Mlp::from_json(net.to_json());
  CHECK(back == net);
  auto doc = net.to_json();
  doc["head"] = "sigmoid";
  CHECK_THROWS_AS(Mlp::from_json(doc), ConfigError);
}

TEST_CASE("sgd step") {
  std::vector<double> theta{1.0, 2.0};
  const std::vector<double> g{0.5, -1.0};
  Optimizer up(OptimizerKind::kSgd, 0.1, 2);
  up.apply(theta, g, Direction::kAscend);
  CHECK(theta[0] == doctest::Approx(1.05).epsilon(1e-15));
  CHECK(theta[1] == doctest::Approx(1.9).epsilon(1e-15));

  std::vector<double> down{1.0, 2.0};
  Optimizer opt(OptimizerKind::kSgd, 0.1, 2);
  opt.apply(down, g, Direction::kDescend);
  CHECK(down[0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(down[1] == doctest::Approx(2.1).epsilon(1e-15));
}

TEST_CASE("zero gradient leaves parameters and decays moments") {
  std::vector<double> theta{1.0, -2.0, 3.0};
  const std::vector<double> zero(3, 0.0);
  Optimizer sgd(OptimizerKind::kSgd, 0.1, 3);
  sgd.apply(theta, zero, Direction::kDescend);
  CHECK(theta == std::vector<double>{1.0, -2.0, 3.0});

  Optimizer adam(OptimizerKind::kAdam, 0.1, 3);
  adam.apply(theta, zero, Direction::kDescend);
  CHECK(theta == std::vector<double>{1.0, -2.0, 3.0});

  adam.apply(theta, std::vector<double>{1.0, 1.0, 1.0}, Direction::kDescend);
  const auto m = adam.first_moment();
  const auto v = adam.second_moment();
  adam.apply(theta, zero, Direction::kDescend);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(adam.first_moment()[i] == doctest::Approx(0.9 * m[i]).epsilon(1e-15));
    CHECK(adam.second_moment()[i] == doctest::Approx(0.999 * v[i]).epsilon(1e-15));
  }
}

TEST_CASE("adam first step has magnitude alpha") {
  std::vector<double> theta{0.0, 0.0};
  Optimizer adam(OptimizerKind::kAdam, 0.01, 2);
  adam.apply(theta, std::vector<double>{3.0, -0.5}, Direction::kDescend);
  CHECK(theta[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(theta[1] == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("non-finite gradient diverges") {
  std::vector<double> theta{1.0, 2.0};
  Optimizer opt(OptimizerKind::kAdam, 0.1, 2);
  CHECK_THROWS_AS(opt.apply(theta, std::vector<double>{std::numeric_limits<double>::quiet_NaN(), 0.0},
                            Direction::kDescend),
                  DivergenceError);
  CHECK_THROWS_AS(opt.apply(theta, std::vector<double>{std::numeric_limits<double>::infinity(), 0.0},
                            Direction::kAscend),
                  DivergenceError);
  CHECK(theta == std::vector<double>{1.0, 2.0});
}

TEST_CASE("gradient clipping") {
  GradientSet g{{3.0, 4.0}};
  CHECK(clip_gradient_norm(g, 10.0) == 5.0);
  CHECK(g.values == std::vector<double>{3.0, 4.0});
  CHECK(clip_gradient_norm(g, 1.0) == 5.0);
  CHECK(g.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.values[0] == doctest::Approx(0.6).epsilon(1e-15));
}
