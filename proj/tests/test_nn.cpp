#include "doctest.h"

#include <cmath>

#include "cdiff/nn.hpp"
#include "cdiff/random.hpp"

using namespace cdiff;

namespace {

nn::LayerDef layer(std::string name, int in, int out) {
  nn::LayerDef l;
  l.name = std::move(name);
  l.in = in;
  l.out = out;
  return l;
}

}  // namespace

TEST_CASE("parameter vector layout") {
  nn::ParameterVector pv;
  auto a = pv.add("a", 2, 3);
  auto b = pv.add("b", 4, 1);
  CHECK(pv.size() == 10);
  CHECK(pv.block(b).offset == 6);
  CHECK(pv.find("b") == b);
  pv.matrix(a)(1, 2) = 5.0;
  CHECK(pv.values()[5] == 5.0);
  nn::ParameterVector other;
  other.add("a", 2, 3);
  CHECK_FALSE(pv.same_layout(other));
  other.add("b", 4, 1);
  CHECK(pv.same_layout(other));
}

TEST_CASE("time features") {
  auto f = nn::time_features(0.0, 1.0);
  CHECK(f.size() == nn::kTimeFeatures);
  CHECK(f.head(32).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.tail(32).minCoeff() == doctest::Approx(1.0));
  CHECK((nn::time_features(0.3, 1.0) - nn::time_features(0.6, 2.0)).norm() < 1e-12);
}

TEST_CASE("masked weights are exact zeros after init") {
  nn::ParameterVector pv;
  auto l = layer("l0", 3, 3);
  l.mask = Eigen::MatrixXd::Identity(3, 3);
  nn::Mlp net({l}, 0, pv);
  Rng rng(1);
  net.init(pv, rng, true);
  auto w = pv.matrix(pv.find("l0.w"));
  CHECK(w(0, 1) == 0.0);
  CHECK(w(2, 0) == 0.0);
  CHECK(w(1, 1) != 0.0);
}

TEST_CASE("mlp backward matches finite differences") {
  nn::ParameterVector pv;
  auto l0 = layer("l0", 4, 6);
  l0.time_injection = true;
  auto l1 = layer("l1", 6, 2);
  l1.elu = false;
  nn::Mlp net({l0, l1}, nn::kTimeFeatures, pv);
  Rng rng(7);
  net.init(pv, rng, true);
  Eigen::MatrixXd input = Eigen::MatrixXd::Random(4, 3);
  Eigen::MatrixXd tf(nn::kTimeFeatures, 1);
  tf.col(0) = nn::time_features(0.4, 1.0);
  std::vector<int> group{0, 0, 0};
  Eigen::MatrixXd dout = Eigen::MatrixXd::Random(2, 3);
  auto loss = [&] {
    nn::MlpRun<double> run(net, pv, input, tf, group);
    return (run.output().array() * dout.array()).sum();
  };
  std::vector<double> grad(pv.size(), 0.0);
  nn::MlpRun<double>(net, pv, input, tf, group).backward(dout, grad);
  auto vals = pv.values();
  for (std::size_t i = 0; i < vals.size(); i += 7) {
    double keep = vals[i];
    vals[i] = keep + 1e-6;
    double up = loss();
    vals[i] = keep - 1e-6;
    double down = loss();
    vals[i] = keep;
    CHECK(grad[i] == doctest::Approx((up - down) / 2e-6).epsilon(1e-5));
  }
}

TEST_CASE("adam first step moves by the learning rate") {
  std::vector<double> p{1.0, -2.0};
  std::vector<double> g{0.5, -3.0};
  nn::AdamState st;
  nn::AdamConfig cfg;
  cfg.learning_rate = 0.01;
  nn::adam_step(p, g, st, cfg);
  CHECK(st.step == 1);
  CHECK(p[0] == doctest::Approx(0.99).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(-1.99).epsilon(1e-6));
  auto zm = nn::AdamConfig::preset(nn::AdamPreset::zero_momentum, 0.1);
  CHECK(zm.beta1 == 0.0);
  CHECK(zm.learning_rate == 0.1);
}
