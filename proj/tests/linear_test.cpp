#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "common.h"
#include "linear.h"
#include "test_support.h"

using namespace relevancy;
using namespace relevancy::linear;
using testing_support::Gen;

namespace {

struct Problem {
  DenseMatrix x;
  std::vector<int> y;
};

Problem random_problem(Gen& gen, std::size_t rows, std::size_t cols) {
  Problem p{DenseMatrix(rows, cols), std::vector<int>(rows)};
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      p.x(i, j) = gen.range(-2, 2);
      s += p.x(i, j) * (j % 2 ? -0.7 : 1.0);
    }
    p.y[i] = s + gen.range(-1, 1) > 0 ? 1 : 0;
  }
  return p;
}

}  // namespace

TEST(LinearLoss, GradientMatchesFiniteDifferences) {
  Gen gen(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_problem(gen, 40, 5);
    std::vector<double> w(5);
    for (auto& v : w) v = gen.range(-1, 1);
    const double b = gen.range(-1, 1);
    const double l2 = gen.range(0, 0.5);
    std::vector<double> grad(5);
    const double gb = lr_gradient(p.x, p.y, w, b, l2, grad);
    const double eps = 1e-6;
    for (std::size_t j = 0; j < 5; ++j) {
      auto wp = w, wm = w;
      wp[j] += eps;
      wm[j] -= eps;
      const double fd = (lr_loss(p.x, p.y, wp, b, l2) - lr_loss(p.x, p.y, wm, b, l2)) / (2 * eps);
      EXPECT_NEAR(grad[j], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
    const double fd_b = (lr_loss(p.x, p.y, w, b + eps, l2) - lr_loss(p.x, p.y, w, b - eps, l2)) / (2 * eps);
    EXPECT_NEAR(gb, fd_b, 1e-5 * std::max(1.0, std::abs(fd_b)));
  }
}

TEST(LinearLoss, HandValues) {
  DenseMatrix x(2, 1);
  x(0, 0) = 1;
  x(1, 0) = -1;
  const std::vector<int> y{1, 0};
  const std::vector<double> zero{0.0};
  EXPECT_NEAR(lr_loss(x, y, zero, 0.0, 0.0), std::log(2.0), 1e-15);
  const std::vector<double> w{2.0};
  EXPECT_NEAR(lr_loss(x, y, w, 0.0, 0.5), std::log1p(std::exp(-2.0)) + 0.25 * 4.0, 1e-14);
}

TEST(LinearPredict, SigmoidOfLogThree) {
  LogRegModel m;
  m.weights = {1.0};
  m.bias = 0.0;
  EXPECT_NEAR(m.predict(std::vector<double>{std::log(3.0)}), 0.75, 1e-15);
  EXPECT_THROW(m.predict(std::vector<double>{1.0, 2.0}), InvalidArgument);
}

TEST(LinearTrain, SeparableOneDimension) {
  DenseMatrix x(20, 1);
  std::vector<int> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x(i, 0) = static_cast<double>(i) - 9.5;
    y[i] = i >= 10 ? 1 : 0;
  }
  LinearConfig c;
  c.epochs = 2000;
  c.l2 = 1e-4;
  const auto m = lr_train(x, y, c);
  EXPECT_GT(m.weights[0], 0.0);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(m.predict(x.row(i)) >= 0.5 ? 1 : 0, y[i]);
}

TEST(LinearTrain, StrongPenaltyShrinksWeights) {
  Gen gen(2);
  const auto p = random_problem(gen, 200, 4);
  LinearConfig weak;
  LinearConfig strong = weak;
  strong.l2 = 1e6;
  strong.step_size = 1e-7;
  const auto a = lr_train(p.x, p.y, weak);
  const auto b = lr_train(p.x, p.y, strong);
  double na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    na += a.weights[j] * a.weights[j];
    nb += b.weights[j] * b.weights[j];
  }
  EXPECT_LT(std::sqrt(nb), 1e-5);
  EXPECT_GT(std::sqrt(na), 0.1);
}

TEST(LinearTrain, LabelNegationMirrorsModel) {
  Gen gen(3);
  const auto p = random_problem(gen, 150, 3);
  std::vector<int> flipped(p.y.size());
  for (std::size_t i = 0; i < p.y.size(); ++i) flipped[i] = 1 - p.y[i];
  const auto a = lr_train(p.x, p.y, LinearConfig{});
  const auto b = lr_train(p.x, flipped, LinearConfig{});
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a.weights[j], -b.weights[j], 1e-12);
  EXPECT_NEAR(a.bias, -b.bias, 1e-12);
  for (std::size_t i = 0; i < 150; ++i) EXPECT_NEAR(a.predict(p.x.row(i)) + b.predict(p.x.row(i)), 1.0, 1e-12);
}

TEST(LinearTrain, LossDecreasesMonotonically) {
  Gen gen(4);
  const auto p = random_problem(gen, 300, 6);
  std::vector<double> history;
  LinearConfig c;
  c.epochs = 200;
  lr_train(p.x, p.y, c, &history);
  ASSERT_GT(history.size(), 10u);
  for (std::size_t i = 1; i < history.size(); ++i) EXPECT_LE(history[i], history[i - 1] + 1e-15) << i;
}

TEST(LinearTrain, Errors) {
  Gen gen(5);
  auto p = random_problem(gen, 30, 2);
  EXPECT_THROW(lr_train(p.x, std::vector<int>(29, 0), LinearConfig{}), InvalidArgument);
  std::vector<int> bad = p.y;
  bad[0] = 2;
  EXPECT_THROW(lr_train(p.x, bad, LinearConfig{}), InvalidArgument);
  LinearConfig c;
  c.step_size = 0;
  EXPECT_THROW(lr_train(p.x, p.y, c), InvalidArgument);
  c = LinearConfig{};
  c.l2 = -1;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(LinearModel, SerializationRoundTrip) {
  Gen gen(6);
  const auto p = random_problem(gen, 100, 5);
  const auto m = lr_train(p.x, p.y, LinearConfig{});
  const auto back = parse_model(serialize_model(m));
  EXPECT_EQ(back, m);
  EXPECT_THROW(parse_model("{}"), ParseError);
  EXPECT_THROW(parse_model("not json"), ParseError);
}
