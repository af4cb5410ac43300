#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "matrix.h"

namespace relevancy::linear {

struct LinearConfig {
  double l2 = 1e-4;
  int epochs = 500;
  double step_size = 0.1;
  // Stop early once the full gradient norm drops below this.
  double tolerance = 1e-7;
  // Reserved for shuffled variants; full-batch descent from zero is deterministic.
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const LinearConfig&) const = default;
};

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2 = 0.0;
  int epochs_run = 0;
  double step_size = 0.0;
  std::uint64_t seed = 0;

  double predict_raw(std::span<const double> x) const;
  double predict(std::span<const double> x) const;
  bool operator==(const LogRegModel&) const = default;
};

// Mean logistic loss plus (l2 / 2) * |w|^2; the bias is not penalized.
double lr_loss(const DenseMatrix& x, std::span<const int> labels, std::span<const double> weights, double bias,
               double l2);
// Gradient of lr_loss; returns the bias component, fills grad_w.
double lr_gradient(const DenseMatrix& x, std::span<const int> labels, std::span<const double> weights, double bias,
                   double l2, std::span<double> grad_w);

// Full-batch gradient descent from zero.
LogRegModel lr_train(const DenseMatrix& x, std::span<const int> labels, const LinearConfig& config,
                     std::vector<double>* loss_history = nullptr);

std::string serialize_model(const LogRegModel& model);
LogRegModel parse_model(std::string_view text);

}  // namespace relevancy::linear
