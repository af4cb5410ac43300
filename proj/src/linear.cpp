#include "linear.h"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "common.h"
#include "gbdt.h"

namespace relevancy::linear {

namespace {

constexpr std::string_view kModelFormat = "relevancy.logreg_model";
constexpr int kModelVersion = 1;

void check_inputs(const DenseMatrix& x, std::span<const int> labels) {
  if (x.rows == 0 || x.cols == 0) throw InvalidArgument("logreg: empty feature matrix");
  if (labels.size() != x.rows) throw InvalidArgument("logreg: label count does not match row count");
}

}  // namespace

void LinearConfig::validate() const {
  if (!(l2 >= 0.0)) throw InvalidArgument("linear config: l2 must be >= 0");
  if (epochs < 0) throw InvalidArgument("linear config: epochs must be >= 0");
  if (!(step_size > 0.0)) throw InvalidArgument("linear config: step_size must be > 0");
  if (!(tolerance >= 0.0)) throw InvalidArgument("linear config: tolerance must be >= 0");
}

double LogRegModel::predict_raw(std::span<const double> x) const {
  if (x.size() != weights.size()) {
    throw InvalidArgument("logreg predict: input width " + std::to_string(x.size()) + " != model width " +
                          std::to_string(weights.size()));
  }
  double z = bias;
  for (std::size_t j = 0; j < x.size(); ++j) z += weights[j] * x[j];
  return z;
}

double LogRegModel::predict(std::span<const double> x) const {
  constexpr double kEps = 1e-15;
  return std::clamp(gbdt::sigmoid(predict_raw(x)), kEps, 1.0 - kEps);
}

double lr_loss(const DenseMatrix& x, std::span<const int> labels, std::span<const double> weights, double bias,
               double l2) {
  check_inputs(x, labels);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto row = x.row(i);
    double z = bias;
    for (std::size_t j = 0; j < x.cols; ++j) z += weights[j] * row[j];
    loss += gbdt::logistic_loss(z, labels[i]);
  }
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  return loss / static_cast<double>(x.rows) + 0.5 * l2 * reg;
}

double lr_gradient(const DenseMatrix& x, std::span<const int> labels, std::span<const double> weights, double bias,
                   double l2, std::span<double> grad_w) {
  check_inputs(x, labels);
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  double grad_b = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto row = x.row(i);
    double z = bias;
    for (std::size_t j = 0; j < x.cols; ++j) z += weights[j] * row[j];
    const double r = gbdt::sigmoid(z) - static_cast<double>(labels[i]);
    for (std::size_t j = 0; j < x.cols; ++j) grad_w[j] += r * row[j];
    grad_b += r;
  }
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  for (std::size_t j = 0; j < grad_w.size(); ++j) grad_w[j] = grad_w[j] * inv_n + l2 * weights[j];
  return grad_b * inv_n;
}

LogRegModel lr_train(const DenseMatrix& x, std::span<const int> labels, const LinearConfig& config,
                     std::vector<double>* loss_history) {
  config.validate();
  check_inputs(x, labels);
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidArgument("logreg: labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == labels.size()) throw InvalidArgument("logreg: labels contain a single class");

  LogRegModel model;
  model.weights.assign(x.cols, 0.0);
  model.l2 = config.l2;
  model.step_size = config.step_size;
  model.seed = config.seed;
  std::vector<double> grad(x.cols);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double grad_b = lr_gradient(x, labels, model.weights, model.bias, config.l2, grad);
    double norm2 = grad_b * grad_b;
    for (double g : grad) norm2 += g * g;
    if (std::sqrt(norm2) < config.tolerance) break;
    for (std::size_t j = 0; j < grad.size(); ++j) model.weights[j] -= config.step_size * grad[j];
    model.bias -= config.step_size * grad_b;
    model.epochs_run = epoch + 1;
    if (loss_history != nullptr) loss_history->push_back(lr_loss(x, labels, model.weights, model.bias, config.l2));
  }
  return model;
}

std::string serialize_model(const LogRegModel& model) {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["l2"] = model.l2;
  j["epochs_run"] = model.epochs_run;
  j["step_size"] = model.step_size;
  j["seed"] = model.seed;
  return j.dump() + "\n";
}

LogRegModel parse_model(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kModelFormat) throw ParseError("not a logistic regression model file");
    if (j.at("version").get<int>() != kModelVersion) throw ParseError("unsupported logistic regression model version");
    LogRegModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.l2 = j.at("l2").get<double>();
    m.epochs_run = j.at("epochs_run").get<int>();
    m.step_size = j.at("step_size").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed logistic regression model: ") + e.what());
  }
}

}  // namespace relevancy::linear
