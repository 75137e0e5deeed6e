#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace earnvol {

// Dense row-major matrix; just enough for design matrices and MLP weights.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Lower-triangular factor of a symmetric positive-definite matrix. A pivot
// below `pivot_tol` times the largest diagonal entry throws SingularDesign.
class Cholesky {
 public:
  explicit Cholesky(const Matrix& a, double pivot_tol = 1e-12);
  std::vector<double> solve(std::span<const double> b) const;

 private:
  Matrix l_;
};

std::vector<double> cholesky_solve(const Matrix& a, std::span<const double> b, double pivot_tol = 1e-12);

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double ridge = 0.0;

  double predict(std::span<const double> x) const;
  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

// Minimizes sum (y - w.x - b)^2 + ridge |w|^2 with the intercept unpenalized.
LinearModel ridge_fit(const Matrix& x, std::span<const double> y, double ridge);
// Several targets over one design; the normal equations are factored once.
std::vector<LinearModel> ridge_fit_multi(const Matrix& x, std::span<const std::vector<double>> ys,
                                         double ridge);
double ridge_objective(const LinearModel& m, const Matrix& x, std::span<const double> y);

enum class Activation { Relu, Tanh };

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 10;
  std::uint64_t seed = 2021;
  std::size_t patience = 3;
  std::size_t hidden = 512;
  Activation activation = Activation::Relu;
  // Start the output layer at zero instead of the Glorot range.
  bool zero_init_output = false;
  // Initialise the output bias at the mean training target.
  bool center_output_bias = true;
};

// Two-layer perceptron: y = w2 . act(W1 x + b1) + b2.
struct MlpModel {
  Matrix w1;                // hidden x input
  std::vector<double> b1;   // hidden
  std::vector<double> w2;   // hidden
  double b2 = 0.0;
  Activation activation = Activation::Relu;

  std::size_t input_dim() const { return w1.cols(); }
  std::size_t hidden() const { return w1.rows(); }
  double predict(std::span<const double> x) const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

// Gradient of the single-sample squared error (pred - y)^2 with respect to
// every parameter, laid out like the model.
struct MlpGradient {
  Matrix w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};

MlpModel mlp_init(std::size_t input_dim, const TrainConfig& config);
MlpGradient mlp_backprop(const MlpModel& model, std::span<const double> x, double y);

struct MlpTrainResult {
  MlpModel model;
  std::vector<double> val_mse;   // index 0 is the untrained model
  std::size_t best_epoch = 0;
};

MlpTrainResult mlp_train(const Matrix& x, std::span<const double> y, const Matrix& x_val,
                         std::span<const double> y_val, const TrainConfig& config);

double mlp_mse(const MlpModel& model, const Matrix& x, std::span<const double> y);

// Largest |analytic - numeric| / max(|analytic|, |numeric|) over all
// parameters, using central differences. 0/0 counts as 0.
double gradient_check(const MlpModel& model, std::span<const double> x, double y, double epsilon = 1e-5);

std::string save_mlp_json(const MlpModel& model, const TrainConfig& config);
MlpModel load_mlp_json(const std::string& text);
std::string save_linear_json(const LinearModel& model);
LinearModel load_linear_json(const std::string& text);

}  // namespace earnvol
