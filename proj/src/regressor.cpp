#include "earnvol/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "earnvol/errors.hpp"
#include "json.hpp"

namespace earnvol {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols())
      throw Error(ErrorKind::RaggedDimension, "matrix row " + std::to_string(r) + " has length " +
                                                  std::to_string(rows[r].size()));
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

Cholesky::Cholesky(const Matrix& a, double pivot_tol) : l_(a.rows(), a.rows()) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::InvalidArgument, "Cholesky: matrix not square");
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double floor = pivot_tol * max_diag;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
    if (!(d > floor) || max_diag == 0.0)
      throw Error(ErrorKind::SingularDesign,
                  "singular normal equations (pivot " + std::to_string(j) + "); use ridge > 0");
    const double ljj = std::sqrt(d);
    l_(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      auto li = l_.row(i), lj = l_.row(j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      l_(i, j) = s / ljj;
    }
  }
}

std::vector<double> Cholesky::solve(std::span<const double> b) const {
  const std::size_t n = l_.rows();
  if (b.size() != n) throw Error(ErrorKind::InvalidArgument, "Cholesky::solve: size mismatch");
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * z[k];
    z[i] = s / l_(i, i);
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = z[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l_(k, i) * x[k];
    x[i] = s / l_(i, i);
  }
  return x;
}

std::vector<double> cholesky_solve(const Matrix& a, std::span<const double> b, double pivot_tol) {
  if (b.size() != a.rows()) throw Error(ErrorKind::InvalidArgument, "cholesky_solve: shape mismatch");
  return Cholesky(a, pivot_tol).solve(b);
}

double LinearModel::predict(std::span<const double> x) const {
  double s = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * x[j];
  return s;
}

std::vector<LinearModel> ridge_fit_multi(const Matrix& x, std::span<const std::vector<double>> ys,
                                         double ridge) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0 || d == 0) throw Error(ErrorKind::EmptyInput, "ridge_fit needs n >= 1 and d >= 1");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw Error(ErrorKind::InvalidArgument, "ridge must be finite and >= 0");
  for (double v : x.data())
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "ridge_fit: non-finite feature");
  for (const auto& y : ys) {
    if (y.size() != n) throw Error(ErrorKind::InvalidArgument, "ridge_fit: y length differs from rows");
    for (double v : y)
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "ridge_fit: non-finite target");
  }

  // Centering removes the unpenalized intercept from the system.
  std::vector<double> xm(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) xm[j] += x(i, j);
  for (auto& v : xm) v /= static_cast<double>(n);
  std::vector<double> ym;
  for (const auto& y : ys) ym.push_back(std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n));

  Matrix a(d, d);
  std::vector<std::vector<double>> rhs(ys.size(), std::vector<double>(d, 0.0));
  std::vector<double> xc(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) xc[j] = x(i, j) - xm[j];
    for (std::size_t t = 0; t < ys.size(); ++t) {
      const double yc = ys[t][i] - ym[t];
      for (std::size_t j = 0; j < d; ++j) rhs[t][j] += xc[j] * yc;
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double xj = xc[j];
      auto arow = a.row(j);
      for (std::size_t k = 0; k <= j; ++k) arow[k] += xj * xc[k];
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    a(j, j) += ridge;
    for (std::size_t k = 0; k < j; ++k) a(k, j) = a(j, k);
  }

  std::vector<LinearModel> out(ys.size());
  std::optional<Cholesky> factor;
  for (std::size_t t = 0; t < ys.size(); ++t) {
    auto& m = out[t];
    m.ridge = ridge;
    const bool zero_rhs = std::all_of(rhs[t].begin(), rhs[t].end(), [](double v) { return v == 0.0; });
    if (zero_rhs && ridge > 0.0) {
      m.weights.assign(d, 0.0);
    } else {
      if (!factor) factor.emplace(a);
      m.weights = factor->solve(rhs[t]);
    }
    m.bias = ym[t];
    for (std::size_t j = 0; j < d; ++j) m.bias -= xm[j] * m.weights[j];
  }
  return out;
}

LinearModel ridge_fit(const Matrix& x, std::span<const double> y, double ridge) {
  const std::vector<double> ys[] = {std::vector<double>(y.begin(), y.end())};
  return ridge_fit_multi(x, ys, ridge).front();
}

double ridge_objective(const LinearModel& m, const Matrix& x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double e = y[i] - m.predict(x.row(i));
    s += e * e;
  }
  for (double w : m.weights) s += m.ridge * w * w;
  return s;
}

namespace {

double activate(Activation a, double z) { return a == Activation::Relu ? (z > 0.0 ? z : 0.0) : std::tanh(z); }

double activate_grad(Activation a, double z) {
  if (a == Activation::Relu) return z > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

std::string_view to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw Error(ErrorKind::Parse, "unknown activation '" + std::string(s) + "'");
}

}  // namespace

double MlpModel::predict(std::span<const double> x) const {
  double out = b2;
  for (std::size_t h = 0; h < w1.rows(); ++h) {
    double z = b1[h];
    auto wr = w1.row(h);
    for (std::size_t j = 0; j < wr.size(); ++j) z += wr[j] * x[j];
    out += w2[h] * activate(activation, z);
  }
  return out;
}

MlpModel mlp_init(std::size_t input_dim, const TrainConfig& config) {
  if (input_dim == 0 || config.hidden == 0) throw Error(ErrorKind::InvalidArgument, "MLP needs input and hidden > 0");
  std::mt19937_64 rng(config.seed);
  MlpModel m;
  m.activation = config.activation;
  m.w1 = Matrix(config.hidden, input_dim);
  const double lim1 = std::sqrt(6.0 / static_cast<double>(input_dim + config.hidden));
  std::uniform_real_distribution<double> u1(-lim1, lim1);
  for (auto& v : m.w1.data()) v = u1(rng);
  m.b1.assign(config.hidden, 0.0);
  m.w2.assign(config.hidden, 0.0);
  if (!config.zero_init_output) {
    const double lim2 = std::sqrt(6.0 / static_cast<double>(config.hidden + 1));
    std::uniform_real_distribution<double> u2(-lim2, lim2);
    for (auto& v : m.w2) v = u2(rng);
  }
  return m;
}

MlpGradient mlp_backprop(const MlpModel& model, std::span<const double> x, double y) {
  const std::size_t hidden = model.hidden(), in = model.input_dim();
  std::vector<double> z(hidden), h(hidden);
  double pred = model.b2;
  for (std::size_t k = 0; k < hidden; ++k) {
    double s = model.b1[k];
    auto wr = model.w1.row(k);
    for (std::size_t j = 0; j < in; ++j) s += wr[j] * x[j];
    z[k] = s;
    h[k] = activate(model.activation, s);
    pred += model.w2[k] * h[k];
  }
  const double dpred = 2.0 * (pred - y);
  MlpGradient g{Matrix(hidden, in), std::vector<double>(hidden), std::vector<double>(hidden), dpred};
  for (std::size_t k = 0; k < hidden; ++k) {
    g.w2[k] = dpred * h[k];
    const double dz = dpred * model.w2[k] * activate_grad(model.activation, z[k]);
    g.b1[k] = dz;
    auto gr = g.w1.row(k);
    for (std::size_t j = 0; j < in; ++j) gr[j] = dz * x[j];
  }
  return g;
}

double mlp_mse(const MlpModel& model, const Matrix& x, std::span<const double> y) {
  if (x.rows() == 0) throw Error(ErrorKind::EmptyInput, "mse over empty set");
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double e = model.predict(x.row(i)) - y[i];
    s += e * e;
  }
  return s / static_cast<double>(x.rows());
}

MlpTrainResult mlp_train(const Matrix& x, std::span<const double> y, const Matrix& x_val,
                         std::span<const double> y_val, const TrainConfig& config) {
  if (x.rows() == 0 || x_val.rows() == 0)
    throw Error(ErrorKind::EmptyInput, "mlp_train needs non-empty train and validation sets");
  if (y.size() != x.rows() || y_val.size() != x_val.rows() || x_val.cols() != x.cols())
    throw Error(ErrorKind::InvalidArgument, "mlp_train: shape mismatch");
  if (config.batch_size == 0 || !(config.learning_rate > 0.0))
    throw Error(ErrorKind::InvalidArgument, "mlp_train: batch size and learning rate must be positive");

  MlpTrainResult result;
  MlpModel model = mlp_init(x.cols(), config);
  if (config.center_output_bias)
    model.b2 = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  result.val_mse.push_back(mlp_mse(model, x_val, y_val));
  result.model = model;
  double best = result.val_mse.front();
  std::size_t stale = 0;

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t hidden = model.hidden(), in = model.input_dim();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      MlpGradient acc{Matrix(hidden, in), std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0), 0.0};
      for (std::size_t b = start; b < end; ++b) {
        const auto g = mlp_backprop(model, x.row(order[b]), y[order[b]]);
        for (std::size_t k = 0; k < acc.w1.data().size(); ++k) acc.w1.data()[k] += g.w1.data()[k];
        for (std::size_t k = 0; k < hidden; ++k) {
          acc.b1[k] += g.b1[k];
          acc.w2[k] += g.w2[k];
        }
        acc.b2 += g.b2;
      }
      const double step = config.learning_rate / static_cast<double>(end - start);
      for (std::size_t k = 0; k < acc.w1.data().size(); ++k) model.w1.data()[k] -= step * acc.w1.data()[k];
      for (std::size_t k = 0; k < hidden; ++k) {
        model.b1[k] -= step * acc.b1[k];
        model.w2[k] -= step * acc.w2[k];
      }
      model.b2 -= step * acc.b2;
    }
    const double v = mlp_mse(model, x_val, y_val);
    result.val_mse.push_back(v);
    if (v < best) {
      best = v;
      result.model = model;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return result;
}

double gradient_check(const MlpModel& model, std::span<const double> x, double y, double epsilon) {
  const MlpGradient g = mlp_backprop(model, x, y);
  MlpModel probe = model;
  auto loss = [&](const MlpModel& m) {
    const double e = m.predict(x) - y;
    return e * e;
  };
  double worst = 0.0;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + epsilon;
    const double up = loss(probe);
    param = saved - epsilon;
    const double down = loss(probe);
    param = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    const double rel = scale == 0.0 ? 0.0 : std::abs(analytic - numeric) / scale;
    worst = std::max(worst, rel);
  };
  for (std::size_t k = 0; k < probe.w1.data().size(); ++k) check(probe.w1.data()[k], g.w1.data()[k]);
  for (std::size_t k = 0; k < probe.b1.size(); ++k) check(probe.b1[k], g.b1[k]);
  for (std::size_t k = 0; k < probe.w2.size(); ++k) check(probe.w2[k], g.w2[k]);
  check(probe.b2, g.b2);
  return worst;
}

std::string save_mlp_json(const MlpModel& model, const TrainConfig& config) {
  nlohmann::json j;
  j["kind"] = "mlp";
  j["input_dim"] = model.input_dim();
  j["hidden"] = model.hidden();
  j["activation"] = to_string(model.activation);
  j["w1"] = std::vector<double>(model.w1.data().begin(), model.w1.data().end());
  j["b1"] = model.b1;
  j["w2"] = model.w2;
  j["b2"] = model.b2;
  j["config"] = {{"learning_rate", config.learning_rate}, {"batch_size", config.batch_size},
                 {"max_epochs", config.max_epochs},       {"seed", config.seed},
                 {"patience", config.patience},           {"hidden", config.hidden},
                 {"activation", to_string(config.activation)}};
  return j.dump();
}

MlpModel load_mlp_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MlpModel m;
    const auto in = j.at("input_dim").get<std::size_t>(), hidden = j.at("hidden").get<std::size_t>();
    m.activation = parse_activation(j.at("activation").get<std::string>());
    const auto w1 = j.at("w1").get<std::vector<double>>();
    if (w1.size() != in * hidden) throw Error(ErrorKind::RaggedDimension, "w1 size mismatch");
    m.w1 = Matrix(hidden, in);
    std::copy(w1.begin(), w1.end(), m.w1.data().begin());
    m.b1 = j.at("b1").get<std::vector<double>>();
    m.w2 = j.at("w2").get<std::vector<double>>();
    m.b2 = j.at("b2").get<double>();
    if (m.b1.size() != hidden || m.w2.size() != hidden) throw Error(ErrorKind::RaggedDimension, "bias size mismatch");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("bad MLP model JSON: ") + e.what());
  }
}

std::string save_linear_json(const LinearModel& model) {
  nlohmann::json j{{"kind", "linear"}, {"weights", model.weights}, {"bias", model.bias}, {"ridge", model.ridge}};
  return j.dump();
}

LinearModel load_linear_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return {j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>(), j.at("ridge").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("bad linear model JSON: ") + e.what());
  }
}

}  // namespace earnvol
