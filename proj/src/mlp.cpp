#include "ddi/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ddi/eval.hpp"

namespace ddi::mlp {

namespace {

template <typename Range, typename T>
bool one_of(const Range& range, T value) {
  return std::find(std::begin(range), std::end(range), value) != std::end(range);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Trace {
  std::vector<Eigen::MatrixXd> act;   // act[0] = X, act[l] = hidden output l
  std::vector<Eigen::MatrixXd> pre;   // pre-activation of hidden layer l (index l-1)
  std::vector<Eigen::MatrixXd> mask;  // scaled dropout masks; empty in eval mode
  Eigen::RowVectorXd logit;
  Eigen::RowVectorXd prob;
};

Trace run_forward(const Model& model, const Eigen::MatrixXd& X, bool train_mode, Rng* rng) {
  if (static_cast<std::size_t>(X.rows()) != model.input_dim()) {
    throw ValidationError("input dimension mismatch: model expects " +
                          std::to_string(model.input_dim()) + ", got " + std::to_string(X.rows()));
  }
  const double p = model.dropout();
  const bool use_dropout = train_mode && p > 0.0;
  if (use_dropout && rng == nullptr) throw ValidationError("train-mode forward needs an rng");
  const double keep_scale = use_dropout ? 1.0 / (1.0 - p) : 1.0;

  const auto& layers = model.layers();
  const std::size_t hidden = model.hidden_count();
  Trace t;
  t.act.reserve(hidden + 1);
  t.act.push_back(model.standardize(X));
  for (std::size_t l = 0; l < hidden; ++l) {
    Eigen::MatrixXd z = layers[l].weights * t.act.back();
    z.colwise() += layers[l].bias;
    Eigen::MatrixXd h = z.cwiseMax(0.0);
    if (use_dropout) {
      Eigen::MatrixXd m(h.rows(), h.cols());
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
          m(r, c) = rng->uniform() < p ? 0.0 : keep_scale;
        }
      }
      h = h.cwiseProduct(m);
      t.mask.push_back(std::move(m));
    }
    t.pre.push_back(std::move(z));
    t.act.push_back(std::move(h));
  }
  const Layer& out = layers.back();
  Eigen::RowVectorXd logits = out.weights * t.act.back();
  logits.array() += out.bias(0);
  t.prob = logits.unaryExpr([](double z) { return sigmoid(z); });
  t.logit = std::move(logits);
  return t;
}

// log(1 + e^z) without overflow or cancellation.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Weighted BCE from logits: -log(sigmoid(z)) = softplus(-z) and
// -log(1 - sigmoid(z)) = softplus(z). Exact where the probability form rounds
// to 0 or 1, so it is the function whose gradient compute_gradients returns.
double logit_loss(const Eigen::RowVectorXd& logit, const Eigen::RowVectorXd& y,
                  const corpus::ClassWeights& w) {
  if (logit.size() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < logit.size(); ++i) {
    total += w.positive * y(i) * softplus(-logit(i)) + w.negative * (1.0 - y(i)) * softplus(logit(i));
  }
  return total / static_cast<double>(logit.size());
}

void check_finite_loss(double loss, int epoch, std::size_t batch) {
  if (!std::isfinite(loss)) {
    throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(batch));
  }
}

std::vector<Layer> zeros_like(const std::vector<Layer>& layers) {
  std::vector<Layer> out;
  out.reserve(layers.size());
  for (const auto& l : layers) {
    out.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                   Eigen::VectorXd::Zero(l.bias.size())});
  }
  return out;
}

}  // namespace

std::string_view to_string(Optimizer optimizer) {
  return optimizer == Optimizer::Adam ? "adam" : "sgd";
}

Optimizer parse_optimizer(std::string_view text) {
  if (text == "adam" || text == "Adam") return Optimizer::Adam;
  if (text == "sgd" || text == "SGD") return Optimizer::SGD;
  throw ValidationError("unknown optimizer '" + std::string(text) + "'");
}

void Config::validate() const {
  if (!one_of(kHiddenLayerChoices, hidden_layers)) {
    throw ValidationError("hidden_layers must be one of 1..5, got " + std::to_string(hidden_layers));
  }
  if (!one_of(kNeuronChoices, neurons_per_layer)) {
    throw ValidationError("neurons_per_layer must be one of {64,96,128,192,256}, got " +
                          std::to_string(neurons_per_layer));
  }
  if (!(learning_rate >= kMinLearningRate && learning_rate <= kMaxLearningRate)) {
    throw ValidationError("learning_rate must lie in [1e-5, 1e-3], got " + std::to_string(learning_rate));
  }
  if (!(dropout >= kMinDropout && dropout <= kMaxDropout)) {
    throw ValidationError("dropout must lie in [0.1, 0.5], got " + std::to_string(dropout));
  }
  if (!one_of(kBatchChoices, batch_size)) {
    throw ValidationError("batch_size must be one of {32,64,128}, got " + std::to_string(batch_size));
  }
  if (max_epochs < 1) throw ValidationError("max_epochs must be at least 1");
  if (patience < 1) throw ValidationError("patience must be at least 1");
}

TrainSettings Config::training() const {
  TrainSettings s;
  s.learning_rate = learning_rate;
  s.dropout = dropout;
  s.batch_size = batch_size;
  s.optimizer = optimizer;
  s.max_epochs = max_epochs;
  s.patience = patience;
  s.seed = seed;
  return s;
}

nlohmann::json to_json(const Config& c) {
  return {{"hidden_layers", c.hidden_layers},
          {"neurons_per_layer", c.neurons_per_layer},
          {"learning_rate", c.learning_rate},
          {"dropout", c.dropout},
          {"batch_size", c.batch_size},
          {"optimizer", std::string(to_string(c.optimizer))},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"seed", c.seed}};
}

Config config_from_json(const nlohmann::json& j, Config c) {
  if (!j.is_object()) throw ValidationError("MLP config must be a JSON object");
  try {
    if (j.contains("hidden_layers")) c.hidden_layers = j.at("hidden_layers").get<int>();
    if (j.contains("neurons_per_layer")) c.neurons_per_layer = j.at("neurons_per_layer").get<int>();
    if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("dropout")) c.dropout = j.at("dropout").get<double>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
    if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    if (j.contains("max_epochs")) c.max_epochs = j.at("max_epochs").get<int>();
    if (j.contains("patience")) c.patience = j.at("patience").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad MLP config: ") + e.what());
  }
  c.validate();
  return c;
}

Model::Model(std::size_t input_dim, std::span<const std::size_t> hidden_sizes, double dropout)
    : input_dim_(input_dim) {
  if (input_dim == 0) throw ValidationError("input_dim must be at least 1");
  set_dropout(dropout);
  std::size_t fan_in = input_dim;
  for (std::size_t width : hidden_sizes) {
    if (width == 0) throw ValidationError("hidden layer width must be at least 1");
    layers_.push_back({Eigen::MatrixXd::Zero(width, fan_in), Eigen::VectorXd::Zero(width)});
    fan_in = width;
  }
  layers_.push_back({Eigen::MatrixXd::Zero(1, fan_in), Eigen::VectorXd::Zero(1)});
}

void Model::set_dropout(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw ValidationError("dropout must lie in [0, 1)");
  dropout_ = p;
}

void Model::set_input_standardizer(const Eigen::VectorXd& mean, const Eigen::VectorXd& scale) {
  if (mean.size() == 0 && scale.size() == 0) {
    input_mean_.resize(0);
    input_scale_.resize(0);
    return;
  }
  if (static_cast<std::size_t>(mean.size()) != input_dim_ ||
      static_cast<std::size_t>(scale.size()) != input_dim_) {
    throw ValidationError("input standardizer must have input_dim entries");
  }
  input_mean_ = mean;
  input_scale_ = scale.unaryExpr([](double s) { return std::abs(s) < 1e-12 ? 1.0 : s; });
}

Eigen::MatrixXd Model::standardize(const Eigen::MatrixXd& X) const {
  if (!has_input_standardizer()) return X;
  Eigen::MatrixXd out = X.colwise() - input_mean_;
  out.array().colwise() /= input_scale_.array();
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

bool Model::operator==(const Model& other) const {
  if (input_dim_ != other.input_dim_ || dropout_ != other.dropout_ ||
      layers_.size() != other.layers_.size() || !(config_ == other.config_)) {
    return false;
  }
  if (input_mean_.size() != other.input_mean_.size() || input_mean_ != other.input_mean_ ||
      input_scale_ != other.input_scale_) {
    return false;
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols()) return false;
    if (a.weights != b.weights || a.bias != b.bias) return false;
  }
  return true;
}

Model init_model(const Config& config, std::size_t input_dim) {
  config.validate();
  std::vector<std::size_t> hidden(static_cast<std::size_t>(config.hidden_layers),
                                  static_cast<std::size_t>(config.neurons_per_layer));
  Model model(input_dim, hidden, config.dropout);
  model.set_config(config);
  Rng rng(derive_seed(config.seed, 0));
  for (auto& layer : model.layers()) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(layer.weights.cols()));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = rng.normal(0.0, stddev);
      }
    }
  }
  return model;
}

double forward(const Model& model, std::span<const double> x, bool train_mode, Rng* rng) {
  Eigen::MatrixXd X = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return run_forward(model, X, train_mode, rng).prob(0);
}

Eigen::RowVectorXd forward_batch(const Model& model, const Eigen::MatrixXd& X, bool train_mode,
                                 Rng* rng) {
  return run_forward(model, X, train_mode, rng).prob;
}

double bce_loss(std::span<const double> y_hat, std::span<const double> y, double w_pos,
                double w_neg) {
  if (y_hat.size() != y.size()) throw ValidationError("bce_loss: length mismatch");
  if (y_hat.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = std::clamp(y_hat[i], kLogClamp, 1.0 - kLogClamp);
    total -= w_pos * y[i] * std::log(p) + w_neg * (1.0 - y[i]) * std::log(1.0 - p);
  }
  return total / static_cast<double>(y.size());
}

Gradients compute_gradients(const Model& model, const Eigen::MatrixXd& X,
                            const Eigen::RowVectorXd& y, const corpus::ClassWeights& weights,
                            bool train_mode, std::uint64_t dropout_seed) {
  if (X.cols() != y.size()) throw ValidationError("compute_gradients: batch size mismatch");
  Rng rng(dropout_seed);
  const Trace t = run_forward(model, X, train_mode, &rng);
  const auto n = static_cast<double>(X.cols());

  Gradients g;
  g.layers = zeros_like(model.layers());
  g.loss = logit_loss(t.logit, y, weights);

  // d loss / d logit of logit_loss.
  Eigen::RowVectorXd delta(X.cols());
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    const double p = t.prob(i);
    delta(i) = (weights.negative * (1.0 - y(i)) * p - weights.positive * y(i) * (1.0 - p)) / n;
  }

  const auto& layers = model.layers();
  const std::size_t hidden = model.hidden_count();
  g.layers[hidden].weights = delta * t.act[hidden].transpose();
  g.layers[hidden].bias(0) = delta.sum();
  Eigen::MatrixXd upstream = layers[hidden].weights.transpose() * delta;

  for (std::size_t l = hidden; l-- > 0;) {
    Eigen::MatrixXd dz = upstream.cwiseProduct((t.pre[l].array() > 0.0).cast<double>().matrix());
    if (!t.mask.empty()) dz = dz.cwiseProduct(t.mask[l]);
    g.layers[l].weights = dz * t.act[l].transpose();
    g.layers[l].bias = dz.rowwise().sum();
    if (l > 0) upstream = layers[l].weights.transpose() * dz;
  }
  return g;
}

double batch_loss(const Model& model, const Eigen::MatrixXd& X, const Eigen::RowVectorXd& y,
                  const corpus::ClassWeights& weights, bool train_mode, std::uint64_t dropout_seed) {
  if (X.cols() != y.size()) throw ValidationError("batch_loss: batch size mismatch");
  Rng rng(dropout_seed);
  return logit_loss(run_forward(model, X, train_mode, &rng).logit, y, weights);
}

Updater::Updater(const Model& model, const TrainSettings& settings) : settings_(settings) {
  if (settings_.optimizer == Optimizer::Adam) {
    m_ = zeros_like(model.layers());
    v_ = zeros_like(model.layers());
  }
}

void Updater::apply(Model& model, const Gradients& grads) {
  ++step_;
  auto& layers = model.layers();
  const double lr = settings_.learning_rate;
  if (settings_.optimizer == Optimizer::SGD) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i].weights -= lr * grads.layers[i].weights;
      layers[i].bias -= lr * grads.layers[i].bias;
    }
    return;
  }
  const double b1 = settings_.adam_beta1;
  const double b2 = settings_.adam_beta2;
  const double eps = settings_.adam_epsilon;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  auto step = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    step(layers[i].weights, m_[i].weights, v_[i].weights, grads.layers[i].weights);
    step(layers[i].bias, m_[i].bias, v_[i].bias, grads.layers[i].bias);
  }
}

int binary_label(corpus::PairLabel label) {
  switch (label) {
    case corpus::PairLabel::Positive: return 1;
    case corpus::PairLabel::ReliableNegative: return 0;
    case corpus::PairLabel::Unknown: break;
  }
  throw ValidationError("unknown pairs carry no supervised label");
}

namespace {

std::vector<const corpus::PairInstance*> labeled_only(std::span<const corpus::PairInstance> pairs) {
  std::vector<const corpus::PairInstance*> out;
  for (const auto& p : pairs) {
    if (p.label != corpus::PairLabel::Unknown) out.push_back(&p);
  }
  return out;
}

void fill_batch(std::span<const corpus::PairInstance* const> pairs, std::span<const std::size_t> idx,
                std::size_t dim, const features::FeatureFn& feature_fn, Eigen::MatrixXd& X,
                Eigen::RowVectorXd& y) {
  X.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(idx.size()));
  y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& p = *pairs[idx[k]];
    feature_fn(p, std::span<double>(X.col(static_cast<Eigen::Index>(k)).data(), dim));
    y(static_cast<Eigen::Index>(k)) = binary_label(p.label);
  }
}

void fit_standardizer(Model& model, std::span<const corpus::PairInstance* const> pairs,
                      const features::FeatureFn& feature_fn) {
  const auto dim = static_cast<Eigen::Index>(model.input_dim());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd row(dim);
  for (const auto* p : pairs) {
    feature_fn(*p, std::span<double>(row.data(), static_cast<std::size_t>(dim)));
    sum += row;
    sq += row.cwiseProduct(row);
  }
  const double n = static_cast<double>(pairs.size());
  const Eigen::VectorXd mean = sum / n;
  const Eigen::VectorXd var = (sq / n - mean.cwiseProduct(mean)).cwiseMax(0.0);
  model.set_input_standardizer(mean, var.cwiseSqrt());
}

}  // namespace

TrainResult train(const Model& initial, std::span<const corpus::PairInstance> train_pairs,
                  std::span<const corpus::PairInstance> val_pairs,
                  const features::FeatureFn& feature_fn, const corpus::ClassWeights& weights,
                  const TrainSettings& settings) {
  if (settings.batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (settings.max_epochs < 1) throw ValidationError("max_epochs must be at least 1");
  if (!(settings.learning_rate >= 0.0)) throw ValidationError("learning_rate must be non-negative");

  const auto train_set = labeled_only(train_pairs);
  const auto val_set = labeled_only(val_pairs);
  std::size_t n_pos = 0;
  for (const auto* p : train_set) n_pos += static_cast<std::size_t>(binary_label(p->label));
  if (n_pos == 0 || n_pos == train_set.size()) {
    throw ValidationError("degenerate classes: training pairs need both positives and reliable negatives");
  }

  Model model = initial;
  model.set_dropout(settings.dropout);
  const std::size_t dim = model.input_dim();
  if (settings.standardize_inputs) fit_standardizer(model, train_set, feature_fn);
  Updater updater(model, settings);
  Rng rng(derive_seed(settings.seed, 1));

  std::vector<double> val_labels;
  for (const auto* p : val_set) val_labels.push_back(binary_label(p->label));
  std::vector<corpus::PairInstance> val_copy;
  val_copy.reserve(val_set.size());
  for (const auto* p : val_set) val_copy.push_back(*p);
  std::vector<int> val_int(val_labels.begin(), val_labels.end());

  TrainResult result;
  result.model = model;
  result.best_val_auc = std::numeric_limits<double>::quiet_NaN();
  int epochs_without_gain = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  Eigen::MatrixXd X;
  Eigen::RowVectorXd y;

  for (int epoch = 1; epoch <= settings.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(settings.batch_size), ++batch_index) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(settings.batch_size));
      fill_batch(train_set, std::span<const std::size_t>(order).subspan(start, end - start), dim,
                 feature_fn, X, y);
      const Gradients grads = compute_gradients(model, X, y, weights, true, rng.next());
      check_finite_loss(grads.loss, epoch, batch_index);
      loss_sum += grads.loss * static_cast<double>(end - start);
      updater.apply(model, grads);
      for (const auto& layer : model.layers()) {
        if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
          throw TrainingError("non-finite parameters after epoch " + std::to_string(epoch) +
                              ", batch " + std::to_string(batch_index));
        }
      }
    }
    EpochRecord record{epoch, loss_sum / static_cast<double>(order.size()),
                       std::numeric_limits<double>::quiet_NaN()};
    if (!val_copy.empty()) {
      const auto probs = predict_batch(model, val_copy, feature_fn);
      if (std::any_of(probs.begin(), probs.end(), [](double v) { return std::isnan(v); })) {
        throw TrainingError("non-finite validation predictions at epoch " + std::to_string(epoch));
      }
      if (auto auc = eval::try_roc_auc(probs, val_int)) record.val_auc = *auc;
    }
    result.history.push_back(record);

    if (std::isnan(record.val_auc)) {
      // No usable validation signal: keep the latest parameters.
      result.model = model;
      result.best_epoch = epoch;
      continue;
    }
    if (std::isnan(result.best_val_auc) || record.val_auc > result.best_val_auc) {
      result.best_val_auc = record.val_auc;
      result.best_epoch = epoch;
      result.model = model;
      epochs_without_gain = 0;
    } else if (++epochs_without_gain >= settings.patience) {
      break;
    }
  }
  return result;
}

std::vector<double> predict_batch(const Model& model, std::span<const corpus::PairInstance> pairs,
                                  const features::FeatureFn& feature_fn, std::size_t batch_size) {
  std::vector<double> out(pairs.size());
  const std::size_t dim = model.input_dim();
  Eigen::MatrixXd X;
  for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
    const std::size_t end = std::min(pairs.size(), start + batch_size);
    X.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(end - start));
    for (std::size_t k = start; k < end; ++k) {
      feature_fn(pairs[k], std::span<double>(X.col(static_cast<Eigen::Index>(k - start)).data(), dim));
    }
    const Eigen::RowVectorXd p = forward_batch(model, X);
    for (std::size_t k = start; k < end; ++k) out[k] = p(static_cast<Eigen::Index>(k - start));
  }
  return out;
}

}  // namespace ddi::mlp
