#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ddi/corpus.hpp"
#include "ddi/error.hpp"
#include "ddi/features.hpp"
#include "ddi/random.hpp"
#include "json.hpp"

namespace ddi::mlp {

enum class Optimizer { Adam, SGD };

std::string_view to_string(Optimizer optimizer);
Optimizer parse_optimizer(std::string_view text);

// Raised when training diverges (non-finite loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kLogClamp = 1e-12;

// Unvalidated knobs of the training loop. Config::training() produces them
// from a validated configuration; tests may set them directly (e.g. lr = 0).
struct TrainSettings {
  double learning_rate = 3e-4;
  double dropout = 0.3;
  int batch_size = 64;
  Optimizer optimizer = Optimizer::Adam;
  int max_epochs = 100;
  int patience = 10;
  std::uint64_t seed = 13;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Fit the input standardizer on the training pairs before the first epoch.
  bool standardize_inputs = true;
};

// Hyperparameters of one classifier. The defaults are the tuned configuration
// shipped with the tool: 3 x 192, lr 3e-4, dropout 0.30, batch 64, Adam.
struct Config {
  int hidden_layers = 3;
  int neurons_per_layer = 192;
  double learning_rate = 3e-4;
  double dropout = 0.30;
  int batch_size = 64;
  Optimizer optimizer = Optimizer::Adam;
  int max_epochs = 100;
  int patience = 10;
  std::uint64_t seed = 13;

  // Throws ValidationError when a field leaves its search-space range.
  void validate() const;
  TrainSettings training() const;

  bool operator==(const Config&) const = default;
};

inline constexpr int kHiddenLayerChoices[] = {1, 2, 3, 4, 5};
inline constexpr int kNeuronChoices[] = {64, 96, 128, 192, 256};
inline constexpr int kBatchChoices[] = {32, 64, 128};
inline constexpr double kMinLearningRate = 1e-5;
inline constexpr double kMaxLearningRate = 1e-3;
inline constexpr double kMinDropout = 0.1;
inline constexpr double kMaxDropout = 0.5;

nlohmann::json to_json(const Config& config);
// Missing keys keep their defaults; the result is validated.
Config config_from_json(const nlohmann::json& j, Config base = {});

// Dense layer mapping in -> out: weights is out x in.
struct Layer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

// Feed-forward network: ReLU hidden layers followed by one sigmoid unit.
class Model {
 public:
  Model() = default;
  // All-zero parameters with the given hidden widths.
  Model(std::size_t input_dim, std::span<const std::size_t> hidden_sizes, double dropout = 0.0);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_count() const { return layers_.empty() ? 0 : layers_.size() - 1; }
  double dropout() const { return dropout_; }
  void set_dropout(double p);

  // Hidden layers in order, then the output layer.
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  const Layer& output_layer() const { return layers_.back(); }

  const Config& config() const { return config_; }
  void set_config(const Config& config) { config_ = config; }

  // Fixed affine input map x -> (x - mean) / scale applied before the first
  // layer. Empty vectors mean identity. Scales below 1e-12 are stored as 1.
  void set_input_standardizer(const Eigen::VectorXd& mean, const Eigen::VectorXd& scale);
  bool has_input_standardizer() const { return input_mean_.size() > 0; }
  const Eigen::VectorXd& input_mean() const { return input_mean_; }
  const Eigen::VectorXd& input_scale() const { return input_scale_; }
  // Applies the standardizer (copy of X when there is none).
  Eigen::MatrixXd standardize(const Eigen::MatrixXd& X) const;

  std::size_t parameter_count() const;
  bool operator==(const Model& other) const;

 private:
  std::size_t input_dim_ = 0;
  double dropout_ = 0.0;
  std::vector<Layer> layers_;
  Config config_;
  Eigen::VectorXd input_mean_;
  Eigen::VectorXd input_scale_;
};

// He-normal weights (variance 2 / fan_in), zero biases, seeded by config.seed.
// Throws ValidationError for an invalid config or input_dim == 0.
Model init_model(const Config& config, std::size_t input_dim);

// Single-example forward pass. train_mode applies inverted dropout using rng
// (required in train mode). Returns y_hat in (0, 1).
double forward(const Model& model, std::span<const double> x, bool train_mode = false,
               Rng* rng = nullptr);

// Column-major batch: X is input_dim x batch. Returns probabilities.
Eigen::RowVectorXd forward_batch(const Model& model, const Eigen::MatrixXd& X,
                                 bool train_mode = false, Rng* rng = nullptr);

// Mean over the batch of -[w_pos y log y_hat + w_neg (1 - y) log(1 - y_hat)],
// y_hat clamped to [1e-12, 1 - 1e-12].
double bce_loss(std::span<const double> y_hat, std::span<const double> y,
                double w_pos = 1.0, double w_neg = 1.0);

struct Gradients {
  std::vector<Layer> layers;  // same shapes as Model::layers()
  double loss = 0.0;
};

// Loss (the weighted BCE above, evaluated from logits so it stays exact when
// probabilities saturate) and analytic gradient for one batch. In train mode the dropout masks
// come from Rng(dropout_seed), so repeated calls see identical masks.
Gradients compute_gradients(const Model& model, const Eigen::MatrixXd& X,
                            const Eigen::RowVectorXd& y, const corpus::ClassWeights& weights,
                            bool train_mode = false, std::uint64_t dropout_seed = 0);
double batch_loss(const Model& model, const Eigen::MatrixXd& X, const Eigen::RowVectorXd& y,
                  const corpus::ClassWeights& weights, bool train_mode = false,
                  std::uint64_t dropout_seed = 0);

// Parameter update rules. Adam keeps first/second moments per parameter.
class Updater {
 public:
  Updater(const Model& model, const TrainSettings& settings);
  void apply(Model& model, const Gradients& grads);
  long long steps() const { return step_; }

 private:
  TrainSettings settings_;
  std::vector<Layer> m_;
  std::vector<Layer> v_;
  long long step_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  // NaN when the validation set lacks one of the classes.
  double val_auc = 0.0;
};

struct TrainResult {
  Model model;  // best-validation checkpoint
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_auc = 0.0;  // NaN when never defined
};

// Mini-batch training on positives and reliable negatives (unknown pairs are
// ignored). With standardize_inputs the model's input standardizer is set to
// the per-feature mean and population standard deviation of the training
// pairs. Batches are reshuffled each epoch from settings.seed. Stops after
// `patience` epochs without a validation ROC-AUC gain and returns the best
// checkpoint. Throws ValidationError when a class is missing from the
// training pairs and TrainingError on a non-finite loss.
TrainResult train(const Model& initial, std::span<const corpus::PairInstance> train_pairs,
                  std::span<const corpus::PairInstance> val_pairs,
                  const features::FeatureFn& feature_fn, const corpus::ClassWeights& weights,
                  const TrainSettings& settings);

// Eval-mode probabilities for every pair, in input order.
std::vector<double> predict_batch(const Model& model, std::span<const corpus::PairInstance> pairs,
                                  const features::FeatureFn& feature_fn,
                                  std::size_t batch_size = 256);

// 1 for Positive, 0 for ReliableNegative; throws for Unknown.
int binary_label(corpus::PairLabel label);

// Checkpoint file: JSON with a format tag and version, the config, the input
// dimension, row-major parameters, and caller metadata (feature options).
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  nlohmann::json metadata = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
// Throws ValidationError on a version or format mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);
nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

}  // namespace ddi::mlp
