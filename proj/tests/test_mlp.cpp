#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "ddi/mlp.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ddi::mlp;
using ddi::corpus::PairInstance;
using ddi::corpus::PairLabel;

namespace {

// Eight pairs embedded at fixed 2-d points; positives have x + y > 0.
struct Separable {
  std::vector<PairInstance> pairs;
  std::map<std::string, std::array<double, 2>> points;

  Separable() {
    const std::array<std::array<double, 2>, 8> xy{
        {{1.0, 0.5}, {0.8, 1.2}, {2.0, -0.5}, {0.3, 0.9}, {-1.0, -0.4}, {-0.7, -1.1}, {0.2, -1.5}, {-2.0, 0.6}}};
    for (std::size_t i = 0; i < xy.size(); ++i) {
      const std::string b = "B" + std::to_string(i);
      pairs.push_back({"A", b, xy[i][0] + xy[i][1] > 0 ? PairLabel::Positive : PairLabel::ReliableNegative});
      points[b] = xy[i];
    }
  }

  ddi::features::FeatureFn fn() const {
    return [this](const PairInstance& p, std::span<double> out) {
      const auto& xy = points.at(p.drug_b);
      out[0] = xy[0];
      out[1] = xy[1];
    };
  }
};

TrainSettings quick_settings() {
  TrainSettings s;
  s.learning_rate = 0.01;
  s.dropout = 0.0;
  s.batch_size = 8;
  s.max_epochs = 300;
  s.patience = 300;
  s.seed = 3;
  return s;
}

Model small_model(std::size_t input_dim, std::uint64_t seed = 1) {
  Config c;
  c.hidden_layers = 1;
  c.neurons_per_layer = 64;
  c.seed = seed;
  return init_model(c, input_dim);
}

}  // namespace

TEST(MlpConfig, ValidatesSearchSpaceRanges) {
  Config c;
  EXPECT_NO_THROW(c.validate());
  c.dropout = 0.7;
  EXPECT_THROW(c.validate(), ddi::ValidationError);
  c = {};
  c.neurons_per_layer = 100;
  EXPECT_THROW(init_model(c, 4), ddi::ValidationError);
  c = {};
  c.learning_rate = 0.01;
  EXPECT_THROW(c.validate(), ddi::ValidationError);
  c = {};
  c.hidden_layers = 6;
  EXPECT_THROW(c.validate(), ddi::ValidationError);
}

TEST(MlpConfig, JsonRoundTrip) {
  Config c;
  c.hidden_layers = 2;
  c.learning_rate = 1.5e-4;
  c.optimizer = Optimizer::SGD;
  EXPECT_EQ(config_from_json(to_json(c)), c);
  EXPECT_THROW(config_from_json({{"batch_size", 48}}), ddi::ValidationError);
}

TEST(InitModel, ShapesFollowConfig) {
  Config c;  // 3 x 192
  const auto m = init_model(c, 1025);
  ASSERT_EQ(m.layers().size(), 4u);
  EXPECT_EQ(m.layers()[0].weights.rows(), 192);
  EXPECT_EQ(m.layers()[0].weights.cols(), 1025);
  EXPECT_EQ(m.layers()[1].weights.rows(), 192);
  EXPECT_EQ(m.layers()[2].weights.cols(), 192);
  EXPECT_EQ(m.output_layer().weights.rows(), 1);
  EXPECT_EQ(m.output_layer().weights.cols(), 192);
  EXPECT_TRUE(m.layers()[0].bias.isZero());
}

TEST(InitModel, DeterministicAndHeScaled) {
  Config c;
  c.hidden_layers = 1;
  c.neurons_per_layer = 256;
  const auto a = init_model(c, 400);
  EXPECT_TRUE(a == init_model(c, 400));
  c.seed = 14;
  EXPECT_FALSE(a == init_model(c, 400));
  const auto& w = a.layers()[0].weights;
  const double var = w.array().square().mean() - std::pow(w.mean(), 2);
  EXPECT_NEAR(var, 2.0 / 400.0, 0.05 * 2.0 / 400.0);
}

TEST(Forward, ZeroWeightsGiveOneHalf) {
  const std::vector<std::size_t> hidden{3, 2};
  const Model m(4, hidden);
  const std::vector<double> x{1, -2, 3, 4};
  EXPECT_EQ(forward(m, x), 0.5);
}

TEST(Forward, ReluKillsNegativeSignal) {
  const std::vector<std::size_t> hidden{1};
  Model m(1, hidden);
  m.layers()[0].weights(0, 0) = 1.0;
  m.layers().back().weights(0, 0) = 1.0;
  EXPECT_EQ(forward(m, std::vector<double>{-3.0}), 0.5);
  EXPECT_EQ(forward(m, std::vector<double>{2.0}), 1.0 / (1.0 + std::exp(-2.0)));
}

TEST(Forward, DimensionMismatchAndTrainModeNeedsRng) {
  const std::vector<std::size_t> hidden{2};
  const Model m(3, hidden, 0.5);
  EXPECT_THROW(forward(m, std::vector<double>{1.0}), ddi::ValidationError);
  EXPECT_THROW(forward(m, std::vector<double>{1, 2, 3}, true, nullptr), ddi::ValidationError);
}

TEST(Forward, EvalIsDeterministic) {
  ddi::Rng rng(8);
  const auto m = oracle::random_model(rng, 0.4);
  std::vector<double> x(m.input_dim(), 0.7);
  EXPECT_EQ(forward(m, x), forward(m, x));
}

TEST(Forward, InvertedDropoutPreservesExpectation) {
  // One hidden layer with a linear readout: E[train logit] == eval logit.
  const std::vector<std::size_t> hidden{6};
  Model m(2, hidden, 0.3);
  ddi::Rng init(2);
  for (auto& l : m.layers()) {
    for (Eigen::Index i = 0; i < l.weights.size(); ++i) l.weights.data()[i] = std::abs(init.normal());
  }
  const std::vector<double> x{0.5, 1.0};
  auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  ddi::Rng rng(5);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += logit(forward(m, x, true, &rng));
  const double eval = logit(forward(m, x));
  EXPECT_NEAR(sum / n, eval, 0.01 * std::abs(eval));
}

TEST(BceLoss, HandValues) {
  const std::vector<double> half{0.5}, one{1.0}, zero{0.0}, y1{1.0};
  EXPECT_NEAR(bce_loss(half, y1), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_loss(half, y1, 2.0, 1.0), 2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_loss(one, y1), 0.0, 1e-11);
  EXPECT_TRUE(std::isfinite(bce_loss(zero, y1)));
  EXPECT_NEAR(bce_loss(zero, y1), -std::log(1e-12), 1e-9);
  EXPECT_THROW(bce_loss(half, std::vector<double>{}), ddi::ValidationError);
}

TEST(Gradients, MatchFiniteDifferencesEvalMode) {
  ddi::Rng rng(21);
  int checked = 0;
  while (checked < 40) {
    const auto m = oracle::random_model(rng);
    const Eigen::Index batch = 1 + static_cast<Eigen::Index>(rng.below(5));
    Eigen::MatrixXd X(static_cast<Eigen::Index>(m.input_dim()), batch);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
    if (oracle::min_abs_preactivation(m, X) < 0.05) continue;
    Eigen::RowVectorXd y(batch);
    for (Eigen::Index i = 0; i < batch; ++i) y(i) = static_cast<double>(rng.below(2));
    const ddi::corpus::ClassWeights w{0.5 + rng.uniform() * 3.0, 1.0};
    const auto r = oracle::check_gradients(m, X, y, w, false, 0);
    EXPECT_LT(r.rel_error, 1e-6);
    EXPECT_LT(r.max_component_rel_error, 1e-6);
    EXPECT_LT(r.max_abs_error, 1e-9);
    ++checked;
  }
}

TEST(Gradients, MatchFiniteDifferencesWithDropoutMasks) {
  ddi::Rng rng(22);
  int checked = 0;
  while (checked < 20) {
    const auto m = oracle::random_model(rng, 0.3);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(m.input_dim()), 3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
    if (oracle::min_abs_preactivation(m, X) < 0.05) continue;
    const Eigen::RowVectorXd y = (Eigen::RowVectorXd(3) << 1, 0, 1).finished();
    const auto r = oracle::check_gradients(m, X, y, {2.0, 1.0}, true, 77 + checked);
    EXPECT_LT(r.rel_error, 1e-6);
    EXPECT_LT(r.max_component_rel_error, 1e-6);
    ++checked;
  }
}

TEST(Updater, ZeroGradientLeavesAdamParametersAlone) {
  ddi::Rng rng(4);
  auto m = oracle::random_model(rng);
  const Model before = m;
  Gradients g;
  for (const auto& l : m.layers()) {
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  Updater u(m, TrainSettings{});
  for (int i = 0; i < 3; ++i) u.apply(m, g);
  EXPECT_TRUE(m == before);
  EXPECT_EQ(u.steps(), 3);
}

TEST(Updater, SgdStepIsLrTimesGradient) {
  const std::vector<std::size_t> hidden{1};
  Model m(1, hidden);
  Gradients g;
  g.layers = {{Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, -1.0)},
              {Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::VectorXd::Constant(1, 0.0)}};
  TrainSettings s;
  s.optimizer = Optimizer::SGD;
  s.learning_rate = 0.1;
  Updater u(m, s);
  u.apply(m, g);
  EXPECT_DOUBLE_EQ(m.layers()[0].weights(0, 0), -0.2);
  EXPECT_DOUBLE_EQ(m.layers()[0].bias(0), 0.1);
  EXPECT_DOUBLE_EQ(m.output_layer().weights(0, 0), -0.05);
}

TEST(Train, SeparableToySet) {
  const Separable data;
  auto s = quick_settings();
  s.standardize_inputs = false;
  const auto r = train(small_model(2), data.pairs, data.pairs, data.fn(), {1.0, 1.0}, s);
  ASSERT_GE(r.history.size(), 5u);
  for (std::size_t e = 1; e < 5; ++e) EXPECT_LT(r.history[e].train_loss, r.history[e - 1].train_loss);
  EXPECT_LT(r.history.back().train_loss, 0.1 * r.history.front().train_loss);
  // The kept model is the first with perfect validation ranking.
  const auto probs = predict_batch(r.model, data.pairs, data.fn());
  std::vector<int> labels;
  for (const auto& p : data.pairs) labels.push_back(p.label == PairLabel::Positive ? 1 : 0);
  EXPECT_EQ(oracle::brute_auc(probs, labels), 1.0);
  EXPECT_EQ(r.best_val_auc, 1.0);
}

TEST(Train, ZeroLearningRateChangesNothing) {
  const Separable data;
  auto s = quick_settings();
  s.learning_rate = 0.0;
  s.max_epochs = 1;
  s.standardize_inputs = false;
  const auto initial = small_model(2);
  const auto r = train(initial, data.pairs, data.pairs, data.fn(), {1.0, 1.0}, s);
  EXPECT_TRUE(r.model.layers()[0].weights == initial.layers()[0].weights);
  EXPECT_TRUE(r.model.output_layer().bias == initial.output_layer().bias);
}

TEST(Train, DeterministicHistory) {
  const Separable data;
  auto s = quick_settings();
  s.dropout = 0.3;
  s.max_epochs = 20;
  const auto a = train(small_model(2), data.pairs, data.pairs, data.fn(), {1.0, 1.0}, s);
  const auto b = train(small_model(2), data.pairs, data.pairs, data.fn(), {1.0, 1.0}, s);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].val_auc, b.history[i].val_auc);
  }
  EXPECT_TRUE(a.model == b.model);
}

TEST(Train, EarlyStopsAfterPatience) {
  const Separable data;
  auto s = quick_settings();
  s.patience = 3;
  const auto r = train(small_model(2), data.pairs, data.pairs, data.fn(), {1.0, 1.0}, s);
  // Validation AUC saturates at 1, so training stops 3 epochs after the best.
  EXPECT_EQ(static_cast<int>(r.history.size()), r.best_epoch + 3);
}

TEST(Train, StandardizerFitsTrainingMoments) {
  const Separable data;
  auto s = quick_settings();
  s.max_epochs = 1;
  const auto r = train(small_model(2), data.pairs, data.pairs, data.fn(), {1.0, 1.0}, s);
  ASSERT_TRUE(r.model.has_input_standardizer());
  double mean_x = 0.0;
  for (const auto& [id, xy] : data.points) mean_x += xy[0] / 8.0;
  EXPECT_NEAR(r.model.input_mean()(0), mean_x, 1e-15);
}

TEST(Train, RejectsDegenerateClasses) {
  Separable data;
  for (auto& p : data.pairs) p.label = PairLabel::Positive;
  EXPECT_THROW(train(small_model(2), data.pairs, data.pairs, data.fn(), {1.0, 1.0}, quick_settings()),
               ddi::ValidationError);
}

TEST(Train, DivergenceRaisesTrainingError) {
  const Separable data;
  auto s = quick_settings();
  s.optimizer = Optimizer::SGD;
  s.learning_rate = 1.0;
  s.standardize_inputs = false;
  // Inputs near 1e155: one step pushes the weights to the same scale, after
  // which the logits overflow.
  const ddi::features::FeatureFn huge = [&](const PairInstance& p, std::span<double> out) {
    data.fn()(p, out);
    for (double& v : out) v *= 1e155;
  };
  EXPECT_THROW(train(small_model(2), data.pairs, data.pairs, huge, {1.0, 1.0}, s), TrainingError);
  const ddi::features::FeatureFn nan = [](const PairInstance&, std::span<double> out) {
    std::fill(out.begin(), out.end(), std::nan(""));
  };
  EXPECT_THROW(train(small_model(2), data.pairs, data.pairs, nan, {1.0, 1.0}, s), TrainingError);
}

TEST(PredictBatch, RangeDuplicatesAndSwapInvariance) {
  fixture::TempDir dir;
  const auto p = fixture::write_toy(dir.path());
  const std::array<fixture::fs::path, 2> emb{p.mol2vec, p.smilesbert};
  const auto catalog = ddi::corpus::load_catalog(p.drugs, emb, p.profiles);
  const ddi::features::PairFeaturizer fz(catalog, {});
  const auto m = small_model(fz.input_dim(), 9);
  const std::vector<PairInstance> pairs{{"D1", "D2"}, {"D2", "D1"}, {"D1", "D2"}, {"D4", "D6"}};
  const auto probs = predict_batch(m, pairs, fz.lazy(), 2);
  for (double v : probs) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_EQ(probs[0], probs[1]);
  EXPECT_EQ(probs[0], probs[2]);
  const std::vector<PairInstance> bad{{"D1", "nope"}};
  EXPECT_THROW(predict_batch(m, bad, fz.lazy()), ddi::ValidationError);
}

TEST(Checkpoint, RoundTripIsExact) {
  fixture::TempDir dir;
  const Separable data;
  auto s = quick_settings();
  s.max_epochs = 3;
  const auto r = train(small_model(2), data.pairs, data.pairs, data.fn(), {1.0, 1.0}, s);
  const Checkpoint ck{r.model, {{"note", "x"}}};
  save_checkpoint(dir / "m.json", ck);
  const auto loaded = load_checkpoint(dir / "m.json");
  EXPECT_TRUE(loaded.model == r.model);
  EXPECT_EQ(loaded.metadata["note"], "x");
  EXPECT_EQ(predict_batch(loaded.model, data.pairs, data.fn()), predict_batch(r.model, data.pairs, data.fn()));
}

TEST(Checkpoint, RejectsVersionAndShapeMismatch) {
  const std::vector<std::size_t> hidden{2};
  auto j = checkpoint_to_json({Model(3, hidden), {}});
  j["version"] = kCheckpointVersion + 1;
  EXPECT_THROW(checkpoint_from_json(j), ddi::ValidationError);
  j = checkpoint_to_json({Model(3, hidden), {}});
  j["layers"][0]["weights"][0].erase(0);
  EXPECT_THROW(checkpoint_from_json(j), ddi::ValidationError);
  j = checkpoint_to_json({Model(3, hidden), {}});
  j["format"] = "other";
  EXPECT_THROW(checkpoint_from_json(j), ddi::ValidationError);
  fixture::TempDir dir;
  fixture::write(dir / "bad.json", "{");
  EXPECT_THROW(load_checkpoint(dir / "bad.json"), ddi::ValidationError);
}
