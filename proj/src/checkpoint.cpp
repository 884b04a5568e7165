#include <fstream>

#include "ddi/mlp.hpp"

namespace ddi::mlp {

namespace {

constexpr const char* kFormat = "ddi-mlp";

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw ValidationError("checkpoint: weight matrix has the wrong number of rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError("checkpoint: weight matrix has the wrong number of columns");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint) {
  const Model& model = checkpoint.model;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers()) {
    std::vector<double> bias(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"rows", l.weights.rows()},
                      {"cols", l.weights.cols()},
                      {"weights", matrix_json(l.weights)},
                      {"bias", bias}});
  }
  return {{"format", kFormat},
          {"version", kCheckpointVersion},
          {"config", to_json(model.config())},
          {"input_dim", model.input_dim()},
          {"dropout", model.dropout()},
          {"layers", std::move(layers)},
          {"input_mean", std::vector<double>(model.input_mean().data(),
                                             model.input_mean().data() + model.input_mean().size())},
          {"input_scale", std::vector<double>(model.input_scale().data(),
                                              model.input_scale().data() + model.input_scale().size())},
          {"metadata", checkpoint.metadata}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", std::string()) != kFormat) {
      throw ValidationError("checkpoint: not a ddi-mlp model file");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ValidationError("checkpoint: unsupported version " + std::to_string(version) +
                            " (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    const auto input_dim = j.at("input_dim").get<std::size_t>();
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.empty()) throw ValidationError("checkpoint: no layers");

    std::vector<std::size_t> hidden;
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
      hidden.push_back(layers[i].at("rows").get<std::size_t>());
    }
    Checkpoint out;
    out.model = Model(input_dim, hidden, j.at("dropout").get<double>());
    out.model.set_config(config_from_json(j.at("config")));
    auto& target = out.model.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& lj = layers[i];
      const auto rows = target[i].weights.rows();
      const auto cols = target[i].weights.cols();
      if (lj.at("rows").get<Eigen::Index>() != rows || lj.at("cols").get<Eigen::Index>() != cols) {
        throw ValidationError("checkpoint: layer " + std::to_string(i) + " shape mismatch");
      }
      target[i].weights = matrix_from_json(lj.at("weights"), rows, cols);
      const auto bias = lj.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(bias.size()) != rows) {
        throw ValidationError("checkpoint: layer " + std::to_string(i) + " bias length mismatch");
      }
      target[i].bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), rows);
    }
    const auto mean = j.value("input_mean", std::vector<double>{});
    const auto scale = j.value("input_scale", std::vector<double>{});
    if (mean.size() != scale.size()) throw ValidationError("checkpoint: standardizer size mismatch");
    out.model.set_input_standardizer(
        Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size())),
        Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size())));
    out.metadata = j.value("metadata", nlohmann::json::object());
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint: malformed model file: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  // max_digits10 via dump keeps doubles round-trip exact.
  out << checkpoint_to_json(checkpoint).dump() << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace ddi::mlp
