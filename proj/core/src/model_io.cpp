#include "rnnode/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rnnode/errors.hpp"

namespace rnnode {
namespace {

using nlohmann::json;

json layer_to_json(const LayerParams& layer) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) row.push_back(layer.weights(i, j));
    rows.push_back(std::move(row));
  }
  json bias = json::array();
  for (Eigen::Index i = 0; i < layer.bias.size(); ++i) bias.push_back(layer.bias(i));
  return json{{"activation", std::string(to_string(layer.activation))},
              {"weights", std::move(rows)},
              {"bias", std::move(bias)}};
}

LayerParams layer_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": layer must be an object");
  for (const char* key : {"activation", "weights", "bias"}) {
    if (!j.contains(key)) throw FormatError(where + ": missing '" + key + "'");
  }
  const json& rows = j.at("weights");
  const json& bias = j.at("bias");
  if (!rows.is_array() || rows.empty() || !bias.is_array()) {
    throw FormatError(where + ": weights must be a non-empty nested array and bias an array");
  }
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = rows.front().is_array() ? rows.front().size() : 0;
  LayerParams layer;
  layer.activation = activation_from_string(j.at("activation").get<std::string>());
  layer.weights.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (!rows[r].is_array() || rows[r].size() != n_cols) {
      throw FormatError(where + ": weight row " + std::to_string(r) + " is ragged");
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c].get<double>();
    }
  }
  layer.bias.resize(static_cast<Eigen::Index>(bias.size()));
  for (std::size_t i = 0; i < bias.size(); ++i) {
    layer.bias(static_cast<Eigen::Index>(i)) = bias[i].get<double>();
  }
  return layer;
}

}  // namespace

std::string model_to_json(const RnnOdeSpec& spec) {
  json hidden = json::array();
  for (const auto& layer : spec.hidden.layers) hidden.push_back(layer_to_json(layer));
  const json doc{{"format_version", kModelFormatVersion},
                 {"tau", spec.tau},
                 {"horizon", spec.horizon},
                 {"n_steps", spec.n_steps},
                 {"embed", layer_to_json(spec.embed)},
                 {"hidden", std::move(hidden)},
                 {"readout", layer_to_json(spec.readout)}};
  return doc.dump(1);
}

RnnOdeSpec model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("format_version")) {
      throw FormatError("model JSON: missing format_version");
    }
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw FormatError("model JSON: unsupported format_version " + std::to_string(version));
    }
    RnnOdeSpec spec;
    spec.tau = doc.at("tau").get<double>();
    spec.horizon = doc.at("horizon").get<double>();
    spec.n_steps = doc.at("n_steps").get<std::size_t>();
    spec.embed = layer_from_json(doc.at("embed"), "embed");
    const json& hidden = doc.at("hidden");
    if (!hidden.is_array()) throw FormatError("model JSON: hidden must be an array of layers");
    for (std::size_t k = 0; k < hidden.size(); ++k) {
      spec.hidden.layers.push_back(layer_from_json(hidden[k], "hidden[" + std::to_string(k) + "]"));
    }
    spec.readout = layer_from_json(doc.at("readout"), "readout");
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
}

void save_model(const RnnOdeSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out << model_to_json(spec) << '\n';
  if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

RnnOdeSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

}  // namespace rnnode
