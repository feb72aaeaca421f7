#include "run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "json.hpp"
#include "rnnode/errors.hpp"

namespace rnnode::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + std::string(section) + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) {
      throw ConfigError("config: unknown key '" + std::string(section) + (section.empty() ? "" : ".") + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  reject_unknown(doc, "", {"arch", "train", "grid", "io"});
  RunConfig cfg;
  try {
    if (doc.contains("arch")) {
      const json& a = doc.at("arch");
      reject_unknown(a, "arch",
                     {"state_dim", "hidden_widths", "embed_activation", "hidden_activation", "tau", "n_steps"});
      read(a, "state_dim", cfg.arch.state_dim);
      read(a, "hidden_widths", cfg.arch.hidden_widths);
      read(a, "embed_activation", cfg.arch.embed_activation);
      read(a, "hidden_activation", cfg.arch.hidden_activation);
      read(a, "tau", cfg.arch.tau);
      read(a, "n_steps", cfg.arch.n_steps);
    }
    if (doc.contains("train")) {
      const json& t = doc.at("train");
      reject_unknown(t, "train",
                     {"learning_rate", "epochs", "batch_size", "optimizer", "momentum", "seed", "init_scale",
                      "clip_norm"});
      read(t, "learning_rate", cfg.train.learning_rate);
      read(t, "epochs", cfg.train.epochs);
      read(t, "batch_size", cfg.train.batch_size);
      read(t, "optimizer", cfg.train.optimizer);
      read(t, "momentum", cfg.train.momentum);
      read(t, "seed", cfg.train.seed);
      read(t, "init_scale", cfg.train.init_scale);
      read(t, "clip_norm", cfg.train.clip_norm);
    }
    if (doc.contains("grid")) {
      const json& g = doc.at("grid");
      reject_unknown(g, "grid", {"horizon", "step", "method"});
      read(g, "horizon", cfg.grid.horizon);
      read(g, "step", cfg.grid.step);
      read(g, "method", cfg.grid.method);
    }
    if (doc.contains("io")) {
      const json& io = doc.at("io");
      reject_unknown(io, "io", {"data", "model", "history", "report", "deviation_csv"});
      read(io, "data", cfg.io.data);
      read(io, "model", cfg.io.model);
      read(io, "history", cfg.io.history);
      read(io, "report", cfg.io.report);
      read(io, "deviation_csv", cfg.io.deviation_csv);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

}  // namespace rnnode::cli
