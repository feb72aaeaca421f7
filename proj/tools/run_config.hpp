#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rnnode::cli {

// Every field optional; unset fields fall back to command-line flags and
// then to built-in defaults. Unknown keys are rejected.
//
// {
//   "arch":  {"state_dim", "hidden_widths", "embed_activation",
//             "hidden_activation", "tau", "n_steps"},
//   "train": {"learning_rate", "epochs", "batch_size", "optimizer",
//             "momentum", "seed", "init_scale", "clip_norm"},
//   "grid":  {"horizon", "step", "method"},
//   "io":    {"data", "model", "history", "report", "deviation_csv"}
// }
struct RunConfig {
  struct Arch {
    std::optional<std::size_t> state_dim;
    std::optional<std::vector<std::size_t>> hidden_widths;
    std::optional<std::string> embed_activation;
    std::optional<std::string> hidden_activation;
    std::optional<double> tau;
    std::optional<std::size_t> n_steps;
  } arch;
  struct Train {
    std::optional<double> learning_rate;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> batch_size;
    std::optional<std::string> optimizer;
    std::optional<double> momentum;
    std::optional<std::uint64_t> seed;
    std::optional<double> init_scale;
    std::optional<double> clip_norm;
  } train;
  struct Grid {
    std::optional<double> horizon;
    std::optional<double> step;
    std::optional<std::string> method;
  } grid;
  struct Io {
    std::optional<std::string> data;
    std::optional<std::string> model;
    std::optional<std::string> history;
    std::optional<std::string> report;
    std::optional<std::string> deviation_csv;
  } io;
};

// Throws rnnode::ConfigError on malformed JSON, unknown keys or wrong types.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

// Flag value if given, else config value, else fallback.
template <typename T>
T resolve(const std::optional<T>& flag, const std::optional<T>& config, T fallback) {
  if (flag) return *flag;
  if (config) return *config;
  return fallback;
}

}  // namespace rnnode::cli
