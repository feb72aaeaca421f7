#pragma once

#include <filesystem>
#include <string>

#include "rnnode/network.hpp"

namespace rnnode {

inline constexpr int kModelFormatVersion = 1;

// JSON document: {"format_version", "tau", "horizon", "n_steps",
// "embed", "hidden": [layers...], "readout"}, each layer being
// {"activation", "weights": [[row-major]], "bias": [...]}. Doubles are
// written in shortest round-trip form so save/load is lossless.
std::string model_to_json(const RnnOdeSpec& spec);
RnnOdeSpec model_from_json(const std::string& text);

void save_model(const RnnOdeSpec& spec, const std::filesystem::path& path);
RnnOdeSpec load_model(const std::filesystem::path& path);

}  // namespace rnnode
