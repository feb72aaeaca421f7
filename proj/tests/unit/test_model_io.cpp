#include <gtest/gtest.h>

#include <rnnode/errors.hpp>
#include <rnnode/model_io.hpp>
#include <rnnode/network.hpp>

#include <filesystem>
#include <string>

#include <json.hpp>
#include <unistd.h>

#include "test_specs.hpp"

using namespace rnnode;
using nlohmann::json;

namespace {

void expect_same(const RnnOdeSpec& a, const RnnOdeSpec& b) {
  EXPECT_EQ(a.embed.weights, b.embed.weights);
  EXPECT_EQ(a.embed.bias, b.embed.bias);
  EXPECT_EQ(a.embed.activation, b.embed.activation);
  ASSERT_EQ(a.hidden.layers.size(), b.hidden.layers.size());
  for (std::size_t k = 0; k < a.hidden.layers.size(); ++k) {
    EXPECT_EQ(a.hidden.layers[k].weights, b.hidden.layers[k].weights);
    EXPECT_EQ(a.hidden.layers[k].bias, b.hidden.layers[k].bias);
    EXPECT_EQ(a.hidden.layers[k].activation, b.hidden.layers[k].activation);
  }
  EXPECT_EQ(a.readout.weights, b.readout.weights);
  EXPECT_EQ(a.readout.bias, b.readout.bias);
  EXPECT_EQ(a.tau, b.tau);
  EXPECT_EQ(a.horizon, b.horizon);
  EXPECT_EQ(a.n_steps, b.n_steps);
}

}  // namespace

TEST(ModelJson, RoundTripIsBitExact) {
  RnnOdeSpec spec = rnnode::testing::random_spec(3, 4, 5, 12, {7, 2}, 2.5);
  spec.hidden.layers[1].activation = Activation::relu;
  expect_same(spec, model_from_json(model_to_json(spec)));
}

TEST(ModelJson, FileRoundTrip) {
  const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 1);
  const auto path = std::filesystem::temp_directory_path() / ("rnnode_model_" + std::to_string(::getpid()) + ".json");
  save_model(spec, path);
  expect_same(spec, load_model(path));
  std::filesystem::remove(path);
}

TEST(ModelJson, LayoutIsRowMajorNestedArrays) {
  RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 1);
  const json doc = json::parse(model_to_json(spec));
  EXPECT_EQ(doc.at("format_version"), kModelFormatVersion);
  EXPECT_EQ(doc.at("embed").at("weights").size(), 3u);
  EXPECT_EQ(doc.at("embed").at("weights")[0].size(), 2u);
  EXPECT_EQ(doc.at("embed").at("weights")[1][0].get<double>(), spec.embed.weights(1, 0));
  EXPECT_EQ(doc.at("readout").at("activation"), "softmax");
  EXPECT_EQ(doc.at("n_steps"), 50);
}

TEST(ModelJson, RejectsBadDocuments) {
  const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 1);
  const json good = json::parse(model_to_json(spec));

  EXPECT_THROW(model_from_json("{not json"), FormatError);

  json no_version = good;
  no_version.erase("format_version");
  EXPECT_THROW(model_from_json(no_version.dump()), FormatError);

  json future = good;
  future["format_version"] = 2;
  EXPECT_THROW(model_from_json(future.dump()), FormatError);

  json ragged = good;
  ragged["embed"]["weights"][1].push_back(0.5);
  EXPECT_THROW(model_from_json(ragged.dump()), FormatError);

  json bad_tau = good;
  bad_tau["tau"] = 0.3;
  EXPECT_THROW(model_from_json(bad_tau.dump()), Error);

  json mismatched = good;
  mismatched["readout"]["weights"] = json::array({json::array({1.0, 2.0})});
  EXPECT_THROW(model_from_json(mismatched.dump()), Error);
}

TEST(ModelJson, MissingFile) {
  EXPECT_THROW(load_model("/nonexistent/model.json"), FormatError);
}
