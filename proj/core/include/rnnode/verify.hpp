#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rnnode/linalg.hpp"
#include "rnnode/network.hpp"
#include "rnnode/odeflow.hpp"
#include "rnnode/time_grid.hpp"

namespace rnnode {

// Comparison of the replicator-side integrations against the direct
// readout softmax(W_y a(t) + b_y) of the integrated hidden flow.
struct EquivalenceReport {
  TimeGrid grid;
  Method method = Method::rk4;
  std::size_t num_inputs = 0;
  // Infinity-norm gap at each grid time, maximised over inputs.
  std::vector<double> per_time_deviation{};
  double sup_deviation = 0.0;
  double mean_deviation = 0.0;  // over all (input, time) pairs
  double simplex_drift_max = 0.0;
  double min_component = 1.0;

  // Invertible-readout form; absent when W_y fails the invertibility test.
  std::optional<double> augmented_sup_deviation{};
  std::vector<double> augmented_per_time_deviation{};
  std::optional<double> readout_rcond{};
  std::string augmented_note{};
};

EquivalenceReport verify_equivalence(const RnnOdeSpec& spec, std::span<const Vector> inputs, const TimeGrid& grid,
                                     Method method, bool include_augmented = true);

// JSON: grid, method, sup_deviation, mean_deviation, simplex_drift_max,
// per_time_deviation_csv_path, plus tolerance/passed and the augmented block.
std::string report_to_json(const EquivalenceReport& report, const std::string& per_time_csv_path,
                           double tolerance);

// "t,deviation[,augmented_deviation]" at 17 significant digits.
void write_deviation_csv(const EquivalenceReport& report, std::ostream& out);
void write_deviation_csv(const EquivalenceReport& report, const std::string& path);

}  // namespace rnnode
