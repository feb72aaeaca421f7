#include "rnnode/verify.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "json.hpp"
#include "rnnode/errors.hpp"
#include "rnnode/replicator.hpp"

namespace rnnode {

EquivalenceReport verify_equivalence(const RnnOdeSpec& spec, std::span<const Vector> inputs, const TimeGrid& grid,
                                     Method method, bool include_augmented) {
  spec.validate();
  if (inputs.empty()) throw ConfigError("verification needs at least one input");
  EquivalenceReport report{.grid = grid, .method = method};
  report.num_inputs = inputs.size();
  report.per_time_deviation.assign(grid.size(), 0.0);

  std::optional<ReadoutInverse> inverse;
  if (include_augmented) {
    try {
      inverse.emplace(spec.readout);
      report.readout_rcond = inverse->reciprocal_condition();
      report.augmented_per_time_deviation.assign(grid.size(), 0.0);
    } catch (const InvertibilityError& e) {
      report.augmented_note = e.what();
    }
  }

  double total = 0.0;
  for (const Vector& x : inputs) {
    const Trajectory direct = output_trace(spec, hidden_flow(spec, x, grid, method));
    const CascadeRun cascade = integrate_cascade(spec, x, grid, method);
    report.simplex_drift_max = std::max(report.simplex_drift_max, cascade.drift.max_sum_error);
    report.min_component = std::min(report.min_component, cascade.drift.min_component);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double gap = (cascade.output.states[k] - direct.states[k]).cwiseAbs().maxCoeff();
      report.per_time_deviation[k] = std::max(report.per_time_deviation[k], gap);
      total += gap;
    }
    if (inverse) {
      const AugmentedRun aug = integrate_augmented(spec, x, grid, method);
      report.simplex_drift_max = std::max(report.simplex_drift_max, aug.drift.max_sum_error);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double gap = (aug.output.states[k] - cascade.output.states[k]).cwiseAbs().maxCoeff();
        report.augmented_per_time_deviation[k] = std::max(report.augmented_per_time_deviation[k], gap);
      }
    }
  }
  report.sup_deviation = *std::max_element(report.per_time_deviation.begin(), report.per_time_deviation.end());
  report.mean_deviation = total / static_cast<double>(inputs.size() * grid.size());
  if (inverse) {
    report.augmented_sup_deviation = *std::max_element(report.augmented_per_time_deviation.begin(),
                                                       report.augmented_per_time_deviation.end());
  }
  return report;
}

std::string report_to_json(const EquivalenceReport& report, const std::string& per_time_csv_path,
                           double tolerance) {
  using nlohmann::json;
  json doc{
      {"grid",
       {{"t0", 0.0}, {"t_end", report.grid.last_time()}, {"step", report.grid.step()}, {"points", report.grid.size()}}},
      {"method", std::string(to_string(report.method))},
      {"num_inputs", report.num_inputs},
      {"sup_deviation", report.sup_deviation},
      {"mean_deviation", report.mean_deviation},
      {"simplex_drift_max", report.simplex_drift_max},
      {"min_component", report.min_component},
      {"per_time_deviation_csv_path", per_time_csv_path},
      {"tolerance", tolerance},
      {"passed", report.sup_deviation <= tolerance},
  };
  json aug{{"available", report.augmented_sup_deviation.has_value()}};
  if (report.readout_rcond) aug["readout_rcond"] = *report.readout_rcond;
  if (report.augmented_sup_deviation) aug["sup_deviation"] = *report.augmented_sup_deviation;
  if (!report.augmented_note.empty()) aug["note"] = report.augmented_note;
  doc["augmented"] = std::move(aug);
  return doc.dump(2);
}

void write_deviation_csv(const EquivalenceReport& report, std::ostream& out) {
  const bool aug = report.augmented_sup_deviation.has_value();
  out << "t,deviation" << (aug ? ",augmented_deviation" : "") << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < report.per_time_deviation.size(); ++k) {
    out << report.grid.time(k) << ',' << report.per_time_deviation[k];
    if (aug) out << ',' << report.augmented_per_time_deviation[k];
    out << '\n';
  }
}

void write_deviation_csv(const EquivalenceReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  write_deviation_csv(report, out);
}

}  // namespace rnnode
