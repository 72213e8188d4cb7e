#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swid/config.hpp"
#include "swid/detector.hpp"
#include "swid/estimator.hpp"
#include "swid/manifold.hpp"
#include "swid/numerics.hpp"
#include "swid/plant.hpp"

namespace swid {

struct StepRecord {
  std::size_t k = 0;
  Vector x;
  Vector u;
  RegionId true_region;
  RegionId label;
  std::map<RegionId, double> lambdas;
  std::map<RegionId, Matrix> phi_hat;  // every discovered region, after this step's update
  std::map<RegionId, std::size_t> updates;
  std::map<PairKey, Vector> weights;  // pairs with a defined w after this step
};

struct LabelMatch {
  std::map<RegionId, RegionId> mapping;  // discovered -> true
  double accuracy = 0.0;
  std::vector<std::size_t> mislabeled;  // k of every mismatch under the mapping
};

struct Metrics {
  double label_accuracy = 0.0;
  LabelMatch match;
  std::map<PairKey, double> slope_errors;  // keyed by true region ids
  std::map<RegionId, double> param_error_final;
  std::map<RegionId, std::optional<std::size_t>> convergence_step;
  /// Updates applied to the region up to and including its convergence step.
  std::map<RegionId, std::optional<std::size_t>> updates_to_converge;
  std::map<RegionId, std::optional<std::size_t>> ready_step;
  std::size_t switch_events = 0;
};

struct RunTrace {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<StepRecord> records;
  bool reached_origin = false;
  std::vector<SwitchEvent> events;
  EstimatorMap estimators;
  std::map<PairKey, PairSvm> manifolds;
  int discovered = 0;
  /// True-region exits that happened before the labeled stack was ready.
  std::vector<std::string> warnings;
};

struct RunResult {
  RunTrace trace;
  Metrics metrics;
};

/// Simulates the configured plant and runs detection, estimation and
/// manifold learning over it one sample at a time. Module failures are
/// rethrown with the step index in the message.
RunResult run_online(const AppConfig& cfg);

/// Best injective mapping of discovered ids onto true ids by brute force.
LabelMatch match_labels(const std::vector<StepRecord>& records);

Metrics compute_metrics(const RunTrace& trace, const SwitchedLinearModel& model);

/// Writes trace.csv, estimates.json, manifolds.json, metrics.json,
/// err_params.csv and err_slopes.csv. Throws IoError.
void export_artifacts(const RunResult& result, const SwitchedLinearModel& model, const std::filesystem::path& out_dir);

/// %.17g
std::string format_number(double v);

}  // namespace swid
