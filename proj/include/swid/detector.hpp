#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "swid/estimator.hpp"
#include "swid/numerics.hpp"
#include "swid/plant.hpp"

namespace swid {

using EstimatorMap = std::map<RegionId, RegionEstimator>;

/// |phi_hat d - x_next - R D^{-1} d|. Throws NotReady before the stack is full.
double decision_lambda(const RegionEstimator& est, const Vector& d_k, const Vector& x_next,
                       double rank_tol = kDefaultRankTol);

struct SwitchEvent {
  RegionId new_region;
  RegionId old_region;
  std::size_t k = 0;  // index of the first sample carrying new_region
};

struct Classification {
  RegionId label;
  std::optional<SwitchEvent> event;
  std::map<RegionId, double> lambdas;  // ready regions only
  double delta = 0.0;
  bool created_region = false;
};

struct DetectorConfig {
  /// Threshold is delta_rel * |x_next|.
  double delta_rel = 1e-6;
  double rank_tol = kDefaultRankTol;
};

/// Online switching detector. Labels x_k when x_{k+1} arrives, creating
/// fresh stacks for newly discovered regions. Calls must come in sample order.
class SwitchDetector {
 public:
  SwitchDetector(DetectorConfig cfg, std::size_t n, std::size_t m) : cfg_(cfg), n_(n), m_(m) {}

  Classification classify(EstimatorMap& estimators, const Vector& d_k, const Vector& x_next);

  const DetectorConfig& config() const noexcept { return cfg_; }
  int discovered_count() const noexcept { return discovered_; }
  const std::set<RegionId>& identified() const noexcept { return identified_; }
  std::optional<RegionId> previous_label() const noexcept { return prev_label_; }
  const std::vector<std::pair<std::size_t, RegionId>>& label_trace() const noexcept { return trace_; }

 private:
  RegionId discover(EstimatorMap& estimators);

  DetectorConfig cfg_;
  std::size_t n_;
  std::size_t m_;
  int discovered_ = 0;
  std::set<RegionId> identified_;
  std::optional<RegionId> prev_label_;
  std::vector<std::pair<std::size_t, RegionId>> trace_;
};

}  // namespace swid
