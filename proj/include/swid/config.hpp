#pragma once

#include <filesystem>
#include <string>

#include "swid/detector.hpp"
#include "swid/estimator.hpp"
#include "swid/manifold.hpp"
#include "swid/plant.hpp"

namespace swid {

/// Everything one online run needs, parsed from a single JSON document.
struct AppConfig {
  SwitchedLinearModel model;
  RunConfig run;
  EstimatorConfig estimator;
  DetectorConfig detector;
  KernelConfig kernel;  // Q is taken from run.P
};

/// Throws ConfigInvalid (malformed or inconsistent content) or IoError.
AppConfig load_config(const std::filesystem::path& path);
AppConfig parse_config(const std::string& text);

}  // namespace swid
