#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "swid/config.hpp"
#include "swid/error.hpp"
#include "swid/harness.hpp"
#include "swid/manifold.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void setup_logging(bool quiet) {
  auto logger = spdlog::stderr_color_mt("swid");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("SWID_LOG")) {
    const std::string v = env;
    if (v == "error") level = spdlog::level::err;
    else if (v == "debug") level = spdlog::level::debug;
    else if (v == "info") level = spdlog::level::info;
  }
  if (quiet) level = spdlog::level::err;
  spdlog::set_level(level);
}

int exit_code_for(const swid::Error& e) {
  switch (e.kind()) {
    case swid::ErrorKind::ConfigInvalid:
    case swid::ErrorKind::IoError:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

int cmd_run(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed) {
  swid::AppConfig cfg = swid::load_config(config);
  if (seed) cfg.run.seed = *seed;
  spdlog::info("running {} steps, seed {}", cfg.run.tau, cfg.run.seed);
  const swid::RunResult result = swid::run_online(cfg);
  const auto& m = result.metrics;
  spdlog::info("{} samples, {} switch events, {} regions discovered{}", result.trace.records.size(), m.switch_events,
               result.trace.discovered, result.trace.reached_origin ? " (state reached the origin)" : "");
  for (const auto& w : result.trace.warnings) spdlog::warn("{}", w);
  spdlog::info("label accuracy {}", swid::format_number(m.label_accuracy));
  for (const auto& [id, err] : m.param_error_final)
    spdlog::info("region {} final parameter error {}", id.value, swid::format_number(err));
  for (const auto& [key, err] : m.slope_errors)
    spdlog::info("manifold {}-{} slope error {}", key.lo.value, key.hi.value, swid::format_number(err));
  for (const auto& [key, svm] : result.trace.manifolds)
    spdlog::debug("pair {}-{}: {} samples, {} supports", key.lo.value, key.hi.value, svm.samples().size(),
                  svm.support_count());
  swid::export_artifacts(result, cfg.model, out);
  spdlog::info("artifacts written to {}", out);
  return 0;
}

int cmd_verify(const std::string& config) {
  const swid::AppConfig cfg = swid::load_config(config);
  std::cout << "ok: n=" << cfg.model.state_dim() << " m=" << cfg.model.input_dim()
            << " regions=" << cfg.model.subsystems().size() << " tau=" << cfg.run.tau << "\n";
  return 0;
}

// Rows of x1,...,xn,label; a non-numeric first line is treated as a header.
int cmd_oracle(const std::string& input, double C) {
  std::ifstream in(input);
  if (!in) throw swid::Error(swid::ErrorKind::IoError, "cannot read " + input);
  std::vector<std::pair<swid::Vector, int>> samples;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string field;
    bool numeric = true;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(field, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw swid::Error(swid::ErrorKind::ConfigInvalid, "non-numeric row: " + line);
    }
    first = false;
    if (vals.size() < 2) throw swid::Error(swid::ErrorKind::ConfigInvalid, "row needs coordinates and a label");
    const int label = vals.back() > 0 ? 1 : -1;
    vals.pop_back();
    if (!samples.empty() && vals.size() != samples.front().first.size())
      throw swid::Error(swid::ErrorKind::ConfigInvalid, "rows differ in dimension");
    samples.emplace_back(swid::Vector(std::move(vals)), label);
  }
  if (samples.empty()) throw swid::Error(swid::ErrorKind::ConfigInvalid, "no samples in " + input);
  swid::KernelConfig cfg;
  cfg.Q = swid::Matrix::identity(samples.front().first.size());
  cfg.C = C;
  cfg.validate();
  const swid::BatchSolution sol = swid::batch_qp_oracle(samples, cfg);
  std::cout << "index,alpha\n";
  for (std::size_t i = 0; i < sol.alpha.size(); ++i) std::cout << i << "," << swid::format_number(sol.alpha[i]) << "\n";
  const swid::Vector w = swid::weight_from_alpha(samples, sol.alpha, cfg.Q);
  std::cout << "# w =";
  for (double v : w.raw()) std::cout << " " << swid::format_number(v);
  std::cout << "\n# multiplier = " << swid::format_number(sol.multiplier) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online identification of switched linear systems"};
  app.require_subcommand(1);
  bool quiet = false;

  std::string config, out, input;
  std::optional<std::uint64_t> seed;
  double C = 1000.0;

  auto* run = app.add_subcommand("run", "simulate, identify and export artifacts");
  run->add_option("--config", config, "JSON config file")->required();
  run->add_option("--out", out, "output directory")->required();
  run->add_option("--seed", seed, "override run.seed");
  run->add_flag("--quiet", quiet, "errors only");

  auto* verify = app.add_subcommand("verify", "validate a config file");
  verify->add_option("--config", config, "JSON config file")->required();

  auto* oracle = app.add_subcommand("oracle-svm", "solve the SVM dual in batch for a CSV of x1..xn,label rows");
  oracle->add_option("--input", input, "CSV file")->required();
  oracle->add_option("--C", C, "box bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  setup_logging(quiet);

  try {
    if (*run) return cmd_run(config, out, seed);
    if (*verify) return cmd_verify(config);
    if (*oracle) return cmd_oracle(input, C);
  } catch (const swid::Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitNumerical;
  }
  return 0;
}
