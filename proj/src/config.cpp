#include "swid/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "swid/error.hpp"

namespace swid {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::ConfigInvalid, key + ": " + what);
}

const json& need(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) bad(path + key, "missing");
  return obj.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

Vector vec(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected a list of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return Vector(std::move(v));
}

// Row-major flat list, or a list of rows.
Matrix mat(const json& j, std::size_t rows, std::size_t cols, const std::string& path) {
  if (!j.is_array()) bad(path, "expected a matrix");
  std::vector<double> flat;
  if (!j.empty() && j[0].is_array()) {
    if (j.size() != rows) bad(path, "expected " + std::to_string(rows) + " rows");
    for (const auto& row : j) {
      const Vector r = vec(row, path);
      if (r.size() != cols) bad(path, "expected " + std::to_string(cols) + " columns");
      flat.insert(flat.end(), r.raw().begin(), r.raw().end());
    }
  } else {
    flat = vec(j, path).raw();
  }
  if (flat.size() != rows * cols)
    bad(path, "expected " + std::to_string(rows * cols) + " entries, got " + std::to_string(flat.size()));
  return Matrix(rows, cols, std::move(flat));
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) bad(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

// Scalar g means g I.
Matrix square_or_scalar(const json& j, std::size_t n, const std::string& path) {
  if (j.is_number()) return Matrix::identity(n) * j.get<double>();
  return mat(j, n, n, path);
}

SwitchedLinearModel parse_model(const json& sys) {
  const std::size_t n = count(need(sys, "n", "system."), "system.n");
  const std::size_t m = count(need(sys, "m", "system."), "system.m");
  if (n == 0 || m == 0) bad("system", "n and m must be positive");
  const json& regions = need(sys, "regions", "system.");
  if (!regions.is_array() || regions.empty()) bad("system.regions", "expected a non-empty list");
  std::vector<Subsystem> subs;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const std::string p = "system.regions[" + std::to_string(i) + "].";
    const json& r = regions[i];
    Subsystem s;
    s.region.id = RegionId{static_cast<int>(i + 1)};
    s.A = mat(need(r, "A", p), n, n, p + "A");
    s.B = mat(need(r, "B", p), n, m, p + "B");
    const json& h = need(r, "H", p);
    if (!h.is_array() || h.empty()) bad(p + "H", "expected a non-empty list of vectors");
    for (std::size_t k = 0; k < h.size(); ++k) s.region.halfspaces.push_back(vec(h[k], p + "H"));
    subs.push_back(std::move(s));
  }
  try {
    return SwitchedLinearModel(n, m, std::move(subs));
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("system: ") + e.what());
  }
}

AppConfig parse(const json& root) {
  if (!root.is_object()) bad("<root>", "expected an object");
  SwitchedLinearModel model = parse_model(need(root, "system", ""));
  const std::size_t n = model.state_dim(), m = model.input_dim();

  const json& r = need(root, "run", "");
  RunConfig run;
  run.x0 = vec(need(r, "x0", "run."), "run.x0");
  run.tau = count(need(r, "tau", "run."), "run.tau");
  run.L = mat(need(r, "L", "run."), m, n, "run.L");
  run.noise_scale = number(need(r, "noise_scale", "run."), "run.noise_scale");
  const json& seed = need(r, "seed", "run.");
  if (!seed.is_number_integer()) bad("run.seed", "expected an integer");
  run.seed = seed.get<std::uint64_t>();
  run.P = square_or_scalar(need(r, "P", "run."), n, "run.P");
  run.lyapunov_epsilon = number(need(r, "lyapunov_epsilon", "run."), "run.lyapunov_epsilon");
  run.validate(model);

  EstimatorConfig est = EstimatorConfig::with_scalar_gain(n, 0.9);
  if (root.contains("estimator")) {
    const json& e = root.at("estimator");
    if (e.contains("gamma")) est.gamma = square_or_scalar(e.at("gamma"), n, "estimator.gamma");
    if (e.contains("sigma")) est.sigma = number(e.at("sigma"), "estimator.sigma");
    if (e.contains("rank_tol")) est.rank_tol = number(e.at("rank_tol"), "estimator.rank_tol");
  }
  est.validate();

  DetectorConfig det;
  if (root.contains("detector")) {
    const json& d = root.at("detector");
    if (d.contains("delta_rel")) det.delta_rel = number(d.at("delta_rel"), "detector.delta_rel");
    if (d.contains("rank_tol")) det.rank_tol = number(d.at("rank_tol"), "detector.rank_tol");
  }
  if (!(det.delta_rel > 0.0)) bad("detector.delta_rel", "must be positive");
  if (!(det.rank_tol > 0.0)) bad("detector.rank_tol", "must be positive");

  KernelConfig ker;
  ker.Q = run.P;
  ker.C = 1000.0;
  if (root.contains("svm")) {
    const json& s = root.at("svm");
    if (s.contains("C")) ker.C = number(s.at("C"), "svm.C");
    if (s.contains("step_delta")) ker.step_delta = number(s.at("step_delta"), "svm.step_delta");
    if (s.contains("alpha_tol_rel")) ker.alpha_tol_rel = number(s.at("alpha_tol_rel"), "svm.alpha_tol_rel");
    if (s.contains("g_tol")) ker.g_tol = number(s.at("g_tol"), "svm.g_tol");
    if (s.contains("max_iterations")) ker.max_iterations = count(s.at("max_iterations"), "svm.max_iterations");
  }
  ker.validate();

  return AppConfig{std::move(model), std::move(run), std::move(est), det, std::move(ker)};
}

}  // namespace

AppConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("parse error: ") + e.what());
  }
  try {
    return parse(root);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, e.what());
  }
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace swid
