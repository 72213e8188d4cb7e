#include "swid/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>

#include <json.hpp>

#include "swid/error.hpp"

namespace swid {

namespace {

using nlohmann::ordered_json;

constexpr double kConvergedNorm = 1e-6;

std::optional<double> param_error(const StepRecord& r, RegionId region, const LabelMatch& match,
                                  const SwitchedLinearModel& model) {
  const auto phi = r.phi_hat.find(region);
  const auto truth = match.mapping.find(region);
  if (phi == r.phi_hat.end() || truth == match.mapping.end()) return std::nullopt;
  return (phi->second - model.parameters(truth->second)).frobenius_norm();
}

std::optional<double> pair_slope_error(const Vector& w, const PairKey& pair, const LabelMatch& match,
                                       const SwitchedLinearModel& model) {
  const auto a = match.mapping.find(pair.lo);
  const auto b = match.mapping.find(pair.hi);
  if (a == match.mapping.end() || b == match.mapping.end()) return std::nullopt;
  const Vector* h = model.shared_manifold(a->second, b->second);
  if (!h) return std::nullopt;
  try {
    return slope_error(w, *h);
  } catch (const Error&) {
    return std::nullopt;
  }
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(m.row(r).raw());
  return rows;
}

std::string pair_name(const PairKey& p) { return std::to_string(p.lo.value) + "-" + std::to_string(p.hi.value); }

const char* set_name(SampleSet s) {
  switch (s) {
    case SampleSet::Support: return "S";
    case SampleSet::Bounded: return "B";
    case SampleSet::NonSupport: return "O";
    case SampleSet::Pseudo: return "pseudo";
    case SampleSet::Pending: return "pending";
  }
  return "?";
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << body;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunResult run_online(const AppConfig& cfg) {
  const SwitchedLinearModel& model = cfg.model;
  const Trajectory traj = simulate(model, cfg.run);

  RunResult result;
  RunTrace& trace = result.trace;
  trace.n = model.state_dim();
  trace.m = model.input_dim();
  trace.reached_origin = traj.reached_origin;

  SwitchDetector detector(cfg.detector, trace.n, trace.m);
  ManifoldRegistry registry(cfg.kernel);
  EstimatorMap& estimators = trace.estimators;

  const std::size_t T = traj.samples.size();
  trace.records.reserve(T);
  for (std::size_t k = 0; k < T; ++k) {
    const PlantSample& s = traj.samples[k];
    const Vector& x_next = k + 1 < T ? traj.samples[k + 1].x : traj.final_state;
    try {
      const Vector d_k = concat(s.x, s.u);
      if (k > 0 && s.true_region != traj.samples[k - 1].true_region) {
        const RegionEstimator& left = estimators.at(trace.records.back().label);
        if (!left.ready())
          trace.warnings.push_back("step " + std::to_string(k) + ": region " +
                                   std::to_string(traj.samples[k - 1].true_region.value) + " exited after " +
                                   std::to_string(left.count()) + " samples, before its stack was ready");
      }
      Classification cls = detector.classify(estimators, d_k, x_next);
      RegionEstimator& est = estimators.at(cls.label);
      est.push(d_k, x_next, cfg.estimator.rank_tol);
      est.update(cfg.estimator);
      if (cls.event) {
        trace.events.push_back(*cls.event);
        registry.select_training_pair(cls.event->new_region, cls.event->old_region, s.x, traj.samples[k - 1].x);
      }

      StepRecord rec;
      rec.k = k;
      rec.x = s.x;
      rec.u = s.u;
      rec.true_region = s.true_region;
      rec.label = cls.label;
      rec.lambdas = std::move(cls.lambdas);
      for (const auto& [id, e] : estimators) {
        rec.phi_hat.emplace(id, e.phi_hat());
        rec.updates.emplace(id, e.updates());
      }
      for (const auto& [key, svm] : registry.pairs()) {
        try {
          rec.weights.emplace(key, svm.weight_vector());
        } catch (const Error&) {
        }
      }
      trace.records.push_back(std::move(rec));
    } catch (const Error& e) {
      throw Error(e.kind(), "step " + std::to_string(k) + ": " + e.what());
    }
  }
  trace.manifolds = registry.pairs();
  trace.discovered = detector.discovered_count();
  result.metrics = compute_metrics(trace, model);
  return result;
}

LabelMatch match_labels(const std::vector<StepRecord>& records) {
  LabelMatch best;
  if (records.empty()) return best;
  std::set<RegionId> found, truth;
  for (const auto& r : records) {
    found.insert(r.label);
    truth.insert(r.true_region);
  }
  const std::vector<RegionId> ds(found.begin(), found.end());
  const std::vector<RegionId> ts(truth.begin(), truth.end());
  std::map<std::pair<RegionId, RegionId>, std::size_t> hits;
  for (const auto& r : records) ++hits[{r.label, r.true_region}];

  std::size_t best_hits = 0;
  bool have = false;
  std::map<RegionId, RegionId> current;
  std::vector<bool> used(ts.size(), false);
  std::function<void(std::size_t, std::size_t)> search = [&](std::size_t i, std::size_t acc) {
    if (i == ds.size()) {
      if (!have || acc > best_hits) {
        have = true;
        best_hits = acc;
        best.mapping = current;
      }
      return;
    }
    for (std::size_t t = 0; t < ts.size(); ++t) {
      if (used[t]) continue;
      used[t] = true;
      current[ds[i]] = ts[t];
      const auto h = hits.find({ds[i], ts[t]});
      search(i + 1, acc + (h == hits.end() ? 0 : h->second));
      current.erase(ds[i]);
      used[t] = false;
    }
    // More discovered ids than true ones: leave this one unmapped.
    if (ds.size() - i > ts.size() - std::count(used.begin(), used.end(), true)) search(i + 1, acc);
  };
  search(0, 0);

  for (const auto& r : records) {
    const auto it = best.mapping.find(r.label);
    if (it == best.mapping.end() || it->second != r.true_region) best.mislabeled.push_back(r.k);
  }
  best.accuracy = static_cast<double>(best_hits) / static_cast<double>(records.size());
  return best;
}

Metrics compute_metrics(const RunTrace& trace, const SwitchedLinearModel& model) {
  Metrics m;
  m.match = match_labels(trace.records);
  m.label_accuracy = m.match.accuracy;
  m.switch_events = trace.events.size();

  for (const auto& [id, est] : trace.estimators) {
    m.convergence_step[id] = std::nullopt;
    m.updates_to_converge[id] = std::nullopt;
    m.ready_step[id] = std::nullopt;
  }
  for (const auto& r : trace.records) {
    for (const auto& [id, count] : r.updates) {
      if (count > 0 && !m.ready_step[id]) m.ready_step[id] = r.k;
      if (m.convergence_step[id]) continue;
      const auto err = param_error(r, id, m.match, model);
      if (err && *err < kConvergedNorm) {
        m.convergence_step[id] = r.k;
        m.updates_to_converge[id] = count;
      }
    }
  }
  if (!trace.records.empty()) {
    const StepRecord& last = trace.records.back();
    for (const auto& [id, phi] : last.phi_hat)
      if (const auto err = param_error(last, id, m.match, model)) m.param_error_final[id] = *err;
  }
  for (const auto& [key, svm] : trace.manifolds) {
    Vector w;
    try {
      w = svm.weight_vector();
    } catch (const Error&) {
      continue;
    }
    if (const auto e = pair_slope_error(w, key, m.match, model))
      m.slope_errors[PairKey::of(m.match.mapping.at(key.lo), m.match.mapping.at(key.hi))] = *e;
  }
  return m;
}

void export_artifacts(const RunResult& result, const SwitchedLinearModel& model, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  const RunTrace& trace = result.trace;
  const Metrics& metrics = result.metrics;
  const std::size_t n = trace.n, m = trace.m;
  const int R = trace.discovered;

  std::string csv = "k";
  for (std::size_t i = 1; i <= n; ++i) csv += ",x" + std::to_string(i);
  for (std::size_t i = 1; i <= m; ++i) csv += ",u" + std::to_string(i);
  csv += ",true_region,label";
  for (int r = 1; r <= R; ++r) csv += ",lambda_" + std::to_string(r);
  for (int r = 1; r <= R; ++r) csv += ",param_err_" + std::to_string(r);
  csv += "\n";
  std::string params = "k";
  for (int r = 1; r <= R; ++r) params += ",param_err_" + std::to_string(r);
  params += "\n";
  std::string slopes = "k";
  for (const auto& [key, svm] : trace.manifolds)
    slopes += ",slope_" + std::to_string(key.lo.value) + "_" + std::to_string(key.hi.value);
  slopes += "\n";

  for (const StepRecord& rec : trace.records) {
    csv += std::to_string(rec.k);
    for (std::size_t i = 0; i < n; ++i) csv += "," + format_number(rec.x[i]);
    for (std::size_t i = 0; i < m; ++i) csv += "," + format_number(rec.u[i]);
    csv += "," + std::to_string(rec.true_region.value) + "," + std::to_string(rec.label.value);
    std::string errs;
    for (int r = 1; r <= R; ++r) {
      const auto it = rec.lambdas.find(RegionId{r});
      csv += "," + cell(it == rec.lambdas.end() ? std::nullopt : std::optional<double>(it->second));
      errs += "," + cell(param_error(rec, RegionId{r}, metrics.match, model));
    }
    csv += errs + "\n";
    params += std::to_string(rec.k) + errs + "\n";
    slopes += std::to_string(rec.k);
    for (const auto& [key, svm] : trace.manifolds) {
      const auto w = rec.weights.find(key);
      slopes += "," + cell(w == rec.weights.end() ? std::nullopt : pair_slope_error(w->second, key, metrics.match, model));
    }
    slopes += "\n";
  }

  ordered_json est = ordered_json::object();
  est["regions"] = ordered_json::array();
  for (const auto& [id, e] : trace.estimators) {
    const Matrix& phi = e.phi_hat();
    Matrix A(n, n), B(n, m);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) A(r, c) = phi(r, c);
      for (std::size_t c = 0; c < m; ++c) B(r, c) = phi(r, n + c);
    }
    ordered_json j;
    j["id"] = id.value;
    const auto t = metrics.match.mapping.find(id);
    j["true_region"] = t == metrics.match.mapping.end() ? ordered_json() : ordered_json(t->second.value);
    j["A"] = matrix_json(A);
    j["B"] = matrix_json(B);
    j["samples"] = e.count();
    j["updates"] = e.updates();
    j["ready_at_sample"] = e.ready_at() ? ordered_json(*e.ready_at()) : ordered_json();
    est["regions"].push_back(j);
  }

  ordered_json man = ordered_json::object();
  man["pairs"] = ordered_json::array();
  for (const auto& [key, svm] : trace.manifolds) {
    ordered_json j;
    j["regions"] = {key.lo.value, key.hi.value};
    ordered_json orient = ordered_json::object();
    for (const auto& [id, l] : svm.orientation()) orient[std::to_string(id.value)] = l;
    j["orientation"] = orient;
    std::optional<double> err;
    try {
      const Vector w = svm.weight_vector();
      j["w"] = w.raw();
      err = pair_slope_error(w, key, metrics.match, model);
    } catch (const Error&) {
      j["w"] = ordered_json();
    }
    j["slope_error"] = err ? ordered_json(*err) : ordered_json();
    j["training_samples"] = svm.samples().size();
    ordered_json sv = ordered_json::array();
    for (const auto& s : svm.samples())
      if (s.set == SampleSet::Support || s.set == SampleSet::Bounded)
        sv.push_back({{"x", s.x.raw()}, {"label", s.label}, {"alpha", s.alpha}, {"set", set_name(s.set)}});
    j["support_vectors"] = sv;
    ordered_json ps = ordered_json::array();
    for (const auto& s : svm.pseudo()) ps.push_back({{"x", s.x.raw()}, {"label", s.label}});
    j["pseudo_vectors"] = ps;
    man["pairs"].push_back(j);
  }

  ordered_json met = ordered_json::object();
  met["steps"] = trace.records.size();
  met["reached_origin"] = trace.reached_origin;
  met["label_accuracy"] = metrics.label_accuracy;
  ordered_json mapping = ordered_json::object();
  for (const auto& [d, t] : metrics.match.mapping) mapping[std::to_string(d.value)] = t.value;
  met["label_map"] = mapping;
  met["mislabeled_steps"] = metrics.match.mislabeled;
  met["switch_events"] = metrics.switch_events;
  ordered_json se = ordered_json::object();
  for (const auto& [key, v] : metrics.slope_errors) se[pair_name(key)] = v;
  met["slope_errors"] = se;
  auto per_region = [](const auto& map) {
    ordered_json j = ordered_json::object();
    for (const auto& [id, v] : map) {
      if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>)
        j[std::to_string(id.value)] = v;
      else
        j[std::to_string(id.value)] = v ? ordered_json(*v) : ordered_json();
    }
    return j;
  };
  met["param_error_final"] = per_region(metrics.param_error_final);
  met["ready_step"] = per_region(metrics.ready_step);
  met["convergence_step"] = per_region(metrics.convergence_step);
  met["updates_to_converge"] = per_region(metrics.updates_to_converge);

  write_file(out_dir / "trace.csv", csv);
  write_file(out_dir / "err_params.csv", params);
  write_file(out_dir / "err_slopes.csv", slopes);
  write_file(out_dir / "estimates.json", est.dump(2) + "\n");
  write_file(out_dir / "manifolds.json", man.dump(2) + "\n");
  write_file(out_dir / "metrics.json", met.dump(2) + "\n");
}

}  // namespace swid
