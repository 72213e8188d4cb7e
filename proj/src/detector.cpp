#include "swid/detector.hpp"

#include "swid/error.hpp"

namespace swid {

double decision_lambda(const RegionEstimator& est, const Vector& d_k, const Vector& x_next, double rank_tol) {
  if (!est.ready())
    throw Error(ErrorKind::NotReady, "region " + std::to_string(est.region().value) + " has no full stack yet");
  if (d_k.size() != est.regressor_dim() || x_next.size() != est.state_dim())
    throw Error(ErrorKind::DimensionMismatch, "decision variable: regressor or successor dimension");
  const Vector coeff = solve(est.data_stack(), d_k, rank_tol);
  Vector r = est.phi_hat() * d_k - x_next - est.residual_stack() * coeff;
  return r.norm();
}

RegionId SwitchDetector::discover(EstimatorMap& estimators) {
  const RegionId id{++discovered_};
  estimators.insert_or_assign(id, RegionEstimator(id, n_, m_));
  return id;
}

Classification SwitchDetector::classify(EstimatorMap& estimators, const Vector& d_k, const Vector& x_next) {
  const std::size_t k = trace_.size();
  Classification out;
  out.delta = cfg_.delta_rel * x_next.norm();

  if (!prev_label_) {
    // Nothing is identified yet; the initial region receives id 1.
    out.label = discover(estimators);
    out.created_region = true;
  } else {
    identified_.clear();
    for (const auto& [id, est] : estimators)
      if (est.ready()) {
        identified_.insert(id);
        out.lambdas.emplace(id, decision_lambda(est, d_k, x_next, cfg_.rank_tol));
      }

    const RegionId prev = *prev_label_;
    const auto prev_lambda = out.lambdas.find(prev);
    std::optional<RegionId> chosen;
    if (prev_lambda != out.lambdas.end() && prev_lambda->second < out.delta) {
      chosen = prev;
    } else {
      for (const auto& [id, lambda] : out.lambdas)
        if (lambda < out.delta) {
          chosen = id;
          break;
        }
    }
    if (!chosen && prev_lambda == out.lambdas.end()) {
      // The previous region is still filling its stack and no identified
      // region explains the transition: stay.
      chosen = prev;
    }
    if (!chosen) {
      chosen = discover(estimators);
      out.created_region = true;
    }
    out.label = *chosen;
    if (out.label != prev) out.event = SwitchEvent{out.label, prev, k};
  }

  prev_label_ = out.label;
  trace_.emplace_back(k, out.label);
  return out;
}

}  // namespace swid
