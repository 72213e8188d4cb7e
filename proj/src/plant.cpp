#include "swid/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "swid/error.hpp"

namespace swid {

namespace {

constexpr double kMembershipRel = 1e-12;  // strict test tolerance, relative to |x||h|
constexpr double kCoverageRel = 1e-9;     // how far outside every cone a point may be

std::string id_str(RegionId id) { return std::to_string(id.value); }

}  // namespace

double Region::worst_margin(const Vector& x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const Vector& h : halfspaces) worst = std::max(worst, dot(x, h) / h.norm());
  return worst;
}

SwitchedLinearModel::SwitchedLinearModel(std::size_t n, std::size_t m, std::vector<Subsystem> subsystems)
    : n_(n), m_(m), subsystems_(std::move(subsystems)) {
  if (n_ == 0) throw Error(ErrorKind::ConfigInvalid, "state dimension must be positive");
  if (subsystems_.empty()) throw Error(ErrorKind::ConfigInvalid, "model has no regions");
  std::set<RegionId> seen;
  for (const Subsystem& s : subsystems_) {
    if (!seen.insert(s.region.id).second)
      throw Error(ErrorKind::ConfigInvalid, "duplicate region id " + id_str(s.region.id));
    if (s.A.rows() != n_ || s.A.cols() != n_)
      throw Error(ErrorKind::DimensionMismatch, "A of region " + id_str(s.region.id) + " is not n x n");
    if (s.B.rows() != n_ || s.B.cols() != m_)
      throw Error(ErrorKind::DimensionMismatch, "B of region " + id_str(s.region.id) + " is not n x m");
    if (s.region.halfspaces.empty())
      throw Error(ErrorKind::ConfigInvalid, "region " + id_str(s.region.id) + " has no manifolds");
    for (const Vector& h : s.region.halfspaces) {
      if (h.size() != n_)
        throw Error(ErrorKind::DimensionMismatch, "manifold vector of region " + id_str(s.region.id));
      if (h.max_abs() == 0.0)
        throw Error(ErrorKind::ConfigInvalid, "zero manifold vector in region " + id_str(s.region.id));
    }
  }
}

const Subsystem& SwitchedLinearModel::subsystem(RegionId id) const {
  for (const Subsystem& s : subsystems_)
    if (s.region.id == id) return s;
  throw Error(ErrorKind::NoRegion, "unknown region id " + id_str(id));
}

Matrix SwitchedLinearModel::parameters(RegionId id) const {
  const Subsystem& s = subsystem(id);
  Matrix phi(n_, n_ + m_);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t c = 0; c < n_; ++c) phi(r, c) = s.A(r, c);
    for (std::size_t c = 0; c < m_; ++c) phi(r, n_ + c) = s.B(r, c);
  }
  return phi;
}

RegionId SwitchedLinearModel::region_of(const Vector& x) const {
  if (x.size() != n_) throw Error(ErrorKind::DimensionMismatch, "region_of: state dimension");
  const double norm = x.norm();
  if (!(norm > std::numeric_limits<double>::min()))
    throw Error(ErrorKind::AtOrigin, "state is at the origin");

  const Subsystem* strict = nullptr;
  int strict_count = 0;
  const Subsystem* best = nullptr;
  double best_margin = std::numeric_limits<double>::infinity();
  for (const Subsystem& s : subsystems_) {
    const double margin = s.region.worst_margin(x);
    if (margin < -kMembershipRel * norm) {
      strict = &s;
      ++strict_count;
    }
    if (margin < best_margin) {
      best_margin = margin;
      best = &s;
    }
  }
  if (strict_count == 1) return strict->region.id;
  if (best_margin > kCoverageRel * norm)
    throw Error(ErrorKind::NoRegion, "state lies outside every region");
  return best->region.id;
}

Vector SwitchedLinearModel::step(const Vector& x, const Vector& u) const {
  if (u.size() != m_) throw Error(ErrorKind::DimensionMismatch, "step: input dimension");
  const Subsystem& s = subsystem(region_of(x));
  return s.A * x + s.B * u;
}

const Vector* SwitchedLinearModel::shared_manifold(RegionId a, RegionId b) const {
  const Subsystem& sa = subsystem(a);
  const Subsystem& sb = subsystem(b);
  for (const Vector& ha : sa.region.halfspaces)
    for (const Vector& hb : sb.region.halfspaces)
      if ((ha + hb).max_abs() <= 1e-12 * ha.max_abs()) return &ha;
  return nullptr;
}

void RunConfig::validate(const SwitchedLinearModel& model) const {
  const std::size_t n = model.state_dim();
  const std::size_t m = model.input_dim();
  if (x0.size() != n) throw Error(ErrorKind::ConfigInvalid, "run.x0 must have n entries");
  if (!x0.all_finite()) throw Error(ErrorKind::ConfigInvalid, "run.x0 not finite");
  if (tau < 1) throw Error(ErrorKind::ConfigInvalid, "run.tau must be >= 1");
  if (L.rows() != m || L.cols() != n) throw Error(ErrorKind::ConfigInvalid, "run.L must be m x n");
  if (!(noise_scale >= 0.0)) throw Error(ErrorKind::ConfigInvalid, "run.noise_scale must be >= 0");
  if (P.rows() != n || P.cols() != n || !is_positive_definite(P))
    throw Error(ErrorKind::ConfigInvalid, "run.P must be symmetric positive definite n x n");
  if (!(lyapunov_epsilon > 0.0 && lyapunov_epsilon < 1.0))
    throw Error(ErrorKind::ConfigInvalid, "run.lyapunov_epsilon must lie in (0,1)");
}

double GaussianSource::uniform_open() {
  // 53 random bits mapped into (0, 1).
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double GaussianSource::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Trajectory simulate(const SwitchedLinearModel& model, const RunConfig& cfg) {
  cfg.validate(model);
  const std::size_t n = model.state_dim();
  const std::size_t m = model.input_dim();
  GaussianSource noise(cfg.seed);
  const double origin = kOriginRel * cfg.x0.norm();

  Trajectory traj;
  traj.samples.reserve(cfg.tau);
  Vector x = cfg.x0;
  for (std::size_t k = 0; k < cfg.tau; ++k) {
    if (x.norm() < origin) {
      traj.reached_origin = true;
      break;
    }
    Matrix gain = cfg.L;
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) gain(r, c) += cfg.noise_scale * noise.next();
    Vector u = gain * x;
    const RegionId region = model.region_of(x);
    const Subsystem& s = model.subsystem(region);
    Vector next = s.A * x + s.B * u;
    traj.samples.push_back({std::move(x), std::move(u), region});
    x = std::move(next);
  }
  if (!traj.reached_origin && x.norm() < origin) traj.reached_origin = true;
  traj.final_state = std::move(x);
  return traj;
}

}  // namespace swid
