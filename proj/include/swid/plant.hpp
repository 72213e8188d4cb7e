#pragma once

#include <compare>
#include <cstdint>
#include <random>
#include <vector>

#include "swid/numerics.hpp"

namespace swid {

/// 1-based region identifier. Plant regions and detector-discovered regions
/// share the type but not the numbering.
struct RegionId {
  int value = 0;
  friend auto operator<=>(const RegionId&, const RegionId&) = default;
};

/// Open polyhedral cone { x : x.h < 0 for all h in halfspaces }.
struct Region {
  RegionId id;
  std::vector<Vector> halfspaces;

  /// Largest normalized inner product x.h/|h|; negative iff x is strictly inside.
  double worst_margin(const Vector& x) const;
};

struct Subsystem {
  Region region;
  Matrix A;  // n x n
  Matrix B;  // n x m
};

class SwitchedLinearModel {
 public:
  /// Throws DimensionMismatch on inconsistent shapes and ConfigInvalid on
  /// duplicate ids or zero manifold vectors.
  SwitchedLinearModel(std::size_t n, std::size_t m, std::vector<Subsystem> subsystems);

  std::size_t state_dim() const noexcept { return n_; }
  std::size_t input_dim() const noexcept { return m_; }
  const std::vector<Subsystem>& subsystems() const noexcept { return subsystems_; }
  const Subsystem& subsystem(RegionId id) const;

  /// [A B] for the region, n x (n+m).
  Matrix parameters(RegionId id) const;

  /// Region containing x. Points on a shared manifold go to the region whose
  /// worst margin is smallest. Throws AtOrigin or NoRegion.
  RegionId region_of(const Vector& x) const;

  /// A^i x + B^i u for the region containing x.
  Vector step(const Vector& x, const Vector& u) const;

  /// Coefficient vector h of the manifold shared by regions a and b (h in
  /// H^a with -h in H^b), if any.
  const Vector* shared_manifold(RegionId a, RegionId b) const;

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<Subsystem> subsystems_;
};

struct RunConfig {
  Vector x0;
  std::size_t tau = 1;
  Matrix L;                 // m x n feedback gain
  double noise_scale = 0;   // std dev of each entry of the gain perturbation
  std::uint64_t seed = 0;
  Matrix P;                 // Lyapunov / kernel metric
  double lyapunov_epsilon = 0.99;

  /// Throws ConfigInvalid when an invariant fails for the given model.
  void validate(const SwitchedLinearModel& model) const;
};

/// Standard normal draws from mt19937_64 through the Box-Muller transform.
/// Both steps are fully specified, so streams match across platforms
/// (std::normal_distribution is implementation-defined).
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform_open();
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct PlantSample {
  Vector x;
  Vector u;
  RegionId true_region;
};

struct Trajectory {
  std::vector<PlantSample> samples;  // x_0 .. x_{T-1} with their inputs
  Vector final_state;                // x_T
  bool reached_origin = false;
};

/// Closed-loop run with u_k = (L + eps_k) x_k. Stops early once
/// |x_k| < origin_rel * |x0|.
inline constexpr double kOriginRel = 1e-12;
Trajectory simulate(const SwitchedLinearModel& model, const RunConfig& cfg);

}  // namespace swid
