#pragma once

#include <cstddef>
#include <optional>

#include "swid/numerics.hpp"
#include "swid/plant.hpp"

namespace swid {

struct EstimatorConfig {
  Matrix gamma;          // n x n gain
  double sigma = 0.5;    // decay bound, (Gamma - I)^2 < sigma I
  double rank_tol = kDefaultRankTol;

  static EstimatorConfig with_scalar_gain(std::size_t n, double g, double sigma = 0.5);

  /// Throws ConfigInvalid unless Gamma is positive definite and
  /// sigma I - (Gamma - I)^2 is positive definite.
  void validate() const;
};

/// Concurrent-learning estimate of one region's [A B].
///
/// The data stack D = sum d d^T and cross-moment X = sum x_next d^T are kept;
/// the residual stack is derived as R = phi_hat D - X so it always refers to
/// the current estimate.
class RegionEstimator {
 public:
  RegionEstimator(RegionId region, std::size_t n, std::size_t m);

  RegionId region() const noexcept { return region_; }
  std::size_t state_dim() const noexcept { return n_; }
  std::size_t regressor_dim() const noexcept { return n_ + m_; }

  const Matrix& phi_hat() const noexcept { return phi_hat_; }
  const Matrix& data_stack() const noexcept { return D_; }
  const Matrix& cross_stack() const noexcept { return X_; }
  std::size_t count() const noexcept { return count_; }
  bool ready() const noexcept { return ready_; }
  /// Sample count at which D first became nonsingular.
  std::optional<std::size_t> ready_at() const noexcept { return ready_at_; }
  std::size_t updates() const noexcept { return updates_; }

  void set_phi_hat(Matrix phi);

  /// Absorbs the transition (d_prev -> x_next).
  void push(const Vector& d_prev, const Vector& x_next, double rank_tol = kDefaultRankTol);

  /// R = phi_hat D - X.
  Matrix residual_stack() const;

  /// phi_hat -= Gamma R D^{-1} once ready; otherwise a no-op. Returns true
  /// when an update was applied.
  bool update(const EstimatorConfig& cfg);

  /// R D^{-1}, the estimation error implied by the stacks. Throws Singular
  /// before the stack is ready.
  Matrix estimation_error(double rank_tol = kDefaultRankTol) const;

  /// X D^{-1} d, the one-step prediction the stacks support for regressor d.
  Vector stack_prediction(const Vector& d, double rank_tol = kDefaultRankTol) const;

 private:
  RegionId region_;
  std::size_t n_;
  std::size_t m_;
  Matrix phi_hat_;
  Matrix D_;
  Matrix X_;
  std::size_t count_ = 0;
  bool ready_ = false;
  std::optional<std::size_t> ready_at_;
  std::size_t updates_ = 0;
};

/// 1/2 tr(E^T Gamma^{-1} E)
double lyapunov_value(const Matrix& error, const Matrix& gamma);

}  // namespace swid
