#include "swid/estimator.hpp"

#include "swid/error.hpp"

namespace swid {

EstimatorConfig EstimatorConfig::with_scalar_gain(std::size_t n, double g, double sigma) {
  return {Matrix::identity(n) * g, sigma, kDefaultRankTol};
}

void EstimatorConfig::validate() const {
  if (!gamma.square() || gamma.rows() == 0)
    throw Error(ErrorKind::ConfigInvalid, "estimator gamma must be square");
  if (!(sigma > 0.0 && sigma < 1.0)) throw Error(ErrorKind::ConfigInvalid, "estimator sigma must lie in (0,1)");
  if (!(rank_tol > 0.0)) throw Error(ErrorKind::ConfigInvalid, "estimator rank_tol must be positive");
  if (!is_positive_definite(gamma)) throw Error(ErrorKind::ConfigInvalid, "estimator gamma must be positive definite");
  const Matrix shifted = gamma - Matrix::identity(gamma.rows());
  const Matrix margin = Matrix::identity(gamma.rows()) * sigma - shifted * shifted;
  if (!is_positive_definite(margin))
    throw Error(ErrorKind::ConfigInvalid, "estimator gain violates (Gamma - I)^2 < sigma I");
}

RegionEstimator::RegionEstimator(RegionId region, std::size_t n, std::size_t m)
    : region_(region), n_(n), m_(m), phi_hat_(n, n + m), D_(n + m, n + m), X_(n, n + m) {}

void RegionEstimator::set_phi_hat(Matrix phi) {
  if (phi.rows() != n_ || phi.cols() != n_ + m_)
    throw Error(ErrorKind::DimensionMismatch, "phi_hat must be n x (n+m)");
  phi_hat_ = std::move(phi);
}

void RegionEstimator::push(const Vector& d_prev, const Vector& x_next, double rank_tol) {
  if (d_prev.size() != n_ + m_ || x_next.size() != n_)
    throw Error(ErrorKind::DimensionMismatch, "stack push: regressor or successor dimension");
  D_ += Matrix::outer(d_prev, d_prev);
  X_ += Matrix::outer(x_next, d_prev);
  ++count_;
  // D only gains rank, so readiness is sticky.
  if (!ready_ && rank(D_, rank_tol) == n_ + m_) {
    ready_ = true;
    ready_at_ = count_;
  }
}

Matrix RegionEstimator::residual_stack() const { return phi_hat_ * D_ - X_; }

bool RegionEstimator::update(const EstimatorConfig& cfg) {
  if (!ready_) return false;
  if (cfg.gamma.rows() != n_) throw Error(ErrorKind::DimensionMismatch, "estimator gamma must be n x n");
  phi_hat_ -= cfg.gamma * estimation_error(cfg.rank_tol);
  ++updates_;
  return true;
}

Matrix RegionEstimator::estimation_error(double rank_tol) const {
  if (!ready_) throw Error(ErrorKind::Singular, "history stack of region " + std::to_string(region_.value) + " not ready");
  return residual_stack() * invert(D_, rank_tol);
}

Vector RegionEstimator::stack_prediction(const Vector& d, double rank_tol) const {
  if (!ready_) throw Error(ErrorKind::NotReady, "history stack of region " + std::to_string(region_.value) + " not ready");
  return X_ * solve(D_, d, rank_tol);
}

double lyapunov_value(const Matrix& error, const Matrix& gamma) {
  return 0.5 * (error.transpose() * invert(gamma) * error).trace();
}

}  // namespace swid
