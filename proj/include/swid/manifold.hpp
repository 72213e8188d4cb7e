#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "swid/numerics.hpp"
#include "swid/plant.hpp"

namespace swid {

struct KernelConfig {
  Matrix Q;                    // symmetric positive definite metric
  double C = 1000.0;           // box bound on every alpha
  /// Fixed alpha increment per inner iteration; 0 selects event-driven
  /// stepping (jump straight to the next migration).
  double step_delta = 0.0;
  double alpha_tol_rel = 1e-9;  // alpha saturation tolerance, relative to C
  double g_tol = 1e-9;          // margin tolerance
  std::size_t max_iterations = 100000;

  double alpha_tol() const noexcept { return alpha_tol_rel * C; }
  void validate() const;
};

/// x^T Q y
double kernel_eval(const KernelConfig& cfg, const Vector& x, const Vector& y);

enum class SampleSet { Support, Bounded, NonSupport, Pseudo, Pending };

struct TrainingSample {
  Vector x;
  int label = 1;  // +1 or -1
  double alpha = 0.0;
  double g = 0.0;  // KKT margin, see PairSvm
  SampleSet set = SampleSet::NonSupport;
};

/// Residuals of the optimality conditions over the settled samples.
struct KktReport {
  double equality_residual = 0.0;  // |sum l alpha|
  bool box_ok = true;
  bool trichotomy_ok = true;
  double worst_violation = 0.0;
  bool ok(double eq_tol) const { return box_ok && trichotomy_ok && equality_residual <= eq_tol; }
};

struct LearnReport {
  std::size_t iterations = 0;
  std::size_t migrations = 0;
  std::size_t prunes = 0;
  bool parked = false;
};

struct InvarianceDiagnostic {
  double lambda_min = 0.0;  // smallest eigenvalue of the support kernel matrix
  double bound = 0.0;       // C sqrt(eps)^t / (1 - sqrt(eps)) sqrt(kappa0 / lambda_min)
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  std::optional<double> norm_ratio;  // |sigma|_inf / |sigma|_2 of the latest sample
  bool guaranteed = false;
};

/// Incremental linear-kernel SVM separating two regions.
///
/// Optimality is kept for min 1/2 a^T Xi a - sum a subject to sum l a = 0
/// and 0 <= a <= C. The stored margin of sample i is
///   g_i = l_i (w^T x_i + nu) - 1,  w = sum a_j l_j Q x_j,
/// where nu is the multiplier of the equality constraint. The discriminant
/// exported as the manifold estimate is w^T x alone; nu never enters it.
class PairSvm {
 public:
  using Observer = std::function<void(const PairSvm&)>;

  PairSvm(std::pair<RegionId, RegionId> pair, std::map<RegionId, int> orientation, KernelConfig cfg);

  const std::pair<RegionId, RegionId>& pair() const noexcept { return pair_; }
  const std::map<RegionId, int>& orientation() const noexcept { return orientation_; }
  const KernelConfig& kernel() const noexcept { return cfg_; }
  const std::vector<TrainingSample>& samples() const noexcept { return samples_; }
  const std::vector<TrainingSample>& pseudo() const noexcept { return pseudo_; }
  const std::vector<TrainingSample>& parked() const noexcept { return parked_; }
  double multiplier() const noexcept { return nu_; }
  bool trained() const noexcept { return !samples_.empty(); }

  /// Inserts one sample and re-tunes until every sample satisfies the KKT
  /// conditions again. Throws SingularSystem or NonConvergence.
  LearnReport learn(const Vector& x, int label);

  /// Demotes supports whose kernel columns are dependent (without moving w
  /// or any margin), then rebuilds pseudo supports so that the label-scaled
  /// support matrix reaches rank n. Throws CannotComplete while w is undefined.
  std::size_t prune_supports();

  /// sum alpha l Q x over real samples. Throws Undefined when every alpha is 0.
  Vector weight_vector() const;
  /// label * w^T x - 1. Throws Undefined when w is.
  double g_value(const Vector& x, int label) const;

  KktReport kkt_report() const;
  std::size_t support_count() const;
  /// Rank of [l_s x_s] over supports, optionally with pseudo supports.
  std::size_t support_rank(bool include_pseudo) const;
  /// True when the bordered support system can be solved.
  bool bordered_nonsingular() const;

  InvarianceDiagnostic check_invariance(double kappa0, double epsilon, std::size_t t) const;

  /// Replaces the training state wholesale without re-tuning; margins are
  /// recomputed and pseudo supports dropped. Used for checkpoints and tests.
  void restore(std::vector<TrainingSample> samples, double nu);

  /// Called after every inner iteration of learn().
  void set_observer(Observer obs) { observer_ = std::move(obs); }

 private:
  std::vector<std::size_t> support_indices() const;
  Matrix bordered_matrix(const std::vector<std::size_t>& s) const;
  double kernel(std::size_t i, std::size_t j) const;
  void initialize_from_parked();
  void insert(const Vector& x, int label, LearnReport& report);
  void recompute_margins();
  void refresh_supports();
  std::size_t demote_dependent();
  void rebuild_pseudo();
  void settle(std::size_t i);

  std::pair<RegionId, RegionId> pair_;
  std::map<RegionId, int> orientation_;
  KernelConfig cfg_;
  std::vector<TrainingSample> samples_;
  std::vector<TrainingSample> pseudo_;
  std::vector<TrainingSample> parked_;
  double nu_ = 0.0;
  Observer observer_;
};

/// Standalone prune on a copy, matching the functional form of the contract.
PairSvm prune_supports(PairSvm svm);

/// |w_2/w_1 - h_2/h_1|. Throws SingularSlope if a first component vanishes.
double slope_error(const Vector& w, const Vector& h);

struct BatchSolution {
  std::vector<double> alpha;
  double multiplier = 0.0;
  std::size_t iterations = 0;
};

/// Reference dual solver (pairwise SMO with maximal-violating-pair
/// selection) for the same problem PairSvm solves incrementally.
/// Throws OneClassOnly unless both labels are present.
BatchSolution batch_qp_oracle(const std::vector<std::pair<Vector, int>>& samples, const KernelConfig& cfg,
                              double kkt_tol = 1e-8, std::size_t max_iterations = 10000000);

/// sum alpha l Q x
Vector weight_from_alpha(const std::vector<std::pair<Vector, int>>& samples, const std::vector<double>& alpha,
                         const Matrix& Q);

struct PairKey {
  RegionId lo;
  RegionId hi;
  static PairKey of(RegionId a, RegionId b) { return a < b ? PairKey{a, b} : PairKey{b, a}; }
  friend auto operator<=>(const PairKey&, const PairKey&) = default;
};

struct Insertion {
  PairKey pair;
  Vector x;
  int label = 1;
  LearnReport report;
};

/// Per-region-pair SVMs created lazily on the first crossing of each pair.
class ManifoldRegistry {
 public:
  explicit ManifoldRegistry(KernelConfig cfg) : cfg_(std::move(cfg)) {}

  /// Training-sample selection on a switch: x_k (new region) and x_prev (old
  /// region) join the pair's training set with labels from the orientation
  /// fixed at the pair's first crossing (new -> +1, old -> -1).
  std::vector<Insertion> select_training_pair(RegionId new_region, RegionId old_region, const Vector& x_k,
                                              const Vector& x_prev);

  const std::map<PairKey, PairSvm>& pairs() const noexcept { return pairs_; }
  const KernelConfig& kernel() const noexcept { return cfg_; }

 private:
  KernelConfig cfg_;
  std::map<PairKey, PairSvm> pairs_;
};

}  // namespace swid
