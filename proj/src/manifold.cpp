#include "swid/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swid/error.hpp"

namespace swid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSolveTol = 1e-15;
constexpr double kSensitivityTol = 1e-10;
constexpr double kDependenceTol = 1e-9;

void check_label(int label) {
  if (label != 1 && label != -1) throw Error(ErrorKind::DimensionMismatch, "labels must be +1 or -1");
}

// Columns l_j x_j / |x_j| with the label row appended, so column scale
// does not enter the rank decision.
Matrix normalized_augmented(const std::vector<const TrainingSample*>& cols, std::size_t n, bool label_row,
                            std::vector<double>* scale) {
  Matrix a(n + (label_row ? 1 : 0), cols.size());
  if (scale) scale->assign(cols.size(), 1.0);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const TrainingSample& s = *cols[j];
    double len = 0.0;
    for (std::size_t r = 0; r < n; ++r) len += s.x[r] * s.x[r];
    if (label_row) len += 1.0;
    len = std::sqrt(len);
    if (len == 0.0) len = 1.0;
    for (std::size_t r = 0; r < n; ++r) a(r, j) = s.label * s.x[r] / len;
    if (label_row) a(n, j) = s.label / len;
    if (scale) (*scale)[j] = len;
  }
  return a;
}

}  // namespace

void KernelConfig::validate() const {
  if (!Q.square() || Q.rows() == 0) throw Error(ErrorKind::ConfigInvalid, "kernel Q must be square");
  if (!is_positive_definite(Q)) throw Error(ErrorKind::ConfigInvalid, "kernel Q must be symmetric positive definite");
  if (!(C > 0.0) || !std::isfinite(C)) throw Error(ErrorKind::ConfigInvalid, "svm C must be positive");
  if (!(step_delta >= 0.0 && step_delta <= C))
    throw Error(ErrorKind::ConfigInvalid, "svm step_delta must lie in [0, C] (0 = event-driven)");
  if (!(alpha_tol_rel > 0.0) || !(g_tol > 0.0)) throw Error(ErrorKind::ConfigInvalid, "svm tolerances must be positive");
  if (max_iterations == 0) throw Error(ErrorKind::ConfigInvalid, "svm max_iterations must be positive");
}

double kernel_eval(const KernelConfig& cfg, const Vector& x, const Vector& y) {
  if (x.size() != y.size() || cfg.Q.rows() != x.size() || cfg.Q.cols() != x.size())
    throw Error(ErrorKind::DimensionMismatch, "kernel_eval: dimensions differ");
  return quadratic_form(x, cfg.Q, y);
}

PairSvm::PairSvm(std::pair<RegionId, RegionId> pair, std::map<RegionId, int> orientation, KernelConfig cfg)
    : pair_(pair), orientation_(std::move(orientation)), cfg_(std::move(cfg)) {
  cfg_.validate();
}

double PairSvm::kernel(std::size_t i, std::size_t j) const {
  return quadratic_form(samples_[i].x, cfg_.Q, samples_[j].x);
}

std::vector<std::size_t> PairSvm::support_indices() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < samples_.size(); ++i)
    if (samples_[i].set == SampleSet::Support) s.push_back(i);
  return s;
}

std::size_t PairSvm::support_count() const { return support_indices().size(); }

Matrix PairSvm::bordered_matrix(const std::vector<std::size_t>& s) const {
  Matrix m(s.size() + 1, s.size() + 1);
  for (std::size_t a = 0; a < s.size(); ++a) {
    const double la = samples_[s[a]].label;
    m(0, a + 1) = la;
    m(a + 1, 0) = la;
    for (std::size_t b = 0; b < s.size(); ++b) m(a + 1, b + 1) = la * samples_[s[b]].label * kernel(s[a], s[b]);
  }
  return m;
}

bool PairSvm::bordered_nonsingular() const {
  const auto s = support_indices();
  if (s.empty()) return true;
  std::vector<const TrainingSample*> cols;
  for (std::size_t i : s) cols.push_back(&samples_[i]);
  return rank(normalized_augmented(cols, cfg_.Q.rows(), true, nullptr), kDependenceTol) == s.size();
}

std::size_t PairSvm::support_rank(bool include_pseudo) const {
  std::vector<const TrainingSample*> cols;
  for (const auto& s : samples_)
    if (s.set == SampleSet::Support) cols.push_back(&s);
  if (include_pseudo)
    for (const auto& p : pseudo_) cols.push_back(&p);
  if (cols.empty()) return 0;
  return rank(normalized_augmented(cols, cfg_.Q.rows(), false, nullptr), kDependenceTol);
}

Vector PairSvm::weight_vector() const {
  const std::size_t n = cfg_.Q.rows();
  Vector acc(n);
  bool any = false;
  for (const auto& s : samples_) {
    if (s.alpha == 0.0) continue;
    any = true;
    acc += s.x * (s.alpha * s.label);
  }
  if (!any) throw Error(ErrorKind::Undefined, "weight vector undefined: every alpha is zero");
  return cfg_.Q * acc;
}

double PairSvm::g_value(const Vector& x, int label) const {
  check_label(label);
  const Vector w = weight_vector();
  if (x.size() != w.size()) throw Error(ErrorKind::DimensionMismatch, "g_value: dimension");
  return label * dot(w, x) - 1.0;
}

void PairSvm::recompute_margins() {
  Vector acc(cfg_.Q.rows());
  for (const auto& s : samples_)
    if (s.alpha != 0.0) acc += s.x * (s.alpha * s.label);
  const Vector w = cfg_.Q * acc;
  for (auto& s : samples_) s.g = s.label * (dot(w, s.x) + nu_) - 1.0;
}

void PairSvm::settle(std::size_t i) {
  TrainingSample& s = samples_[i];
  const double atol = cfg_.alpha_tol();
  if (s.alpha <= atol) {
    s.alpha = 0.0;
    s.set = SampleSet::NonSupport;
  } else if (s.alpha >= cfg_.C - atol) {
    s.alpha = cfg_.C;
    s.set = SampleSet::Bounded;
  } else {
    s.set = SampleSet::Support;
  }
}

void PairSvm::refresh_supports() {
  const auto s = support_indices();
  if (!s.empty()) {
    // Re-solve the support block exactly with B and O held fixed.
    Vector rhs(s.size() + 1);
    double bounded_sum = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i)
      if (samples_[i].set == SampleSet::Bounded) bounded_sum += samples_[i].label * samples_[i].alpha;
    rhs[0] = -bounded_sum;
    for (std::size_t a = 0; a < s.size(); ++a) {
      double v = 1.0;
      for (std::size_t i = 0; i < samples_.size(); ++i)
        if (samples_[i].set == SampleSet::Bounded)
          v -= samples_[s[a]].label * samples_[i].label * kernel(s[a], i) * samples_[i].alpha;
      rhs[a + 1] = v;
    }
    try {
      const Vector sol = solve(bordered_matrix(s), rhs, kSolveTol);
      bool inside = true;
      const double atol = cfg_.alpha_tol();
      for (std::size_t a = 0; a < s.size(); ++a)
        if (!(sol[a + 1] > -atol && sol[a + 1] < cfg_.C + atol)) inside = false;
      if (inside && sol.all_finite()) {
        nu_ = sol[0];
        for (std::size_t a = 0; a < s.size(); ++a) samples_[s[a]].alpha = std::clamp(sol[a + 1], 0.0, cfg_.C);
      }
    } catch (const Error&) {
      // Keep the incrementally tracked values.
    }
  }
  recompute_margins();
}

std::size_t PairSvm::demote_dependent() {
  std::size_t demoted = 0;
  const std::size_t n = cfg_.Q.rows();
  for (;;) {
    const auto s = support_indices();
    if (s.size() < 2) break;
    std::vector<const TrainingSample*> cols;
    for (std::size_t i : s) cols.push_back(&samples_[i]);
    std::vector<double> scale;
    const Matrix a = normalized_augmented(cols, n, true, &scale);
    if (rank(a, kDependenceTol) == s.size()) break;
    const Matrix z_basis = null_space(a, kDependenceTol);
    if (z_basis.cols() == 0) break;
    // z leaves w, nu, every margin and sum l alpha unchanged.
    Vector z(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) z[j] = z_basis(j, 0) / scale[j];
    const double zmax = z.max_abs();
    double best_t = kInf;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (std::abs(z[j]) <= 1e-12 * zmax) continue;
      const double alpha = samples_[s[j]].alpha;
      for (double target : {0.0, cfg_.C}) {
        const double t = (target - alpha) / z[j];
        if (std::abs(t) < std::abs(best_t)) {
          best_t = t;
          best_j = j;
        }
      }
    }
    if (!std::isfinite(best_t)) break;
    for (std::size_t j = 0; j < s.size(); ++j)
      samples_[s[j]].alpha = std::clamp(samples_[s[j]].alpha + best_t * z[j], 0.0, cfg_.C);
    TrainingSample& out = samples_[s[best_j]];
    out.alpha = std::abs(out.alpha) < std::abs(cfg_.C - out.alpha) ? 0.0 : cfg_.C;
    out.set = out.alpha == 0.0 ? SampleSet::NonSupport : SampleSet::Bounded;
    out.g = 0.0;
    ++demoted;
    // Any other support pushed onto a bound by the same shift follows.
    for (std::size_t j = 0; j < s.size(); ++j)
      if (j != best_j) settle(s[j]);
  }
  return demoted;
}

void PairSvm::rebuild_pseudo() {
  pseudo_.clear();
  const std::size_t n = cfg_.Q.rows();
  Vector w;
  try {
    w = weight_vector();
  } catch (const Error&) {
    return;
  }
  const double wn2 = dot(w, w);
  if (!(wn2 > 0.0)) return;

  std::vector<const TrainingSample*> cols;
  double scale = 0.0;
  for (const auto& s : samples_)
    if (s.set == SampleSet::Support) {
      cols.push_back(&s);
      scale += s.x.norm();
    }
  std::size_t r = cols.empty() ? 0 : rank(normalized_augmented(cols, n, false, nullptr), kDependenceTol);
  if (r >= n) return;

  const Vector anchor = w * (1.0 / wn2);  // w^T anchor = 1
  scale = cols.empty() ? anchor.norm() : scale / static_cast<double>(cols.size());
  Matrix wt(1, n);
  for (std::size_t i = 0; i < n; ++i) wt(0, i) = w[i];
  const Matrix perp = null_space(wt, kDependenceTol);

  std::vector<Vector> candidates{anchor};
  for (std::size_t c = 0; c < perp.cols(); ++c) {
    const Vector u = perp.col(c);
    candidates.push_back(anchor + u * (scale / u.norm()));
  }
  // Greedy completion: keep a candidate only if it raises the rank.
  std::vector<TrainingSample> added;
  for (const Vector& p : candidates) {
    if (r >= n) break;
    TrainingSample ps{p, 1, 0.0, 0.0, SampleSet::Pseudo};
    auto trial = cols;
    for (const auto& a : added) trial.push_back(&a);
    trial.push_back(&ps);
    const std::size_t r2 = rank(normalized_augmented(trial, n, false, nullptr), kDependenceTol);
    if (r2 > r) {
      added.push_back(ps);
      r = r2;
    }
  }
  pseudo_ = std::move(added);
}

std::size_t PairSvm::prune_supports() {
  bool any = false;
  for (const auto& s : samples_)
    if (s.alpha != 0.0) any = true;
  if (!any) throw Error(ErrorKind::CannotComplete, "no weight vector to complete the support set against");
  const std::size_t demoted = demote_dependent();
  rebuild_pseudo();
  return demoted;
}

void PairSvm::restore(std::vector<TrainingSample> samples, double nu) {
  for (const auto& s : samples) {
    check_label(s.label);
    if (s.x.size() != cfg_.Q.rows()) throw Error(ErrorKind::DimensionMismatch, "restore: sample dimension");
  }
  samples_ = std::move(samples);
  parked_.clear();
  pseudo_.clear();
  nu_ = nu;
  recompute_margins();
}

PairSvm prune_supports(PairSvm svm) {
  svm.prune_supports();
  return svm;
}

void PairSvm::initialize_from_parked() {
  std::size_t ip = parked_.size(), im = parked_.size();
  for (std::size_t i = 0; i < parked_.size(); ++i) {
    if (parked_[i].label == 1 && ip == parked_.size()) ip = i;
    if (parked_[i].label == -1 && im == parked_.size()) im = i;
  }
  const std::size_t first = std::min(ip, im), second = std::max(ip, im);
  TrainingSample s1 = parked_[first], s2 = parked_[second];
  const Vector v = s1.x * s1.label + s2.x * s2.label;
  const double q = quadratic_form(v, cfg_.Q, v);
  const double a = q > 0.0 ? std::min(cfg_.C, 2.0 / q) : cfg_.C;
  const Vector w = cfg_.Q * v * a;
  nu_ = -0.5 * (dot(w, s1.x) + dot(w, s2.x));
  s1.alpha = s2.alpha = a;
  samples_.push_back(s1);
  samples_.push_back(s2);
  for (std::size_t i = 0; i < 2; ++i) samples_[i].set = a < cfg_.C ? SampleSet::Support : SampleSet::Bounded;
  recompute_margins();
  for (std::size_t i = 0; i < 2; ++i)
    if (samples_[i].set == SampleSet::Support) samples_[i].g = 0.0;
}

LearnReport PairSvm::learn(const Vector& x, int label) {
  check_label(label);
  if (x.size() != cfg_.Q.rows()) throw Error(ErrorKind::DimensionMismatch, "learn: sample dimension");
  if (!x.all_finite()) throw Error(ErrorKind::DimensionMismatch, "learn: non-finite sample");
  LearnReport report;
  pseudo_.clear();

  if (samples_.empty()) {
    parked_.push_back(TrainingSample{x, label, 0.0, 0.0, SampleSet::NonSupport});
    const bool both = std::any_of(parked_.begin(), parked_.end(), [](auto& s) { return s.label == 1; }) &&
                      std::any_of(parked_.begin(), parked_.end(), [](auto& s) { return s.label == -1; });
    if (!both) {
      report.parked = true;
      return report;
    }
    initialize_from_parked();
    std::vector<TrainingSample> rest;
    bool used_p = false, used_m = false;
    for (const auto& s : parked_) {
      if (s.label == 1 && !used_p) {
        used_p = true;
        continue;
      }
      if (s.label == -1 && !used_m) {
        used_m = true;
        continue;
      }
      rest.push_back(s);
    }
    parked_.clear();
    for (const auto& s : rest) {
      insert(s.x, s.label, report);
      refresh_supports();
    }
  } else {
    insert(x, label, report);
    refresh_supports();
  }
  report.prunes += demote_dependent();
  rebuild_pseudo();
  return report;
}

void PairSvm::insert(const Vector& x, int label, LearnReport& report) {
  const double C = cfg_.C;
  samples_.push_back(TrainingSample{x, label, 0.0, 0.0, SampleSet::Pending});
  const std::size_t c = samples_.size() - 1;
  recompute_margins();
  if (samples_[c].g >= -cfg_.g_tol) {
    samples_[c].set = SampleSet::NonSupport;
    return;
  }

  const double lc = label;
  for (;;) {
    if (report.iterations++ >= cfg_.max_iterations)
      throw Error(ErrorKind::NonConvergence, "incremental tuning exceeded " + std::to_string(cfg_.max_iterations) +
                                                 " inner iterations");
    const auto s = support_indices();

    if (s.empty()) {
      // Only the multiplier can move: dg_i = l_i l_c t.
      double best = -samples_[c].g;
      std::size_t who = c;
      for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (i == c) continue;
        const TrainingSample& si = samples_[i];
        const double dir = si.label * lc;
        double t = kInf;
        if (dir < 0 && si.set == SampleSet::NonSupport) t = std::max(0.0, si.g);
        if (dir > 0 && si.set == SampleSet::Bounded) t = std::max(0.0, -si.g);
        if (t < best) {
          best = t;
          who = i;
        }
      }
      best = std::max(0.0, best);
      nu_ += lc * best;
      for (auto& si : samples_) si.g += si.label * lc * best;
      samples_[who].g = 0.0;
      if (who == c) {
        settle(c);
        if (observer_) observer_(*this);
        return;
      }
      samples_[who].set = SampleSet::Support;
      ++report.migrations;
      if (observer_) observer_(*this);
      continue;
    }

    const Matrix M = bordered_matrix(s);
    Vector rhs(s.size() + 1);
    rhs[0] = -lc;
    for (std::size_t a = 0; a < s.size(); ++a) rhs[a + 1] = -samples_[s[a]].label * lc * kernel(s[a], c);
    Vector beta;
    try {
      beta = solve(M, rhs, kSolveTol);
    } catch (const Error&) {
      const std::size_t demoted = demote_dependent();
      report.prunes += demoted;
      if (demoted == 0) throw Error(ErrorKind::SingularSystem, "bordered support system singular after pruning");
      continue;
    }

    // Margin sensitivities for everything outside S.
    std::vector<double> gamma(samples_.size(), 0.0);
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (samples_[i].set == SampleSet::Support) continue;
      const double li = samples_[i].label;
      double v = li * lc * kernel(i, c) + li * beta[0];
      double scale = std::abs(kernel(i, c)) + std::abs(beta[0]);
      for (std::size_t a = 0; a < s.size(); ++a) {
        const double term = kernel(i, s[a]) * beta[a + 1];
        v += li * samples_[s[a]].label * term;
        scale += std::abs(term);
      }
      // Samples in the span of S (duplicates, scaled copies) have no sensitivity.
      gamma[i] = std::abs(v) <= kSensitivityTol * scale ? 0.0 : v;
    }

    enum class Trigger { CandidateAtC, CandidateMargin, SupportBound, MarginHit };
    Trigger trig = Trigger::CandidateAtC;
    double step = C - samples_[c].alpha;
    std::size_t who = c;
    auto consider = [&](double t, Trigger tr, std::size_t i) {
      t = std::max(0.0, t);
      if (t < step) {
        step = t;
        trig = tr;
        who = i;
      }
    };
    if (gamma[c] > 0.0) consider(-samples_[c].g / gamma[c], Trigger::CandidateMargin, c);
    for (std::size_t a = 0; a < s.size(); ++a) {
      const double b = beta[a + 1];
      const double alpha = samples_[s[a]].alpha;
      if (b < 0.0) consider(-alpha / b, Trigger::SupportBound, s[a]);
      if (b > 0.0) consider((C - alpha) / b, Trigger::SupportBound, s[a]);
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (i == c) continue;
      const TrainingSample& si = samples_[i];
      if (si.set == SampleSet::NonSupport && gamma[i] < 0.0) consider(-si.g / gamma[i], Trigger::MarginHit, i);
      if (si.set == SampleSet::Bounded && gamma[i] > 0.0) consider(-si.g / gamma[i], Trigger::MarginHit, i);
    }

    bool event = true;
    if (cfg_.step_delta > 0.0 && cfg_.step_delta < step) {
      step = cfg_.step_delta;
      event = false;
    }

    samples_[c].alpha += step;
    nu_ += beta[0] * step;
    for (std::size_t a = 0; a < s.size(); ++a)
      samples_[s[a]].alpha = std::clamp(samples_[s[a]].alpha + beta[a + 1] * step, 0.0, C);
    for (std::size_t i = 0; i < samples_.size(); ++i)
      if (samples_[i].set != SampleSet::Support) samples_[i].g += gamma[i] * step;

    if (!event) {
      if (observer_) observer_(*this);
      continue;
    }

    switch (trig) {
      case Trigger::CandidateAtC:
        samples_[c].alpha = C;
        samples_[c].set = SampleSet::Bounded;
        if (observer_) observer_(*this);
        return;
      case Trigger::CandidateMargin:
        samples_[c].g = 0.0;
        settle(c);
        if (samples_[c].set == SampleSet::Support) report.prunes += demote_dependent();
        if (observer_) observer_(*this);
        return;
      case Trigger::SupportBound: {
        TrainingSample& out = samples_[who];
        out.alpha = out.alpha * 2.0 < C ? 0.0 : C;
        out.set = out.alpha == 0.0 ? SampleSet::NonSupport : SampleSet::Bounded;
        out.g = 0.0;
        break;
      }
      case Trigger::MarginHit:
        samples_[who].g = 0.0;
        samples_[who].set = SampleSet::Support;
        report.prunes += demote_dependent();
        break;
    }
    ++report.migrations;
    if (observer_) observer_(*this);
  }
}

KktReport PairSvm::kkt_report() const {
  KktReport r;
  double eq = 0.0;
  const double atol = cfg_.alpha_tol();
  const double gtol = cfg_.g_tol;
  auto violate = [&r](double v) { r.worst_violation = std::max(r.worst_violation, v); };
  for (const auto& s : samples_) {
    eq += s.label * s.alpha;
    if (s.alpha < 0.0 || s.alpha > cfg_.C) {
      r.box_ok = false;
      violate(std::max(-s.alpha, s.alpha - cfg_.C));
    }
    switch (s.set) {
      case SampleSet::Support:
        if (std::abs(s.g) > gtol) {
          r.trichotomy_ok = false;
          violate(std::abs(s.g));
        }
        break;
      case SampleSet::Bounded:
        if (std::abs(s.alpha - cfg_.C) > atol || s.g > gtol) {
          r.trichotomy_ok = false;
          violate(std::max(s.g, std::abs(s.alpha - cfg_.C)));
        }
        break;
      case SampleSet::NonSupport:
        if (std::abs(s.alpha) > atol || s.g < -gtol) {
          r.trichotomy_ok = false;
          violate(std::max(-s.g, std::abs(s.alpha)));
        }
        break;
      case SampleSet::Pseudo:
      case SampleSet::Pending:
        break;
    }
  }
  r.equality_residual = std::abs(eq);
  return r;
}

InvarianceDiagnostic PairSvm::check_invariance(double kappa0, double epsilon, std::size_t t) const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorKind::ConfigInvalid, "epsilon must lie in (0,1)");
  if (!(kappa0 >= 0.0)) throw Error(ErrorKind::ConfigInvalid, "kappa0 must be nonnegative");
  const auto s = support_indices();
  if (s.empty()) throw Error(ErrorKind::EmptySupportSet, "no support vectors");
  InvarianceDiagnostic d;
  Matrix xi(s.size(), s.size());
  d.alpha_min = kInf;
  d.alpha_max = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = 0; b < s.size(); ++b)
      xi(a, b) = samples_[s[a]].label * samples_[s[b]].label * kernel(s[a], s[b]);
    d.alpha_min = std::min(d.alpha_min, samples_[s[a]].alpha);
    d.alpha_max = std::max(d.alpha_max, samples_[s[a]].alpha);
  }
  d.lambda_min = symmetric_eigenvalues(xi)[0];
  const double se = std::sqrt(epsilon);
  d.bound = d.lambda_min > 0.0 ? cfg_.C * std::pow(se, static_cast<double>(t)) / (1.0 - se) *
                                     std::sqrt(kappa0 / d.lambda_min)
                               : kInf;
  d.guaranteed = d.bound < d.alpha_min && d.bound < cfg_.C - d.alpha_max;

  const std::size_t n = cfg_.Q.rows();
  std::vector<const TrainingSample*> cols;
  for (std::size_t i : s) cols.push_back(&samples_[i]);
  for (const auto& p : pseudo_) cols.push_back(&p);
  if (cols.size() == n && !samples_.empty()) {
    Matrix xs(n, n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t r = 0; r < n; ++r) xs(r, j) = cols[j]->label * cols[j]->x[r];
    const TrainingSample& latest = samples_.back();
    try {
      const Vector sigma = solve(xs, latest.x * latest.label);
      const double nrm = sigma.norm();
      if (nrm > 0.0) d.norm_ratio = sigma.max_abs() / nrm;
    } catch (const Error&) {
    }
  }
  return d;
}

double slope_error(const Vector& w, const Vector& h) {
  if (w.size() < 2 || h.size() < 2) throw Error(ErrorKind::DimensionMismatch, "slope needs at least two components");
  auto singular = [](const Vector& v) { return !(std::abs(v[0]) > 1e-12 * v.norm()); };
  if (singular(w) || singular(h)) throw Error(ErrorKind::SingularSlope, "first component vanishes");
  return std::abs(w[1] / w[0] - h[1] / h[0]);
}

Vector weight_from_alpha(const std::vector<std::pair<Vector, int>>& samples, const std::vector<double>& alpha,
                         const Matrix& Q) {
  if (samples.size() != alpha.size()) throw Error(ErrorKind::DimensionMismatch, "alpha count");
  Vector acc(Q.rows());
  for (std::size_t i = 0; i < samples.size(); ++i) acc += samples[i].first * (alpha[i] * samples[i].second);
  return Q * acc;
}

BatchSolution batch_qp_oracle(const std::vector<std::pair<Vector, int>>& samples, const KernelConfig& cfg,
                              double kkt_tol, std::size_t max_iterations) {
  const std::size_t N = samples.size();
  bool pos = false, neg = false;
  for (const auto& [x, l] : samples) {
    check_label(l);
    if (x.size() != cfg.Q.rows()) throw Error(ErrorKind::DimensionMismatch, "oracle: sample dimension");
    (l == 1 ? pos : neg) = true;
  }
  if (!pos || !neg) throw Error(ErrorKind::OneClassOnly, "both labels are required");

  const double C = cfg.C;
  std::vector<double> y(N), K(N * N), alpha(N, 0.0), G(N, -1.0);
  for (std::size_t i = 0; i < N; ++i) y[i] = samples[i].second;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      K[i * N + j] = y[i] * y[j] * quadratic_form(samples[i].first, cfg.Q, samples[j].first);
  auto Qm = [&](std::size_t i, std::size_t j) { return K[i * N + j]; };
  const double tau = 1e-12;

  BatchSolution out;
  for (;;) {
    double gmax = -kInf, gmin = kInf;
    std::size_t i = N, j = N;
    for (std::size_t t = 0; t < N; ++t) {
      const double v = -y[t] * G[t];
      const bool up = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
      const bool low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
      if (up && v > gmax) {
        gmax = v;
        i = t;
      }
      if (low && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i == N || j == N || gmax - gmin < kkt_tol) break;
    if (out.iterations++ >= max_iterations)
      throw Error(ErrorKind::NonConvergence, "batch oracle exceeded its iteration budget");

    const double ai = alpha[i], aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = Qm(i, i) + Qm(j, j) + 2 * Qm(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = Qm(i, i) + Qm(j, j) - 2 * Qm(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - ai, dj = alpha[j] - aj;
    for (std::size_t t = 0; t < N; ++t) G[t] += Qm(t, i) * di + Qm(t, j) * dj;
  }

  // nu from the free samples, else the midpoint of the feasible interval.
  double sum = 0.0, ub = kInf, lb = -kInf;
  std::size_t free = 0;
  for (std::size_t t = 0; t < N; ++t) {
    const double yg = y[t] * G[t];
    if (alpha[t] > 0 && alpha[t] < C) {
      sum += yg;
      ++free;
    } else if ((alpha[t] == 0 && y[t] > 0) || (alpha[t] == C && y[t] < 0)) {
      ub = std::min(ub, yg);
    } else {
      lb = std::max(lb, yg);
    }
  }
  const double rho = free > 0 ? sum / static_cast<double>(free) : 0.5 * (ub + lb);
  out.multiplier = -rho;
  out.alpha = std::move(alpha);
  return out;
}

std::vector<Insertion> ManifoldRegistry::select_training_pair(RegionId new_region, RegionId old_region,
                                                              const Vector& x_k, const Vector& x_prev) {
  if (new_region == old_region) return {};
  const PairKey key = PairKey::of(new_region, old_region);
  auto it = pairs_.find(key);
  if (it == pairs_.end()) {
    std::map<RegionId, int> orientation{{new_region, 1}, {old_region, -1}};
    it = pairs_.emplace(key, PairSvm({key.lo, key.hi}, std::move(orientation), cfg_)).first;
  }
  PairSvm& svm = it->second;
  std::vector<Insertion> out;
  const int lk = svm.orientation().at(new_region);
  const int lp = svm.orientation().at(old_region);
  out.push_back(Insertion{key, x_k, lk, svm.learn(x_k, lk)});
  out.push_back(Insertion{key, x_prev, lp, svm.learn(x_prev, lp)});
  return out;
}

}  // namespace swid
