#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "swid/error.hpp"
#include "swid/manifold.hpp"

using namespace swid;

namespace {

KernelConfig kernel(double C, std::size_t n = 2) {
  KernelConfig k;
  k.Q = Matrix::identity(n);
  k.C = C;
  return k;
}

PairSvm make_svm(double C) {
  return PairSvm({RegionId{1}, RegionId{2}}, {{RegionId{1}, -1}, {RegionId{2}, 1}}, kernel(C));
}

PairSvm two_point_model() {
  PairSvm svm = make_svm(10);
  svm.learn(Vector{1, 0.1}, 1);
  svm.learn(Vector{-1, 0.1}, -1);
  return svm;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoError;
}

// Points in an annulus labeled by the side of a random line through the origin.
std::vector<std::pair<Vector, int>> separable_instance(std::mt19937_64& rng, std::size_t count, double margin) {
  std::uniform_real_distribution<double> ang(0, 2 * M_PI), rad(0.2, 3.0);
  const double theta = ang(rng);
  const Vector h{std::cos(theta), std::sin(theta)};
  std::vector<std::pair<Vector, int>> out;
  while (out.size() < count) {
    const double a = ang(rng), r = rad(rng);
    const Vector x{r * std::cos(a), r * std::sin(a)};
    const double side = dot(h, x) / r;
    if (std::abs(side) < margin) continue;
    out.emplace_back(x, side > 0 ? 1 : -1);
  }
  return out;
}

bool both_classes(const std::vector<std::pair<Vector, int>>& s) {
  bool p = false, m = false;
  for (const auto& [x, l] : s) (l > 0 ? p : m) = true;
  return p && m;
}

}  // namespace

TEST_CASE("kernel_eval examples") {
  CHECK(kernel_eval(kernel(1), Vector{3, 4}, Vector{3, 4}) == 25.0);
  CHECK(kernel_eval(kernel(1), Vector{1, 0}, Vector{0, 1}) == 0.0);
  KernelConfig q = kernel(1);
  q.Q = Matrix::diagonal(Vector{2, 1});
  CHECK(kernel_eval(q, Vector{1, 1}, Vector{1, 1}) == 3.0);
  CHECK(kind_of([&] { kernel_eval(q, Vector{1, 1}, Vector{1}); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("incremental_learn: two points become supports with alpha 1/2") {
  const PairSvm svm = two_point_model();
  REQUIRE(svm.samples().size() == 2);
  for (const auto& s : svm.samples()) {
    CHECK(s.set == SampleSet::Support);
    CHECK(s.alpha == doctest::Approx(0.5));
  }
  const Vector w = svm.weight_vector();
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(std::abs(w[1]) < 1e-12);

  const BatchSolution batch = batch_qp_oracle({{Vector{1, 0.1}, 1}, {Vector{-1, 0.1}, -1}}, kernel(10));
  CHECK(batch.alpha[0] == doctest::Approx(0.5));
  CHECK(batch.alpha[1] == doctest::Approx(0.5));
}

TEST_CASE("incremental_learn: a point beyond the margin joins O untouched") {
  PairSvm svm = two_point_model();
  const Vector before = svm.weight_vector();
  svm.learn(Vector{2, 0.2}, 1);
  const TrainingSample& s = svm.samples().back();
  CHECK(s.set == SampleSet::NonSupport);
  CHECK(s.alpha == 0.0);
  CHECK(svm.g_value(Vector{2, 0.2}, 1) == doctest::Approx(1.0));
  CHECK((svm.weight_vector() - before).max_abs() < 1e-12);
}

TEST_CASE("incremental_learn: duplicate support leaves w unchanged") {
  PairSvm svm = two_point_model();
  const Vector before = svm.weight_vector();
  svm.learn(Vector{1, 0.1}, 1);
  CHECK((svm.weight_vector() - before).max_abs() < 1e-9);
  CHECK(svm.kkt_report().ok(1e-8));
}

TEST_CASE("incremental_learn: one-class samples are parked and replayed") {
  PairSvm svm = make_svm(10);
  CHECK(svm.learn(Vector{1, 0.1}, 1).parked);
  CHECK(svm.learn(Vector{2, 0.3}, 1).parked);
  CHECK(kind_of([&] { svm.weight_vector(); }) == ErrorKind::Undefined);
  CHECK_FALSE(svm.learn(Vector{-1, 0.1}, -1).parked);
  CHECK(svm.parked().empty());
  CHECK(svm.samples().size() == 3);
  CHECK(svm.kkt_report().ok(1e-8));
}

TEST_CASE("incremental_learn: violating insertion re-tunes to the batch optimum") {
  PairSvm svm = two_point_model();
  svm.learn(Vector{0.5, 0.4}, 1);
  svm.learn(Vector{-0.3, -0.6}, -1);
  const std::vector<std::pair<Vector, int>> all{
      {Vector{1, 0.1}, 1}, {Vector{-1, 0.1}, -1}, {Vector{0.5, 0.4}, 1}, {Vector{-0.3, -0.6}, -1}};
  const BatchSolution b = batch_qp_oracle(all, kernel(10));
  const Vector wb = weight_from_alpha(all, b.alpha, Matrix::identity(2));
  CHECK((svm.weight_vector() - wb).norm() <= 1e-6 * wb.norm());
  CHECK(svm.kkt_report().ok(1e-8));
}

TEST_CASE("fixed step_delta reaches the same optimum") {
  KernelConfig k = kernel(10);
  k.step_delta = 0.01;
  PairSvm svm({RegionId{1}, RegionId{2}}, {{RegionId{1}, -1}, {RegionId{2}, 1}}, k);
  PairSvm ref = make_svm(10);
  const std::vector<std::pair<Vector, int>> all{
      {Vector{1, 0.1}, 1}, {Vector{-1, 0.1}, -1}, {Vector{0.5, 0.4}, 1}, {Vector{-0.3, -0.6}, -1}};
  for (const auto& [x, l] : all) {
    svm.learn(x, l);
    ref.learn(x, l);
  }
  CHECK((svm.weight_vector() - ref.weight_vector()).norm() < 1e-9);
}

TEST_CASE("prune: independent pair is left alone") {
  PairSvm svm = two_point_model();
  CHECK(svm.prune_supports() == 0);
  CHECK(svm.support_count() == 2);
  CHECK(svm.pseudo().empty());
  CHECK(svm.support_rank(false) == 2);
}

TEST_CASE("prune: duplicated support is demoted without moving w") {
  PairSvm svm = make_svm(10);
  // Same point twice plus an opposite one; alpha split arbitrarily.
  svm.restore({{Vector{1, 0.1}, 1, 0.2, 0, SampleSet::Support},
               {Vector{1, 0.1}, 1, 0.3, 0, SampleSet::Support},
               {Vector{-1, 0.1}, -1, 0.5, 0, SampleSet::Support}},
              0.0);
  const Vector before = svm.weight_vector();
  CHECK(svm.prune_supports() == 1);
  CHECK(svm.support_count() == 2);
  CHECK((svm.weight_vector() - before).max_abs() < 1e-12);
  CHECK(svm.bordered_nonsingular());
  CHECK(svm.kkt_report().ok(1e-12));
}

TEST_CASE("prune: x and 2x with the same label keep a solvable bordered system") {
  PairSvm svm = make_svm(10);
  // Margins on both are consistent with w = [2, 0], nu = 1 (positives on
  // w^T x + nu = 1) and the negative on -(w^T x + nu) = 1.
  svm.restore({{Vector{0, 1}, 1, 1.0, 0, SampleSet::Support},
               {Vector{0, 2}, 1, 0.5, 0, SampleSet::Support},
               {Vector{-1, 2}, -1, 2.0, 0, SampleSet::Support}},
              1.0);
  CHECK(svm.support_rank(false) < svm.support_count());
  svm.prune_supports();
  CHECK(svm.bordered_nonsingular());
  CHECK(svm.support_rank(true) == 2);
}

TEST_CASE("prune: rank deficiency in the bordered system is removed") {
  PairSvm svm = make_svm(10);
  svm.restore({{Vector{1, 0.2}, 1, 0.4, 0, SampleSet::Support},
               {Vector{2, 0.4}, 1, 0.3, 0, SampleSet::Support},
               {Vector{-1, 0.3}, -1, 0.3, 0, SampleSet::Support},
               {Vector{-2, 0.6}, -1, 0.4, 0, SampleSet::Support}},
              0.0);
  const Vector before = svm.weight_vector();
  CHECK_FALSE(svm.bordered_nonsingular());
  CHECK(svm.prune_supports() >= 1);
  CHECK(svm.bordered_nonsingular());
  CHECK((svm.weight_vector() - before).max_abs() < 1e-12);
  CHECK(svm.kkt_report().equality_residual < 1e-12);
}

TEST_CASE("prune: a single support is completed by a pseudo vector on the margin") {
  PairSvm svm = make_svm(10);
  svm.restore({{Vector{1, 0.1}, 1, 0.5, 0, SampleSet::Support},
               {Vector{-1, -0.3}, -1, 10.0, 0, SampleSet::Bounded}},
              0.0);
  svm.prune_supports();
  REQUIRE(svm.pseudo().size() == 1);
  const TrainingSample& p = svm.pseudo()[0];
  CHECK(p.set == SampleSet::Pseudo);
  CHECK(p.alpha == 0.0);
  CHECK(p.label * dot(svm.weight_vector(), p.x) == doctest::Approx(1.0));
  CHECK(svm.support_rank(true) == 2);
}

TEST_CASE("prune: undefined w cannot be completed") {
  PairSvm svm = make_svm(10);
  svm.restore({{Vector{1, 0.1}, 1, 0.0, 0, SampleSet::NonSupport}}, 0.0);
  CHECK(kind_of([&] { svm.prune_supports(); }) == ErrorKind::CannotComplete);
}

TEST_CASE("incremental_learn: a duplicate on the margin does not stall a violating insertion") {
  const std::vector<std::pair<Vector, int>> pts{
      {{-0.029584598379414073, 1.6666133150668134}, 1},  {{-1.9390529228600009, -0.50314678811603741}, -1},
      {{0.72426495904215971, -0.1123145300006736}, 1},   {{1.8515691333463402, 0.074955362749225429}, 1},
      {{-0.029584598379414073, 1.6666133150668134}, 1},  {{-1.8515691333463402, -0.074955362749225429}, -1},
      {{-4.2313375723664191, -1.0979503879815389}, -1}, {{-0.72426495904215971, 0.1123145300006736}, -1}};
  PairSvm svm = make_svm(1000);
  for (const auto& [x, l] : pts) svm.learn(x, l);
  CHECK(svm.kkt_report().ok(1e-8));
  const BatchSolution b = batch_qp_oracle(pts, kernel(1000));
  const Vector wb = weight_from_alpha(pts, b.alpha, Matrix::identity(2));
  CHECK((svm.weight_vector() - wb).norm() <= 1e-4 * wb.norm());
}

TEST_CASE("weight_vector: linear in Q, undefined at zero alpha") {
  const PairSvm base = two_point_model();
  KernelConfig k2 = kernel(10);
  k2.Q = Matrix::identity(2) * 2.0;
  PairSvm doubled({RegionId{1}, RegionId{2}}, base.orientation(), k2);
  doubled.restore(base.samples(), base.multiplier());
  CHECK((doubled.weight_vector() - base.weight_vector() * 2.0).max_abs() < 1e-15);
  CHECK(kind_of([&] { make_svm(1).weight_vector(); }) == ErrorKind::Undefined);
}

TEST_CASE("g_value: supports, O members, decision plane, origin") {
  PairSvm svm = two_point_model();
  CHECK(std::abs(svm.g_value(Vector{1, 0.1}, 1)) < 1e-9);
  CHECK(std::abs(svm.g_value(Vector{-1, 0.1}, -1)) < 1e-9);
  CHECK(svm.g_value(Vector{2, 0.2}, 1) == doctest::Approx(1.0));
  CHECK(svm.g_value(Vector{0, 5}, 1) == doctest::Approx(-1.0));
  CHECK(svm.g_value(Vector{0, 5}, -1) == doctest::Approx(-1.0));
  CHECK(svm.g_value(Vector{0, 0}, 1) == -1.0);
  CHECK(svm.g_value(Vector{0, 0}, -1) == -1.0);
}

TEST_CASE("slope_error examples") {
  CHECK(slope_error(Vector{-19.8674, -20.4493}, Vector{-1, -1}) == doctest::Approx(0.0293).epsilon(0.005));
  CHECK(slope_error(Vector{27.4342, -13.4117}, Vector{2, -1}) == doctest::Approx(0.0111).epsilon(0.005));
  CHECK(slope_error(Vector{-2, 1}, Vector{-2, 1}) == 0.0);
  CHECK(kind_of([] { slope_error(Vector{0, 1}, Vector{1, 1}); }) == ErrorKind::SingularSlope);
  CHECK(kind_of([] { slope_error(Vector{1, 1}, Vector{0, 1}); }) == ErrorKind::SingularSlope);
}

TEST_CASE("batch oracle: symmetric set and one-class input") {
  const std::vector<std::pair<Vector, int>> sym{
      {Vector{1, 0.1}, 1}, {Vector{-1, -0.1}, -1}, {Vector{1, -0.1}, 1}, {Vector{-1, 0.1}, -1}};
  const BatchSolution b = batch_qp_oracle(sym, kernel(10));
  const Vector w = weight_from_alpha(sym, b.alpha, Matrix::identity(2));
  CHECK(std::abs(w[1]) < 1e-6);
  CHECK(w[0] > 0);
  CHECK(b.alpha[0] + b.alpha[1] == doctest::Approx(b.alpha[2] + b.alpha[3]));
  CHECK(kind_of([] { batch_qp_oracle({{Vector{1, 0}, 1}, {Vector{2, 0}, 1}}, kernel(1)); }) ==
        ErrorKind::OneClassOnly);
}

TEST_CASE("check_invariance: guaranteed for large t, never near epsilon 1, needs supports") {
  const PairSvm svm = two_point_model();
  const InvarianceDiagnostic big = svm.check_invariance(1.01, 0.25, 60);
  CHECK(big.lambda_min > 0);
  CHECK(big.guaranteed);
  const double se = std::sqrt(0.25);
  CHECK(big.bound == doctest::Approx(10 * std::pow(se, 60) / (1 - se) * std::sqrt(1.01 / big.lambda_min)));
  CHECK_FALSE(svm.check_invariance(1.01, 1 - 1e-15, 5).guaranteed);
  CHECK(kind_of([] { make_svm(1).check_invariance(1, 0.5, 1); }) == ErrorKind::EmptySupportSet);
}

TEST_CASE("select_training_pair: orientation is fixed at the first crossing") {
  ManifoldRegistry reg(kernel(10));
  const auto first = reg.select_training_pair(RegionId{2}, RegionId{1}, Vector{1, 0.1}, Vector{-1, 0.1});
  REQUIRE(first.size() == 2);
  CHECK(first[0].label == 1);
  CHECK(first[1].label == -1);
  REQUIRE(reg.pairs().size() == 1);
  const PairKey key = PairKey::of(RegionId{1}, RegionId{2});
  CHECK(reg.pairs().at(key).orientation().at(RegionId{2}) == 1);

  const auto back = reg.select_training_pair(RegionId{1}, RegionId{2}, Vector{-1.2, 0.3}, Vector{0.8, 0.2});
  REQUIRE(back.size() == 2);
  CHECK(back[0].label == -1);  // x_k is in region 1
  CHECK(back[1].label == 1);   // x_prev is in region 2
  CHECK(reg.pairs().at(key).samples().size() == 4);

  CHECK(reg.select_training_pair(RegionId{1}, RegionId{1}, Vector{1, 1}, Vector{1, 1}).empty());
  CHECK(reg.pairs().size() == 1);
}

TEST_CASE("property: KKT holds after every inner iteration and matches the batch optimum") {
  std::mt19937_64 rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double C = trial % 2 ? 1000.0 : 5.0;
    const auto pts = separable_instance(rng, 4 + trial % 17, 0.02);
    if (!both_classes(pts)) continue;
    PairSvm svm = make_svm(C);
    std::size_t bad = 0;
    svm.set_observer([&](const PairSvm& s) {
      if (!s.kkt_report().ok(1e-8 * C)) ++bad;
    });
    for (const auto& [x, l] : pts) {
      svm.learn(x, l);
      CHECK(svm.kkt_report().ok(1e-8));
      if (svm.trained()) CHECK(svm.support_rank(true) == 2);
    }
    CHECK(bad == 0);
    const BatchSolution b = batch_qp_oracle(pts, kernel(C));
    const Vector wb = weight_from_alpha(pts, b.alpha, Matrix::identity(2));
    CHECK((svm.weight_vector() - wb).norm() <= 1e-4 * wb.norm());
    ++compared;

    // Side agreement on samples clear of the margin.
    for (const auto& s : svm.samples())
      if (s.g > svm.kernel().g_tol) CHECK(s.label * dot(svm.weight_vector(), s.x) > 0);
  }
  CHECK(compared > 80);
}
