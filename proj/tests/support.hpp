#pragma once

#include <random>

#include "swid/plant.hpp"

namespace swid::testing {

inline SwitchedLinearModel three_region_model() {
  std::vector<Subsystem> subs(3);
  subs[0] = {{RegionId{1}, {{-2, 1}, {-1, -1}}}, {{0.9, 0.3}, {-0.2, 0.75}}, {{1.5}, {0.8}}};
  subs[1] = {{RegionId{2}, {{1, 1}, {-1, 2}}}, {{0.8, 0.25}, {-0.3, 0.7}}, {{1.0}, {1.0}}};
  subs[2] = {{RegionId{3}, {{1, -2}, {2, -1}}}, {{0.7, 0.4}, {-0.35, 0.9}}, {{0.9}, {1.2}}};
  return SwitchedLinearModel(2, 1, std::move(subs));
}

inline RunConfig three_region_run(std::uint64_t seed = 1, std::size_t tau = 3600) {
  RunConfig cfg;
  cfg.x0 = {51, 100};
  cfg.tau = tau;
  cfg.L = Matrix{{0.12, 0.12}};
  cfg.noise_scale = 0.005;
  cfg.seed = seed;
  cfg.P = Matrix::identity(2);
  cfg.lyapunov_epsilon = 0.99;
  return cfg;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).max_abs(); }

}  // namespace swid::testing
