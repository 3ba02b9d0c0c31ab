/*
 Copyright 2026 The tsibo authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <cmath>
#include <random>

#include "doctest.h"
#include "tsibo/kernels.hpp"
#include "tsibo/rng.hpp"
#include "tsibo/types.hpp"

using namespace tsibo;

namespace {

Eigen::Matrix<double, kParamDim, 1> unit_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::Matrix<double, kParamDim, 1> z;
  for (int d = 0; d < kParamDim; ++d) z[d] = unif(rng);
  return z;
}

}  // namespace

TEST_CASE("matern kernel closed form at unit distance") {
  GpHyperparams h;
  h.lengthscales.setOnes();
  Eigen::Matrix<double, kParamDim, 1> a = Eigen::Matrix<double, kParamDim, 1>::Zero();
  Eigen::Matrix<double, kParamDim, 1> b = Eigen::Matrix<double, kParamDim, 1>::Zero();
  b[0] = 1.0;
  // (1 + sqrt5 + 5/3) * exp(-sqrt5) evaluated independently.
  CHECK(kernel_matern52(a, b, h) == doctest::Approx(0.5239941088318203).epsilon(1e-14));
}

TEST_CASE("matern kernel basic properties") {
  GpHyperparams h;
  h.lengthscales << 0.3, 0.7, 1.1, 0.5, 2.0;
  h.signal_variance = 1.7;
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = unit_point(rng);
    const auto b = unit_point(rng);
    const double kab = kernel_matern52(a, b, h);
    CHECK(kab == doctest::Approx(kernel_matern52(b, a, h)).epsilon(1e-15));  // symmetry
    CHECK(kab <= h.signal_variance + 1e-12);
    CHECK(kab > 0.0);
    CHECK(kernel_matern52(a, a, h) == doctest::Approx(h.signal_variance).epsilon(1e-15));
  }
}

TEST_CASE("matern kernel decreases with distance along a ray") {
  GpHyperparams h;
  const Eigen::Matrix<double, kParamDim, 1> a = Eigen::Matrix<double, kParamDim, 1>::Zero();
  Eigen::Matrix<double, kParamDim, 1> b = a;
  double prev = kernel_matern52(a, b, h);
  for (int i = 1; i <= 10; ++i) {
    b[2] = 0.1 * i;
    const double cur = kernel_matern52(a, b, h);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("fidelity kernel has unit diagonal and decaying correlation") {
  GpHyperparams h;
  for (double s : {0.1, 0.3, 0.5, 1.0}) {
    CHECK(kernel_fidelity(Fidelity{s}, Fidelity{s}, h) == doctest::Approx(1.0).epsilon(1e-14));
  }
  // Correlation with target fidelity grows as s approaches 1.
  double prev = 0.0;
  for (double s : {0.1, 0.3, 0.5, 0.8, 1.0}) {
    const double rho = kernel_fidelity(Fidelity{s}, Fidelity::target(), h);
    CHECK(rho > prev);
    CHECK(rho <= 1.0 + 1e-14);
    prev = rho;
  }
}

TEST_CASE("fidelity kernel gram matrix is positive definite on the checkpoint grid") {
  for (double decay : {0.3, 1.0, 3.0}) {
    for (double offset : {0.2, 1.0, 5.0}) {
      GpHyperparams h;
      h.fidelity_decay = decay;
      h.fidelity_offset = offset;
      const std::vector<Fidelity> grid = fidelity_grid(10);
      Eigen::MatrixXd K(10, 10);
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) K(i, j) = kernel_fidelity(grid[i], grid[j], h);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
      CHECK(es.eigenvalues().minCoeff() > -1e-10);
      // Diagonal dominance of the normalized form: no off-diagonal entry
      // exceeds the unit diagonal.
      CHECK(K.maxCoeff() <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("fidelity kernel is inactive for the single-fidelity baseline") {
  GpHyperparams h;
  h.fidelity_active = false;
  CHECK(kernel_fidelity(Fidelity{0.1}, Fidelity{1.0}, h) == 1.0);
  CHECK(kernel_fidelity(Fidelity{0.3}, Fidelity{0.7}, h) == 1.0);
}

TEST_CASE("joint kernel factorizes into parameter and fidelity parts") {
  GpHyperparams h;
  h.lengthscales << 0.4, 0.9, 1.3, 0.6, 0.8;
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = unit_point(rng);
    const auto b = unit_point(rng);
    const Fidelity s1{0.1 * (1 + rep % 10)};
    const Fidelity s2{0.1 * (1 + (rep * 3) % 10)};
    CHECK(kernel_joint(a, s1, b, s2, h) ==
          doctest::Approx(kernel_matern52(a, b, h) * kernel_fidelity(s1, s2, h)).epsilon(1e-14));
  }
}

TEST_CASE("hyperparameter validation rejects bad values") {
  GpHyperparams h;
  CHECK_NOTHROW(h.validate());
  GpHyperparams bad = h;
  bad.lengthscales[2] = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = h;
  bad.signal_variance = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = h;
  bad.noise_variance = -1e-9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = h;
  bad.fidelity_decay = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = h;
  bad.fidelity_offset = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("mix_seed separates streams and seeds") {
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(mix_seed(7, 101) != mix_seed(7, 102));
  CHECK(mix_seed(7, 101) == mix_seed(7, 101));
}

TEST_CASE("latin hypercube covers every stratum once per dimension") {
  std::mt19937_64 rng(5);
  const int n = 16;
  const Eigen::MatrixXd pts = latin_hypercube(n, 3, rng);
  REQUIRE(pts.rows() == n);
  REQUIRE(pts.cols() == 3);
  for (int d = 0; d < 3; ++d) {
    std::vector<int> strata(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      const double v = pts(i, d);
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
      strata[static_cast<std::size_t>(v * n)]++;
    }
    for (int c : strata) CHECK(c == 1);
  }
}

TEST_CASE("latin hypercube parameter designs are deterministic and in bounds") {
  const ParamBounds bounds;
  const auto a = latin_hypercube_params(8, bounds, 99);
  const auto b = latin_hypercube_params(8, bounds, 99);
  const auto c = latin_hypercube_params(8, bounds, 100);
  REQUIRE(a.size() == 8);
  bool identical = true;
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(theta_in_bounds(a[i], bounds));
    identical = identical && (a[i] == b[i]);
    differs = differs || !(a[i] == c[i]);
  }
  CHECK(identical);
  CHECK(differs);
}

TEST_CASE("standardizer round-trips parameters through the unit cube") {
  Standardizer st;
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    const auto z = unit_point(rng);
    const ParamVector theta = st.from_unit(z);
    CHECK(theta_in_bounds(theta, st.bounds));
    const auto back = st.to_unit(theta);
    for (int d = 0; d < kParamDim; ++d) CHECK(back[d] == doctest::Approx(z[d]).epsilon(1e-12));
  }
  // Edges of the cube land exactly on the box despite log/exp rounding.
  const Eigen::Matrix<double, kParamDim, 1> ones = Eigen::Matrix<double, kParamDim, 1>::Ones();
  const Eigen::Matrix<double, kParamDim, 1> zeros = Eigen::Matrix<double, kParamDim, 1>::Zero();
  CHECK(theta_in_bounds(st.from_unit(ones), st.bounds));
  CHECK(theta_in_bounds(st.from_unit(zeros), st.bounds));
}

TEST_CASE("standardizer centers and scales objective values") {
  std::vector<Observation> data;
  Standardizer box;
  for (double g : {-10.0, -20.0, -30.0}) {
    data.push_back({box.from_unit(Eigen::Matrix<double, kParamDim, 1>::Constant(0.5)),
                    Fidelity::target(), g});
  }
  const Standardizer st = Standardizer::from_observations(data, ParamBounds{});
  CHECK(st.g_shift == doctest::Approx(-20.0));
  CHECK(st.standardize_g(-20.0) == doctest::Approx(0.0));
  CHECK(st.unstandardize_mean(st.standardize_g(-10.0)) == doctest::Approx(-10.0));
  CHECK(st.unstandardize_variance(1.0) == doctest::Approx(st.g_scale * st.g_scale));
}

TEST_CASE("incumbent updates only from target fidelity observations") {
  Incumbent inc;
  CHECK_FALSE(inc.valid);
  Standardizer box;
  const ParamVector theta = box.from_unit(Eigen::Matrix<double, kParamDim, 1>::Constant(0.5));
  inc = update_incumbent(inc, Observation{theta, Fidelity{0.5}, -1.0});
  CHECK_FALSE(inc.valid);
  inc = update_incumbent(inc, Observation{theta, Fidelity::target(), -30.0});
  CHECK(inc.valid);
  CHECK(inc.g_star == doctest::Approx(-30.0));
  inc = update_incumbent(inc, Observation{theta, Fidelity::target(), -40.0});
  CHECK(inc.g_star == doctest::Approx(-30.0));  // worse value leaves it alone
  inc = update_incumbent(inc, Observation{theta, Fidelity::target(), -20.0});
  CHECK(inc.g_star == doctest::Approx(-20.0));
  // The optional overload: absent observation leaves the incumbent unchanged.
  inc = update_incumbent(inc, std::nullopt);
  CHECK(inc.g_star == doctest::Approx(-20.0));
}

TEST_CASE("fidelity grid spans (0, 1] evenly") {
  const std::vector<Fidelity> grid = fidelity_grid(10);
  REQUIRE(grid.size() == 10);
  CHECK(grid.front().s == doctest::Approx(0.1));
  CHECK(grid.back().s == doctest::Approx(1.0));
  CHECK(grid.back().is_target());
  for (std::size_t i = 1; i < grid.size(); ++i)
    CHECK(grid[i].s - grid[i - 1].s == doctest::Approx(0.1).epsilon(1e-12));
}
