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

#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "doctest.h"
#include "tsibo/acquisition.hpp"
#include "tsibo/gp.hpp"

using namespace tsibo;

namespace {

// Force a few worker threads even on small machines so the parallel code
// paths genuinely interleave.
struct ThreadGuard {
  ThreadGuard() {
#ifdef _OPENMP
    omp_set_num_threads(3);
#endif
  }
};
const ThreadGuard guard;

std::vector<Observation> random_observations(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Standardizer box;
  std::vector<Observation> data;
  for (int i = 0; i < n; ++i) {
    Eigen::Matrix<double, kParamDim, 1> z;
    for (int d = 0; d < kParamDim; ++d) z[d] = unif(rng);
    data.push_back({box.from_unit(z), Fidelity{(i % 10 + 1) / 10.0}, -60.0 * unif(rng) - 5.0});
  }
  return data;
}

GpHyperparams test_hyper() {
  GpHyperparams h;
  h.noise_variance = 1e-4;
  h.lengthscales.setConstant(0.4);
  return h;
}

}  // namespace

TEST_CASE("parallel gram matrix is bitwise identical to the serial one") {
  for (int n : {1, 7, 40, 120}) {
    const GpModel model = fit_gp(random_observations(n, 100 + static_cast<std::uint64_t>(n)),
                                 test_hyper(), ParamBounds{});
    const Eigen::MatrixXd& X = model.standardized_inputs();
    const Eigen::MatrixXd a = gram_matrix(X, model.hyperparams());
    const Eigen::MatrixXd b = gram_matrix_reference(X, model.hyperparams());
    REQUIRE(a.rows() == b.rows());
    CHECK((a.array() == b.array()).all());
    CHECK((a.array() == a.transpose().array()).all());
  }
}

TEST_CASE("parallel batch prediction is bitwise identical to serial") {
  const GpModel model = fit_gp(random_observations(35, 7), test_hyper(), ParamBounds{});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Standardizer box;
  std::vector<std::pair<ParamVector, Fidelity>> queries;
  for (int q = 0; q < 257; ++q) {  // odd count so chunks are uneven
    Eigen::Matrix<double, kParamDim, 1> z;
    for (int d = 0; d < kParamDim; ++d) z[d] = unif(rng);
    queries.emplace_back(box.from_unit(z), Fidelity{(q % 10 + 1) / 10.0});
  }

  Eigen::VectorXd mp, vp, ms, vs;
  model.predict_batch(queries, mp, vp);
  model.predict_batch_reference(queries, ms, vs);
  REQUIRE(mp.size() == ms.size());
  CHECK((mp.array() == ms.array()).all());
  CHECK((vp.array() == vs.array()).all());

  // And both match the scalar path exactly.
  for (int q = 0; q < mp.size(); ++q) {
    const Posterior p = model.predict(queries[static_cast<std::size_t>(q)].first,
                                      queries[static_cast<std::size_t>(q)].second);
    CHECK(mp[q] == p.mean);
    CHECK(vp[q] == p.variance);
  }
}

TEST_CASE("parallel expected loss is bitwise identical to serial") {
  const GpModel model = fit_gp(random_observations(25, 9), test_hyper(), ParamBounds{});
  AcquisitionConfig cfg;
  cfg.n_fantasies = 128;
  cfg.n_inner_candidates = 128;
  cfg.seed = 5;
  cfg.fantasy_fidelities = {Fidelity{0.2}, Fidelity{0.6}, Fidelity::target()};
  const TakgEvaluator eval(model, cfg, ParamBounds{});

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Standardizer box;
  for (int q = 0; q < 20; ++q) {
    Eigen::Matrix<double, kParamDim, 1> z;
    for (int d = 0; d < kParamDim; ++d) z[d] = unif(rng);
    const ParamVector theta = box.from_unit(z);
    CHECK(eval.expected_loss(theta, cfg.fantasy_fidelities) ==
          eval.expected_loss_reference(theta, cfg.fantasy_fidelities));
  }
}

TEST_CASE("repeated parallel evaluations are self-consistent") {
  // Guards against nondeterministic reductions: two runs of the same parallel
  // kernel must agree bit for bit with each other, not just with the serial
  // reference.
  const GpModel model = fit_gp(random_observations(30, 11), test_hyper(), ParamBounds{});
  const Eigen::MatrixXd& X = model.standardized_inputs();
  const Eigen::MatrixXd g1 = gram_matrix(X, model.hyperparams());
  const Eigen::MatrixXd g2 = gram_matrix(X, model.hyperparams());
  CHECK((g1.array() == g2.array()).all());

  AcquisitionConfig cfg;
  cfg.n_fantasies = 64;
  cfg.seed = 6;
  cfg.fantasy_fidelities = {Fidelity::target()};
  const TakgEvaluator eval(model, cfg, ParamBounds{});
  Standardizer box;
  const ParamVector theta = box.from_unit(Eigen::Matrix<double, kParamDim, 1>::Constant(0.42));
  const double a = eval.expected_loss(theta, cfg.fantasy_fidelities);
  const double b = eval.expected_loss(theta, cfg.fantasy_fidelities);
  CHECK(a == b);
}
