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

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tsibo/acquisition.hpp"
#include "tsibo/gp.hpp"
#include "tsibo/types.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_seconds(const std::function<void()>& fn, int reps) {
  fn();  // warm up caches and lazy allocations
  const auto start = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(Clock::now() - start).count() / reps;
}

std::vector<tsibo::Observation> synthetic_dataset(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  tsibo::Standardizer st;
  std::vector<tsibo::Observation> data;
  data.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Eigen::Matrix<double, tsibo::kParamDim, 1> z;
    for (int d = 0; d < tsibo::kParamDim; ++d) z[d] = unif(rng);
    data.push_back({st.from_unit(z), tsibo::Fidelity{(i % 10 + 1) / 10.0},
                    -std::exp(3.0 * unif(rng)) * 10.0});
  }
  return data;
}

void report_row(const char* kernel, int n, double serial_s, double parallel_s) {
  std::printf("%-16s %6d %12.3f %12.3f %9.2fx\n", kernel, n, serial_s * 1e3, parallel_s * 1e3,
              serial_s / parallel_s);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled; both columns run the serial path\n");
#endif
  std::printf("%-16s %6s %12s %12s %10s\n", "kernel", "n", "serial(ms)", "parallel(ms)", "speedup");

  tsibo::GpHyperparams hyper;
  for (int n : {100, 250, 500}) {
    const auto data = synthetic_dataset(n, 42);
    const tsibo::GpModel model = tsibo::fit_gp(data, hyper, tsibo::ParamBounds{});
    const Eigen::MatrixXd X = model.standardized_inputs();

    const double serial = time_seconds(
        [&] { volatile double sink = tsibo::gram_matrix_reference(X, hyper)(0, 0); (void)sink; },
        5);
    const double parallel = time_seconds(
        [&] { volatile double sink = tsibo::gram_matrix(X, hyper)(0, 0); (void)sink; }, 5);
    report_row("gram_matrix", n, serial, parallel);
  }

  for (int n : {100, 250, 500}) {
    const auto data = synthetic_dataset(n, 43);
    const tsibo::GpModel model = tsibo::fit_gp(data, hyper, tsibo::ParamBounds{});
    const int n_query = 512;
    std::vector<std::pair<tsibo::ParamVector, tsibo::Fidelity>> queries;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    tsibo::Standardizer box;
    for (int q = 0; q < n_query; ++q) {
      Eigen::Matrix<double, tsibo::kParamDim, 1> z;
      for (int d = 0; d < tsibo::kParamDim; ++d) z[d] = unif(rng);
      queries.emplace_back(box.from_unit(z), tsibo::Fidelity{(q % 10 + 1) / 10.0});
    }
    Eigen::VectorXd means, variances;
    const double serial = time_seconds(
        [&] {
          model.predict_batch_reference(queries, means, variances);
          volatile double sink = means[0];
          (void)sink;
        },
        5);
    const double parallel = time_seconds(
        [&] {
          model.predict_batch(queries, means, variances);
          volatile double sink = means[0];
          (void)sink;
        },
        5);
    report_row("predict_batch", n, serial, parallel);
  }

  for (int n : {100, 250, 500}) {
    const auto data = synthetic_dataset(n, 44);
    const tsibo::GpModel model = tsibo::fit_gp(data, hyper, tsibo::ParamBounds{});
    tsibo::AcquisitionConfig cfg;
    cfg.seed = 5;
    cfg.fantasy_fidelities = tsibo::fidelity_grid(10);
    const tsibo::TakgEvaluator eval(model, cfg, tsibo::ParamBounds{});
    tsibo::ParamVector theta;
    theta << 0.5, 2.0, 1.0, 0.3, 4.0;
    const double serial = time_seconds(
        [&] {
          volatile double sink = eval.expected_loss_reference(theta, cfg.fantasy_fidelities);
          (void)sink;
        },
        5);
    const double parallel = time_seconds(
        [&] {
          volatile double sink = eval.expected_loss(theta, cfg.fantasy_fidelities);
          (void)sink;
        },
        5);
    report_row("expected_loss", n, serial, parallel);
  }
  return 0;
}
