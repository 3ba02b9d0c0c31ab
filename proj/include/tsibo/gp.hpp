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

#ifndef TSIBO_GP_HPP
#define TSIBO_GP_HPP

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tsibo/kernels.hpp"
#include "tsibo/types.hpp"

namespace tsibo {

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

struct JointPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Joint input point in standardized coordinates: 5 unit-cube parameter
// coordinates followed by the fidelity.
using JointPoint = Eigen::Matrix<double, kParamDim + 1, 1>;

[[nodiscard]] double kernel_joint_std(const JointPoint& a, const JointPoint& b,
                                      const GpHyperparams& h);

// Gram matrix of standardized points (rows of X), without noise. Parallel
// over entries; bitwise identical to gram_matrix_reference.
[[nodiscard]] Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, const GpHyperparams& h);
[[nodiscard]] Eigen::MatrixXd gram_matrix_reference(const Eigen::MatrixXd& X,
                                                    const GpHyperparams& h);

// Gaussian-process posterior over the closed-loop objective, jointly in
// controller parameters and episode fidelity. Immutable after construction:
// conditioning returns a new model.
class GpModel {
 public:
  GpModel() = default;

  // Fits the factorization for the given data, hyperparameters, and frozen
  // standardizer. Throws IllConditionedGram if the Gram matrix cannot be
  // factorized even at the maximum jitter.
  [[nodiscard]] static GpModel fit(std::vector<Observation> data, const GpHyperparams& h,
                                   const Standardizer& st);

  // Rank-one update: equivalent to fit() on the extended dataset with the
  // same hyperparameters and standardizer.
  [[nodiscard]] GpModel conditioned_on(const Observation& obs) const;

  [[nodiscard]] Posterior predict(const ParamVector& theta, Fidelity s) const;

  // Parallel batch prediction; bitwise identical to predict() per query.
  void predict_batch(const std::vector<std::pair<ParamVector, Fidelity>>& queries,
                     Eigen::VectorXd& means, Eigen::VectorXd& variances) const;
  void predict_batch_reference(const std::vector<std::pair<ParamVector, Fidelity>>& queries,
                               Eigen::VectorXd& means, Eigen::VectorXd& variances) const;

  // Posterior mean and covariance of the latent objective at several
  // fidelities of one parameter point (no observation noise added).
  [[nodiscard]] JointPosterior predict_joint(const ParamVector& theta,
                                             const std::vector<Fidelity>& fids) const;

  [[nodiscard]] double log_marginal_likelihood() const;

  [[nodiscard]] int size() const { return static_cast<int>(data_.size()); }
  [[nodiscard]] bool empty() const { return data_.empty(); }
  [[nodiscard]] const std::vector<Observation>& data() const { return data_; }
  [[nodiscard]] const GpHyperparams& hyperparams() const { return hyper_; }
  [[nodiscard]] const Standardizer& standardizer() const { return std_; }

  // Advanced accessors used by the acquisition and by verification checks.
  [[nodiscard]] const Eigen::MatrixXd& standardized_inputs() const { return X_; }
  [[nodiscard]] const Eigen::MatrixXd& chol() const { return chol_; }
  [[nodiscard]] const Eigen::VectorXd& alpha() const { return alpha_; }
  [[nodiscard]] double jitter_used() const { return jitter_; }

  [[nodiscard]] JointPoint standardized_point(const ParamVector& theta, Fidelity s) const;
  // k(X, q) for a standardized query point.
  [[nodiscard]] Eigen::VectorXd kernel_vs_data(const JointPoint& q) const;

 private:
  GpHyperparams hyper_;
  Standardizer std_;
  std::vector<Observation> data_;
  Eigen::MatrixXd X_;      // n x 6 standardized inputs
  Eigen::MatrixXd chol_;   // lower factor of K + (noise + jitter) I
  Eigen::VectorXd alpha_;  // (K + (noise + jitter) I)^{-1} residuals
  double jitter_ = 0.0;

  void factorize();
};

// Convenience: standardizer derived from the data.
[[nodiscard]] GpModel fit_gp(std::vector<Observation> data, const GpHyperparams& h,
                             const ParamBounds& bounds);

}  // namespace tsibo

#endif  // TSIBO_GP_HPP
