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

#include "tsibo/gp.hpp"

#include <cmath>
#include <numbers>

namespace tsibo {

namespace {

constexpr double kJitterStart = 1e-6;
constexpr double kJitterMax = 1e-2;

JointPoint make_joint(const Eigen::Matrix<double, kParamDim, 1>& z, Fidelity s) {
  JointPoint p;
  p.head<kParamDim>() = z;
  p[kParamDim] = s.s;
  return p;
}

}  // namespace

double kernel_joint_std(const JointPoint& a, const JointPoint& b, const GpHyperparams& h) {
  return kernel_joint(a.head<kParamDim>(), Fidelity{a[kParamDim]}, b.head<kParamDim>(),
                      Fidelity{b[kParamDim]}, h);
}

Eigen::MatrixXd gram_matrix_reference(const Eigen::MatrixXd& X, const GpHyperparams& h) {
  const int n = static_cast<int>(X.rows());
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = kernel_joint_std(X.row(i).transpose(), X.row(j).transpose(), h);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, const GpHyperparams& h) {
  const int n = static_cast<int>(X.rows());
  Eigen::MatrixXd K(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = kernel_joint_std(X.row(i).transpose(), X.row(j).transpose(), h);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

GpModel GpModel::fit(std::vector<Observation> data, const GpHyperparams& h,
                     const Standardizer& st) {
  h.validate();
  GpModel m;
  m.hyper_ = h;
  m.std_ = st;
  m.data_ = std::move(data);
  const int n = m.size();
  m.X_.resize(n, kParamDim + 1);
  for (int i = 0; i < n; ++i) {
    const auto& obs = m.data_[static_cast<std::size_t>(i)];
    validate_theta(obs.theta, st.bounds);
    if (!(obs.fidelity.s > 0.0) || obs.fidelity.s > 1.0)
      throw std::invalid_argument("observation fidelity must lie in (0, 1]");
    if (!std::isfinite(obs.g)) throw std::invalid_argument("observation value must be finite");
    m.X_.row(i) = make_joint(st.to_unit(obs.theta), obs.fidelity).transpose();
  }
  m.factorize();
  return m;
}

void GpModel::factorize() {
  const int n = size();
  if (n == 0) {
    chol_.resize(0, 0);
    alpha_.resize(0);
    jitter_ = 0.0;
    return;
  }
  Eigen::VectorXd resid(n);
  for (int i = 0; i < n; ++i) resid[i] = std_.standardize_g(data_[static_cast<std::size_t>(i)].g);

  const Eigen::MatrixXd K = gram_matrix(X_, hyper_);
  double jitter = 0.0;
  while (true) {
    Eigen::MatrixXd Ks = K;
    Ks.diagonal().array() += hyper_.noise_variance + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(Ks);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      jitter_ = jitter;
      alpha_ = chol_.triangularView<Eigen::Lower>().solve(resid);
      chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha_);
      return;
    }
    if (jitter == 0.0) {
      jitter = kJitterStart;
    } else if (jitter < kJitterMax) {
      jitter = std::min(jitter * 10.0, kJitterMax);
    } else {
      throw IllConditionedGram("Gram matrix not positive definite at maximum jitter");
    }
  }
}

GpModel GpModel::conditioned_on(const Observation& obs) const {
  GpModel m = *this;
  validate_theta(obs.theta, std_.bounds);
  if (!(obs.fidelity.s > 0.0) || obs.fidelity.s > 1.0)
    throw std::invalid_argument("observation fidelity must lie in (0, 1]");
  if (!std::isfinite(obs.g)) throw std::invalid_argument("observation value must be finite");

  const int n = size();
  m.data_.push_back(obs);
  const JointPoint q = make_joint(std_.to_unit(obs.theta), obs.fidelity);
  m.X_.conservativeResize(n + 1, Eigen::NoChange);
  m.X_.row(n) = q.transpose();
  if (n == 0) {
    m.factorize();
    return m;
  }

  // Append one row to the lower Cholesky factor: the leading block is
  // unchanged, the new row is L21 = L^{-1} k(X,q), and the corner must keep
  // k(q,q) + noise + jitter - |L21|^2 positive. If it is not, the extended
  // Gram needs more jitter, so refit from scratch.
  const Eigen::VectorXd k = kernel_vs_data(q);
  Eigen::VectorXd l21 = chol_.triangularView<Eigen::Lower>().solve(k);
  const double knn = kernel_joint_std(q, q, hyper_) + hyper_.noise_variance + jitter_;
  const double corner2 = knn - l21.squaredNorm();
  if (corner2 <= 0.0 || !std::isfinite(corner2)) {
    return fit(std::move(m.data_), hyper_, std_);
  }
  m.chol_.conservativeResize(n + 1, n + 1);
  m.chol_.row(n).head(n) = l21.transpose();
  m.chol_.col(n).setZero();
  m.chol_(n, n) = std::sqrt(corner2);

  Eigen::VectorXd resid(n + 1);
  for (int i = 0; i <= n; ++i) resid[i] = std_.standardize_g(m.data_[static_cast<std::size_t>(i)].g);
  m.alpha_ = m.chol_.triangularView<Eigen::Lower>().solve(resid);
  m.chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(m.alpha_);
  return m;
}

JointPoint GpModel::standardized_point(const ParamVector& theta, Fidelity s) const {
  return make_joint(std_.to_unit(theta), s);
}

Eigen::VectorXd GpModel::kernel_vs_data(const JointPoint& q) const {
  const int n = size();
  Eigen::VectorXd k(n);
  for (int i = 0; i < n; ++i) k[i] = kernel_joint_std(X_.row(i).transpose(), q, hyper_);
  return k;
}

Posterior GpModel::predict(const ParamVector& theta, Fidelity s) const {
  const JointPoint q = standardized_point(theta, s);
  const double kqq = kernel_joint_std(q, q, hyper_);
  if (empty()) {
    return Posterior{std_.unstandardize_mean(0.0), std_.unstandardize_variance(kqq)};
  }
  const Eigen::VectorXd k = kernel_vs_data(q);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  const double mean = k.dot(alpha_);
  const double var = std::max(kqq - v.squaredNorm(), 0.0);
  return Posterior{std_.unstandardize_mean(mean), std_.unstandardize_variance(var)};
}

void GpModel::predict_batch_reference(const std::vector<std::pair<ParamVector, Fidelity>>& queries,
                                      Eigen::VectorXd& means, Eigen::VectorXd& variances) const {
  const int m = static_cast<int>(queries.size());
  means.resize(m);
  variances.resize(m);
  for (int i = 0; i < m; ++i) {
    const auto& [theta, s] = queries[static_cast<std::size_t>(i)];
    const Posterior p = predict(theta, s);
    means[i] = p.mean;
    variances[i] = p.variance;
  }
}

void GpModel::predict_batch(const std::vector<std::pair<ParamVector, Fidelity>>& queries,
                            Eigen::VectorXd& means, Eigen::VectorXd& variances) const {
  const int m = static_cast<int>(queries.size());
  means.resize(m);
  variances.resize(m);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const auto& [theta, s] = queries[static_cast<std::size_t>(i)];
    const Posterior p = predict(theta, s);
    means[i] = p.mean;
    variances[i] = p.variance;
  }
}

JointPosterior GpModel::predict_joint(const ParamVector& theta,
                                      const std::vector<Fidelity>& fids) const {
  const int m = static_cast<int>(fids.size());
  Eigen::MatrixXd P(m, kParamDim + 1);
  const Eigen::Matrix<double, kParamDim, 1> z = std_.to_unit(theta);
  for (int i = 0; i < m; ++i) P.row(i) = make_joint(z, fids[static_cast<std::size_t>(i)]).transpose();

  Eigen::MatrixXd Kpp(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      Kpp(i, j) = kernel_joint_std(P.row(i).transpose(), P.row(j).transpose(), hyper_);

  JointPosterior out;
  if (empty()) {
    out.mean = Eigen::VectorXd::Constant(m, std_.unstandardize_mean(0.0));
    out.cov = std_.unstandardize_variance(1.0) * Kpp;
    return out;
  }
  const int n = size();
  Eigen::MatrixXd Kxp(n, m);
  for (int j = 0; j < m; ++j) Kxp.col(j) = kernel_vs_data(P.row(j).transpose());
  const Eigen::MatrixXd V = chol_.triangularView<Eigen::Lower>().solve(Kxp);
  Eigen::VectorXd mean_std = Kxp.transpose() * alpha_;
  Eigen::MatrixXd cov_std = Kpp - V.transpose() * V;
  out.mean.resize(m);
  for (int i = 0; i < m; ++i) out.mean[i] = std_.unstandardize_mean(mean_std[i]);
  out.cov = std_.unstandardize_variance(1.0) * 0.5 * (cov_std + cov_std.transpose());
  return out;
}

double GpModel::log_marginal_likelihood() const {
  const int n = size();
  if (n == 0) return 0.0;
  Eigen::VectorXd resid(n);
  for (int i = 0; i < n; ++i) resid[i] = std_.standardize_g(data_[static_cast<std::size_t>(i)].g);
  const double data_fit = 0.5 * resid.dot(alpha_);
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += std::log(chol_(i, i));
  return -data_fit - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

GpModel fit_gp(std::vector<Observation> data, const GpHyperparams& h, const ParamBounds& bounds) {
  const Standardizer st = Standardizer::from_observations(data, bounds);
  return GpModel::fit(std::move(data), h, st);
}

}  // namespace tsibo
