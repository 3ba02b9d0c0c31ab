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

#include "tsibo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "tsibo/rng.hpp"
#include "tsibo/stopping.hpp"

namespace tsibo {

namespace {

constexpr int kZetaRows = 64;  // fantasy dimension ceiling
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Seed streams so candidate, fantasy, start, and fallback draws stay
// independent of each other.
enum : std::uint64_t {
  kStreamCandidates = 11,
  kStreamFantasies = 12,
  kStreamStarts = 13,
  kStreamFallback = 14,
};

JointPoint joint_from_unit(const Eigen::Matrix<double, kParamDim, 1>& z, Fidelity s) {
  JointPoint p;
  p.head<kParamDim>() = z;
  p[kParamDim] = s.s;
  return p;
}

// Shared multistart-plus-coordinate-refinement maximizer over the unit cube.
SelectResult maximize_over_unit_cube(const std::function<double(const Eigen::Matrix<double, kParamDim, 1>&)>& objective,
                                     const AcquisitionConfig& cfg, const Standardizer& st) {
  SelectResult result;
  std::mt19937_64 start_rng(mix_seed(cfg.seed, kStreamStarts));
  const Eigen::MatrixXd starts = latin_hypercube(cfg.n_restarts, kParamDim, start_rng);

  std::vector<Eigen::Matrix<double, kParamDim, 1>> pts;
  std::vector<double> vals;
  pts.reserve(static_cast<std::size_t>(cfg.n_restarts));
  for (int i = 0; i < cfg.n_restarts; ++i) {
    Eigen::Matrix<double, kParamDim, 1> z = starts.row(i).transpose();
    const double v = objective(z);
    ++result.evals;
    pts.push_back(z);
    vals.push_back(v);
  }

  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return vals[static_cast<std::size_t>(a)] > vals[static_cast<std::size_t>(b)];
  });

  Eigen::Matrix<double, kParamDim, 1> best_z = pts[static_cast<std::size_t>(order[0])];
  double best_v = vals[static_cast<std::size_t>(order[0])];

  const int refinements = std::min<int>(cfg.polish_starts, static_cast<int>(order.size()));
  for (int r = 0; r < refinements; ++r) {
    Eigen::Matrix<double, kParamDim, 1> z = pts[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    double fz = vals[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    double step = 0.15;
    for (int sweep = 0; sweep < cfg.polish_sweeps; ++sweep) {
      for (int d = 0; d < kParamDim; ++d) {
        for (const double sign : {1.0, -1.0}) {
          Eigen::Matrix<double, kParamDim, 1> y = z;
          y[d] = std::clamp(y[d] + sign * step, 0.0, 1.0);
          if (y[d] == z[d]) continue;
          const double fy = objective(y);
          ++result.evals;
          if (fy > fz) {
            z = y;
            fz = fy;
            break;
          }
        }
      }
      step *= 0.5;
    }
    if (fz > best_v) {
      best_v = fz;
      best_z = z;
    }
  }

  if (!std::isfinite(best_v)) {
    std::mt19937_64 fb_rng(mix_seed(cfg.seed, kStreamFallback));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int d = 0; d < kParamDim; ++d) best_z[d] = unif(fb_rng);
    result.fallback = true;
    best_v = 0.0;
  }
  result.theta = st.from_unit(best_z);
  result.value = best_v;
  return result;
}

}  // namespace

TakgEvaluator::TakgEvaluator(const GpModel& model, const AcquisitionConfig& cfg,
                             const ParamBounds& bounds)
    : model_(&model), cfg_(cfg), bounds_(bounds) {
  cfg_.validate();
  bounds_.validate();
  if (cfg_.n_fantasies % 2 != 0) ++cfg_.n_fantasies;

  // Candidate set: Latin hypercube, the distinct observed parameter points,
  // then one point polished on the current posterior mean.
  std::mt19937_64 cand_rng(mix_seed(cfg_.seed, kStreamCandidates));
  const Eigen::MatrixXd lhs = latin_hypercube(cfg_.n_inner_candidates, kParamDim, cand_rng);
  std::vector<Eigen::Matrix<double, kParamDim, 1>> cands;
  cands.reserve(static_cast<std::size_t>(cfg_.n_inner_candidates) + model.data().size() + 1);
  for (int i = 0; i < lhs.rows(); ++i) cands.push_back(lhs.row(i).transpose());
  const Eigen::MatrixXd& X = model.standardized_inputs();
  for (int i = 0; i < X.rows(); ++i) {
    const Eigen::Matrix<double, kParamDim, 1> z = X.row(i).head<kParamDim>().transpose();
    bool seen = false;
    for (std::size_t j = static_cast<std::size_t>(cfg_.n_inner_candidates); j < cands.size() && !seen;
         ++j)
      seen = (cands[j] - z).cwiseAbs().maxCoeff() < 1e-12;
    if (!seen) cands.push_back(z);
  }

  const auto posterior_mean_std = [&](const Eigen::Matrix<double, kParamDim, 1>& z) {
    if (model_->empty()) return 0.0;
    const Eigen::VectorXd k = model_->kernel_vs_data(joint_from_unit(z, Fidelity::target()));
    return k.dot(model_->alpha());
  };

  // Polish the best mean candidate by coordinate descent on the mean.
  {
    std::size_t best_i = 0;
    double best_m = kNegInf;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const double m = posterior_mean_std(cands[i]);
      if (m > best_m) {
        best_m = m;
        best_i = i;
      }
    }
    Eigen::Matrix<double, kParamDim, 1> z = cands[best_i];
    double fz = best_m;
    double step = 0.1;
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (int d = 0; d < kParamDim; ++d) {
        for (const double sign : {1.0, -1.0}) {
          Eigen::Matrix<double, kParamDim, 1> y = z;
          y[d] = std::clamp(y[d] + sign * step, 0.0, 1.0);
          if (y[d] == z[d]) continue;
          const double fy = posterior_mean_std(y);
          if (fy > fz) {
            z = y;
            fz = fy;
            break;
          }
        }
      }
      step *= 0.5;
    }
    cands.push_back(z);
  }

  const int J = static_cast<int>(cands.size());
  cand_unit_.resize(J, kParamDim);
  for (int j = 0; j < J; ++j) cand_unit_.row(j) = cands[static_cast<std::size_t>(j)].transpose();

  const int n = model.size();
  cand_mean_.resize(J);
  cand_v_.resize(n, J);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < J; ++j) {
    const JointPoint q = joint_from_unit(cand_unit_.row(j).transpose(), Fidelity::target());
    if (n == 0) {
      cand_mean_[j] = 0.0;
      continue;
    }
    const Eigen::VectorXd k = model.kernel_vs_data(q);
    cand_mean_[j] = k.dot(model.alpha());
    cand_v_.col(j) = model.chol().triangularView<Eigen::Lower>().solve(k);
  }
  best_current_mean_ = cand_mean_.maxCoeff();

  // Antithetic fantasy draws: second half mirrors the first exactly, so the
  // sample mean of every linear functional of the draws is exactly zero.
  zeta_.resize(kZetaRows, cfg_.n_fantasies);
  std::mt19937_64 fant_rng(mix_seed(cfg_.seed, kStreamFantasies));
  std::normal_distribution<double> normal(0.0, 1.0);
  const int half = cfg_.n_fantasies / 2;
  for (int c = 0; c < half; ++c)
    for (int r = 0; r < kZetaRows; ++r) zeta_(r, c) = normal(fant_rng);
  for (int c = 0; c < half; ++c) zeta_.col(half + c) = -zeta_.col(c);
}

TakgEvaluator::FantasyOperator TakgEvaluator::build_operator(
    const ParamVector& theta, const std::vector<Fidelity>& fids) const {
  validate_theta(theta, bounds_);
  const int m = static_cast<int>(fids.size());
  if (m > kZetaRows)
    throw std::invalid_argument("TakgEvaluator: too many fantasy fidelities");

  const GpHyperparams& h = model_->hyperparams();
  const Standardizer& st = model_->standardizer();
  const Eigen::Matrix<double, kParamDim, 1> z = st.to_unit(theta);
  const int n = model_->size();
  const int J = static_cast<int>(cand_unit_.rows());

  Eigen::MatrixXd P(m, kParamDim + 1);
  for (int i = 0; i < m; ++i)
    P.row(i) = joint_from_unit(z, fids[static_cast<std::size_t>(i)]).transpose();

  Eigen::MatrixXd Kpp(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      Kpp(i, j) = kernel_joint_std(P.row(i).transpose(), P.row(j).transpose(), h);

  Eigen::MatrixXd Vp(n, m);
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd k = model_->kernel_vs_data(P.row(i).transpose());
    if (n > 0) Vp.col(i) = model_->chol().triangularView<Eigen::Lower>().solve(k);
  }

  Eigen::MatrixXd sigma = Kpp;
  if (n > 0) sigma -= Vp.transpose() * Vp;
  sigma = 0.5 * (sigma + sigma.transpose());
  sigma.diagonal().array() += h.noise_variance;

  Eigen::MatrixXd C;
  double jitter = 0.0;
  while (true) {
    Eigen::MatrixXd trial = sigma;
    trial.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(trial);
    if (llt.info() == Eigen::Success) {
      C = llt.matrixL();
      break;
    }
    jitter = (jitter == 0.0) ? 1e-12 : jitter * 10.0;
    if (jitter > 1e-2) throw IllConditionedGram("fantasy covariance not positive definite");
  }

  // Cross covariance between the fantasy points and the candidates, already
  // conditioned on the data.
  Eigen::MatrixXd B(m, J);
  for (int j = 0; j < J; ++j) {
    const JointPoint c = joint_from_unit(cand_unit_.row(j).transpose(), Fidelity::target());
    for (int i = 0; i < m; ++i) B(i, j) = kernel_joint_std(P.row(i).transpose(), c, h);
  }
  if (n > 0) B -= Vp.transpose() * cand_v_;

  FantasyOperator op;
  op.means = cand_mean_;
  op.gains = C.triangularView<Eigen::Lower>().solve(B);
  return op;
}

double TakgEvaluator::expected_loss_current() const {
  return -model_->standardizer().unstandardize_mean(best_current_mean_);
}

double TakgEvaluator::expected_loss(const ParamVector& theta,
                                    const std::vector<Fidelity>& fids) const {
  if (fids.empty()) return expected_loss_current();
  const FantasyOperator op = build_operator(theta, fids);
  const int m = static_cast<int>(fids.size());
  const int F = static_cast<int>(zeta_.cols());
  Eigen::VectorXd vals(F);
#pragma omp parallel for schedule(static)
  for (int f = 0; f < F; ++f) {
    const Eigen::VectorXd contrib = op.gains.transpose() * zeta_.col(f).head(m);
    vals[f] = (op.means + contrib).maxCoeff();
  }
  double sum = 0.0;
  for (int f = 0; f < F; ++f) sum += vals[f];
  return -model_->standardizer().unstandardize_mean(sum / static_cast<double>(F));
}

double TakgEvaluator::expected_loss_reference(const ParamVector& theta,
                                              const std::vector<Fidelity>& fids) const {
  if (fids.empty()) return expected_loss_current();
  const FantasyOperator op = build_operator(theta, fids);
  const int m = static_cast<int>(fids.size());
  const int F = static_cast<int>(zeta_.cols());
  Eigen::VectorXd vals(F);
  for (int f = 0; f < F; ++f) {
    const Eigen::VectorXd contrib = op.gains.transpose() * zeta_.col(f).head(m);
    vals[f] = (op.means + contrib).maxCoeff();
  }
  double sum = 0.0;
  for (int f = 0; f < F; ++f) sum += vals[f];
  return -model_->standardizer().unstandardize_mean(sum / static_cast<double>(F));
}

double TakgEvaluator::takg(const ParamVector& theta) const {
  if (cfg_.fantasy_fidelities.empty())
    throw std::invalid_argument("TakgEvaluator: fantasy_fidelities must be set for takg");
  const double diff = expected_loss_current() - expected_loss(theta, cfg_.fantasy_fidelities);
  return std::max(diff, 0.0);
}

SelectResult select_next(const GpModel& model, const AcquisitionConfig& cfg,
                         const ParamBounds& bounds) {
  const TakgEvaluator eval(model, cfg, bounds);
  Standardizer st;
  st.bounds = bounds;
  return maximize_over_unit_cube(
      [&](const Eigen::Matrix<double, kParamDim, 1>& z) { return eval.takg(st.from_unit(z)); },
      cfg, st);
}

SelectResult select_next_ei(const GpModel& model, const AcquisitionConfig& cfg,
                            const ParamBounds& bounds, const Incumbent& inc) {
  Standardizer st;
  st.bounds = bounds;
  const auto objective = [&](const Eigen::Matrix<double, kParamDim, 1>& z) {
    const Posterior p = model.predict(st.from_unit(z), Fidelity::target());
    const double sd = std::sqrt(std::max(p.variance, 0.0));
    if (!inc.valid) return sd;  // no incumbent yet: pure exploration
    return expected_improvement(p.mean, sd, inc.g_star);
  };
  return maximize_over_unit_cube(objective, cfg, st);
}

double expected_loss(const GpModel& model, const ParamVector& theta,
                     const std::vector<Fidelity>& fids, const AcquisitionConfig& cfg,
                     const ParamBounds& bounds) {
  const TakgEvaluator eval(model, cfg, bounds);
  return eval.expected_loss(theta, fids);
}

double takg(const GpModel& model, const ParamVector& theta, const std::vector<Fidelity>& fids,
            const AcquisitionConfig& cfg, const ParamBounds& bounds) {
  const TakgEvaluator eval(model, cfg, bounds);
  const double diff = eval.expected_loss_current() - eval.expected_loss(theta, fids);
  return std::max(diff, 0.0);
}

}  // namespace tsibo
