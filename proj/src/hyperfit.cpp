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

#include "tsibo/hyperfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "tsibo/rng.hpp"

namespace tsibo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Search box per hyperparameter, in natural units.
struct CoordBox {
  double lo;
  double hi;
};

std::vector<CoordBox> coordinate_boxes(bool fidelity_active) {
  std::vector<CoordBox> box;
  for (int i = 0; i < kParamDim; ++i) box.push_back({0.05, 10.0});  // lengthscales (unit cube)
  box.push_back({1e-3, 1e2});                                       // signal variance
  box.push_back({1e-8, 1e-1});                                      // noise variance
  if (fidelity_active) {
    box.push_back({0.05, 20.0});  // fidelity decay exponent
    box.push_back({0.01, 20.0});  // fidelity offset
  }
  return box;
}

Eigen::VectorXd pack(const GpHyperparams& h) {
  const int dim = h.fidelity_active ? kParamDim + 4 : kParamDim + 2;
  Eigen::VectorXd v(dim);
  for (int i = 0; i < kParamDim; ++i) v[i] = std::log(h.lengthscales[i]);
  v[kParamDim] = std::log(h.signal_variance);
  v[kParamDim + 1] = std::log(h.noise_variance);
  if (h.fidelity_active) {
    v[kParamDim + 2] = std::log(h.fidelity_decay);
    v[kParamDim + 3] = std::log(h.fidelity_offset);
  }
  return v;
}

GpHyperparams unpack(const Eigen::VectorXd& v, const GpHyperparams& proto) {
  GpHyperparams h = proto;
  for (int i = 0; i < kParamDim; ++i) h.lengthscales[i] = std::exp(v[i]);
  h.signal_variance = std::exp(v[kParamDim]);
  h.noise_variance = std::exp(v[kParamDim + 1]);
  if (proto.fidelity_active) {
    h.fidelity_decay = std::exp(v[kParamDim + 2]);
    h.fidelity_offset = std::exp(v[kParamDim + 3]);
  }
  return h;
}

Eigen::VectorXd clamp_log(Eigen::VectorXd v, const std::vector<CoordBox>& box) {
  for (int i = 0; i < v.size(); ++i) {
    const auto& b = box[static_cast<std::size_t>(i)];
    v[i] = std::clamp(v[i], std::log(b.lo), std::log(b.hi));
  }
  return v;
}

// Direct evidence evaluation on pre-standardized inputs. Returns -inf when
// the Gram matrix cannot be factorized (never escalates jitter here: the
// search should simply avoid that region).
class EvidenceObjective {
 public:
  EvidenceObjective(Eigen::MatrixXd X, Eigen::VectorXd resid)
      : X_(std::move(X)), resid_(std::move(resid)) {}

  [[nodiscard]] double operator()(const GpHyperparams& h) const {
    const int n = static_cast<int>(X_.rows());
    Eigen::MatrixXd K = gram_matrix(X_, h);
    K.diagonal().array() += h.noise_variance;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) return kNegInf;
    const Eigen::MatrixXd& L = llt.matrixL();
    const Eigen::VectorXd beta = L.triangularView<Eigen::Lower>().solve(resid_);
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += std::log(L(i, i));
    const double lml = -0.5 * beta.squaredNorm() - logdet -
                       0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return std::isfinite(lml) ? lml : kNegInf;
  }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd resid_;
};

}  // namespace

HyperFitResult fit_hyperparameters(const std::vector<Observation>& data, const GpHyperparams& init,
                                   const Standardizer& st, const HyperFitOptions& opt) {
  init.validate();
  HyperFitResult result;
  result.params = init;
  result.lml = kNegInf;
  if (data.empty()) return result;

  // Evidence is evaluated on the most recent max_points observations.
  std::size_t first = 0;
  if (opt.max_points > 0 && data.size() > static_cast<std::size_t>(opt.max_points))
    first = data.size() - static_cast<std::size_t>(opt.max_points);
  const int n = static_cast<int>(data.size() - first);
  Eigen::MatrixXd X(n, kParamDim + 1);
  Eigen::VectorXd resid(n);
  for (int i = 0; i < n; ++i) {
    const Observation& obs = data[first + static_cast<std::size_t>(i)];
    X.row(i).head<kParamDim>() = st.to_unit(obs.theta).transpose();
    X(i, kParamDim) = obs.fidelity.s;
    resid[i] = st.standardize_g(obs.g);
  }
  const EvidenceObjective objective(std::move(X), std::move(resid));

  const std::vector<CoordBox> box = coordinate_boxes(init.fidelity_active);
  const int dim = static_cast<int>(box.size());
  int evals = 0;
  const auto eval_log = [&](const Eigen::VectorXd& v) {
    ++evals;
    return objective(unpack(v, init));
  };

  const Eigen::VectorXd v_init = clamp_log(pack(init), box);
  const double lml_init = eval_log(v_init);

  Eigen::VectorXd best_v = v_init;
  double best_lml = lml_init;

  std::mt19937_64 rng(mix_seed(opt.seed, 0x48594645ULL));
  const int restarts = std::max(opt.restarts, 1);
  Eigen::MatrixXd starts;
  if (restarts > 1) starts = latin_hypercube(restarts - 1, dim, rng);

  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd x;
    if (r == 0) {
      x = v_init;
    } else {
      x.resize(dim);
      for (int d = 0; d < dim; ++d) {
        const auto& b = box[static_cast<std::size_t>(d)];
        x[d] = std::log(b.lo) + starts(r - 1, d) * (std::log(b.hi) - std::log(b.lo));
      }
    }
    double fx = (r == 0) ? lml_init : eval_log(x);
    double step = 0.6;
    int local_evals = 0;
    while (step > 0.02 && local_evals < opt.max_evals_per_restart) {
      bool improved_sweep = false;
      for (int d = 0; d < dim && local_evals < opt.max_evals_per_restart; ++d) {
        for (const double sign : {1.0, -1.0}) {
          Eigen::VectorXd y = x;
          y[d] += sign * step;
          y = clamp_log(y, box);
          if (y[d] == x[d]) continue;
          const double fy = eval_log(y);
          ++local_evals;
          if (fy > fx) {
            x = y;
            fx = fy;
            improved_sweep = true;
            break;
          }
        }
      }
      if (!improved_sweep) step *= 0.5;
    }
    if (fx > best_lml) {
      best_lml = fx;
      best_v = x;
    }
  }

  result.evals = evals;
  if (best_lml > lml_init && std::isfinite(best_lml)) {
    result.params = unpack(best_v, init);
    result.lml = best_lml;
    result.improved = true;
  } else {
    result.params = init;
    result.lml = lml_init;
    result.improved = false;
  }
  return result;
}

}  // namespace tsibo
