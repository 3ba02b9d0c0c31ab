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

#include "tsibo/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace tsibo {

namespace {

using nlohmann::json;

struct Binding {
  const char* key;
  std::function<json(const CampaignConfig&)> get;
  std::function<void(CampaignConfig&, const json&)> set;
};

json vec_to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

template <typename Vec>
void vec_from_json(Vec& v, const json& arr) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != v.size())
    throw std::invalid_argument("expected array of length " + std::to_string(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = arr.at(static_cast<std::size_t>(i)).get<double>();
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> kBindings = {
      {"campaign.method", [](const CampaignConfig& c) { return json(to_string(c.method)); },
       [](CampaignConfig& c, const json& v) { c.method = method_from_string(v.get<std::string>()); }},
      {"campaign.budget", [](const CampaignConfig& c) { return json(c.budget); },
       [](CampaignConfig& c, const json& v) { c.budget = v.get<long>(); }},
      {"campaign.initial_design_size",
       [](const CampaignConfig& c) { return json(c.initial_design_size); },
       [](CampaignConfig& c, const json& v) { c.initial_design_size = v.get<int>(); }},
      {"campaign.seeds",
       [](const CampaignConfig& c) { return json(c.seeds); },
       [](CampaignConfig& c, const json& v) { c.seeds = v.get<std::vector<std::uint64_t>>(); }},
      {"campaign.tau_ei_rel", [](const CampaignConfig& c) { return json(c.tau_ei_rel); },
       [](CampaignConfig& c, const json& v) { c.tau_ei_rel = v.get<double>(); }},
      {"campaign.refit_full_every",
       [](const CampaignConfig& c) { return json(c.refit_full_every); },
       [](CampaignConfig& c, const json& v) { c.refit_full_every = v.get<int>(); }},
      {"campaign.local_refit_evals",
       [](const CampaignConfig& c) { return json(c.local_refit_evals); },
       [](CampaignConfig& c, const json& v) { c.local_refit_evals = v.get<int>(); }},

      {"bounds.theta_min", [](const CampaignConfig& c) { return json(c.bounds.theta_min); },
       [](CampaignConfig& c, const json& v) { c.bounds.theta_min = v.get<double>(); }},
      {"bounds.theta_max", [](const CampaignConfig& c) { return json(c.bounds.theta_max); },
       [](CampaignConfig& c, const json& v) { c.bounds.theta_max = v.get<double>(); }},

      {"episode.total_steps", [](const CampaignConfig& c) { return json(c.episode.total_steps); },
       [](CampaignConfig& c, const json& v) { c.episode.total_steps = v.get<int>(); }},
      {"episode.num_checkpoints",
       [](const CampaignConfig& c) { return json(c.episode.num_checkpoints); },
       [](CampaignConfig& c, const json& v) { c.episode.num_checkpoints = v.get<int>(); }},
      {"episode.x0", [](const CampaignConfig& c) { return vec_to_json(c.episode.x0); },
       [](CampaignConfig& c, const json& v) { vec_from_json(c.episode.x0, v); }},
      {"episode.x_target", [](const CampaignConfig& c) { return vec_to_json(c.episode.x_target); },
       [](CampaignConfig& c, const json& v) { vec_from_json(c.episode.x_target, v); }},
      {"episode.state_weights",
       [](const CampaignConfig& c) { return vec_to_json(c.episode.state_weights); },
       [](CampaignConfig& c, const json& v) { vec_from_json(c.episode.state_weights, v); }},
      {"episode.blowup_limit",
       [](const CampaignConfig& c) { return json(c.episode.blowup_limit); },
       [](CampaignConfig& c, const json& v) { c.episode.blowup_limit = v.get<double>(); }},

      {"plant.cart_mass", [](const CampaignConfig& c) { return json(c.episode.plant.cart_mass); },
       [](CampaignConfig& c, const json& v) { c.episode.plant.cart_mass = v.get<double>(); }},
      {"plant.pole_mass", [](const CampaignConfig& c) { return json(c.episode.plant.pole_mass); },
       [](CampaignConfig& c, const json& v) { c.episode.plant.pole_mass = v.get<double>(); }},
      {"plant.pole_half_length",
       [](const CampaignConfig& c) { return json(c.episode.plant.pole_half_length); },
       [](CampaignConfig& c, const json& v) { c.episode.plant.pole_half_length = v.get<double>(); }},
      {"plant.gravity", [](const CampaignConfig& c) { return json(c.episode.plant.gravity); },
       [](CampaignConfig& c, const json& v) { c.episode.plant.gravity = v.get<double>(); }},
      {"plant.dt", [](const CampaignConfig& c) { return json(c.episode.plant.dt); },
       [](CampaignConfig& c, const json& v) { c.episode.plant.dt = v.get<double>(); }},

      {"mpc.horizon", [](const CampaignConfig& c) { return json(c.mpc.horizon); },
       [](CampaignConfig& c, const json& v) { c.mpc.horizon = v.get<int>(); }},
      {"mpc.u_max", [](const CampaignConfig& c) { return json(c.mpc.u_max); },
       [](CampaignConfig& c, const json& v) { c.mpc.u_max = v.get<double>(); }},
      {"mpc.max_iterations", [](const CampaignConfig& c) { return json(c.mpc.max_iterations); },
       [](CampaignConfig& c, const json& v) { c.mpc.max_iterations = v.get<int>(); }},
      {"mpc.cost_tolerance", [](const CampaignConfig& c) { return json(c.mpc.cost_tolerance); },
       [](CampaignConfig& c, const json& v) { c.mpc.cost_tolerance = v.get<double>(); }},

      {"acquisition.n_fantasies",
       [](const CampaignConfig& c) { return json(c.acquisition.n_fantasies); },
       [](CampaignConfig& c, const json& v) { c.acquisition.n_fantasies = v.get<int>(); }},
      {"acquisition.n_inner_candidates",
       [](const CampaignConfig& c) { return json(c.acquisition.n_inner_candidates); },
       [](CampaignConfig& c, const json& v) { c.acquisition.n_inner_candidates = v.get<int>(); }},
      {"acquisition.n_restarts",
       [](const CampaignConfig& c) { return json(c.acquisition.n_restarts); },
       [](CampaignConfig& c, const json& v) { c.acquisition.n_restarts = v.get<int>(); }},
      {"acquisition.polish_starts",
       [](const CampaignConfig& c) { return json(c.acquisition.polish_starts); },
       [](CampaignConfig& c, const json& v) { c.acquisition.polish_starts = v.get<int>(); }},
      {"acquisition.polish_sweeps",
       [](const CampaignConfig& c) { return json(c.acquisition.polish_sweeps); },
       [](CampaignConfig& c, const json& v) { c.acquisition.polish_sweeps = v.get<int>(); }},

      {"stopping.beta", [](const CampaignConfig& c) { return json(c.stopping.beta); },
       [](CampaignConfig& c, const json& v) { c.stopping.beta = v.get<double>(); }},
      {"stopping.epsilon", [](const CampaignConfig& c) { return json(c.stopping.epsilon); },
       [](CampaignConfig& c, const json& v) { c.stopping.epsilon = v.get<double>(); }},
      {"stopping.state_scale",
       [](const CampaignConfig& c) { return vec_to_json(c.stopping.state_scale); },
       [](CampaignConfig& c, const json& v) { vec_from_json(c.stopping.state_scale, v); }},

      {"hyper.lengthscales",
       [](const CampaignConfig& c) { return vec_to_json(c.hyper_init.lengthscales); },
       [](CampaignConfig& c, const json& v) { vec_from_json(c.hyper_init.lengthscales, v); }},
      {"hyper.signal_variance",
       [](const CampaignConfig& c) { return json(c.hyper_init.signal_variance); },
       [](CampaignConfig& c, const json& v) { c.hyper_init.signal_variance = v.get<double>(); }},
      {"hyper.noise_variance",
       [](const CampaignConfig& c) { return json(c.hyper_init.noise_variance); },
       [](CampaignConfig& c, const json& v) { c.hyper_init.noise_variance = v.get<double>(); }},
      {"hyper.fidelity_decay",
       [](const CampaignConfig& c) { return json(c.hyper_init.fidelity_decay); },
       [](CampaignConfig& c, const json& v) { c.hyper_init.fidelity_decay = v.get<double>(); }},
      {"hyper.fidelity_offset",
       [](const CampaignConfig& c) { return json(c.hyper_init.fidelity_offset); },
       [](CampaignConfig& c, const json& v) { c.hyper_init.fidelity_offset = v.get<double>(); }},

      {"hyperfit.restarts", [](const CampaignConfig& c) { return json(c.hyperfit.restarts); },
       [](CampaignConfig& c, const json& v) { c.hyperfit.restarts = v.get<int>(); }},
      {"hyperfit.max_evals_per_restart",
       [](const CampaignConfig& c) { return json(c.hyperfit.max_evals_per_restart); },
       [](CampaignConfig& c, const json& v) { c.hyperfit.max_evals_per_restart = v.get<int>(); }},
      {"hyperfit.max_points", [](const CampaignConfig& c) { return json(c.hyperfit.max_points); },
       [](CampaignConfig& c, const json& v) { c.hyperfit.max_points = v.get<int>(); }},
  };
  return kBindings;
}

// The MPC always predicts with the true plant parameters.
void finalize(CampaignConfig& cfg) {
  cfg.mpc.model = cfg.episode.plant;
  cfg.mpc.x_target = cfg.episode.x_target;
}

}  // namespace

CampaignConfig default_config() {
  CampaignConfig cfg;
  cfg.hyperfit.max_points = 160;
  finalize(cfg);
  return cfg;
}

CampaignConfig apply_config_text(const CampaignConfig& base, const std::string& text) {
  json overrides;
  try {
    overrides = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  if (!overrides.is_object()) throw std::invalid_argument("config must be a JSON object");

  CampaignConfig cfg = base;
  for (const auto& [key, value] : overrides.items()) {
    bool found = false;
    for (const Binding& b : bindings()) {
      if (key == b.key) {
        try {
          b.set(cfg, value);
        } catch (const std::exception& e) {
          throw std::invalid_argument("config key '" + key + "': " + e.what());
        }
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("unknown config key: " + key);
  }
  finalize(cfg);
  cfg.validate();
  return cfg;
}

CampaignConfig load_config_file(const CampaignConfig& base, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return apply_config_text(base, buf.str());
}

std::string dump_config(const CampaignConfig& cfg) {
  json out;
  for (const Binding& b : bindings()) out[b.key] = b.get(cfg);
  return out.dump(2) + "\n";
}

}  // namespace tsibo
