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

#ifndef TSIBO_CONFIG_HPP
#define TSIBO_CONFIG_HPP

#include <string>

#include "tsibo/campaign.hpp"

namespace tsibo {

// Built-in defaults (the experiment configuration of the benchmark).
[[nodiscard]] CampaignConfig default_config();

// Applies a flat-key JSON object ({"episode.total_steps": 80, ...}) on top of
// base. Unknown keys or wrong types raise invalid_argument (fail fast before
// any episode runs).
[[nodiscard]] CampaignConfig apply_config_text(const CampaignConfig& base, const std::string& text);
[[nodiscard]] CampaignConfig load_config_file(const CampaignConfig& base, const std::string& path);

// Effective config as deterministic flat-key JSON (sorted keys, one per line).
[[nodiscard]] std::string dump_config(const CampaignConfig& cfg);

}  // namespace tsibo

#endif  // TSIBO_CONFIG_HPP
