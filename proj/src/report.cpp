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

#include "tsibo/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tsibo {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json theta_to_json(const ParamVector& theta) {
  json arr = json::array();
  for (int i = 0; i < kParamDim; ++i) arr.push_back(theta[i]);
  return arr;
}

ParamVector theta_from_json(const json& arr) {
  ParamVector theta;
  for (int i = 0; i < kParamDim; ++i) theta[i] = arr.at(static_cast<std::size_t>(i)).get<double>();
  return theta;
}

std::string to_string(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::kCompletedFull: return "completed";
    case EpisodeStatus::kStoppedEarly: return "stopped_early";
    case EpisodeStatus::kDiverged: return "diverged";
  }
  return "completed";
}

EpisodeStatus status_from_string(const std::string& s) {
  if (s == "completed") return EpisodeStatus::kCompletedFull;
  if (s == "stopped_early") return EpisodeStatus::kStoppedEarly;
  if (s == "diverged") return EpisodeStatus::kDiverged;
  throw std::invalid_argument("unknown episode status: " + s);
}

StopVerdict verdict_from_string(const std::string& s) {
  if (s == "continue") return StopVerdict::kContinue;
  if (s == "stop_unpromising") return StopVerdict::kStopUnpromising;
  if (s == "stop_converged") return StopVerdict::kStopConverged;
  throw std::invalid_argument("unknown stop verdict: " + s);
}

StopRule rule_from_string(const std::string& s) {
  if (s == "none") return StopRule::kNone;
  if (s == "ucb") return StopRule::kUcb;
  if (s == "ei") return StopRule::kEi;
  if (s == "convergence") return StopRule::kConvergence;
  throw std::invalid_argument("unknown stop rule: " + s);
}

json episode_to_json(const RunLog& log, const EpisodeRecord& rec) {
  json j;
  j["method"] = to_string(log.method);
  j["seed"] = log.seed;
  j["budget"] = log.budget;
  j["iteration"] = rec.iteration;
  j["initial_design"] = rec.is_initial_design;
  j["theta"] = theta_to_json(rec.theta);
  j["steps_used"] = rec.steps_used;
  j["status"] = to_string(rec.status);
  j["stop_verdict"] = to_string(rec.stop.verdict);
  j["stop_rule"] = to_string(rec.stop.rule);
  j["stop_statistic"] = rec.stop.statistic;
  j["stop_threshold"] = rec.stop.threshold;
  json obs = json::array();
  for (const Observation& o : rec.observations) obs.push_back({{"s", o.fidelity.s}, {"g", o.g}});
  j["observations"] = obs;
  j["cumulative_steps"] = rec.cumulative_steps;
  j["incumbent_valid"] = rec.incumbent_valid;
  j["incumbent_g"] = rec.incumbent_g;
  j["incumbent_theta"] = theta_to_json(rec.incumbent_theta);
  json hyper;
  json ls = json::array();
  for (int i = 0; i < kParamDim; ++i) ls.push_back(rec.hyperparams.lengthscales[i]);
  hyper["lengthscales"] = ls;
  hyper["signal_variance"] = rec.hyperparams.signal_variance;
  hyper["noise_variance"] = rec.hyperparams.noise_variance;
  hyper["fidelity_decay"] = rec.hyperparams.fidelity_decay;
  hyper["fidelity_offset"] = rec.hyperparams.fidelity_offset;
  hyper["fidelity_active"] = rec.hyperparams.fidelity_active;
  j["hyperparams"] = hyper;
  j["acquisition_value"] = rec.acquisition_value;
  j["acquisition_fallback"] = rec.acquisition_fallback;
  j["solver_failures"] = rec.solver_failures;
  return j;
}

EpisodeRecord episode_from_json(const json& j) {
  EpisodeRecord rec;
  rec.iteration = j.at("iteration").get<int>();
  rec.is_initial_design = j.at("initial_design").get<bool>();
  rec.theta = theta_from_json(j.at("theta"));
  rec.steps_used = j.at("steps_used").get<int>();
  rec.status = status_from_string(j.at("status").get<std::string>());
  rec.stop.verdict = verdict_from_string(j.at("stop_verdict").get<std::string>());
  rec.stop.rule = rule_from_string(j.at("stop_rule").get<std::string>());
  rec.stop.statistic = j.at("stop_statistic").get<double>();
  rec.stop.threshold = j.at("stop_threshold").get<double>();
  for (const json& o : j.at("observations")) {
    Observation obs;
    obs.theta = rec.theta;
    obs.fidelity = Fidelity{o.at("s").get<double>()};
    obs.g = o.at("g").get<double>();
    rec.observations.push_back(obs);
  }
  rec.cumulative_steps = j.at("cumulative_steps").get<long>();
  rec.incumbent_valid = j.at("incumbent_valid").get<bool>();
  rec.incumbent_g = j.at("incumbent_g").get<double>();
  rec.incumbent_theta = theta_from_json(j.at("incumbent_theta"));
  const json& hyper = j.at("hyperparams");
  for (int i = 0; i < kParamDim; ++i)
    rec.hyperparams.lengthscales[i] = hyper.at("lengthscales").at(static_cast<std::size_t>(i)).get<double>();
  rec.hyperparams.signal_variance = hyper.at("signal_variance").get<double>();
  rec.hyperparams.noise_variance = hyper.at("noise_variance").get<double>();
  rec.hyperparams.fidelity_decay = hyper.at("fidelity_decay").get<double>();
  rec.hyperparams.fidelity_offset = hyper.at("fidelity_offset").get<double>();
  rec.hyperparams.fidelity_active = hyper.at("fidelity_active").get<bool>();
  rec.acquisition_value = j.at("acquisition_value").get<double>();
  rec.acquisition_fallback = j.at("acquisition_fallback").get<bool>();
  rec.solver_failures = j.at("solver_failures").get<int>();
  return rec;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

std::string run_jsonl_string(const RunLog& log) {
  std::string out;
  for (const EpisodeRecord& rec : log.episodes) {
    out += episode_to_json(log, rec).dump();
    out += '\n';
  }
  return out;
}

void write_run_jsonl(const RunLog& log, const std::string& path) {
  write_text_file(path, run_jsonl_string(log));
}

RunLog read_run_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  RunLog log;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (first) {
      log.method = method_from_string(j.at("method").get<std::string>());
      log.seed = j.at("seed").get<std::uint64_t>();
      log.budget = j.at("budget").get<long>();
      first = false;
    }
    log.episodes.push_back(episode_from_json(j));
  }
  if (first) throw std::runtime_error("empty run log: " + path);
  return log;
}

void write_trace_jsonl(const EpisodeResult& result, const std::string& path) {
  std::string out;
  for (std::size_t k = 0; k < result.states.size(); ++k) {
    json j;
    j["type"] = "step";
    j["k"] = k;
    json x = json::array();
    for (int i = 0; i < kStateDim; ++i) x.push_back(result.states[k][i]);
    j["x"] = x;
    if (k < result.inputs.size()) j["u"] = result.inputs[k];
    out += j.dump();
    out += '\n';
  }
  for (std::size_t l = 0; l < result.observations.size(); ++l) {
    json j;
    j["type"] = "checkpoint";
    j["l"] = l + 1;
    j["s"] = result.observations[l].fidelity.s;
    j["g"] = result.observations[l].g;
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

std::string curves_csv_string(const std::vector<std::pair<std::string, Envelope>>& envelopes) {
  std::string out = "method,step,min,median,max\n";
  for (const auto& [method, env] : envelopes) {
    for (std::size_t i = 0; i < env.steps.size(); ++i) {
      out += method;
      out += ',';
      out += std::to_string(env.steps[i]);
      out += ',';
      out += format_double(env.low[i]);
      out += ',';
      out += format_double(env.median[i]);
      out += ',';
      out += format_double(env.high[i]);
      out += '\n';
    }
  }
  return out;
}

void write_curves_csv(const std::vector<std::pair<std::string, Envelope>>& envelopes,
                      const std::string& path) {
  write_text_file(path, curves_csv_string(envelopes));
}

void write_envelope_svg(const std::vector<std::pair<std::string, Envelope>>& envelopes,
                        const std::string& path) {
  static const char* kColors[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44", "#aa3377",
                                  "#66ccee"};
  const int width = 720;
  const int height = 480;
  const int ml = 70, mr = 20, mt = 20, mb = 50;

  long max_step = 1;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& [name, env] : envelopes) {
    for (std::size_t i = 0; i < env.steps.size(); ++i) {
      max_step = std::max(max_step, env.steps[i]);
      if (!any) {
        lo = env.low[i];
        hi = env.high[i];
        any = true;
      } else {
        lo = std::min(lo, env.low[i]);
        hi = std::max(hi, env.high[i]);
      }
    }
  }
  if (!any) {
    lo = -1.0;
    hi = 1.0;
  }
  if (hi <= lo) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const auto sx = [&](double step) {
    return ml + (step / static_cast<double>(max_step)) * (width - ml - mr);
  };
  const auto sy = [&](double v) {
    return mt + (hi - v) / (hi - lo) * (height - mt - mb);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    const double step = max_step * t / 4.0;
    const double v = lo + (hi - lo) * t / 4.0;
    svg << "<line x1=\"" << format_double(sx(step)) << "\" y1=\"" << (height - mb) << "\" x2=\""
        << format_double(sx(step)) << "\" y2=\"" << (height - mb + 5)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << format_double(sx(step)) << "\" y=\"" << (height - mb + 20)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << static_cast<long>(step) << "</text>\n";
    svg << "<line x1=\"" << (ml - 5) << "\" y1=\"" << format_double(sy(v)) << "\" x2=\"" << ml
        << "\" y2=\"" << format_double(sy(v)) << "\" stroke=\"black\"/>\n";
    char vb[32];
    std::snprintf(vb, sizeof(vb), "%.4g", v);
    svg << "<text x=\"" << (ml - 8) << "\" y=\"" << format_double(sy(v) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << vb << "</text>\n";
  }
  svg << "<line x1=\"" << ml << "\" y1=\"" << (height - mb) << "\" x2=\"" << (width - mr)
      << "\" y2=\"" << (height - mb) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << (height - mb) << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (ml + (width - ml - mr) / 2) << "\" y=\"" << (height - 10)
      << "\" font-size=\"12\" text-anchor=\"middle\">cumulative closed-loop steps</text>\n";
  svg << "<text x=\"15\" y=\"" << (mt + (height - mt - mb) / 2)
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << (mt + (height - mt - mb) / 2) << ")\">best objective so far</text>\n";

  int color_idx = 0;
  int legend_y = mt + 14;
  for (const auto& [name, env] : envelopes) {
    const char* color = kColors[color_idx % 6];
    ++color_idx;
    if (!env.steps.empty()) {
      std::ostringstream band;
      band << "M";
      for (std::size_t i = 0; i < env.steps.size(); ++i)
        band << format_double(sx(static_cast<double>(env.steps[i]))) << ","
             << format_double(sy(env.high[i])) << " ";
      for (std::size_t i = env.steps.size(); i-- > 0;)
        band << format_double(sx(static_cast<double>(env.steps[i]))) << ","
             << format_double(sy(env.low[i])) << " ";
      band << "Z";
      svg << "<path d=\"" << band.str() << "\" fill=\"" << color
          << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";

      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < env.steps.size(); ++i)
        svg << format_double(sx(static_cast<double>(env.steps[i]))) << ","
            << format_double(sy(env.median[i])) << " ";
      svg << "\"/>\n";
    }
    svg << "<rect x=\"" << (width - mr - 170) << "\" y=\"" << (legend_y - 9)
        << "\" width=\"14\" height=\"4\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << (width - mr - 150) << "\" y=\"" << legend_y
        << "\" font-size=\"11\">" << name << "</text>\n";
    legend_y += 16;
  }
  svg << "</svg>\n";
  write_text_file(path, svg.str());
}

void emit_report(const std::vector<RunLog>& logs, const std::string& out_dir, long grid_stride) {
  std::map<std::string, std::vector<std::vector<std::pair<long, double>>>> by_method;
  long max_step = 0;
  for (const RunLog& log : logs) {
    by_method[to_string(log.method)].push_back(best_so_far_curve(log));
    max_step = std::max(max_step, log.budget);
  }
  std::vector<std::pair<std::string, Envelope>> envelopes;
  for (const Method m : all_methods()) {
    const auto it = by_method.find(to_string(m));
    if (it == by_method.end()) continue;
    envelopes.emplace_back(it->first, aggregate_envelope(it->second, max_step, grid_stride));
  }
  write_curves_csv(envelopes, out_dir + "/curves.csv");
  write_envelope_svg(envelopes, out_dir + "/envelopes.svg");
}

std::string run_log_filename(Method method, std::uint64_t seed) {
  return to_string(method) + "_seed" + std::to_string(seed) + ".jsonl";
}

}  // namespace tsibo
