// Copyright (c) the abm-calib authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "abmcalib.h"

#include <fstream>
#include <string>

#include <json.hpp>

#include "common.hpp"
#include "experiment.hpp"

using nlohmann::json;

// Opaque handle backing the C API. The experiment configuration is kept as
// JSON until run time so overrides can be layered on before validation.
struct abmcalib_engine {
  json config = json::object();
  std::string last_error;
  std::string summary;
  int scenario_count = -1;
};

namespace {

abmcalib_status fail(abmcalib_engine* e, abmcalib_status st,
                     const std::string& msg) {
  if (e) e->last_error = msg;
  return st;
}

json summarize(const std::vector<abmcalib::ScenarioResult>& results) {
  json rows = json::array();
  for (const auto& r : results) {
    json row;
    row["id"] = r.id;
    row["status"] = r.failed ? "failed" : "ok";
    if (r.failed) row["error"] = r.error;
    row["digest"] = r.data_digest;
    row["wall_seconds"] = r.wall_seconds;
    if (r.has_comparison) {
      row["log_bf"] = r.bayes.log_bf;
      row["evidence"] = r.bayes.label();
      row["delta_waic"] = r.waic_delta;
      row["delta_waic_se"] = r.waic_delta_se;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

extern "C" {

const char* abmcalib_version(void) { return "0.1.0"; }

abmcalib_status abmcalib_engine_create_from_string(
    const char* config_json, abmcalib_engine** out_engine) {
  if (!config_json || !out_engine)
    return ABMCALIB_ERROR_INVALID_ARGUMENT;
  *out_engine = nullptr;
  json parsed = json::parse(config_json, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object())
    return ABMCALIB_ERROR_CONFIG;
  auto* e = new abmcalib_engine;
  e->config = std::move(parsed);
  *out_engine = e;
  return ABMCALIB_OK;
}

abmcalib_status abmcalib_engine_create(const char* config_path,
                                       abmcalib_engine** out_engine) {
  if (!config_path || !out_engine)
    return ABMCALIB_ERROR_INVALID_ARGUMENT;
  *out_engine = nullptr;
  std::ifstream in(config_path);
  if (!in) return ABMCALIB_ERROR_CONFIG;
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return abmcalib_engine_create_from_string(text.c_str(), out_engine);
}

void abmcalib_engine_destroy(abmcalib_engine* engine) { delete engine; }

abmcalib_status abmcalib_engine_set(abmcalib_engine* engine, const char* key,
                                    const char* value) {
  if (!engine || !key || !value) return ABMCALIB_ERROR_INVALID_ARGUMENT;
  engine->last_error.clear();
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = std::string(value);

  json* node = &engine->config;
  std::string path(key);
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = path.find('.', pos);
    const std::string part = path.substr(pos, dot - pos);
    if (part.empty())
      return fail(engine, ABMCALIB_ERROR_INVALID_ARGUMENT,
                  "empty key segment in '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(parsed);
      return ABMCALIB_OK;
    }
    node = &(*node)[part];
    if (!node->is_object()) *node = json::object();
    pos = dot + 1;
  }
}

abmcalib_status abmcalib_engine_run(abmcalib_engine* engine,
                                    const char* command,
                                    const char* only_filter) {
  if (!engine || !command) return ABMCALIB_ERROR_INVALID_ARGUMENT;
  engine->last_error.clear();
  engine->summary.clear();
  engine->scenario_count = -1;
  try {
    const abmcalib::RunStage stage = abmcalib::run_stage_from_name(command);
    abmcalib::ExperimentConfig cfg =
        abmcalib::ExperimentConfig::from_json(engine->config);
    abmcalib::Engine eng(std::move(cfg));
    const std::vector<abmcalib::ScenarioResult> results =
        eng.run(stage, only_filter ? only_filter : "");
    engine->scenario_count = static_cast<int>(results.size());
    engine->summary = summarize(results).dump();
    for (const auto& r : results)
      if (r.failed)
        return fail(engine, ABMCALIB_ERROR_PARTIAL,
                    "scenario " + r.id + " failed: " + r.error);
    return ABMCALIB_OK;
  } catch (const abmcalib::ConfigError& e) {
    return fail(engine, ABMCALIB_ERROR_CONFIG, e.what());
  } catch (const json::exception& e) {
    return fail(engine, ABMCALIB_ERROR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(engine, ABMCALIB_ERROR_RUNTIME, e.what());
  }
}

const char* abmcalib_engine_last_error(const abmcalib_engine* engine) {
  return engine ? engine->last_error.c_str() : "null engine";
}

const char* abmcalib_engine_summary_json(const abmcalib_engine* engine) {
  return engine ? engine->summary.c_str() : "";
}

int abmcalib_engine_scenario_count(const abmcalib_engine* engine) {
  return engine ? engine->scenario_count : -1;
}

}  // extern "C"
