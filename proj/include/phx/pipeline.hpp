#pragma once

#include <stdexcept>
#include <string>

#include "phx/config.hpp"
#include "phx/corpus.hpp"
#include "phx/dedup.hpp"
#include "phx/filter.hpp"
#include "phx/sampler.hpp"

namespace phx {

// config/parameter problems -> exit 1; data problems -> exit 2
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StageIO {
    std::string input;
    std::string output;
    std::string report;

    std::string decisions;     // filter: per-doc FilterDecision JSONL
    std::string dedup_report;  // dedup: DedupReport JSON
    std::string benchmark;     // decontam: benchmark corpus JSONL
    std::string index_in;      // decontam: prebuilt binary index
    std::string index_out;     // decontam: persist built index
    std::string verdicts;      // decontam: verdict JSONL
    std::string manifests;     // plan: SourceManifest JSONL
    std::string plan;          // schedule: plan JSON
    std::string ids;           // schedule: JSON map source_id -> [doc ids]
    std::string binary_out;    // schedule: compact binary form
    std::string measurements;  // deploy: CSV or JSON measurements
    std::string plot;          // deploy: plot-data JSON
};

// Typed views over config sections.
FilterPolicy filter_policy_from_config(const nlohmann::json& cfg);
DedupParams dedup_params_from_config(const nlohmann::json& cfg);
SamplerOptions sampler_options_from_config(const nlohmann::json& cfg);
std::vector<MixtureTarget> targets_from_config(const nlohmann::json& cfg);

// Executes one stage, writes outputs and the report. Returns the exit
// status (0 ok, 1 validation error, 2 data error); partial outputs are
// removed on failure. error_out receives the failure message.
int run_stage(const std::string& stage, const PipelineConfig& cfg, const StageIO& io,
              std::string* error_out = nullptr);

}  // namespace phx
