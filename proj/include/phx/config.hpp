#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace phx {

// Resolved pipeline configuration: defaults deep-merged with the config
// file and command-line overrides. Unknown or duplicate keys are errors.
struct PipelineConfig {
    nlohmann::json resolved;
    std::vector<std::string> non_default_keys;  // dotted paths set by the user

    uint64_t seed() const { return resolved.at("seed").get<uint64_t>(); }
    int workers() const { return resolved.at("workers").get<int>(); }
};

nlohmann::json config_defaults();

// Throws std::runtime_error on duplicate keys, unknown keys, or bad values.
// file_text may be empty (defaults only). overrides are dotted-path
// assignments like "dedup.jaccard_threshold=0.9"; values parse as JSON when
// possible, else as strings. PHXF_SEED, when set, overrides the file seed
// but not an explicit flag.
PipelineConfig resolve_config(const std::string& file_text,
                              const std::vector<std::string>& overrides);

std::string explain_config(const PipelineConfig& cfg);

}  // namespace phx
