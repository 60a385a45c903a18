#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "phx/corpus.hpp"

namespace phx {

struct PlanEntry {
    std::string source_id;
    double weight = 1.0;          // epochs
    uint64_t effective_tokens = 0;  // round(weight * total_tokens), pre-rescale
    double fraction = 0.0;        // of budget, post-rescale
};

struct SamplingPlan {
    std::vector<PlanEntry> entries;
    uint64_t budget_tokens = 0;
    uint64_t seed = 0;
    std::string counter_name;
};

struct MixtureTarget {
    std::string name;
    std::function<bool(const SourceManifest&)> member;
    double target_fraction = 0.0;
    double tolerance = 0.0;
};

struct MixtureViolation {
    std::string target_name;
    double actual = 0.0;
    double target = 0.0;
    double signed_gap = 0.0;  // actual - target
};

struct SamplerOptions {
    double weight_cap = 4.0;                    // for essential sources
    std::vector<std::string> cap_exempt;        // explicit exemption list
    bool pin_essential = false;                 // alternate rescale mode
};

// Effective tokens per source = weight * total_tokens, rescaled so the sum
// equals the budget. Throws when a non-exempt source exceeds the cap.
SamplingPlan plan_mixture(const std::vector<SourceManifest>& manifests,
                          uint64_t budget_tokens,
                          const std::map<std::string, double>& overrides,
                          const SamplerOptions& opts = {}, uint64_t seed = 0);

std::vector<MixtureViolation> validate_plan(const SamplingPlan& plan,
                                            const std::vector<SourceManifest>& manifests,
                                            const std::vector<MixtureTarget>& targets);

struct ScheduleDraw {
    uint32_t source_index = 0;
    uint32_t doc_index = 0;
};

// floor(w) full passes plus a frac(w) subsample without replacement,
// globally interleaved by a seeded shuffle. Byte-identical for identical
// inputs and seed.
std::vector<ScheduleDraw> emit_schedule(
    const SamplingPlan& plan,
    const std::vector<std::vector<std::string>>& corpus_ids_per_source,
    uint64_t seed);

std::string plan_to_json(const SamplingPlan& plan);
SamplingPlan plan_from_json(const std::string& text);
std::string schedule_to_json(const std::vector<ScheduleDraw>& schedule,
                             const SamplingPlan& plan);

// Compact binary schedule: magic "PHXS", version, count, (u32,u32) pairs.
void save_schedule(const std::vector<ScheduleDraw>& schedule, const std::string& path);
std::vector<ScheduleDraw> load_schedule(const std::string& path);

}  // namespace phx
