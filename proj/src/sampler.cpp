#include "phx/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace phx {

using nlohmann::json;

SamplingPlan plan_mixture(const std::vector<SourceManifest>& manifests,
                          uint64_t budget_tokens,
                          const std::map<std::string, double>& overrides,
                          const SamplerOptions& opts, uint64_t seed) {
    if (budget_tokens == 0) throw std::runtime_error("budget_tokens must be > 0");
    if (manifests.empty()) throw std::runtime_error("no source manifests");

    SamplingPlan plan;
    plan.budget_tokens = budget_tokens;
    plan.seed = seed;
    plan.counter_name = kDefaultCounterName;

    auto exempt = [&](const std::string& id) {
        return std::find(opts.cap_exempt.begin(), opts.cap_exempt.end(), id) !=
               opts.cap_exempt.end();
    };

    double pinned_mass = 0.0;
    double free_mass = 0.0;
    for (const auto& m : manifests) {
        double w = m.sampling_weight;
        auto it = overrides.find(m.source_id);
        if (it != overrides.end()) w = it->second;
        if (w <= 0)
            throw std::runtime_error("weight must be > 0 for source " + m.source_id);
        if (w > opts.weight_cap && !exempt(m.source_id))
            throw std::runtime_error("weight " + std::to_string(w) + " exceeds cap " +
                                     std::to_string(opts.weight_cap) + " for source " +
                                     m.source_id);
        PlanEntry e;
        e.source_id = m.source_id;
        e.weight = w;
        e.effective_tokens =
            static_cast<uint64_t>(std::llround(w * static_cast<double>(m.total_tokens)));
        plan.entries.push_back(e);
        double mass = w * static_cast<double>(m.total_tokens);
        if (opts.pin_essential && m.essential) pinned_mass += mass;
        else free_mass += mass;
    }
    double total_mass = pinned_mass + free_mass;
    if (total_mass <= 0) throw std::runtime_error("total effective token mass is zero");

    if (!opts.pin_essential) {
        // global-proportional rescale preserves all pairwise ratios
        size_t i = 0;
        for (const auto& m : manifests) {
            double w = plan.entries[i].weight;
            plan.entries[i].fraction = w * static_cast<double>(m.total_tokens) / total_mass;
            ++i;
        }
    } else {
        double budget = static_cast<double>(budget_tokens);
        if (pinned_mass > budget)
            throw std::runtime_error("pinned essential sources exceed the token budget");
        size_t i = 0;
        for (const auto& m : manifests) {
            double mass = plan.entries[i].weight * static_cast<double>(m.total_tokens);
            if (m.essential) {
                plan.entries[i].fraction = mass / budget;
            } else {
                plan.entries[i].fraction =
                    free_mass > 0 ? (mass / free_mass) * (1.0 - pinned_mass / budget) : 0.0;
            }
            ++i;
        }
    }
    return plan;
}

std::vector<MixtureViolation> validate_plan(const SamplingPlan& plan,
                                            const std::vector<SourceManifest>& manifests,
                                            const std::vector<MixtureTarget>& targets) {
    std::unordered_map<std::string, double> fraction;
    for (const auto& e : plan.entries) fraction[e.source_id] = e.fraction;

    std::vector<MixtureViolation> out;
    for (const auto& t : targets) {
        double actual = 0.0;
        for (const auto& m : manifests)
            if (t.member(m)) actual += fraction.count(m.source_id) ? fraction[m.source_id] : 0.0;
        double gap = actual - t.target_fraction;
        if (std::abs(gap) > t.tolerance)
            out.push_back({t.name, actual, t.target_fraction, gap});
    }
    return out;
}

namespace {

// Deterministic Fisher-Yates; avoids std::shuffle's unspecified draw order.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& gen) {
    for (size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[gen() % i]);
}

}  // namespace

std::vector<ScheduleDraw> emit_schedule(
    const SamplingPlan& plan,
    const std::vector<std::vector<std::string>>& corpus_ids_per_source,
    uint64_t seed) {
    if (corpus_ids_per_source.size() != plan.entries.size())
        throw std::runtime_error("corpus id lists do not match plan entries");

    std::vector<ScheduleDraw> schedule;
    for (size_t s = 0; s < plan.entries.size(); ++s) {
        const double w = plan.entries[s].weight;
        const uint32_t n = static_cast<uint32_t>(corpus_ids_per_source[s].size());
        if (n == 0) continue;
        const uint64_t full = static_cast<uint64_t>(std::floor(w));
        const double frac = w - static_cast<double>(full);
        for (uint64_t pass = 0; pass < full; ++pass)
            for (uint32_t d = 0; d < n; ++d)
                schedule.push_back({static_cast<uint32_t>(s), d});
        const uint32_t extra = static_cast<uint32_t>(std::llround(frac * n));
        if (extra > 0) {
            // subsample without replacement, seeded per source
            std::vector<uint32_t> idx(n);
            for (uint32_t d = 0; d < n; ++d) idx[d] = d;
            std::mt19937_64 gen(seed ^ (0x9e3779b97f4a7c15ULL * (s + 1)));
            seeded_shuffle(idx, gen);
            for (uint32_t d = 0; d < extra; ++d)
                schedule.push_back({static_cast<uint32_t>(s), idx[d]});
        }
    }
    std::mt19937_64 gen(seed);
    seeded_shuffle(schedule, gen);
    return schedule;
}

std::string plan_to_json(const SamplingPlan& plan) {
    json j;
    j["budget_tokens"] = plan.budget_tokens;
    j["seed"] = plan.seed;
    j["counter_name"] = plan.counter_name;
    j["entries"] = json::array();
    for (const auto& e : plan.entries)
        j["entries"].push_back({{"source_id", e.source_id},
                                {"weight", e.weight},
                                {"effective_tokens", e.effective_tokens},
                                {"fraction", e.fraction}});
    return j.dump(2);
}

SamplingPlan plan_from_json(const std::string& text) {
    json j = json::parse(text);
    SamplingPlan p;
    p.budget_tokens = j.at("budget_tokens").get<uint64_t>();
    p.seed = j.at("seed").get<uint64_t>();
    p.counter_name = j.at("counter_name").get<std::string>();
    for (const auto& e : j.at("entries")) {
        PlanEntry pe;
        pe.source_id = e.at("source_id").get<std::string>();
        pe.weight = e.at("weight").get<double>();
        pe.effective_tokens = e.at("effective_tokens").get<uint64_t>();
        pe.fraction = e.at("fraction").get<double>();
        p.entries.push_back(std::move(pe));
    }
    return p;
}

std::string schedule_to_json(const std::vector<ScheduleDraw>& schedule,
                             const SamplingPlan& plan) {
    json j;
    j["sources"] = json::array();
    for (const auto& e : plan.entries) j["sources"].push_back(e.source_id);
    json draws = json::array();
    for (const auto& d : schedule)
        draws.push_back({d.source_index, d.doc_index});
    j["draws"] = std::move(draws);
    return j.dump();
}

namespace {
constexpr char kSchedMagic[4] = {'P', 'H', 'X', 'S'};
constexpr uint32_t kSchedVersion = 1;
}  // namespace

void save_schedule(const std::vector<ScheduleDraw>& schedule, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write schedule file: " + path);
    out.write(kSchedMagic, 4);
    uint32_t version = kSchedVersion;
    uint64_t count = schedule.size();
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(schedule.data()),
              static_cast<std::streamsize>(count * sizeof(ScheduleDraw)));
}

std::vector<ScheduleDraw> load_schedule(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open schedule file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kSchedMagic, 4) != 0)
        throw std::runtime_error("bad schedule magic in " + path);
    uint32_t version = 0;
    uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!in || version != kSchedVersion)
        throw std::runtime_error("unsupported schedule version in " + path);
    std::vector<ScheduleDraw> out(count);
    in.read(reinterpret_cast<char*>(out.data()),
            static_cast<std::streamsize>(count * sizeof(ScheduleDraw)));
    if (!in) throw std::runtime_error("truncated schedule file: " + path);
    return out;
}

}  // namespace phx
