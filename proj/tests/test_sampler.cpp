#include "doctest.h"
#include "phx/sampler.hpp"
#include "test_util.hpp"

#include <cmath>
#include <cstdio>
#include <map>

using namespace phx;

namespace {

SourceManifest src(const std::string& id, uint64_t tokens, double weight = 1.0,
                   bool essential = false) {
    SourceManifest m;
    m.source_id = id;
    m.total_tokens = tokens;
    m.sampling_weight = weight;
    m.essential = essential;
    return m;
}

}  // namespace

TEST_CASE("plan_mixture: single source is the whole budget") {
    auto plan = plan_mixture({src("a", 10'000'000'000ULL)}, 10'000'000'000ULL, {});
    REQUIRE(plan.entries.size() == 1);
    CHECK(plan.entries[0].fraction == doctest::Approx(1.0));
    CHECK(plan.entries[0].effective_tokens == 10'000'000'000ULL);
}

TEST_CASE("plan_mixture: weight 4 quadruples effective tokens") {
    auto plan = plan_mixture({src("a", 10'000'000'000ULL, 4.0, true)}, 1'000'000ULL, {});
    CHECK(plan.entries[0].effective_tokens == 40'000'000'000ULL);
}

TEST_CASE("plan_mixture: three sources split 10/20/70") {
    auto plan = plan_mixture({src("a", 10), src("b", 20), src("c", 70)}, 100, {});
    CHECK(plan.entries[0].fraction == doctest::Approx(0.10));
    CHECK(plan.entries[1].fraction == doctest::Approx(0.20));
    CHECK(plan.entries[2].fraction == doctest::Approx(0.70));
}

TEST_CASE("plan_mixture: fractions sum to one and preserve ratios") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<SourceManifest> ms;
        size_t n = 2 + rng() % 8;
        for (size_t i = 0; i < n; ++i)
            ms.push_back(src("s" + std::to_string(i), 1 + rng() % 1000000,
                             0.25 + (rng() % 16) * 0.25));
        auto plan = plan_mixture(ms, 1'000'000, {});
        double sum = 0;
        for (const auto& e : plan.entries) sum += e.fraction;
        CHECK(std::abs(sum - 1.0) <= 1e-9);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                double lhs = plan.entries[i].fraction * ms[j].sampling_weight * ms[j].total_tokens;
                double rhs = plan.entries[j].fraction * ms[i].sampling_weight * ms[i].total_tokens;
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
            }
    }
}

TEST_CASE("plan_mixture: weight cap enforced, exemption list lifts it") {
    CHECK_THROWS_WITH_AS(plan_mixture({src("hot", 100, 5.0, true)}, 1000, {}),
                         doctest::Contains("hot"), std::runtime_error);
    SamplerOptions opts;
    opts.cap_exempt.push_back("hot");
    CHECK_NOTHROW(plan_mixture({src("hot", 100, 5.0, true)}, 1000, {}, opts));
}

TEST_CASE("plan_mixture: overrides replace manifest weights") {
    auto plan = plan_mixture({src("a", 100), src("b", 100)}, 200, {{"a", 3.0}});
    CHECK(plan.entries[0].weight == doctest::Approx(3.0));
    CHECK(plan.entries[0].fraction == doctest::Approx(0.75));
}

TEST_CASE("plan_mixture: manifest permutation does not change fractions") {
    std::vector<SourceManifest> ms{src("a", 10), src("b", 30), src("c", 60)};
    auto p1 = plan_mixture(ms, 100, {});
    std::swap(ms[0], ms[2]);
    auto p2 = plan_mixture(ms, 100, {});
    std::map<std::string, double> f1, f2;
    for (const auto& e : p1.entries) f1[e.source_id] = e.fraction;
    for (const auto& e : p2.entries) f2[e.source_id] = e.fraction;
    for (const auto& [k, v] : f1) CHECK(f2[k] == doctest::Approx(v));
}

TEST_CASE("plan_mixture: pin_essential mode keeps essential fraction absolute") {
    SamplerOptions opts;
    opts.pin_essential = true;
    auto plan = plan_mixture({src("ess", 100, 2.0, true), src("big", 10000)}, 1000, {}, opts);
    CHECK(plan.entries[0].fraction == doctest::Approx(0.2));  // 200/1000
    CHECK(plan.entries[1].fraction == doctest::Approx(0.8));
}

TEST_CASE("validate_plan: published mixture shares pass at 0.02 tolerance") {
    std::vector<SourceManifest> ms;
    ms.push_back(src("multi-a", 300));
    ms.back().language_tags = {"ms"};
    ms.push_back(src("multi-b", 230));
    ms.back().language_tags = {"ta"};
    ms.push_back(src("image-replay", 110));
    ms.back().modality = Modality::ImageText;
    ms.push_back(src("english-web", 360));
    auto plan = plan_mixture(ms, 1000, {});

    MixtureTarget multilingual{"multilingual",
                               [](const SourceManifest& m) { return !m.language_tags.empty(); },
                               0.53, 0.02};
    MixtureTarget image{"image-replay",
                        [](const SourceManifest& m) { return m.modality == Modality::ImageText; },
                        0.11, 0.02};
    CHECK(validate_plan(plan, ms, {multilingual, image}).empty());
}

TEST_CASE("validate_plan: violation reports the signed gap") {
    std::vector<SourceManifest> ms{src("multi", 30), src("rest", 70)};
    ms[0].language_tags = {"ms"};
    auto plan = plan_mixture(ms, 100, {});
    MixtureTarget t{"multilingual",
                    [](const SourceManifest& m) { return !m.language_tags.empty(); }, 0.53, 0.02};
    auto v = validate_plan(plan, ms, {t});
    REQUIRE(v.size() == 1);
    CHECK(v[0].signed_gap == doctest::Approx(-0.23));
}

TEST_CASE("emit_schedule: weight 1 draws every id exactly once") {
    SamplingPlan plan = plan_mixture({src("a", 100)}, 100, {});
    std::vector<std::vector<std::string>> ids{{}};
    for (int i = 0; i < 100; ++i) ids[0].push_back("doc" + std::to_string(i));
    auto sched = emit_schedule(plan, ids, 7);
    REQUIRE(sched.size() == 100);
    std::set<uint32_t> seen;
    for (const auto& d : sched) CHECK(seen.insert(d.doc_index).second);
}

TEST_CASE("emit_schedule: weight 2.5 over 100 ids gives 250 draws, 50 ids thrice") {
    SamplingPlan plan = plan_mixture({src("a", 100, 2.5, true)}, 250, {});
    std::vector<std::vector<std::string>> ids{{}};
    for (int i = 0; i < 100; ++i) ids[0].push_back("doc" + std::to_string(i));
    auto sched = emit_schedule(plan, ids, 7);
    REQUIRE(sched.size() == 250);
    std::map<uint32_t, int> counts;
    for (const auto& d : sched) ++counts[d.doc_index];
    int thrice = 0;
    for (const auto& [doc, c] : counts) {
        CHECK(c >= 2);
        CHECK(c <= 3);
        if (c == 3) ++thrice;
    }
    CHECK(thrice == 50);
}

TEST_CASE("emit_schedule: deterministic under seed, varies across seeds") {
    SamplingPlan plan = plan_mixture({src("a", 50, 1.5, true), src("b", 80)}, 200, {});
    std::vector<std::vector<std::string>> ids(2);
    for (int i = 0; i < 50; ++i) ids[0].push_back("a" + std::to_string(i));
    for (int i = 0; i < 80; ++i) ids[1].push_back("b" + std::to_string(i));
    auto s1 = emit_schedule(plan, ids, 42);
    auto s2 = emit_schedule(plan, ids, 42);
    REQUIRE(s1.size() == s2.size());
    for (size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].source_index == s2[i].source_index);
        CHECK(s1[i].doc_index == s2[i].doc_index);
    }
    auto s3 = emit_schedule(plan, ids, 43);
    bool differs = false;
    for (size_t i = 0; i < s1.size() && !differs; ++i)
        differs = s1[i].doc_index != s3[i].doc_index || s1[i].source_index != s3[i].source_index;
    CHECK(differs);
}

TEST_CASE("emit_schedule: multiplicities stay within floor/ceil of weight") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        double w = 0.25 + (rng() % 15) * 0.25;
        size_t n = 10 + rng() % 90;
        SamplingPlan plan = plan_mixture({src("a", n, w, true)},
                                         std::max<uint64_t>(1, static_cast<uint64_t>(w * n)), {});
        std::vector<std::vector<std::string>> ids{{}};
        for (size_t i = 0; i < n; ++i) ids[0].push_back("d" + std::to_string(i));
        auto sched = emit_schedule(plan, ids, rng());
        std::map<uint32_t, uint64_t> counts;
        for (const auto& d : sched) ++counts[d.doc_index];
        for (const auto& [doc, c] : counts) {
            CHECK(c >= static_cast<uint64_t>(std::floor(w)));
            CHECK(c <= static_cast<uint64_t>(std::ceil(w)));
        }
        CHECK(sched.size() == static_cast<uint64_t>(std::llround(w * n)));
    }
}

TEST_CASE("plan and schedule serialization round trips") {
    SamplingPlan plan = plan_mixture({src("a", 100), src("b", 200)}, 300, {});
    auto back = plan_from_json(plan_to_json(plan));
    CHECK(plan_to_json(back) == plan_to_json(plan));

    std::vector<std::vector<std::string>> ids(2);
    for (int i = 0; i < 10; ++i) ids[0].push_back("a" + std::to_string(i));
    for (int i = 0; i < 10; ++i) ids[1].push_back("b" + std::to_string(i));
    auto sched = emit_schedule(plan, ids, 5);
    save_schedule(sched, "test_sched.bin");
    auto loaded = load_schedule("test_sched.bin");
    REQUIRE(loaded.size() == sched.size());
    for (size_t i = 0; i < sched.size(); ++i) {
        CHECK(loaded[i].source_index == sched[i].source_index);
        CHECK(loaded[i].doc_index == sched[i].doc_index);
    }
    std::remove("test_sched.bin");
}
