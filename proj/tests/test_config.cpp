#include "doctest.h"
#include "phx/config.hpp"
#include "phx/pipeline.hpp"

#include <cstdlib>

using namespace phx;

TEST_CASE("empty config resolves to documented defaults") {
    auto cfg = resolve_config("", {});
    CHECK(cfg.resolved["dedup"]["jaccard_threshold"].get<double>() == doctest::Approx(0.8));
    CHECK(cfg.resolved["dedup"]["shingle_k"].get<int>() == 5);
    CHECK(cfg.resolved["dedup"]["num_perm"].get<int>() == 128);
    CHECK(cfg.resolved["decontam"]["n"].get<int>() == 13);
    CHECK(cfg.resolved["decontam"]["max_hits"].get<int>() == 1);
    CHECK(cfg.resolved["sampler"]["weight_cap"].get<double>() == doctest::Approx(4.0));
    CHECK(cfg.resolved["planner"]["min_interactivity"].get<double>() == doctest::Approx(40.0));
    CHECK(cfg.resolved["filter"]["heuristic_thresholds"]["min_words"].get<int>() == 50);
    CHECK(cfg.non_default_keys.empty());
}

TEST_CASE("file values override defaults and are flagged") {
    auto cfg = resolve_config(R"({"dedup":{"jaccard_threshold":0.9}})", {});
    CHECK(cfg.resolved["dedup"]["jaccard_threshold"].get<double>() == doctest::Approx(0.9));
    REQUIRE(cfg.non_default_keys.size() == 1);
    CHECK(cfg.non_default_keys[0] == "dedup.jaccard_threshold");
    auto dump = explain_config(cfg);
    CHECK(dump.find("0.9") != std::string::npos);
    CHECK(dump.find("dedup.jaccard_threshold") != std::string::npos);
}

TEST_CASE("flags take precedence over file values") {
    auto cfg = resolve_config(R"({"dedup":{"jaccard_threshold":0.9}})",
                              {"dedup.jaccard_threshold=0.7"});
    CHECK(cfg.resolved["dedup"]["jaccard_threshold"].get<double>() == doctest::Approx(0.7));
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS(resolve_config(R"({"dedupe":{}})", {}));
    CHECK_THROWS(resolve_config(R"({"dedup":{"jackard":0.8}})", {}));
    CHECK_THROWS(resolve_config("", {"nope.key=1"}));
}

TEST_CASE("duplicate keys are rejected") {
    CHECK_THROWS(resolve_config(R"({"seed":1,"seed":2})", {}));
    CHECK_THROWS(resolve_config(R"({"dedup":{"shingle_k":5,"shingle_k":6}})", {}));
}

TEST_CASE("PHXF_SEED overrides the file seed") {
    setenv("PHXF_SEED", "777", 1);
    auto cfg = resolve_config(R"({"seed":5})", {});
    CHECK(cfg.seed() == 777);
    // an explicit flag still wins
    auto cfg2 = resolve_config(R"({"seed":5})", {"seed=9"});
    CHECK(cfg2.seed() == 9);
    unsetenv("PHXF_SEED");
}

TEST_CASE("typed config views") {
    auto cfg = resolve_config(
        R"({"filter":{"blocked_domains":["bad.example"],"required_tier":"Medium"},
            "sampler":{"weight_overrides":{"src1":2.5},
                       "targets":[{"name":"multi","languages":["ms"],
                                   "target_fraction":0.53,"tolerance":0.02}]}})",
        {});
    auto policy = filter_policy_from_config(cfg.resolved);
    CHECK(policy.blocked_domains.count("bad.example") == 1);
    CHECK(policy.required_tier == QualityTier::Medium);

    auto params = dedup_params_from_config(cfg.resolved);
    CHECK(params.num_perm == 128);
    CHECK_NOTHROW(params.validate());

    auto targets = targets_from_config(cfg.resolved);
    REQUIRE(targets.size() == 1);
    SourceManifest m;
    m.source_id = "x";
    m.language_tags = {"ms"};
    CHECK(targets[0].member(m));
    m.language_tags = {"en"};
    CHECK(!targets[0].member(m));
}
