#include "doctest.h"
#include "phx/planner.hpp"
#include "test_util.hpp"

#include <cstdio>
#include <fstream>

using namespace phx;

namespace {

MeasurementRecord rec(uint32_t tp, uint32_t cu, double throughput, double interactivity,
                      const std::string& label = "") {
    MeasurementRecord r;
    r.tp_degree = tp;
    r.concurrent_users = cu;
    r.aggregate_throughput = throughput;
    r.interactivity = interactivity;
    r.label = label;
    return r;
}

// the three reference operating points
std::vector<MeasurementRecord> reference_points() {
    return {rec(2, 128, 2864.9, 2864.9 / 128, "TP2-CU128"),
            rec(4, 64, 2864.4, 2864.4 / 64, "TP4-CU64"),
            rec(8, 8, 800.0, 100.0, "TP8-CU8")};
}

}  // namespace

TEST_CASE("efficiency: unit identity and report cross-checks") {
    MeasurementRecord unit = rec(1, 1, 1000.0, 1000.0);
    unit.per_gpu_power_kw = 1.0;
    CHECK(efficiency(unit) == doctest::Approx(1'000'000.0));

    // TP4 at 2.17 kW/GPU: 2864.4 / 0.00868 MW = ~330,000 tokens/s/MW
    CHECK(efficiency(rec(4, 64, 2864.4, 44.8)) == doctest::Approx(330000.0).epsilon(0.001));
    // TP2: 2864.9 / 0.00434 MW = ~660,000 tokens/s/MW
    CHECK(efficiency(rec(2, 128, 2864.9, 22.4)) == doctest::Approx(660000.0).epsilon(0.001));
}

TEST_CASE("efficiency: homogeneity") {
    auto r = rec(4, 64, 2864.4, 44.8);
    auto doubled = r;
    doubled.aggregate_throughput *= 2;
    CHECK(efficiency(doubled) == doctest::Approx(2 * efficiency(r)));
    auto tp8 = r;
    tp8.tp_degree = 8;
    CHECK(efficiency(tp8) == doctest::Approx(efficiency(r) / 2));
}

TEST_CASE("consistency_check: implied interactivity") {
    // 2864.4 / 64 = 44.76 ~ "45 tokens/s/user"
    CHECK(consistency_check(rec(4, 64, 2864.4, 44.8), 0.10));
    // 2864.9 / 128 = 22.38 ~ "approximately 22"
    CHECK(consistency_check(rec(2, 128, 2864.9, 22.4), 0.10));
    // fabricated: interactivity twice the implied value
    CHECK(!consistency_check(rec(4, 64, 2864.4, 89.5), 0.10));
}

TEST_CASE("pareto_frontier: single and dominated records") {
    auto single = pareto_frontier({rec(4, 64, 2864.4, 44.8)});
    CHECK(single.size() == 1);

    auto two = pareto_frontier({rec(4, 64, 4000.0, 50.0), rec(4, 64, 2000.0, 30.0)});
    REQUIRE(two.size() == 1);
    CHECK(two[0].interactivity == doctest::Approx(50.0));
}

TEST_CASE("pareto_frontier: the three operating points are all non-dominated") {
    auto frontier = pareto_frontier(reference_points());
    REQUIRE(frontier.size() == 3);
    // sorted by interactivity
    CHECK(frontier[0].label == "TP2-CU128");
    CHECK(frontier[1].label == "TP4-CU64");
    CHECK(frontier[2].label == "TP8-CU8");
}

TEST_CASE("pareto_frontier: excluded records are dominated by a member") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<MeasurementRecord> records;
        size_t n = 1 + rng() % 12;
        for (size_t i = 0; i < n; ++i)
            records.push_back(rec(1 << (rng() % 4), 1 + rng() % 128,
                                  100.0 + rng() % 5000, 1.0 + rng() % 100));
        auto frontier = pareto_frontier(records);
        // brute-force pairwise scan
        for (const auto& r : records) {
            bool on_frontier = false;
            for (const auto& f : frontier)
                if (f.tp_degree == r.tp_degree && f.concurrent_users == r.concurrent_users &&
                    f.aggregate_throughput == r.aggregate_throughput &&
                    f.interactivity == r.interactivity)
                    on_frontier = true;
            if (on_frontier) continue;
            bool dominated = false;
            for (const auto& f : frontier) {
                bool geq = efficiency(f) >= efficiency(r) && f.interactivity >= r.interactivity;
                bool strict = efficiency(f) > efficiency(r) || f.interactivity > r.interactivity;
                if (geq && strict) dominated = true;
            }
            CHECK(dominated);
        }
        // mutual non-dominance on the frontier
        for (const auto& a : frontier)
            for (const auto& b : frontier) {
                bool dom = efficiency(a) >= efficiency(b) && a.interactivity >= b.interactivity &&
                           (efficiency(a) > efficiency(b) || a.interactivity > b.interactivity);
                CHECK(!dom);
            }
    }
}

TEST_CASE("select_config: threshold 40 picks TP4/CU64") {
    auto outcome = select_config(reference_points(), 40.0);
    auto* plan = std::get_if<DeploymentPlan>(&outcome);
    REQUIRE(plan != nullptr);
    CHECK(plan->chosen.label == "TP4-CU64");
    // chosen is on the frontier
    bool found = false;
    for (const auto& f : plan->frontier)
        if (f.label == plan->chosen.label) found = true;
    CHECK(found);
}

TEST_CASE("select_config: threshold 80 picks the TP8 point") {
    auto outcome = select_config(reference_points(), 80.0);
    auto* plan = std::get_if<DeploymentPlan>(&outcome);
    REQUIRE(plan != nullptr);
    CHECK(plan->chosen.label == "TP8-CU8");
}

TEST_CASE("select_config: threshold 200 is infeasible with best shortfall") {
    auto outcome = select_config(reference_points(), 200.0);
    auto* inf = std::get_if<InfeasiblePlan>(&outcome);
    REQUIRE(inf != nullptr);
    REQUIRE(inf->best_shortfall.has_value());
    CHECK(inf->best_shortfall->label == "TP8-CU8");
}

TEST_CASE("autoscale: ceiling arithmetic and monotonicity") {
    auto outcome = select_config(reference_points(), 40.0);
    auto& plan = std::get<DeploymentPlan>(outcome);
    CHECK(autoscale(plan, 64) == 1);
    CHECK(autoscale(plan, 65) == 2);
    CHECK(autoscale(plan, 1000) == 16);
    uint64_t prev = 0;
    for (uint64_t demand = 1; demand <= 500; ++demand) {
        uint64_t r = autoscale(plan, demand);
        CHECK(r >= prev);
        prev = r;
    }
}

TEST_CASE("csv ingestion with derived interactivity warning") {
    std::string path = "test_measurements.csv";
    {
        std::ofstream out(path);
        out << "tp_degree,concurrent_users,aggregate_throughput,interactivity,per_gpu_power_kw,label\n";
        out << "4,64,2864.4,44.8,2.17,TP4-CU64\n";
        out << "2,128,2864.9,,2.17,TP2-CU128\n";
        out << "8,8,800.0,100.0,,TP8-CU8\n";
    }
    std::vector<std::string> warnings;
    auto records = records_from_csv(path, &warnings);
    std::remove(path.c_str());
    REQUIRE(records.size() == 3);
    CHECK(records[1].interactivity == doctest::Approx(2864.9 / 128));
    REQUIRE(warnings.size() == 1);
    CHECK(records[2].per_gpu_power_kw == doctest::Approx(2.17));  // documented default
}

TEST_CASE("json ingestion and plan serialization") {
    auto records = records_from_json(R"([
        {"tp_degree":4,"concurrent_users":64,"aggregate_throughput":2864.4,
         "interactivity":44.8,"label":"TP4-CU64"}])");
    REQUIRE(records.size() == 1);
    auto outcome = select_config(records, 40.0);
    auto text = plan_outcome_to_json(outcome);
    CHECK(text.find("\"feasible\": true") != std::string::npos);
    CHECK(text.find("TP4-CU64") != std::string::npos);

    auto plot = plot_data_json(records);
    CHECK(plot.find("TP4") != std::string::npos);
}
