#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace phx {

struct MeasurementRecord {
    uint32_t tp_degree = 1;
    uint32_t concurrent_users = 1;
    double aggregate_throughput = 0.0;  // tokens/s
    double interactivity = 0.0;         // decode tokens/s/user
    double per_gpu_power_kw = 2.17;
    std::string label;
};

// tokens/s/MW: throughput over total replica power (tp_degree GPUs).
double efficiency(const MeasurementRecord& rec);

// interactivity must be close to throughput / concurrent_users
bool consistency_check(const MeasurementRecord& rec, double rel_tolerance);

// Non-dominated on (efficiency, interactivity), sorted by interactivity.
std::vector<MeasurementRecord> pareto_frontier(const std::vector<MeasurementRecord>& records);

struct DeploymentPlan {
    MeasurementRecord chosen;
    double min_interactivity = 40.0;
    std::vector<MeasurementRecord> frontier;

    uint64_t replicas_for(uint64_t demand_users) const;
};

struct InfeasiblePlan {
    double min_interactivity = 0.0;
    // closest record by interactivity shortfall
    std::optional<MeasurementRecord> best_shortfall;
};

using PlanOutcome = std::variant<DeploymentPlan, InfeasiblePlan>;

// Among records meeting the interactivity threshold, pick maximum
// efficiency; ties broken by lower tp_degree then lower concurrency.
PlanOutcome select_config(const std::vector<MeasurementRecord>& records,
                          double min_interactivity = 40.0);

uint64_t autoscale(const DeploymentPlan& plan, uint64_t demand_users);

// CSV columns: tp_degree,concurrent_users,aggregate_throughput,
// interactivity,per_gpu_power_kw,label (header required; interactivity and
// power may be blank, in which case defaults/derivation apply).
std::vector<MeasurementRecord> records_from_csv(const std::string& path,
                                                std::vector<std::string>* warnings = nullptr);
std::vector<MeasurementRecord> records_from_json(const std::string& text);

std::string plan_outcome_to_json(const PlanOutcome& outcome);

// x = interactivity, y = efficiency, series keyed by tp_degree
std::string plot_data_json(const std::vector<MeasurementRecord>& records);

}  // namespace phx
