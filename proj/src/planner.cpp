#include "phx/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace phx {

using nlohmann::json;

double efficiency(const MeasurementRecord& rec) {
    if (rec.per_gpu_power_kw <= 0) throw std::runtime_error("per_gpu_power_kw must be > 0");
    double megawatts = rec.tp_degree * rec.per_gpu_power_kw / 1000.0;
    return rec.aggregate_throughput / megawatts;
}

bool consistency_check(const MeasurementRecord& rec, double rel_tolerance) {
    double implied = rec.aggregate_throughput / rec.concurrent_users;
    if (implied <= 0) return false;
    return std::abs(rec.interactivity - implied) / implied <= rel_tolerance;
}

std::vector<MeasurementRecord> pareto_frontier(const std::vector<MeasurementRecord>& records) {
    if (records.empty()) throw std::runtime_error("no measurement records");
    std::vector<MeasurementRecord> out;
    for (size_t i = 0; i < records.size(); ++i) {
        bool dominated = false;
        double ei = efficiency(records[i]);
        for (size_t j = 0; j < records.size() && !dominated; ++j) {
            if (i == j) continue;
            double ej = efficiency(records[j]);
            bool geq = ej >= ei && records[j].interactivity >= records[i].interactivity;
            bool strict = ej > ei || records[j].interactivity > records[i].interactivity;
            if (geq && strict) dominated = true;
        }
        if (!dominated) out.push_back(records[i]);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.interactivity < b.interactivity;
    });
    return out;
}

uint64_t DeploymentPlan::replicas_for(uint64_t demand_users) const {
    if (demand_users == 0) return 0;
    uint64_t cu = chosen.concurrent_users;
    return (demand_users + cu - 1) / cu;
}

PlanOutcome select_config(const std::vector<MeasurementRecord>& records,
                          double min_interactivity) {
    if (records.empty()) throw std::runtime_error("no measurement records");
    const MeasurementRecord* best = nullptr;
    for (const auto& r : records) {
        if (r.interactivity < min_interactivity) continue;
        if (!best || efficiency(r) > efficiency(*best) ||
            (efficiency(r) == efficiency(*best) &&
             (r.tp_degree < best->tp_degree ||
              (r.tp_degree == best->tp_degree &&
               r.concurrent_users < best->concurrent_users))))
            best = &r;
    }
    if (!best) {
        InfeasiblePlan inf;
        inf.min_interactivity = min_interactivity;
        const MeasurementRecord* closest = nullptr;
        for (const auto& r : records)
            if (!closest || r.interactivity > closest->interactivity) closest = &r;
        if (closest) inf.best_shortfall = *closest;
        return inf;
    }
    DeploymentPlan plan;
    plan.chosen = *best;
    plan.min_interactivity = min_interactivity;
    plan.frontier = pareto_frontier(records);
    return plan;
}

uint64_t autoscale(const DeploymentPlan& plan, uint64_t demand_users) {
    return plan.replicas_for(demand_users);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

json record_to_json(const MeasurementRecord& r) {
    return {{"tp_degree", r.tp_degree},
            {"concurrent_users", r.concurrent_users},
            {"aggregate_throughput", r.aggregate_throughput},
            {"interactivity", r.interactivity},
            {"per_gpu_power_kw", r.per_gpu_power_kw},
            {"efficiency_tokens_per_s_per_mw", efficiency(r)},
            {"label", r.label}};
}

}  // namespace

std::vector<MeasurementRecord> records_from_csv(const std::string& path,
                                                std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open measurements file: " + path);
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("empty measurements file: " + path);
    auto cols = split_csv_line(header);
    std::map<std::string, size_t> col;
    for (size_t i = 0; i < cols.size(); ++i) col[cols[i]] = i;
    for (const char* req : {"tp_degree", "concurrent_users", "aggregate_throughput"})
        if (!col.count(req))
            throw std::runtime_error(std::string("missing CSV column: ") + req);

    std::vector<MeasurementRecord> out;
    std::string line;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        auto field = [&](const char* name) -> std::string {
            auto it = col.find(name);
            if (it == col.end() || it->second >= f.size()) return "";
            return f[it->second];
        };
        MeasurementRecord r;
        r.tp_degree = static_cast<uint32_t>(std::stoul(field("tp_degree")));
        r.concurrent_users = static_cast<uint32_t>(std::stoul(field("concurrent_users")));
        r.aggregate_throughput = std::stod(field("aggregate_throughput"));
        std::string inter = field("interactivity");
        if (inter.empty()) {
            // derivation excludes prefill; flag it
            r.interactivity = r.aggregate_throughput / r.concurrent_users;
            if (warnings)
                warnings->push_back("line " + std::to_string(lineno) +
                                    ": interactivity derived as throughput/concurrency");
        } else {
            r.interactivity = std::stod(inter);
        }
        std::string power = field("per_gpu_power_kw");
        if (!power.empty()) r.per_gpu_power_kw = std::stod(power);
        r.label = field("label");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<MeasurementRecord> records_from_json(const std::string& text) {
    json j = json::parse(text);
    std::vector<MeasurementRecord> out;
    for (const auto& e : j) {
        MeasurementRecord r;
        r.tp_degree = e.at("tp_degree").get<uint32_t>();
        r.concurrent_users = e.at("concurrent_users").get<uint32_t>();
        r.aggregate_throughput = e.at("aggregate_throughput").get<double>();
        if (e.contains("interactivity")) r.interactivity = e["interactivity"].get<double>();
        else r.interactivity = r.aggregate_throughput / r.concurrent_users;
        if (e.contains("per_gpu_power_kw"))
            r.per_gpu_power_kw = e["per_gpu_power_kw"].get<double>();
        if (e.contains("label")) r.label = e["label"].get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

std::string plan_outcome_to_json(const PlanOutcome& outcome) {
    json j;
    if (const auto* plan = std::get_if<DeploymentPlan>(&outcome)) {
        j["feasible"] = true;
        j["min_interactivity"] = plan->min_interactivity;
        j["chosen"] = record_to_json(plan->chosen);
        j["frontier"] = json::array();
        for (const auto& r : plan->frontier) j["frontier"].push_back(record_to_json(r));
    } else {
        const auto& inf = std::get<InfeasiblePlan>(outcome);
        j["feasible"] = false;
        j["min_interactivity"] = inf.min_interactivity;
        if (inf.best_shortfall) {
            j["best_shortfall"] = record_to_json(*inf.best_shortfall);
            j["shortfall"] = inf.min_interactivity - inf.best_shortfall->interactivity;
        }
    }
    return j.dump(2);
}

std::string plot_data_json(const std::vector<MeasurementRecord>& records) {
    std::map<uint32_t, json> series;
    for (const auto& r : records) {
        auto& s = series[r.tp_degree];
        if (s.is_null()) s = json::array();
        s.push_back({{"x", r.interactivity}, {"y", efficiency(r)},
                     {"concurrent_users", r.concurrent_users}, {"label", r.label}});
    }
    json j = json::object();
    for (auto& [tp, pts] : series) j["TP" + std::to_string(tp)] = std::move(pts);
    return j.dump(2);
}

}  // namespace phx
