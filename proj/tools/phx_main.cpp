#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phx/config.hpp"
#include "phx/pipeline.hpp"

namespace {

std::string read_file_or_empty(const std::string& path) {
    if (path.empty()) return "";
    std::ifstream in(path);
    if (!in) throw phx::ValidationError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phx: corpus curation, evaluation scoring, and deployment planning"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::vector<std::string> overrides;
    long long seed_flag = -1;
    int workers_flag = -1;
    app.add_option("--config", config_path, "pipeline config JSON file")->capture_default_str();
    app.add_option("--set", overrides, "override a config key, e.g. dedup.jaccard_threshold=0.9");
    app.add_option("--seed", seed_flag, "override the config seed");
    app.add_option("--workers", workers_flag, "worker thread count (0 = hardware default)");

    phx::StageIO io;
    std::string stage;

    auto add_io = [&](CLI::App* sub, bool input, bool output) {
        if (input) sub->add_option("--input", io.input, "input corpus JSONL")->required();
        if (output) sub->add_option("--output", io.output, "output path")->required();
        sub->add_option("--report", io.report, "stage report JSON path");
    };

    auto* filter = app.add_subcommand("filter", "URL, heuristic, and label filtering");
    add_io(filter, true, true);
    filter->add_option("--decisions", io.decisions, "per-document decision JSONL");

    auto* dedup = app.add_subcommand("dedup", "exact and MinHash-LSH deduplication");
    add_io(dedup, true, true);
    dedup->add_option("--dedup-report", io.dedup_report, "DedupReport JSON path");

    auto* decontam = app.add_subcommand("decontam", "n-gram benchmark decontamination");
    add_io(decontam, true, true);
    decontam->add_option("--benchmark", io.benchmark, "benchmark corpus JSONL");
    decontam->add_option("--index", io.index_in, "prebuilt binary n-gram index");
    decontam->add_option("--save-index", io.index_out, "persist the built index");
    decontam->add_option("--verdicts", io.verdicts, "per-document verdict JSONL");

    auto* plan = app.add_subcommand("plan", "mixture planning from source manifests");
    plan->add_option("--manifests", io.manifests, "SourceManifest JSONL")->required();
    plan->add_option("--output", io.output, "plan JSON path")->required();
    plan->add_option("--report", io.report, "stage report JSON path");

    auto* schedule = app.add_subcommand("schedule", "materialize a draw schedule from a plan");
    schedule->add_option("--plan", io.plan, "plan JSON from the plan stage")->required();
    schedule->add_option("--ids", io.ids, "JSON map of source_id to doc id list")->required();
    schedule->add_option("--output", io.output, "schedule JSON path")->required();
    schedule->add_option("--binary", io.binary_out, "compact binary schedule path");
    schedule->add_option("--report", io.report, "stage report JSON path");

    auto* score = app.add_subcommand("score", "deterministic evaluation metrics");
    add_io(score, true, true);

    auto* deploy = app.add_subcommand("deploy", "inference capacity planning");
    deploy->add_option("--measurements", io.measurements, "benchmark CSV or JSON")->required();
    deploy->add_option("--output", io.output, "deployment plan JSON path")->required();
    deploy->add_option("--plot", io.plot, "plot-data JSON export");
    deploy->add_option("--report", io.report, "stage report JSON path");

    auto* explain = app.add_subcommand("explain", "print the fully resolved configuration");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (seed_flag >= 0) overrides.push_back("seed=" + std::to_string(seed_flag));
        if (workers_flag >= 0) overrides.push_back("workers=" + std::to_string(workers_flag));
        phx::PipelineConfig cfg;
        try {
            cfg = phx::resolve_config(read_file_or_empty(config_path), overrides);
        } catch (const phx::ValidationError&) {
            throw;
        } catch (const std::exception& e) {
            throw phx::ValidationError(e.what());  // bad config is a usage error
        }

        if (explain->parsed()) {
            std::cout << phx::explain_config(cfg) << "\n";
            return 0;
        }
        for (auto* sub : {filter, dedup, decontam, plan, schedule, score, deploy})
            if (sub->parsed()) stage = sub->get_name();

        std::string error;
        int status = phx::run_stage(stage, cfg, io, &error);
        if (status != 0) std::cerr << "phx " << stage << ": " << error << "\n";
        return status;
    } catch (const phx::ValidationError& e) {
        std::cerr << "phx: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "phx: " << e.what() << "\n";
        return 2;
    }
}
